import { DialogPayload, ServerFrame } from "./protocol.js";

/**
 * Screen-facing session state.
 *
 * Two rules keep this honest: health (and every other vital) only ever copies
 * the most recent STATE frame — no client-side prediction around HIT events —
 * and `openDialogs` is append-only, so story beats already shown can never
 * vanish. Rendering reads this object; it never writes back.
 */
export interface HudState {
  health: number;
  maxHealth: number;
  timeRemaining: number;
  exposure: number;
  activeTool: string;
  status: string;
  openDialogs: readonly DialogPayload[];
  /** wall-clock ms of the last HIT, drives the brief health-bar flash */
  hitFlashAt: number | null;
  inputLocked: boolean;
  report: Record<string, unknown> | null;
  banner: string | null;
}

const TERMINAL = new Set(["COMPLETED", "TIME_UP"]);

export function initialHud(): HudState {
  return {
    health: 0,
    maxHealth: 0,
    timeRemaining: 0,
    exposure: 0,
    activeTool: "",
    status: "RUNNING",
    openDialogs: [],
    hitFlashAt: null,
    inputLocked: false,
    report: null,
    banner: null,
  };
}

export function reduceHud(state: HudState, frame: ServerFrame, now: number = Date.now()): HudState {
  switch (frame.type) {
    case "STATE":
      return {
        ...state,
        health: frame.health,
        maxHealth: frame.max_health,
        timeRemaining: frame.clock_remaining,
        exposure: frame.exposure,
        activeTool: frame.active_tool,
        status: frame.status,
        inputLocked: state.inputLocked || TERMINAL.has(frame.status),
      };
    case "EVENT": {
      const { kind, data } = frame.event;
      if (kind === "HIT") {
        return { ...state, hitFlashAt: now };
      }
      if (kind === "TRIGGER_REVEALED" || kind === "COMPLETED") {
        const dialog = data.dialog as DialogPayload;
        const next: HudState = { ...state, openDialogs: [...state.openDialogs, dialog] };
        if (kind === "COMPLETED") {
          next.inputLocked = true;
          next.status = "COMPLETED";
          next.report = (data.stats as Record<string, unknown>) ?? null;
        }
        return next;
      }
      if (kind === "TIME_UP") {
        return {
          ...state,
          inputLocked: true,
          status: "TIME_UP",
          report: (data.stats as Record<string, unknown>) ?? null,
        };
      }
      return state;
    }
    case "ERROR":
      return { ...state, banner: `${frame.code}: ${frame.message}` };
    default:
      return state;
  }
}

export function formatClock(seconds: number): string {
  const s = Math.max(0, Math.floor(seconds));
  const mm = String(Math.floor(s / 60)).padStart(2, "0");
  const ss = String(s % 60).padStart(2, "0");
  return `${mm}:${ss}`;
}

const FLASH_MS = 400;

/**
 * Rebuild the HUD DOM under `root` from `state`. Idempotent and read-only
 * with respect to the state object; all text goes in via textContent.
 */
export function renderHud(state: HudState, root: HTMLElement, now: number = Date.now()): void {
  const doc = root.ownerDocument;
  root.textContent = "";

  const bar = doc.createElement("div");
  bar.className = "health-bar";
  if (state.hitFlashAt !== null && now - state.hitFlashAt < FLASH_MS) {
    bar.classList.add("flash");
  }
  const fill = doc.createElement("div");
  fill.className = "health-fill";
  const frac = state.maxHealth > 0 ? state.health / state.maxHealth : 0;
  fill.style.width = `${(100 * frac).toFixed(1)}%`;
  const text = doc.createElement("span");
  text.className = "health-text";
  text.textContent = `${state.health}/${state.maxHealth}`;
  bar.append(fill, text);
  root.append(bar);

  const timer = doc.createElement("div");
  timer.className = "timer";
  timer.textContent = formatClock(state.timeRemaining);
  root.append(timer);

  const exposure = doc.createElement("div");
  exposure.className = "exposure";
  exposure.textContent = `${(100 * state.exposure).toFixed(1)}%`;
  root.append(exposure);

  const tool = doc.createElement("div");
  tool.className = "tool-name";
  tool.textContent = state.activeTool;
  root.append(tool);

  const stack = doc.createElement("div");
  stack.className = "dialog-stack";
  for (const dialog of state.openDialogs) {
    const card = doc.createElement("div");
    card.className = "dialog-card";
    const title = doc.createElement("h3");
    title.textContent = dialog.title;
    const body = doc.createElement("p");
    body.textContent = dialog.body;
    card.append(title, body);
    stack.append(card);
  }
  root.append(stack);

  if (state.banner !== null) {
    const banner = doc.createElement("div");
    banner.className = "banner";
    banner.textContent = state.banner;
    root.append(banner);
  }

  if (state.report !== null) {
    const report = doc.createElement("div");
    report.className = "report";
    const heading = doc.createElement("h2");
    heading.textContent = state.status === "COMPLETED" ? "Excavation complete" : "Time's up";
    report.append(heading);
    const list = doc.createElement("dl");
    for (const [key, value] of Object.entries(state.report)) {
      const dt = doc.createElement("dt");
      dt.textContent = key;
      const dd = doc.createElement("dd");
      dd.textContent = String(value);
      list.append(dt, dd);
    }
    report.append(list);
    root.append(report);
  }
}
