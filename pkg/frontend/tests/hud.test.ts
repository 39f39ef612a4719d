// @vitest-environment jsdom
import { describe, expect, it } from "vitest";
import { HudState, formatClock, initialHud, reduceHud, renderHud } from "../src/hud.js";
import { ServerFrame } from "../src/protocol.js";

function stateFrame(overrides: Partial<Extract<ServerFrame, { type: "STATE" }>> = {}): ServerFrame {
  return {
    type: "STATE",
    session_time: 0,
    health: 40,
    max_health: 40,
    clock_remaining: 420,
    exposure: 0,
    status: "RUNNING",
    active_tool: "hammer",
    ...overrides,
  };
}

function eventFrame(kind: string, data: Record<string, unknown>): ServerFrame {
  return { type: "EVENT", session_time: 0, event: { kind, t: 0, data } };
}

const DIALOG = { title: "First glint", body: "Something catches the light." };

describe("reduceHud", () => {
  it("mirrors STATE frames verbatim", () => {
    const hud = reduceHud(initialHud(), stateFrame({ health: 37, clock_remaining: 123.4, exposure: 0.5 }));
    expect(hud.health).toBe(37);
    expect(hud.maxHealth).toBe(40);
    expect(hud.timeRemaining).toBeCloseTo(123.4);
    expect(hud.exposure).toBeCloseTo(0.5);
    expect(hud.activeTool).toBe("hammer");
    expect(hud.inputLocked).toBe(false);
  });

  it("never predicts health from HIT events", () => {
    let hud = reduceHud(initialHud(), stateFrame());
    hud = reduceHud(hud, eventFrame("HIT", { contact_point: [0, 0, 0], health_after: 39 }), 1000);
    // health stays at the last STATE value until the next STATE frame lands
    expect(hud.health).toBe(40);
    expect(hud.hitFlashAt).toBe(1000);
    hud = reduceHud(hud, stateFrame({ health: 39 }));
    expect(hud.health).toBe(39);
  });

  it("appends dialog cards and never drops them", () => {
    let hud = reduceHud(initialHud(), stateFrame());
    hud = reduceHud(hud, eventFrame("TRIGGER_REVEALED", { trigger_id: "east", dialog: DIALOG }));
    const afterFirst = hud.openDialogs;
    hud = reduceHud(hud, eventFrame("TRIGGER_REVEALED", { trigger_id: "north", dialog: { title: "B", body: "b" } }));
    hud = reduceHud(hud, stateFrame({ health: 12 }));
    hud = reduceHud(hud, eventFrame("COMPLETED", { dialog: { title: "The Orb", body: "done" }, stats: {} }));
    expect(hud.openDialogs).toHaveLength(3);
    expect(hud.openDialogs.slice(0, 1)).toEqual(afterFirst);
    expect(hud.openDialogs.map((d) => d.title)).toEqual(["First glint", "B", "The Orb"]);
  });

  it("ignores bookkeeping events", () => {
    let hud = reduceHud(initialHud(), stateFrame());
    const before = hud;
    hud = reduceHud(hud, eventFrame("STROKE_APPLIED", { stroke_index: 1 }));
    hud = reduceHud(hud, eventFrame("EXPOSURE_MILESTONE", { decile: 1, exposure: 0.1 }));
    expect(hud).toEqual(before);
  });

  it("locks input at TIME_UP and keeps the report", () => {
    let hud = reduceHud(initialHud(), stateFrame());
    hud = reduceHud(hud, eventFrame("TIME_UP", { stats: { strokes: 12 } }));
    expect(hud.inputLocked).toBe(true);
    expect(hud.status).toBe("TIME_UP");
    expect(hud.report).toEqual({ strokes: 12 });
    // later STATE frames can't unlock a finished session
    hud = reduceHud(hud, stateFrame({ status: "TIME_UP" }));
    expect(hud.inputLocked).toBe(true);
  });

  it("locks input on COMPLETED", () => {
    let hud = reduceHud(initialHud(), stateFrame());
    hud = reduceHud(hud, eventFrame("COMPLETED", { dialog: DIALOG, stats: { hits: 0 } }));
    expect(hud.inputLocked).toBe(true);
    expect(hud.status).toBe("COMPLETED");
    expect(hud.report).toEqual({ hits: 0 });
  });

  it("locks input when a STATE frame reports a terminal status", () => {
    const hud = reduceHud(initialHud(), stateFrame({ status: "TIME_UP" }));
    expect(hud.inputLocked).toBe(true);
  });

  it("surfaces ERROR frames as a banner", () => {
    const hud = reduceHud(initialHud(), {
      type: "ERROR",
      session_time: 0,
      code: "BAD_FRAME",
      message: "frame is not valid JSON",
    });
    expect(hud.banner).toBe("BAD_FRAME: frame is not valid JSON");
  });
});

describe("formatClock", () => {
  it("renders mm:ss", () => {
    expect(formatClock(420)).toBe("07:00");
    expect(formatClock(61.9)).toBe("01:01");
    expect(formatClock(0)).toBe("00:00");
    expect(formatClock(-3)).toBe("00:00");
  });
});

describe("renderHud", () => {
  function render(hud: HudState, now?: number): HTMLElement {
    const root = document.createElement("div");
    renderHud(hud, root, now);
    return root;
  }

  it("shows the vitals from the last STATE", () => {
    const hud = reduceHud(initialHud(), stateFrame({ health: 39, exposure: 0.25 }));
    const root = render(hud);
    expect(root.querySelector(".health-text")!.textContent).toBe("39/40");
    expect((root.querySelector(".health-fill") as HTMLElement).style.width).toBe("97.5%");
    expect(root.querySelector(".timer")!.textContent).toBe("07:00");
    expect(root.querySelector(".exposure")!.textContent).toBe("25.0%");
    expect(root.querySelector(".tool-name")!.textContent).toBe("hammer");
  });

  it("flashes the health bar right after a HIT, then settles", () => {
    let hud = reduceHud(initialHud(), stateFrame());
    hud = reduceHud(hud, eventFrame("HIT", { health_after: 39 }), 5000);
    expect(render(hud, 5100).querySelector(".health-bar")!.classList.contains("flash")).toBe(true);
    expect(render(hud, 5900).querySelector(".health-bar")!.classList.contains("flash")).toBe(false);
  });

  it("renders one card per open dialog, in order", () => {
    let hud = reduceHud(initialHud(), stateFrame());
    hud = reduceHud(hud, eventFrame("TRIGGER_REVEALED", { trigger_id: "east", dialog: DIALOG }));
    hud = reduceHud(hud, eventFrame("COMPLETED", { dialog: { title: "The Orb", body: "done" }, stats: {} }));
    const cards = render(hud).querySelectorAll(".dialog-card");
    expect(cards).toHaveLength(2);
    expect(cards[0].querySelector("h3")!.textContent).toBe("First glint");
    expect(cards[1].querySelector("h3")!.textContent).toBe("The Orb");
  });

  it("is idempotent and leaves the state untouched", () => {
    let hud = reduceHud(initialHud(), stateFrame());
    hud = reduceHud(hud, eventFrame("TRIGGER_REVEALED", { trigger_id: "east", dialog: DIALOG }));
    const snapshot = JSON.parse(JSON.stringify(hud));
    const root = document.createElement("div");
    renderHud(hud, root);
    renderHud(hud, root);
    expect(root.querySelectorAll(".dialog-card")).toHaveLength(1);
    expect(JSON.parse(JSON.stringify(hud))).toEqual(snapshot);
  });

  it("shows the closing report once the session ends", () => {
    let hud = reduceHud(initialHud(), stateFrame());
    hud = reduceHud(hud, eventFrame("TIME_UP", { stats: { strokes: 9, hits: 2 } }));
    const root = render(hud);
    expect(root.querySelector(".report h2")!.textContent).toBe("Time's up");
    expect(root.querySelector(".report")!.textContent).toContain("strokes");
  });
});
