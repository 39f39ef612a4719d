import { HudState, initialHud, reduceHud } from "./hud.js";
import { MeshStore } from "./meshStore.js";
import {
  ClientFrame,
  GridParams,
  MeshChunkData,
  PoseWire,
  ServerFrame,
  SessionParamsWire,
  ToolSpec,
  decodeFrame,
  encodeFrame,
} from "./protocol.js";

/** The slice of WebSocket shared by browsers and the `ws` package. */
export interface WebSocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(type: "open", listener: () => void): void;
  addEventListener(type: "message", listener: (event: { data: unknown }) => void): void;
  addEventListener(type: "close", listener: (event: { code: number; reason: string }) => void): void;
  addEventListener(type: "error", listener: (event: unknown) => void): void;
}

export type SocketFactory = (url: string) => WebSocketLike;

export interface ConnectOptions {
  /** override in tests or under node; defaults to the browser WebSocket */
  socket?: SocketFactory;
  /** session parameter overrides forwarded to CREATE_SESSION */
  params?: Record<string, number>;
}

function defaultSocket(url: string): WebSocketLike {
  const ctor = (globalThis as { WebSocket?: new (url: string) => WebSocketLike }).WebSocket;
  if (ctor === undefined) {
    throw new Error("no global WebSocket; pass options.socket");
  }
  return new ctor(url);
}

/**
 * One excavation session over one socket.
 *
 * Incoming frames fan out three ways: MESH_DELTA payloads land in `mesh`
 * (version-checked), EVENT/STATE/ERROR frames reduce into `hud`, and every
 * frame is then offered to `onFrame` subscribers. The client never mutates
 * session state on its own — the server is authoritative and the HUD shows
 * exactly what it last said.
 */
export class DigClient {
  readonly mesh = new MeshStore();
  readonly artifactMesh = new MeshStore();
  hud: HudState = initialHud();
  grid: GridParams | null = null;
  tools: ToolSpec[] = [];
  sessionParams: SessionParamsWire | null = null;
  sessionId: string | null = null;
  closed = false;

  private frameListeners: Array<(frame: ServerFrame) => void> = [];
  private meshListeners: Array<(changed: MeshChunkData[]) => void> = [];
  private readonly epoch = Date.now();

  private constructor(private readonly ws: WebSocketLike) {}

  static connect(serverUrl: string, relicName: string, options: ConnectOptions = {}): Promise<DigClient> {
    const factory = options.socket ?? defaultSocket;
    const ws = factory(serverUrl);
    const client = new DigClient(ws);
    return new Promise((resolve, reject) => {
      let settled = false;
      const fail = (err: Error) => {
        if (!settled) {
          settled = true;
          reject(err);
        }
      };
      ws.addEventListener("open", () => {
        client.send({
          type: "CREATE_SESSION",
          session_time: 0,
          relic_name: relicName,
          ...(options.params !== undefined ? { params: options.params } : {}),
        });
      });
      ws.addEventListener("message", (event) => {
        const frame = client.handleMessage(event.data);
        if (settled || frame === null) return;
        if (frame.type === "SESSION_CREATED") {
          settled = true;
          resolve(client);
        } else if (frame.type === "ERROR") {
          settled = true;
          ws.close();
          reject(new Error(`${frame.code}: ${frame.message}`));
        }
      });
      ws.addEventListener("close", (event) => {
        client.closed = true;
        fail(new Error(`connection closed before session start (${event.code})`));
      });
      ws.addEventListener("error", () => fail(new Error("websocket error")));
    });
  }

  onFrame(listener: (frame: ServerFrame) => void): () => void {
    this.frameListeners.push(listener);
    return () => {
      this.frameListeners = this.frameListeners.filter((fn) => fn !== listener);
    };
  }

  onMesh(listener: (changed: MeshChunkData[]) => void): () => void {
    this.meshListeners.push(listener);
    return () => {
      this.meshListeners = this.meshListeners.filter((fn) => fn !== listener);
    };
  }

  /** Seconds since connect; stamps outgoing frames. */
  time(): number {
    return (Date.now() - this.epoch) / 1000;
  }

  send(frame: ClientFrame): void {
    this.ws.send(encodeFrame(frame));
  }

  /** Drops silently once the session is over — input is disabled, not queued. */
  sendStroke(pose: PoseWire): boolean {
    if (this.hud.inputLocked || this.closed) return false;
    this.send({ type: "APPLY_STROKE", session_time: this.time(), stroke: { pose } });
    return true;
  }

  selectTool(name: string): void {
    this.send({ type: "SELECT_TOOL", session_time: this.time(), name });
  }

  subscribeMesh(): void {
    this.send({ type: "SUBSCRIBE_MESH", session_time: this.time() });
  }

  ping(t: number): void {
    this.send({ type: "PING", session_time: this.time(), t });
  }

  close(): void {
    this.closed = true;
    this.ws.close();
  }

  private handleMessage(data: unknown): ServerFrame | null {
    if (typeof data !== "string") return null;
    const frame = decodeFrame(data);
    switch (frame.type) {
      case "SESSION_CREATED":
        this.sessionId = frame.session_id;
        this.grid = frame.grid_params;
        this.tools = frame.tools;
        this.sessionParams = frame.session_params;
        this.artifactMesh.applyDelta(frame.artifact_mesh);
        break;
      case "MESH_DELTA": {
        const changed = this.mesh.applyDelta(frame.chunks);
        if (changed.length) {
          for (const listener of this.meshListeners) listener(changed);
        }
        break;
      }
      case "EVENT":
      case "STATE":
      case "ERROR":
        this.hud = reduceHud(this.hud, frame);
        break;
      case "PONG":
        break;
    }
    for (const listener of this.frameListeners) listener(frame);
    return frame;
  }
}
