/** Wire codec for the excavation service: JSON text frames, base64 mesh payloads. */

export interface DialogPayload {
  title: string;
  body: string;
  audio_ref?: string;
}

export interface ToolSpec {
  name: string;
  shape:
    | { type: "sphere"; radius: number }
    | { type: "box"; half_extents: [number, number, number] };
}

export interface GridParams {
  dims: [number, number, number];
  cell_size: number;
  origin: [number, number, number];
  chunk_size: number;
  clod_edge: number;
}

export interface SessionParamsWire {
  time_limit_s: number;
  max_health: number;
  hit_penalty: number;
  completion_exposure: number;
  hit_cooldown_s: number;
}

export interface PackedMeshChunk {
  chunk: [number, number, number];
  version: number;
  vertex_count: number;
  triangle_count: number;
  vertices: string;
  normals: string;
  indices: string;
}

/** Decoded chunk geometry; arrays are flat, 3 entries per vertex/triangle. */
export interface MeshChunkData {
  key: string;
  coord: [number, number, number];
  version: number;
  vertices: Float32Array;
  normals: Float32Array;
  indices: Uint32Array;
}

export interface SessionEvent {
  kind: string;
  t: number;
  data: Record<string, unknown>;
}

export interface PoseWire {
  position: [number, number, number];
  /** wxyz; identity when omitted */
  orientation?: [number, number, number, number];
}

export type ServerFrame =
  | {
      type: "SESSION_CREATED";
      session_time: number;
      session_id: string;
      artifact_mesh: PackedMeshChunk[];
      grid_params: GridParams;
      tools: ToolSpec[];
      session_params: SessionParamsWire;
    }
  | { type: "MESH_DELTA"; session_time: number; chunks: PackedMeshChunk[] }
  | { type: "EVENT"; session_time: number; event: SessionEvent }
  | {
      type: "STATE";
      session_time: number;
      health: number;
      max_health: number;
      clock_remaining: number;
      exposure: number;
      status: string;
      active_tool: string;
    }
  | { type: "ERROR"; session_time: number; code: string; message: string }
  | { type: "PONG"; session_time: number; t: number };

export type ClientFrame =
  | { type: "CREATE_SESSION"; session_time: number; relic_name: string; params?: Record<string, number> }
  | { type: "APPLY_STROKE"; session_time: number; stroke: { pose: PoseWire } }
  | { type: "SELECT_TOOL"; session_time: number; name: string }
  | { type: "SUBSCRIBE_MESH"; session_time: number }
  | { type: "PING"; session_time: number; t: number };

const SERVER_KEYS: Record<string, string[]> = {
  SESSION_CREATED: ["session_id", "artifact_mesh", "grid_params", "tools", "session_params"],
  MESH_DELTA: ["chunks"],
  EVENT: ["event"],
  STATE: ["health", "max_health", "clock_remaining", "exposure", "status", "active_tool"],
  ERROR: ["code", "message"],
  PONG: ["t"],
};

export class ProtocolError extends Error {}

export function encodeFrame(frame: ClientFrame): string {
  return JSON.stringify(frame);
}

export function decodeFrame(text: string): ServerFrame {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    throw new ProtocolError("frame is not valid JSON");
  }
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw new ProtocolError("frame must be a JSON object");
  }
  const frame = doc as Record<string, unknown>;
  const type = frame.type;
  if (typeof type !== "string" || !(type in SERVER_KEYS)) {
    throw new ProtocolError(`unknown frame type ${JSON.stringify(type)}`);
  }
  if (typeof frame.session_time !== "number" || !Number.isFinite(frame.session_time)) {
    throw new ProtocolError(`${type} frame needs a numeric session_time`);
  }
  const missing = SERVER_KEYS[type].filter((key) => !(key in frame));
  if (missing.length) {
    throw new ProtocolError(`${type} frame missing [${missing.join(", ")}]`);
  }
  return frame as unknown as ServerFrame;
}

// payloads are little-endian f32/u32; byte-swap on the (rare) big-endian host
const HOST_IS_LE = new Uint8Array(new Uint32Array([1]).buffer)[0] === 1;

function b64Bytes(data: unknown, name: string): Uint8Array {
  if (typeof data !== "string") {
    throw new ProtocolError(`${name} must be a base64 string`);
  }
  let binary: string;
  try {
    binary = atob(data);
  } catch {
    throw new ProtocolError(`${name} is not valid base64`);
  }
  const bytes = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) bytes[i] = binary.charCodeAt(i);
  return bytes;
}

function swap32(bytes: Uint8Array): void {
  for (let i = 0; i < bytes.length; i += 4) {
    let t = bytes[i];
    bytes[i] = bytes[i + 3];
    bytes[i + 3] = t;
    t = bytes[i + 1];
    bytes[i + 1] = bytes[i + 2];
    bytes[i + 2] = t;
  }
}

function words(data: unknown, name: string): ArrayBuffer {
  const bytes = b64Bytes(data, name);
  if (bytes.length % 4 !== 0) {
    throw new ProtocolError(`${name} byte length is not a whole number of elements`);
  }
  if (!HOST_IS_LE) swap32(bytes);
  return bytes.buffer as ArrayBuffer;
}

export function unpackMeshChunk(data: unknown): MeshChunkData {
  if (typeof data !== "object" || data === null || Array.isArray(data)) {
    throw new ProtocolError("mesh chunk must be an object");
  }
  const chunk = data as Record<string, unknown>;
  const missing = ["chunk", "version", "vertex_count", "triangle_count", "vertices", "normals", "indices"].filter(
    (key) => !(key in chunk),
  );
  if (missing.length) {
    throw new ProtocolError(`mesh chunk missing [${missing.join(", ")}]`);
  }
  const coord = chunk.chunk;
  if (!Array.isArray(coord) || coord.length !== 3 || coord.some((c) => typeof c !== "number")) {
    throw new ProtocolError("mesh chunk coord must be [cx, cy, cz]");
  }
  const nv = Number(chunk.vertex_count);
  const nt = Number(chunk.triangle_count);
  const vertices = new Float32Array(words(chunk.vertices, "vertices"));
  const normals = new Float32Array(words(chunk.normals, "normals"));
  const indices = new Uint32Array(words(chunk.indices, "indices"));
  if (vertices.length !== 3 * nv || normals.length !== 3 * nv || indices.length !== 3 * nt) {
    throw new ProtocolError("mesh chunk array lengths disagree with counts");
  }
  const xyz = coord as [number, number, number];
  return {
    key: xyz.join(","),
    coord: xyz,
    version: Number(chunk.version),
    vertices,
    normals,
    indices,
  };
}
