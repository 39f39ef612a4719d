import { describe, expect, it } from "vitest";
import {
  ProtocolError,
  decodeFrame,
  encodeFrame,
  unpackMeshChunk,
} from "../src/protocol.js";
import { b64f32, b64u32, packChunk } from "./pack.js";

describe("decodeFrame", () => {
  it("round-trips a STATE frame", () => {
    const text = JSON.stringify({
      type: "STATE",
      session_time: 1.5,
      health: 39,
      max_health: 40,
      clock_remaining: 418.5,
      exposure: 0.01,
      status: "RUNNING",
      active_tool: "hammer",
    });
    const frame = decodeFrame(text);
    expect(frame.type).toBe("STATE");
    if (frame.type === "STATE") {
      expect(frame.health).toBe(39);
      expect(frame.clock_remaining).toBeCloseTo(418.5);
    }
  });

  it("rejects text that is not JSON", () => {
    expect(() => decodeFrame("this is not json")).toThrow(ProtocolError);
  });

  it("rejects non-object frames", () => {
    expect(() => decodeFrame("[1, 2]")).toThrow(/JSON object/);
    expect(() => decodeFrame("42")).toThrow(/JSON object/);
  });

  it("rejects unknown frame types", () => {
    expect(() => decodeFrame('{"type": "NOPE", "session_time": 0}')).toThrow(/unknown frame type/);
  });

  it("rejects a missing or non-numeric session_time", () => {
    expect(() => decodeFrame('{"type": "PONG", "t": 1}')).toThrow(/session_time/);
    expect(() => decodeFrame('{"type": "PONG", "session_time": "soon", "t": 1}')).toThrow(/session_time/);
  });

  it("rejects frames missing required keys", () => {
    expect(() => decodeFrame('{"type": "STATE", "session_time": 0, "health": 40}')).toThrow(
      /missing \[max_health/,
    );
    expect(() => decodeFrame('{"type": "EVENT", "session_time": 0}')).toThrow(/missing \[event\]/);
  });
});

describe("encodeFrame", () => {
  it("emits JSON the server schema expects", () => {
    const text = encodeFrame({
      type: "APPLY_STROKE",
      session_time: 2.0,
      stroke: { pose: { position: [0.1, 0.2, 0.3] } },
    });
    const doc = JSON.parse(text);
    expect(doc.type).toBe("APPLY_STROKE");
    expect(doc.stroke.pose.position).toEqual([0.1, 0.2, 0.3]);
    expect(doc.session_time).toBe(2.0);
  });
});

describe("unpackMeshChunk", () => {
  const vertices = [0.25, -1.5, 3.0, 0.5, 0.5, 0.5, 1.0, 0.0, 2.0];
  const normals = [0, 0, 1, 0, 1, 0, 1, 0, 0];
  const indices = [0, 1, 2];

  it("decodes packed arrays bit-exactly", () => {
    const chunk = unpackMeshChunk(packChunk([1, 2, 3], 7, vertices, normals, indices));
    expect(chunk.key).toBe("1,2,3");
    expect(chunk.coord).toEqual([1, 2, 3]);
    expect(chunk.version).toBe(7);
    expect([...chunk.vertices]).toEqual(vertices);
    expect([...chunk.normals]).toEqual(normals);
    expect([...chunk.indices]).toEqual(indices);
  });

  it("rejects counts that disagree with the arrays", () => {
    const packed = packChunk([0, 0, 0], 1, vertices, normals, indices);
    packed.vertex_count = 4;
    expect(() => unpackMeshChunk(packed)).toThrow(/lengths disagree/);
  });

  it("rejects payloads that are not whole elements", () => {
    const packed = packChunk([0, 0, 0], 1, vertices, normals, indices);
    packed.indices = Buffer.from([1, 2, 3, 4, 5]).toString("base64");
    expect(() => unpackMeshChunk(packed)).toThrow(/whole number of elements/);
  });

  it("rejects malformed containers and coords", () => {
    expect(() => unpackMeshChunk(null)).toThrow(/must be an object/);
    expect(() => unpackMeshChunk({ chunk: [0, 0, 0] })).toThrow(/missing/);
    const packed = packChunk([0, 0, 0], 1, vertices, normals, indices);
    expect(() => unpackMeshChunk({ ...packed, chunk: [0, 0] })).toThrow(/cx, cy, cz/);
  });

  it("rejects non-base64 payloads", () => {
    const packed = packChunk([0, 0, 0], 1, vertices, normals, indices);
    expect(() => unpackMeshChunk({ ...packed, normals: "!!!" })).toThrow(/not valid base64/);
    expect(() => unpackMeshChunk({ ...packed, normals: 5 })).toThrow(/base64 string/);
  });

  it("matches a hand-built little-endian payload", () => {
    // 1.0f little-endian is 00 00 80 3F
    const one = Buffer.from([0x00, 0x00, 0x80, 0x3f]).toString("base64");
    expect(b64f32([1.0])).toBe(one);
    expect(b64u32([7])).toBe(Buffer.from([7, 0, 0, 0]).toString("base64"));
  });
});
