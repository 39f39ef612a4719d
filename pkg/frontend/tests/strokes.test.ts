import * as THREE from "three";
import { describe, expect, it } from "vitest";
import { PoseWire } from "../src/protocol.js";
import { StrokeEmitter, SurfaceHit, Vec3, quatFromZTo } from "../src/strokes.js";

function rotateZBy(q: [number, number, number, number]): Vec3 {
  // wire order is wxyz; three's constructor takes xyzw
  const quat = new THREE.Quaternion(q[1], q[2], q[3], q[0]);
  const v = new THREE.Vector3(0, 0, 1).applyQuaternion(quat);
  return [v.x, v.y, v.z];
}

describe("quatFromZTo", () => {
  it("is the identity for +z and for a zero direction", () => {
    expect(quatFromZTo([0, 0, 1])).toEqual([1, 0, 0, 0]);
    expect(quatFromZTo([0, 0, 0])).toEqual([1, 0, 0, 0]);
  });

  it("uses the half-turn about x for -z", () => {
    expect(quatFromZTo([0, 0, -1])).toEqual([0, 1, 0, 0]);
    const [x, y, z] = rotateZBy([0, 1, 0, 0]);
    expect(x).toBeCloseTo(0, 12);
    expect(y).toBeCloseTo(0, 12);
    expect(z).toBeCloseTo(-1, 12);
  });

  it("actually rotates +z onto the requested direction", () => {
    const directions: Vec3[] = [
      [1, 0, 0],
      [0, 1, 0],
      [0.3, -0.4, 0.5],
      [-2, 1, -0.1],
      [0.61, 0.35, -0.71],
    ];
    for (const d of directions) {
      const norm = Math.hypot(...d);
      const rotated = rotateZBy(quatFromZTo(d));
      expect(rotated[0]).toBeCloseTo(d[0] / norm, 6);
      expect(rotated[1]).toBeCloseTo(d[1] / norm, 6);
      expect(rotated[2]).toBeCloseTo(d[2] / norm, 6);
    }
  });

  it("returns unit quaternions", () => {
    const [w, x, y, z] = quatFromZTo([0.2, -0.7, 0.4]);
    expect(Math.hypot(w, x, y, z)).toBeCloseTo(1, 12);
  });
});

const FLAT: SurfaceHit = { point: [0.4, 0.4, 0.8], normal: [0, 0, 1] };

function collector(): { sent: PoseWire[]; emitter: StrokeEmitter } {
  const sent: PoseWire[] = [];
  const emitter = new StrokeEmitter((pose) => sent.push(pose));
  return { sent, emitter };
}

describe("StrokeEmitter", () => {
  it("emits at least 15 strokes over a one-second on-surface drag", () => {
    const { sent, emitter } = collector();
    emitter.beginDrag(0);
    for (let i = 0; i <= 60; i++) {
      emitter.sample(i / 60, FLAT);
    }
    emitter.endDrag();
    expect(sent.length).toBeGreaterThanOrEqual(15);
    expect(sent.length).toBeLessThanOrEqual(17);
  });

  it("points the tool into the surface", () => {
    const { sent, emitter } = collector();
    emitter.beginDrag(0);
    emitter.sample(0, FLAT);
    expect(sent).toHaveLength(1);
    expect(sent[0].position).toEqual([0.4, 0.4, 0.8]);
    // dig direction is -normal; for a +z surface that's the half-turn about x
    expect(sent[0].orientation).toEqual([0, 1, 0, 0]);
  });

  it("emits nothing while the pointer is off the mesh", () => {
    const { sent, emitter } = collector();
    emitter.beginDrag(0);
    for (let i = 0; i <= 60; i++) {
      emitter.sample(i / 60, null);
    }
    expect(sent).toHaveLength(0);
  });

  it("does not dump catch-up strokes after wandering off the mesh", () => {
    const { sent, emitter } = collector();
    emitter.beginDrag(0);
    emitter.sample(0, FLAT);
    for (let i = 1; i <= 30; i++) emitter.sample(i / 60, null);
    const back = emitter.sample(31 / 60, FLAT);
    expect(back).toBe(1);
    expect(sent).toHaveLength(2);
  });

  it("catches up across a slow pointer stream", () => {
    const { sent, emitter } = collector();
    emitter.beginDrag(0);
    emitter.sample(0.5, FLAT);
    // dues at 0, 1/15 .. 7/15 have all passed by t=0.5
    expect(sent).toHaveLength(8);
  });

  it("emits nothing outside a drag or while locked", () => {
    const { sent, emitter } = collector();
    emitter.sample(0, FLAT);
    expect(sent).toHaveLength(0);
    emitter.setLocked(true);
    emitter.beginDrag(0);
    emitter.sample(0, FLAT);
    expect(sent).toHaveLength(0);
    emitter.setLocked(false);
    emitter.beginDrag(1);
    emitter.sample(1, FLAT);
    expect(sent).toHaveLength(1);
    emitter.endDrag();
    emitter.sample(2, FLAT);
    expect(sent).toHaveLength(1);
  });

  it("locking mid-drag stops the stream", () => {
    const { sent, emitter } = collector();
    emitter.beginDrag(0);
    emitter.sample(0, FLAT);
    emitter.setLocked(true);
    emitter.sample(0.5, FLAT);
    expect(sent).toHaveLength(1);
    expect(emitter.dragging).toBe(false);
  });

  it("honors a custom stroke rate", () => {
    const sent: PoseWire[] = [];
    const emitter = new StrokeEmitter((pose) => sent.push(pose), { strokesPerS: 30 });
    emitter.beginDrag(0);
    for (let i = 0; i <= 60; i++) emitter.sample(i / 60, FLAT);
    expect(sent.length).toBeGreaterThanOrEqual(30);
    expect(() => new StrokeEmitter(() => {}, { strokesPerS: 0 })).toThrow(RangeError);
  });
});
