import { PoseWire } from "./protocol.js";

export type Vec3 = [number, number, number];

/** Where a pointer ray met the dig surface, in world coordinates. */
export interface SurfaceHit {
  point: Vec3;
  normal: Vec3;
}

/**
 * Unit quaternion (wxyz) rotating +z onto `direction`; identity for a zero
 * vector, a half-turn about x when the target is exactly −z. Matches the
 * server's convention so replays round-trip bit-for-bit.
 */
export function quatFromZTo(direction: Vec3): [number, number, number, number] {
  const [dx, dy, dz] = direction;
  const norm = Math.hypot(dx, dy, dz);
  if (norm === 0) return [1, 0, 0, 0];
  const ux = dx / norm;
  const uy = dy / norm;
  const uz = dz / norm;
  if (uz <= -1 + 1e-12) return [0, 1, 0, 0];
  // cross((0,0,1), u) = (-uy, ux, 0); "+ 0" scrubs negative zeros
  const w = 1 + uz;
  const q = Math.hypot(w, uy, ux);
  return [w / q, -uy / q + 0, ux / q + 0, 0];
}

/** Tool pose for digging into the surface: +z points along −normal. */
export function digPose(hit: SurfaceHit): PoseWire {
  const [nx, ny, nz] = hit.normal;
  return {
    position: hit.point,
    orientation: quatFromZTo([-nx, -ny, -nz]),
  };
}

/**
 * Turns a pointer drag into a steady stroke stream.
 *
 * While the pointer is down and over the surface, poses go out at a fixed
 * cadence (default 15 per second) pinned to the sample clock, so a one-second
 * drag yields at least 15 strokes regardless of pointer event rate. Samples
 * that miss the mesh emit nothing, and a locked emitter (session over) drops
 * everything.
 */
export class StrokeEmitter {
  private readonly interval: number;
  private nextDue: number | null = null;
  private locked = false;

  constructor(
    private readonly send: (pose: PoseWire) => void,
    options: { strokesPerS?: number } = {},
  ) {
    const rate = options.strokesPerS ?? 15;
    if (!(rate > 0)) throw new RangeError("strokesPerS must be positive");
    this.interval = 1 / rate;
  }

  setLocked(locked: boolean): void {
    this.locked = locked;
    if (locked) this.nextDue = null;
  }

  get isLocked(): boolean {
    return this.locked;
  }

  beginDrag(t: number): void {
    if (this.locked) return;
    this.nextDue = t;
  }

  /** Feed one pointer sample; emits every stroke that has come due by `t`. */
  sample(t: number, hit: SurfaceHit | null): number {
    if (this.locked || this.nextDue === null) return 0;
    if (hit === null) {
      // off the mesh: stay silent but keep cadence anchored to the clock,
      // so wandering back on doesn't dump a burst of catch-up strokes
      if (t > this.nextDue) this.nextDue = t;
      return 0;
    }
    let emitted = 0;
    while (t >= this.nextDue) {
      this.send(digPose(hit));
      emitted += 1;
      this.nextDue += this.interval;
    }
    return emitted;
  }

  endDrag(): void {
    this.nextDue = null;
  }

  get dragging(): boolean {
    return this.nextDue !== null;
  }
}
