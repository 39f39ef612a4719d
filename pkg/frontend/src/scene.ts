import * as THREE from "three";
import { MeshChunkData } from "./protocol.js";
import { SurfaceHit, Vec3 } from "./strokes.js";

/** Chunk geometry as a three.js buffer: shared positions/normals plus an index. */
export function chunkGeometry(chunk: MeshChunkData): THREE.BufferGeometry {
  const geometry = new THREE.BufferGeometry();
  geometry.setAttribute("position", new THREE.BufferAttribute(chunk.vertices, 3));
  geometry.setAttribute("normal", new THREE.BufferAttribute(chunk.normals, 3));
  geometry.setIndex(new THREE.BufferAttribute(chunk.indices, 1));
  geometry.computeBoundingSphere();
  return geometry;
}

/**
 * Keeps one THREE.Mesh per surface chunk under a single group.
 *
 * `update` swaps geometry for exactly the chunks a delta touched (a chunk
 * carved empty drops out of the scene) and disposes what it replaces.
 * Reading state — raycasts, bounds — never mutates the session; all changes
 * flow in through deltas.
 */
export class ChunkScene {
  readonly group = new THREE.Group();
  private meshes = new Map<string, THREE.Mesh>();

  constructor(private readonly material: THREE.Material) {}

  update(changed: MeshChunkData[]): void {
    for (const chunk of changed) {
      const existing = this.meshes.get(chunk.key);
      if (existing !== undefined) {
        this.group.remove(existing);
        existing.geometry.dispose();
        this.meshes.delete(chunk.key);
      }
      if (chunk.indices.length === 0) continue;
      const mesh = new THREE.Mesh(chunkGeometry(chunk), this.material);
      mesh.name = chunk.key;
      this.meshes.set(chunk.key, mesh);
      this.group.add(mesh);
    }
  }

  get chunkCount(): number {
    return this.meshes.size;
  }

  /** First surface point under the ray, with its outward normal in world space. */
  raycast(raycaster: THREE.Raycaster): SurfaceHit | null {
    this.group.updateMatrixWorld(true);
    const hits = raycaster.intersectObject(this.group, true);
    const first = hits.find((h) => h.face !== undefined && h.face !== null);
    if (first === undefined) return null;
    const normal = first.face!.normal.clone();
    normal.transformDirection(first.object.matrixWorld);
    return {
      point: [first.point.x, first.point.y, first.point.z],
      normal: [normal.x, normal.y, normal.z],
    };
  }

  bounds(): THREE.Box3 | null {
    if (this.meshes.size === 0) return null;
    const box = new THREE.Box3();
    for (const mesh of this.meshes.values()) {
      mesh.geometry.computeBoundingBox();
      box.union(mesh.geometry.boundingBox!);
    }
    return box;
  }
}

/** Billboard anchor for the health bar: centered above the artifact's bounding box. */
export function healthBarAnchor(artifactBounds: THREE.Box3, margin = 0.1): Vec3 {
  const center = artifactBounds.getCenter(new THREE.Vector3());
  return [center.x, center.y, artifactBounds.max.z + margin];
}
