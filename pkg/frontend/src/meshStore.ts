import { MeshChunkData, PackedMeshChunk, unpackMeshChunk } from "./protocol.js";

/**
 * Chunk-keyed geometry cache fed by MESH_DELTA frames.
 *
 * Versions per chunk only move forward: a delta that does not beat the stored
 * version is dropped, so late or duplicated frames can never roll the surface
 * back. `applyDelta` returns exactly the chunks that were accepted, which is
 * what a renderer needs to rebuild.
 */
export class MeshStore {
  private chunks = new Map<string, MeshChunkData>();

  applyDelta(packed: PackedMeshChunk[]): MeshChunkData[] {
    const applied: MeshChunkData[] = [];
    for (const item of packed) {
      const chunk = unpackMeshChunk(item);
      const prev = this.chunks.get(chunk.key);
      if (prev !== undefined && chunk.version <= prev.version) continue;
      this.chunks.set(chunk.key, chunk);
      applied.push(chunk);
    }
    return applied;
  }

  get(key: string): MeshChunkData | undefined {
    return this.chunks.get(key);
  }

  version(key: string): number | undefined {
    return this.chunks.get(key)?.version;
  }

  all(): MeshChunkData[] {
    return [...this.chunks.values()];
  }

  get size(): number {
    return this.chunks.size;
  }

  totalTriangles(): number {
    let total = 0;
    for (const chunk of this.chunks.values()) total += chunk.indices.length / 3;
    return total;
  }
}
