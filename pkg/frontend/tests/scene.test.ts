import * as THREE from "three";
import { describe, expect, it } from "vitest";
import { unpackMeshChunk } from "../src/protocol.js";
import { ChunkScene, chunkGeometry, healthBarAnchor } from "../src/scene.js";
import { packChunk } from "./pack.js";

// unit square at z = 0.5, facing +z
const SQUARE = packChunk(
  [0, 0, 0],
  1,
  [0, 0, 0.5, 1, 0, 0.5, 0, 1, 0.5, 1, 1, 0.5],
  [0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1],
  [0, 1, 2, 2, 1, 3],
);

function material(): THREE.Material {
  return new THREE.MeshBasicMaterial({ side: THREE.DoubleSide });
}

function downRay(x: number, y: number): THREE.Raycaster {
  return new THREE.Raycaster(new THREE.Vector3(x, y, 2), new THREE.Vector3(0, 0, -1));
}

describe("chunkGeometry", () => {
  it("exposes the chunk arrays as buffer attributes", () => {
    const chunk = unpackMeshChunk(SQUARE);
    const geometry = chunkGeometry(chunk);
    expect(geometry.getAttribute("position").count).toBe(4);
    expect(geometry.getAttribute("normal").array).toBe(chunk.normals);
    expect(geometry.getIndex()!.array).toBe(chunk.indices);
    expect(geometry.boundingSphere).not.toBeNull();
  });
});

describe("ChunkScene", () => {
  it("adds, replaces, and removes chunk meshes as deltas land", () => {
    const scene = new ChunkScene(material());
    scene.update([unpackMeshChunk(SQUARE), unpackMeshChunk(packChunk([1, 0, 0], 1, [0, 0, 0, 1, 0, 0, 0, 1, 0], [0, 0, 1, 0, 0, 1, 0, 0, 1], [0, 1, 2]))]);
    expect(scene.chunkCount).toBe(2);
    expect(scene.group.children).toHaveLength(2);

    let disposed = false;
    const current = scene.group.children.find((m) => m.name === "0,0,0") as THREE.Mesh;
    current.geometry.addEventListener("dispose", () => {
      disposed = true;
    });
    scene.update([unpackMeshChunk({ ...SQUARE, version: 2 })]);
    expect(scene.chunkCount).toBe(2);
    expect(disposed).toBe(true);

    // a chunk carved down to nothing leaves the scene
    scene.update([unpackMeshChunk(packChunk([0, 0, 0], 3, [], [], []))]);
    expect(scene.chunkCount).toBe(1);
    expect(scene.group.children.map((m) => m.name)).toEqual(["1,0,0"]);
  });

  it("raycasts to the surface point and world-space normal", () => {
    const scene = new ChunkScene(material());
    scene.update([unpackMeshChunk(SQUARE)]);
    const hit = scene.raycast(downRay(0.25, 0.75));
    expect(hit).not.toBeNull();
    expect(hit!.point[0]).toBeCloseTo(0.25, 6);
    expect(hit!.point[1]).toBeCloseTo(0.75, 6);
    expect(hit!.point[2]).toBeCloseTo(0.5, 6);
    expect(hit!.normal[2]).toBeCloseTo(1, 6);
  });

  it("misses cleanly off the mesh", () => {
    const scene = new ChunkScene(material());
    scene.update([unpackMeshChunk(SQUARE)]);
    expect(scene.raycast(downRay(5, 5))).toBeNull();
  });

  it("respects the group transform when reporting hits", () => {
    const scene = new ChunkScene(material());
    scene.update([unpackMeshChunk(SQUARE)]);
    scene.group.position.set(0, 0, 0.25);
    const hit = scene.raycast(downRay(0.5, 0.5));
    expect(hit!.point[2]).toBeCloseTo(0.75, 6);
    expect(hit!.normal[2]).toBeCloseTo(1, 6);
  });
});

describe("healthBarAnchor", () => {
  it("sits centered above the artifact bounds", () => {
    const scene = new ChunkScene(material());
    scene.update([unpackMeshChunk(SQUARE)]);
    const bounds = scene.bounds()!;
    const anchor = healthBarAnchor(bounds, 0.1);
    expect(anchor[0]).toBeCloseTo(0.5, 6);
    expect(anchor[1]).toBeCloseTo(0.5, 6);
    expect(anchor[2]).toBeCloseTo(0.6, 6);
  });
});
