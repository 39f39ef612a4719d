import * as THREE from "three";
import { DigClient } from "./client.js";
import { renderHud } from "./hud.js";
import { ChunkScene, healthBarAnchor } from "./scene.js";
import { StrokeEmitter } from "./strokes.js";
import { MeshChunkData } from "./protocol.js";

/**
 * Browser bootstrap: connect, render, translate pointer drags into strokes.
 *
 * Everything runs on the UI thread; mesh rebuilds and HUD updates triggered
 * by incoming frames are queued and applied once per animation frame.
 */
async function boot(): Promise<void> {
  const query = new URLSearchParams(location.search);
  const serverUrl = query.get("server") ?? "ws://127.0.0.1:8765";
  const relicName = query.get("relic") ?? "arhat";

  const hudRoot = document.createElement("div");
  hudRoot.id = "hud";
  document.body.append(hudRoot);

  const client = await DigClient.connect(serverUrl, relicName);
  client.subscribeMesh();

  const renderer = new THREE.WebGLRenderer({ antialias: true });
  renderer.setSize(window.innerWidth, window.innerHeight);
  document.body.append(renderer.domElement);

  const scene = new THREE.Scene();
  scene.background = new THREE.Color(0x1a1410);
  scene.add(new THREE.HemisphereLight(0xfbf1dd, 0x2b2118, 1.1));
  const sun = new THREE.DirectionalLight(0xffffff, 1.4);
  sun.position.set(3, 2, 5);
  scene.add(sun);

  const earth = new ChunkScene(
    new THREE.MeshStandardMaterial({ color: 0x9c7a4f, roughness: 0.95, side: THREE.DoubleSide }),
  );
  const artifact = new ChunkScene(
    new THREE.MeshStandardMaterial({ color: 0xd8c47a, roughness: 0.4, metalness: 0.5 }),
  );
  artifact.update(client.artifactMesh.all());
  scene.add(earth.group);
  scene.add(artifact.group);

  const edge = client.grid?.clod_edge ?? 1;
  const center = new THREE.Vector3(edge / 2, edge / 2, edge / 2);
  const camera = new THREE.PerspectiveCamera(50, window.innerWidth / window.innerHeight, 0.01, 100);
  const orbit = { theta: Math.PI / 4, phi: Math.PI / 3, radius: edge * 2.2 };
  const placeCamera = () => {
    camera.position.set(
      center.x + orbit.radius * Math.sin(orbit.phi) * Math.cos(orbit.theta),
      center.y + orbit.radius * Math.sin(orbit.phi) * Math.sin(orbit.theta),
      center.z + orbit.radius * Math.cos(orbit.phi),
    );
    camera.up.set(0, 0, 1);
    camera.lookAt(center);
  };
  placeCamera();

  // health bar billboarded above the artifact's bounding box
  const barCanvas = document.createElement("canvas");
  barCanvas.width = 256;
  barCanvas.height = 64;
  const barTexture = new THREE.CanvasTexture(barCanvas);
  const barSprite = new THREE.Sprite(new THREE.SpriteMaterial({ map: barTexture, depthTest: false }));
  barSprite.scale.set(edge * 0.5, edge * 0.125, 1);
  const artifactBounds = artifact.bounds();
  if (artifactBounds !== null) {
    barSprite.position.set(...healthBarAnchor(artifactBounds, edge * 0.1));
    scene.add(barSprite);
  }
  const paintBar = () => {
    const ctx = barCanvas.getContext("2d");
    if (ctx === null) return;
    const { health, maxHealth } = client.hud;
    ctx.clearRect(0, 0, barCanvas.width, barCanvas.height);
    ctx.fillStyle = "#00000088";
    ctx.fillRect(0, 16, 256, 32);
    ctx.fillStyle = health * 3 <= maxHealth ? "#d9482d" : "#58b368";
    ctx.fillRect(2, 18, 252 * (maxHealth > 0 ? health / maxHealth : 0), 28);
    ctx.fillStyle = "#ffffff";
    ctx.font = "24px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(`${health}/${maxHealth}`, 128, 40);
    barTexture.needsUpdate = true;
  };

  const raycaster = new THREE.Raycaster();
  const pick = (event: PointerEvent) => {
    const rect = renderer.domElement.getBoundingClientRect();
    const ndc = new THREE.Vector2(
      ((event.clientX - rect.left) / rect.width) * 2 - 1,
      -((event.clientY - rect.top) / rect.height) * 2 + 1,
    );
    raycaster.setFromCamera(ndc, camera);
    return earth.raycast(raycaster);
  };

  const emitter = new StrokeEmitter((pose) => client.sendStroke(pose));
  const seconds = () => performance.now() / 1000;
  let orbiting = false;

  renderer.domElement.addEventListener("pointerdown", (event) => {
    if (event.button === 2) {
      orbiting = true;
      return;
    }
    renderer.domElement.setPointerCapture(event.pointerId);
    emitter.beginDrag(seconds());
    emitter.sample(seconds(), pick(event));
  });
  renderer.domElement.addEventListener("pointermove", (event) => {
    if (orbiting) {
      orbit.theta -= event.movementX * 0.01;
      orbit.phi = Math.min(Math.PI - 0.1, Math.max(0.1, orbit.phi - event.movementY * 0.01));
      placeCamera();
      return;
    }
    if (emitter.dragging) emitter.sample(seconds(), pick(event));
  });
  const stopDrag = () => {
    emitter.endDrag();
    orbiting = false;
  };
  renderer.domElement.addEventListener("pointerup", stopDrag);
  renderer.domElement.addEventListener("pointercancel", stopDrag);
  renderer.domElement.addEventListener("contextmenu", (event) => event.preventDefault());
  renderer.domElement.addEventListener("wheel", (event) => {
    orbit.radius = Math.min(edge * 6, Math.max(edge * 0.6, orbit.radius * (1 + event.deltaY * 0.001)));
    placeCamera();
  });

  window.addEventListener("resize", () => {
    camera.aspect = window.innerWidth / window.innerHeight;
    camera.updateProjectionMatrix();
    renderer.setSize(window.innerWidth, window.innerHeight);
  });

  // frames arrive between animation frames; apply them in one batch per tick
  const pendingChunks: MeshChunkData[] = [];
  let hudDirty = true;
  client.onMesh((changed) => {
    pendingChunks.push(...changed);
  });
  client.onFrame((frame) => {
    if (frame.type === "EVENT" || frame.type === "STATE" || frame.type === "ERROR") hudDirty = true;
  });

  const animate = () => {
    requestAnimationFrame(animate);
    if (pendingChunks.length) {
      earth.update(pendingChunks.splice(0, pendingChunks.length));
    }
    if (hudDirty) {
      emitter.setLocked(client.hud.inputLocked);
      renderHud(client.hud, hudRoot);
      paintBar();
      hudDirty = false;
    }
    barSprite.quaternion.copy(camera.quaternion);
    renderer.render(scene, camera);
  };
  animate();
}

boot().catch((err) => {
  const panel = document.createElement("pre");
  panel.className = "boot-error";
  panel.textContent = String(err);
  document.body.append(panel);
});
