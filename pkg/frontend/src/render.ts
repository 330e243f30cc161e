/** three.js renderer: maps a SceneModel to a scene graph. This layer is
 * deliberately dumb — every visual property is read off the model, so
 * headless tests on the model cover the visible behaviour. */
import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";
import type { ServiceClient } from "./api.js";
import { parseStl } from "./stl.js";
import type { PlotView, SceneModel } from "./scene.js";

const PLOT_SCALE = 1.5;
const POINT_RADIUS = 0.02;

function soupGeometry(positions: Float32Array): THREE.BufferGeometry {
  const geo = new THREE.BufferGeometry();
  geo.setAttribute("position", new THREE.BufferAttribute(positions, 3));
  geo.computeVertexNormals();
  return geo;
}

function normalizedPointPosition(view: PlotView, y: number[], f: number) {
  // plots live in a unit-ish cube: y1, (y2), f mapped to x, z, y
  const clamp = (v: number) => Math.max(-1, Math.min(1, v));
  return new THREE.Vector3(
    clamp(y[0] ?? 0) * PLOT_SCALE * 0.5,
    clamp(f) * PLOT_SCALE * 0.5,
    view.planar ? 0 : clamp(y[1] ?? 0) * PLOT_SCALE * 0.5,
  );
}

function buildPlotGroup(view: PlotView): THREE.Group {
  const group = new THREE.Group();
  group.name = `plot-${view.id}`;
  group.position.fromArray(view.position);
  const o = view.orientation;
  group.setRotationFromMatrix(
    new THREE.Matrix4().set(
      o[0][0], o[0][1], o[0][2], 0,
      o[1][0], o[1][1], o[1][2], 0,
      o[2][0], o[2][1], o[2][2], 0,
      0, 0, 0, 1,
    ),
  );

  const fMax = Math.max(...view.points.map((p) => Math.abs(p.f)), 1e-12);
  const yMax = Math.max(
    ...view.points.flatMap((p) => p.y.map((v) => Math.abs(v))),
    1e-12,
  );
  const sphere = new THREE.SphereGeometry(POINT_RADIUS, 8, 8);
  for (const p of view.points) {
    const mat = new THREE.MeshStandardMaterial({ color: p.color });
    const marker = new THREE.Mesh(sphere, mat);
    marker.name = `point-${view.id}-${p.i}`;
    marker.userData = { plotId: view.id, index: p.i };
    marker.position.copy(
      normalizedPointPosition(view, p.y.map((v) => v / yMax), p.f / fMax),
    );
    if (p.hovered) marker.scale.setScalar(1.8);
    group.add(marker);
  }

  // axis cones: the cone count identifies the axis
  const axisDirs = [
    new THREE.Vector3(1, 0, 0),
    view.planar ? new THREE.Vector3(0, 1, 0) : new THREE.Vector3(0, 0, 1),
    new THREE.Vector3(0, 1, 0),
  ];
  view.axes.forEach((axis, k) => {
    const dir = axisDirs[view.planar && k === 1 ? 2 : k];
    for (let c = 0; c < axis.cones; c++) {
      const cone = new THREE.Mesh(
        new THREE.ConeGeometry(0.03, 0.08, 12),
        new THREE.MeshStandardMaterial({ color: "#333333" }),
      );
      cone.name = `cone-${view.id}-${axis.name}-${c}`;
      cone.position.copy(
        dir.clone().multiplyScalar(PLOT_SCALE * 0.55 + 0.1 * c),
      );
      cone.quaternion.setFromUnitVectors(new THREE.Vector3(0, 1, 0), dir);
      group.add(cone);
    }
  });

  // translucent orthogonal back-planes
  for (let k = 0; k < view.backPlanes.count; k++) {
    const plane = new THREE.Mesh(
      new THREE.PlaneGeometry(PLOT_SCALE, PLOT_SCALE),
      new THREE.MeshBasicMaterial({
        color: "#8899aa",
        transparent: true,
        opacity: view.backPlanes.opacity,
        side: THREE.DoubleSide,
      }),
    );
    plane.name = `backplane-${view.id}-${k}`;
    if (k === 0) plane.position.z = -PLOT_SCALE / 2;
    if (k === 1) {
      plane.rotation.y = Math.PI / 2;
      plane.position.x = -PLOT_SCALE / 2;
    }
    if (k === 2) {
      plane.rotation.x = Math.PI / 2;
      plane.position.y = -PLOT_SCALE / 2;
    }
    group.add(plane);
  }

  // selector spheres (move below, rotation above the plot)
  const moveMarker = new THREE.Mesh(
    new THREE.SphereGeometry(0.06, 12, 12),
    new THREE.MeshStandardMaterial({ color: view.moveSelector.color }),
  );
  moveMarker.name = `move-selector-${view.id}`;
  moveMarker.position.y = -PLOT_SCALE * 0.7;
  group.add(moveMarker);
  const rotMarker = new THREE.Mesh(
    new THREE.SphereGeometry(0.06, 12, 12),
    new THREE.MeshStandardMaterial({ color: view.rotationSelector.color }),
  );
  rotMarker.name = `rotation-selector-${view.id}`;
  rotMarker.position.y = PLOT_SCALE * 0.7;
  group.add(rotMarker);
  return group;
}

export class SceneRenderer {
  readonly scene = new THREE.Scene();
  readonly camera: THREE.PerspectiveCamera;
  private readonly renderer: THREE.WebGLRenderer;
  private readonly controls: OrbitControls;
  private readonly meshCache = new Map<string, Float32Array>();
  private root = new THREE.Group();

  constructor(
    private readonly client: ServiceClient,
    canvas: HTMLCanvasElement,
  ) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.camera = new THREE.PerspectiveCamera(
      55,
      canvas.clientWidth / Math.max(canvas.clientHeight, 1),
      0.01,
      100,
    );
    this.camera.position.set(6, 2.5, 0);
    // orbit/pan/zoom inspection only: camera motion never posts events
    this.controls = new OrbitControls(this.camera, canvas);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.6));
    const key = new THREE.DirectionalLight(0xffffff, 1.2);
    key.position.set(4, 6, 2);
    this.scene.add(key);
    this.scene.add(this.root);
  }

  private async soup(datasetId: string, which: string | number) {
    const key = `${datasetId}/${which}`;
    let positions = this.meshCache.get(key);
    if (!positions) {
      positions = parseStl(await this.client.geometry(datasetId, which)).positions;
      this.meshCache.set(key, positions);
    }
    return positions;
  }

  /** Rebuild the scene graph from the model (idempotent). */
  async update(model: SceneModel, datasetId: string): Promise<void> {
    const next = new THREE.Group();
    for (const view of model.plots) next.add(buildPlotGroup(view));

    if (model.geometry !== null) {
      const nominal = new THREE.Mesh(
        soupGeometry(await this.soup(datasetId, "nominal")),
        new THREE.MeshStandardMaterial({
          color: "#b0b8c4",
          transparent: model.geometry.nominalOpacity < 1,
          opacity: model.geometry.nominalOpacity,
        }),
      );
      nominal.name = "nominal-geometry";
      next.add(nominal);
      if (model.geometry.selected !== null) {
        const chosen = new THREE.Mesh(
          soupGeometry(await this.soup(datasetId, model.geometry.selected.index)),
          new THREE.MeshStandardMaterial({ color: "#4477aa" }),
        );
        chosen.name = "selected-geometry";
        next.add(chosen);
      }
    }
    if (model.context !== null) {
      const context = new THREE.Mesh(
        soupGeometry(await this.soup(datasetId, "context")),
        new THREE.MeshStandardMaterial({
          color: model.context.color,
          transparent: true,
          opacity: 0.5,
        }),
      );
      context.name = "context-geometry";
      next.add(context);
    }
    this.scene.remove(this.root);
    this.root = next;
    this.scene.add(this.root);
  }

  draw(): void {
    this.controls.update();
    this.renderer.render(this.scene, this.camera);
  }
}
