/** Initial-scene checklist: everything that must be visible without any
 * user action, asserted on the scene model, plus hover tooltip behaviour
 * and the visible-error state. */
import { describe, expect, it, beforeAll } from "vitest";
import { ServiceClient } from "../src/api.js";
import { ExplorerController } from "../src/controller.js";
import { COLORS } from "../src/scene.js";
import { parseStl } from "../src/stl.js";
import { BASE_URL } from "./helpers.js";

const client = new ServiceClient(BASE_URL);

async function freshController(sid: string): Promise<ExplorerController> {
  const controller = new ExplorerController(client, sid);
  await controller.init();
  return controller;
}

describe("initial scene", () => {
  let controller: ExplorerController;

  beforeAll(async () => {
    controller = await freshController(`initial-${Date.now()}`);
  });

  it("shows two plots and the nominal geometry without user action", () => {
    const scene = controller.scene;
    expect(scene.error).toBe(false);
    expect(scene.plots.map((p) => p.id)).toEqual(["A", "B"]);
    expect(scene.geometry).not.toBeNull();
    expect(scene.geometry!.nominalOpacity).toBe(1.0);
    expect(scene.geometry!.selected).toBeNull();
    expect(scene.context).not.toBeNull();
  });

  it("renders every design point exactly once per plot", () => {
    for (const plot of controller.scene.plots) {
      const indices = plot.points.map((p) => p.i).sort((a, b) => a - b);
      expect(indices).toEqual([...Array(40).keys()]);
      expect(plot.points.every((p) => p.color === COLORS.point)).toBe(true);
    }
  });

  it("marks axes with cone counts 1/2/3", () => {
    const volumetric = controller.scene.plots.find((p) => p.m === 2)!;
    expect(volumetric.axes.map((a) => a.cones)).toEqual([1, 2, 3]);
    expect(volumetric.backPlanes.count).toBe(3);
    expect(volumetric.backPlanes.opacity).toBeLessThan(1);
  });

  it("renders an m=1 plot as a y-vs-f plane", () => {
    const planar = controller.scene.plots.find((p) => p.m === 1)!;
    expect(planar.planar).toBe(true);
    expect(planar.axes.map((a) => a.name)).toEqual(["y1", "f"]);
    expect(planar.axes.map((a) => a.cones)).toEqual([1, 3]);
    expect(planar.backPlanes.count).toBe(1);
  });

  it("places the plots per the service's initial layout", async () => {
    const datasets = await client.datasets();
    const layout = await client.layout(datasets[0]);
    for (const plot of controller.scene.plots) {
      expect(plot.position).toEqual(layout.initial_positions[plot.id]);
      expect(plot.orientation).toEqual([
        [1, 0, 0],
        [0, 1, 0],
        [0, 0, 1],
      ]);
    }
  });

  it("shows a billboarded tooltip on hover and hides it on leave", () => {
    controller.onHover({ plotId: "A", index: 5 });
    const tooltip = controller.scene.hud.tooltip!;
    const plotA = controller.scene.plots.find((p) => p.id === "A")!;
    const point5 = plotA.points.find((p) => p.i === 5)!;
    expect(tooltip.i).toBe(5);
    expect(tooltip.y).toEqual(point5.y);
    expect(tooltip.f).toBe(point5.f);
    expect(tooltip.billboard).toBe(true);
    expect(point5.hovered).toBe(true);

    controller.onHover(null);
    expect(controller.scene.hud.tooltip).toBeNull();
  });

  it("keeps selection styling unchanged while hovering", async () => {
    const sid = `hover-select-${Date.now()}`;
    const c = await freshController(sid);
    await c.onSelect("A", 3);
    c.onHover({ plotId: "B", index: 7 });
    for (const plot of c.scene.plots) {
      expect(plot.points.find((p) => p.i === 3)!.color).toBe(COLORS.selection);
      expect(plot.points.find((p) => p.i === 7)!.color).toBe(COLORS.point);
    }
    c.onHover(null);
  });

  it("streams parseable nominal geometry", async () => {
    const datasets = await client.datasets();
    const soup = parseStl(await client.geometry(datasets[0], "nominal"));
    expect(soup.facetCount).toBeGreaterThan(0);
    expect(soup.positions.length).toBe(soup.facetCount * 9);
  });

  it("shows a visible error state when the service is unreachable", async () => {
    const broken = new ExplorerController(
      new ServiceClient("http://127.0.0.1:9"),
      "err",
    );
    await broken.init();
    expect(broken.scene.error).toBe(true);
    expect(broken.scene.hud.status).toMatch(/^error: /);
  });
});
