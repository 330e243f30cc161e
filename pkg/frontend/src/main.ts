/** Browser entry point: wires pointer/keyboard input to the controller
 * and repaints from the authoritative scene model every frame.
 *
 * Controls: click a point to select/revert it; click a selector sphere to
 * arm it (X/Enter/R/L keys rotate or re-layout, mirroring the desktop key
 * mapping); click empty floor with move selectors armed to re-place the
 * plots; mouse orbit/pan/zoom inspects without touching session state. */
import * as THREE from "three";
import { ServiceClient } from "./api.js";
import { ExplorerController } from "./controller.js";
import { SceneRenderer } from "./render.js";
import type { PlotId } from "./types.js";

interface Config {
  baseUrl: string;
}

function tooltipDiv(): HTMLDivElement {
  const div = document.createElement("div");
  div.id = "tooltip";
  div.style.cssText =
    "position:fixed;pointer-events:none;background:#222;color:#eee;" +
    "padding:4px 8px;border-radius:4px;font:12px monospace;display:none";
  document.body.appendChild(div);
  return div;
}

async function boot(): Promise<void> {
  const config = (await (await fetch("config.json")).json()) as Config;
  const canvas = document.getElementById("view") as HTMLCanvasElement;
  const status = document.getElementById("status") as HTMLDivElement;
  const tooltip = tooltipDiv();

  const client = new ServiceClient(config.baseUrl);
  const sid = `browser-${crypto.randomUUID()}`;
  const controller = new ExplorerController(client, sid);
  await controller.init();

  const renderer = new SceneRenderer(client, canvas);
  const raycaster = new THREE.Raycaster();
  const pointer = new THREE.Vector2();
  let rotationAxis: "X" | "Y" | "Z" = "X";

  const sync = async () => {
    status.textContent = controller.scene.hud.toast ?? controller.scene.hud.status;
    const t = controller.scene.hud.tooltip;
    tooltip.style.display = t ? "block" : "none";
    if (t) {
      tooltip.textContent =
        `design ${t.i}: y=[${t.y.map((v) => v.toFixed(4)).join(", ")}] ` +
        `f=${t.f.toFixed(6)}`;
    }
    if (!controller.scene.error) {
      await renderer.update(
        controller.scene,
        controller.scene.hud.status.split(" ")[1]?.replace(":", "") ?? "",
      );
    }
  };

  const pick = (event: PointerEvent) => {
    pointer.set(
      (event.clientX / canvas.clientWidth) * 2 - 1,
      -(event.clientY / canvas.clientHeight) * 2 + 1,
    );
    raycaster.setFromCamera(pointer, renderer.camera);
    return raycaster.intersectObjects(renderer.scene.children, true);
  };

  canvas.addEventListener("pointermove", (event) => {
    const hit = pick(event).find((h) => h.object.name.startsWith("point-"));
    if (hit) {
      const { plotId, index } = hit.object.userData as {
        plotId: PlotId;
        index: number;
      };
      controller.onHover({ plotId, index });
      tooltip.style.left = `${event.clientX + 12}px`;
      tooltip.style.top = `${event.clientY + 12}px`;
    } else {
      controller.onHover(null);
    }
    void sync();
  });

  canvas.addEventListener("click", async (event) => {
    const hits = pick(event as PointerEvent);
    const point = hits.find((h) => h.object.name.startsWith("point-"));
    if (point) {
      const { plotId, index } = point.object.userData as {
        plotId: PlotId;
        index: number;
      };
      await controller.onSelect(plotId, index);
      return void sync();
    }
    const selector = hits.find(
      (h) =>
        h.object.name.startsWith("move-selector-") ||
        h.object.name.startsWith("rotation-selector-"),
    );
    if (selector) {
      const name = selector.object.name;
      const plotId = name.slice(name.lastIndexOf("-") + 1) as PlotId;
      if (name.startsWith("move-selector-")) {
        const active =
          controller.scene.plots.find((p) => p.id === plotId)?.moveSelector
            .active ?? false;
        await controller.activateSelector(plotId, "move", !active);
      } else {
        await controller.activateSelector(plotId, "rotation", true, rotationAxis);
      }
      return void sync();
    }
    // empty-space click with armed move selectors: re-place the group
    const armed = controller.scene.plots
      .filter((p) => p.moveSelector.active)
      .map((p) => p.id);
    if (armed.length > 0) {
      const target = raycaster.ray.at(5, new THREE.Vector3());
      await controller.movePlots(armed, [target.x, target.y, target.z]);
      void sync();
    }
  });

  window.addEventListener("keydown", async (event) => {
    const active = controller.scene.plots.find(
      (p) => p.rotationSelector.axis !== null,
    );
    if (event.key === "x" || event.key === "X") rotationAxis = "X";
    if (event.key === "l" || event.key === "L") rotationAxis = "Y";
    if (event.key === "r" || event.key === "R") {
      if (active) {
        await controller.rotatePlot(
          active.id,
          active.rotationSelector.axis as "X" | "Y" | "Z",
          event.shiftKey ? -1 : 1,
        );
        void sync();
      }
    }
    if (event.key === "Enter") {
      await controller.resetSession();
      void sync();
    }
  });

  await sync();
  const loop = () => {
    renderer.draw();
    requestAnimationFrame(loop);
  };
  loop();
}

void boot();
