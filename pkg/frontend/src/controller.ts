/** Event-loop controller: owns the authoritative scene model and the
 * session mutation queue. The client never computes poses or selection
 * locally — every mutation round-trips through the service and the scene
 * is rebuilt from the returned session state. */
import { ApiError, ServiceClient } from "./api.js";
import {
  BundleData,
  HoverState,
  SceneModel,
  buildSceneModel,
  errorScene,
} from "./scene.js";
import type { EventResponse, PlotId, SessionDto } from "./types.js";

export class ExplorerController {
  scene: SceneModel;
  private bundle: BundleData | null = null;
  private session: SessionDto | null = null;
  private hover: HoverState | null = null;
  /** At most one in-flight session mutation; later events queue behind it. */
  private queue: Promise<unknown> = Promise.resolve();

  constructor(
    private readonly client: ServiceClient,
    readonly sid: string,
  ) {
    this.scene = errorScene("not initialised");
  }

  async init(): Promise<void> {
    try {
      const datasets = await this.client.datasets();
      if (datasets.length === 0) throw new Error("service has no datasets");
      this.bundle = await this.loadBundle(datasets[0]);
      this.session = await this.client.session(this.sid);
      this.render();
    } catch (err) {
      this.scene = errorScene(err instanceof Error ? err.message : String(err));
    }
  }

  private async loadBundle(datasetId: string): Promise<BundleData> {
    const layout = await this.client.layout(datasetId);
    const plots: BundleData["plots"] = {};
    for (const qoi of Object.values(layout.plots)) {
      plots[qoi] = await this.client.plot(datasetId, qoi);
    }
    const hasGeometry = await this.probeGeometry(datasetId, "nominal");
    const hasContext =
      hasGeometry && (await this.probeGeometry(datasetId, "context"));
    return { datasetId, layout, plots, hasGeometry, hasContext };
  }

  private async probeGeometry(ds: string, which: string): Promise<boolean> {
    try {
      await this.client.geometry(ds, which);
      return true;
    } catch {
      return false;
    }
  }

  private render(): void {
    if (this.bundle === null || this.session === null) return;
    this.scene = buildSceneModel(this.bundle, this.session, this.hover);
  }

  /** Hover is transient and view-local; it never touches session state. */
  onHover(hover: HoverState | null): void {
    this.hover = hover;
    this.render();
  }

  private toast(message: string): void {
    this.scene = { ...this.scene, hud: { ...this.scene.hud, toast: message } };
  }

  private mutate(
    op: string,
    args: Record<string, unknown>,
    on409?: string,
  ): Promise<void> {
    const step = this.queue.then(async () => {
      let resp: EventResponse;
      try {
        resp = await this.client.postEvent(this.sid, op, args);
      } catch (err) {
        if (err instanceof ApiError) {
          this.toast(on409 && err.status === 409 ? on409 : err.message);
          return; // scene unchanged apart from the toast
        }
        throw err;
      }
      this.session = resp.session;
      if (this.bundle === null || resp.session.dataset_id !== this.bundle.datasetId) {
        this.bundle = await this.loadBundle(resp.session.dataset_id);
      }
      this.render();
    });
    this.queue = step.catch(() => undefined);
    return step;
  }

  /** Click on a point: select it, or revert if it is already selected. */
  onSelect(plotId: PlotId, index: number): Promise<void> {
    if (this.session?.selected_index === index) {
      return this.mutate("clear_selection", {});
    }
    return this.mutate("select_point", { plot_id: plotId, index });
  }

  activateSelector(
    plotId: PlotId,
    kind: "move" | "rotation",
    active: boolean,
    axis?: "X" | "Y" | "Z",
  ): Promise<void> {
    return this.mutate("activate_selector", {
      plot_id: plotId,
      kind,
      axis: axis ?? null,
      active,
    });
  }

  movePlots(plotIds: PlotId[], target: [number, number, number]): Promise<void> {
    return this.mutate(
      "move_plots",
      { plot_ids: plotIds, target },
      "activate a selector first",
    );
  }

  rotatePlot(plotId: PlotId, axis: "X" | "Y" | "Z", direction: 1 | -1): Promise<void> {
    return this.mutate(
      "rotate_plot",
      { plot_id: plotId, axis, direction },
      "activate a selector first",
    );
  }

  resetSession(): Promise<void> {
    return this.mutate("reset_session", {});
  }

  nextDataset(): Promise<void> {
    return this.mutate("next_dataset", {});
  }
}
