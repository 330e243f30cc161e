/** Pure scene model: a declarative description of everything on screen,
 * computed only from server state. The renderer maps it to a three.js
 * scene graph; tests assert on it directly. Re-building the model from a
 * freshly fetched session must give the same object as incremental
 * updates (state-sync property), so nothing here may depend on local
 * interaction history. */
import type {
  LayoutPayload,
  PlotId,
  PlotPayload,
  PlotPoint,
  PlotPoseDto,
  SessionDto,
} from "./types.js";

export const COLORS = {
  point: "#4477aa",
  selection: "#90ee90", // light green selection color
  hover: "#ffd700",
  selectorIdle: "#cccccc",
  selectorActive: "#ffa500", // active selector turns orange
  nominal: "#b0b8c4",
  contextIdle: "#6b7280",
  contextSelected: "#8a9a5b",
} as const;

export const NOMINAL_TRANSLUCENT_OPACITY = 0.35;
export const BACKPLANE_OPACITY = 0.15;

export interface PointView extends PlotPoint {
  color: string;
  hovered: boolean;
}

export interface AxisView {
  name: string;
  /** Cone-count axis convention: 1, 2 and 3 cones mark the axes. */
  cones: number;
}

export interface PlotView {
  id: PlotId;
  qoi: string;
  m: number;
  /** m=1 plots fall back to a y-vs-f plane embedded in the scene. */
  planar: boolean;
  position: [number, number, number];
  orientation: number[][];
  points: PointView[];
  axes: AxisView[];
  backPlanes: { count: number; opacity: number };
  moveSelector: { active: boolean; color: string };
  rotationSelector: { axis: string | null; color: string };
}

export interface GeometryView {
  nominalOpacity: number;
  selected: { index: number; opacity: number } | null;
  /** Added affordance: color the selected blade by displacement. */
  diffColoring: boolean;
}

export interface ContextView {
  color: string;
}

export interface Tooltip {
  plotId: PlotId;
  i: number;
  y: number[];
  f: number;
  billboard: true;
}

export interface Hud {
  tooltip: Tooltip | null;
  status: string;
  toast: string | null;
}

export interface SceneModel {
  error: boolean;
  plots: PlotView[];
  geometry: GeometryView | null;
  context: ContextView | null;
  hud: Hud;
}

/** Everything static the client needs about one dataset. */
export interface BundleData {
  datasetId: string;
  layout: LayoutPayload;
  plots: Record<string, PlotPayload>;
  hasGeometry: boolean;
  hasContext: boolean;
}

export interface HoverState {
  plotId: PlotId;
  index: number;
}

function axisViews(m: number): AxisView[] {
  if (m === 1) return [{ name: "y1", cones: 1 }, { name: "f", cones: 3 }];
  return [
    { name: "y1", cones: 1 },
    { name: "y2", cones: 2 },
    { name: "f", cones: 3 },
  ];
}

function plotView(
  id: PlotId,
  payload: PlotPayload,
  pose: PlotPoseDto,
  selectedIndex: number | null,
  hover: HoverState | null,
): PlotView {
  const points = payload.points.map((p) => {
    const hovered = hover !== null && hover.plotId === id && hover.index === p.i;
    return {
      ...p,
      hovered,
      color: p.i === selectedIndex ? COLORS.selection : COLORS.point,
    };
  });
  return {
    id,
    qoi: payload.qoi,
    m: payload.m,
    planar: payload.m === 1,
    position: pose.position,
    orientation: pose.orientation,
    points,
    axes: axisViews(payload.m),
    backPlanes: { count: payload.m === 1 ? 1 : 3, opacity: BACKPLANE_OPACITY },
    moveSelector: {
      active: pose.move_selector_active,
      color: pose.move_selector_active
        ? COLORS.selectorActive
        : COLORS.selectorIdle,
    },
    rotationSelector: {
      axis: pose.rotation_selector_active,
      color: pose.rotation_selector_active
        ? COLORS.selectorActive
        : COLORS.selectorIdle,
    },
  };
}

export function buildSceneModel(
  bundle: BundleData,
  session: SessionDto,
  hover: HoverState | null = null,
): SceneModel {
  const selected = session.selected_index;
  const plots = (Object.keys(bundle.layout.plots) as PlotId[])
    .sort()
    .map((id) =>
      plotView(
        id,
        bundle.plots[bundle.layout.plots[id]],
        session.plot_poses[id],
        selected,
        hover,
      ),
    );
  const geometry: GeometryView | null = bundle.hasGeometry
    ? {
        nominalOpacity: selected === null ? 1.0 : NOMINAL_TRANSLUCENT_OPACITY,
        selected: selected === null ? null : { index: selected, opacity: 1.0 },
        diffColoring: false,
      }
    : null;
  const context: ContextView | null = bundle.hasContext
    ? { color: selected === null ? COLORS.contextIdle : COLORS.contextSelected }
    : null;
  let tooltip: Tooltip | null = null;
  if (hover !== null) {
    const view = plots.find((p) => p.id === hover.plotId);
    const point = view?.points.find((p) => p.i === hover.index);
    if (view && point) {
      tooltip = {
        plotId: view.id,
        i: point.i,
        y: point.y,
        f: point.f,
        billboard: true,
      };
    }
  }
  return {
    error: false,
    plots,
    geometry,
    context,
    hud: {
      tooltip,
      status: `dataset ${bundle.datasetId}: ${plots
        .map((p) => `${p.id}=${p.qoi} (m=${p.m})`)
        .join(", ")}`,
      toast: null,
    },
  };
}

/** Visible error state instead of a blank canvas. */
export function errorScene(message: string): SceneModel {
  return {
    error: true,
    plots: [],
    geometry: null,
    context: null,
    hud: { tooltip: null, status: `error: ${message}`, toast: message },
  };
}
