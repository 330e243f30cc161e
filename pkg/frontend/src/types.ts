/** Wire types for the exploration service HTTP API. */

export interface PlotPoint {
  i: number;
  y: number[];
  f: number;
}

export interface PlotPayload {
  qoi: string;
  m: number;
  points: PlotPoint[];
}

export interface SubspacePayload {
  qoi: string;
  eigenvalues: number[];
  W: number[][];
  m: number;
  degenerate: boolean;
}

export type PlotId = "A" | "B";

export interface LayoutPayload {
  plots: Record<PlotId, string>;
  initial_positions: Record<PlotId, [number, number, number]>;
}

export interface PlotPoseDto {
  position: [number, number, number];
  orientation: number[][];
  move_selector_active: boolean;
  rotation_selector_active: "X" | "Y" | "Z" | null;
}

export interface SessionDto {
  dataset_id: string;
  selected_index: number | null;
  plot_poses: Record<PlotId, PlotPoseDto>;
  history_length: number;
}

export interface SelectionDto {
  selected_index: number;
  plot_points: Record<PlotId, PlotPoint>;
  geometry_key: string;
  diff_summary: unknown;
}

export interface EventResponse {
  session: SessionDto;
  selection?: SelectionDto;
}

export interface DiffPayload {
  mode: string;
  max_displacement: number;
  mean_displacement: number;
}
