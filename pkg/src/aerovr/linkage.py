"""Linked-selection session state: one global selection shared by both
performance plots and the geometry view, plot poses restricted to the 24
axis-aligned orientations, and barycentric group movement.

Every operation is a pure function (state, args) -> new state, so an event
log replayed from the initial state reproduces the current state exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

import numpy as np

from .errors import DataError, PreconditionError

PLOT_IDS = ("A", "B")

# default layout: geometry at the origin, plots flanking it at 3 scene
# units, +/-45 degrees off the X axis in the horizontal plane
LAYOUT_DISTANCE = 3.0
_S = LAYOUT_DISTANCE / np.sqrt(2.0)
DEFAULT_POSITIONS = {"A": (_S, 0.0, _S), "B": (_S, 0.0, -_S)}

_AXES = {"X": 0, "Y": 1, "Z": 2}


def _rotation_matrix(axis: str, direction: int):
    """90-degree proper rotation about a world axis, right-handed.

    +90 about X maps (0,1,0) -> (0,0,1).
    """
    if axis not in _AXES:
        raise DataError(f"unknown rotation axis {axis!r}")
    if direction not in (1, -1):
        raise DataError(f"rotation direction must be +1 or -1, got {direction}")
    i = _AXES[axis]
    j, k = (i + 1) % 3, (i + 2) % 3
    R = [[0] * 3 for _ in range(3)]
    R[i][i] = 1
    R[j][k] = -direction
    R[k][j] = direction
    return tuple(tuple(row) for row in R)


IDENTITY = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def _matmul3(a, b):
    return tuple(
        tuple(sum(a[r][k] * b[k][c] for k in range(3)) for c in range(3))
        for r in range(3)
    )


def _is_axis_aligned_rotation(R) -> bool:
    arr = np.asarray(R)
    return (arr.shape == (3, 3)
            and np.all(np.isin(arr, (-1, 0, 1)))
            and np.array_equal(arr @ arr.T, np.eye(3, dtype=int))
            and round(float(np.linalg.det(arr))) == 1)


@dataclass(frozen=True)
class PlotPose:
    position: tuple[float, float, float]
    orientation: tuple = IDENTITY  # one of the 24 axis-aligned rotations
    move_selector_active: bool = False
    rotation_selector_active: str | None = None  # "X" | "Y" | "Z"

    def __post_init__(self):
        if not _is_axis_aligned_rotation(self.orientation):
            raise DataError("pose orientation is not an axis-aligned rotation")
        if self.rotation_selector_active not in (None, "X", "Y", "Z"):
            raise DataError(
                f"invalid rotation selector {self.rotation_selector_active!r}"
            )
        object.__setattr__(self, "position",
                           tuple(float(v) for v in self.position))


@dataclass(frozen=True)
class SessionState:
    dataset_id: str
    selected_index: int | None = None
    plot_poses: dict[str, PlotPose] = field(default_factory=dict)
    history: tuple = ()  # append-only (t, op, args) event log

    def __post_init__(self):
        active = [pid for pid, pose in self.plot_poses.items()
                  if pose.rotation_selector_active is not None]
        if len(active) > 1:
            raise DataError(
                f"rotation selectors active on multiple plots: {active}"
            )

    def pose(self, plot_id: str) -> PlotPose:
        if plot_id not in self.plot_poses:
            raise DataError(f"unknown plot id {plot_id!r}; have {PLOT_IDS}")
        return self.plot_poses[plot_id]


@dataclass(frozen=True)
class SelectionResult:
    selected_index: int
    plot_points: dict[str, dict]  # plot id -> {"i", "y", "f"}
    geometry_key: str
    diff_summary: object | None = None


def initial_state(dataset_id: str) -> SessionState:
    poses = {pid: PlotPose(position=DEFAULT_POSITIONS[pid]) for pid in PLOT_IDS}
    return SessionState(dataset_id=dataset_id, plot_poses=poses)


def _record(state: SessionState, op: str, args: dict,
            t: str | None = None) -> tuple:
    t = t or datetime.now(timezone.utc).isoformat()
    return state.history + ((t, op, dict(args)),)


def _with_pose(state: SessionState, plot_id: str, pose: PlotPose,
               **changes) -> dict[str, PlotPose]:
    poses = dict(state.plot_poses)
    poses[plot_id] = replace(pose, **changes)
    return poses


def select_point(state: SessionState, dataset, plot_id: str, index: int,
                 t: str | None = None) -> tuple[SessionState, SelectionResult]:
    """Select design `index`; the selection is global across both plots."""
    if dataset is None:
        raise PreconditionError("no dataset loaded")
    state.pose(plot_id)  # validates plot id
    if not 0 <= index < dataset.n_designs:
        raise DataError(
            f"design index {index} out of range 0..{dataset.n_designs - 1}"
        )
    new = replace(state, selected_index=index,
                  history=_record(state, "select_point",
                                  {"plot_id": plot_id, "index": index}, t))
    result = SelectionResult(
        selected_index=index,
        plot_points={pid: dataset.plot_point(pid, index) for pid in PLOT_IDS},
        geometry_key=dataset.geometry_key(index),
        diff_summary=dataset.diff_summary(index),
    )
    return new, result


def clear_selection(state: SessionState, t: str | None = None) -> SessionState:
    return replace(state, selected_index=None,
                   history=_record(state, "clear_selection", {}, t))


def activate_selector(state: SessionState, plot_id: str, kind: str,
                      axis: str | None = None, active: bool = True,
                      t: str | None = None) -> SessionState:
    """Toggle a plot's move selector or its rotation selector.

    Activating a rotation selector deactivates any other rotation selector,
    on any plot, so at most one is active at a time.
    """
    pose = state.pose(plot_id)
    args = {"plot_id": plot_id, "kind": kind, "axis": axis, "active": active}
    if kind == "move":
        poses = _with_pose(state, plot_id, pose, move_selector_active=bool(active))
    elif kind == "rotation":
        if active and axis not in _AXES:
            raise DataError(f"rotation selector needs an axis X|Y|Z, got {axis!r}")
        if active:
            # activating one rotation selector deselects every other one
            poses = {
                pid: (p if p.rotation_selector_active is None
                      else replace(p, rotation_selector_active=None))
                for pid, p in state.plot_poses.items()
            }
            poses[plot_id] = replace(poses[plot_id], rotation_selector_active=axis)
        else:
            poses = _with_pose(state, plot_id, pose, rotation_selector_active=None)
    else:
        raise DataError(f"unknown selector kind {kind!r}; use 'move' or 'rotation'")
    return replace(state, plot_poses=poses,
                   history=_record(state, "activate_selector", args, t))


def rotate_plot(state: SessionState, plot_id: str, axis: str, direction: int,
                t: str | None = None) -> SessionState:
    """Compose a 90-degree world-axis rotation onto the plot's orientation."""
    pose = state.pose(plot_id)
    if pose.rotation_selector_active != axis:
        raise PreconditionError(
            f"rotation selector for plot {plot_id!r} axis {axis!r} is not active"
        )
    R = _rotation_matrix(axis, direction)
    poses = _with_pose(state, plot_id, pose,
                       orientation=_matmul3(R, pose.orientation))
    args = {"plot_id": plot_id, "axis": axis, "direction": direction}
    return replace(state, plot_poses=poses,
                   history=_record(state, "rotate_plot", args, t))


def move_plots(state: SessionState, plot_ids, target,
               t: str | None = None) -> SessionState:
    """Translate the selected plots so their barycentre lands on `target`.

    Rigid: orientations and pairwise offsets are untouched.
    """
    plot_ids = list(plot_ids)
    if not plot_ids:
        raise DataError("move_plots needs at least one plot id")
    for pid in plot_ids:
        pose = state.pose(pid)
        if not pose.move_selector_active:
            raise PreconditionError(f"move selector for plot {pid!r} is not active")
    positions = np.array([state.plot_poses[pid].position for pid in plot_ids])
    barycentre = positions.mean(axis=0)
    shift = np.asarray(target, dtype=float) - barycentre
    poses = dict(state.plot_poses)
    for pid in plot_ids:
        pose = poses[pid]
        poses[pid] = replace(
            pose, position=tuple(np.asarray(pose.position) + shift))
    args = {"plot_ids": plot_ids, "target": [float(v) for v in target]}
    return replace(state, plot_poses=poses,
                   history=_record(state, "move_plots", args, t))


def reset_session(state: SessionState, t: str | None = None) -> SessionState:
    """Clear the selection and restore the initial plot layout."""
    fresh = initial_state(state.dataset_id)
    return replace(fresh, history=_record(state, "reset_session", {}, t))


def next_dataset(state: SessionState, catalog: list[str],
                 t: str | None = None) -> SessionState:
    """Advance cyclically through the dataset catalog; selection and poses reset."""
    if not catalog:
        raise DataError("dataset catalog is empty")
    if state.dataset_id in catalog:
        nxt = catalog[(catalog.index(state.dataset_id) + 1) % len(catalog)]
    else:
        nxt = catalog[0]
    fresh = initial_state(nxt)
    return replace(fresh, history=_record(state, "next_dataset",
                                          {"catalog": list(catalog)}, t))


def apply_event(state: SessionState, op: str, args: dict, dataset=None,
                t: str | None = None) -> SessionState:
    """Apply one logged event; used by replay and by the HTTP layer.

    `dataset` may be a single dataset adapter or a dict keyed by dataset id.
    """
    if isinstance(dataset, dict):
        dataset = dataset.get(state.dataset_id)
    if op == "select_point":
        new, _ = select_point(state, dataset, args["plot_id"],
                              int(args["index"]), t=t)
        return new
    if op == "clear_selection":
        return clear_selection(state, t=t)
    if op == "activate_selector":
        return activate_selector(state, args["plot_id"], args["kind"],
                                 args.get("axis"),
                                 bool(args.get("active", True)), t=t)
    if op == "rotate_plot":
        return rotate_plot(state, args["plot_id"], args["axis"],
                           int(args["direction"]), t=t)
    if op == "move_plots":
        return move_plots(state, args["plot_ids"], args["target"], t=t)
    if op == "reset_session":
        return reset_session(state, t=t)
    if op == "next_dataset":
        return next_dataset(state, args["catalog"], t=t)
    raise DataError(f"unknown session operation {op!r}")


def write_event_log(state: SessionState, path) -> None:
    """JSON-lines event log, one {"t", "op", "args"} object per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for t, op, args in state.history:
            fh.write(json.dumps({"t": t, "op": op, "args": args}) + "\n")


def replay_event_log(path, dataset_id: str, dataset=None) -> SessionState:
    """Rebuild a session by re-applying a JSON-lines event log."""
    state = initial_state(dataset_id)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                event = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from exc
            state = apply_event(state, event["op"], event.get("args", {}),
                                dataset=dataset, t=event.get("t"))
    return state


def replay_events(events, dataset_id: str, dataset=None) -> SessionState:
    """Replay an in-memory history (t, op, args) tuple sequence."""
    state = initial_state(dataset_id)
    for t, op, args in events:
        state = apply_event(state, op, args, dataset=dataset, t=t)
    return state
