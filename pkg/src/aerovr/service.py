"""JSON-over-HTTP facade: datasets, subspaces, summary plots, geometry,
and session operations.

Bundles are computed once at startup and served immutably; session events
are serialized per session id and appended to a JSON-lines log.
"""
from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from . import linkage
from .dataset import DesignTable, DomainSpec, load_design_table
from .errors import DataError, NumericalError, PreconditionError
from .geometry import GeometryCatalog, serialize_stl
from .serialize import dumps_17, plot_to_json, subspace_to_json
from .surrogate import (ActiveSubspace, RidgeProfile, SummaryPlot,
                        build_summary_plot, covariance_analytic,
                        eigendecompose, finalize_subspace, fit_quadratic,
                        fit_ridge_profile)

SESSION_EVENTS = ("select_point", "clear_selection", "activate_selector",
                  "rotate_plot", "move_plots", "reset_session", "next_dataset")


@dataclass
class ServiceConfig:
    listen_address: str = "127.0.0.1:8080"
    data_root: Path = Path(".")
    initial_layout: dict = field(
        default_factory=lambda: dict(linkage.DEFAULT_POSITIONS))
    cors_allowed: bool = True


@dataclass
class DatasetBundle:
    """Everything the scene needs for one dataset, index-aligned throughout."""

    id: str
    table: DesignTable
    subspaces: dict[str, ActiveSubspace]
    plots: dict[str, SummaryPlot]
    profiles: dict[str, RidgeProfile]
    geometry: GeometryCatalog | None = None

    @property
    def plot_qoi(self) -> dict[str, str]:
        """Map the two plot slots A/B onto the first two qoi names."""
        names = self.table.qoi_names
        return {"A": names[0], "B": names[1] if len(names) > 1 else names[0]}


def compute_bundle(table: DesignTable, qoi_names: list[str],
                   geometry: GeometryCatalog | None = None,
                   dataset_id: str = "dataset",
                   max_m: int = 2, degree: int = 2) -> DatasetBundle:
    """Run the full pipeline for each qoi; deterministic on identical inputs."""
    subspaces, plots, profiles = {}, {}, {}
    for qoi in qoi_names:
        if qoi not in table.qoi:
            raise DataError(f"qoi {qoi!r} not present in table ({table.qoi_names})")
        try:
            model = fit_quadratic(table, qoi)
            cov = covariance_analytic(model)
            subspace = finalize_subspace(eigendecompose(cov), max_m=max_m)
            plot = build_summary_plot(table, subspace, qoi)
            profile = fit_ridge_profile(plot, degree=degree)
        except (DataError, NumericalError) as exc:
            raise type(exc)(f"qoi {qoi!r}: {exc}") from exc
        subspaces[qoi] = subspace
        plots[qoi] = plot
        profiles[qoi] = profile
    return DatasetBundle(id=dataset_id, table=table, subspaces=subspaces,
                         plots=plots, profiles=profiles, geometry=geometry)


class BundleDatasetAdapter:
    """What the linkage operations need to know about a bundle."""

    def __init__(self, bundle: DatasetBundle):
        self.bundle = bundle

    @property
    def n_designs(self) -> int:
        return self.bundle.table.n

    def plot_point(self, plot_id: str, index: int) -> dict:
        qoi = self.bundle.plot_qoi[plot_id]
        return self.bundle.plots[qoi].point(index)

    def geometry_key(self, index: int) -> str:
        return self.bundle.table.geometry_key(index)

    def diff_summary(self, index: int):
        if self.bundle.geometry is None:
            return None
        return self.bundle.geometry.diff(index).to_dict()


def load_bundle_dir(path: Path, dataset_id: str | None = None,
                    max_m: int = 2, degree: int = 2) -> DatasetBundle:
    """Load one dataset directory (domain.json + designs.csv [+ geometry.json])."""
    path = Path(path)
    domain = DomainSpec.from_json(path / "domain.json")
    table = load_design_table(path / "designs.csv", domain)
    geometry = None
    manifest = path / "geometry.json"
    if manifest.exists():
        geometry = GeometryCatalog.load(manifest)
    return compute_bundle(table, table.qoi_names, geometry,
                          dataset_id=dataset_id or path.name,
                          max_m=max_m, degree=degree)


def load_data_root(data_root: Path) -> dict[str, DatasetBundle]:
    """Load every dataset directory under data_root, sorted by name."""
    data_root = Path(data_root)
    if not data_root.is_dir():
        raise DataError(f"data root {data_root} is not a directory")
    bundles = {}
    for sub in sorted(data_root.iterdir()):
        if sub.is_dir() and (sub / "domain.json").exists():
            bundles[sub.name] = load_bundle_dir(sub)
    if not bundles:
        raise DataError(f"no dataset manifests found under {data_root}")
    return bundles


def _pose_dict(pose: linkage.PlotPose) -> dict:
    return {
        "position": list(pose.position),
        "orientation": [list(r) for r in pose.orientation],
        "move_selector_active": pose.move_selector_active,
        "rotation_selector_active": pose.rotation_selector_active,
    }


def state_to_dict(state: linkage.SessionState) -> dict:
    return {
        "dataset_id": state.dataset_id,
        "selected_index": state.selected_index,
        "plot_poses": {pid: _pose_dict(p) for pid, p in state.plot_poses.items()},
        "history_length": len(state.history),
    }


class SessionStore:
    """In-memory sessions, serialized per sid, JSON-lines persisted on mutation."""

    def __init__(self, default_dataset: str, log_dir: Path | None = None):
        self.default_dataset = default_dataset
        self.log_dir = Path(log_dir) if log_dir else None
        self._states: dict[str, linkage.SessionState] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def _lock(self, sid: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(sid, threading.Lock())

    def get(self, sid: str) -> linkage.SessionState:
        with self._lock(sid):
            if sid not in self._states:
                self._states[sid] = linkage.initial_state(self.default_dataset)
            return self._states[sid]

    def apply(self, sid: str, op: str, args: dict, dataset):
        with self._lock(sid):
            state = self._states.get(sid) or linkage.initial_state(
                self.default_dataset)
            result = None
            if op == "select_point":
                state, result = linkage.select_point(
                    state, dataset, args["plot_id"], int(args["index"]))
            else:
                state = linkage.apply_event(state, op, args, dataset=dataset)
            self._states[sid] = state
            if self.log_dir is not None:
                self.log_dir.mkdir(parents=True, exist_ok=True)
                t, logged_op, logged_args = state.history[-1]
                with (self.log_dir / f"{sid}.jsonl").open("a") as fh:
                    fh.write(json.dumps({"t": t, "op": logged_op,
                                         "args": logged_args}) + "\n")
            return state, result


def _json_response(text: str, status: int = 200) -> Response:
    body = text.encode("utf-8")
    etag = hashlib.sha256(body).hexdigest()
    return Response(content=body, status_code=status,
                    media_type="application/json", headers={"ETag": etag})


def create_app(config: ServiceConfig) -> FastAPI:
    bundles = load_data_root(config.data_root)
    dataset_ids = sorted(bundles)
    adapters = {ds_id: BundleDatasetAdapter(b) for ds_id, b in bundles.items()}
    sessions = SessionStore(default_dataset=dataset_ids[0],
                            log_dir=Path(config.data_root) / "sessions")

    app = FastAPI(title="aerovr")
    if config.cors_allowed:
        from fastapi.middleware.cors import CORSMiddleware
        app.add_middleware(CORSMiddleware, allow_origins=["*"],
                           allow_methods=["*"], allow_headers=["*"])
    app.state.bundles = bundles
    app.state.sessions = sessions

    def _bundle(ds_id: str) -> DatasetBundle:
        if ds_id not in bundles:
            raise KeyError(ds_id)
        return bundles[ds_id]

    @app.exception_handler(KeyError)
    async def _not_found(request: Request, exc: KeyError):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.get("/datasets")
    def list_datasets():
        return {"datasets": dataset_ids}

    @app.get("/datasets/{ds_id}/plots/{qoi}")
    def get_plot(ds_id: str, qoi: str):
        bundle = _bundle(ds_id)
        if qoi not in bundle.plots:
            raise KeyError(f"unknown qoi {qoi!r}")
        return _json_response(plot_to_json(bundle.plots[qoi]))

    @app.get("/datasets/{ds_id}/subspace/{qoi}")
    def get_subspace(ds_id: str, qoi: str):
        bundle = _bundle(ds_id)
        if qoi not in bundle.subspaces:
            raise KeyError(f"unknown qoi {qoi!r}")
        return _json_response(subspace_to_json(qoi, bundle.subspaces[qoi]))

    @app.get("/datasets/{ds_id}/layout")
    def get_layout(ds_id: str):
        bundle = _bundle(ds_id)
        return {"plots": bundle.plot_qoi,
                "initial_positions": {k: list(v) for k, v in
                                      config.initial_layout.items()}}

    @app.get("/datasets/{ds_id}/geometry/{which}")
    def get_geometry(ds_id: str, which: str):
        bundle = _bundle(ds_id)
        if bundle.geometry is None:
            raise KeyError(f"dataset {ds_id!r} has no geometry")
        if which == "nominal":
            mesh = bundle.geometry.nominal
        elif which == "context":
            if bundle.geometry.context_mesh is None:
                raise KeyError("no context mesh")
            mesh = bundle.geometry.context_mesh
        else:
            try:
                index = int(which)
            except ValueError:
                return JSONResponse(status_code=400,
                                    content={"error": f"malformed index {which!r}"})
            try:
                mesh = bundle.geometry.mesh(index)
            except DataError as exc:
                raise KeyError(str(exc)) from exc
        body = serialize_stl(mesh, "binary")
        etag = hashlib.sha256(body).hexdigest()
        return Response(content=body, media_type="application/octet-stream",
                        headers={"ETag": etag})

    @app.get("/datasets/{ds_id}/diff/{index}")
    def get_diff(ds_id: str, index: str):
        bundle = _bundle(ds_id)
        if bundle.geometry is None:
            raise KeyError(f"dataset {ds_id!r} has no geometry")
        try:
            i = int(index)
        except ValueError:
            return JSONResponse(status_code=400,
                                content={"error": f"malformed index {index!r}"})
        try:
            diff = bundle.geometry.diff(i)
        except DataError as exc:
            raise KeyError(str(exc)) from exc
        return _json_response(dumps_17(diff.to_dict()))

    @app.get("/session/{sid}")
    def get_session(sid: str):
        return state_to_dict(sessions.get(sid))

    @app.post("/session/{sid}/events")
    async def post_event(sid: str, request: Request):
        try:
            event = await request.json()
        except json.JSONDecodeError:
            return JSONResponse(status_code=400,
                                content={"error": "body is not valid JSON"})
        op = event.get("op")
        args = event.get("args", {})
        if op not in SESSION_EVENTS or not isinstance(args, dict):
            return JSONResponse(status_code=400,
                                content={"error": f"malformed event {op!r}"})
        if op == "next_dataset":
            args = {"catalog": dataset_ids}
        current = sessions.get(sid)
        dataset = adapters.get(current.dataset_id)
        try:
            state, result = sessions.apply(sid, op, args, dataset)
        except PreconditionError as exc:
            return JSONResponse(status_code=409, content={"error": str(exc)})
        except DataError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        body = {"session": state_to_dict(state)}
        if result is not None:
            body["selection"] = {
                "selected_index": result.selected_index,
                "plot_points": result.plot_points,
                "geometry_key": result.geometry_key,
                "diff_summary": result.diff_summary,
            }
        return body

    return app


def run_service(config: ServiceConfig) -> None:
    import uvicorn
    host, _, port = config.listen_address.partition(":")
    uvicorn.run(create_app(config), host=host or "127.0.0.1",
                port=int(port or 8080))
