"""Design-of-experiment tables: ingestion, normalization, sampling, oracles.

All downstream math assumes designs live in the normalized hypercube
[-1, 1]^d with a uniform input density; raw engineering units are mapped
in and out affinely per variable.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError

COORD_TOL = 1e-12


@dataclass(frozen=True)
class DomainSpec:
    """A d-dimensional box in raw engineering units, uniform density inside."""

    d: int
    bounds: tuple[tuple[float, float], ...]
    density: str = "uniform-hypercube"

    def __post_init__(self):
        if self.d < 1:
            raise DataError(f"domain dimension must be >= 1, got {self.d}")
        if self.density != "uniform-hypercube":
            raise DataError(
                f"unsupported input density {self.density!r}; only "
                "'uniform-hypercube' is supported"
            )
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(bounds) != self.d:
            raise DataError(
                f"expected {self.d} bound pairs, got {len(bounds)}"
            )
        for i, (lo, hi) in enumerate(bounds):
            if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
                raise DataError(f"bounds[{i}] = ({lo}, {hi}) must satisfy lower < upper")
        object.__setattr__(self, "bounds", bounds)

    @staticmethod
    def unit(d: int) -> "DomainSpec":
        """Domain whose raw units already are the normalized hypercube."""
        return DomainSpec(d=d, bounds=tuple((-1.0, 1.0) for _ in range(d)))

    @staticmethod
    def from_json(path) -> "DomainSpec":
        try:
            obj = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read domain file {path}: {exc}") from exc
        if not isinstance(obj, dict) or "d" not in obj or "bounds" not in obj:
            raise DataError(f'domain file {path} must contain "d" and "bounds"')
        return DomainSpec(d=int(obj["d"]), bounds=tuple(map(tuple, obj["bounds"])))

    def to_json(self) -> str:
        return json.dumps({"d": self.d, "bounds": [list(b) for b in self.bounds]})


@dataclass(frozen=True)
class DesignSample:
    """One normalized design vector with its quantity-of-interest values."""

    x: np.ndarray
    qoi: dict[str, float]
    geometry_key: str | None = None


class DesignTable:
    """N normalized designs with per-design qoi values, in stable row order.

    Row index is the canonical design index shared by the summary plots and
    the geometry catalog. Internally columnar: `x` is an (N, d) array and
    each qoi is an (N,) array.
    """

    def __init__(self, domain: DomainSpec, x: np.ndarray,
                 qoi: dict[str, np.ndarray] | None = None,
                 geometry_keys: list[str | None] | None = None):
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != domain.d:
            raise DataError(
                f"design matrix must be (N, {domain.d}), got {x.shape}"
            )
        if x.shape[0] < 1:
            raise DataError("a design table needs at least one sample")
        if not np.all(np.isfinite(x)):
            raise DataError("design matrix contains non-finite values")
        if np.any(np.abs(x) > 1.0 + COORD_TOL):
            bad = int(np.argmax(np.max(np.abs(x), axis=1) > 1.0 + COORD_TOL))
            raise DataError(f"row {bad} lies outside the normalized hypercube")
        self.domain = domain
        self.x = x
        self.x.setflags(write=False)
        self.qoi: dict[str, np.ndarray] = {}
        for name, vals in (qoi or {}).items():
            vals = np.asarray(vals, dtype=float)
            if vals.shape != (self.n,):
                raise DataError(f"qoi {name!r} must have {self.n} values")
            if not np.all(np.isfinite(vals)):
                bad = int(np.argmax(~np.isfinite(vals)))
                raise DataError(f"qoi {name!r} has a non-finite value at row {bad}")
            vals.setflags(write=False)
            self.qoi[name] = vals
        if geometry_keys is not None and len(geometry_keys) != self.n:
            raise DataError("geometry_keys length must match sample count")
        self.geometry_keys = geometry_keys

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.domain.d

    @property
    def qoi_names(self) -> list[str]:
        return list(self.qoi)

    def sample(self, i: int) -> DesignSample:
        key = self.geometry_keys[i] if self.geometry_keys else None
        return DesignSample(
            x=self.x[i],
            qoi={name: float(vals[i]) for name, vals in self.qoi.items()},
            geometry_key=key,
        )

    def geometry_key(self, i: int) -> str:
        """Mesh key for design i; defaults to a zero-padded filename."""
        if self.geometry_keys and self.geometry_keys[i]:
            return self.geometry_keys[i]
        return f"design_{i:04d}.stl"

    def with_qoi(self, name: str, values: np.ndarray) -> "DesignTable":
        qoi = dict(self.qoi)
        qoi[name] = values
        return DesignTable(self.domain, self.x, qoi, self.geometry_keys)


def normalize_design(raw: np.ndarray, domain: DomainSpec) -> np.ndarray:
    """Map raw engineering units affinely onto [-1, 1] per variable."""
    raw = np.asarray(raw, dtype=float)
    if raw.shape[-1] != domain.d:
        raise DataError(f"expected {domain.d} components, got {raw.shape[-1]}")
    lo, hi = _bound_arrays(domain)
    below, above = raw < lo, raw > hi
    if np.any(below | above):
        idx = int(np.argmax((below | above).reshape(-1)))
        flat = raw.reshape(-1)
        raise DataError(
            f"component {idx % domain.d} value {flat[idx]} is outside "
            f"bounds ({lo[idx % domain.d]}, {hi[idx % domain.d]})"
        )
    return 2.0 * (raw - lo) / (hi - lo) - 1.0


def denormalize_design(x: np.ndarray, domain: DomainSpec) -> np.ndarray:
    """Exact inverse of normalize_design."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != domain.d:
        raise DataError(f"expected {domain.d} components, got {x.shape[-1]}")
    lo, hi = _bound_arrays(domain)
    return lo + (x + 1.0) * (hi - lo) / 2.0


def _bound_arrays(domain: DomainSpec):
    b = np.asarray(domain.bounds, dtype=float)
    return b[:, 0], b[:, 1]


def load_design_table(path, domain: DomainSpec) -> DesignTable:
    """Load a CSV design table (header: x1..xd, qoi columns, optional geometry_key).

    Raw design values are normalized into [-1, 1]^d; row order is preserved
    as the design index.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"design table file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        return read_design_table(fh, domain, origin=str(path))


def read_design_table(fh, domain: DomainSpec, origin: str = "<stream>") -> DesignTable:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError(f"{origin}: empty file") from None
    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise DataError(f"{origin}: duplicate header column(s): {dupes}")
    expected_x = [f"x{i + 1}" for i in range(domain.d)]
    if header[: domain.d] != expected_x:
        raise DataError(
            f"{origin}: first {domain.d} columns must be {expected_x}, "
            f"got {header[:domain.d]}"
        )
    rest = header[domain.d:]
    has_geom = bool(rest) and rest[-1] == "geometry_key"
    qoi_names = rest[:-1] if has_geom else rest
    if not qoi_names:
        raise DataError(f"{origin}: no qoi columns found")

    raw_rows, qoi_rows, geom_keys = [], [], []
    for lineno, row in enumerate(reader):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(
                f"{origin}: row {lineno} has {len(row)} fields, expected {len(header)}"
            )
        try:
            values = [float(v) for v in row[: domain.d + len(qoi_names)]]
        except ValueError as exc:
            raise DataError(f"{origin}: row {lineno}: {exc}") from exc
        if not all(np.isfinite(values)):
            raise DataError(f"{origin}: row {lineno} contains a non-finite value")
        raw_rows.append(values[: domain.d])
        qoi_rows.append(values[domain.d:])
        geom_keys.append(row[-1].strip() if has_geom else None)
    if not raw_rows:
        raise DataError(f"{origin}: no data rows")

    x = normalize_design(np.asarray(raw_rows), domain)
    qoi_arr = np.asarray(qoi_rows)
    qoi = {name: qoi_arr[:, j] for j, name in enumerate(qoi_names)}
    keys = geom_keys if has_geom else None
    return DesignTable(domain, x, qoi, keys)


def write_design_table(table: DesignTable, path) -> None:
    """Inverse of load_design_table; writes raw (denormalized) values."""
    raw = denormalize_design(table.x, table.domain)
    header = [f"x{i + 1}" for i in range(table.d)] + table.qoi_names
    if table.geometry_keys is not None:
        header.append("geometry_key")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for i in range(table.n):
        row = [repr(float(v)) for v in raw[i]]
        row += [repr(float(table.qoi[name][i])) for name in table.qoi_names]
        if table.geometry_keys is not None:
            row.append(table.geometry_keys[i] or "")
        writer.writerow(row)
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def sample_uniform_doe(domain: DomainSpec, n: int, seed: int) -> DesignTable:
    """n i.i.d. uniform draws on [-1, 1]^d; deterministic per seed."""
    if n < 1:
        raise DataError(f"sample count must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(n, domain.d))
    return DesignTable(domain, x)


ORACLE_KINDS = ("exact-ridge-1d", "exact-ridge-2d", "full-quadratic")


@dataclass(frozen=True)
class SyntheticOracle:
    """Stand-in simulator with known ridge structure.

    exact-ridge-1d: f = (u1.x + 0.2)^2 + noise
    exact-ridge-2d: f = (u1.x)^2 + 0.5 (u2.x)^2 + noise
    full-quadratic: f = 0.5 x'Ax + c'x + d0 + noise (quadratic supplied)
    """

    kind: str
    directions: np.ndarray
    noise_sd: float = 0.0
    seed: int = 0
    quadratic: object = None  # QuadraticModel, for kind="full-quadratic"

    def __post_init__(self):
        if self.kind not in ORACLE_KINDS:
            raise DataError(f"unknown oracle kind {self.kind!r}")
        if self.noise_sd < 0:
            raise DataError("noise_sd must be nonnegative")
        u = np.asarray(self.directions, dtype=float)
        if u.ndim == 1:
            u = u[:, None]
        gram = u.T @ u
        if not np.allclose(gram, np.eye(u.shape[1]), atol=1e-12):
            raise DataError("oracle directions must have orthonormal columns")
        needed = {"exact-ridge-1d": 1, "exact-ridge-2d": 2}.get(self.kind)
        if needed is not None and u.shape[1] < needed:
            raise DataError(f"{self.kind} needs {needed} direction column(s)")
        if self.kind == "full-quadratic" and self.quadratic is None:
            raise DataError("full-quadratic oracle needs a stored quadratic model")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "directions", u)

    def evaluate_clean(self, x: np.ndarray) -> np.ndarray:
        """Noise-free oracle values for an (N, d) design matrix."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.directions.shape[0]:
            raise DataError(
                f"design dimension {x.shape[1]} does not match oracle "
                f"direction dimension {self.directions.shape[0]}"
            )
        y = x @ self.directions
        if self.kind == "exact-ridge-1d":
            return (y[:, 0] + 0.2) ** 2
        if self.kind == "exact-ridge-2d":
            return y[:, 0] ** 2 + 0.5 * y[:, 1] ** 2
        return self.quadratic.evaluate(x)


def evaluate_oracle(oracle: SyntheticOracle, table: DesignTable,
                    qoi_name: str) -> DesignTable:
    """Fill qoi_name for every sample; noise is Gaussian and seeded."""
    f = oracle.evaluate_clean(table.x)
    if oracle.noise_sd > 0:
        rng = np.random.default_rng(oracle.seed)
        f = f + rng.normal(0.0, oracle.noise_sd, size=f.shape)
    return table.with_qoi(qoi_name, f)
