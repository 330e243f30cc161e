"""STL blade meshes: parsing, serialization, catalogs, and shape diffs.

Vertices are kept in float32 (STL's native precision) so that
parse -> serialize -> parse is bit-identical on both the binary and
ASCII paths.
"""
from __future__ import annotations

import json
import struct
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

BINARY_HEADER = 80
BINARY_RECORD = 50  # 12 f4 floats + u16 attribute


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray       # (V, 3) float32
    facets: np.ndarray         # (F, 3) int indices into vertices
    facet_normals: np.ndarray  # (F, 3) float32
    normals_recomputed: bool = False

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float32)
        fc = np.asarray(self.facets, dtype=np.int64)
        nm = np.asarray(self.facet_normals, dtype=np.float32)
        if fc.shape[0] == 0:
            raise DataError("empty mesh (no facets)")
        if fc.ndim != 2 or fc.shape[1] != 3 or nm.shape != (fc.shape[0], 3):
            raise DataError("inconsistent mesh arrays")
        if np.any(fc < 0) or np.any(fc >= v.shape[0]):
            raise DataError("facet references a vertex index out of range")
        degen = (fc[:, 0] == fc[:, 1]) | (fc[:, 1] == fc[:, 2]) | (fc[:, 0] == fc[:, 2])
        if np.any(degen):
            raise DataError(f"degenerate facet at index {int(np.argmax(degen))}")
        for arr in (v, fc, nm):
            arr.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "facets", fc)
        object.__setattr__(self, "facet_normals", nm)

    @property
    def facet_count(self) -> int:
        return self.facets.shape[0]

    @property
    def vertex_count(self) -> int:
        return self.vertices.shape[0]

    def translated(self, t) -> "TriangleMesh":
        return TriangleMesh(self.vertices + np.asarray(t, dtype=np.float32),
                            self.facets, self.facet_normals,
                            self.normals_recomputed)


def _dedup_vertices(tri_verts: np.ndarray):
    """Collapse bit-identical vertices; preserves first-seen order."""
    flat = np.ascontiguousarray(tri_verts.reshape(-1, 3))
    keys = flat.view([("x", np.float32), ("y", np.float32), ("z", np.float32)])
    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    order = np.argsort(first)           # first-seen order, not sort order
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    vertices = flat[np.sort(first)]
    facets = rank[inverse].reshape(-1, 3)
    return vertices, facets


def _facet_normal(p0, p1, p2) -> np.ndarray:
    n = np.cross(np.asarray(p1, dtype=np.float64) - p0,
                 np.asarray(p2, dtype=np.float64) - p0)
    norm = np.linalg.norm(n)
    if norm == 0:
        return np.zeros(3, dtype=np.float32)
    return (n / norm).astype(np.float32)


def _assemble(tri_verts: np.ndarray, normals: np.ndarray) -> TriangleMesh:
    vertices, facets = _dedup_vertices(tri_verts)
    recomputed = False
    normals = np.array(normals, dtype=np.float32)
    zero = np.all(normals == 0, axis=1)
    if np.any(zero):
        recomputed = True
        for i in np.flatnonzero(zero):
            normals[i] = _facet_normal(*tri_verts[i])
    return TriangleMesh(vertices, facets, normals, normals_recomputed=recomputed)


def parse_stl(data: bytes) -> TriangleMesh:
    """Parse ASCII or binary STL bytes."""
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise DataError("parse_stl expects a byte sequence")
    data = bytes(data)
    if data[:5] == b"solid" and _looks_ascii(data):
        return _parse_ascii(data)
    return _parse_binary(data)


def _looks_ascii(data: bytes) -> bool:
    # some binary files start with "solid"; require a facet keyword in text
    head = data[:1024]
    try:
        head.decode("ascii")
    except UnicodeDecodeError:
        return False
    return b"facet" in data or b"endsolid" in data


def _parse_ascii(data: bytes) -> TriangleMesh:
    tokens = data.decode("ascii", errors="strict").split()
    pos = 0

    def expect(*words):
        nonlocal pos
        for w in words:
            if pos >= len(tokens) or tokens[pos] != w:
                got = tokens[pos] if pos < len(tokens) else "<eof>"
                raise DataError(f"malformed ASCII STL: expected {w!r}, got {got!r}")
            pos += 1

    def read3() -> list[float]:
        nonlocal pos
        if pos + 3 > len(tokens):
            raise DataError("malformed ASCII STL: truncated vertex/normal")
        try:
            vals = [np.float32(tokens[pos + k]) for k in range(3)]
        except ValueError as exc:
            raise DataError(f"malformed ASCII STL: {exc}") from exc
        pos += 3
        return vals

    expect("solid")
    # optional solid name: consume tokens until "facet" or "endsolid"
    while pos < len(tokens) and tokens[pos] not in ("facet", "endsolid"):
        pos += 1

    tri_verts, normals = [], []
    while pos < len(tokens) and tokens[pos] == "facet":
        pos += 1
        expect("normal")
        normals.append(read3())
        expect("outer", "loop")
        tri = []
        for _ in range(3):
            expect("vertex")
            tri.append(read3())
        expect("endloop", "endfacet")
        tri_verts.append(tri)
    if pos >= len(tokens) or tokens[pos] != "endsolid":
        raise DataError("malformed ASCII STL: missing endsolid")
    if not tri_verts:
        raise DataError("empty mesh (no facets)")
    return _assemble(np.asarray(tri_verts, dtype=np.float32),
                     np.asarray(normals, dtype=np.float32))


def _parse_binary(data: bytes) -> TriangleMesh:
    if len(data) < BINARY_HEADER + 4:
        raise DataError("binary STL shorter than header + triangle count")
    (count,) = struct.unpack_from("<I", data, BINARY_HEADER)
    body = len(data) - BINARY_HEADER - 4
    if body < count * BINARY_RECORD:
        raise DataError(
            f"truncated binary STL: declares {count} triangles but body holds "
            f"{body // BINARY_RECORD}"
        )
    if count == 0:
        raise DataError("empty mesh (no facets)")
    records = np.frombuffer(data, dtype=np.dtype([("n", "<f4", 3),
                                                  ("v", "<f4", (3, 3)),
                                                  ("attr", "<u2")]),
                            count=count, offset=BINARY_HEADER + 4)
    return _assemble(records["v"].astype(np.float32),
                     records["n"].astype(np.float32))


def serialize_stl(mesh: TriangleMesh, format: str = "binary") -> bytes:
    """Canonical STL bytes; 'binary' (little-endian f4) or 'ascii' (9 sig digits)."""
    if format == "binary":
        out = bytearray(b"\0" * BINARY_HEADER)
        out += struct.pack("<I", mesh.facet_count)
        tri = mesh.vertices[mesh.facets]  # (F, 3, 3)
        rec = np.zeros(mesh.facet_count,
                       dtype=np.dtype([("n", "<f4", 3), ("v", "<f4", (3, 3)),
                                       ("attr", "<u2")]))
        rec["n"] = mesh.facet_normals
        rec["v"] = tri
        out += rec.tobytes()
        return bytes(out)
    if format == "ascii":
        lines = ["solid mesh"]
        tri = mesh.vertices[mesh.facets]
        for i in range(mesh.facet_count):
            n = mesh.facet_normals[i]
            lines.append(f"  facet normal {n[0]:.9g} {n[1]:.9g} {n[2]:.9g}")
            lines.append("    outer loop")
            for v in tri[i]:
                lines.append(f"      vertex {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
            lines.append("    endloop")
            lines.append("  endfacet")
        lines.append("endsolid mesh")
        return ("\n".join(lines) + "\n").encode("ascii")
    raise DataError(f"unknown STL format {format!r}; use 'binary' or 'ascii'")


@dataclass(frozen=True)
class GeometryDiff:
    mode: str  # "vertexwise" | "sampled"
    max_displacement: float
    mean_displacement: float
    per_vertex: np.ndarray | None = None

    def to_dict(self) -> dict:
        out = {"mode": self.mode,
               "max_displacement": self.max_displacement,
               "mean_displacement": self.mean_displacement}
        if self.per_vertex is not None:
            out["per_vertex"] = [float(v) for v in self.per_vertex]
        return out


def diff_meshes(nominal: TriangleMesh, other: TriangleMesh) -> GeometryDiff:
    """Displacement of `other` relative to `nominal`.

    Equal vertex counts: index-aligned per-vertex distances. Otherwise each
    vertex of `other` is measured to its nearest point on any nominal facet.
    """
    if nominal.vertex_count == other.vertex_count:
        disp = np.linalg.norm(
            other.vertices.astype(np.float64) - nominal.vertices.astype(np.float64),
            axis=1)
        mode = "vertexwise"
    else:
        tri = nominal.vertices[nominal.facets].astype(np.float64)
        disp = np.array([
            _nearest_facet_distance(p, tri)
            for p in other.vertices.astype(np.float64)
        ])
        mode = "sampled"
    return GeometryDiff(mode=mode,
                        max_displacement=float(disp.max()),
                        mean_displacement=float(disp.mean()),
                        per_vertex=disp)


def _nearest_facet_distance(p: np.ndarray, tri: np.ndarray) -> float:
    return float(np.sqrt(np.min(_point_triangle_sqdist(p, tri))))


def _point_triangle_sqdist(p: np.ndarray, tri: np.ndarray) -> np.ndarray:
    """Squared distance from point p to each triangle in tri (F, 3, 3).

    Ericson's closed-form region test, vectorized over facets.
    """
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    ab, ac, ap = b - a, c - a, p - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = p - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = p - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)

    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    closest = np.empty_like(tri[:, 0])
    # region A
    mask = (d1 <= 0) & (d2 <= 0)
    closest[mask] = a[mask]
    done = mask.copy()
    # region B
    mask = ~done & (d3 >= 0) & (d4 <= d3)
    closest[mask] = b[mask]
    done |= mask
    # edge AB
    mask = ~done & (vc <= 0) & (d1 >= 0) & (d3 <= 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(d1 - d3 != 0, d1 / (d1 - d3), 0.0)
    closest[mask] = a[mask] + t[mask, None] * ab[mask]
    done |= mask
    # region C
    mask = ~done & (d6 >= 0) & (d5 <= d6)
    closest[mask] = c[mask]
    done |= mask
    # edge AC
    mask = ~done & (vb <= 0) & (d2 >= 0) & (d6 <= 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(d2 - d6 != 0, d2 / (d2 - d6), 0.0)
    closest[mask] = a[mask] + t[mask, None] * ac[mask]
    done |= mask
    # edge BC
    mask = ~done & (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)
    denom = (d4 - d3) + (d5 - d6)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(denom != 0, (d4 - d3) / denom, 0.0)
    closest[mask] = b[mask] + t[mask, None] * (c[mask] - b[mask])
    done |= mask
    # interior
    mask = ~done
    denom = va + vb + vc
    with np.errstate(invalid="ignore", divide="ignore"):
        v = np.where(denom != 0, vb / denom, 0.0)
        w = np.where(denom != 0, vc / denom, 0.0)
    closest[mask] = a[mask] + v[mask, None] * ab[mask] + w[mask, None] * ac[mask]

    diff = p - closest
    return np.einsum("ij,ij->i", diff, diff)


def mesh_stats(mesh: TriangleMesh):
    """Axis-aligned bounding box plus facet and vertex counts."""
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    return (tuple(float(v) for v in lo), tuple(float(v) for v in hi)), \
        mesh.facet_count, mesh.vertex_count


class GeometryCatalog:
    """Design-index -> mesh mapping with a nominal reference mesh.

    Meshes load lazily from disk; each index is loaded at most once even
    under concurrent lookups.
    """

    def __init__(self, nominal: TriangleMesh, paths: dict[int, Path],
                 context_mesh: TriangleMesh | None = None,
                 key_names: dict[int, str] | None = None):
        self.nominal = nominal
        self._paths = dict(paths)
        self.context_mesh = context_mesh
        self._key_names = key_names or {
            i: Path(p).name for i, p in self._paths.items()
        }
        self._cache: dict[int, TriangleMesh] = {}
        self._lock = threading.Lock()
        self._index_locks: dict[int, threading.Lock] = {}

    @staticmethod
    def load(manifest_path) -> "GeometryCatalog":
        """Load from a geometry.json manifest (paths relative to it)."""
        manifest_path = Path(manifest_path)
        try:
            obj = json.loads(manifest_path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read geometry manifest {manifest_path}: {exc}")
        root = manifest_path.parent
        nominal = parse_stl((root / obj["nominal"]).read_bytes())
        paths = {int(i): root / p for i, p in obj.get("designs", {}).items()}
        context = None
        if obj.get("context"):
            context = parse_stl((root / obj["context"]).read_bytes())
        keys = {i: Path(p).name for i, p in paths.items()}
        return GeometryCatalog(nominal, paths, context, keys)

    @property
    def indices(self) -> list[int]:
        return sorted(self._paths)

    def key(self, index: int) -> str:
        if index not in self._key_names:
            raise DataError(f"no geometry for design index {index}")
        return self._key_names[index]

    def mesh(self, index: int) -> TriangleMesh:
        if index in self._cache:
            return self._cache[index]
        if index not in self._paths:
            raise DataError(f"no geometry for design index {index}")
        with self._lock:
            lock = self._index_locks.setdefault(index, threading.Lock())
        with lock:
            if index not in self._cache:
                self._cache[index] = parse_stl(Path(self._paths[index]).read_bytes())
        return self._cache[index]

    def diff(self, index: int) -> GeometryDiff:
        return diff_meshes(self.nominal, self.mesh(index))
