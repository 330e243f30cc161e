"""Shippable demo dataset: synthetic qois with known ridge structure plus
procedurally perturbed blade meshes.

The real experiment behind this tool used proprietary CFD results and
blade CAD; the demo reproduces the same shapes (a 1D ridge for the
pressure-ratio-style qoi, a 2D ridge for the efficiency-style qoi, one
STL per design) from synthetic functions so everything runs offline.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .dataset import (DesignTable, DomainSpec, SyntheticOracle,
                      evaluate_oracle, sample_uniform_doe, write_design_table)
from .geometry import TriangleMesh, _facet_normal, serialize_stl

PRESSURE_QOI = "pressure_ratio"
EFFICIENCY_QOI = "efficiency"


def random_orthonormal(d: int, k: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((d, k)))
    return q * np.sign(np.diag(r))


def demo_table(d: int = 6, n: int = 60, seed: int = 7,
               noise_sd: float = 0.0) -> tuple[DesignTable, np.ndarray, np.ndarray]:
    """Design table with both demo qois; returns (table, u_1d, u_2d)."""
    directions = random_orthonormal(d, 3, seed)
    u1 = directions[:, :1]
    u2 = directions[:, 1:3]
    table = sample_uniform_doe(DomainSpec.unit(d), n, seed=seed + 1)
    table = evaluate_oracle(
        SyntheticOracle("exact-ridge-1d", u1, noise_sd, seed + 2),
        table, PRESSURE_QOI)
    table = evaluate_oracle(
        SyntheticOracle("exact-ridge-2d", u2, noise_sd, seed + 3),
        table, EFFICIENCY_QOI)
    return table, u1, u2


def _blade_sections(n_span: int, n_profile: int):
    """Closed airfoil-ish profile swept along the span with twist and taper."""
    theta = np.linspace(0.0, 2 * np.pi, n_profile, endpoint=False)
    span = np.linspace(0.0, 1.0, n_span)
    sections = np.empty((n_span, n_profile, 3))
    for i, s in enumerate(span):
        chord = 1.0 - 0.35 * s
        thickness = 0.12 * (1.0 - 0.5 * s)
        twist = np.deg2rad(25.0 * s)
        xc = 0.5 * chord * np.cos(theta)
        yc = thickness * np.sin(theta) * (1.2 - 0.4 * np.cos(theta))
        cos_t, sin_t = np.cos(twist), np.sin(twist)
        sections[i, :, 0] = cos_t * xc - sin_t * yc
        sections[i, :, 1] = sin_t * xc + cos_t * yc
        sections[i, :, 2] = 2.0 * s
    return sections


def nominal_blade(n_span: int = 12, n_profile: int = 16) -> TriangleMesh:
    sections = _blade_sections(n_span, n_profile)
    return _mesh_from_sections(sections)


def _mesh_from_sections(sections: np.ndarray) -> TriangleMesh:
    n_span, n_profile, _ = sections.shape
    vertices = sections.reshape(-1, 3).astype(np.float32)
    facets = []
    for i in range(n_span - 1):
        for j in range(n_profile):
            a = i * n_profile + j
            b = i * n_profile + (j + 1) % n_profile
            c = (i + 1) * n_profile + j
            d = (i + 1) * n_profile + (j + 1) % n_profile
            facets.append((a, b, c))
            facets.append((b, d, c))
    # end caps as fans
    for base, flip in ((0, True), ((n_span - 1) * n_profile, False)):
        for j in range(1, n_profile - 1):
            tri = (base, base + j, base + j + 1)
            facets.append(tri[::-1] if flip else tri)
    facets = np.asarray(facets, dtype=np.int64)
    normals = np.array([
        _facet_normal(vertices[f[0]], vertices[f[1]], vertices[f[2]])
        for f in facets], dtype=np.float32)
    return TriangleMesh(vertices, facets, normals)


def perturbed_blade(nominal: TriangleMesh, x: np.ndarray,
                    amplitude: float = 0.05) -> TriangleMesh:
    """Displace the nominal blade smoothly along the span per design vector.

    Purely cosmetic: gives every design a visually distinct mesh with the
    same topology as the nominal (so diffs take the vertexwise fast path).
    """
    x = np.asarray(x, dtype=float)
    v = nominal.vertices.astype(np.float64)
    span = (v[:, 2] - v[:, 2].min()) / max(np.ptp(v[:, 2]), 1e-9)
    disp = np.zeros_like(v)
    for k, xi in enumerate(x[: min(len(x), 5)]):
        phase = np.pi * (k + 1) * span
        disp[:, 0] += xi * amplitude * np.sin(phase)
        disp[:, 1] += xi * amplitude * 0.5 * np.cos(phase)
    return TriangleMesh((v + disp).astype(np.float32), nominal.facets,
                        nominal.facet_normals)


def context_placeholder() -> TriangleMesh:
    """Stand-in for the engine context: a coarse annular ring of triangles."""
    n = 24
    theta = np.linspace(0, 2 * np.pi, n, endpoint=False)
    inner = np.stack([2.5 * np.cos(theta), 2.5 * np.sin(theta),
                      np.full(n, -0.5)], axis=1)
    outer = np.stack([3.5 * np.cos(theta), 3.5 * np.sin(theta),
                      np.full(n, -0.5)], axis=1)
    vertices = np.vstack([inner, outer]).astype(np.float32)
    facets = []
    for j in range(n):
        a, b = j, (j + 1) % n
        facets.append((a, b, n + j))
        facets.append((b, n + (j + 1) % n, n + j))
    facets = np.asarray(facets, dtype=np.int64)
    normals = np.array([
        _facet_normal(vertices[f[0]], vertices[f[1]], vertices[f[2]])
        for f in facets], dtype=np.float32)
    return TriangleMesh(vertices, facets, normals)


def generate_demo_dataset(root, d: int = 6, n: int = 60, seed: int = 7,
                          noise_sd: float = 0.0,
                          with_geometry: bool = True) -> Path:
    """Write a complete dataset directory (domain.json, designs.csv,
    geometry.json + STL files) under `root`."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    table, _, _ = demo_table(d=d, n=n, seed=seed, noise_sd=noise_sd)
    keys = [f"design_{i:04d}.stl" for i in range(table.n)]
    table = DesignTable(table.domain, table.x, table.qoi, keys)

    (root / "domain.json").write_text(table.domain.to_json())
    write_design_table(table, root / "designs.csv")

    if with_geometry:
        mesh_dir = root / "meshes"
        mesh_dir.mkdir(exist_ok=True)
        nominal = nominal_blade()
        (mesh_dir / "nominal.stl").write_bytes(serialize_stl(nominal, "binary"))
        designs = {}
        for i in range(table.n):
            mesh = perturbed_blade(nominal, table.x[i])
            name = keys[i]
            (mesh_dir / name).write_bytes(serialize_stl(mesh, "binary"))
            designs[str(i)] = f"meshes/{name}"
        (mesh_dir / "context.stl").write_bytes(
            serialize_stl(context_placeholder(), "binary"))
        manifest = {
            "nominal": "meshes/nominal.stl",
            "designs": designs,
            "context": "meshes/context.stl",
        }
        import json
        (root / "geometry.json").write_text(json.dumps(manifest, indent=1))
    return root
