import struct

import numpy as np
import pytest
from scipy.optimize import minimize

from aerovr.demo import nominal_blade, perturbed_blade
from aerovr.errors import DataError
from aerovr.geometry import (GeometryCatalog, TriangleMesh, diff_meshes,
                             mesh_stats, parse_stl, serialize_stl)

UNIT_TRIANGLE_ASCII = b"""solid test
  facet normal 0 0 1
    outer loop
      vertex 0 0 0
      vertex 1 0 0
      vertex 0 1 0
    endloop
  endfacet
endsolid test
"""


def unit_triangle() -> TriangleMesh:
    return parse_stl(UNIT_TRIANGLE_ASCII)


def binary_stl(triangles, declared=None) -> bytes:
    """Hand-rolled binary STL writer, independent of serialize_stl."""
    out = bytearray(b"\0" * 80)
    out += struct.pack("<I", declared if declared is not None else len(triangles))
    for normal, verts in triangles:
        out += struct.pack("<3f", *normal)
        for v in verts:
            out += struct.pack("<3f", *v)
        out += struct.pack("<H", 0)
    return bytes(out)


class TestParse:
    def test_ascii_single_facet(self):
        mesh = unit_triangle()
        assert mesh.vertex_count == 3
        assert mesh.facet_count == 1
        assert mesh.facet_normals[0] == pytest.approx([0.0, 0.0, 1.0])

    def test_binary_truncated(self):
        data = binary_stl([((0, 0, 1), [(0, 0, 0), (1, 0, 0), (0, 1, 0)])],
                          declared=2)
        with pytest.raises(DataError, match="truncated"):
            parse_stl(data)

    def test_binary_parse(self):
        data = binary_stl([((0, 0, 1), [(0, 0, 0), (1, 0, 0), (0, 1, 0)]),
                           ((0, 0, 1), [(1, 0, 0), (1, 1, 0), (0, 1, 0)])])
        mesh = parse_stl(data)
        assert mesh.facet_count == 2
        assert mesh.vertex_count == 4  # shared vertices deduplicated

    def test_zero_normal_recomputed(self):
        data = binary_stl([((0, 0, 0), [(0, 0, 0), (1, 0, 0), (0, 1, 0)])])
        mesh = parse_stl(data)
        assert mesh.normals_recomputed
        assert mesh.facet_normals[0] == pytest.approx([0.0, 0.0, 1.0])

    def test_malformed_ascii(self):
        with pytest.raises(DataError, match="ASCII"):
            parse_stl(b"solid x\n  facet normal 0 0 nope\nendsolid x\n")

    def test_empty_rejected(self):
        with pytest.raises(DataError, match="empty"):
            parse_stl(b"solid x\nendsolid x\n")
        with pytest.raises(DataError, match="empty"):
            parse_stl(binary_stl([]))


class TestSerialize:
    def test_binary_record_size(self):
        data = serialize_stl(unit_triangle(), "binary")
        assert len(data) == 80 + 4 + 50

    def test_unknown_format(self):
        with pytest.raises(DataError):
            serialize_stl(unit_triangle(), "obj")

    @pytest.mark.parametrize("fmt", ["binary", "ascii"])
    def test_round_trip_identity(self, fmt):
        base = parse_stl(serialize_stl(nominal_blade(), "binary"))
        m1 = parse_stl(serialize_stl(base, fmt))
        m2 = parse_stl(serialize_stl(m1, fmt))
        assert np.array_equal(m1.vertices, m2.vertices)
        assert np.array_equal(m1.facets, m2.facets)

    def test_round_trip_single_facet(self):
        m1 = unit_triangle()
        m2 = parse_stl(serialize_stl(m1, "binary"))
        assert np.array_equal(m1.vertices, m2.vertices)
        assert np.array_equal(m1.facets, m2.facets)


def point_triangle_oracle(p, a, b, c):
    """Constrained minimization over barycentric coordinates."""
    a, b, c, p = map(np.asarray, (a, b, c, p))

    def sqdist(uv):
        u, v = uv
        q = a + u * (b - a) + v * (c - a)
        return float(np.dot(p - q, p - q))

    best = np.inf
    for start in ((0.3, 0.3), (0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.5, 0.5)):
        res = minimize(sqdist, start, method="SLSQP",
                       bounds=[(0, 1), (0, 1)],
                       constraints=[{"type": "ineq",
                                     "fun": lambda uv: 1.0 - uv[0] - uv[1]}],
                       options={"ftol": 1e-16, "maxiter": 200})
        best = min(best, res.fun)
    return np.sqrt(best)


class TestDiff:
    def test_identity_is_zero(self):
        mesh = nominal_blade()
        diff = diff_meshes(mesh, mesh)
        assert diff.mode == "vertexwise"
        assert diff.max_displacement == 0.0
        assert diff.mean_displacement == 0.0

    def test_translation_displacement(self):
        # quarter-unit coordinates stay exact in float32
        tri = TriangleMesh(
            vertices=np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=np.float32),
            facets=np.array([[0, 1, 2]]),
            facet_normals=np.array([[0, 0, 1]], dtype=np.float32))
        diff = diff_meshes(tri, tri.translated((1.0, 0.0, 0.0)))
        assert diff.mode == "vertexwise"
        assert diff.max_displacement == 1.0
        assert diff.mean_displacement == 1.0

    def test_mean_le_max(self):
        nominal = nominal_blade()
        other = perturbed_blade(nominal, np.array([0.4, -0.2, 0.9, 0.1, 0.0]))
        diff = diff_meshes(nominal, other)
        assert 0.0 < diff.mean_displacement <= diff.max_displacement

    def test_sampled_matches_brute_force_oracle(self):
        nominal = unit_triangle()
        rng = np.random.default_rng(17)
        points = rng.uniform(-1.5, 1.5, size=(6, 3)).astype(np.float32)
        other = TriangleMesh(
            vertices=points,
            facets=np.array([[0, 1, 2], [3, 4, 5]]),
            facet_normals=np.zeros((2, 3), dtype=np.float32) + np.float32(1.0))
        diff = diff_meshes(nominal, other)
        assert diff.mode == "sampled"
        a, b, c = nominal.vertices
        expected = np.array([point_triangle_oracle(p, a, b, c)
                             for p in points.astype(np.float64)])
        assert diff.per_vertex == pytest.approx(expected, abs=1e-9)


class TestStats:
    def test_unit_triangle(self):
        (lo, hi), nf, nv = mesh_stats(unit_triangle())
        assert lo == (0.0, 0.0, 0.0)
        assert hi == (1.0, 1.0, 0.0)
        assert (nf, nv) == (1, 3)

    def test_translated_bbox(self):
        mesh = unit_triangle()
        (lo, hi), _, _ = mesh_stats(mesh.translated((2.0, 0.0, 0.0)))
        assert lo == (2.0, 0.0, 0.0)
        assert hi == (3.0, 1.0, 0.0)


class TestCatalog:
    def test_manifest_load_and_lookup(self, demo_root):
        catalog = GeometryCatalog.load(demo_root / "demo" / "geometry.json")
        assert catalog.nominal.facet_count > 0
        assert len(catalog.indices) == 40
        mesh = catalog.mesh(3)
        assert mesh.vertex_count == catalog.nominal.vertex_count
        assert catalog.key(3) == "design_0003.stl"
        assert catalog.context_mesh is not None

    def test_every_index_resolves(self, demo_root):
        # one mesh per design index, per the 1:1:1 contract
        catalog = GeometryCatalog.load(demo_root / "demo" / "geometry.json")
        assert catalog.indices == list(range(40))

    def test_lazy_single_load(self, demo_root, monkeypatch):
        catalog = GeometryCatalog.load(demo_root / "demo" / "geometry.json")
        calls = []
        import aerovr.geometry as geo
        original = geo.parse_stl

        def counting(data):
            calls.append(1)
            return original(data)

        monkeypatch.setattr(geo, "parse_stl", counting)
        catalog.mesh(5)
        catalog.mesh(5)
        assert len(calls) == 1

    def test_unknown_index(self, demo_root):
        catalog = GeometryCatalog.load(demo_root / "demo" / "geometry.json")
        with pytest.raises(DataError):
            catalog.mesh(999)

    def test_diff_against_nominal(self, demo_root):
        catalog = GeometryCatalog.load(demo_root / "demo" / "geometry.json")
        diff = catalog.diff(0)
        assert diff.mode == "vertexwise"
        assert diff.max_displacement >= diff.mean_displacement >= 0.0
