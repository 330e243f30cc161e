import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aerovr.dataset import (DesignTable, DomainSpec, SyntheticOracle,
                            denormalize_design, evaluate_oracle,
                            load_design_table, normalize_design,
                            sample_uniform_doe)
from aerovr.errors import DataError


def write_csv(path, text):
    path.write_text(text)
    return path


class TestDomainSpec:
    def test_rejects_bad_bounds(self):
        with pytest.raises(DataError):
            DomainSpec(d=1, bounds=((1.0, 1.0),))
        with pytest.raises(DataError):
            DomainSpec(d=2, bounds=((0.0, 1.0),))
        with pytest.raises(DataError):
            DomainSpec(d=0, bounds=())

    def test_rejects_other_densities(self):
        with pytest.raises(DataError):
            DomainSpec(d=1, bounds=((0.0, 1.0),), density="gaussian")

    def test_json_roundtrip(self, tmp_path):
        dom = DomainSpec(d=2, bounds=((0.0, 10.0), (-2.0, 2.0)))
        p = tmp_path / "domain.json"
        p.write_text(dom.to_json())
        assert DomainSpec.from_json(p) == dom


class TestNormalize:
    dom = DomainSpec(d=1, bounds=((0.0, 10.0),))

    def test_midpoint(self):
        assert normalize_design([5.0], self.dom) == pytest.approx([0.0])

    def test_lower_bound(self):
        assert normalize_design([0.0], self.dom) == pytest.approx([-1.0])

    def test_affine(self):
        dom = DomainSpec(d=1, bounds=((-2.0, 2.0),))
        assert normalize_design([1.0], dom) == pytest.approx([0.5])

    def test_out_of_bounds_reports_index_and_value(self):
        dom = DomainSpec(d=2, bounds=((0.0, 1.0), (0.0, 1.0)))
        with pytest.raises(DataError, match="component 1 value 3.0"):
            normalize_design([0.5, 3.0], dom)

    @given(st.lists(st.floats(0.0, 10.0), min_size=1, max_size=1))
    def test_roundtrip(self, raw):
        x = normalize_design(raw, self.dom)
        back = denormalize_design(x, self.dom)
        assert np.all(np.abs(back - np.asarray(raw)) <= 1e-12 * 10.0)


class TestUniformDoe:
    def test_determinism(self):
        dom = DomainSpec.unit(3)
        a = sample_uniform_doe(dom, 10, seed=7)
        b = sample_uniform_doe(dom, 10, seed=7)
        assert np.array_equal(a.x, b.x)

    def test_moments(self):
        # mean 0, variance 1/3 for uniform(-1, 1)
        t = sample_uniform_doe(DomainSpec.unit(1), 100000, seed=1)
        assert abs(t.x.mean()) < 0.02
        assert abs(t.x.var() - 1.0 / 3.0) < 0.02

    def test_large_campaign_shape(self):
        t = sample_uniform_doe(DomainSpec.unit(25), 548, seed=42)
        assert (t.n, t.d) == (548, 25)

    def test_range_invariant(self):
        t = sample_uniform_doe(DomainSpec.unit(4), 1000, seed=9)
        assert np.all(np.abs(t.x) <= 1.0)

    def test_zero_rejected(self):
        with pytest.raises(DataError):
            sample_uniform_doe(DomainSpec.unit(2), 0, seed=0)


class TestOracles:
    def test_ridge_1d_value(self):
        u1 = np.eye(3)[:, :1]
        oracle = SyntheticOracle("exact-ridge-1d", u1)
        t = DesignTable(DomainSpec.unit(3), np.array([[0.8, -0.3, 0.1]]))
        t = evaluate_oracle(oracle, t, "f")
        assert t.qoi["f"][0] == pytest.approx(1.0)  # (0.8 + 0.2)^2

    def test_ridge_2d_value(self):
        u = np.eye(3)[:, :2]
        oracle = SyntheticOracle("exact-ridge-2d", u)
        t = DesignTable(DomainSpec.unit(3), np.array([[1.0, 1.0, 0.0]]))
        t = evaluate_oracle(oracle, t, "f")
        assert t.qoi["f"][0] == pytest.approx(1.5)  # 1 + 0.5

    def test_noise_deterministic(self):
        u1 = np.eye(4)[:, :1]
        oracle = SyntheticOracle("exact-ridge-1d", u1, noise_sd=0.1, seed=5)
        t = sample_uniform_doe(DomainSpec.unit(4), 50, seed=2)
        a = evaluate_oracle(oracle, t, "f").qoi["f"]
        b = evaluate_oracle(oracle, t, "f").qoi["f"]
        assert np.array_equal(a, b)

    def test_zero_noise_pure_function(self):
        u1 = np.eye(4)[:, :1]
        oracle = SyntheticOracle("exact-ridge-1d", u1)
        x = np.array([[0.3, -0.2, 0.9, 0.0]])
        t1 = DesignTable(DomainSpec.unit(4), x)
        t2 = DesignTable(DomainSpec.unit(4), np.vstack([x, -x]))
        f1 = evaluate_oracle(oracle, t1, "f").qoi["f"][0]
        f2 = evaluate_oracle(oracle, t2, "f").qoi["f"][0]
        assert f1 == f2

    @pytest.mark.parametrize("kind,k", [("exact-ridge-1d", 1),
                                        ("exact-ridge-2d", 2)])
    def test_ridge_property(self, kind, k):
        # f(x + h) = f(x) whenever h is orthogonal to the ridge span
        rng = np.random.default_rng(0)
        d = 6
        q, _ = np.linalg.qr(rng.standard_normal((d, k)))
        oracle = SyntheticOracle(kind, q)
        x = rng.uniform(-0.5, 0.5, size=(20, d))
        h = rng.uniform(-0.3, 0.3, size=(20, d))
        h -= (h @ q) @ q.T  # project out the ridge span
        f0 = oracle.evaluate_clean(x)
        f1 = oracle.evaluate_clean(x + h)
        assert np.max(np.abs(f1 - f0)) <= 1e-10

    def test_dimension_mismatch(self):
        oracle = SyntheticOracle("exact-ridge-1d", np.eye(3)[:, :1])
        t = sample_uniform_doe(DomainSpec.unit(4), 5, seed=1)
        with pytest.raises(DataError):
            evaluate_oracle(oracle, t, "f")

    def test_non_orthonormal_rejected(self):
        with pytest.raises(DataError):
            SyntheticOracle("exact-ridge-1d", np.array([[1.0], [1.0]]))


class TestLoadDesignTable:
    def test_small_csv(self, tmp_path):
        dom = DomainSpec(d=2, bounds=((0.0, 10.0), (0.0, 10.0)))
        p = write_csv(tmp_path / "t.csv",
                      "x1,x2,efficiency\n1,2,0.9\n3,4,0.8\n5,6,0.7\n")
        t = load_design_table(p, dom)
        assert t.n == 3
        assert t.qoi_names == ["efficiency"]
        assert t.x[0] == pytest.approx([-0.8, -0.6])

    def test_nan_rejected_with_row(self, tmp_path):
        dom = DomainSpec(d=1, bounds=((0.0, 1.0),))
        p = write_csv(tmp_path / "t.csv", "x1,f\n0.5,NaN\n")
        with pytest.raises(DataError, match="row 0"):
            load_design_table(p, dom)

    def test_large_campaign_roundtrip(self, tmp_path):
        dom = DomainSpec.unit(25)
        t = sample_uniform_doe(dom, 548, seed=42)
        rows = ["x%d" % (i + 1) for i in range(25)] + ["f"]
        lines = [",".join(rows)]
        for i in range(548):
            lines.append(",".join(repr(float(v)) for v in t.x[i]) + ",1.0")
        p = write_csv(tmp_path / "big.csv", "\n".join(lines) + "\n")
        loaded = load_design_table(p, dom)
        assert loaded.n == 548 and loaded.d == 25

    def test_duplicate_header(self, tmp_path):
        dom = DomainSpec.unit(1)
        p = write_csv(tmp_path / "t.csv", "x1,f,f\n0,1,2\n")
        with pytest.raises(DataError, match="duplicate header"):
            load_design_table(p, dom)

    def test_row_length_mismatch(self, tmp_path):
        dom = DomainSpec.unit(2)
        p = write_csv(tmp_path / "t.csv", "x1,x2,f\n0,1\n")
        with pytest.raises(DataError, match="row 0"):
            load_design_table(p, dom)

    def test_out_of_bounds_rejected(self, tmp_path):
        dom = DomainSpec(d=1, bounds=((0.0, 1.0),))
        p = write_csv(tmp_path / "t.csv", "x1,f\n2.5,1.0\n")
        with pytest.raises(DataError):
            load_design_table(p, dom)

    def test_geometry_key_column(self, tmp_path):
        dom = DomainSpec.unit(1)
        p = write_csv(tmp_path / "t.csv",
                      "x1,f,geometry_key\n0.0,1.0,blade_a.stl\n")
        t = load_design_table(p, dom)
        assert t.geometry_key(0) == "blade_a.stl"

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_design_table(tmp_path / "nope.csv", DomainSpec.unit(1))
