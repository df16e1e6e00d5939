import numpy as np
import pytest
from hypothesis import given, strategies as st

from respclass.core import (Constant, DataError, Dataset, GroundTruth, Observation, PerObservation,
                            Theta, as_theta, q_of, read_dataset, read_ground_truth, read_rows,
                            validate_dataset, write_dataset, write_ground_truth, write_rows)

from conftest import make_dataset


class TestQ:
    @pytest.mark.parametrize("e,t,expected", [(0.5, 1, 0.5), (0.7, 1, 0.7), (0.7, -1, 0.3), (0.5, -1, 0.5)])
    def test_constant(self, e, t, expected):
        assert q_of(Observation(np.zeros(1), t, 1), Constant(e)) == pytest.approx(expected, abs=1e-15)

    def test_per_observation_needs_valid_index(self):
        prop = PerObservation(np.array([0.2, 0.9]))
        assert q_of(Observation(np.zeros(1), -1, 1), prop, 1) == pytest.approx(0.1)
        with pytest.raises(IndexError):
            q_of(Observation(np.zeros(1), 1, 1), prop, 5)

    @given(st.floats(0.001, 0.999))
    def test_arms_sum_to_one(self, e):
        q_plus = q_of(Observation(np.zeros(1), 1, 1), Constant(e))
        q_minus = q_of(Observation(np.zeros(1), -1, 1), Constant(e))
        assert q_plus in (e, 1 - e) and q_plus + q_minus == pytest.approx(1.0, abs=1e-15)

    @given(st.floats(0.001, 0.999), st.sampled_from([-1, 1]), st.sampled_from([-1, 1]))
    def test_ipw_identity_exact(self, e, y_plus, y_minus):
        # E_T[Y T / Q | unit] = y_plus - y_minus
        v = e * (y_plus * 1 / e) + (1 - e) * (y_minus * -1 / (1 - e))
        assert v == pytest.approx(y_plus - y_minus, abs=1e-12)

    def test_dataset_q_vector(self):
        ds = Dataset(np.zeros((3, 1)), [1, -1, 1], [1, 1, -1], PerObservation(np.array([0.8, 0.8, 0.3])))
        np.testing.assert_allclose(ds.q, [0.8, 0.2, 0.3])


class TestValidation:
    def test_bad_treatment(self):
        with pytest.raises(DataError, match="treatment must be ±1"):
            validate_dataset(Dataset(np.zeros((2, 1)), [1, 0], [1, 1]))

    def test_empty(self):
        with pytest.raises(DataError, match="empty dataset"):
            validate_dataset(Dataset(np.zeros((0, 1)), [], []))

    def test_cell_counts(self):
        ds = Dataset(np.zeros((4, 2)), [1, 1, -1, -1], [1, -1, 1, -1])
        rep = validate_dataset(ds)
        assert sum(rep.cells.values()) == 4
        assert all(v == 1 for v in rep.cells.values())

    @pytest.mark.parametrize("bad", [np.nan, np.inf])
    def test_nonfinite_features(self, bad):
        with pytest.raises(DataError):
            validate_dataset(Dataset(np.array([[0.0], [bad]]), [1, 1], [1, 1]))

    @pytest.mark.parametrize("e", [0.0, 1.0, 1.5])
    def test_propensity_range(self, e):
        with pytest.raises((DataError, ValueError)):
            validate_dataset(Dataset(np.zeros((1, 1)), [1], [1], Constant(e)))

    def test_per_observation_length(self):
        with pytest.raises((DataError, ValueError)):
            validate_dataset(Dataset(np.zeros((3, 1)), [1, 1, 1], [1, 1, 1], PerObservation(np.full(2, 0.5))))

    def test_theta_range(self):
        assert as_theta(Theta(0.25)) == 0.25
        with pytest.raises(ValueError):
            Theta(1.5)

    def test_immutable(self, small_ds):
        with pytest.raises(ValueError):
            small_ds.X[0, 0] = 1.0


class TestGroundTruth:
    def test_monotonicity_enforced(self):
        with pytest.raises(DataError):
            GroundTruth(np.zeros((1, 1)), np.array([-1]), np.array([1]), np.array([-1]), np.array([1]))

    def test_responder_consistency(self):
        gt = GroundTruth(np.zeros((2, 1)), np.array([1, 1]), np.array([-1, 1]), np.array([1, -1]),
                         np.array([-1, 1]))
        # responders have y(t) = t for both arms
        r = gt.r == 1
        assert np.all(gt.y_plus[r] == 1) and np.all(gt.y_minus[r] == -1)


class TestCsv:
    def test_roundtrip(self, tmp_path):
        ds = make_dataset(50, 3, seed=4, e="random")
        write_dataset(ds, tmp_path / "d.csv")
        back = read_dataset(tmp_path / "d.csv")
        np.testing.assert_array_equal(back.X, ds.X)
        np.testing.assert_array_equal(back.t, ds.t)
        np.testing.assert_array_equal(back.y, ds.y)
        np.testing.assert_array_equal(back.e, ds.e)

    def test_row_number_in_error(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("x1,t,y\n0.1,1,1\n0.2,0,1\n")
        with pytest.raises(DataError, match="row 3"):
            read_dataset(p)

    def test_binary01_flag(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("x1,t,y\n0.1,1,0\n0.2,0,1\n")
        ds = read_dataset(p, binary01=True)
        assert list(ds.t) == [1, -1] and list(ds.y) == [-1, 1]
        with pytest.raises(DataError):
            read_dataset(p)

    def test_ragged_row(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("x1,x2,t,y\n0.1,0.2,1,1\n0.1,1,1\n")
        with pytest.raises(DataError, match="row 3"):
            read_dataset(p)

    def test_propensity_column_checked(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("x1,t,y,e\n0.1,1,1,1.0\n")
        with pytest.raises(DataError, match="propensity"):
            read_dataset(p)

    def test_constant_propensity_flag(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("x1,t,y\n0.1,1,1\n0.2,-1,1\n")
        np.testing.assert_allclose(read_dataset(p, propensity=0.8).q, [0.8, 0.2])

    def test_ground_truth_roundtrip(self, tmp_path, linear_data):
        _, gt = linear_data
        write_ground_truth(gt, tmp_path / "g.csv")
        back = read_ground_truth(tmp_path / "g.csv")
        np.testing.assert_array_equal(back.X, gt.X)
        np.testing.assert_array_equal(back.r, gt.r)
        np.testing.assert_array_equal(back.y_minus, gt.y_minus)

    def test_rows_full_precision(self, tmp_path):
        write_rows(tmp_path / "r.csv", ["a", "b"], [[0.1 + 0.2, "x"]])
        assert float(read_rows(tmp_path / "r.csv")[0]["a"]) == 0.1 + 0.2
