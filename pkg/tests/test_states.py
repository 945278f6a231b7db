import numpy as np
import pytest

from fcqem.errors import MissingMeasurementError
from fcqem.states import DensityMatrix, MeasurementSet, ProbDist, StateVector


class TestStateVector:
    def test_norm_enforced(self):
        with pytest.raises(ValueError):
            StateVector(1, np.array([1.0, 1.0]))

    def test_zero_state(self):
        sv = StateVector.zero_state(2)
        assert sv.amplitudes[0] == 1.0

    def test_density_matrix_conversion(self):
        sv = StateVector(1, np.array([1, 1j]) / np.sqrt(2))
        dm = sv.density_matrix()
        assert abs(np.trace(dm.matrix) - 1) < 1e-12


class TestDensityMatrix:
    def test_trace_enforced(self):
        with pytest.raises(ValueError):
            DensityMatrix(1, np.eye(2, dtype=complex))

    def test_hermiticity_enforced(self):
        m = np.array([[0.5, 0.4], [0.1, 0.5]], dtype=complex)
        with pytest.raises(ValueError):
            DensityMatrix(1, m)

    def test_purity(self):
        dm = DensityMatrix(1, np.eye(2, dtype=complex) / 2)
        assert dm.purity() == pytest.approx(0.5)


class TestProbDist:
    def test_negative_probability_rejected(self):
        with pytest.raises(ValueError):
            ProbDist.exact_dense(1, "Z", np.array([1.2, -0.2]))

    def test_exact_must_sum_to_one(self):
        with pytest.raises(ValueError):
            ProbDist.exact_dense(1, "Z", np.array([0.5, 0.4]))

    def test_counts_must_match_shots(self):
        with pytest.raises(ValueError):
            ProbDist.from_counts(1, "Z", {"0": 3}, 4)

    def test_counts_round_trip_exact_integers(self):
        d = ProbDist.from_counts(2, "ZZ", {"01": 33333, "10": 66667}, 100000)
        assert d.counts() == {"01": 33333, "10": 66667}

    def test_bad_outcome_key(self):
        with pytest.raises(ValueError):
            ProbDist.exact_sparse(2, "ZZ", {"012": 1.0})

    def test_bad_basis(self):
        with pytest.raises(ValueError):
            ProbDist.exact_dense(1, "Q", np.array([1.0, 0.0]))

    def test_dense_sparse_consistency(self):
        d = ProbDist.exact_sparse(2, "ZZ", {"01": 0.25, "11": 0.75})
        assert np.allclose(d.dense(), [0, 0.25, 0, 0.75])


class TestMeasurementSet:
    def test_host_basis_prefers_preferred(self):
        from fcqem.pauli import PauliString

        ms = MeasurementSet(2)
        ms.add(ProbDist.exact_dense(2, "ZZ", np.array([1.0, 0, 0, 0])))
        ms.add(ProbDist.exact_dense(2, "ZX", np.array([1.0, 0, 0, 0])))
        p = PauliString.from_label("ZI")
        assert ms.host_basis(p) == "ZX"  # sorted order when no preference
        assert ms.host_basis(p, preferred="ZZ") == "ZZ"

    def test_require_raises_with_basis_name(self):
        ms = MeasurementSet(1)
        with pytest.raises(MissingMeasurementError, match="X"):
            ms.require("X")
