import numpy as np
import pytest

from fcqem.circuits import Circuit, neel_circuit
from fcqem.frame import (
    PauliNoiseSpec,
    frame_sample,
    noiseless_spin_correlation,
    spin_correlation,
)
from fcqem.simulator import measure_probs, run_circuit
from fcqem.states import ProbDist


def random_clifford_circuit(rng, n, depth=15):
    c = Circuit(n)
    for _ in range(depth):
        kind = rng.choice(["H", "S", "X", "Y", "Z", "CNOT", "CZ"])
        if kind in ("CNOT", "CZ"):
            a, b = rng.choice(n, size=2, replace=False)
            c.add(kind, int(a), int(b))
        else:
            c.add(kind, int(rng.integers(0, n)))
    return c


class TestNoiseSpec:
    def test_biased_normalization(self):
        spec = PauliNoiseSpec.biased(0.012, bias=10.0)
        assert abs(spec.total - 0.012) < 1e-15
        assert abs(spec.p_z - 10 * spec.p_x) < 1e-15
        assert spec.p_x == spec.p_y

    def test_validation(self):
        with pytest.raises(ValueError):
            PauliNoiseSpec(p_x=0.6, p_z=0.6)


class TestFrameSample:
    def test_zero_noise_neel4(self):
        d = frame_sample(neel_circuit(4), PauliNoiseSpec(), 20000, seed=3)
        counts = d.counts()
        assert set(counts) == {"0101", "1010"}
        # ~50/50 split within 5 sigma
        assert abs(counts["0101"] - 10000) < 5 * np.sqrt(20000 * 0.25)

    def test_pure_z_noise_matches_noiseless(self):
        d0 = frame_sample(neel_circuit(6), PauliNoiseSpec(), 4000, seed=11)
        dz = frame_sample(neel_circuit(6), PauliNoiseSpec(p_z=0.4), 4000, seed=11)
        assert d0.counts() == dz.counts()

    def test_deterministic_injection_flips_bit(self):
        c = neel_circuit(6)
        d0 = frame_sample(c, PauliNoiseSpec(), 4000, seed=11)
        dx = frame_sample(c, PauliNoiseSpec(), 4000, seed=11, inject_final_x=1 << 5)
        flipped = {("1" if o[0] == "0" else "0") + o[1:]: v for o, v in d0.counts().items()}
        assert flipped == dx.counts()

    def test_reproducible(self):
        noise = PauliNoiseSpec.biased(0.02)
        a = frame_sample(neel_circuit(8), noise, 3000, seed=42)
        b = frame_sample(neel_circuit(8), noise, 3000, seed=42)
        assert a.counts() == b.counts()

    def test_non_clifford_rejected(self):
        c = Circuit(2).add("RY", 0, angle=0.3)
        with pytest.raises(ValueError):
            frame_sample(c, PauliNoiseSpec(), 10, seed=0)
        with pytest.raises(ValueError):
            frame_sample(Circuit(2).add("ISWAP", 0, 1), PauliNoiseSpec(), 10, seed=0)

    def test_matches_dense_on_random_cliffords(self):
        rng = np.random.default_rng(0)
        shots = 30000
        for trial in range(6):
            n = int(rng.integers(2, 7))
            c = random_clifford_circuit(rng, n)
            want = measure_probs(run_circuit(c), "Z" * n).dense()
            emp = frame_sample(c, PauliNoiseSpec(), shots, seed=trial).dense()
            sigma = np.sqrt(np.maximum(want * (1 - want), 1e-12) / shots)
            assert (np.abs(emp - want) <= 5 * sigma + 1e-9).all()

    def test_noisy_matches_dense_channel_model(self):
        # same Pauli-channel insertion points as the density-matrix path
        from fcqem.simulator import NoiseModel, run_noisy

        rng = np.random.default_rng(5)
        shots = 40000
        spec = PauliNoiseSpec(p_x=0.02, p_y=0.01, p_z=0.05)
        nm = NoiseModel(pauli_x=0.02, pauli_y=0.01, pauli_z=0.05)
        for trial in range(3):
            n = int(rng.integers(2, 5))
            c = random_clifford_circuit(rng, n, depth=8)
            want = measure_probs(run_noisy(c, nm), "Z" * n).dense()
            emp = frame_sample(c, spec, shots, seed=trial).dense()
            sigma = np.sqrt(np.maximum(want * (1 - want), 1e-12) / shots)
            assert (np.abs(emp - want) <= 5 * sigma + 1e-9).all()

    def test_high_rate_correction_degrades_toward_raw(self):
        from fcqem.frame import corrected_spin_correlation

        shots = 30000
        mild = frame_sample(neel_circuit(32), PauliNoiseSpec.biased(0.01), shots, seed=3)
        harsh = frame_sample(neel_circuit(32), PauliNoiseSpec.biased(0.5), shots, seed=3)
        mild_gap = abs(corrected_spin_correlation(mild) - 1.0)
        harsh_corr = corrected_spin_correlation(harsh)
        harsh_raw = spin_correlation(harsh)
        # shot-noise limit: correction collapses toward the (noisy) raw value
        assert abs(harsh_corr - 1.0) > 10 * max(mild_gap, 1e-4)
        assert abs(harsh_corr - harsh_raw) < 0.2

    def test_linear_runtime_smoke(self):
        import time

        noise = PauliNoiseSpec.biased(0.01)
        t0 = time.monotonic()
        frame_sample(neel_circuit(256), noise, 20000, seed=1)
        assert time.monotonic() - t0 < 60.0


class TestSpinCorrelation:
    def test_even_parity_mass(self):
        d = ProbDist.exact_sparse(4, "ZZZZ", {"0101": 1.0})
        assert spin_correlation(d) == 1.0

    def test_odd_parity_mass(self):
        d = ProbDist.exact_sparse(4, "ZZZZ", {"0001": 1.0})
        assert spin_correlation(d) == -1.0

    def test_neel10_noiseless(self):
        d = frame_sample(neel_circuit(10), PauliNoiseSpec(), 2000, seed=7)
        assert spin_correlation(d) == -1.0

    def test_noiseless_value_from_tableau(self):
        assert noiseless_spin_correlation(neel_circuit(10)) == -1.0
        assert noiseless_spin_correlation(neel_circuit(4)) == 1.0
        # H on one qubit gives a uniform marginal: correlation 0
        assert noiseless_spin_correlation(Circuit(2).add("H", 0)) == 0.0
