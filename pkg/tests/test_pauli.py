import itertools

import numpy as np
import pytest

from fcqem.errors import DimensionMismatchError, InternalConsistencyError
from fcqem.pauli import (
    PauliString,
    PauliSum,
    eigenvalue_signs,
    group_tpb,
    hamiltonian_powers,
    multiply,
    outcome_eigenvalue,
    qubitwise_commutes,
    string_matrix,
    sum_matrix,
    sum_multiply,
    union_strings,
)

from oracles import basis_rotation_matrix, label_matrix, labels_matrix


def P(label):
    return PauliString.from_label(label)


def all_labels(n):
    return ["".join(t) for t in itertools.product("IXYZ", repeat=n)]


class TestMultiply:
    def test_single_qubit_table(self):
        assert multiply(P("X"), P("Z")) == PauliString.from_label("Y", phase=-1j)

    def test_involution(self):
        assert multiply(P("ZI"), P("ZI")) == PauliString.from_label("II")

    def test_two_qubit_product(self):
        # (X(x)Z)(Z(x)Z) = (XZ)(x)(ZZ) = -i Y (x) I, checked against 4x4 matrices
        got = multiply(P("XZ"), P("ZZ"))
        assert np.allclose(string_matrix(got), label_matrix("XZ") @ label_matrix("ZZ"))
        assert got == PauliString.from_label("YI", phase=-1j)

    def test_all_pairs_vs_dense_up_to_3_qubits(self):
        for n in (1, 2, 3):
            for a in all_labels(n):
                ma = label_matrix(a)
                for b in all_labels(n):
                    prod = multiply(P(a), P(b))
                    assert np.allclose(
                        string_matrix(prod), ma @ label_matrix(b), atol=1e-14
                    ), (a, b)

    def test_associative(self):
        rng = np.random.default_rng(7)
        labels = all_labels(3)
        for _ in range(200):
            a, b, c = (P(labels[i]) for i in rng.integers(0, len(labels), 3))
            assert multiply(multiply(a, b), c) == multiply(a, multiply(b, c))

    def test_size_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            multiply(P("X"), P("XX"))

    def test_label_round_trip(self):
        for lab in all_labels(3):
            assert P(lab).label == lab


class TestSumMultiply:
    def test_z_squared(self):
        h = PauliSum.from_label_weights({"Z": 1.0})
        assert sum_multiply(h, h).label_weights() == {"I": 1.0}

    def test_tfim_square_against_dense(self):
        h = PauliSum.from_label_weights({"ZZ": 1.0, "XI": 0.5, "IX": 0.5})
        h2 = sum_multiply(h, h)
        dense = labels_matrix(h.label_weights())
        assert np.allclose(sum_matrix(h2), dense @ dense, atol=1e-12)
        # anticommuting cross terms cancel exactly
        assert set(h2.label_weights()) == {"II", "XX"}

    def test_empty_annihilates(self):
        h = PauliSum.from_label_weights({"ZZ": 1.0})
        assert len(sum_multiply(h, PauliSum.zero(2))) == 0

    def test_random_hermitian_squares_vs_dense(self):
        rng = np.random.default_rng(3)
        for n in (2, 3, 4):
            labels = all_labels(n)
            for _ in range(4):
                pick = rng.choice(len(labels), size=min(20, len(labels)), replace=False)
                terms = {labels[i]: float(rng.normal()) for i in pick}
                h = PauliSum.from_label_weights(terms, n)
                dense = labels_matrix({**{"I" * n: 0.0}, **terms})
                assert np.abs(sum_matrix(h * h) - dense @ dense).max() < 1e-12

    def test_non_hermitian_raises(self):
        a = PauliSum.from_label_weights({"X": 1.0})
        b = PauliSum.from_label_weights({"Y": 1.0})
        with pytest.raises(InternalConsistencyError):
            sum_multiply(a, b)  # XY = iZ has imaginary weight


class TestPowers:
    def test_z_powers(self):
        out = hamiltonian_powers(PauliSum.from_label_weights({"Z": 1.0}), 4)
        assert [p.label_weights() for p in out] == [
            {"Z": 1.0},
            {"I": 1.0},
            {"Z": 1.0},
            {"I": 1.0},
        ]

    def test_identity_powers(self):
        out = hamiltonian_powers(PauliSum.from_label_weights({"II": 1.0}), 3)
        assert all(p.label_weights() == {"II": 1.0} for p in out)

    def test_union_count_matches_dense_oracle(self):
        terms = {"ZZI": 1.0, "IZZ": 1.0, "XII": 0.5, "IXI": 0.5, "IIX": 0.5}
        h = PauliSum.from_label_weights(terms)
        powers = hamiltonian_powers(h, 2)
        # oracle: expand H^2 densely and project onto every Pauli label
        dense = labels_matrix(terms)
        d2 = dense @ dense
        expected = set()
        for lab in all_labels(3):
            w = np.trace(label_matrix(lab).conj().T @ d2).real / 8
            if abs(w) > 1e-12:
                expected.add(lab)
        got = {p.label for p in powers[1].strings()}
        assert got == expected
        assert {p.label for p in union_strings(powers)} == expected | set(terms)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            hamiltonian_powers(PauliSum.from_label_weights({"Z": 1.0}), 0)


class TestQubitwiseCommutes:
    def test_examples(self):
        assert qubitwise_commutes(P("ZZ"), P("ZI"))
        assert not qubitwise_commutes(P("XX"), P("ZZ"))
        assert qubitwise_commutes(P("XI"), P("IZ"))

    def test_matches_letterwise_definition(self):
        for a in all_labels(2):
            for b in all_labels(2):
                want = all(
                    ca == "I" or cb == "I" or ca == cb for ca, cb in zip(a, b)
                )
                assert qubitwise_commutes(P(a), P(b)) == want


class TestGroupTpb:
    def test_mixed_set(self):
        got = group_tpb({P("ZZ"), P("ZI"), P("XX")})
        assert {k: {p.label for p in v} for k, v in got.items()} == {
            "ZZ": {"ZZ", "ZI"},
            "XX": {"XX"},
        }

    def test_all_diagonal_single_basis(self):
        got = group_tpb({P("ZI"), P("IZ"), P("ZZ")})
        assert set(got) == {"ZZ"}
        assert {p.label for p in got["ZZ"]} == {"ZI", "IZ", "ZZ"}

    def test_disjoint_supports_merge(self):
        got = group_tpb({P("ZI"), P("IX")})
        assert set(got) == {"ZX"}

    def test_postconditions_random(self):
        rng = np.random.default_rng(11)
        labels = all_labels(3)
        for _ in range(25):
            pick = rng.choice(len(labels), size=12, replace=False)
            strings = {P(labels[i]) for i in pick}
            weights = {s: float(rng.normal()) for s in strings}
            got = group_tpb(strings, weights)
            seen = set()
            for basis, members in got.items():
                for s in members:
                    # compatibility: non-identity letters match the basis
                    assert all(
                        cs == "I" or cs == cb for cs, cb in zip(s.label, basis)
                    ), (basis, s.label)
                assert not (members & seen)
                seen |= members
            assert seen == strings


class TestOutcomeEigenvalue:
    def test_examples(self):
        assert outcome_eigenvalue(P("ZZ"), "01") == -1
        assert outcome_eigenvalue(P("ZI"), "01") == 1
        assert outcome_eigenvalue(P("II"), "10") == 1

    def test_matches_rotated_dense_oracle(self):
        # <o| U P U^dag |o> for the per-qubit diagonalizing rotation U
        for n in (1, 2, 3):
            for lab in all_labels(n):
                u = basis_rotation_matrix(lab.replace("I", "Z"))
                diag = np.real(np.diag(u @ label_matrix(lab) @ u.conj().T))
                for idx in range(2**n):
                    o = format(idx, f"0{n}b")
                    assert outcome_eigenvalue(P(lab), o) == pytest.approx(diag[idx])

    def test_signs_vector_agrees(self):
        for lab in all_labels(2):
            signs = eigenvalue_signs(P(lab))
            for idx in range(4):
                assert signs[idx] == outcome_eigenvalue(P(lab), format(idx, "02b"))
