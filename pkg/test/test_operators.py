from math import pi, sqrt
import re

import numpy as np
import pytest
import scipy.linalg

import ddbounds as dd

from .conftest import complex_matrix

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


class TestValidation:
    @pytest.mark.parametrize("matrix", [
        np.zeros((2, 3)), # Not square
        np.zeros(4), # Not 2-D
        np.zeros((0, 0)), # Empty
    ])
    def test_not_square(self, matrix):
        with pytest.raises(dd.DimensionError, match=r"'.*' must be a non-empty square matrix"):
            dd.check_square(matrix)

    def test_non_finite(self):
        with pytest.raises(ValueError, match="non-finite"):
            dd.check_square([[1, np.nan], [0, 1]])

    def test_not_hermitian(self):
        with pytest.raises(dd.HermiticityError, match=r"'h' is not Hermitian \(‖A − A†‖ = "):
            dd.check_hermitian([[0, 1], [0, 0]], "h")

    def test_hermitian_is_symmetrised(self, rng):
        h = dd.random_hermitian(4, rng)
        noisy = h + 1e-14 * complex_matrix(rng, 4)
        result = dd.check_hermitian(noisy)
        assert np.array_equal(result, result.conj().T)

    def test_not_unitary(self):
        with pytest.raises(dd.UnitarityError, match="'u' is not unitary"):
            dd.check_unitary(2 * np.eye(2), "u")

    @pytest.mark.parametrize("rho, message", [
        ([[0.5, 0.5], [0, 0.5]], "is not Hermitian"),
        ([[0.6, 0], [0, 0.6]], "has trace '.*' instead of 1"),
        ([[1.5, 0], [0, -0.5]], "has negative eigenvalue"),
    ])
    def test_invalid_density(self, rho, message):
        with pytest.raises(dd.DensityMatrixError, match=message):
            dd.check_density(rho)

    def test_random_density_is_valid(self, rng, dim):
        dd.check_density(dd.random_density(dim, rng))
        dd.check_density(dd.random_density(dim, rng, rank=1))

    def test_pure_state_of_zero_vector(self):
        with pytest.raises(ValueError, match="zero vector"):
            dd.pure_state([0, 0])


class TestNorms:
    def test_examples(self, norm_example):
        for kind in dd.NORM_KINDS:
            assert dd.norm(norm_example["matrix"], kind) == pytest.approx(norm_example[kind])

    @pytest.mark.parametrize("alias, kind", [("1", "trace"), ("2", "frobenius"), ("inf", "operator"), ("hs", "frobenius")])
    def test_aliases(self, rng, alias, kind):
        a = complex_matrix(rng, 5)
        assert dd.norm(a, alias) == dd.norm(a, kind)

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="'nuclear' is not a supported norm kind"):
            dd.norm(np.eye(2), "nuclear")

    def test_ordering(self, random_matrices):
        for a in random_matrices:
            operator, frobenius, trace = (dd.norm(a, kind) for kind in ("operator", "frobenius", "trace"))
            assert operator <= frobenius * (1 + 1e-12)
            assert frobenius <= trace * (1 + 1e-12)

    def test_unitary_invariance(self, rng, dim):
        a = complex_matrix(rng, dim)
        u, v = dd.random_unitary(dim, rng), dd.random_unitary(dim, rng)
        for kind in dd.NORM_KINDS:
            assert dd.norm(u @ a @ v, kind) == pytest.approx(dd.norm(a, kind), rel=1e-10)

    def test_tensor_multiplicativity(self, rng):
        a, b = complex_matrix(rng, 2), complex_matrix(rng, 3)
        for kind in dd.NORM_KINDS:
            assert dd.norm(dd.tensor(a, b), kind) == pytest.approx(dd.norm(a, kind) * dd.norm(b, kind), rel=1e-10)


class TestTensor:
    def test_order(self):
        # System is the slower-varying index
        assert np.allclose(dd.tensor(Z, np.eye(2)), np.diag([1, 1, -1, -1]))

    def test_all(self):
        assert np.allclose(dd.tensor_all(X, Y, Z), np.kron(np.kron(X, Y), Z))

    def test_no_operands(self):
        with pytest.raises(ValueError, match="at least one operand"):
            dd.tensor_all()


class TestCommutators:
    def test_zero_nesting(self, random_matrices):
        a, b, _ = random_matrices
        assert np.array_equal(dd.nested_commutator(a, b, 0), b)

    def test_double_nesting(self, random_matrices):
        a, b, _ = random_matrices
        assert np.allclose(dd.nested_commutator(a, b, 2), dd.commutator(a, dd.commutator(a, b)))

    def test_pauli_algebra(self):
        assert np.allclose(dd.commutator(X, Y), 2j * Z)

    def test_non_integer_depth(self):
        with pytest.raises(TypeError, match="'1.5' is not an integer"):
            dd.nested_commutator(X, Y, 1.5)

    def test_negative_depth(self):
        with pytest.raises(ValueError, match="'-1' is negative"):
            dd.nested_commutator(X, Y, -1)


class TestExponentials:
    def test_expm_hermitian(self, rng, dim):
        h = dd.random_hermitian(dim, rng)
        assert np.allclose(dd.expm_hermitian(h, 0.7), scipy.linalg.expm(-0.7j * h), atol=1e-10)

    def test_expm_zero_time(self, rng):
        assert np.array_equal(dd.expm_hermitian(dd.random_hermitian(3, rng), 0), np.eye(3))

    def test_log_round_trip(self, rng, dim):
        phi = dd.random_hermitian(dim, rng, target_norm=2.5)
        assert np.allclose(dd.unitary_log(dd.expm_hermitian(phi)), phi, atol=1e-9)

    def test_log_degenerate_spectrum(self, rng):
        u = dd.random_unitary(4, rng)
        phi = u @ np.diag([0.3, 0.3, 0.3, -1.0]) @ u.conj().T
        result = dd.unitary_log(dd.expm_hermitian(phi))
        assert np.allclose(result, phi, atol=1e-9)
        assert np.allclose(result, result.conj().T)

    def test_log_identity(self):
        assert np.allclose(dd.unitary_log(np.eye(3)), np.zeros((3, 3)))

    def test_branch_cut(self):
        with pytest.raises(dd.BranchCutError, match=re.escape("of the branch cut at ±π")) as info:
            dd.unitary_log(np.diag([-1, 1]))
        assert abs(info.value.phase) == pytest.approx(pi)

    def test_near_branch_cut(self):
        phase = pi - 1e-10
        with pytest.raises(dd.BranchCutError):
            dd.unitary_log(np.diag([np.exp(-1j * phase), 1]))

    def test_log_of_non_unitary(self):
        with pytest.raises(dd.UnitarityError):
            dd.unitary_log(np.diag([2, 1]))


class TestPartialTrace:
    def test_product_operator(self, rng):
        a, b = complex_matrix(rng, 4), complex_matrix(rng, 2)
        assert np.allclose(dd.partial_trace_bath(dd.tensor(a, b), 2), a * np.trace(b))

    def test_trivial_bath(self, rng):
        a = complex_matrix(rng, 4)
        assert np.allclose(dd.partial_trace_bath(a, 1), a)

    def test_non_integer_bath(self):
        with pytest.raises(TypeError, match="'2.0' is not an integer"):
            dd.partial_trace_bath(np.eye(4), 2.0)

    def test_not_divisible(self):
        with pytest.raises(dd.DimensionError, match="not divisible"):
            dd.partial_trace_bath(np.eye(4), 3)

    def test_trace_norm_contraction(self, rng):
        # ‖tr_B X‖₁ ≤ ‖X‖₁ and ‖tr_B X‖_∞ ≤ d_B‖X‖_∞
        x = complex_matrix(rng, 8)
        reduced = dd.partial_trace_bath(x, 4)
        assert dd.norm(reduced, "trace") <= dd.norm(x, "trace") * (1 + 1e-12)
        assert dd.norm(reduced, "operator") <= 4 * dd.norm(x, "operator") * (1 + 1e-12)


class TestDistances:
    def test_orthogonal_states(self):
        assert dd.trace_distance(dd.pure_state([1, 0]), dd.pure_state([0, 1])) == pytest.approx(1.0)

    def test_identical_states(self, rng):
        rho = dd.random_density(4, rng)
        assert dd.trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-12)
        assert dd.fidelity(rho, rho) == pytest.approx(1.0, abs=1e-7)

    def test_pure_fidelity_is_overlap(self):
        assert dd.fidelity(dd.pure_state([1, 0]), dd.pure_state([1, 1])) == pytest.approx(1 / sqrt(2))

    def test_fuchs_van_de_graaf(self, rng, dim):
        r1, r2 = dd.random_density(dim, rng), dd.random_density(dim, rng)
        distance, fid = dd.trace_distance(r1, r2), dd.fidelity(r1, r2)
        assert 1 - distance <= fid + 1e-9
        assert fid <= sqrt(1 - distance ** 2) + 1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(dd.DimensionError, match="different dimensions"):
            dd.trace_distance(np.eye(2) / 2, np.eye(4) / 4)

    def test_invalid_state(self):
        with pytest.raises(dd.DensityMatrixError):
            dd.fidelity(np.eye(2), np.eye(2) / 2)


class TestAdjoint:
    def test_rotation_sign(self):
        assert np.allclose(dd.adjoint_map(pi / 4 * Z, X), Y)

    def test_series_agrees(self, rng):
        a = dd.random_hermitian(4, rng, target_norm=0.3)
        b = complex_matrix(rng, 4)
        assert np.allclose(dd.adjoint_series(a, b, terms=20), dd.adjoint_map(a, b), atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(dd.DimensionError):
            dd.adjoint_map(Z, np.eye(4))

    def test_global_phase(self, rng):
        u = dd.random_unitary(3, rng)
        q = np.exp(0.4j)
        assert dd.global_phase(q * u, u) == pytest.approx(q)
        assert dd.equal_up_to_phase(q * u, u)
        assert dd.phase_overlap(q * u, u) == pytest.approx(1.0)

    def test_different_unitaries(self):
        assert not dd.equal_up_to_phase(X, Z)
        assert dd.global_phase(X, Z) == 1
