__all__ = ["NORM_KINDS", "HERMITIAN_TOL", "UNITARY_TOL", "DENSITY_TOL", "BRANCH_CUT_TOL",
           "check_square", "check_hermitian", "check_unitary", "check_density", "symmetrize",
           "dagger", "commutator", "nested_commutator", "tensor", "tensor_all",
           "expm_hermitian", "unitary_log", "norm", "partial_trace_bath", "trace_distance",
           "fidelity", "adjoint_map", "adjoint_series", "phase_overlap", "global_phase",
           "equal_up_to_phase", "random_hermitian", "random_unitary", "random_density",
           "pure_state"]

from functools import reduce
from math import factorial
from typing import Optional, Union

import numpy as np
import scipy.linalg

from .exceptions import (BranchCutError, DensityMatrixError, DimensionError,
                         HermiticityError, UnitarityError)

NORM_KINDS = ("trace", "frobenius", "operator")

# Alternative spellings accepted by `norm`
_NORM_ALIASES = {
    "1": "trace",
    "2": "frobenius",
    "inf": "operator",
    "hs": "frobenius",
}

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
DENSITY_TOL = 1e-12
BRANCH_CUT_TOL = 1e-8

Matrix = Union[np.ndarray, list]


def check_square(a: Matrix, name: str = "matrix") -> np.ndarray:
    """`a` as a complex square array with finite entries; `name` labels the error messages."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionError(f"'{name}' must be a non-empty square matrix, got shape '{arr.shape}'")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"'{name}' has non-finite entries")
    return arr


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Returns (A + A†)/2."""
    return 0.5 * (a + a.conj().T)


def dagger(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).conj().T


def check_hermitian(a: Matrix, name: str = "operator", tol: float = HERMITIAN_TOL) -> np.ndarray:
    """
    Checks ‖A − A†‖_∞ ≤ tol·max(1, ‖A‖_∞) and returns the re-symmetrised matrix.

    Raises:
        HermiticityError: if the asymmetry exceeds the tolerance.
    """
    arr = check_square(a, name)
    scale = max(1.0, norm(arr, "operator"))
    asymmetry = norm(arr - arr.conj().T, "operator")
    if asymmetry > tol * scale:
        raise HermiticityError(f"'{name}' is not Hermitian (‖A − A†‖ = {asymmetry:.3e})")
    return symmetrize(arr)


def check_unitary(u: Matrix, name: str = "unitary", tol: float = UNITARY_TOL) -> np.ndarray:
    """
    Checks ‖U†U − I‖_∞ ≤ tol.

    Raises:
        UnitarityError: if `u` is not unitary within tolerance.
    """
    arr = check_square(u, name)
    defect = norm(arr.conj().T @ arr - np.eye(arr.shape[0]), "operator")
    if defect > tol:
        raise UnitarityError(f"'{name}' is not unitary (‖U†U − I‖ = {defect:.3e})")
    return arr


def check_density(rho: Matrix, name: str = "state", tol: float = DENSITY_TOL) -> np.ndarray:
    """
    Checks that `rho` is Hermitian, positive semidefinite and of unit trace, all within `tol`.

    Raises:
        DensityMatrixError: if any of the three conditions fails.
    """
    arr = check_square(rho, name)
    if norm(arr - arr.conj().T, "operator") > tol:
        raise DensityMatrixError(f"'{name}' is not Hermitian")
    arr = symmetrize(arr)
    trace = np.trace(arr).real
    if abs(trace - 1.0) > tol:
        raise DensityMatrixError(f"'{name}' has trace '{trace}' instead of 1")
    smallest = np.linalg.eigvalsh(arr)[0]
    if smallest < -tol:
        raise DensityMatrixError(f"'{name}' has negative eigenvalue '{smallest:.3e}'")
    return arr


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """[A, B] = AB − BA"""
    return a @ b - b @ a


def nested_commutator(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """
    Returns [_n A, B] = [A, [A, ... [A, B]]] with n nested commutators, and B for n = 0.

    Raises:
        TypeError: if n is not an integer.
        ValueError: if n is negative.
    """
    if not isinstance(n, (int, np.integer)):
        raise TypeError(f"'{n}' is not an integer")
    if n < 0:
        raise ValueError(f"'{n}' is negative")
    result = np.asarray(b, dtype=complex)
    for _ in range(n):
        result = commutator(a, result)
    return result


def tensor(a: Matrix, b: Matrix) -> np.ndarray:
    """
    Kronecker product a ⊗ b. The left factor is the slower-varying index, so with the
    global convention system ⊗ bath the system is always the left factor.
    """
    return np.kron(check_square(a, "a"), check_square(b, "b"))


def tensor_all(*ops: Matrix) -> np.ndarray:
    """Kronecker product of all arguments, leftmost first."""
    if not ops:
        raise ValueError("tensor_all needs at least one operand")
    return reduce(tensor, ops)


def expm_hermitian(h: Matrix, t: float = 1.0) -> np.ndarray:
    """exp(−i·t·h) for Hermitian h, through its eigendecomposition."""
    h = check_hermitian(h, "h")
    if t == 0:
        return np.eye(h.shape[0], dtype=complex)
    eigvals, eigvecs = np.linalg.eigh(h)
    return (eigvecs * np.exp(-1j * t * eigvals)) @ eigvecs.conj().T


def unitary_log(u: Matrix) -> np.ndarray:
    """
    Principal logarithm in the convention u = exp(−iΦ).

    The complex Schur form of a unitary is diagonal up to rounding, so its Schur vectors
    form a unitary eigenbasis even for degenerate spectra. Eigenphases of Φ lie in (−π, π).

    Args:
        u: Unitary matrix.

    Returns:
        The Hermitian phase Φ.

    Raises:
        UnitarityError: if u is not unitary.
        BranchCutError: if an eigenphase lies within 1e-8 of ±π.
    """
    u = check_unitary(u, "u")
    schur_form, schur_vectors = scipy.linalg.schur(u, output="complex")
    phases = -np.angle(np.diag(schur_form))
    distance = np.pi - np.abs(phases)
    worst = int(np.argmin(distance))
    if distance[worst] <= BRANCH_CUT_TOL:
        raise BranchCutError(
            f"Eigenphase '{phases[worst]:.12f}' is within {BRANCH_CUT_TOL} of the branch cut at ±π",
            phase=float(phases[worst]))
    return symmetrize((schur_vectors * phases) @ schur_vectors.conj().T)


def norm(a: Matrix, kind: str = "operator") -> float:
    """
    Unitarily invariant norms.

    Args:
        a: Square matrix.
        kind: 'trace' (sum of singular values), 'frobenius' (root-sum-square of entries)
            or 'operator' (largest singular value). '1', '2' and 'inf' are accepted aliases.

    Returns:
        The norm value.

    Raises:
        ValueError: if `kind` is not supported.
    """
    kind = _NORM_ALIASES.get(str(kind), kind)
    if kind not in NORM_KINDS:
        raise ValueError(f"'{kind}' is not a supported norm kind. Choose one of {NORM_KINDS}")
    arr = check_square(a)
    if kind == "frobenius":
        return float(np.linalg.norm(arr, "fro"))
    singular_values = scipy.linalg.svdvals(arr)
    if kind == "trace":
        return float(singular_values.sum())
    return float(singular_values[0])


def partial_trace_bath(x: Matrix, dim_bath: int) -> np.ndarray:
    """
    Traces out the bath factor of an operator on system ⊗ bath.

    Raises:
        TypeError: if dim_bath is not an integer.
        DimensionError: if dim(x) is not divisible by dim_bath.
    """
    if not isinstance(dim_bath, (int, np.integer)):
        raise TypeError(f"'{dim_bath}' is not an integer")
    arr = check_square(x, "x")
    dim = arr.shape[0]
    if dim_bath < 1 or dim % dim_bath:
        raise DimensionError(f"Dimension '{dim}' is not divisible by bath dimension '{dim_bath}'")
    dim_sys = dim // dim_bath
    return np.einsum("ijkj->ik", arr.reshape(dim_sys, dim_bath, dim_sys, dim_bath))


def _check_pair(r1: Matrix, r2: Matrix):
    r1 = check_density(r1, "r1")
    r2 = check_density(r2, "r2")
    if r1.shape != r2.shape:
        raise DimensionError(f"States have different dimensions '{r1.shape[0]}' and '{r2.shape[0]}'")
    return r1, r2


def trace_distance(r1: Matrix, r2: Matrix) -> float:
    """D(ρ1, ρ2) = ½‖ρ1 − ρ2‖₁, clipped to [0, 1]."""
    r1, r2 = _check_pair(r1, r2)
    distance = 0.5 * np.abs(np.linalg.eigvalsh(r1 - r2)).sum()
    return float(min(1.0, max(0.0, distance)))


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    eigvals, eigvecs = np.linalg.eigh(rho)
    return (eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))) @ eigvecs.conj().T


def fidelity(r1: Matrix, r2: Matrix) -> float:
    """
    Quantum fidelity F(ρ1, ρ2) = ‖√ρ1 √ρ2‖₁ (not squared), so F = |⟨ψ1|ψ2⟩| for pure states.
    """
    r1, r2 = _check_pair(r1, r2)
    value = scipy.linalg.svdvals(_psd_sqrt(r1) @ _psd_sqrt(r2)).sum()
    return float(min(1.0, max(0.0, value)))


def adjoint_map(a: Matrix, b: Matrix) -> np.ndarray:
    """
    Ad map e^{−iA} B e^{iA}, computed directly.

    With this convention adjoint_map((π/4)σz, σx) = +σy.
    """
    b = check_square(b, "b")
    u = expm_hermitian(a, 1.0)
    if u.shape != b.shape:
        raise DimensionError(f"Operands have different dimensions '{u.shape[0]}' and '{b.shape[0]}'")
    return u @ b @ u.conj().T


def adjoint_series(a: Matrix, b: Matrix, terms: int = 12) -> np.ndarray:
    """Truncated series Σ_{n<terms} (−i)^n/n! [_n A, B] of the Ad map."""
    a = check_square(a, "a")
    b = check_square(b, "b")
    result = np.zeros_like(b)
    current = b
    for n in range(terms):
        result = result + ((-1j) ** n / factorial(n)) * current
        current = commutator(a, current)
    return result


def phase_overlap(a: Matrix, b: Matrix) -> float:
    """|tr(A†B)|/dim; equals 1 for unitaries that agree up to a global phase."""
    a = check_square(a, "a")
    b = check_square(b, "b")
    return float(abs(np.trace(a.conj().T @ b)) / a.shape[0])


def global_phase(a: Matrix, b: Matrix) -> complex:
    """Unit complex number q minimising ‖A − qB‖ (q = tr(B†A)/|tr(B†A)|, 1 if the trace vanishes)."""
    a = check_square(a, "a")
    b = check_square(b, "b")
    overlap = np.trace(b.conj().T @ a)
    if abs(overlap) == 0:
        return 1.0 + 0.0j
    return complex(overlap / abs(overlap))


def equal_up_to_phase(a: Matrix, b: Matrix, atol: float = 1e-10) -> bool:
    """Unitaries a and b agree up to a global phase."""
    return abs(phase_overlap(a, b) - 1.0) <= atol


def random_hermitian(dim: int, rng: np.random.Generator, target_norm: Optional[float] = None) -> np.ndarray:
    """
    GUE-distributed Hermitian matrix, optionally rescaled to operator norm `target_norm`.
    """
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = symmetrize(g)
    if target_norm is not None:
        current = norm(h, "operator")
        h = h * (target_norm / current) if current > 0 else h
    return h


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a complex Ginibre matrix."""
    g = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_density(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    """Random density matrix G G†/tr(G G†) with G of shape dim × rank."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return symmetrize(rho / np.trace(rho).real)


def pure_state(vector: Union[np.ndarray, list]) -> np.ndarray:
    """Projector |ψ⟩⟨ψ| onto the normalised vector."""
    psi = np.asarray(vector, dtype=complex).ravel()
    length = np.linalg.norm(psi)
    if length == 0:
        raise ValueError("Cannot build a state from the zero vector")
    psi = psi / length
    return np.outer(psi, psi.conj())
