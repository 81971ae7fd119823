__all__ = ["DIM_CAP", "LOGIC_TYPES", "GateSpec", "SystemBathSplit", "StrengthReport",
           "pauli_string", "pauli_operator", "global_pauli", "chain_couplings",
           "build_heisenberg_ctrl", "build_linear_sb", "build_random_bath", "build_local_bath",
           "build_residual", "per_site_coefficients", "random_coefficients",
           "build_logic_operator", "strengths"]

from dataclasses import dataclass
from functools import cached_property
import logging
from typing import Dict, Mapping, Optional, Tuple, Union

import numpy as np

from .exceptions import DimensionError
from .operators import (check_hermitian, expm_hermitian, norm,
                        random_hermitian, tensor, tensor_all)
from .pauli_types import PAULI_TYPES

logger = logging.getLogger(__name__)

# Largest total Hilbert-space dimension 2^(n_sys + n_bath) handled with dense matrices
DIM_CAP = 256

BathOperatorSpec = Union[float, int, str, np.ndarray]


def _check_qubits(n: int, name: str, minimum: int = 0) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise TypeError(f"'{n}' is not an integer ({name})")
    if n < minimum:
        raise ValueError(f"'{n}' is below the minimum of {minimum} for {name}")
    return int(n)


def _check_cap(n_qubits: int) -> None:
    if 2 ** n_qubits > DIM_CAP:
        raise DimensionError(f"'{n_qubits}' qubits exceed the dimension cap of {DIM_CAP}")


def pauli_string(label: str) -> np.ndarray:
    """
    Tensor product of single-qubit Paulis, qubit 1 leftmost.

    Args:
        label: A string over 'IXYZ', e.g. 'XIZ'. Lower case is accepted.

    Raises:
        ValueError: if the label is empty or contains other characters.
    """
    if not isinstance(label, str):
        raise TypeError(f"'{label}' is not a string")
    label = label.upper()
    if not label or any(char not in PAULI_TYPES for char in label):
        raise ValueError(f"'{label}' is not a valid Pauli string")
    _check_cap(len(label))
    return tensor_all(*(PAULI_TYPES[char]["matrix"] for char in label))


def pauli_operator(axis: str, site: int, n_qubits: int) -> np.ndarray:
    """σ_site^axis on an n-qubit register. Sites are numbered from 1."""
    if not 1 <= site <= n_qubits:
        raise ValueError(f"Site '{site}' is outside 1..{n_qubits}")
    label = ["I"] * n_qubits
    label[site - 1] = axis.upper()
    return pauli_string("".join(label))


def global_pauli(axis: str, n_qubits: int) -> np.ndarray:
    """σ₁ᵅ ⊗ … ⊗ σₙᵅ"""
    return pauli_string(axis.upper() * n_qubits)


def chain_couplings(n_sys: int, coupling: float = 1.0) -> Dict[Tuple[int, int], float]:
    """Uniform nearest-neighbour couplings {(i, i+1): J} of an open chain."""
    return {(i, i + 1): coupling for i in range(1, n_sys)}


@dataclass(frozen=True, eq=False)
class GateSpec:
    """
    Target logic gate U_ctrl(T) = exp(−iθR).

    Args:
        logic: Hermitian logic operator R on the system, with ‖R‖_∞ equal to 1 (or R = 0).
        theta: Rotation angle in radians.
        name: Name of the logic type that produced R.
    """
    logic: np.ndarray
    theta: float = 0.0
    name: str = "custom"

    def __post_init__(self) -> None:
        logic = check_hermitian(self.logic, "logic operator")
        size = norm(logic, "operator")
        if size > 0 and abs(size - 1.0) > 1e-10:
            raise ValueError(f"Logic operator norm is '{size}', expected 1")
        object.__setattr__(self, "logic", logic)

    @property
    def dim(self) -> int:
        return self.logic.shape[0]

    @cached_property
    def target(self) -> np.ndarray:
        """exp(−iθR)"""
        return expm_hermitian(self.logic, self.theta)


@dataclass(frozen=True, eq=False)
class StrengthReport:
    """J = ‖H_err‖_∞ and β = ‖H_sec‖_∞."""
    J: float
    beta: float


@dataclass(frozen=True, eq=False)
class SystemBathSplit:
    """
    Three-part split H = H_ctrl ⊗ I_B + H_err + I_S ⊗ H_B.

    `h_ctrl` acts on the system, `h_bath` on the bath and `h_err` on system ⊗ bath.
    """
    n_sys: int
    n_bath: int
    h_ctrl: np.ndarray
    h_err: np.ndarray
    h_bath: np.ndarray

    def __post_init__(self) -> None:
        _check_qubits(self.n_sys, "n_sys", 1)
        _check_qubits(self.n_bath, "n_bath", 0)
        _check_cap(self.n_sys + self.n_bath)
        expected = {"h_ctrl": self.dim_sys, "h_err": self.dim, "h_bath": self.dim_bath}
        for name, dim in expected.items():
            op = check_hermitian(getattr(self, name), name)
            if op.shape[0] != dim:
                raise DimensionError(f"'{name}' has dimension '{op.shape[0]}', expected {dim}")
            object.__setattr__(self, name, op)

    @property
    def dim_sys(self) -> int:
        return 2 ** self.n_sys

    @property
    def dim_bath(self) -> int:
        return 2 ** self.n_bath

    @property
    def dim(self) -> int:
        return self.dim_sys * self.dim_bath

    @cached_property
    def embedded_ctrl(self) -> np.ndarray:
        """H_ctrl ⊗ I_B"""
        return tensor(self.h_ctrl, np.eye(self.dim_bath))

    @cached_property
    def embedded_bath(self) -> np.ndarray:
        """I_S ⊗ H_B"""
        return tensor(np.eye(self.dim_sys), self.h_bath)

    @property
    def h_sec(self) -> np.ndarray:
        """Secular part H_ctrl ⊗ I_B + I_S ⊗ H_B"""
        return self.embedded_ctrl + self.embedded_bath

    @property
    def total(self) -> np.ndarray:
        return self.h_sec + self.h_err


def build_heisenberg_ctrl(n_sys: int, couplings: Mapping[Tuple[int, int], float]) -> np.ndarray:
    """
    Heisenberg exchange Hamiltonian Σ_{i<j} J_ij (σᵢˣσⱼˣ + σᵢʸσⱼʸ + σᵢᶻσⱼᶻ).

    Args:
        n_sys: Number of system qubits.
        couplings: Map from site pairs (i, j), numbered from 1 with i < j, to J_ij.

    Returns:
        The 2^n × 2^n Hamiltonian. Empty couplings give the zero matrix.

    Raises:
        ValueError: if a pair is out of range or not ordered.
    """
    n_sys = _check_qubits(n_sys, "n_sys", 1)
    _check_cap(n_sys)
    h = np.zeros((2 ** n_sys, 2 ** n_sys), dtype=complex)
    for (i, j), coupling in sorted(couplings.items()):
        if not (1 <= i < j <= n_sys):
            raise ValueError(f"Coupling pair '({i}, {j})' is not an ordered pair within 1..{n_sys}")
        for axis in "XYZ":
            h += coupling * pauli_operator(axis, i, n_sys) @ pauli_operator(axis, j, n_sys)
    return h


def _bath_operator(spec: BathOperatorSpec, n_bath: int, rng: np.random.Generator) -> np.ndarray:
    dim_bath = 2 ** n_bath
    if isinstance(spec, str):
        if len(spec) != n_bath:
            raise ValueError(f"Bath Pauli string '{spec}' does not have length {n_bath}")
        return pauli_string(spec)
    if isinstance(spec, (int, float, np.floating, np.integer)) and not isinstance(spec, bool):
        if spec < 0:
            raise ValueError(f"Bath operator norm '{spec}' is negative")
        return random_hermitian(dim_bath, rng, float(spec)) if spec > 0 else np.zeros((dim_bath, dim_bath), complex)
    op = check_hermitian(spec, "bath operator")
    if op.shape[0] != dim_bath:
        raise DimensionError(f"Bath operator has dimension '{op.shape[0]}', expected {dim_bath}")
    return op


def build_linear_sb(n_sys: int, n_bath: int, coeffs: Mapping[Tuple[int, str], BathOperatorSpec],
                    seed: Optional[int] = None) -> np.ndarray:
    """
    Linear system-bath coupling Σ_α Σ_j σⱼᵅ ⊗ Bⱼᵅ.

    Args:
        n_sys: Number of system qubits.
        n_bath: Number of bath qubits (0 gives a trivial one-dimensional bath).
        coeffs: Map from (site, axis), with site numbered from 1 and axis in 'xyz', to a
            bath operator spec: a number is the operator norm of a seeded random Hermitian
            bath operator, a string is a Pauli string on the bath qubits and an array is
            used as given.
        seed: Seed for the random bath operators. Keys are visited in sorted order, so the
            output is deterministic per seed.

    Raises:
        DimensionError: if the register exceeds the dimension cap.
    """
    n_sys = _check_qubits(n_sys, "n_sys", 1)
    n_bath = _check_qubits(n_bath, "n_bath", 0)
    _check_cap(n_sys + n_bath)
    rng = np.random.default_rng(seed)
    dim = 2 ** (n_sys + n_bath)
    h = np.zeros((dim, dim), dtype=complex)
    for (site, axis), spec in sorted(coeffs.items(), key=lambda item: (item[0][0], item[0][1].upper())):
        if axis.upper() not in "XYZ" or len(axis) != 1:
            raise ValueError(f"'{axis}' is not one of x, y, z")
        bath_op = _bath_operator(spec, n_bath, rng)
        h += tensor(pauli_operator(axis, site, n_sys), bath_op)
    return h


def build_random_bath(n_bath: int, target_norm: float, seed: Optional[int] = None) -> np.ndarray:
    """
    GUE-style random bath Hamiltonian rescaled to ‖H_B‖_∞ = target_norm.

    Raises:
        ValueError: if target_norm is negative.
    """
    n_bath = _check_qubits(n_bath, "n_bath", 0)
    _check_cap(n_bath)
    if target_norm < 0:
        raise ValueError(f"'{target_norm}' is negative")
    dim = 2 ** n_bath
    if target_norm == 0:
        return np.zeros((dim, dim), dtype=complex)
    return random_hermitian(dim, np.random.default_rng(seed), target_norm)


def _random_direction(rng: np.random.Generator) -> np.ndarray:
    direction = rng.normal(size=3)
    return direction / np.linalg.norm(direction)


def _local_term(direction: np.ndarray, strength: float) -> np.ndarray:
    """strength · (n̂·σ), a traceless 2 × 2 operator with eigenvalues ±strength."""
    return strength * sum(component * PAULI_TYPES[axis]["matrix"]
                          for component, axis in zip(direction, "XYZ"))


def _on_qubit(op: np.ndarray, site: int, n_qubits: int) -> np.ndarray:
    factors = [np.eye(2)] * n_qubits
    factors[site - 1] = op
    return tensor_all(*factors)


def build_local_bath(n_bath: int, local_norm: float, seed: Optional[int] = None,
                     identical: bool = False) -> np.ndarray:
    """
    Sum of single-qubit bath terms Σ_k b (n̂_k·σ_k). With `identical` all directions agree,
    so ‖H_B‖_∞ = n_bath · local_norm exactly.
    """
    n_bath = _check_qubits(n_bath, "n_bath", 0)
    _check_cap(n_bath)
    dim = 2 ** n_bath
    h = np.zeros((dim, dim), dtype=complex)
    rng = np.random.default_rng(seed)
    shared = _random_direction(rng)
    for site in range(1, n_bath + 1):
        direction = shared if identical else _random_direction(rng)
        h += _on_qubit(_local_term(direction, local_norm), site, n_bath)
    return h


def per_site_coefficients(n_sys: int, n_bath: int, scale: float, seed: Optional[int] = None,
                          identical: bool = False) -> Dict[Tuple[int, str], np.ndarray]:
    """
    Coefficients for `build_linear_sb` coupling system qubit j to bath qubit ((j − 1) mod n_bath) + 1
    through traceless single-qubit operators of norm `scale`. With `identical` every site
    uses the same three bath operators.
    """
    if n_bath < 1:
        raise ValueError("Per-site coupling needs at least one bath qubit")
    rng = np.random.default_rng(seed)
    shared = {axis: _random_direction(rng) for axis in "xyz"}
    coeffs = {}
    for site in range(1, n_sys + 1):
        bath_site = (site - 1) % n_bath + 1
        for axis in "xyz":
            direction = shared[axis] if identical else _random_direction(rng)
            coeffs[(site, axis)] = _on_qubit(_local_term(direction, scale), bath_site, n_bath)
    return coeffs


def random_coefficients(n_sys: int, scale: float) -> Dict[Tuple[int, str], float]:
    """Coefficients for `build_linear_sb` with a random whole-bath operator of norm `scale` on every (site, axis)."""
    return {(site, axis): scale for site in range(1, n_sys + 1) for axis in "xyz"}


def build_residual(n_sys: int, n_bath: int, scale: float, seed: Optional[int] = None) -> np.ndarray:
    """Pure-system error term H_res ⊗ I_B with ‖H_res‖_∞ = scale."""
    if scale == 0:
        dim = 2 ** (n_sys + n_bath)
        return np.zeros((dim, dim), dtype=complex)
    h_res = random_hermitian(2 ** n_sys, np.random.default_rng(seed), scale)
    return tensor(h_res, np.eye(2 ** n_bath))


def _normalized(op: np.ndarray) -> np.ndarray:
    size = norm(op, "operator")
    return op / size if size > 0 else op


def _logical_z_on_dfs(n_sys: int, couplings: Optional[Mapping] = None) -> np.ndarray:
    # (σ₁·σ₂ + I)/2 is the swap of qubits 1 and 2: Z̄ on the encoded qubit {|01⟩, |10⟩}
    if n_sys < 2:
        raise ValueError("'logical-z-on-dfs' needs at least two system qubits")
    exchange = build_heisenberg_ctrl(n_sys, {(1, 2): 1.0})
    return 0.5 * (exchange + np.eye(2 ** n_sys))


def _heisenberg_exchange(n_sys: int, couplings: Optional[Mapping] = None) -> np.ndarray:
    couplings = chain_couplings(n_sys) if couplings is None else couplings
    return _normalized(build_heisenberg_ctrl(n_sys, couplings))


def _no_logic(n_sys: int, couplings: Optional[Mapping] = None) -> np.ndarray:
    return np.zeros((2 ** n_sys, 2 ** n_sys), dtype=complex)


LOGIC_TYPES = {

    "logical-z-on-dfs": {
        "builder": _logical_z_on_dfs,  # Exchange of qubits 1 and 2, Z on the decoherence-free encoded qubit
        "min_qubits": 2,
    },

    "heisenberg-exchange": {
        "builder": _heisenberg_exchange,  # Normalised Heisenberg couplings, zero when there are no pairs
        "min_qubits": 1,
    },

    "none": {
        "builder": _no_logic,
        "min_qubits": 1,
    },

}


def build_logic_operator(name: str, n_sys: int,
                         couplings: Optional[Mapping[Tuple[int, int], float]] = None) -> np.ndarray:
    """
    Normalised logic operator R for a registered logic type.

    Raises:
        ValueError: if the logic type is unknown or the register is too small for it.
    """
    if name not in LOGIC_TYPES:
        raise ValueError(f"'{name}' is not a known logic type. Choose one of {tuple(LOGIC_TYPES)}")
    return _normalized(LOGIC_TYPES[name]["builder"](n_sys, couplings))


def strengths(split: SystemBathSplit) -> StrengthReport:
    """J = ‖H_err‖_∞ and β = ‖H_ctrl ⊗ I_B + I_S ⊗ H_B‖_∞ of a split."""
    report = StrengthReport(J=norm(split.h_err, "operator"), beta=norm(split.h_sec, "operator"))
    logger.debug("Strengths of %d+%d qubit split: J=%.6g beta=%.6g",
                 split.n_sys, split.n_bath, report.J, report.beta)
    return report
