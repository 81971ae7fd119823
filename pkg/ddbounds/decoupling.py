__all__ = ["GROUP_TYPES", "ConditionCheck", "Pulse", "PulseSchedule", "DecouplingGroup",
           "pauli_pulse", "universal_pulses", "trivial_pulses", "cumulative_products",
           "group_from_pulses", "universal_group", "trivial_group", "named_group",
           "project_group", "project_group_normalized", "check_decoupling_condition",
           "check_commutation", "is_group"]

from dataclasses import dataclass
from functools import cached_property
import logging
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import DimensionError, GroupError
from .hamiltonians import global_pauli, pauli_operator, pauli_string
from .operators import (check_hermitian, check_square, check_unitary, commutator,
                        equal_up_to_phase, expm_hermitian, global_phase, norm, tensor)

logger = logging.getLogger(__name__)

# Tolerance on exact algebraic conditions
CONDITION_TOL = 1e-10


class ConditionCheck(NamedTuple):
    satisfied: bool
    residual: float


@dataclass(frozen=True, eq=False)
class Pulse:
    """
    A rectangular control pulse.

    Args:
        unitary: Ideal (zero-width) pulse unitary on the system.
        area: Hermitian pulse area δ·H_P with exp(−i·area) equal to `unitary` up to a global
            phase. Pulses without an area exist only in the ideal limit.
        width: Pulse width δ.
        label: Display name, e.g. the Pauli string.
    """
    unitary: np.ndarray
    area: Optional[np.ndarray] = None
    width: float = 0.0
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "unitary", check_unitary(self.unitary, "pulse"))
        if self.width < 0:
            raise ValueError(f"Pulse width '{self.width}' is negative")
        if self.area is not None:
            area = check_hermitian(self.area, "pulse area")
            if area.shape != self.unitary.shape:
                raise DimensionError("Pulse area and unitary have different dimensions")
            if not equal_up_to_phase(expm_hermitian(area), self.unitary):
                raise ValueError(f"Pulse area of '{self.label}' does not realise its unitary")
            object.__setattr__(self, "area", area)
        elif self.width > 0:
            raise ValueError(f"Pulse '{self.label}' has a finite width but no area")

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]

    @property
    def generator(self) -> np.ndarray:
        """H_P = area/δ, the Hamiltonian applied during the pulse window."""
        if self.width == 0:
            raise ValueError(f"Ideal pulse '{self.label}' has no finite generator")
        return self.area / self.width

    @cached_property
    def realized(self) -> np.ndarray:
        """exp(−iδH_P), or the ideal unitary for zero-width pulses."""
        if self.width == 0 or self.area is None:
            return self.unitary
        return expm_hermitian(self.area)


def pauli_pulse(label: str, width: float = 0.0) -> Pulse:
    """
    Pulse realising the Pauli string `label`, with area (π/2)·Σ σ over its non-identity sites.
    """
    label = label.upper()
    n_qubits = len(label)
    area = sum((np.pi / 2) * pauli_operator(axis, site, n_qubits)
               for site, axis in enumerate(label, start=1) if axis != "I")
    if isinstance(area, int):
        area = np.zeros((2 ** n_qubits, 2 ** n_qubits), dtype=complex)
    return Pulse(unitary=pauli_string(label), area=area, width=width, label=label)


def universal_pulses(n_sys: int, width: float = 0.0) -> List[Pulse]:
    """Global X, Z, X, Z pulses, whose cumulative products run through I, X, Y, Z up to phase."""
    return [pauli_pulse(axis * n_sys, width) for axis in "XZXZ"]


def trivial_pulses(n_sys: int, count: int = 1, width: float = 0.0) -> List[Pulse]:
    """`count` identity pulses."""
    return [pauli_pulse("I" * n_sys, width) for _ in range(count)]


@dataclass(frozen=True, eq=False)
class PulseSchedule:
    """
    One decoupling cycle: free evolution τ, then pulse j over a window of width δ, for j = 1..N.

    Pulse j occupies [t_j − δ, t_j) with t_j = j(τ + δ).
    """
    pulses: Tuple[Pulse, ...]
    tau: float
    delta: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if not self.pulses:
            raise ValueError("A pulse schedule needs at least one pulse")
        if self.tau < 0 or self.delta < 0:
            raise ValueError(f"Interval '{self.tau}' and width '{self.delta}' must be nonnegative")
        if self.tau + self.delta == 0:
            raise ValueError("A cycle must have positive duration")
        dims = {pulse.dim for pulse in self.pulses}
        if len(dims) != 1:
            raise DimensionError(f"Pulses act on different dimensions '{sorted(dims)}'")
        for pulse in self.pulses:
            if abs(pulse.width - self.delta) > 1e-15:
                raise ValueError(f"Pulse '{pulse.label}' has width '{pulse.width}', schedule width is '{self.delta}'")

    @classmethod
    def from_labels(cls, labels: Sequence[str], tau: float, delta: float = 0.0) -> "PulseSchedule":
        return cls(tuple(pauli_pulse(label, delta) for label in labels), tau, delta)

    @property
    def N(self) -> int:
        return len(self.pulses)

    @property
    def dim(self) -> int:
        return self.pulses[0].dim

    @property
    def cycle_time(self) -> float:
        """T = N(τ + δ)"""
        return self.N * (self.tau + self.delta)

    @property
    def delta_total(self) -> float:
        """Δ = Nδ"""
        return self.N * self.delta

    def pulse_time(self, j: int) -> float:
        """t_j = j(τ + δ)"""
        return j * (self.tau + self.delta)


@dataclass(frozen=True, eq=False)
class DecouplingGroup:
    """
    Ordered decoupling unitaries D₁ … D_N on the system, with D₁ = I.
    """
    elements: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        elements = tuple(check_unitary(element, "group element") for element in self.elements)
        if not elements:
            raise GroupError("A decoupling group needs at least one element")
        if any(element.shape != elements[0].shape for element in elements):
            raise DimensionError("Group elements have different dimensions")
        if norm(elements[0] - np.eye(elements[0].shape[0]), "operator") > 1e-12:
            raise GroupError("The first group element must be the identity")
        object.__setattr__(self, "elements", elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def embedded(self, dim: int) -> Tuple[np.ndarray, ...]:
        """Elements as D_j ⊗ I on a space of dimension `dim`."""
        if dim == self.dim:
            return self.elements
        if dim % self.dim:
            raise DimensionError(f"Dimension '{dim}' is not a multiple of the group dimension '{self.dim}'")
        identity = np.eye(dim // self.dim)
        return tuple(tensor(element, identity) for element in self.elements)


def cumulative_products(unitaries: Sequence[np.ndarray]) -> List[np.ndarray]:
    """D_j = P_N ⋯ P_j for j = 1..N."""
    products = []
    current = np.eye(unitaries[0].shape[0], dtype=complex)
    for unitary in reversed(unitaries):
        current = current @ unitary
        products.append(current)
    return products[::-1]


def group_from_pulses(schedule: Union[PulseSchedule, Sequence[Pulse]]) -> DecouplingGroup:
    """
    Decoupling group D_j = P_N ⋯ P_j from the ideal pulse unitaries.

    Every element is divided by the global phase of P_N ⋯ P₁ so that D₁ = I exactly.

    Raises:
        GroupError: if P_N ⋯ P₁ is not the identity up to a global phase.
    """
    pulses = schedule.pulses if isinstance(schedule, PulseSchedule) else tuple(schedule)
    products = cumulative_products([pulse.unitary for pulse in pulses])
    identity = np.eye(products[0].shape[0])
    if not equal_up_to_phase(products[0], identity):
        raise GroupError("The pulse product P_N ⋯ P_1 is not the identity up to a phase")
    phase = global_phase(products[0], identity)
    elements = [identity.astype(complex)] + [product / phase for product in products[1:]]
    return DecouplingGroup(tuple(elements))


def universal_group(n_sys: int) -> DecouplingGroup:
    """{I, X, Y, Z} with X = ⊗_j σ_jˣ and so on."""
    if n_sys < 1:
        raise ValueError(f"'{n_sys}' is not a positive qubit count")
    identity = np.eye(2 ** n_sys, dtype=complex)
    return DecouplingGroup((identity,) + tuple(global_pauli(axis, n_sys) for axis in "XYZ"))


def trivial_group(n_sys: int, copies: int = 1) -> DecouplingGroup:
    """{I, …, I} with `copies` elements."""
    return DecouplingGroup(tuple(np.eye(2 ** n_sys, dtype=complex) for _ in range(copies)))


GROUP_TYPES = {

    "universal": {
        "group": universal_group,
        "pulses": universal_pulses,  # Pulse sequence whose cumulative products give the group
    },

    "trivial": {
        "group": lambda n_sys, count=1: trivial_group(n_sys, count),
        "pulses": trivial_pulses,
    },

}


def named_group(name: str, n_sys: int) -> DecouplingGroup:
    if name not in GROUP_TYPES:
        raise GroupError(f"'{name}' is not a known group. Choose one of {tuple(GROUP_TYPES)}")
    return GROUP_TYPES[name]["group"](n_sys)


def project_group(g: DecouplingGroup, a: np.ndarray) -> np.ndarray:
    """
    Unnormalised projection Π_G(A) = Σ_j D_j A D_j†.

    `a` may act on the system, or on system ⊗ bath with the elements embedded as D_j ⊗ I_B.

    Raises:
        DimensionError: if dim(a) is not a multiple of the group dimension.
    """
    a = check_square(a, "a")
    return sum(element @ a @ element.conj().T for element in g.embedded(a.shape[0]))


def project_group_normalized(g: DecouplingGroup, a: np.ndarray) -> np.ndarray:
    """Π_G(A)/N, idempotent for true groups."""
    return project_group(g, a) / g.order


def check_decoupling_condition(g: DecouplingGroup, h_err: np.ndarray,
                               tol: float = CONDITION_TOL) -> ConditionCheck:
    """Whether ‖Π_G(H_err)‖_∞ ≤ tol, with the residual norm."""
    residual = norm(project_group(g, h_err), "operator")
    return ConditionCheck(residual <= tol, residual)


def check_commutation(dd_generators: Sequence[np.ndarray], h_ctrl: np.ndarray,
                      tol: float = CONDITION_TOL) -> ConditionCheck:
    """Whether max_j ‖[H_P^(j), H_ctrl]‖_∞ ≤ tol, with the largest commutator norm."""
    h_ctrl = check_square(h_ctrl, "h_ctrl")
    worst = 0.0
    for generator in dd_generators:
        generator = check_square(generator, "generator")
        if generator.shape != h_ctrl.shape:
            raise DimensionError(f"Generator dimension '{generator.shape[0]}' differs from control dimension '{h_ctrl.shape[0]}'")
        worst = max(worst, norm(commutator(generator, h_ctrl), "operator"))
    if worst > tol:
        logger.debug("Commutation condition fails with residual %.3e", worst)
    return ConditionCheck(worst <= tol, worst)


def is_group(g: DecouplingGroup, atol: float = 1e-10) -> bool:
    """Closure of D_k† D_j within the elements, up to global phase."""
    for left in g.elements:
        for right in g.elements:
            product = left.conj().T @ right
            if not any(equal_up_to_phase(product, element, atol) for element in g.elements):
                return False
    return True
