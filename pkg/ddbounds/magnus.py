__all__ = ["DEFAULT_QUAD_POINTS", "MagnusTerms", "EffectiveHamiltonians", "gauss_legendre",
           "magnus_terms", "truncation_bound", "first_order_effective"]

from dataclasses import dataclass
import logging
from typing import Callable, Dict, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .decoupling import DecouplingGroup, project_group
from .evolution import SwitchedHamiltonian
from .exceptions import ConvergenceError, DimensionError
from .operators import check_square, norm, symmetrize, tensor

logger = logging.getLogger(__name__)

DEFAULT_QUAD_POINTS = 24

Generator = Union[np.ndarray, Callable[[float], np.ndarray], SwitchedHamiltonian]


@dataclass(frozen=True, eq=False)
class MagnusTerms:
    """
    First three Magnus terms in the convention U(T) = exp(−i(Ω₁ + Ω₂ + Ω₃ + …)).

    The terms are only trusted when `convergence_margin` = π − ∫‖H(s)‖_∞ ds is positive.
    """
    omega1: np.ndarray
    omega2: np.ndarray
    omega3: np.ndarray
    convergence_margin: float

    @property
    def converged(self) -> bool:
        return self.convergence_margin > 0

    @property
    def total(self) -> np.ndarray:
        return self.omega1 + self.omega2 + self.omega3

    def partial_sum(self, order: int) -> np.ndarray:
        """Ω₁ + … + Ω_order for order in 1..3."""
        if order not in (1, 2, 3):
            raise ValueError(f"'{order}' is not a Magnus order between 1 and 3")
        return sum((self.omega1, self.omega2, self.omega3)[:order])


class EffectiveHamiltonians(NamedTuple):
    """First-order effective DD Hamiltonian, literal sum and its 1/N average."""
    literal: np.ndarray
    averaged: np.ndarray


def gauss_legendre(a: float, b: float, points: int,
                   breakpoints: Sequence[float] = ()) -> Tuple[np.ndarray, np.ndarray]:
    """
    Composite Gauss–Legendre nodes and weights on [a, b], with one `points`-point rule per
    piece between consecutive breakpoints.
    """
    x, w = np.polynomial.legendre.leggauss(points)
    x, w = (x + 1) / 2, w / 2
    edges = [a] + sorted(c for c in breakpoints if a < c < b) + [b]
    nodes, weights = [], []
    for lo, hi in zip(edges, edges[1:]):
        nodes.append(lo + (hi - lo) * x)
        weights.append((hi - lo) * w)
    return np.concatenate(nodes), np.concatenate(weights)


class _Sampler:
    """Caches generator values and running integrals I(t) = ∫_{t0}^t H."""

    def __init__(self, gen: Callable[[float], np.ndarray], t0: float, points: int,
                 breakpoints: Sequence[float]) -> None:
        self._gen = gen
        self._t0 = t0
        self._points = points
        self._breakpoints = tuple(sorted(breakpoints))
        self._values: Dict[float, np.ndarray] = {}
        self._integrals: Dict[float, np.ndarray] = {}

    def value(self, t: float) -> np.ndarray:
        t = float(t)
        if t not in self._values:
            self._values[t] = np.asarray(self._gen(t), dtype=complex)
        return self._values[t]

    def stack(self, nodes: np.ndarray) -> np.ndarray:
        return np.stack([self.value(t) for t in nodes])

    def integral(self, t: float) -> np.ndarray:
        t = float(t)
        if t not in self._integrals:
            # Restart from the last breakpoint below t so each integral needs one piece
            below = [c for c in self._breakpoints if self._t0 < c < t]
            start = below[-1] if below else self._t0
            base = self.integral(start) if below else 0.0
            nodes, weights = gauss_legendre(start, t, self._points)
            self._integrals[t] = base + np.tensordot(weights, self.stack(nodes), axes=1)
        return self._integrals[t]


def _commutators(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    return left @ right - right @ left


def magnus_terms(gen: Generator, T: Optional[float] = None, quad_points: int = DEFAULT_QUAD_POINTS,
                 breakpoints: Sequence[float] = (), t0: float = 0.0) -> MagnusTerms:
    """
    Ω₁, Ω₂ and Ω₃ of a time-dependent generator by composite Gauss–Legendre quadrature
    over the ordered simplex:

        Ω₁ = ∫ H₁
        Ω₂ = −(i/2) ∫∫_{t₂<t₁} [H₁, H₂]
        Ω₃ = −(1/6) ∫∫∫_{t₃<t₂<t₁} ([H₁, [H₂, H₃]] + [H₃, [H₂, H₁]])

    The innermost integral is carried through I(t) = ∫_{t0}^t H, which is linear in the
    commutators.

    Args:
        gen: Constant matrix, callable t ↦ H(t) or SwitchedHamiltonian.
        T: Duration; defaults to the span of a SwitchedHamiltonian.
        quad_points: Gauss–Legendre points per piece, at least 8.
        breakpoints: Times where the generator may jump. Taken from a SwitchedHamiltonian.
        t0: Start time; taken from a SwitchedHamiltonian.

    Returns:
        The three terms and the convergence margin.

    Raises:
        ValueError: if quad_points < 8 or no duration is known.
    """
    if not isinstance(quad_points, (int, np.integer)):
        raise TypeError(f"'{quad_points}' is not an integer")
    if quad_points < 8:
        raise ValueError(f"'{quad_points}' quadrature points requested, need at least 8")
    if isinstance(gen, SwitchedHamiltonian):
        t0, T = gen.t0, gen.span if T is None else T
        breakpoints = tuple(breakpoints) + gen.breakpoints
    if T is None:
        raise ValueError("A duration T is needed for a plain generator")
    if not callable(gen):
        constant = check_square(gen, "generator")

        def gen(t: float) -> np.ndarray:
            return constant

    t1 = t0 + T
    sampler = _Sampler(gen, t0, quad_points, breakpoints)
    nodes, weights = gauss_legendre(t0, t1, quad_points, breakpoints)
    values = sampler.stack(nodes)
    omega1 = np.tensordot(weights, values, axes=1)

    dim = values.shape[1]
    omega2 = np.zeros((dim, dim), dtype=complex)
    omega3 = np.zeros((dim, dim), dtype=complex)
    for outer, weight, h1 in zip(nodes, weights, values):
        omega2 += weight * _commutators(h1, sampler.integral(outer))
        inner_nodes, inner_weights = gauss_legendre(t0, outer, quad_points, breakpoints)
        h2 = sampler.stack(inner_nodes)
        i2 = np.stack([sampler.integral(t) for t in inner_nodes])
        first = _commutators(h1, _commutators(h2, i2))
        second = _commutators(i2, _commutators(h2, h1))
        omega3 += weight * np.tensordot(inner_weights, first + second, axes=1)

    omega2 = symmetrize(-0.5j * omega2)
    omega3 = symmetrize(-omega3 / 6)
    norms = np.array([norm(value, "operator") for value in values])
    margin = float(np.pi - weights @ norms)
    if margin <= 0:
        logger.warning("Magnus convergence margin is %.6g; the series may diverge", margin)
    return MagnusTerms(symmetrize(omega1), omega2, omega3, margin)


def truncation_bound(k: int, h: float, T: float, A_k: float) -> float:
    """
    Bound A_k·(hT)^k on the Magnus tail Σ_{i≥k} Ω_i, for h = sup‖H(t)‖_∞.

    Raises:
        ConvergenceError: if hT ≥ 1, outside the domain where the bound is proved.
        ValueError: for k < 1 or negative inputs.
    """
    if not isinstance(k, (int, np.integer)):
        raise TypeError(f"'{k}' is not an integer")
    if k < 1 or h < 0 or T < 0 or A_k < 0:
        raise ValueError(f"Invalid truncation bound inputs k={k}, h={h}, T={T}, A_k={A_k}")
    if h * T >= 1:
        raise ConvergenceError(f"hT = {h * T:.6g} is not below 1")
    return A_k * (h * T) ** k


def first_order_effective(g: DecouplingGroup, h_err: np.ndarray, h_bath: np.ndarray) -> EffectiveHamiltonians:
    """
    First-order effective DD Hamiltonian Σ_j D_j(H_err + H_B)D_j† = Π_G(H_err) + N·H_B and its
    average over the N group elements.

    Args:
        g: Decoupling group on the system.
        h_err: Error Hamiltonian on system ⊗ bath.
        h_bath: Bath Hamiltonian, either on the bath or already embedded as I_S ⊗ H_B.
    """
    h_err = check_square(h_err, "h_err")
    h_bath = check_square(h_bath, "h_bath")
    dim = h_err.shape[0]
    if h_bath.shape[0] != dim:
        if h_bath.shape[0] * g.dim != dim:
            raise DimensionError(f"Bath dimension '{h_bath.shape[0]}' does not fit '{dim}'")
        h_bath = tensor(np.eye(g.dim), h_bath)
    literal = project_group(g, h_err) + g.order * h_bath
    return EffectiveHamiltonians(literal, literal / g.order)
