__all__ = ["MARGIN_TOL", "CHECK_NAMES", "CSV_COLUMNS", "DEFAULT_CONSTANTS_FILE", "BoundConstants",
           "BoundCheck", "Lemma2Result", "Lemma3Result", "PhaseDecomposition", "BoundReport",
           "load_constants", "save_constants", "excess", "undecoupled_bound", "phi_e_bound",
           "pdd_bound", "pdd_bound_approx", "pdd_fidelity_floor_approx", "cycle_budget",
           "absorbed_constant", "d_dd_bound", "lemma2_bound", "lemma3_check", "d_dd_chain",
           "fidelity_floor", "frame_beta", "csv_cell", "phase_decomposition",
           "undecoupled_series", "is_monotone", "assemble_report"]

from dataclasses import dataclass, field
from datetime import datetime, timezone
import json
from math import e, expm1, factorial
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from .decoupling import DecouplingGroup, check_decoupling_condition, project_group
from .evolution import (DEFAULT_STEPS, CycleResult, PddResult, StateDistances,
                        _secular_generators, time_ordered_exp)
from .exceptions import ConfigError
from .operators import (adjoint_map, check_square, dagger, nested_commutator, norm,
                        symmetrize, unitary_log)

logger = logging.getLogger(__name__)

MARGIN_TOL = 1e-9

DEFAULT_CONSTANTS_FILE = Path(__file__).parent / "constants.json"

# Order of the per-inequality columns in reports
CHECK_NAMES = ("phi_e", "pdd", "d_dd", "d_dd_refined", "partial_trace", "triangle",
               "fidelity_floor", "fuchs_van_de_graaf", "lemma2", "lemma3", "pulse",
               "undecoupled", "c_term", "do_nothing")

_SCALAR_FIELDS = ("J", "beta", "T", "tau", "delta", "N", "m", "T_long",
                  "phi_e_norm", "phi_pdd_norm", "d_dd", "d_s", "d_tot", "d_id", "f_q",
                  "power_residual", "phi_e_bound", "pdd_bound", "pdd_bound_approx",
                  "d_dd_bound", "fidelity_floor", "decoupled", "seed")

CSV_COLUMNS = (_SCALAR_FIELDS
               + tuple(f"{name}_{part}" for name in CHECK_NAMES
                       for part in ("bound", "actual", "margin", "passed", "vacuous"))
               + ("passed", "timestamp", "scenario"))


@dataclass(frozen=True)
class BoundConstants:
    """
    Constants of the error-phase bounds.

    Args:
        c: Second-order constant of the single-cycle and PDD bounds.
        d: Per-segment constant of the C-term bound ‖C‖ ≤ N·d·(τJ)².
        c_prime: Scaling constant d(T − Δ)/(√N·T) of the cycle budget.
        truncation: Magnus tail constants A_k by order k.
        families: Calibrated c per pulse family, keyed by `family_key(N, Δ)`.
        provenance: How the values were obtained.
    """
    c: float = 3.0
    d: float = 3.0
    c_prime: float = 1.5
    truncation: Dict[int, float] = field(default_factory=lambda: {1: 1.0, 2: 2.0, 3: 2.0})
    families: Dict[str, float] = field(default_factory=dict)
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = [self.c, self.d, self.c_prime, *self.truncation.values(), *self.families.values()]
        if not all(np.isfinite(value) and value >= 0 for value in values):
            raise ConfigError("Bound constants must be finite and nonnegative")

    @staticmethod
    def family_key(N: int, delta_total: float) -> str:
        return f"N={N},Delta={delta_total:.6g}"

    def c_for(self, N: Optional[int] = None, delta_total: float = 0.0) -> float:
        """c of a pulse family, falling back to the global c."""
        if N is None:
            return self.c
        return self.families.get(self.family_key(N, delta_total), self.c)

    @property
    def calibrated(self) -> bool:
        """True only for constants written by `calibrate`."""
        return bool(self.provenance.get("calibrated", False))

    def A(self, k: int) -> float:
        if k not in self.truncation:
            raise KeyError(f"No truncation constant for order '{k}'")
        return self.truncation[k]

    def to_dict(self) -> Dict[str, Any]:
        return {"c": self.c, "d": self.d, "c_prime": self.c_prime,
                "truncation": {str(k): value for k, value in sorted(self.truncation.items())},
                "families": dict(sorted(self.families.items())),
                "provenance": self.provenance}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BoundConstants":
        try:
            return cls(c=float(data["c"]), d=float(data["d"]), c_prime=float(data["c_prime"]),
                       truncation={int(k): float(v) for k, v in data.get("truncation", {}).items()},
                       families={str(k): float(v) for k, v in data.get("families", {}).items()},
                       provenance=dict(data.get("provenance", {})))
        except (KeyError, TypeError, ValueError) as error:
            raise ConfigError(f"Invalid constants: {error}") from error


def load_constants(path: Optional[Union[str, Path]] = None) -> BoundConstants:
    """Reads a constants file; the packaged default when no path is given."""
    path = DEFAULT_CONSTANTS_FILE if path is None else Path(path)
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as error:
        raise ConfigError(f"Cannot read constants file '{path}': {error}") from error
    return BoundConstants.from_dict(data)


def save_constants(constants: BoundConstants, path: Union[str, Path]) -> None:
    with open(path, "w") as f:
        json.dump(constants.to_dict(), f, indent=2)
        f.write("\n")


@dataclass(frozen=True)
class BoundCheck:
    """
    One inequality: `actual` ≤ `bound` for upper bounds, `actual` ≥ `bound` for floors.

    `passed` is margin ≥ −1e-9. `vacuous` flags bounds no better than a trivial cap.
    """
    name: str
    bound: float
    actual: float
    margin: float
    passed: bool
    vacuous: bool = False

    @classmethod
    def upper(cls, name: str, bound: float, actual: float, cap: Optional[float] = None) -> "BoundCheck":
        margin = bound - actual
        return cls(name, float(bound), float(actual), float(margin), bool(margin >= -MARGIN_TOL),
                   bool(cap is not None and bound >= cap))

    @classmethod
    def lower(cls, name: str, floor: float, actual: float, cap: Optional[float] = None) -> "BoundCheck":
        margin = actual - floor
        return cls(name, float(floor), float(actual), float(margin), bool(margin >= -MARGIN_TOL),
                   bool(cap is not None and floor <= cap))

    def to_dict(self) -> Dict[str, Any]:
        return {"bound": self.bound, "actual": self.actual, "margin": self.margin,
                "passed": self.passed, "vacuous": self.vacuous}


def excess(x: float) -> float:
    """(e^x − 1)/x − 1, by its Taylor series below 1e-3."""
    if x < 0:
        raise ValueError(f"'{x}' is negative")
    if x < 1e-3:
        return x / 2 + x ** 2 / 6 + x ** 3 / 24
    return expm1(x) / x - 1


def _check_nonnegative(**values: float) -> None:
    for name, value in values.items():
        if value < 0:
            raise ValueError(f"'{name}' must be nonnegative, got '{value}'")


def undecoupled_bound(J: float, beta: float, T: float, decoupled: bool = True) -> float:
    """JT·min[1, (e^{2βT} − 1)/(2βT) − 1]; without the cap of 1 unless the decoupling condition holds."""
    _check_nonnegative(J=J, beta=beta, T=T)
    factor = excess(2 * beta * T)
    return J * T * (min(1.0, factor) if decoupled else factor)


def phi_e_bound(J: float, beta: float, T: float, delta_total: float, consts: BoundConstants,
                N: Optional[int] = None) -> float:
    """
    Single-cycle bound c(JT)² + JΔ + JT·min[1, (e^{2βT} − 1)/(2βT) − 1].

    Args:
        J: ‖H_err‖_∞.
        beta: ‖H_sec‖_∞.
        T: Cycle time.
        delta_total: Total pulse width Δ = Nδ.
        consts: Bound constants.
        N: Pulse count, selects a per-family c when given.
    """
    _check_nonnegative(J=J, beta=beta, T=T, delta_total=delta_total)
    c = consts.c_for(N, delta_total)
    return c * (J * T) ** 2 + J * delta_total + undecoupled_bound(J, beta, T)


def pdd_bound(J: float, beta: float, T_long: float, m: int, N_long: int, delta: float,
              consts: BoundConstants, N: Optional[int] = None) -> float:
    """
    PDD bound c(J·T_long)²/m + N_long·J·δ + J·T_long·min[1, (e^{2βT_long/m} − 1)/(2βT_long/m) − 1].
    """
    if m < 1:
        raise ValueError(f"'{m}' is not a positive cycle count")
    _check_nonnegative(J=J, beta=beta, T_long=T_long, delta=delta)
    c = consts.c_for(N, N * delta if N is not None else 0.0)
    return c * (J * T_long) ** 2 / m + N_long * J * delta + undecoupled_bound(J, beta, T_long / m) * m


def pdd_bound_approx(J: float, beta: float, T: float, m: int, consts: BoundConstants) -> float:
    """Zero-width, small-βT form m(cJ² + Jβ)T², with T the cycle time."""
    return m * (consts.c * J ** 2 + J * beta) * T ** 2


def pdd_fidelity_floor_approx(d_id: float, m: int, J: float, beta: float, T: float, c: float) -> float:
    """1 − D_id − 2m(cJ² + Jβ)T²"""
    return 1 - d_id - 2 * m * (c * J ** 2 + J * beta) * T ** 2


def cycle_budget(J: float, beta: float, T: float, c: float) -> float:
    """Cycle count [2(cJ² + Jβ)T²]⁻¹ at which the approximate PDD error reaches order one."""
    denominator = 2 * (c * J ** 2 + J * beta) * T ** 2
    return float("inf") if denominator == 0 else 1 / denominator


def absorbed_constant(d: float, T: float, delta_total: float, N: int) -> float:
    """c′ = d(T − Δ)/(√N·T)"""
    if T <= 0 or N < 1:
        raise ValueError(f"Need T > 0 and N ≥ 1, got T={T}, N={N}")
    return d * (T - delta_total) / (np.sqrt(N) * T)


def d_dd_bound(phi_norm: float) -> float:
    """min[1, ½(e^{2‖Φ‖} − 1)]"""
    return min(1.0, 0.5 * expm1(2 * phi_norm))


def fidelity_floor(d_id: float, phi_e_norm: float) -> float:
    """1 − D_id − min[1, ½(e^{2‖Φ‖} − 1)]; negative values are returned as they are."""
    return 1 - d_id - d_dd_bound(phi_e_norm)


@dataclass(frozen=True)
class Lemma2Result:
    check: BoundCheck
    refined: Optional[BoundCheck]

    @property
    def passed(self) -> bool:
        return self.check.passed and (self.refined is None or self.refined.passed)


def lemma2_bound(a: np.ndarray, b: np.ndarray, norm_kind: str = "operator") -> Lemma2Result:
    """
    ‖e^{−iA}Be^{iA} − B‖ ≤ ‖B‖·min[2, e^{2‖A‖_∞} − 1], plus 2‖B‖(e − 1)‖A‖_∞ when 2‖A‖_∞ ≤ 1.
    """
    b = check_square(b, "b")
    a_norm = norm(a, "operator")
    b_norm = norm(b, norm_kind)
    actual = norm(adjoint_map(a, b) - b, norm_kind)
    bound = b_norm * min(2.0, expm1(2 * a_norm))
    check = BoundCheck.upper("lemma2", bound, actual, cap=2 * b_norm if b_norm > 0 else None)
    refined = None
    if 2 * a_norm <= 1:
        refined = BoundCheck.upper("lemma2_refined", 2 * b_norm * (e - 1) * a_norm, actual)
    return Lemma2Result(check, refined)


@dataclass(frozen=True, eq=False)
class Lemma3Result:
    """
    ‖H_eff‖ ≤ ⟨‖V‖⟩ ≤ sup‖V‖ for exp(−iT·H_eff) = U₀†(T)U(T).
    """
    h_eff: np.ndarray
    average: float
    sup: float
    check: BoundCheck

    @property
    def passed(self) -> bool:
        return self.check.passed and self.average <= self.sup + MARGIN_TOL


def lemma3_check(gen0, perturbation, T: float, steps: int = DEFAULT_STEPS,
                 norm_kind: str = "operator") -> Lemma3Result:
    """
    Effective interaction strength of a perturbation V on top of H₀.

    Both generators are constant matrices or callables t ↦ H(t) on [0, T]. Time-dependent
    inputs are sampled at the `steps` midpoints, and the inequality is checked for that
    piecewise-constant dynamics, for which it holds exactly.

    Raises:
        BranchCutError: if U₀†U has an eigenphase at ±π.
    """
    if T <= 0:
        raise ValueError(f"'{T}' is not a positive duration")
    constant = not callable(gen0) and not callable(perturbation)

    def as_callable(gen):
        return gen if callable(gen) else (lambda t: gen)

    h0, v = as_callable(gen0), as_callable(perturbation)
    if constant:
        u0 = time_ordered_exp(check_square(gen0), 0.0, T)
        u = time_ordered_exp(check_square(gen0) + check_square(perturbation), 0.0, T)
        norms = [norm(perturbation, norm_kind)]
    else:
        u0 = time_ordered_exp(h0, 0.0, T, steps)
        u = time_ordered_exp(lambda t: h0(t) + v(t), 0.0, T, steps)
        midpoints = (np.arange(steps) + 0.5) * T / steps
        norms = [norm(v(t), norm_kind) for t in midpoints]
    h_eff = unitary_log(dagger(u0) @ u) / T
    average, sup = float(np.mean(norms)), float(np.max(norms))
    check = BoundCheck.upper("lemma3", average, norm(h_eff, norm_kind))
    return Lemma3Result(h_eff, average, sup, check)


def d_dd_chain(phi_e_norm: float, distances: StateDistances) -> Dict[str, BoundCheck]:
    """
    The distance chain: D_DD ≤ min[1, ½(e^{2‖Φ‖} − 1)] (and ≤ 2‖Φ‖ when 2‖Φ‖ ≤ 1),
    D_S ≤ D_tot, D_tot ≤ D_DD + D_id and 1 − D_S ≤ F_Q ≤ √(1 − D_S²).
    """
    checks = {"d_dd": BoundCheck.upper("d_dd", d_dd_bound(phi_e_norm), distances.d_dd, cap=1.0)}
    if 2 * phi_e_norm <= 1:
        checks["d_dd_refined"] = BoundCheck.upper("d_dd_refined", 2 * phi_e_norm, distances.d_dd)
    checks["partial_trace"] = BoundCheck.upper("partial_trace", distances.d_tot, distances.d_s)
    checks["triangle"] = BoundCheck.upper("triangle", distances.d_dd + distances.d_id, distances.d_tot)
    lower = BoundCheck.lower("fuchs_van_de_graaf", 1 - distances.d_s, distances.f_q)
    upper = BoundCheck.upper("fuchs_van_de_graaf", np.sqrt(max(0.0, 1 - distances.d_s ** 2)), distances.f_q)
    checks["fuchs_van_de_graaf"] = lower if lower.margin < upper.margin else upper
    return checks


@dataclass(frozen=True, eq=False)
class PhaseDecomposition:
    """
    Split of the first-order cycle phase: Φ_free = Φ_dec + Φ_undec + C, plus Φ_pulse.

    Φ_undec is the exact integral Σ_j ∫ (U_sec(t)† D_j H_err D_j† U_sec(t) − D_j H_err D_j†) dt
    over the free intervals.
    """
    phi_pulse: np.ndarray
    phi_free: np.ndarray
    phi_dec: np.ndarray
    phi_undec: np.ndarray
    c_term: np.ndarray
    c_bound: float
    decoupled: bool
    beta_frame: float
    checks: Dict[str, BoundCheck]


def _free_integral(generator: np.ndarray, operator: np.ndarray, tau: float) -> np.ndarray:
    """∫_0^τ e^{isH} X e^{−isH} ds, exactly in the eigenbasis of H."""
    eigvals, eigvecs = np.linalg.eigh(generator)
    rotated = dagger(eigvecs) @ operator @ eigvecs
    omega = eigvals[:, None] - eigvals[None, :]
    kernel = tau * np.exp(0.5j * omega * tau) * np.sinc(omega * tau / (2 * np.pi))
    return eigvecs @ (rotated * kernel) @ dagger(eigvecs)


def frame_beta(model) -> float:
    """
    Strength of the secular frame generators: ‖H_sec‖_∞, or ‖H_B‖_∞ when larger and the
    control is off during finite-width pulses.
    """
    free_sec, pulse_sec = _secular_generators(model)
    beta = norm(free_sec, "operator")
    if model.schedule.delta > 0:
        beta = max(beta, norm(pulse_sec, "operator"))
    return beta


def csv_cell(value: Any) -> str:
    """Lower-case booleans, round-trip float reprs, str for the rest."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return "" if value is None else str(value)


def phase_decomposition(cycle: CycleResult, g: Optional[DecouplingGroup] = None,
                        consts: Optional[BoundConstants] = None) -> PhaseDecomposition:
    """
    Decomposes the first-order phase of a cycle and checks ‖Φ_pulse‖ ≤ ΔJ,
    ‖Φ_undec‖ ≤ JT·min[1, (e^{2βT} − 1)/(2βT) − 1], ‖C‖ ≤ N·d·(τJ)² and ‖Φ_free‖ ≤ J(T − Δ).

    β here is the strength of the frame generators, which during pulse windows without
    control is the bath Hamiltonian alone.
    """
    g = cycle.group if g is None else g
    consts = BoundConstants() if consts is None else consts
    model = cycle.model
    schedule, split = model.schedule, model.split
    tau, delta, N, T = schedule.tau, schedule.delta, schedule.N, schedule.cycle_time
    h_err = split.h_err
    dim = h_err.shape[0]
    elements = g.embedded(dim)
    J = norm(h_err, "operator")
    free_sec, _ = _secular_generators(model)
    beta_frame = frame_beta(model)

    phi_pulse = delta * sum(element @ pulse @ dagger(element)
                            for element, pulse in zip(elements, cycle.pulse_phases))
    phi_free = tau * sum(element @ free @ dagger(element)
                         for element, free in zip(elements, cycle.free_phases))
    phi_dec = tau * project_group(g, h_err)
    phi_undec = np.zeros((dim, dim), dtype=complex)
    if tau > 0:
        for element, frame in zip(elements, cycle.frames):
            rotated_err = element @ h_err @ dagger(element)
            integral = _free_integral(free_sec, rotated_err, tau)
            phi_undec += dagger(frame) @ integral @ frame - tau * rotated_err
    phi_pulse, phi_free, phi_dec, phi_undec = (symmetrize(phi) for phi in (phi_pulse, phi_free, phi_dec, phi_undec))
    c_term = phi_free - phi_dec - phi_undec
    c_bound = N * consts.d * (tau * J) ** 2
    decoupled = check_decoupling_condition(g, h_err).satisfied

    checks = {
        "pulse": BoundCheck.upper("pulse", schedule.delta_total * J, norm(phi_pulse, "operator")),
        "undecoupled": BoundCheck.upper("undecoupled", undecoupled_bound(J, beta_frame, T, decoupled),
                                        norm(phi_undec, "operator"), cap=J * T),
        "c_term": BoundCheck.upper("c_term", c_bound, norm(c_term, "operator")),
        "do_nothing": BoundCheck.upper("do_nothing", J * (T - schedule.delta_total), norm(phi_free, "operator")),
    }
    return PhaseDecomposition(phi_pulse, phi_free, phi_dec, phi_undec, c_term, c_bound,
                              decoupled, beta_frame, checks)


def undecoupled_series(cycle: CycleResult, order: int = 8) -> np.ndarray:
    """
    Truncated series Σ_j Σ_{n=1}^{order} f_{n,j} [_n H_sec, D_j H_err D_j†] for Φ_undec, with
    f_{n,j} = iⁿ/(n + 1)! · [(t_{j−1} + τ)^{n+1} − t_{j−1}^{n+1}] in the convention
    U_sec(t) = e^{−itH_sec}.

    Raises:
        ValueError: when the secular frame changes generator during pulse windows.
    """
    model = cycle.model
    schedule, split = model.schedule, model.split
    free_sec, pulse_sec = _secular_generators(cycle.model)
    if schedule.delta > 0 and norm(free_sec - pulse_sec, "operator") > 0:
        raise ValueError("The series needs one secular generator throughout the cycle")
    h_err = split.h_err
    elements = cycle.group.embedded(h_err.shape[0])
    total = np.zeros_like(h_err)
    for j, element in enumerate(elements):
        start = j * (schedule.tau + schedule.delta)
        rotated_err = element @ h_err @ dagger(element)
        for n in range(1, order + 1):
            coefficient = (1j ** n) * ((start + schedule.tau) ** (n + 1) - start ** (n + 1)) / factorial(n + 1)
            total = total + coefficient * nested_commutator(free_sec, rotated_err, n)
    return symmetrize(total)


def is_monotone(fn: Callable[..., float], axis: str, values: Sequence[float], **fixed) -> bool:
    """Whether fn(axis=value, **fixed) is nondecreasing along the sorted values."""
    results = [fn(**{axis: value}, **fixed) for value in sorted(values)]
    return all(later >= earlier * (1 - 1e-12) - 1e-15 for earlier, later in zip(results, results[1:]))


@dataclass(frozen=True, eq=False)
class BoundReport:
    """
    Measured quantities of a run paired with every applicable bound.

    A check is absent from `checks` when its inequality does not apply (for instance the
    refined D_DD bound when 2‖Φ‖ > 1, or the error-phase bounds without the decoupling
    condition).
    """
    J: float
    beta: float
    T: float
    tau: float
    delta: float
    N: int
    m: int
    T_long: float
    phi_e_norm: float
    phi_pdd_norm: float
    d_dd: float
    d_s: float
    d_tot: float
    d_id: float
    f_q: float
    power_residual: float
    phi_e_bound: float
    pdd_bound: float
    pdd_bound_approx: float
    d_dd_bound: float
    fidelity_floor: float
    decoupled: bool
    seed: int
    checks: Dict[str, BoundCheck]
    scenario: Dict[str, Any]
    timestamp: str = ""

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks.values())

    @property
    def failures(self) -> List[str]:
        return [name for name, check in self.checks.items() if not check.passed]

    def to_dict(self) -> Dict[str, Any]:
        data = {name: getattr(self, name) for name in _SCALAR_FIELDS}
        data["checks"] = {name: self.checks[name].to_dict() for name in CHECK_NAMES if name in self.checks}
        data["passed"] = self.passed
        data["scenario"] = self.scenario
        data["timestamp"] = self.timestamp
        return data

    def to_row(self) -> Dict[str, str]:
        """CSV cells keyed by `CSV_COLUMNS`; floats use their round-trip repr."""
        row = {name: csv_cell(getattr(self, name)) for name in _SCALAR_FIELDS}
        for name in CHECK_NAMES:
            check = self.checks.get(name)
            for part in ("bound", "actual", "margin", "passed", "vacuous"):
                row[f"{name}_{part}"] = "" if check is None else csv_cell(getattr(check, part))
        row["passed"] = csv_cell(self.passed)
        row["timestamp"] = self.timestamp
        row["scenario"] = json.dumps(self.scenario, sort_keys=True)
        return row


def assemble_report(pdd: PddResult, distances: StateDistances, consts: BoundConstants,
                    rho0: Optional[np.ndarray] = None, timestamp: Optional[str] = None) -> BoundReport:
    """
    Evaluates every bound for a PDD run and its final-state distances.

    Args:
        pdd: The run.
        distances: Final-state distances of the run.
        consts: Bound constants.
        rho0: Initial state ρ_S ⊗ ρ_B for the trace-norm adjoint-bound check.
        timestamp: ISO timestamp; the current UTC time when omitted.
    """
    cycle = pdd.cycle
    schedule = cycle.model.schedule
    decomposition = phase_decomposition(cycle, consts=consts)
    J = cycle.strengths.J
    beta = decomposition.beta_frame
    T, m, N = schedule.cycle_time, pdd.m, schedule.N
    phi_e_norm, phi_pdd_norm = cycle.phi_e_norm, pdd.phi_pdd_norm

    single = phi_e_bound(J, beta, T, schedule.delta_total, consts, N)
    periodic = pdd_bound(J, beta, pdd.t_long, m, m * N, schedule.delta, consts, N)
    floor = fidelity_floor(distances.d_id, phi_pdd_norm)

    checks: Dict[str, BoundCheck] = {}
    if decomposition.decoupled:
        checks["phi_e"] = BoundCheck.upper("phi_e", single, phi_e_norm, cap=J * T)
        checks["pdd"] = BoundCheck.upper("pdd", periodic, phi_pdd_norm, cap=np.pi)
    checks.update(d_dd_chain(phi_pdd_norm, distances))
    checks["fidelity_floor"] = BoundCheck.lower("fidelity_floor", floor, distances.f_q, cap=0.0)
    if rho0 is not None:
        checks["lemma2"] = lemma2_bound(cycle.phi_e, rho0, "trace").check
    segment_norm = max(norm(phase, "operator") for pair in cycle.segment_phases for phase in pair)
    checks["lemma3"] = BoundCheck.upper("lemma3", J, segment_norm)
    checks.update(decomposition.checks)

    failures = [name for name, check in checks.items() if not check.passed]
    if failures:
        logger.warning("Bound violations: %s", ", ".join(failures))
    for name, check in checks.items():
        if check.vacuous:
            logger.info("Bound '%s' is vacuous (%.6g)", name, check.bound)

    scenario = cycle.scenario
    return BoundReport(
        J=J, beta=beta, T=T, tau=schedule.tau, delta=schedule.delta, N=N, m=m, T_long=pdd.t_long,
        phi_e_norm=phi_e_norm, phi_pdd_norm=phi_pdd_norm, d_dd=distances.d_dd, d_s=distances.d_s,
        d_tot=distances.d_tot, d_id=distances.d_id, f_q=distances.f_q,
        power_residual=pdd.power_residual, phi_e_bound=single, pdd_bound=periodic,
        pdd_bound_approx=pdd_bound_approx(J, beta, T, m, consts),
        d_dd_bound=d_dd_bound(phi_pdd_norm), fidelity_floor=floor,
        decoupled=decomposition.decoupled, seed=scenario.seed, checks=checks,
        scenario=scenario.to_dict(),
        timestamp=datetime.now(timezone.utc).isoformat() if timestamp is None else timestamp)
