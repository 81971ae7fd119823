__all__ = ["DEFAULT_STEPS", "Segment", "SwitchedHamiltonian", "CycleResult", "CycleTrace",
           "PddResult", "StateDistances", "propagate_switched", "time_ordered_exp",
           "cycle_hamiltonian", "run_cycle", "run_pdd", "interaction_generator",
           "effective_hamiltonian_m", "final_state_distances"]

from dataclasses import dataclass
from functools import cached_property
import logging
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .decoupling import check_commutation, cumulative_products
from .exceptions import (BranchCutError, CommutationError, ConvergenceError,
                         DimensionError, SegmentationError)
from .hamiltonians import StrengthReport, strengths
from .operators import (check_square, check_unitary, dagger,
                        expm_hermitian, global_phase, norm, partial_trace_bath,
                        symmetrize, tensor, trace_distance, fidelity, unitary_log)
from .scenario import Model, SimulationScenario, build_model

logger = logging.getLogger(__name__)

# Midpoint steps per segment for time-dependent generators
DEFAULT_STEPS = 200

# Midpoint exponentials evaluated per batched eigendecomposition
_BATCH = 512

Generator = Union[np.ndarray, Callable[[float], np.ndarray]]


@dataclass(frozen=True, eq=False)
class Segment:
    """Generator acting on [t_start, t_end): a constant Hermitian matrix or a callable t ↦ H(t)."""
    t_start: float
    t_end: float
    generator: Generator

    @property
    def span(self) -> float:
        return self.t_end - self.t_start

    @property
    def is_constant(self) -> bool:
        return not callable(self.generator)

    def __call__(self, t: float) -> np.ndarray:
        return self.generator(t) if callable(self.generator) else self.generator


@dataclass(frozen=True, eq=False)
class SwitchedHamiltonian:
    """
    Piecewise generator over contiguous segments. Calling it evaluates the generator at t,
    with each segment owning its half-open interval and the last one its end point.

    Raises:
        SegmentationError: for empty, non-positive, overlapping or gapped segments.
    """
    segments: Tuple[Segment, ...]

    def __post_init__(self) -> None:
        segments = tuple(self.segments)
        if not segments:
            raise SegmentationError("A switched Hamiltonian needs at least one segment")
        for segment in segments:
            if not segment.t_end > segment.t_start:
                raise SegmentationError(f"Segment '[{segment.t_start}, {segment.t_end})' has non-positive duration")
        for previous, current in zip(segments, segments[1:]):
            scale = max(1.0, abs(previous.t_end))
            if abs(previous.t_end - current.t_start) > 1e-12 * scale:
                kind = "overlap" if current.t_start < previous.t_end else "gap"
                raise SegmentationError(f"Segments leave a {kind} between '{previous.t_end}' and '{current.t_start}'")
        object.__setattr__(self, "segments", segments)

    @classmethod
    def from_spans(cls, generators: Sequence[Generator], spans: Sequence[float],
                   t0: float = 0.0) -> "SwitchedHamiltonian":
        """Builds contiguous segments of the given durations starting at t0."""
        segments, start = [], t0
        for generator, span in zip(generators, spans):
            segments.append(Segment(start, start + span, generator))
            start += span
        return cls(tuple(segments))

    @property
    def t0(self) -> float:
        return self.segments[0].t_start

    @property
    def t1(self) -> float:
        return self.segments[-1].t_end

    @property
    def span(self) -> float:
        return self.t1 - self.t0

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return tuple(segment.t_start for segment in self.segments[1:])

    def __call__(self, t: float) -> np.ndarray:
        starts = [segment.t_start for segment in self.segments]
        index = int(np.searchsorted(starts, t, side="right")) - 1
        return self.segments[min(max(index, 0), len(self.segments) - 1)](t)


def _expm_stack(stack: np.ndarray, h: float) -> np.ndarray:
    eigvals, eigvecs = np.linalg.eigh(stack)
    phases = np.exp(-1j * h * eigvals)[:, None, :]
    return (eigvecs * phases) @ np.conj(np.swapaxes(eigvecs, 1, 2))


def time_ordered_exp(gen: Generator, t0: float, t1: float, steps: int = DEFAULT_STEPS) -> np.ndarray:
    """
    Midpoint exponential product Π_k exp(−i·h·gen(t0 + (k + ½)h)), latest factor leftmost.

    The product is exactly unitary and second-order accurate in the step h. A constant
    generator gives the exact exponential for any number of steps.

    Args:
        gen: Constant Hermitian matrix or callable t ↦ H(t).
        t0: Start time.
        t1: End time.
        steps: Number of midpoint steps.

    Raises:
        TypeError: if steps is not an integer.
        ValueError: if steps < 1.
    """
    if not isinstance(steps, (int, np.integer)):
        raise TypeError(f"'{steps}' is not an integer")
    if steps < 1:
        raise ValueError(f"'{steps}' steps requested, need at least 1")
    if not callable(gen):
        return expm_hermitian(gen, t1 - t0)
    h = (t1 - t0) / steps
    midpoints = t0 + (np.arange(steps) + 0.5) * h
    dim = check_square(gen(midpoints[0]), "generator").shape[0]
    result = np.eye(dim, dtype=complex)
    for start in range(0, steps, _BATCH):
        stack = np.stack([np.asarray(gen(t), dtype=complex) for t in midpoints[start:start + _BATCH]])
        stack = 0.5 * (stack + np.conj(np.swapaxes(stack, 1, 2)))
        for factor in _expm_stack(stack, h):
            result = factor @ result
    return result


def propagate_switched(sh: SwitchedHamiltonian, steps_per_segment: int = DEFAULT_STEPS) -> np.ndarray:
    """
    U(t_N, t_0) = U(t_N, t_{N−1}) ⋯ U(t_1, t_0) over the segments of a switched Hamiltonian.

    Constant segments use exact Hermitian exponentials; time-dependent segments use
    `time_ordered_exp` with `steps_per_segment` steps.
    """
    result = None
    for segment in sh.segments:
        if segment.is_constant:
            factor = expm_hermitian(segment.generator, segment.span)
        else:
            factor = time_ordered_exp(segment.generator, segment.t_start, segment.t_end, steps_per_segment)
        result = factor if result is None else factor @ result
        logger.debug("Propagated segment [%.6g, %.6g)", segment.t_start, segment.t_end)
    return result


@dataclass(frozen=True, eq=False)
class CycleResult:
    """
    Propagators of one decoupling cycle.

    `u_sec` is q·(U_ctrl ⊗ U_B), where q is the global phase of the realised pulse product
    P_N ⋯ P₁, so that u_total = u_sec · u_err and u_err is close to the identity.
    `frames` holds U_sec(t) (without q) at the start of each free interval.
    """
    model: Model
    u_total: np.ndarray
    u_sec: np.ndarray
    u_err: np.ndarray
    phi_e: np.ndarray
    free_phases: Tuple[np.ndarray, ...]
    pulse_phases: Tuple[np.ndarray, ...]
    frames: Tuple[np.ndarray, ...]
    pulse_phase: complex
    u_ctrl: np.ndarray
    u_bath: np.ndarray

    @property
    def scenario(self) -> SimulationScenario:
        return self.model.scenario

    @property
    def group(self):
        return self.model.group

    @property
    def cycle_time(self) -> float:
        return self.model.schedule.cycle_time

    @property
    def dim_bath(self) -> int:
        return self.model.split.dim_bath

    @property
    def segment_phases(self) -> Tuple[Tuple[np.ndarray, np.ndarray], ...]:
        """Pairs (H_err^(j), H_err^{P_j}) for j = 1..N."""
        return tuple(zip(self.free_phases, self.pulse_phases))

    @property
    def u_err_raw(self) -> np.ndarray:
        """U_sec(T)†U(T) with the pulse product phase kept."""
        return self.pulse_phase * self.u_err

    @property
    def u_ideal(self) -> np.ndarray:
        """Ideal gate slice exp(−i(θ/cycles)R) on the system."""
        return self.model.ideal_ctrl

    @cached_property
    def strengths(self) -> StrengthReport:
        return strengths(self.model.split)

    @cached_property
    def phi_e_norm(self) -> float:
        return norm(self.phi_e, "operator")


@dataclass(frozen=True)
class CycleTrace:
    """Per-cycle diagnostics of a PDD run."""
    k: int
    deviation: float
    power_residual: float


@dataclass(frozen=True, eq=False)
class PddResult:
    """
    m back-to-back cycles with the gate spread over all of them.

    `u_err` is the true error propagator U_sec(mT)†U(mT) and `phi_pdd` its logarithm.
    `u_err_periodic` is U_err(T)^m; it matches `u_err` only when the secular cycle
    propagator commutes with the cycle error propagator.
    """
    cycle: CycleResult
    m: int
    u_total: np.ndarray
    u_sec: np.ndarray
    u_err: np.ndarray
    u_err_periodic: np.ndarray
    phi_pdd: np.ndarray
    trace: Tuple[CycleTrace, ...]

    @property
    def model(self) -> Model:
        return self.cycle.model

    @property
    def scenario(self) -> SimulationScenario:
        return self.cycle.scenario

    @property
    def t_long(self) -> float:
        return self.m * self.cycle.cycle_time

    @property
    def dim_bath(self) -> int:
        return self.cycle.dim_bath

    @cached_property
    def u_ideal(self) -> np.ndarray:
        return np.linalg.matrix_power(self.cycle.u_ideal, self.m)

    @cached_property
    def u_ctrl(self) -> np.ndarray:
        return np.linalg.matrix_power(self.cycle.u_ctrl, self.m)

    @cached_property
    def u_bath(self) -> np.ndarray:
        return np.linalg.matrix_power(self.cycle.u_bath, self.m)

    @cached_property
    def power_residual(self) -> float:
        """‖U_err(mT) − U_err(T)^m‖_∞"""
        return norm(self.u_err - self.u_err_periodic, "operator")

    @cached_property
    def phi_pdd_norm(self) -> float:
        return norm(self.phi_pdd, "operator")

    @cached_property
    def phi_periodic(self) -> np.ndarray:
        """log(U_err(T)^m), for comparison with `phi_pdd`."""
        return unitary_log(self.u_err_periodic)


def cycle_hamiltonian(model: Model) -> SwitchedHamiltonian:
    """
    The switched generator of one finite-width cycle: H_ctrl + H_err + H_B during free
    intervals and H_P^(j) + H_err + H_B (plus H_ctrl with `ctrl_during_pulses`) during pulse j.

    Raises:
        ValueError: for ideal (zero-width) pulses, which are not generated by a Hamiltonian.
    """
    schedule, split = model.schedule, model.split
    if schedule.delta == 0:
        raise ValueError("Ideal pulses have no generator; the cycle is a product of kicks")
    free_sec, pulse_sec = _secular_generators(model)
    generators, spans = [], []
    for pulse in schedule.pulses:
        if schedule.tau > 0:
            generators.append(free_sec + split.h_err)
            spans.append(schedule.tau)
        generators.append(tensor(pulse.generator, np.eye(split.dim_bath)) + pulse_sec + split.h_err)
        spans.append(schedule.delta)
    return SwitchedHamiltonian.from_spans(generators, spans)


def _secular_generators(model: Model) -> Tuple[np.ndarray, np.ndarray]:
    split = model.split
    free_sec = split.h_sec
    pulse_sec = free_sec if model.scenario.ctrl_during_pulses else split.embedded_bath
    return free_sec, pulse_sec


def _check_structure(model: Model) -> None:
    areas = [pulse.area for pulse in model.schedule.pulses if pulse.area is not None]
    check = check_commutation(areas, model.split.h_ctrl)
    if check.satisfied:
        return
    message = f"Pulse generators do not commute with the control (residual {check.residual:.3e})"
    if model.scenario.on_commutation_violation == "fail":
        raise CommutationError(message)
    logger.warning(message)


def run_cycle(scenario: SimulationScenario, cycles: Optional[int] = None) -> CycleResult:
    """
    Simulates one decoupling cycle with the gate slice for a run of `cycles` cycles.

    Free intervals evolve under H_ctrl + H_err + H_B, pulse windows under
    H_P^(j) + H_err + H_B, and zero-width pulses act as instantaneous kicks. The segment
    effective Hamiltonians H_err^(j) and H_err^{P_j} come from logarithms of the exact segment
    error propagators.

    Args:
        scenario: The scenario to simulate.
        cycles: Number of cycles the gate angle is spread over; defaults to `scenario.m`.

    Returns:
        The cycle propagators, error phase and segment effective Hamiltonians.

    Raises:
        ConvergenceError: if T·J ≥ π.
        CommutationError: if the pulses do not commute with the control and the scenario
            asks to fail.
        BranchCutError: if the error propagator has an eigenphase at ±π.
    """
    model = build_model(scenario, cycles)
    _check_structure(model)
    schedule, split = model.schedule, model.split
    tau, delta = schedule.tau, schedule.delta
    report = strengths(split)
    diagnostic = schedule.cycle_time * report.J
    if diagnostic >= np.pi:
        raise ConvergenceError(f"T·J = {diagnostic:.6g} is not below π; the error phase is undefined")

    dim, dim_bath = split.dim, split.dim_bath
    identity_bath = np.eye(dim_bath)
    free_sec, pulse_sec = _secular_generators(model)
    u_free = expm_hermitian(free_sec + split.h_err, tau)
    w_free = expm_hermitian(free_sec, tau)
    w_pulse = expm_hermitian(pulse_sec, delta)
    zero = np.zeros((dim, dim), dtype=complex)

    u_total = np.eye(dim, dtype=complex)
    frame = np.eye(dim, dtype=complex)
    frames, free_phases, pulse_phases = [], [], []
    for pulse in schedule.pulses:
        frames.append(frame)
        if tau > 0:
            segment = dagger(frame) @ dagger(w_free) @ u_free @ frame
            free_phases.append(unitary_log(segment) / tau)
            u_total = u_free @ u_total
            frame = w_free @ frame
        else:
            free_phases.append(zero)
        realized = tensor(pulse.realized, identity_bath)
        if delta > 0:
            u_pulse = expm_hermitian(tensor(pulse.generator, identity_bath) + pulse_sec + split.h_err, delta)
            segment = dagger(frame) @ dagger(w_pulse) @ u_pulse @ frame
            pulse_phases.append(unitary_log(dagger(realized) @ segment) / delta)
            u_total = u_pulse @ u_total
            frame = w_pulse @ frame
        else:
            pulse_phases.append(zero)
            u_total = realized @ u_total

    raw = cumulative_products([pulse.realized for pulse in schedule.pulses])[0]
    phase = global_phase(raw, np.eye(raw.shape[0]))
    u_ctrl = expm_hermitian(split.h_ctrl, model.ctrl_time)
    u_bath = expm_hermitian(split.h_bath, schedule.cycle_time)
    u_sec = phase * tensor(u_ctrl, u_bath)
    u_err = check_unitary(dagger(u_sec) @ u_total, "error propagator")
    try:
        phi_e = unitary_log(u_err)
    except BranchCutError as error:
        raise BranchCutError(f"{error} (T·J = {diagnostic:.6g} vs π)", phase=error.phase,
                             diagnostic=diagnostic) from error

    logger.debug("Cycle of %d pulses, T=%.6g: |phi_e|=%.6g", schedule.N, schedule.cycle_time,
                 norm(phi_e, "operator"))
    return CycleResult(model=model, u_total=u_total, u_sec=u_sec, u_err=u_err, phi_e=phi_e,
                       free_phases=tuple(free_phases), pulse_phases=tuple(pulse_phases),
                       frames=tuple(frames), pulse_phase=phase, u_ctrl=u_ctrl, u_bath=u_bath)


def run_pdd(scenario: SimulationScenario, m: Optional[int] = None, trace: bool = True) -> PddResult:
    """
    Periodic decoupling: m identical cycles, each carrying the gate slice θ/m.

    Args:
        scenario: The scenario to simulate.
        m: Number of cycles; defaults to `scenario.m`.
        trace: Record the per-cycle deviation and power residual.

    Returns:
        The long-time propagators and Φ_PDD = log(U_sec(mT)†U(mT)).

    Raises:
        BranchCutError: if the error phase over m cycles reaches π; the error carries the
            offending m.
    """
    m = scenario.m if m is None else m
    if not isinstance(m, (int, np.integer)):
        raise TypeError(f"'{m}' is not an integer")
    if m < 1:
        raise ValueError(f"'{m}' is not a positive cycle count")
    cycle = run_cycle(scenario, cycles=m)
    u_total = np.linalg.matrix_power(cycle.u_total, m)
    u_sec = np.linalg.matrix_power(cycle.u_sec, m)
    u_err = dagger(u_sec) @ u_total
    u_err_periodic = np.linalg.matrix_power(cycle.u_err, m)

    records = []
    if trace:
        identity = np.eye(u_err.shape[0])
        total_k, sec_k, periodic_k = identity, identity, identity
        for k in range(1, m + 1):
            total_k = cycle.u_total @ total_k
            sec_k = cycle.u_sec @ sec_k
            periodic_k = cycle.u_err @ periodic_k
            err_k = dagger(sec_k) @ total_k
            records.append(CycleTrace(k, norm(err_k - identity, "operator"),
                                      norm(err_k - periodic_k, "operator")))

    try:
        phi_pdd = unitary_log(u_err)
    except BranchCutError as error:
        diagnostic = m * cycle.phi_e_norm
        raise BranchCutError(f"{error} at m = {m} (m·|phi_e| = {diagnostic:.6g} vs π)",
                             phase=error.phase, diagnostic=diagnostic, m=m) from error
    logger.debug("PDD run with m=%d: |phi_pdd|=%.6g", m, norm(phi_pdd, "operator"))
    return PddResult(cycle=cycle, m=m, u_total=u_total, u_sec=u_sec, u_err=u_err,
                     u_err_periodic=u_err_periodic, phi_pdd=phi_pdd, trace=tuple(records))


def interaction_generator(cycle: CycleResult) -> SwitchedHamiltonian:
    """
    Interaction-picture generator H̃_err(t) = H_DD(t) + U_sec(t)† H_err U_sec(t) of a
    finite-width cycle, as time-dependent segments. Its propagator is `cycle.u_err_raw`.

    Raises:
        ValueError: for zero-width pulses.
    """
    model = cycle.model
    schedule, split = model.schedule, model.split
    if schedule.delta == 0:
        raise ValueError("The interaction-picture generator needs finite-width pulses")
    free_sec, pulse_sec = _secular_generators(model)
    identity_bath = np.eye(split.dim_bath)
    h_err = split.h_err

    def rotated(secular, start, frame, extra=None):
        def generator(t):
            current = expm_hermitian(secular, t - start) @ frame
            value = dagger(current) @ h_err @ current
            return value if extra is None else value + extra
        return generator

    segments = []
    w_free = expm_hermitian(free_sec, schedule.tau)
    for j, pulse in enumerate(schedule.pulses):
        start = j * (schedule.tau + schedule.delta)
        frame = cycle.frames[j]
        if schedule.tau > 0:
            segments.append(Segment(start, start + schedule.tau, rotated(free_sec, start, frame)))
            frame = w_free @ frame
        pulse_start = start + schedule.tau
        extra = tensor(pulse.generator, identity_bath)
        segments.append(Segment(pulse_start, pulse_start + schedule.delta,
                                rotated(pulse_sec, pulse_start, frame, extra)))
    return SwitchedHamiltonian(tuple(segments))


def effective_hamiltonian_m(cycle: CycleResult) -> SwitchedHamiltonian:
    """
    The switched Hamiltonian H_m with segments D_j H_err^(j) D_j† over free intervals and
    D_j H_err^{P_j} D_j† over pulse windows. Its time-ordered exponential is `cycle.u_err`.
    """
    schedule = cycle.model.schedule
    elements = cycle.group.embedded(cycle.u_err.shape[0])
    generators, spans = [], []
    for element, (free, pulse) in zip(elements, cycle.segment_phases):
        if schedule.tau > 0:
            generators.append(symmetrize(element @ free @ dagger(element)))
            spans.append(schedule.tau)
        if schedule.delta > 0:
            generators.append(symmetrize(element @ pulse @ dagger(element)))
            spans.append(schedule.delta)
    return SwitchedHamiltonian.from_spans(generators, spans)


@dataclass(frozen=True, eq=False)
class StateDistances:
    """
    Final-state distances of a run.

    d_dd: D[ρ(T), ρ⁰(T)] against the uncoupled (secular) evolution.
    d_s: D[ρ_S(T), ρ_S^ideal(T)] after tracing out the bath.
    d_tot: D[ρ(T), ρ^ideal(T)] against the ideal gate with free bath evolution.
    d_id: D[ρ⁰(T), ρ^ideal(T)], the control imperfection.
    f_q: F[ρ_S(T), ρ_S^ideal(T)].
    """
    d_dd: float
    d_s: float
    d_tot: float
    d_id: float
    f_q: float
    rho_final: np.ndarray
    rho_secular: np.ndarray
    rho_ideal: np.ndarray


def _evolve(u: np.ndarray, rho: np.ndarray) -> np.ndarray:
    # Long matrix powers drift off unit trace by more than the state tolerance
    evolved = symmetrize(u @ rho @ dagger(u))
    return evolved / np.trace(evolved).real


def final_state_distances(result: Union[CycleResult, PddResult], rho_s: np.ndarray,
                          rho_b: np.ndarray) -> StateDistances:
    """
    Evolves ρ_S ⊗ ρ_B under the actual, the uncoupled and the ideal propagators and returns
    the distances between the final states.

    Raises:
        DensityMatrixError: if the initial states are not density matrices.
        DimensionError: if the states do not match the run's dimensions.
    """
    rho0 = tensor(rho_s, rho_b)
    if rho0.shape != result.u_total.shape:
        raise DimensionError(f"Initial state dimension '{rho0.shape[0]}' does not match '{result.u_total.shape[0]}'")
    u_ideal = tensor(result.u_ideal, result.u_bath)
    rho_final = _evolve(result.u_total, rho0)
    rho_secular = _evolve(result.u_sec, rho0)
    rho_ideal = _evolve(u_ideal, rho0)
    sys_final = partial_trace_bath(rho_final, result.dim_bath)
    sys_ideal = partial_trace_bath(rho_ideal, result.dim_bath)
    return StateDistances(
        d_dd=trace_distance(rho_final, rho_secular),
        d_s=trace_distance(sys_final, sys_ideal),
        d_tot=trace_distance(rho_final, rho_ideal),
        d_id=trace_distance(rho_secular, rho_ideal),
        f_q=fidelity(sys_final, sys_ideal),
        rho_final=rho_final, rho_secular=rho_secular, rho_ideal=rho_ideal)
