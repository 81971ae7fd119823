__all__ = ["COUPLING_LAYOUTS", "SYSTEM_STATES", "BATH_STATES", "SWEEP_BASE", "SimulationScenario", "SweepSpec",
           "Model", "build_model", "initial_states", "load_scenario", "load_sweep"]

from dataclasses import asdict, dataclass, field, fields, replace
from functools import cached_property
import json
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from .decoupling import (GROUP_TYPES, DecouplingGroup, PulseSchedule, group_from_pulses,
                         pauli_pulse)
from .exceptions import ConfigError
from .hamiltonians import (DIM_CAP, LOGIC_TYPES, GateSpec, SystemBathSplit, build_linear_sb,
                           build_local_bath, build_logic_operator, build_random_bath,
                           build_residual, per_site_coefficients, random_coefficients)
from .operators import expm_hermitian, pure_state, random_density

logger = logging.getLogger(__name__)

COUPLING_LAYOUTS = ("random", "per-site", "per-site-identical")
SYSTEM_STATES = ("zero", "plus", "random")
BATH_STATES = ("mixed", "zero", "random")

# Scenario family of sweeps: identical per-site couplings, so J and β grow linearly in n
SWEEP_BASE = {
    "coupling_layout": "per-site-identical",
    "sb_scale": 0.05,
    "bath_norm": 0.2,
    "bath_state": "mixed",
}


@dataclass(frozen=True)
class SimulationScenario:
    """
    Full description of one simulation. Field names double as the keys of scenario files.

    Sites are numbered from 1 and the tensor order is system ⊗ bath with qubit 1 leftmost.
    """
    n_sys: int = 1
    n_bath: int = 1
    heisenberg_J: float = 1.0
    heisenberg_couplings: Optional[Tuple[Tuple[int, int, float], ...]] = None
    sb_scale: float = 0.05
    bath_norm: float = 0.2
    residual_scale: float = 0.0
    coupling_layout: str = "random"
    theta: float = 0.0
    logic: str = "none"
    group: str = "universal"
    N: int = 4
    tau: float = 0.1
    delta: float = 0.0
    pulses: Optional[Tuple[str, ...]] = None
    m: int = 1
    seed: int = 0
    control_noise: float = 0.0
    ctrl_during_pulses: bool = False
    on_commutation_violation: str = "fail"
    system_state: str = "random"
    bath_state: str = "random"

    def __post_init__(self) -> None:
        for name in ("n_sys", "n_bath", "N", "m", "seed"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise ConfigError(f"'{name}' must be an integer, got '{value}'")
        if self.n_sys < 1 or self.n_bath < 0:
            raise ConfigError(f"Qubit counts '{self.n_sys}' and '{self.n_bath}' are out of range")
        if 2 ** (self.n_sys + self.n_bath) > DIM_CAP:
            raise ConfigError(f"'{self.n_sys}+{self.n_bath}' qubits exceed the dimension cap of {DIM_CAP}")
        if self.tau < 0 or self.delta < 0 or self.tau + self.delta == 0:
            raise ConfigError(f"Interval '{self.tau}' and width '{self.delta}' must be nonnegative with a positive sum")
        if self.m < 1 or self.N < 1:
            raise ConfigError(f"'m' and 'N' must be positive, got '{self.m}' and '{self.N}'")
        for name in ("sb_scale", "bath_norm", "residual_scale"):
            if getattr(self, name) < 0:
                raise ConfigError(f"'{name}' must be nonnegative, got '{getattr(self, name)}'")
        choices = {
            "coupling_layout": COUPLING_LAYOUTS,
            "logic": tuple(LOGIC_TYPES),
            "group": tuple(GROUP_TYPES) + ("custom",),
            "on_commutation_violation": ("warn", "fail"),
            "system_state": SYSTEM_STATES,
            "bath_state": BATH_STATES,
        }
        for name, options in choices.items():
            if getattr(self, name) not in options:
                raise ConfigError(f"'{getattr(self, name)}' is not a valid {name}. Choose one of {options}")
        if self.coupling_layout != "random" and self.n_bath < 1:
            raise ConfigError(f"Coupling layout '{self.coupling_layout}' needs at least one bath qubit")
        if self.n_sys < LOGIC_TYPES[self.logic]["min_qubits"]:
            raise ConfigError(f"Logic '{self.logic}' needs at least {LOGIC_TYPES[self.logic]['min_qubits']} system qubits")
        if self.pulses is not None:
            object.__setattr__(self, "pulses", tuple(self.pulses))
            if len(self.pulses) != self.N:
                raise ConfigError(f"'N' is {self.N} but {len(self.pulses)} pulses are given")
            if any(len(label) != self.n_sys for label in self.pulses):
                raise ConfigError(f"Pulse labels '{self.pulses}' must have length n_sys = {self.n_sys}")
        elif self.group == "custom":
            raise ConfigError("Group 'custom' needs an explicit 'pulses' list")
        elif self.group == "universal" and self.N != 4:
            raise ConfigError(f"The universal group has 4 elements, got N = {self.N}")
        if self.heisenberg_couplings is not None:
            object.__setattr__(self, "heisenberg_couplings",
                               tuple((int(i), int(j), float(J)) for i, j, J in self.heisenberg_couplings))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SimulationScenario":
        """
        Raises:
            ConfigError: for unknown keys or invalid values.
        """
        known = {item.name for item in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown scenario keys {unknown}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as error:
            raise ConfigError(str(error)) from error

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        if self.pulses is not None:
            data["pulses"] = list(self.pulses)
        if self.heisenberg_couplings is not None:
            data["heisenberg_couplings"] = [list(item) for item in self.heisenberg_couplings]
        return data

    def replace(self, **changes) -> "SimulationScenario":
        return replace(self, **changes)

    @property
    def couplings(self) -> Dict[Tuple[int, int], float]:
        """Heisenberg couplings J_ij; a uniform nearest-neighbour chain unless given."""
        if self.heisenberg_couplings is None:
            return {(i, i + 1): self.heisenberg_J for i in range(1, self.n_sys)}
        return {(i, j): J for i, j, J in self.heisenberg_couplings}

    @property
    def cycle_time(self) -> float:
        return self.N * (self.tau + self.delta)


@dataclass(frozen=True)
class SweepSpec:
    """
    Grid over register size n and interval τ, with `replicates` seeds per point.

    Each point uses `base` with n_sys = n_bath = n (one bath qubit per system qubit).
    """
    n_sys_values: Tuple[int, ...]
    tau_values: Tuple[float, ...]
    target_error: float = 0.1
    replicates: int = 1
    m_values: Optional[Tuple[int, ...]] = None
    base: SimulationScenario = field(default_factory=lambda: SimulationScenario(**SWEEP_BASE))

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_sys_values", tuple(int(n) for n in self.n_sys_values))
        object.__setattr__(self, "tau_values", tuple(float(tau) for tau in self.tau_values))
        if self.m_values is not None:
            object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))
            if not self.m_values or min(self.m_values) < 1:
                raise ConfigError("'m_values' must be a nonempty list of positive integers")
        if not self.n_sys_values or not self.tau_values:
            raise ConfigError("Sweep axes must be nonempty")
        if not 0 < self.target_error < 1:
            raise ConfigError(f"'target_error' must lie in (0, 1), got '{self.target_error}'")
        if self.replicates < 1:
            raise ConfigError(f"'replicates' must be positive, got '{self.replicates}'")
        for n in self.n_sys_values:
            if n < 1 or 4 ** n > DIM_CAP:
                raise ConfigError(f"'{n}' system qubits with as many bath qubits exceed the dimension cap")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SweepSpec":
        axes = {"n_sys_values", "tau_values", "m_values", "target_error", "replicates"}
        missing = {"n_sys_values", "tau_values"} - set(data)
        if missing:
            raise ConfigError(f"Missing sweep keys {sorted(missing)}")
        fixed = {key: value for key, value in data.items() if key not in axes}
        base = dict(SWEEP_BASE, **fixed)
        try:
            return cls(base=SimulationScenario.from_dict(base),
                       **{key: value for key, value in data.items() if key in axes})
        except TypeError as error:
            raise ConfigError(str(error)) from error

    @property
    def m_max(self) -> int:
        """Upper end of the cycle-count search."""
        return max(self.m_values) if self.m_values else 4096

    def scenario(self, n: int, tau: float, replicate: int = 0) -> SimulationScenario:
        return self.base.replace(n_sys=n, n_bath=n, tau=tau, seed=self.base.seed + replicate)

    def points(self):
        for n in self.n_sys_values:
            for tau in self.tau_values:
                for replicate in range(self.replicates):
                    yield n, tau, replicate


@dataclass(frozen=True, eq=False)
class Model:
    """
    Hamiltonians, gate and schedule of a scenario run over `cycles` cycles.

    `split.h_ctrl` is the actual gate slice λR with λ = θ(1+ε)/(cycles · t_ctrl), where t_ctrl
    is the time per cycle during which the control is on.
    """
    scenario: SimulationScenario
    split: SystemBathSplit
    gate: GateSpec
    schedule: PulseSchedule
    group: DecouplingGroup
    cycles: int
    rate: float

    @property
    def theta_actual(self) -> float:
        return self.gate.theta * (1 + self.scenario.control_noise)

    @property
    def ctrl_time(self) -> float:
        """Time per cycle during which the control Hamiltonian is on."""
        return _ctrl_time(self.schedule, self.scenario.ctrl_during_pulses)

    @cached_property
    def ideal_ctrl(self) -> np.ndarray:
        """Ideal system propagator exp(−i(θ/cycles)R) for one cycle."""
        return expm_hermitian(self.gate.logic, self.gate.theta / self.cycles)


def _ctrl_time(schedule: PulseSchedule, during_pulses: bool) -> float:
    return schedule.cycle_time if during_pulses else schedule.N * schedule.tau


def _seeded(seed: int, offset: int) -> int:
    return seed * 7919 + offset


def build_model(scenario: SimulationScenario, cycles: Optional[int] = None) -> Model:
    """
    Builds the Hamiltonian split, gate and pulse schedule of a scenario.

    Args:
        scenario: The scenario.
        cycles: Number of cycles the gate is spread over; defaults to `scenario.m`.

    Raises:
        ConfigError: if a nonzero gate angle has no control time to act in.
    """
    cycles = scenario.m if cycles is None else cycles
    if cycles < 1:
        raise ValueError(f"'{cycles}' is not a positive cycle count")
    n_sys, n_bath, seed = scenario.n_sys, scenario.n_bath, scenario.seed

    logic = build_logic_operator(scenario.logic, n_sys, scenario.couplings)
    gate = GateSpec(logic, scenario.theta, scenario.logic)

    if scenario.pulses is not None:
        labels = scenario.pulses
    elif scenario.group == "universal":
        labels = tuple(axis * n_sys for axis in "XZXZ")
    else:
        labels = tuple("I" * n_sys for _ in range(scenario.N))
    schedule = PulseSchedule(tuple(pauli_pulse(label, scenario.delta) for label in labels),
                             scenario.tau, scenario.delta)
    group = group_from_pulses(schedule)

    if scenario.sb_scale == 0:
        coeffs = {}
    elif scenario.coupling_layout == "random":
        coeffs = random_coefficients(n_sys, scenario.sb_scale)
    else:
        coeffs = per_site_coefficients(n_sys, n_bath, scenario.sb_scale, _seeded(seed, 0),
                                       identical=scenario.coupling_layout == "per-site-identical")
    h_err = build_linear_sb(n_sys, n_bath, coeffs, _seeded(seed, 0))
    h_err = h_err + build_residual(n_sys, n_bath, scenario.residual_scale, _seeded(seed, 2))

    if scenario.coupling_layout == "random":
        h_bath = build_random_bath(n_bath, scenario.bath_norm, _seeded(seed, 1))
    else:
        h_bath = build_local_bath(n_bath, scenario.bath_norm, _seeded(seed, 1),
                                  identical=scenario.coupling_layout == "per-site-identical")

    ctrl_time = _ctrl_time(schedule, scenario.ctrl_during_pulses)
    theta_actual = scenario.theta * (1 + scenario.control_noise)
    if ctrl_time == 0 and theta_actual != 0:
        raise ConfigError("A nonzero gate angle needs free intervals (tau > 0) or ctrl_during_pulses")
    rate = theta_actual / (cycles * ctrl_time) if ctrl_time > 0 else 0.0

    split = SystemBathSplit(n_sys, n_bath, rate * gate.logic, h_err, h_bath)
    logger.debug("Built model for %d+%d qubits over %d cycles (rate %.6g)", n_sys, n_bath, cycles, rate)
    return Model(scenario, split, gate, schedule, group, cycles, rate)


def _system_state(kind: str, n_sys: int, rng: np.random.Generator) -> np.ndarray:
    if kind == "zero":
        return pure_state(np.eye(2 ** n_sys)[0])
    if kind == "plus":
        return pure_state(np.ones(2 ** n_sys))
    return random_density(2 ** n_sys, rng, rank=1)


def _bath_state(kind: str, n_bath: int, rng: np.random.Generator) -> np.ndarray:
    dim = 2 ** n_bath
    if kind == "mixed":
        return np.eye(dim, dtype=complex) / dim
    if kind == "zero":
        return pure_state(np.eye(dim)[0])
    return random_density(dim, rng)


def initial_states(scenario: SimulationScenario) -> Tuple[np.ndarray, np.ndarray]:
    """Initial system and bath states, deterministic per seed."""
    rng = np.random.default_rng(_seeded(scenario.seed, 3))
    return (_system_state(scenario.system_state, scenario.n_sys, rng),
            _bath_state(scenario.bath_state, scenario.n_bath, rng))


def _read_json(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as error:
        raise ConfigError(f"Cannot read '{path}': {error}") from error
    if not isinstance(data, dict):
        raise ConfigError(f"'{path}' does not hold a JSON object")
    return data


def load_scenario(path: Union[str, Path]) -> SimulationScenario:
    """Reads a scenario file (a flat JSON object keyed by scenario field names)."""
    return SimulationScenario.from_dict(_read_json(path))


def load_sweep(path: Union[str, Path]) -> SweepSpec:
    """Reads a sweep file: the sweep axes plus any fixed scenario keys."""
    return SweepSpec.from_dict(_read_json(path))
