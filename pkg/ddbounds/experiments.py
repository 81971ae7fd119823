__all__ = ["WORKERS_ENV", "SWEEP_COLUMNS", "CALIBRATION_SAFETY", "TRUNCATION_SAFETY", "worker_count", "simulate_scenario",
           "write_report_json", "append_report_csv", "m_star", "m_hat", "fit_slope", "sweep_point",
           "run_sweep", "read_sweep_csv", "smooth_generator", "corpus_scenarios",
           "calibration_family", "calibrate"]

import concurrent.futures
import csv
from datetime import date
import json
import logging
import os
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .bounds import (BoundConstants, BoundReport, CSV_COLUMNS, absorbed_constant, assemble_report,
                     csv_cell, frame_beta, load_constants, phase_decomposition, phi_e_bound)
from .evolution import final_state_distances, run_cycle, run_pdd, time_ordered_exp
from .exceptions import BranchCutError, ConfigError, ConvergenceError
from .hamiltonians import strengths
from .magnus import magnus_terms
from .operators import norm, random_hermitian, tensor, unitary_log
from .scenario import (BATH_STATES, COUPLING_LAYOUTS, SYSTEM_STATES, SimulationScenario, SweepSpec,
                       build_model, initial_states)

logger = logging.getLogger(__name__)

WORKERS_ENV = "DDBOUNDS_WORKERS"

CALIBRATION_SAFETY = 1.5
TRUNCATION_SAFETY = 1.2

SWEEP_COLUMNS = ("n", "tau", "replicate", "seed", "J", "beta", "T", "m_star", "m_hat",
                 "J_ratio", "slope_m_star", "slope_m_hat", "status", "error")


def worker_count(default: Optional[int] = None) -> int:
    """Worker threads for batch runs, from DDBOUNDS_WORKERS when set."""
    value = os.environ.get(WORKERS_ENV)
    if value is None:
        return default if default is not None else min(4, os.cpu_count() or 1)
    try:
        workers = int(value)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV}='{value}' is not an integer") from None
    if workers < 1:
        raise ConfigError(f"{WORKERS_ENV}='{value}' must be positive")
    return workers


def simulate_scenario(scenario: SimulationScenario, consts: Optional[BoundConstants] = None,
                      timestamp: Optional[str] = None) -> BoundReport:
    """
    Runs m cycles of a scenario, evolves its initial states and evaluates every bound.

    Raises:
        ConvergenceError: if T·J ≥ π.
        BranchCutError: if the error phase leaves the principal branch.
    """
    consts = load_constants() if consts is None else consts
    logger.info("Simulating %d+%d qubits, N=%d, tau=%g, delta=%g, m=%d (seed %d)", scenario.n_sys,
                scenario.n_bath, scenario.N, scenario.tau, scenario.delta, scenario.m, scenario.seed)
    pdd = run_pdd(scenario)
    rho_s, rho_b = initial_states(scenario)
    distances = final_state_distances(pdd, rho_s, rho_b)
    report = assemble_report(pdd, distances, consts, rho0=tensor(rho_s, rho_b), timestamp=timestamp)
    logger.info("Finished: |phi_pdd|=%.6g, D_DD=%.6g, %s", report.phi_pdd_norm, report.d_dd,
                "all checks pass" if report.passed else f"violations {report.failures}")
    return report


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"'{type(value).__name__}' is not JSON serializable")


def write_report_json(report: BoundReport, path: Union[str, Path]) -> None:
    with open(path, "w") as f:
        json.dump(report.to_dict(), f, indent=2, default=_json_default)
        f.write("\n")


def append_report_csv(report: BoundReport, path: Union[str, Path]) -> None:
    """Appends one row, writing the header first when the file is new or empty."""
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
        if new:
            writer.writeheader()
        writer.writerow(report.to_row())


def m_star(J: float, beta: float, T: float, N: int, delta: float, target: float,
           consts: BoundConstants, m_max: int = 4096) -> int:
    """
    Largest m ≤ m_max whose PDD bound stays within `target`; 0 if even one cycle exceeds it.

    The PDD bound over m cycles of fixed length T is m times the single-cycle bound.
    """
    per_cycle = phi_e_bound(J, beta, T, N * delta, consts, N)
    if per_cycle == 0:
        return m_max
    return int(min(m_max, np.floor(target / per_cycle)))


def m_hat(scenario: SimulationScenario, target: float, m_max: int = 4096) -> int:
    """
    Largest m ≤ m_max with measured D_DD ≤ target, by bisection. A branch-cut failure
    counts as exceeding the target.
    """
    rho_s, rho_b = initial_states(scenario)

    def exceeds(m: int) -> bool:
        try:
            pdd = run_pdd(scenario, m, trace=False)
        except BranchCutError:
            logger.debug("m=%d leaves the principal branch", m)
            return True
        d_dd = final_state_distances(pdd, rho_s, rho_b).d_dd
        logger.debug("m=%d: D_DD=%.6g", m, d_dd)
        return d_dd > target

    if not exceeds(m_max):
        return m_max
    lo, hi = 0, m_max
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if exceeds(mid):
            hi = mid
        else:
            lo = mid
    return lo


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log y against log x; None with fewer than two usable points."""
    pairs = [(x, y) for x, y in zip(xs, ys) if x > 0 and y > 0 and np.isfinite(y)]
    if len({x for x, _ in pairs}) < 2:
        return None
    x, y = np.log(np.array(pairs, dtype=float)).T
    return float(np.polyfit(x, y, 1)[0])


def sweep_point(spec: SweepSpec, n: int, tau: float, replicate: int,
                consts: BoundConstants) -> Dict[str, Any]:
    """One grid point: measured J and β, the bound-based m* and the empirical m̂."""
    scenario = spec.scenario(n, tau, replicate)
    row: Dict[str, Any] = {"n": n, "tau": tau, "replicate": replicate, "seed": scenario.seed}
    try:
        model = build_model(scenario)
        J = strengths(model.split).J
        beta = frame_beta(model)
        T = model.schedule.cycle_time
        if T * J >= np.pi:
            raise ConvergenceError(f"T·J = {T * J:.6g} is not below π")
        row.update(J=J, beta=beta, T=T,
                   m_star=m_star(J, beta, T, model.schedule.N, scenario.delta, spec.target_error,
                                 consts, spec.m_max),
                   m_hat=m_hat(scenario, spec.target_error, spec.m_max),
                   status="ok", error="")
    except ValueError as error:
        logger.warning("Sweep point n=%d tau=%g replicate=%d failed: %s", n, tau, replicate, error)
        row.update(status="failed", error=str(error))
    else:
        logger.info("Sweep point n=%d tau=%g: J=%.4g m*=%d m_hat=%d", n, tau, J, row["m_star"], row["m_hat"])
    return row


def read_sweep_csv(path: Union[str, Path]) -> List[Dict[str, str]]:
    path = Path(path)
    if not path.exists() or path.stat().st_size == 0:
        return []
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def _point_key(row: Dict[str, Any]) -> Tuple[int, float, int]:
    return int(row["n"]), float(row["tau"]), int(row["replicate"])


def _as_cells(row: Dict[str, Any]) -> Dict[str, str]:
    return {column: csv_cell(row.get(column)) for column in SWEEP_COLUMNS}


def _add_slopes(rows: List[Dict[str, str]]) -> None:
    groups: Dict[Tuple[str, str], List[Dict[str, str]]] = {}
    for row in rows:
        if row["status"] == "ok":
            groups.setdefault((row["tau"], row["replicate"]), []).append(row)
    for row in rows:
        row["J_ratio"] = row["slope_m_star"] = row["slope_m_hat"] = "n/a"
    for members in groups.values():
        ns = [int(row["n"]) for row in members]
        reference = min(members, key=lambda row: int(row["n"]))
        n0, J0 = int(reference["n"]), float(reference["J"])
        slopes = {column: fit_slope(ns, [float(row[column]) for row in members])
                  for column in ("m_star", "m_hat")}
        for row in members:
            if J0 > 0:
                row["J_ratio"] = csv_cell((float(row["J"]) / J0) / (int(row["n"]) / n0))
            for column, slope in slopes.items():
                row[f"slope_{column}"] = "n/a" if slope is None else csv_cell(slope)


def _write_rows(path: Path, rows: List[Dict[str, str]], mode: str = "w", header: bool = True) -> None:
    with open(path, mode, newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SWEEP_COLUMNS)
        if header:
            writer.writeheader()
        writer.writerows(rows)


def run_sweep(spec: SweepSpec, consts: BoundConstants, path: Union[str, Path],
              workers: Optional[int] = None) -> List[Dict[str, str]]:
    """
    Evaluates every grid point not already in `path`, appending rows as they finish, then
    rewrites the file in grid order with the fitted log m vs log n slopes per (τ, replicate).

    Returns:
        The final rows as written.
    """
    path = Path(path)
    done = {_point_key(row): row for row in read_sweep_csv(path)}
    pending = [point for point in spec.points() if point not in done]
    logger.info("Sweep: %d of %d points pending", len(pending), len(done) + len(pending))
    workers = worker_count() if workers is None else workers

    if pending:
        _write_rows(path, [], mode="a", header=not path.exists() or path.stat().st_size == 0)
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(sweep_point, spec, n, tau, replicate, consts)
                       for n, tau, replicate in pending]
            for future in concurrent.futures.as_completed(futures):
                row = _as_cells(future.result())
                done[_point_key(row)] = row
                _write_rows(path, [row], mode="a", header=False)

    rows = [dict(done[point]) for point in spec.points()]
    _add_slopes(rows)
    _write_rows(path, rows)
    return rows


def smooth_generator(dim: int, rng: np.random.Generator, h: float,
                     omega: float = 1.0) -> Callable[[float], np.ndarray]:
    """Random smooth H(t) = A + cos(ωt)·B with ‖A‖_∞ = ‖B‖_∞ = h/2, so sup‖H‖_∞ ≤ h."""
    a = random_hermitian(dim, rng, target_norm=h / 2)
    b = random_hermitian(dim, rng, target_norm=h / 2)

    def gen(t: float) -> np.ndarray:
        return a + np.cos(omega * t) * b
    return gen


def corpus_scenarios(count: int = 200, seed: int = 0, max_tj: float = 0.75 * np.pi) -> List[SimulationScenario]:
    """
    Seeded variety of small scenarios inside the convergence domain, with the PDD phase m·T·J
    kept below π as well.
    """
    rng = np.random.default_rng(seed)
    scenarios = []
    for index in range(count):
        n_sys = int(rng.integers(1, 4))
        n_bath = int(rng.integers(1, 5 - n_sys))
        logics = ["none", "heisenberg-exchange", "logical-z-on-dfs"] if n_sys >= 2 else ["none"]
        logic = str(rng.choice(logics))
        universal = rng.random() >= 0.15
        m = int(rng.choice([1, 2, 4, 8]))
        scenario = SimulationScenario(
            n_sys=n_sys, n_bath=n_bath,
            sb_scale=float(rng.uniform(0.02, 0.4)),
            bath_norm=float(rng.uniform(0.0, 1.0)),
            coupling_layout=str(rng.choice(COUPLING_LAYOUTS)),
            theta=float(rng.uniform(0.0, np.pi)) if logic != "none" else 0.0,
            logic=logic,
            group="universal" if universal else "trivial",
            N=4 if universal else int(rng.integers(1, 5)),
            m=m, seed=seed * 100003 + index,
            control_noise=float(rng.choice([0.0, 0.05])),
            ctrl_during_pulses=bool(rng.random() < 0.3),
            system_state=str(rng.choice(SYSTEM_STATES)),
            bath_state=str(rng.choice(BATH_STATES)))
        J = strengths(build_model(scenario).split).J
        tj = float(rng.uniform(0.02, min(max_tj, 0.9 * np.pi / m)))
        step = tj / (scenario.N * J)
        delta = float(rng.uniform(0.0, 0.3) * step) if rng.random() < 0.4 else 0.0
        scenarios.append(scenario.replace(tau=step - delta, delta=delta))
    return scenarios


def calibration_family(count: int = 40, seed: int = 1) -> List[SimulationScenario]:
    """Heisenberg chains with one bath qubit per system qubit across T·J and pulse widths."""
    rng = np.random.default_rng(seed)
    scenarios = []
    for index in range(count):
        n = int(rng.integers(1, 3))
        base = SimulationScenario(n_sys=n, n_bath=n, coupling_layout="per-site",
                                  sb_scale=float(rng.uniform(0.02, 0.3)), bath_norm=0.2,
                                  bath_state="mixed", seed=seed * 100003 + index)
        J = strengths(build_model(base).split).J
        step = float(rng.uniform(0.02, 1.5)) / (base.N * J)
        delta = float(rng.choice([0.0, 0.05, 0.2])) * step
        scenarios.append(base.replace(tau=step - delta, delta=delta))
    return scenarios


def _truncation_ratios(rng: np.random.Generator, samples: int) -> Dict[int, float]:
    worst = {1: 0.0, 2: 0.0, 3: 0.0}
    for _ in range(samples):
        dim = int(rng.choice([2, 4]))
        h = float(rng.uniform(0.5, 2.0))
        T = float(rng.uniform(0.05, 0.9)) / h
        gen = smooth_generator(dim, rng, h, omega=float(rng.uniform(0.5, 5.0)))
        phase = unitary_log(time_ordered_exp(gen, 0.0, T, 2000))
        terms = magnus_terms(gen, T)
        x = h * T
        worst[1] = max(worst[1], norm(phase, "operator") / x)
        worst[2] = max(worst[2], norm(phase - terms.omega1, "operator") / x ** 2)
        worst[3] = max(worst[3], norm(phase - terms.partial_sum(2), "operator") / x ** 3)
    return worst


def calibrate(scenarios: Optional[Sequence[SimulationScenario]] = None, safety: float = CALIBRATION_SAFETY,
              magnus_samples: int = 50, seed: int = 0,
              truncation_safety: float = TRUNCATION_SAFETY) -> BoundConstants:
    """
    Measures the constants of the error-phase bounds and freezes them with a safety factor.

    c is the largest ratio (‖Φ_E − Ω₁‖ + ‖C‖)/(JT)² over the scenarios, d the largest
    ‖C‖/(N(τJ)²), and A_k the largest ‖log U − (Ω₁ + … + Ω_{k−1})‖/(hT)^k over random smooth
    generators. c is also recorded per (N, Δ) family. c and d are scaled by `safety`, the
    A_k by `truncation_safety`.
    """
    scenarios = calibration_family() if scenarios is None else list(scenarios)
    c_worst, d_worst, families = 0.0, 0.0, {}
    used = 0
    for scenario in scenarios:
        try:
            cycle = run_cycle(scenario)
        except ValueError as error:
            logger.warning("Skipping calibration scenario (seed %d): %s", scenario.seed, error)
            continue
        schedule = cycle.model.schedule
        J, T = cycle.strengths.J, schedule.cycle_time
        if J == 0:
            continue
        decomposition = phase_decomposition(cycle)
        first_order = decomposition.phi_pulse + decomposition.phi_free
        c_term = norm(decomposition.c_term, "operator")
        c_ratio = (norm(cycle.phi_e - first_order, "operator") + c_term) / (J * T) ** 2
        if schedule.tau > 0:
            d_worst = max(d_worst, c_term / (schedule.N * (schedule.tau * J) ** 2))
        c_worst = max(c_worst, c_ratio)
        key = BoundConstants.family_key(schedule.N, schedule.delta_total)
        families[key] = max(families.get(key, 0.0), c_ratio)
        used += 1
    if not used:
        raise ConfigError("No calibration scenario could be simulated")

    truncation = _truncation_ratios(np.random.default_rng(seed), magnus_samples)
    reference = scenarios[0]
    d = safety * d_worst
    constants = BoundConstants(
        c=safety * c_worst, d=d,
        c_prime=absorbed_constant(d, reference.cycle_time, reference.N * reference.delta, reference.N),
        truncation={k: truncation_safety * value for k, value in truncation.items()},
        families={key: safety * value for key, value in sorted(families.items())},
        provenance={"calibrated": True,
                    "seed_family": "heisenberg chain, one bath qubit per system qubit",
                    "scenarios": used, "magnus_samples": magnus_samples, "seed": seed,
                    "safety_factor": safety, "truncation_safety_factor": truncation_safety,
                    "date": date.today().isoformat()})
    logger.info("Calibrated c=%.4g d=%.4g A=%s from %d scenarios", constants.c, constants.d,
                {k: round(v, 4) for k, v in constants.truncation.items()}, used)
    return constants
