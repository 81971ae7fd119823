__all__ = ["SUITES", "SUITE_NAMES", "PropertyResult", "run_suite"]

from dataclasses import dataclass
import logging
from typing import Callable, Dict, List

import numpy as np

from .bounds import (DEFAULT_CONSTANTS_FILE, is_monotone, lemma2_bound, lemma3_check,
                     load_constants, pdd_bound, phi_e_bound)
from .decoupling import (check_commutation, check_decoupling_condition, cumulative_products,
                         is_group, project_group, project_group_normalized, universal_group,
                         universal_pulses)
from .evolution import (SwitchedHamiltonian, effective_hamiltonian_m, interaction_generator,
                        propagate_switched, run_cycle, run_pdd, time_ordered_exp)
from .experiments import corpus_scenarios, fit_slope, simulate_scenario, smooth_generator
from .hamiltonians import (build_heisenberg_ctrl, build_linear_sb, chain_couplings,
                           random_coefficients)
from .magnus import magnus_terms, truncation_bound
from .operators import (commutator, equal_up_to_phase, expm_hermitian, fidelity, norm,
                        partial_trace_bath, random_density, random_hermitian, random_unitary,
                        tensor, trace_distance, unitary_log)
from .scenario import SimulationScenario

logger = logging.getLogger(__name__)

Property = Callable[[np.random.Generator], List[bool]]

_KINDS = ("trace", "frobenius", "operator")


@dataclass(frozen=True)
class PropertyResult:
    suite: str
    name: str
    passed: int
    total: int

    @property
    def ok(self) -> bool:
        return self.passed == self.total


def _matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))


def _dims(rng: np.random.Generator, count: int = 200) -> List[int]:
    return [int(d) for d in rng.integers(2, 17, size=count)]


def _close(a: float, b: float, tol: float = 1e-10) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _norm_ordering(rng):
    results = []
    for dim in _dims(rng):
        a = _matrix(rng, dim)
        op, fro, tr = (norm(a, kind) for kind in ("operator", "frobenius", "trace"))
        results.append(op <= fro * (1 + 1e-12) and fro <= tr * (1 + 1e-12))
    return results


def _unitary_invariance(rng):
    results = []
    for dim in _dims(rng):
        a, u, v = _matrix(rng, dim), random_unitary(dim, rng), random_unitary(dim, rng)
        results.append(all(_close(norm(u @ a @ v, kind), norm(a, kind)) for kind in _KINDS))
    return results


def _submultiplicativity(rng):
    results = []
    for dim in _dims(rng):
        a, b, c = (_matrix(rng, dim) for _ in range(3))
        ok = True
        for kind in _KINDS:
            ok &= norm(a @ b, kind) <= norm(a, kind) * norm(b, kind) * (1 + 1e-12)
            ok &= norm(a @ b @ c, kind) <= norm(a, "operator") * norm(b, kind) * norm(c, "operator") * (1 + 1e-12)
        results.append(bool(ok))
    return results


def _tensor_multiplicativity(rng):
    results = []
    for _ in range(200):
        a, b = _matrix(rng, int(rng.integers(2, 5))), _matrix(rng, int(rng.integers(2, 5)))
        results.append(all(_close(norm(tensor(a, b), kind), norm(a, kind) * norm(b, kind))
                           for kind in _KINDS))
    return results


def _partial_trace_constants(rng):
    results = []
    for _ in range(200):
        dim_sys, dim_bath = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        x = _matrix(rng, dim_sys * dim_bath)
        reduced = partial_trace_bath(x, dim_bath)
        constants = {"trace": 1.0, "frobenius": np.sqrt(dim_bath), "operator": float(dim_bath)}
        results.append(all(norm(reduced, kind) <= constants[kind] * norm(x, kind) * (1 + 1e-12)
                           for kind in _KINDS))
    return results


def _log_round_trip(rng):
    results = []
    for dim in _dims(rng):
        h = random_hermitian(dim, rng, target_norm=float(rng.uniform(0.0, np.pi - 0.01)))
        results.append(norm(unitary_log(expm_hermitian(h)) - h, "operator") <= 1e-8)
    return results


def _fuchs_van_de_graaf(rng):
    results = []
    for dim in _dims(rng):
        r1, r2 = random_density(dim, rng), random_density(dim, rng)
        d, f = trace_distance(r1, r2), fidelity(r1, r2)
        results.append(1 - d <= f + 1e-10 and f <= np.sqrt(1 - d ** 2) + 1e-10)
    return results


def _magnus_instances(rng, count: int, max_ht: float):
    for _ in range(count):
        dim = int(rng.choice([2, 4]))
        h = float(rng.uniform(0.5, 2.0))
        T = float(rng.uniform(0.05, max_ht)) / h
        yield h, T, smooth_generator(dim, rng, h, omega=float(rng.uniform(0.5, 5.0)))


def _magnus_hermiticity(rng):
    results = []
    for _, T, gen in _magnus_instances(rng, 20, 0.9):
        terms = magnus_terms(gen, T)
        results.append(all(norm(omega - omega.conj().T, "operator") <= 1e-8
                           for omega in (terms.omega1, terms.omega2, terms.omega3)))
    return results


def _magnus_beats_first_order(rng):
    results = []
    for _, T, gen in _magnus_instances(rng, 20, 0.3):
        exact = time_ordered_exp(gen, 0.0, T, 2000)
        terms = magnus_terms(gen, T)
        first = norm(expm_hermitian(terms.omega1) - exact, "operator")
        second = norm(expm_hermitian(terms.partial_sum(2)) - exact, "operator")
        results.append(second <= first)
    return results


def _magnus_rescaling(rng):
    results = []
    for h, T, gen in _magnus_instances(rng, 10, 0.9):
        terms = magnus_terms(gen, T)

        def scaled(s, gen=gen, h=h, T=T):
            return gen(s * T) / h
        unit = magnus_terms(scaled, 1.0)
        x = h * T
        results.append(all(norm(omega - x ** i * unit_omega, "operator") <= 1e-8 * max(1.0, norm(omega, "operator"))
                           for i, (omega, unit_omega) in enumerate(
                               zip((terms.omega1, terms.omega2, terms.omega3),
                                   (unit.omega1, unit.omega2, unit.omega3)), start=1)))
    return results


def _magnus_truncation(rng):
    consts = load_constants(DEFAULT_CONSTANTS_FILE)
    results = []
    for h, T, gen in _magnus_instances(rng, 50, 0.9):
        phase = unitary_log(time_ordered_exp(gen, 0.0, T, 2000))
        omega1 = magnus_terms(gen, T).omega1
        results.append(norm(phase - omega1, "operator") <= truncation_bound(2, h, T, consts.A(2)) + 1e-9)
    return results


def _adjoint_bound(rng):
    results = []
    for dim in _dims(rng):
        a = random_hermitian(dim, rng, target_norm=float(rng.uniform(0.0, 2.0)))
        b = _matrix(rng, dim)
        results.append(lemma2_bound(a, b, str(rng.choice(_KINDS))).passed)
    return results


def _strength_constant(rng):
    results = []
    for _ in range(100):
        dim = int(rng.choice([2, 4, 8]))
        T = float(rng.uniform(0.1, 2.0))
        h0 = random_hermitian(dim, rng, target_norm=float(rng.uniform(0.0, 3.0)))
        v = random_hermitian(dim, rng, target_norm=float(rng.uniform(0.0, 1.0)) / T)
        results.append(lemma3_check(h0, v, T).passed)
    return results


def _strength_time_dependent(rng):
    results = []
    for _ in range(20):
        dim = int(rng.choice([2, 4]))
        T = float(rng.uniform(0.1, 1.0))
        h0 = smooth_generator(dim, rng, float(rng.uniform(0.0, 3.0)))
        v = smooth_generator(dim, rng, float(rng.uniform(0.0, 1.0)) / T, omega=3.0)
        results.append(lemma3_check(h0, v, T, steps=100).passed)
    return results


def _bound_monotonicity(rng):
    consts = load_constants(DEFAULT_CONSTANTS_FILE)
    results = []
    for _ in range(20):
        fixed = {"J": float(rng.uniform(0, 1)), "beta": float(rng.uniform(0, 2)),
                 "T": float(rng.uniform(0.01, 2)), "delta_total": float(rng.uniform(0, 0.2)),
                 "consts": consts}
        grid = np.linspace(0.0, 2.0, 9)
        for axis in ("J", "T", "delta_total", "beta"):
            others = {key: value for key, value in fixed.items() if key != axis}
            results.append(is_monotone(phi_e_bound, axis, grid, **others))
        results.append(is_monotone(
            lambda m, **kw: pdd_bound(m=int(m), T_long=int(m) * fixed["T"], N_long=4 * int(m), **kw),
            "m", range(1, 33), J=fixed["J"], beta=fixed["beta"], delta=0.01, consts=consts))
    return results


def _bound_corpus(rng):
    consts = load_constants(DEFAULT_CONSTANTS_FILE)
    results = []
    for scenario in corpus_scenarios(200, seed=int(rng.integers(0, 2 ** 16))):
        report = simulate_scenario(scenario, consts, timestamp="")
        if not report.passed:
            logger.warning("Scenario seed %d violates %s", scenario.seed, report.failures)
        results.append(report.passed)
    return results


def _decoupling_condition(rng):
    results = []
    for n_sys in (1, 2, 3):
        g = universal_group(n_sys)
        for _ in range(20):
            h_err = build_linear_sb(n_sys, 1, random_coefficients(n_sys, float(rng.uniform(0.01, 1.0))),
                                    int(rng.integers(0, 2 ** 31)))
            results.append(check_decoupling_condition(g, h_err).satisfied)
    return results


def _commutation(rng):
    results = []
    for n_sys in (2, 3, 4):
        couplings = {pair: float(rng.uniform(0.1, 2.0)) for pair in chain_couplings(n_sys)}
        h_ctrl = build_heisenberg_ctrl(n_sys, couplings)
        areas = [pulse.area for pulse in universal_pulses(n_sys)]
        results.append(check_commutation(areas, h_ctrl, tol=1e-12).satisfied)
    return results


def _telescoping(rng):
    results = []
    for n_sys in (1, 2, 3):
        unitaries = [pulse.unitary for pulse in universal_pulses(n_sys)]
        products = cumulative_products(unitaries)
        for j in range(len(unitaries) - 1):
            results.append(equal_up_to_phase(products[j + 1].conj().T @ products[j], unitaries[j]))
        results.append(equal_up_to_phase(products[-1], unitaries[-1]))
    return results


def _projection(rng):
    results = []
    for n_sys in (1, 2, 3):
        g = universal_group(n_sys)
        results.append(is_group(g))
        for _ in range(34):
            a = _matrix(rng, 2 ** n_sys)
            once = project_group_normalized(g, a)
            twice = project_group_normalized(g, once)
            projected = project_group(g, a)
            central = all(norm(commutator(projected, element), "operator") <= 1e-10 * max(1.0, norm(a, "operator"))
                          for element in g.elements)
            results.append(norm(once - twice, "operator") <= 1e-10 * max(1.0, norm(a, "operator")) and central)
    return results


def _segment_product(rng):
    steps = 10 ** 4
    results = []
    for _ in range(100):
        dim = int(rng.choice([2, 4]))
        counts = rng.multinomial(steps - 3, [1 / 3] * 3) + 1
        T = float(rng.uniform(0.1, 2.0))
        generators = [random_hermitian(dim, rng, target_norm=float(rng.uniform(0.1, 2.0))) for _ in range(3)]
        sh = SwitchedHamiltonian.from_spans(generators, [T * count / steps for count in counts])
        exact = propagate_switched(sh)
        results.append(norm(exact - time_ordered_exp(sh, 0.0, T, steps), "operator") <= 1e-7)
    return results


def _finite_width_scenarios(rng, count: int):
    for index in range(count):
        n_sys = int(rng.integers(1, 3))
        yield SimulationScenario(n_sys=n_sys, n_bath=1, coupling_layout="per-site",
                                 logic="heisenberg-exchange" if n_sys == 2 else "none",
                                 theta=float(rng.uniform(0, 0.3)) if n_sys == 2 else 0.0,
                                 tau=float(rng.uniform(0.02, 0.1)), delta=float(rng.uniform(0.005, 0.02)),
                                 sb_scale=float(rng.uniform(0.05, 0.3)), bath_norm=0.5,
                                 ctrl_during_pulses=bool(index % 2), seed=index)


def _interaction_picture(rng):
    results = []
    for scenario in _finite_width_scenarios(rng, 10):
        cycle = run_cycle(scenario)
        u = propagate_switched(interaction_generator(cycle), steps_per_segment=1000)
        results.append(norm(u - cycle.u_err_raw, "operator") <= 1e-7)
    return results


def _cycle_assembly(rng):
    results = []
    for scenario in _finite_width_scenarios(rng, 10):
        cycle = run_cycle(scenario)
        u = propagate_switched(effective_hamiltonian_m(cycle))
        results.append(norm(u - cycle.u_err, "operator") <= 1e-8)
    return results


def _first_order_scaling(rng):
    results = []
    for seed in rng.integers(0, 2 ** 16, size=5):
        base = SimulationScenario(n_sys=1, n_bath=1, coupling_layout="per-site", sb_scale=0.1,
                                  bath_norm=0.5, seed=int(seed))
        taus = [0.04, 0.02, 0.01, 0.005]
        phases = [run_cycle(base.replace(tau=tau)).phi_e_norm for tau in taus]
        slope = fit_slope(taus, phases)
        results.append(slope is not None and 1.8 <= slope <= 2.2)
    return results


def _pdd_power_identity(rng):
    results = []
    for seed in rng.integers(0, 2 ** 16, size=5):
        scenario = SimulationScenario(n_sys=1, n_bath=1, sb_scale=0.2, bath_norm=0.0, tau=0.05,
                                      seed=int(seed))
        phi_e = run_cycle(scenario, cycles=1).phi_e_norm
        for m in (1, 2, 4, 8):
            if m * phi_e >= np.pi - 0.05:
                continue
            pdd = run_pdd(scenario, m)
            results.append(pdd.power_residual <= 1e-8 and abs(pdd.phi_pdd_norm - m * phi_e) <= 1e-8)
    return results


SUITES: Dict[str, Dict[str, Property]] = {

    "norms": {
        "norm ordering": _norm_ordering,
        "unitary invariance": _unitary_invariance,
        "submultiplicativity": _submultiplicativity,
        "tensor multiplicativity": _tensor_multiplicativity,
        "partial trace constants": _partial_trace_constants,
        "log round trip": _log_round_trip,
        "fuchs-van de graaf": _fuchs_van_de_graaf,
    },

    "magnus": {
        "hermiticity": _magnus_hermiticity,
        "second order beats first": _magnus_beats_first_order,
        "rescaling": _magnus_rescaling,
        "truncation bound": _magnus_truncation,
    },

    "lemmas": {
        "adjoint bound": _adjoint_bound,
        "effective strength, constant": _strength_constant,
        "effective strength, time dependent": _strength_time_dependent,
        "bound monotonicity": _bound_monotonicity,
        "bound corpus": _bound_corpus,
    },

    "decoupling": {
        "decoupling condition": _decoupling_condition,
        "commutation condition": _commutation,
        "telescoping": _telescoping,
        "projection": _projection,
    },

    "evolution": {
        "segment product": _segment_product,
        "interaction picture": _interaction_picture,
        "cycle assembly": _cycle_assembly,
        "first order scaling": _first_order_scaling,
        "pdd power identity": _pdd_power_identity,
    },

}

SUITE_NAMES = tuple(SUITES) + ("all",)


def run_suite(name: str, seed: int = 0) -> List[PropertyResult]:
    """
    Runs the properties of a suite, or of every suite for 'all', each with its own seeded generator.

    Raises:
        ValueError: for an unknown suite name.
    """
    if name not in SUITE_NAMES:
        raise ValueError(f"'{name}' is not a known suite. Choose one of {SUITE_NAMES}")
    names = tuple(SUITES) if name == "all" else (name,)
    results = []
    for suite in names:
        for index, (prop, check) in enumerate(SUITES[suite].items()):
            outcomes = check(np.random.default_rng([seed, index, len(suite)]))
            result = PropertyResult(suite, prop, int(sum(outcomes)), len(outcomes))
            log = logger.info if result.ok else logger.warning
            log("%s / %s: %d of %d", suite, prop, result.passed, result.total)
            results.append(result)
    return results
