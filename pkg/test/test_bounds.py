import json

import mpmath
import numpy as np
import pytest

import ddbounds as dd


class TestConstants:
    def test_packaged_defaults(self, consts):
        assert (consts.c, consts.d, consts.c_prime) == (3.0, 3.0, 1.5)
        assert consts.truncation == {1: 1.0, 2: 2.0, 3: 2.0}
        assert "source" in consts.provenance

    def test_defaults_are_not_calibrated(self, consts):
        assert not consts.calibrated
        assert "safety_factor" not in consts.provenance
        assert not dd.BoundConstants().calibrated
        assert dd.BoundConstants(provenance={"calibrated": True}).calibrated

    def test_round_trip(self, tmp_path):
        constants = dd.BoundConstants(c=2.5, families={dd.BoundConstants.family_key(4, 0.02): 1.2},
                                      provenance={"seed": 3})
        path = tmp_path / "constants.json"
        dd.save_constants(constants, path)
        assert dd.load_constants(path) == constants
        assert json.loads(path.read_text())["truncation"] == {"1": 1.0, "2": 2.0, "3": 2.0}

    def test_family_lookup(self):
        constants = dd.BoundConstants(c=2.0, families={"N=4,Delta=0.04": 0.8})
        assert constants.c_for(4, 0.04) == 0.8
        assert constants.c_for(4, 0.0) == 2.0
        assert constants.c_for() == 2.0

    def test_missing_order(self, consts):
        with pytest.raises(KeyError, match="No truncation constant for order '5'"):
            consts.A(5)

    @pytest.mark.parametrize("data", [
        {"d": 1.0, "c_prime": 1.0}, # Missing c
        {"c": "large", "d": 1.0, "c_prime": 1.0},
        {"c": -1.0, "d": 1.0, "c_prime": 1.0},
        {"c": 1.0, "d": float("nan"), "c_prime": 1.0},
    ])
    def test_invalid(self, data):
        with pytest.raises(dd.ConfigError):
            dd.BoundConstants.from_dict(data)

    def test_unreadable(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{c: 1")
        with pytest.raises(dd.ConfigError, match="Cannot read constants file"):
            dd.load_constants(path)


class TestClosedForms:
    @pytest.mark.parametrize("x", [0.0, 1e-8, 1e-4, 9.99e-4, 1e-3, 0.5, 3.0, 20.0])
    def test_excess(self, x):
        mpmath.mp.dps = 50
        expected = 0.0 if x == 0 else float(mpmath.expm1(mpmath.mpf(x)) / x - 1)
        assert dd.excess(x) == pytest.approx(expected, rel=1e-9, abs=1e-300)

    def test_excess_negative(self):
        with pytest.raises(ValueError, match="is negative"):
            dd.excess(-0.1)

    def test_phi_e_bound(self, bound_value):
        constants = dd.BoundConstants(c=bound_value["c"])
        result = dd.phi_e_bound(bound_value["J"], bound_value["beta"], bound_value["T"],
                                bound_value["delta_total"], constants)
        assert result == pytest.approx(bound_value["expected"], rel=1e-12, abs=1e-15)

    def test_phi_e_bound_negative(self, consts):
        with pytest.raises(ValueError, match="'J' must be nonnegative"):
            dd.phi_e_bound(-0.1, 1.0, 1.0, 0.0, consts)

    def test_undecoupled_cap(self):
        assert dd.undecoupled_bound(0.1, 1.0, 1.0) == pytest.approx(0.1)
        assert dd.undecoupled_bound(0.1, 1.0, 1.0, decoupled=False) == pytest.approx(0.1 * (np.expm1(2) / 2 - 1))

    @pytest.mark.parametrize("m", [1, 3, 10])
    def test_pdd_is_m_cycles(self, consts, m):
        J, beta, T, N, delta = 0.05, 0.4, 0.2, 4, 0.01
        single = dd.phi_e_bound(J, beta, T, N * delta, consts)
        assert dd.pdd_bound(J, beta, m * T, m, m * N, delta, consts) == pytest.approx(m * single)

    def test_pdd_bad_m(self, consts):
        with pytest.raises(ValueError, match="'0' is not a positive cycle count"):
            dd.pdd_bound(0.1, 0.1, 1.0, 0, 4, 0.0, consts)

    def test_pdd_approx(self, consts):
        assert dd.pdd_bound_approx(0.1, 0.5, 0.2, 3, consts) == pytest.approx(3 * (3 * 0.01 + 0.05) * 0.04)

    def test_pdd_approx_matches_small_beta_t(self, consts):
        J, beta, T, m = 1e-3, 1e-3, 1e-2, 5
        exact = dd.pdd_bound(J, beta, m * T, m, 4 * m, 0.0, consts)
        assert exact == pytest.approx(dd.pdd_bound_approx(J, beta, T, m, consts), rel=1e-3)

    def test_cycle_budget(self):
        assert dd.cycle_budget(0.1, 0.5, 0.2, 3.0) == pytest.approx(1 / (2 * 0.08 * 0.04))
        assert dd.cycle_budget(0.0, 0.5, 0.2, 3.0) == float("inf")

    def test_fidelity_floor_approx(self):
        assert dd.pdd_fidelity_floor_approx(0.01, 2, 0.1, 0.5, 0.2, 3.0) == pytest.approx(1 - 0.01 - 4 * 0.08 * 0.04)

    def test_absorbed_constant(self):
        assert dd.absorbed_constant(3.0, 1.0, 0.2, 4) == pytest.approx(3.0 * 0.8 / 2)
        with pytest.raises(ValueError, match="Need T > 0"):
            dd.absorbed_constant(3.0, 0.0, 0.0, 4)

    def test_d_dd_bound(self):
        assert dd.d_dd_bound(0.0) == 0.0
        assert dd.d_dd_bound(0.1) == pytest.approx(0.5 * np.expm1(0.2))
        assert dd.d_dd_bound(2.0) == 1.0

    def test_fidelity_floor(self):
        assert dd.fidelity_floor(0.1, 0.1) == pytest.approx(0.9 - 0.5 * np.expm1(0.2))
        assert dd.fidelity_floor(0.5, 3.0) == pytest.approx(-0.5)

    @pytest.mark.parametrize("axis, values", [
        ("J", [0.0, 0.01, 0.1, 0.3]),
        ("beta", [0.0, 0.5, 2.0, 10.0]),
        ("T", [0.01, 0.1, 1.0]),
        ("delta_total", [0.0, 0.01, 0.1]),
    ])
    def test_monotone(self, consts, axis, values):
        fixed = {"J": 0.1, "beta": 1.0, "T": 0.5, "delta_total": 0.02}
        del fixed[axis]
        assert dd.is_monotone(dd.phi_e_bound, axis, values, consts=consts, **fixed)

    def test_not_monotone(self):
        assert not dd.is_monotone(lambda x: -x, "x", [1.0, 2.0])


class TestBoundCheck:
    def test_tolerance(self):
        assert dd.BoundCheck.upper("x", 1.0, 1.0 + 5e-10).passed
        assert not dd.BoundCheck.upper("x", 1.0, 1.0 + 1e-8).passed

    def test_floor(self):
        check = dd.BoundCheck.lower("x", 0.5, 0.4)
        assert not check.passed
        assert check.margin == pytest.approx(-0.1)

    def test_vacuous(self):
        assert dd.BoundCheck.upper("x", 1.0, 0.2, cap=1.0).vacuous
        assert not dd.BoundCheck.upper("x", 0.5, 0.2, cap=1.0).vacuous
        assert dd.BoundCheck.lower("x", -0.2, 0.9, cap=0.0).vacuous

    def test_csv_cells(self):
        assert dd.csv_cell(True) == "true"
        assert dd.csv_cell(np.bool_(False)) == "false"
        assert dd.csv_cell(0.1) == "0.1"
        assert float(dd.csv_cell(np.float64(1 / 3))) == 1 / 3
        assert dd.csv_cell(None) == ""
        assert dd.csv_cell(4) == "4"


class TestLemmas:
    def test_adjoint_small(self, rng, dim):
        a = dd.random_hermitian(dim, rng, target_norm=0.3)
        b = dd.random_hermitian(dim, rng)
        result = dd.lemma2_bound(a, b)
        assert result.refined is not None
        assert result.passed

    def test_adjoint_large(self, rng):
        a = dd.random_hermitian(4, rng, target_norm=1.0)
        result = dd.lemma2_bound(a, dd.random_hermitian(4, rng))
        assert result.refined is None
        assert result.check.vacuous
        assert result.passed

    def test_adjoint_trace_norm(self, rng):
        a = dd.random_hermitian(4, rng, target_norm=0.2)
        rho = dd.random_density(4, rng)
        assert dd.lemma2_bound(a, rho, "trace").passed

    def test_effective_strength_constant(self, rng, dim):
        h0 = dd.random_hermitian(dim, rng, target_norm=1.0)
        v = dd.random_hermitian(dim, rng, target_norm=0.3)
        result = dd.lemma3_check(h0, v, 1.0)
        assert result.passed
        assert result.average == pytest.approx(0.3)

    def test_effective_strength_time_dependent(self, rng):
        h0 = dd.smooth_generator(3, rng, 2.0, omega=4.0)
        v = dd.smooth_generator(3, rng, 0.5, omega=1.0)
        result = dd.lemma3_check(h0, v, 2.0, steps=100)
        assert result.passed
        assert result.average <= result.sup

    def test_effective_strength_duration(self):
        with pytest.raises(ValueError, match="is not a positive duration"):
            dd.lemma3_check(np.eye(2), np.eye(2), 0.0)


class TestDecomposition:
    @pytest.fixture(scope="class")
    def decomposition(self, cycle, consts) -> dd.PhaseDecomposition:
        return dd.phase_decomposition(cycle, consts=consts)

    def test_checks(self, decomposition):
        assert set(decomposition.checks) == {"pulse", "undecoupled", "c_term", "do_nothing"}
        assert all(check.passed for check in decomposition.checks.values())

    def test_sum(self, decomposition):
        total = decomposition.phi_dec + decomposition.phi_undec + decomposition.c_term
        assert np.allclose(total, decomposition.phi_free)

    def test_decoupled_part(self, decomposition):
        if decomposition.decoupled:
            assert np.allclose(decomposition.phi_dec, 0, atol=1e-12)
        else:
            assert dd.norm(decomposition.phi_dec) > 0

    def test_pulse_part(self, cycle, decomposition):
        if cycle.model.schedule.delta == 0:
            assert np.array_equal(decomposition.phi_pulse, np.zeros_like(decomposition.phi_pulse))

    def test_first_order_accuracy(self, cycle, decomposition):
        # Φ_E agrees with Φ_pulse + Φ_free to second order in T·J
        J, T = cycle.strengths.J, cycle.cycle_time
        residual = dd.norm(cycle.phi_e - decomposition.phi_pulse - decomposition.phi_free)
        assert residual <= (J * T) ** 2

    def test_series(self, cycle, decomposition):
        model = cycle.model
        if model.schedule.delta > 0 and not model.scenario.ctrl_during_pulses and model.scenario.theta != 0:
            pytest.skip("The frame generator changes during pulse windows")
        assert np.allclose(dd.undecoupled_series(cycle, order=14), decomposition.phi_undec, atol=1e-10)

    def test_series_needs_one_frame(self):
        scenario = dd.SimulationScenario(n_sys=2, logic="heisenberg-exchange", theta=0.4, tau=0.05, delta=0.01)
        with pytest.raises(ValueError, match="needs one secular generator"):
            dd.undecoupled_series(dd.run_cycle(scenario))


class TestReport:
    @pytest.fixture(scope="class")
    def report(self, scenario, pdd, distances, consts) -> dd.BoundReport:
        rho0 = np.kron(*dd.initial_states(scenario))
        return dd.assemble_report(pdd, distances, consts, rho0=rho0, timestamp="2026-10-18T00:00:00+00:00")

    def test_passes(self, report):
        assert report.passed, report.failures

    def test_check_names(self, report):
        assert set(report.checks) <= set(dd.CHECK_NAMES)
        assert {"d_dd", "partial_trace", "triangle", "fidelity_floor", "lemma2", "lemma3"} <= set(report.checks)

    def test_error_phase_checks(self, report):
        assert ("phi_e" in report.checks) == report.decoupled
        assert ("pdd" in report.checks) == report.decoupled

    def test_scalars(self, report, pdd, distances):
        assert report.m == pdd.m
        assert report.phi_pdd_norm == pdd.phi_pdd_norm
        assert report.d_dd == distances.d_dd
        assert report.pdd_bound == pytest.approx(report.m * report.phi_e_bound)

    def test_row(self, report):
        row = report.to_row()
        assert list(row) == list(dd.CSV_COLUMNS)
        assert row["passed"] == "true"
        assert json.loads(row["scenario"]) == report.scenario
        assert row["timestamp"] == "2026-10-18T00:00:00+00:00"

    def test_dict(self, report):
        data = report.to_dict()
        assert list(data["checks"]) == [name for name in dd.CHECK_NAMES if name in report.checks]
        assert data["passed"] is True

    def test_chain(self, pdd, distances):
        checks = dd.d_dd_chain(pdd.phi_pdd_norm, distances)
        assert all(check.passed for check in checks.values())
        assert ("d_dd_refined" in checks) == (2 * pdd.phi_pdd_norm <= 1)

    def test_violation_is_logged(self, pdd, distances, caplog):
        strict = dd.BoundConstants(c=0.0, d=0.0)
        report = dd.assemble_report(pdd, distances, strict, timestamp="")
        assert "c_term" in report.failures
        assert "Bound violations" in caplog.text
