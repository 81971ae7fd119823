import numpy as np
import pytest
from scipy.integrate import solve_ivp

import ddbounds as dd


def smooth(rng, dim=2, h=1.0):
    return dd.smooth_generator(dim, rng, h, omega=2.0)


def propagator_ivp(gen, T, dim):
    """Reference propagator from an adaptive ODE solve of dU/dt = −iH(t)U."""
    def rhs(t, y):
        u = y.reshape(dim, dim)
        return (-1j * gen(t) @ u).ravel()
    solution = solve_ivp(rhs, (0.0, T), np.eye(dim, dtype=complex).ravel(), rtol=1e-12, atol=1e-12)
    return solution.y[:, -1].reshape(dim, dim)


class TestQuadrature:
    def test_weights_sum_to_length(self):
        nodes, weights = dd.gauss_legendre(0.5, 2.0, 8, breakpoints=[1.0, 1.5, 3.0])
        assert weights.sum() == pytest.approx(1.5)
        assert len(nodes) == 24 # Breakpoint outside the interval is ignored

    def test_polynomial_exactness(self):
        nodes, weights = dd.gauss_legendre(0.0, 2.0, 8)
        assert weights @ nodes ** 15 == pytest.approx(2 ** 16 / 16)


class TestMagnusTerms:
    def test_constant_generator(self, rng):
        h = dd.random_hermitian(3, rng)
        terms = dd.magnus_terms(h, T=0.4)
        assert np.allclose(terms.omega1, 0.4 * h)
        assert np.allclose(terms.omega2, 0, atol=1e-12)
        assert np.allclose(terms.omega3, 0, atol=1e-12)

    def test_hermitian(self, rng):
        terms = dd.magnus_terms(smooth(rng, 4), T=0.5)
        for omega in (terms.omega1, terms.omega2, terms.omega3):
            assert np.allclose(omega, omega.conj().T)

    def test_sign_convention(self):
        # Two constant pieces: Ω₂ = −(i/2)·t_a·t_b·[H_b, H_a] for H_a first
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        z = np.array([[1, 0], [0, -1]], dtype=complex)
        sh = dd.SwitchedHamiltonian.from_spans([x, z], [0.1, 0.2])
        terms = dd.magnus_terms(sh)
        assert np.allclose(terms.omega2, -0.5j * 0.1 * 0.2 * dd.commutator(z, x), atol=1e-12)

    def test_matches_propagator(self, rng):
        gen = smooth(rng, 2, h=1.0)
        T = 0.3
        phase = dd.unitary_log(propagator_ivp(gen, T, 2))
        terms = dd.magnus_terms(gen, T)
        errors = [dd.norm(phase - terms.partial_sum(order)) for order in (1, 2, 3)]
        assert errors[1] < errors[0]
        assert errors[2] < errors[1]

    def test_switched_breakpoints(self, rng):
        generators = [dd.random_hermitian(2, rng, target_norm=1.0) for _ in range(3)]
        sh = dd.SwitchedHamiltonian.from_spans(generators, [0.1, 0.15, 0.05])
        terms = dd.magnus_terms(sh)
        phase = dd.unitary_log(dd.propagate_switched(sh))
        assert np.allclose(terms.omega1, sum(g * s for g, s in zip(generators, [0.1, 0.15, 0.05])))
        assert dd.norm(phase - terms.total) < dd.norm(phase - terms.partial_sum(2))

    def test_convergence_margin(self, rng, caplog):
        h = dd.random_hermitian(2, rng, target_norm=1.0)
        assert dd.magnus_terms(h, T=1.0).convergence_margin == pytest.approx(np.pi - 1.0)
        terms = dd.magnus_terms(h, T=4.0)
        assert not terms.converged
        assert "convergence margin" in caplog.text

    def test_partial_sum_order(self, rng):
        terms = dd.magnus_terms(dd.random_hermitian(2, rng), T=0.1)
        with pytest.raises(ValueError, match="'4' is not a Magnus order"):
            terms.partial_sum(4)

    def test_quadrature_points(self, rng):
        with pytest.raises(ValueError, match="need at least 8"):
            dd.magnus_terms(dd.random_hermitian(2, rng), T=0.1, quad_points=4)

    def test_missing_duration(self):
        with pytest.raises(ValueError, match="A duration T is needed"):
            dd.magnus_terms(lambda t: np.eye(2))


class TestTruncationBound:
    def test_value(self):
        assert dd.truncation_bound(2, 0.5, 0.4, 2.0) == pytest.approx(2.0 * 0.2 ** 2)

    def test_holds(self, rng, consts):
        for _ in range(5):
            h, T = 1.0, float(rng.uniform(0.1, 0.6))
            gen = smooth(rng, 2, h)
            phase = dd.unitary_log(dd.time_ordered_exp(gen, 0.0, T, 2000))
            terms = dd.magnus_terms(gen, T)
            assert dd.norm(phase - terms.omega1) <= dd.truncation_bound(2, h, T, consts.A(2))
            assert dd.norm(phase - terms.partial_sum(2)) <= dd.truncation_bound(3, h, T, consts.A(3))

    def test_outside_domain(self):
        with pytest.raises(dd.ConvergenceError, match="hT = 1 is not below 1"):
            dd.truncation_bound(2, 2.0, 0.5, 1.0)

    def test_invalid(self):
        with pytest.raises(ValueError, match="Invalid truncation bound inputs"):
            dd.truncation_bound(0, 0.5, 0.5, 1.0)


class TestFirstOrder:
    def test_averaged(self, scenario):
        model = dd.build_model(scenario)
        effective = dd.first_order_effective(model.group, model.split.h_err, model.split.h_bath)
        bath = np.kron(np.eye(model.split.dim_sys), model.split.h_bath)
        if dd.check_decoupling_condition(model.group, model.split.h_err).satisfied:
            assert np.allclose(effective.averaged, bath, atol=1e-12)
        assert np.allclose(effective.literal, model.group.order * effective.averaged)

    def test_bath_dimension(self):
        g = dd.universal_group(1)
        with pytest.raises(dd.DimensionError, match="does not fit"):
            dd.first_order_effective(g, np.zeros((4, 4)), np.zeros((3, 3)))


class TestConvergenceOrder:
    def test_third_order_residual(self, rng):
        gen = smooth(rng, 2, h=1.0)
        spans = [0.4, 0.2, 0.1, 0.05]
        residuals = [dd.norm(dd.unitary_log(propagator_ivp(gen, T, 2)) - dd.magnus_terms(gen, T).total)
                     for T in spans]
        assert dd.fit_slope(spans, residuals) >= 3.5

    def test_first_order_residual_is_quadratic(self, rng):
        # Piecewise-constant pieces scale with T, so log U − Ω₁ is dominated by Ω₂ ∝ T²
        generators = [dd.random_hermitian(2, rng, target_norm=1.0) for _ in range(2)]

        def residual(T):
            sh = dd.SwitchedHamiltonian.from_spans(generators, [T / 2, T / 2])
            return dd.norm(dd.unitary_log(dd.propagate_switched(sh)) - dd.magnus_terms(sh).omega1)
        assert residual(0.05) / residual(0.025) == pytest.approx(4.0, rel=0.15)

    @pytest.mark.parametrize("group, N", [("universal", 4), ("trivial", 2)])
    def test_averaged_matches_cycle(self, group, N):
        base = dd.SimulationScenario(n_sys=1, n_bath=1, coupling_layout="per-site", sb_scale=0.1, bath_norm=0.5,
                                    group=group, N=N)

        def deviation(tau):
            cycle = dd.run_cycle(base.replace(tau=tau))
            split = cycle.model.split
            effective = dd.first_order_effective(cycle.model.group, split.h_err, split.h_bath)
            return dd.norm(cycle.phi_e / cycle.cycle_time - (effective.averaged - split.embedded_bath))
        assert 0.4 <= deviation(0.01) / deviation(0.02) <= 0.6
