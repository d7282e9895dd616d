import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chronosim.clocks import clock_free_evolve, oscillator_clock, two_level_clock
from chronosim.errors import InvalidOperatorError, ResolutionError, ShapeError
from chronosim.evolution import (
    CompositeState,
    bch_first_order_interaction,
    dispersion_rate,
    dyson_first_order_clock_state,
    dyson_from_expectations,
    exact_flat_space_evolve,
    exact_grid_evolve,
    gravitational_limit_evolve,
    momentum_eigenstate_evolve,
    partial_trace_cm,
    product_state,
)
from chronosim.hamiltonian import decompose_hamiltonian, total_grid_hamiltonian
from chronosim.observables import fit_rate_factor
from chronosim.ordering import OrderedMonomial, polynomial
from chronosim.states import (
    GridDensity,
    GridSpec,
    dephase_momentum,
    dephase_position,
    gaussian_grid_state,
    make_gaussian_packet,
    pure,
    superpose,
    to_grid,
)

CLOCKS = [two_level_clock(1.0), oscillator_clock(0.8, 5)]


def _rate(report, clock):
    return fit_rate_factor(report.rho_clock, clock, clock.rho0, report.t).s


class TestExactFlatSpace:
    def test_rest_frame_unit_rate(self):
        clock = two_level_clock(0.3)
        assert dispersion_rate(0.0, clock, 1.0) == pytest.approx(1.0, abs=1e-15)
        assert _rate(momentum_eigenstate_evolve(0.0, clock, 1.0, 4.0), clock) == pytest.approx(1.0, abs=1e-10)

    def test_fitted_rate_is_branch_rate(self):
        clock = two_level_clock(1e-3)
        rep = momentum_eigenstate_evolve(0.75, clock, 1.0, 1000.0)
        assert _rate(rep, clock) == pytest.approx(dispersion_rate(0.75, clock, 1.0), abs=1e-10)

    def test_converges_to_inverse_gamma(self):
        devs = []
        for omega in [1e-2, 1e-3, 1e-4, 1e-5]:
            clock = two_level_clock(omega)
            devs.append(abs(_rate(momentum_eigenstate_evolve(0.75, clock, 1.0, 1.0 / omega), clock) - 0.8))
        ratios = np.array(devs[:-1]) / np.array(devs[1:])
        np.testing.assert_allclose(ratios, 10.0, rtol=1e-2)
        assert devs[-1] < 1e-4

    def test_narrow_packet_matches_eigenstate(self):
        clock = two_level_clock(0.1)
        a = exact_flat_space_evolve(pure(make_gaussian_packet(0.75, 1e-7)), clock, 1.0, 20.0, 256)
        b = momentum_eigenstate_evolve(0.75, clock, 1.0, 20.0)
        assert np.max(np.abs(a.rho_clock - b.rho_clock)) < 1e-10

    @pytest.mark.parametrize("clock", CLOCKS, ids=["two-level", "oscillator"])
    def test_momentum_dephasing_invariance(self, clock):
        s = superpose(0.6, 1.3, make_gaussian_packet(0.0, 0.05, -5.0), make_gaussian_packet(0.08, 0.04, 10.0))
        grid = GridSpec(256, -700, 700)
        a = exact_flat_space_evolve(s, clock, 1.0, 3.0, 256)
        b = exact_flat_space_evolve(dephase_momentum(s, grid), clock, 1.0, 3.0)
        assert np.max(np.abs(a.rho_clock - b.rho_clock)) < 1e-12

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1))
    def test_momentum_phase_invariance(self, seed):
        rng = np.random.default_rng(seed)
        g = GridSpec(128, -40, 40)
        rho = gaussian_grid_state(g, 1.0, 3.0, 0.2, 0.05)
        f = g.fourier_matrix()
        u = f.conj().T @ np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, g.n))) @ f
        kicked = GridDensity(u @ rho.matrix @ u.conj().T, g)
        clock = CLOCKS[1]
        a = exact_flat_space_evolve(rho, clock, 1.0, 2.0)
        b = exact_flat_space_evolve(kicked, clock, 1.0, 2.0)
        assert np.max(np.abs(a.rho_clock - b.rho_clock)) < 1e-12

    def test_packet_and_grid_paths_agree(self):
        s = superpose(0.4, 0.3, make_gaussian_packet(0.1, 0.3, 0.0), make_gaussian_packet(-0.2, 0.25, 3.0))
        clock = CLOCKS[1]
        a = exact_flat_space_evolve(s, clock, 1.0, 1.5, 512)
        b = exact_flat_space_evolve(to_grid(s, GridSpec(256, -40, 40)), clock, 1.0, 1.5)
        assert np.max(np.abs(a.rho_clock - b.rho_clock)) < 1e-10
        for r in (a, b):
            assert r.diagnostics["trace_drift"] < 1e-8
            assert r.diagnostics["hermiticity_error"] < 1e-10

    def test_under_resolved(self):
        with pytest.raises(ResolutionError):
            exact_flat_space_evolve(pure(make_gaussian_packet(0, 1.0)), CLOCKS[0], 1.0, 1.0, n_p=64)


class TestExactGrid:
    GRID = GridSpec(48, -6, 6)

    def _setup(self, g=0.05):
        clock = two_level_clock(1.0)
        rho = gaussian_grid_state(self.GRID, 0.3, 0.9, 0.2, 0.05)
        h = total_grid_hamiltonian(decompose_hamiltonian(1.0, g), clock, self.GRID)
        return clock, rho, product_state(rho, clock.rho0), h

    def test_identity_at_zero(self):
        _, _, c0, h = self._setup()
        out = exact_grid_evolve(c0, h, 0.0)
        assert np.max(np.abs(out.state.matrix - c0.matrix)) < 1e-12

    def test_decoupled_is_free_evolution(self):
        clock, rho, c0, _ = self._setup()
        h = np.kron(np.eye(self.GRID.n), clock.hamiltonian)
        out = exact_grid_evolve(c0, h, 2.7)
        assert np.max(np.abs(out.rho_clock - clock_free_evolve(clock, clock.rho0, 2.7))) < 1e-10

    def test_preserves_spectrum(self):
        _, _, c0, h = self._setup()
        out = exact_grid_evolve(c0, h, 0.8)
        m = out.state.matrix
        assert abs(np.trace(m) - 1) < 1e-8
        assert np.max(np.abs(m - m.conj().T)) < 1e-10
        np.testing.assert_allclose(np.linalg.eigvalsh(m), np.linalg.eigvalsh(c0.matrix), atol=1e-8)

    def test_rejects_non_hermitian(self):
        _, _, c0, h = self._setup()
        bad = h.copy()
        bad[0, 1] += 1e-3
        with pytest.raises(InvalidOperatorError):
            exact_grid_evolve(c0, bad, 1.0)
        with pytest.raises(ShapeError):
            exact_grid_evolve(c0, h[:-1, :-1], 1.0)

    def test_dyson_error_is_second_order(self):
        clock, rho, c0, h = self._setup()
        d = decompose_hamiltonian(1.0, 0.05)
        ts = np.array([0.01, 0.02, 0.04])
        errs = [
            np.linalg.norm(exact_grid_evolve(c0, h, t).rho_clock - dyson_first_order_clock_state(rho, clock.rho0, clock, d, t).rho_clock)
            for t in ts
        ]
        assert np.polyfit(np.log(ts), np.log(errs), 1)[0] == pytest.approx(2.0, abs=0.15)


class TestDyson:
    def test_identity_at_zero(self):
        clock = CLOCKS[1]
        out = dyson_from_expectations(clock.rho0, clock, -0.01, 0.02, 0.0)
        np.testing.assert_array_equal(out.rho_clock, clock.rho0)

    def test_no_coupling_is_free(self):
        clock = CLOCKS[1]
        out = dyson_from_expectations(clock.rho0, clock, 0.0, 0.0, 3.3)
        np.testing.assert_allclose(out.rho_clock, clock_free_evolve(clock, clock.rho0, 3.3), atol=0)

    def test_two_level_off_diagonal(self):
        clock = two_level_clock(1.0)
        out = dyson_from_expectations(clock.rho0, clock, -0.005, 0.0, 0.1)
        free = clock_free_evolve(clock, clock.rho0, 0.1)
        assert out.rho_clock[0, 1] == pytest.approx(free[0, 1] * (1 - 0.0005j), abs=1e-16)
        assert out.diagnostics["trace_drift"] < 1e-15
        assert out.diagnostics["correction_ratio"] < 0.1

    def test_expectations_from_state(self):
        clock = two_level_clock(1.0)
        state = pure(make_gaussian_packet(0.1, 0.05))
        out = dyson_first_order_clock_state(state, clock.rho0, clock, decompose_hamiltonian(1.0), 0.5)
        assert out.diagnostics["v1"] == pytest.approx(-0.00625, rel=1e-12)
        assert out.diagnostics["v2"] == pytest.approx(0.00625, rel=1e-12)


class TestBCH:
    V = polynomial(OrderedMonomial(1.0, 2, 0))

    def test_zero_time(self):
        h = decompose_hamiltonian(1.0, 0.1).h_cm
        assert bch_first_order_interaction(self.V, h, 0.0).coeffs == {(0, 2): 1.0}

    def test_gravity_generates_momentum_term(self):
        m, g, tp = 2.0, 0.1, 0.3
        h = polynomial(OrderedMonomial(m * g, 0, 1))
        out = bch_first_order_interaction(self.V, h, tp)
        assert out.coeffs[(0, 2)] == pytest.approx(1.0)
        assert out.coeffs[(0, 1)] == pytest.approx(-2 * m * g * tp)

    @pytest.mark.parametrize("tp", [0.1, 5.0])
    def test_commuting_unchanged(self, tp):
        h = decompose_hamiltonian(1.0).h_cm
        assert bch_first_order_interaction(self.V, h, tp).coeffs == {(0, 2): 1.0}


class TestPartialTrace:
    def test_product(self):
        g = GridSpec(16, -4, 4)
        rho = gaussian_grid_state(g, 0.0, 1.0)
        clock = CLOCKS[1]
        np.testing.assert_allclose(partial_trace_cm(product_state(rho, clock.rho0)), clock.rho0, atol=1e-15)

    def test_correlated_branches(self):
        # (|0>|a> + |1>|b>)/sqrt 2 with orthogonal cm branches
        a, b = np.array([1, 0], complex), np.array([0.6, 0.8j])
        psi = (np.kron([1, 0], a) + np.kron([0, 1], b)) / np.sqrt(2)
        out = partial_trace_cm(CompositeState(np.outer(psi, psi.conj()), None, 2))
        expected = 0.5 * (np.outer(a, a.conj()) + np.outer(b, b.conj()))
        np.testing.assert_allclose(out, expected, atol=1e-15)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 6), d=st.integers(2, 4))
    def test_random_composite(self, seed, n, d):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(n * d, n * d)) + 1j * rng.normal(size=(n * d, n * d))
        rho = a @ a.conj().T
        rho /= np.trace(rho)
        out = partial_trace_cm(CompositeState(rho, None, d))
        assert abs(np.trace(out) - 1) < 1e-10
        assert np.linalg.eigvalsh(out)[0] > -1e-12

    def test_shape_error(self):
        with pytest.raises(ShapeError):
            CompositeState(np.eye(5), None, 2)


class TestGravitationalLimit:
    @pytest.mark.parametrize("x0", [0.0, 3.0, -2.0])
    def test_localized_rate(self, x0):
        clock = two_level_clock(1.0)
        g, t = 1e-3, 2.0
        rep = gravitational_limit_evolve(pure(make_gaussian_packet(0.0, 50.0, x0)), clock, g, t, 512)
        assert _rate(rep, clock) == pytest.approx(1.0 + g * x0, abs=1e-9)

    @pytest.mark.parametrize("clock", CLOCKS, ids=["two-level", "oscillator"])
    def test_position_dephasing_invariance(self, clock):
        s = superpose(0.5, 0.9, make_gaussian_packet(0.3, 1.0, -1.0), make_gaussian_packet(-0.4, 0.8, 2.5))
        grid = GridSpec(256, -8, 10)
        a = gravitational_limit_evolve(to_grid(s, grid), clock, 0.01, 3.0)
        b = gravitational_limit_evolve(dephase_position(s, grid), clock, 0.01, 3.0)
        assert np.max(np.abs(a.rho_clock - b.rho_clock)) < 1e-12

    def test_kappa_scales_coupling(self):
        s = pure(make_gaussian_packet(0.0, 1.0, 2.0))
        for kappa in [0.0, 0.5, 1.0]:
            clock = two_level_clock(1.0, kappa)
            rep = gravitational_limit_evolve(s, clock, 1e-3, 3.0)
            assert _rate(rep, clock) == pytest.approx(1 + (1 + kappa) * 2e-3, abs=1e-10)
