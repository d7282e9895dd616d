import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from chronosim.errors import DegenerateStateError, InvalidParameterError, ResolutionError
from chronosim.states import (
    GridSpec,
    dephase_momentum,
    grid_from_wavefunction,
    is_valid_density,
    make_gaussian_packet,
    mix,
    momentum_density,
    pure,
    superpose,
    to_grid,
)

OVERLAP_HALF_SHIFT = np.sqrt(8 * np.log(2))  # momentum offset, in spreads, for overlap 0.5


def _moment(state, k, lo=-40, hi=40):
    return quad(lambda p: p**k * momentum_density(state, p), lo, hi, limit=400, points=[0.0])[0]


class TestGaussianPacket:
    def test_unit_packet_moments(self):
        s = pure(make_gaussian_packet(0, 1, 0, 0))
        assert _moment(s, 0) == pytest.approx(1, abs=1e-10)
        assert _moment(s, 1) == pytest.approx(0, abs=1e-12)
        assert _moment(s, 2) == pytest.approx(1, abs=1e-10)

    def test_second_moment_by_quadrature(self):
        s = pure(make_gaussian_packet(0.1, 0.05, 0, 0))
        assert _moment(s, 2, -1, 1) == pytest.approx(0.0125, rel=1e-10)

    def test_position_shift_leaves_momentum_density(self):
        p = np.linspace(-6, 6, 201)
        a = momentum_density(pure(make_gaussian_packet(0, 1, 0, 0)), p)
        b = momentum_density(pure(make_gaussian_packet(0, 1, 5, 0)), p)
        np.testing.assert_allclose(a, b, atol=1e-15)

    @pytest.mark.parametrize("spread", [0.0, -1.0])
    def test_rejects_bad_spread(self, spread):
        with pytest.raises(InvalidParameterError):
            make_gaussian_packet(0, spread)

    def test_peak_density(self):
        assert momentum_density(pure(make_gaussian_packet(0, 1)), 0.0) == pytest.approx(1 / np.sqrt(2 * np.pi), rel=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(
        p1=st.floats(-3, 3), s1=st.floats(0.2, 2), x1=st.floats(-5, 5),
        p2=st.floats(-3, 3), s2=st.floats(0.2, 2), x2=st.floats(-5, 5),
    )
    def test_analytic_overlap_matches_quadrature(self, p1, s1, x1, p2, s2, x2):
        a = make_gaussian_packet(p1, s1, x1, 0.3)
        b = make_gaussian_packet(p2, s2, x2, -1.1)
        f = lambda p: np.conj(a.amplitude(p)) * b.amplitude(p)
        re = quad(lambda p: f(p).real, -30, 30, limit=800)[0]
        im = quad(lambda p: f(p).imag, -30, 30, limit=800)[0]
        assert abs(a.inner(b) - (re + 1j * im)) < 1e-8


class TestSuperpose:
    def test_identical_packets(self):
        pk = make_gaussian_packet(0.3, 0.5)
        s = superpose(np.pi / 4, 0, pk, pk)
        assert s.normalization == pytest.approx(1 / np.sqrt(2), rel=1e-14)
        p = np.linspace(-3, 3, 101)
        np.testing.assert_allclose(s.amplitude(p), pk.amplitude(p), atol=1e-14)

    def test_disjoint_packets(self):
        s = superpose(np.pi / 4, 0, make_gaussian_packet(0, 0.1), make_gaussian_packet(50, 0.1))
        assert s.normalization == pytest.approx(1.0, abs=1e-14)

    def test_half_overlap(self):
        a = make_gaussian_packet(0, 0.5)
        b = make_gaussian_packet(0.5 * OVERLAP_HALF_SHIFT, 0.5)
        assert a.inner(b).real == pytest.approx(0.5, abs=1e-14)
        s = superpose(np.pi / 4, 0, a, b)
        assert s.normalization == pytest.approx(0.81650, abs=1e-5)
        assert s.normalization == pytest.approx(1 / np.sqrt(1.5), rel=1e-13)
        assert _moment(s, 0) == pytest.approx(1, abs=1e-10)

    def test_destructive_cancellation(self):
        pk = make_gaussian_packet(0, 1)
        with pytest.raises(DegenerateStateError):
            superpose(np.pi / 4, np.pi, pk, pk)

    def test_phase_changes_density_for_overlap(self):
        a = make_gaussian_packet(0, 0.5)
        b = make_gaussian_packet(1.0, 0.5)
        mid = 0.5
        d0 = momentum_density(superpose(np.pi / 4, 0, a, b), mid)
        d1 = momentum_density(superpose(np.pi / 4, np.pi, a, b), mid)
        assert abs(d0 - d1) > 0.1

    @settings(max_examples=25, deadline=None)
    @given(phi1=st.floats(0, 2 * np.pi), phi2=st.floats(0, 2 * np.pi), theta=st.floats(0.1, 1.4))
    def test_disjoint_density_phase_independent(self, phi1, phi2, theta):
        a = make_gaussian_packet(-20, 0.5)
        b = make_gaussian_packet(20, 0.5, 3.0)
        p = np.linspace(-25, 25, 501)
        d1 = momentum_density(superpose(theta, phi1, a, b), p)
        d2 = momentum_density(superpose(theta, phi2, a, b), p)
        assert np.max(np.abs(d1 - d2)) < 1e-12


class TestMix:
    def test_single_component(self):
        pk = make_gaussian_packet(0.2, 0.4)
        m = mix([(1.0, pk)])
        p = np.linspace(-2, 2, 51)
        np.testing.assert_allclose(momentum_density(m, p), np.abs(pk.amplitude(p)) ** 2)

    def test_renormalizes_weights(self):
        m = mix([(0.3, make_gaussian_packet(0, 1)), (0.9, make_gaussian_packet(1, 1))])
        assert [w for w, _ in m.components] == pytest.approx([0.25, 0.75])

    def test_orthogonal_trace_one(self):
        m = mix([(np.cos(np.pi / 4) ** 2, make_gaussian_packet(-10, 0.3)), (np.sin(np.pi / 4) ** 2, make_gaussian_packet(10, 0.3))])
        assert sum(w for w, _ in m.components) == pytest.approx(1.0, abs=1e-15)
        assert _moment(m, 0) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("weights", [(0.0, 0.0), (-1.0, 2.0)])
    def test_bad_weights(self, weights):
        with pytest.raises(InvalidParameterError):
            mix([(w, make_gaussian_packet(0, 1)) for w in weights])


class TestGrids:
    def test_narrow_packet_trace(self):
        rho = to_grid(pure(make_gaussian_packet(0, 5.0)), GridSpec(512, -10, 10))
        assert abs(rho.trace() - 1) < 1e-8
        assert is_valid_density(rho)

    def test_pure_state_rank_one(self):
        s = superpose(0.6, 0.4, make_gaussian_packet(0.5, 1.0, -1), make_gaussian_packet(-0.5, 0.8, 1))
        rho = to_grid(s, GridSpec(256, -12, 12))
        ev = np.linalg.eigvalsh(rho.matrix)
        assert ev[-2] < 1e-8
        assert ev[-1] == pytest.approx(1, abs=1e-8)

    def test_mixture_eigenvalues(self):
        m = mix([(0.3, make_gaussian_packet(0, 1, -5)), (0.7, make_gaussian_packet(0, 1, 5))])
        ev = np.sort(np.linalg.eigvalsh(to_grid(m, GridSpec(256, -15, 15)).matrix))[::-1]
        np.testing.assert_allclose(ev[:2], [0.7, 0.3], atol=1e-6)

    def test_coverage_error(self):
        with pytest.raises(ResolutionError):
            to_grid(pure(make_gaussian_packet(0, 0.1)), GridSpec(256, -5, 5))

    def test_nyquist_error(self):
        with pytest.raises(ResolutionError):
            to_grid(pure(make_gaussian_packet(0, 10.0)), GridSpec(16, -5, 5))


class TestDephaseMomentum:
    GRID = GridSpec(512, -300, 300)

    def test_momentum_eigenstate_unchanged(self):
        g = self.GRID
        rho = grid_from_wavefunction(g, np.exp(1j * g.p[7] * g.x))
        de = dephase_momentum(rho)
        assert np.max(np.abs(de.matrix - rho.matrix)) < 1e-12

    def test_disjoint_superposition_equals_mixture(self):
        a, b = make_gaussian_packet(-1.0, 0.1), make_gaussian_packet(1.0, 0.1)
        de = dephase_momentum(superpose(np.pi / 4, 0.7, a, b), self.GRID)
        dm = dephase_momentum(mix([(0.5, a), (0.5, b)]), self.GRID)
        assert np.max(np.abs(de.matrix - dm.matrix)) < 1e-12

    def test_phase_dependent_diagonal(self):
        a, b = make_gaussian_packet(0, 0.2), make_gaussian_packet(0.3, 0.2)
        d0 = dephase_momentum(superpose(np.pi / 4, 0, a, b), self.GRID)
        d1 = dephase_momentum(superpose(np.pi / 4, np.pi, a, b), self.GRID)
        assert np.max(np.abs(np.diag(d0.momentum_matrix()) - np.diag(d1.momentum_matrix()))) > 1e-3

    def test_idempotent(self):
        s = superpose(0.5, 1.0, make_gaussian_packet(0, 0.2, 3), make_gaussian_packet(0.4, 0.25, -8))
        once = dephase_momentum(s, self.GRID)
        twice = dephase_momentum(once)
        assert np.max(np.abs(once.matrix - twice.matrix)) < 1e-10
        assert is_valid_density(once)

    def test_under_resolved(self):
        with pytest.raises(ResolutionError):
            dephase_momentum(pure(make_gaussian_packet(0, 0.05)), GridSpec(256, -100, 100))
