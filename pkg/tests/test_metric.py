import warnings

import mpmath
import numpy as np
import pytest

from chronosim.errors import DomainError, PNValidityWarning
from chronosim.metric import (
    classical_energy,
    isotropic_to_schwarzschild_radius,
    normalized_g00_delta_exact,
    pn_metric_expansion,
    pn_residual,
    schwarzschild_isotropic_metric,
)

mpmath.mp.dps = 50


def _mp_g00_ratio_minus_one(eps, eps0):
    def g(e):
        u = mpmath.mpf(e) / 2
        return ((1 - u) / (1 + u)) ** 2

    return g(eps) / g(eps0) - 1


def test_flat_when_massless():
    assert schwarzschild_isotropic_metric(0.0, 3.0) == (1.0, 1.0)


def test_isotropic_value_and_schwarzschild_crosscheck():
    g00, spatial = schwarzschild_isotropic_metric(1.0, 500.0)  # GM/rho = 0.002
    assert g00 == pytest.approx((0.999 / 1.001) ** 2, rel=1e-15)
    assert g00 == pytest.approx(0.996008, abs=1e-6)
    assert spatial == pytest.approx(1.001**4, rel=1e-15)
    r = isotropic_to_schwarzschild_radius(1.0, 500.0)
    assert g00 == pytest.approx(1 - 2.0 / r, rel=1e-14)


def test_horizon_limit():
    g00, _ = schwarzschild_isotropic_metric(1.0, 0.5000001)
    assert g00 < 1e-12
    with pytest.raises(DomainError):
        schwarzschild_isotropic_metric(1.0, 0.5)


def test_expansion_coefficients():
    c = pn_metric_expansion(1.0, 1e4)
    assert c.g00_poly == (1.0, -2.0, 2.0)
    assert c.g00_r0_poly == (1.0, 2.0, 2.0)
    assert c.gij_scalar_poly == (1.0, 2.0, 1.5)
    assert c.warning is None


def test_normalized_at_expansion_point():
    c = pn_metric_expansion(1.0, 1e3)
    assert abs(c.g00(1e3) - 1.0) < 1e-11


def test_validity_warning():
    with pytest.warns(PNValidityWarning):
        c = pn_metric_expansion(1.0, 5.0)
    assert c.warning is not None
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        pn_metric_expansion(1.0, 100.0)


@pytest.mark.parametrize("eps", [1e-5, 1e-4, 1e-3, 1e-2, 0.05])
def test_exact_normalized_g00_against_mpmath(eps):
    ref = _mp_g00_ratio_minus_one(eps, eps / 2)
    assert float(normalized_g00_delta_exact(eps, eps / 2)) == pytest.approx(float(ref), rel=1e-13)


@pytest.mark.parametrize("eps", [1e-5, 1e-4, 1e-3, 1e-2])
def test_residual_against_mpmath(eps):
    c = pn_metric_expansion(eps / 2, 1.0)
    pn = mpmath.mpf(float(c.g00_delta(0.5)))
    ref = abs(pn - _mp_g00_ratio_minus_one(eps, eps / 2))
    assert float(pn_residual(eps)) == pytest.approx(float(ref), rel=1e-6)


def test_residual_scales_cubically():
    eps = np.logspace(-5, -2, 7)
    slope = np.polyfit(np.log(eps), np.log(pn_residual(eps)), 1)[0]
    assert slope == pytest.approx(3.0, abs=0.1)
    assert np.all(pn_residual(eps) / eps**3 < 10)


def test_classical_energy_examples():
    assert classical_energy(0.0) == 1.0
    assert classical_energy(0.75) == pytest.approx(1.25, rel=1e-15)
    assert classical_energy(0.0, (0.996006, 1.0)) == pytest.approx(0.998001, abs=1e-6)
    with pytest.raises(DomainError):
        classical_energy(0.1, (-0.5, 1.0))
