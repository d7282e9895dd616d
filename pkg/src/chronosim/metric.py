"""Schwarzschild metric in isotropic coordinates and its post-Newtonian expansion."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidParameterError, PNValidityWarning

PN_VALIDITY_LIMIT = 0.1


def schwarzschild_isotropic_metric(M, rho, G=1.0, c=1.0) -> tuple[float, float]:
    """Return ``(g00, spatial_factor)`` at isotropic radius ``rho``."""
    u = G * M / (2.0 * rho * c**2)
    if rho <= 0 or u >= 1.0:
        raise DomainError(f"isotropic radius {rho} is at or inside GM/2c^2")
    return ((1.0 - u) / (1.0 + u)) ** 2, (1.0 + u) ** 4


def isotropic_to_schwarzschild_radius(M, rho, G=1.0, c=1.0) -> float:
    return rho * (1.0 + G * M / (2.0 * rho * c**2)) ** 2


def _log_g00_isotropic(eps):
    # log g00 for GM/(rho c^2) = eps, accurate for tiny eps
    u = 0.5 * eps
    return 2.0 * (np.log1p(-u) - np.log1p(u))


def normalized_g00_delta_exact(eps, eps0):
    """``g00(rho)/g00(rho0) - 1`` from the closed isotropic form."""
    return np.expm1(_log_g00_isotropic(eps) - _log_g00_isotropic(eps0))


@dataclass(frozen=True)
class MetricCoefficients:
    """Second-order PN metric around ``r0`` with time normalized to proper time at ``r0``.

    Polynomials are ascending in ``eps = GM/(r c^2)`` (or ``eps0`` for the
    ``r0`` factor); ``g_ij = -delta_ij * gij(r)``.
    """

    g00_poly: tuple = (1.0, -2.0, 2.0)
    g00_r0_poly: tuple = (1.0, 2.0, 2.0)
    gij_scalar_poly: tuple = (1.0, 2.0, 1.5)
    M: float = 0.0
    r0: float = 1.0
    G: float = 1.0
    c: float = 1.0
    warning: str | None = None

    def eps(self, r):
        return self.G * self.M / (np.asarray(r, dtype=float) * self.c**2)

    @property
    def eps0(self) -> float:
        return self.G * self.M / (self.r0 * self.c**2)

    def g00_delta(self, r):
        """``g00(r) - 1`` without cancellation error."""
        a = np.polynomial.polynomial.polyval(self.eps0, self.g00_r0_poly) - 1.0
        b = np.polynomial.polynomial.polyval(self.eps(r), self.g00_poly) - 1.0
        return a + b + a * b

    def g00(self, r):
        return 1.0 + self.g00_delta(r)

    def gij_scalar(self, r):
        return np.polynomial.polynomial.polyval(self.eps(r), self.gij_scalar_poly)

    @property
    def surface_gravity(self) -> float:
        """Acceleration ``g = GM / r0^2`` at the expansion point."""
        return self.G * self.M / self.r0**2


def pn_metric_expansion(M, r0, G=1.0, c=1.0) -> MetricCoefficients:
    if r0 <= 0:
        raise InvalidParameterError(f"r0 must be > 0, got {r0}")
    eps0 = G * M / (r0 * c**2)
    message = None
    if eps0 >= PN_VALIDITY_LIMIT:
        message = f"GM/r0c^2 = {eps0:g} >= {PN_VALIDITY_LIMIT}: expansion outside validity"
        warnings.warn(message, PNValidityWarning, stacklevel=2)
    return MetricCoefficients(M=float(M), r0=float(r0), G=float(G), c=float(c), warning=message)


def pn_residual(eps, r0_ratio=2.0):
    """|g00_PN - g00_exact| at ``GM/rc^2 = eps`` with ``r0 = r0_ratio * r``."""
    eps = np.asarray(eps, dtype=float)
    eps0 = eps / r0_ratio
    out = []
    for e, e0 in zip(np.atleast_1d(eps), np.atleast_1d(eps0)):
        coeffs = MetricCoefficients(M=e0, r0=1.0)
        pn = coeffs.g00_delta(e0 / e)
        out.append(abs(pn - normalized_g00_delta_exact(e, e0)))
    return np.array(out) if eps.ndim else out[0]


def classical_energy(p, metric_point=(1.0, 1.0), m=1.0, c=1.0) -> float:
    """Energy of a point particle in 1D with ``g_xx = -gij_scalar``."""
    g00, gij = metric_point
    if g00 < 0 or gij <= 0:
        raise DomainError(f"unphysical metric point {metric_point}")
    radicand = (m * c**2) ** 2 + (p * c) ** 2 / gij
    if radicand < 0:
        raise DomainError("negative radicand in dispersion relation")
    return float(np.sqrt(g00) * np.sqrt(radicand))
