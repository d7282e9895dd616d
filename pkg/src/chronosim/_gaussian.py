"""Closed-form algebra for polynomial-times-Gaussian momentum amplitudes.

A function is stored as ``(poly, quad, centre)`` meaning ``P(q) * exp(Q(q))``
with ``q = p - centre``; ``poly`` holds the ascending complex coefficients of
``P`` and ``quad`` the three ascending coefficients of the quadratic exponent
``Q``.  Expanding about the packet centre keeps large mean momenta from
cancelling catastrophically in the exponent.  Position acts as
``i d/dp`` in the momentum representation (hbar = 1), so applying x or p keeps
a function inside this family and every matrix element reduces to complex
Gaussian moments.
"""

import numpy as np
from numpy.polynomial import polynomial as P


def packet_function(p_mean, p_spread, x_mean, phase):
    var4 = 4.0 * p_spread**2
    log_norm = -0.25 * np.log(2.0 * np.pi * p_spread**2)
    quad = np.array(
        [log_norm + 1j * (phase - x_mean * p_mean), -1j * x_mean, -1.0 / var4],
        dtype=complex,
    )
    return np.array([1.0 + 0j]), quad, float(p_mean)


def apply_x(func):
    poly, quad, centre = func
    dq = np.array([quad[1], 2.0 * quad[2]])
    new = P.polyadd(P.polyder(poly), P.polymul(poly, dq))
    return 1j * np.asarray(new, dtype=complex), quad, centre


def apply_p(func):
    poly, quad, centre = func
    return P.polymul(poly, [centre, 1.0]).astype(complex), quad, centre


def apply_word(func, x_power, p_power):
    """Apply ``x**x_power p**p_power`` (x to the left) to ``func``."""
    for _ in range(p_power):
        func = apply_p(func)
    for _ in range(x_power):
        func = apply_x(func)
    return func


def recentre(func, new_centre):
    """Same function expressed in ``q = p - new_centre``."""
    poly, quad, centre = func
    d = new_centre - centre
    if d == 0.0:
        return func
    shift = P.Polynomial([d, 1.0])
    poly = np.atleast_1d(P.Polynomial(poly)(shift).coef).astype(complex)
    c0, c1, c2 = quad
    quad = np.array([c0 + c1 * d + c2 * d * d, c1 + 2.0 * c2 * d, c2], dtype=complex)
    return poly, quad, float(new_centre)


def gaussian_moments(quad, n_max):
    """Integrals of ``q**n exp(Q(q))`` over the real line for n <= n_max."""
    c0, c1, c2 = quad
    a = -c2.real
    if a <= 0 or abs(c2.imag) > 1e-14 * a:
        raise ValueError("exponent is not a decaying Gaussian")
    mu = c1 / (2.0 * a)
    log_m0 = 0.5 * np.log(np.pi / a) + c1**2 / (4.0 * a) + c0
    out = np.zeros(n_max + 1, dtype=complex)
    if log_m0.real < -700.0:
        return out
    out[0] = np.exp(log_m0)
    if n_max >= 1:
        out[1] = mu * out[0]
    for n in range(2, n_max + 1):
        out[n] = mu * out[n - 1] + (n - 1) / (2.0 * a) * out[n - 2]
    return out


def inner(f, g):
    """<f|g> = integral of conj(f(p)) g(p) dp, evaluated about the midpoint centre."""
    mid = 0.5 * (f[2] + g[2])
    pf, qf, _ = recentre(f, mid)
    pg, qg, _ = recentre(g, mid)
    poly = P.polymul(np.conj(pf), pg)
    moments = gaussian_moments(np.conj(qf) + qg, len(poly) - 1)
    return complex(np.dot(poly, moments))


def evaluate(func, p):
    poly, quad, centre = func
    q = np.asarray(p, dtype=float) - centre
    return P.polyval(q, poly) * np.exp(P.polyval(q, quad))
