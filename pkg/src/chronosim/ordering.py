"""Ordered position/momentum polynomials, exact normal ordering, and expectations.

Normal forms put every ``x`` to the left of every ``p``.  Reduction uses only
``[x, p] = i hbar`` and keeps coefficients as exact fractions multiplying
``(i hbar)**k``; floating point enters only when a numeric ``hbar`` and the
physical prefactors are supplied.

Two orderings are supported for a mixed monomial ``p^a x^b``:

* Weyl: the average over all distinct arrangements of the letters, so Weyl
  ``p^2 x`` is ``(p^2 x + p x p + x p^2) / 3``.
* ``Lambda(l)``: ``l p^a x^b + (1 - l) x^b p^a``.  For ``a = b = 1`` this is
  the usual ``l p x + (1 - l) x p``; for higher powers it is our convention.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Union

import numpy as np

from . import _gaussian
from .errors import InvalidParameterError, UnsupportedOrderError
from .states import GridDensity, GridSpec, PacketMixture, PureCMState

MAX_POWER = 4
WEYL = "weyl"


@dataclass(frozen=True)
class Lambda:
    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise InvalidParameterError(f"lambda must lie in [0, 1], got {self.value}")


Ordering = Union[str, Lambda]


def _check_ordering(ordering):
    if ordering != WEYL and not isinstance(ordering, Lambda):
        raise InvalidParameterError(f"unknown ordering {ordering!r}")


@dataclass(frozen=True)
class NormalForm:
    """Exact sum of ``coeff * (i hbar)**k * x**i p**j``, keyed by ``(i, j, k)``."""

    coeffs: dict = field(default_factory=dict)

    def terms(self, hbar=1.0) -> list[tuple[complex, int, int]]:
        acc = defaultdict(complex)
        for (i, j, k), c in self.coeffs.items():
            acc[(i, j)] += float(c) * (1j * hbar) ** k
        return [(acc[key], key[0], key[1]) for key in sorted(acc) if acc[key] != 0]

    def __add__(self, other: "NormalForm") -> "NormalForm":
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            out[key] = out.get(key, 0) + c
        return NormalForm({k: v for k, v in out.items() if v != 0})

    def scale(self, factor) -> "NormalForm":
        factor = Fraction(factor)
        return NormalForm({k: v * factor for k, v in self.coeffs.items() if v * factor != 0})

    def __mul__(self, other: "NormalForm") -> "NormalForm":
        out = NormalForm()
        for (i, j, k), c in other.coeffs.items():
            prod = _times_word(self, "x" * i + "p" * j)
            shifted = {(a, b, kk + k): v * c for (a, b, kk), v in prod.coeffs.items()}
            out = out + NormalForm(shifted)
        return out


def _times_word(nf: NormalForm, word: str) -> NormalForm:
    cur = dict(nf.coeffs)
    for letter in word:
        nxt = defaultdict(Fraction)
        for (i, j, k), c in cur.items():
            if letter == "p":
                nxt[(i, j + 1, k)] += c
            else:
                # x^i p^j x = x^(i+1) p^j - i hbar j x^i p^(j-1)
                nxt[(i + 1, j, k)] += c
                if j:
                    nxt[(i, j - 1, k + 1)] -= j * c
        cur = {key: v for key, v in nxt.items() if v != 0}
    return NormalForm(cur)


@lru_cache(maxsize=None)
def normal_order_word(word: str) -> NormalForm:
    return _times_word(NormalForm({(0, 0, 0): Fraction(1)}), word)


def weyl_words(p_power: int, x_power: int) -> list[str]:
    n = p_power + x_power
    words = []
    for xs in combinations(range(n), x_power):
        words.append("".join("x" if i in xs else "p" for i in range(n)))
    return words


def ordering_words(p_power, x_power, ordering) -> list[tuple[Fraction, str]]:
    """The words (with weights) whose sum defines the ordered monomial."""
    _check_ordering(ordering)
    if p_power == 0 or x_power == 0 or ordering == WEYL:
        words = weyl_words(p_power, x_power)
        return [(Fraction(1, len(words)), w) for w in words]
    lam = Fraction(ordering.value)
    out = [(lam, "p" * p_power + "x" * x_power), (1 - lam, "x" * x_power + "p" * p_power)]
    return [(w, s) for w, s in out if w != 0]


def order_monomial(p_power: int, x_power: int, ordering: Ordering = WEYL) -> NormalForm:
    if not (0 <= p_power <= MAX_POWER and 0 <= x_power <= MAX_POWER):
        raise UnsupportedOrderError(
            f"powers (p^{p_power}, x^{x_power}) outside supported range 0..{MAX_POWER}"
        )
    out = NormalForm()
    for weight, word in ordering_words(p_power, x_power, ordering):
        out = out + normal_order_word(word).scale(weight)
    return out


@dataclass(frozen=True)
class OrderedMonomial:
    coeff: float
    p_power: int
    x_power: int
    ordering: Ordering = WEYL

    def __post_init__(self):
        _check_ordering(self.ordering)

    @property
    def is_mixed(self) -> bool:
        return self.p_power > 0 and self.x_power > 0


@dataclass(frozen=True)
class OrderedPolynomial:
    monomials: tuple = ()

    def __iter__(self):
        return iter(self.monomials)

    def __len__(self):
        return len(self.monomials)

    def __add__(self, other: "OrderedPolynomial") -> "OrderedPolynomial":
        return OrderedPolynomial(self.monomials + other.monomials)

    def normal_form(self, hbar=1.0) -> "NumericNormalForm":
        acc = defaultdict(complex)
        for mono in self.monomials:
            for c, i, j in order_monomial(mono.p_power, mono.x_power, mono.ordering).terms(hbar):
                acc[(i, j)] += mono.coeff * c
        return NumericNormalForm(dict(acc))

    def depends_on_x(self) -> bool:
        return any(m.x_power > 0 and m.coeff != 0 for m in self.monomials)


def polynomial(*monomials, drop_zero=True) -> OrderedPolynomial:
    return OrderedPolynomial(tuple(m for m in monomials if not (drop_zero and m.coeff == 0)))


@dataclass(frozen=True)
class NumericNormalForm:
    """``sum c * x**i p**j`` with complex coefficients keyed by ``(i, j)``."""

    coeffs: dict

    def terms(self):
        return [(c, i, j) for (i, j), c in sorted(self.coeffs.items())]

    def __add__(self, other):
        out = defaultdict(complex, self.coeffs)
        for k, v in other.coeffs.items():
            out[k] += v
        return NumericNormalForm(dict(out))

    def scale(self, factor):
        return NumericNormalForm({k: v * factor for k, v in self.coeffs.items()})

    def product(self, other, hbar=1.0) -> "NumericNormalForm":
        out = defaultdict(complex)
        for (i, j), a in self.coeffs.items():
            for (k, l), b in other.coeffs.items():
                basis = NormalForm({(i, j, 0): Fraction(1)}) * NormalForm({(k, l, 0): Fraction(1)})
                for c, ii, jj in basis.terms(hbar):
                    out[(ii, jj)] += a * b * c
        return NumericNormalForm(dict(out))

    def commutator(self, other, hbar=1.0) -> "NumericNormalForm":
        return self.product(other, hbar) + other.product(self, hbar).scale(-1.0)

    def pruned(self, tol=0.0) -> "NumericNormalForm":
        return NumericNormalForm({k: v for k, v in self.coeffs.items() if abs(v) > tol})


# ---------------------------------------------------------------- grid matrices


def position_matrix(grid: GridSpec) -> np.ndarray:
    return np.diag(grid.x).astype(complex)


def momentum_matrix(grid: GridSpec, power: int = 1) -> np.ndarray:
    f = grid.fourier_matrix()
    return (f.conj().T * grid.p**power) @ f


def monomial_matrix(mono: OrderedMonomial, grid: GridSpec) -> np.ndarray:
    """Literal matrix of the ordered monomial built from the defining word sums."""
    X = position_matrix(grid)
    Pm = momentum_matrix(grid)
    letters = {"x": X, "p": Pm}
    out = np.zeros((grid.n, grid.n), dtype=complex)
    for weight, word in ordering_words(mono.p_power, mono.x_power, mono.ordering):
        m = np.eye(grid.n, dtype=complex)
        for letter in word:
            m = m @ letters[letter]
        out += float(weight) * m
    return mono.coeff * out


def polynomial_matrix(poly: OrderedPolynomial, grid: GridSpec) -> np.ndarray:
    out = np.zeros((grid.n, grid.n), dtype=complex)
    for mono in poly:
        out += monomial_matrix(mono, grid)
    return out


# ---------------------------------------------------------------- expectations


def _packet_moment(state: PureCMState, x_power, p_power) -> complex:
    total = 0j
    terms = state.weighted_terms()
    for ai, pi in terms:
        left = _gaussian.apply_word(pi.function(), x_power, 0)
        for aj, pj in terms:
            right = _gaussian.apply_word(pj.function(), 0, p_power)
            total += np.conj(ai) * aj * _gaussian.inner(left, right)
    return total


def _grid_moment(rho: GridDensity, x_power, p_power) -> complex:
    g = rho.grid
    f = g.fourier_matrix()
    p_rho = f.conj().T @ (g.p[:, None] ** p_power * (f @ rho.matrix))
    return complex(np.sum(g.x**x_power * np.diag(p_rho)))


def normal_moment(state, x_power: int, p_power: int) -> complex:
    """``Tr(x**i p**j rho)`` for any supported state representation."""
    if isinstance(state, PureCMState):
        return _packet_moment(state, x_power, p_power)
    if isinstance(state, PacketMixture):
        return sum(w * _packet_moment(st, x_power, p_power) for w, st in state.components)
    if isinstance(state, GridDensity):
        return _grid_moment(state, x_power, p_power)
    raise InvalidParameterError(f"unsupported state type {type(state).__name__}")


def fourier_kernel(grid: GridSpec, power: int) -> np.ndarray:
    """Discretized ``(1/2pi) int dp p**power exp(-i p (x - x'))`` on grid pairs (x, x')."""
    e = np.exp(-1j * np.outer(grid.x, grid.p))
    return (e * grid.p**power) @ e.conj().T / grid.n


def _integral_moment(rho: GridDensity, mono: OrderedMonomial, kernel: str) -> complex:
    g = rho.grid
    x = g.x
    if mono.is_mixed and mono.ordering != WEYL:
        raise InvalidParameterError("the integral method needs Weyl-ordered mixed monomials")
    if kernel == "verbatim" and (mono.p_power, mono.x_power) == (2, 1):
        # (3 x p^2 - i hbar p) / (6 pi hbar), x taken as the bra coordinate
        weight = x[:, None] * fourier_kernel(g, 2) - 1j / 3.0 * fourier_kernel(g, 1)
        return mono.coeff * complex(np.sum(weight * rho.matrix))
    mid = 0.5 * (x[:, None] + x[None, :])
    weight = mid**mono.x_power * fourier_kernel(g, mono.p_power)
    return mono.coeff * complex(np.sum(weight * rho.matrix))


def expectation_of_ordered(
    poly: OrderedPolynomial | OrderedMonomial,
    state,
    method: str = "operator",
    kernel: str = "symmetric",
    hbar: float = 1.0,
) -> complex:
    """``Tr(poly rho)``.

    ``operator`` reduces each monomial to normal form and evaluates normal
    moments (closed form for packet states, spectral matrices for grids).
    ``integral`` evaluates the phase-space double integral on a grid state;
    ``kernel="symmetric"`` uses the midpoint Weyl symbol, ``"verbatim"`` uses
    ``(3 x p^2 - i p) / 6 pi`` with the bra coordinate for Weyl ``p^2 x``.
    """
    if isinstance(poly, OrderedMonomial):
        poly = OrderedPolynomial((poly,))
    if method == "operator":
        return complex(
            sum(c * normal_moment(state, i, j) for c, i, j in poly.normal_form(hbar).terms())
        )
    if method == "integral":
        if not isinstance(state, GridDensity):
            raise InvalidParameterError("the integral method needs a grid density")
        if hbar != 1.0:
            raise InvalidParameterError("the integral method works in hbar = 1 units")
        if kernel not in ("symmetric", "verbatim"):
            raise InvalidParameterError(f"unknown kernel {kernel!r}")
        return complex(sum(_integral_moment(state, m, kernel) for m in poly))
    raise InvalidParameterError(f"unknown method {method!r}")
