"""Exact rational orbits of the companion matrix on the torus ``T^n``.

A rational point ``q`` is stored as integer numerators over one shared
denominator ``D``; ``x -> C x mod 1`` keeps ``D`` fixed because ``C`` is an
integer matrix, so every orbit is eventually periodic and is found by hashing
exact states.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from . import errors
from .algebra import AlgebraicContext, alpha_from_rational_vector, lcm, parse_rational, poly_divmod
from .filter import TrigPolynomial

STATE_WARNING = 10 ** 7
NEAR_ZERO = 1e-13


@dataclass(frozen=True)
class TorusState:
    """The point ``numerators / denominator`` of ``T^n``."""

    numerators: tuple
    denominator: int

    def __post_init__(self):
        if self.denominator < 1:
            raise errors.ValidationError("denominator must be positive")
        if any(not 0 <= x < self.denominator for x in self.numerators):
            raise errors.ValidationError("numerators must be reduced modulo the denominator")

    @classmethod
    def from_rationals(cls, q) -> "TorusState":
        q = [parse_rational(x) for x in q]
        D = lcm(x.denominator for x in q)
        return cls(tuple(int(x * D) % D for x in q), D)

    def as_fractions(self):
        return [Fraction(x, self.denominator) for x in self.numerators]

    def as_array(self):
        return np.array(self.numerators, dtype=float) / self.denominator

    def __str__(self):
        return "(" + ", ".join(str(f) for f in self.as_fractions()) + ")"


@dataclass(frozen=True)
class OrbitResult:
    preperiod: int
    period: int
    cycle: tuple
    seed_q: tuple
    alpha: float


def _step(C, state: TorusState) -> TorusState:
    D = state.denominator
    x = state.numerators
    return TorusState(tuple(sum(c * xi for c, xi in zip(row, x)) % D for row in C), D)


def torus_orbit(ctx: AlgebraicContext, q) -> OrbitResult:
    """Orbit of ``q mod 1`` under ``x -> C x mod 1`` until the first repeated state."""
    q = [parse_rational(x) for x in q]
    if len(q) != ctx.n:
        raise errors.DimensionMismatch(f"q has length {len(q)}, expected {ctx.n}")
    C = ctx.companion
    state = TorusState.from_rationals(q)
    seen = {}
    path = []
    while state not in seen:
        seen[state] = len(path)
        path.append(state)
        if len(path) == STATE_WARNING:
            warnings.warn(f"orbit has more than {STATE_WARNING} states", RuntimeWarning, stacklevel=2)
        state = _step(C, state)
    start = seen[state]
    alpha, _, _ = alpha_from_rational_vector(ctx, q)
    return OrbitResult(start, len(path) - start, tuple(path[start:]), tuple(q), float(alpha))


# ---------------------------------------------------------------------------
# exact zero test at roots of unity


@lru_cache(maxsize=256)
def cyclotomic(D: int) -> tuple:
    """Ascending integer coefficients of the ``D``-th cyclotomic polynomial."""
    num = [-1] + [0] * (D - 1) + [1]
    for d in range(1, D):
        if D % d == 0:
            num, rem = poly_divmod(num, list(cyclotomic(d)))
            assert not any(rem)
    return tuple(int(c) for c in num)


def _rationalize(w: complex, max_den: int = 10 ** 6):
    out = []
    for part in (w.real, w.imag):
        f = Fraction(part).limit_denominator(max_den)
        if abs(float(f) - part) > 1e-12 * max(1.0, abs(part)):
            return None
        out.append(f)
    return out


def _reduce(poly, D):
    """Remainder modulo the cyclotomic polynomial of order ``D``."""
    if not any(poly):
        return poly
    _, rem = poly_divmod(poly, list(cyclotomic(D)))
    return rem


def vanishes_exactly(P: TrigPolynomial, state: TorusState):
    """Whether ``P_trig`` vanishes at the rational point ``state``.

    Returns True or False when the coefficients are Gaussian rationals (to
    1e-12), else None. With ``zeta = exp(2 pi i / D)`` the value is
    ``Q(zeta) = (R + i I)(zeta)`` with rational ``R, I``; ``R^2 + I^2`` vanishes at
    ``zeta`` iff ``(R + i I)(zeta) = 0`` or ``(R - i I)(zeta) = 0``, and the two
    cases are told apart by which of the two values is numerically smaller.
    """
    D = state.denominator
    rat = [_rationalize(complex(c)) for c in P.coeffs]
    if any(r is None for r in rat):
        return None
    R = [Fraction(0)] * D
    I = [Fraction(0)] * D
    for (re, im), e in zip(rat, P.exponents):
        k = int(sum(int(ei) * x for ei, x in zip(e, state.numerators))) % D
        R[k] += re
        I[k] += im
    if not any(I):
        return not any(_reduce(R, D))
    from .algebra import poly_mul

    norm = [a + b for a, b in zip(_pad(poly_mul(R, R), 2 * D), _pad(poly_mul(I, I), 2 * D))]
    if any(_reduce(norm, D)):
        return False
    zeta = np.exp(2j * np.pi * np.arange(D) / D)
    plus = abs(np.dot(np.array(R, float) + 1j * np.array(I, float), zeta))
    minus = abs(np.dot(np.array(R, float) - 1j * np.array(I, float), zeta))
    return bool(plus <= minus)


def _pad(p, n):
    p = list(p)
    return p + [Fraction(0)] * (n - len(p))


def _log_abs_at(P: TrigPolynomial, state: TorusState) -> float:
    D = state.denominator
    # exact phases: the integer dot product is reduced before the float conversion
    k = [int(sum(int(ei) * x for ei, x in zip(e, state.numerators))) % D for e in P.exponents]
    val = np.dot(np.exp(2j * np.pi * np.array(k, float) / D), P.coeffs)
    if abs(val) < NEAR_ZERO:
        exact = vanishes_exactly(P, state)
        if exact or (exact is None and val == 0):
            raise errors.ZeroOnCycle(str(state))
    return math.log(abs(val))


def cycle_mean_log(P: TrigPolynomial, orbit: OrbitResult) -> float:
    """Mean of ``ln|P_trig|`` over the cycle states, at exact rational angles.

    ``P`` must use the power basis of ``lambda`` (exponents are the ``Z[lambda]``
    coordinates of the translations). The limit of
    ``ln|fhat(alpha lambda^k)| / (k ln|lambda|)`` is this value over ``ln|lambda|``.

    Raises
    ------
    ZeroOnCycle
        If a cycle state is an exact zero of ``P_trig``.
    """
    if orbit.cycle and P.d != len(orbit.cycle[0].numerators):
        raise errors.DimensionMismatch("P and the orbit live on tori of different dimension")
    return math.fsum(_log_abs_at(P, s) for s in orbit.cycle) / orbit.period


# ---------------------------------------------------------------------------
# Erdos seeds and shadowing


@dataclass(frozen=True)
class ErdosSeed:
    alpha: float
    prediction: str
    b: tuple

    def __iter__(self):
        yield self.alpha
        yield self.prediction


def erdos_seed(ctx: AlgebraicContext, q) -> ErdosSeed:
    """``alpha`` for an integer vector ``q``: its orbit is the fixed point 0, so
    ``fhat(alpha lambda^k)`` tends to a limit (nonzero when ``fhat(alpha) != 0``)."""
    if ctx.classification != "PV":
        raise errors.NotPV(f"lambda is not a PV number ({ctx.classification})")
    q = [parse_rational(x) for x in q]
    if len(q) != ctx.n:
        raise errors.DimensionMismatch(f"q has length {len(q)}, expected {ctx.n}")
    if any(x.denominator != 1 for x in q):
        raise errors.ValidationError("q must be an integer vector")
    if not any(q):
        raise errors.ZeroVector("q must be nonzero")
    alpha, _, b = alpha_from_rational_vector(ctx, q)
    return ErdosSeed(float(alpha), "converges to nonzero gamma", tuple(b))


def shadow_distances(ctx: AlgebraicContext, q, k_max: int, dps: int | None = None) -> np.ndarray:
    """``|| frac(alpha lambda^k v) - C^k q mod 1 ||_T`` for ``k = 0..k_max``,
    with ``v = (1, lambda, ..., lambda^(n-1))``; for a PV number these decay like
    ``max_{j>=2} |lambda_j|^k``."""
    q = [parse_rational(x) for x in q]
    _, _, b = alpha_from_rational_vector(ctx, q)
    if dps is None:
        dps = 30 + math.ceil((k_max + ctx.n) * math.log10(abs(ctx.lam)))
    lam = ctx.roots_mp(dps)[0]
    out = []
    state = TorusState.from_rationals(q)
    with mpmath.workdps(dps):
        alpha = sum(mpmath.mpf(x.numerator) / x.denominator * lam ** i for i, x in enumerate(b))
        y = alpha
        for k in range(k_max + 1):
            exact = state.as_fractions()
            d2 = 0.0
            for i in range(ctx.n):
                t = y * lam ** i - mpmath.mpf(exact[i].numerator) / exact[i].denominator
                t = float(t - mpmath.nint(t))
                d2 += t * t
            out.append(math.sqrt(d2))
            y = y * lam
            state = _step(ctx.companion, state)
    return np.array(out)
