"""Finite trigonometric filters ``A(y) = |lambda|^-1 sum_j a_j exp(2 pi i tau_j y)``
and their lift to trigonometric polynomials on a torus.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Integral, Real
from typing import Sequence

import mpmath
import numpy as np

from . import errors
from .algebra import AlgebraicContext, ZLambdaElement, lcm, parse_rational, zlambda_conjugates_mp

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class BasisCoords:
    """Rational coordinates of a translation with respect to a user frequency basis."""

    coords: tuple[Fraction, ...]

    def __init__(self, coords):
        object.__setattr__(self, "coords", tuple(parse_rational(c) for c in coords))


def _is_exact_rational(t) -> bool:
    if isinstance(t, (Integral, Fraction)):
        return True
    return isinstance(t, float) and t.is_integer()


class Filter:
    """The filter of a refinement equation ``f(x) = sum_j a_j f(lambda x - tau_j)``.

    Parameters
    ----------
    lam : float
        Dilation with ``|lam| > 1``. Taken from ``context`` when omitted.
    coeffs : sequence of complex
        Nonzero ``a_1..a_m`` summing to ``|lam|``.
    translations : sequence
        ``tau_1 < ... < tau_m``. Each entry is a real number, a ``Fraction``, a
        :class:`ZLambdaElement` (needs ``context``) or a :class:`BasisCoords`
        (needs ``basis``).
    context : AlgebraicContext, optional
    basis : sequence of float, optional
        Frequency basis for :class:`BasisCoords` translations.
    """

    def __init__(self, lam=None, coeffs=(), translations=(), context: AlgebraicContext | None = None,
                 basis: Sequence | None = None):
        if lam is None:
            if context is None:
                raise errors.ValidationError("dilation lambda or an algebraic context is required")
            lam = context.lam
        lam = float(lam)
        if context is not None and abs(lam - context.lam) > 1e-9 * abs(lam):
            raise errors.ValidationError(f"lambda {lam} does not match context root {context.lam}")
        if not abs(lam) > 1:
            raise errors.ValidationError(f"|lambda| must exceed 1, got {lam}")
        a = np.array([complex(c) for c in coeffs], dtype=complex)
        if a.size == 0:
            raise errors.ValidationError("a filter needs at least one coefficient")
        if np.any(a == 0):
            raise errors.ValidationError("filter coefficients must be nonzero")
        if len(translations) != a.size:
            raise errors.DimensionMismatch(
                f"{a.size} coefficients but {len(translations)} translations"
            )
        if abs(a.sum() - abs(lam)) > 1e-12 * max(1.0, abs(lam)):
            raise errors.ValidationError(
                f"coefficients sum to {a.sum()}, expected |lambda| = {abs(lam)}"
            )
        self.lam = lam
        self.coeffs = a
        self.context = context
        self.basis = None if basis is None else tuple(basis)
        self.translations = tuple(self._normalize(t) for t in translations)
        tau = self.tau
        if np.any(np.diff(tau) <= 0):
            raise errors.ValidationError(f"translations must be strictly increasing, got {tau}")

    def _normalize(self, t):
        if isinstance(t, ZLambdaElement):
            if self.context is None:
                raise errors.ValidationError("Z[lambda] translations need an algebraic context")
            if len(t) != self.context.n:
                raise errors.DimensionMismatch(
                    f"Z[lambda] element of length {len(t)} for degree {self.context.n}"
                )
            return t
        if isinstance(t, BasisCoords):
            if self.basis is None:
                raise errors.ValidationError("basis coordinates given without a basis")
            if len(t.coords) != len(self.basis):
                raise errors.DimensionMismatch("coordinate vector length differs from basis length")
            return t
        if isinstance(t, (Fraction, Integral)):
            return Fraction(t)
        if isinstance(t, str):
            return parse_rational(t)
        if isinstance(t, Real):
            return float(t)
        raise errors.ValidationError(f"unsupported translation {t!r}")

    @property
    def m(self) -> int:
        return self.coeffs.size

    @cached_property
    def tau(self) -> np.ndarray:
        """Real values of the translations."""
        out = []
        for t in self.translations:
            if isinstance(t, ZLambdaElement):
                out.append(float(np.dot(self.context.power_basis(0).real, t.coords)))
            elif isinstance(t, BasisCoords):
                out.append(sum(float(c) * float(parse_rational(r) if isinstance(r, str) else r)
                               for c, r in zip(t.coords, self.basis)))
            else:
                out.append(float(t))
        return np.array(out)

    @property
    def weights(self) -> np.ndarray:
        """Normalised coefficients ``a_j / |lambda|`` (they sum to 1)."""
        return self.coeffs / abs(self.lam)

    @cached_property
    def derivative_bound(self) -> float:
        """``B = 2 pi sum |a_j tau_j| / |lambda|`` so that ``|A(u) - 1| <= B |u|``."""
        return TWO_PI * float(np.sum(np.abs(self.coeffs * self.tau))) / abs(self.lam)

    @property
    def all_zlambda(self) -> bool:
        return all(isinstance(t, ZLambdaElement) for t in self.translations)

    def tau_mp(self, dps=50):
        """Translations at ``dps`` digits (exact where the representation allows)."""
        out = []
        with mpmath.workdps(dps):
            for t in self.translations:
                if isinstance(t, ZLambdaElement):
                    out.append(zlambda_conjugates_mp(self.context, t.coords, dps)[0])
                elif isinstance(t, Fraction):
                    out.append(mpmath.mpf(t.numerator) / t.denominator)
                elif isinstance(t, BasisCoords):
                    acc = mpmath.mpf(0)
                    for c, r in zip(t.coords, self.basis):
                        acc += mpmath.mpf(c.numerator) / c.denominator * mpmath.mpf(r)
                    out.append(acc)
                else:
                    out.append(mpmath.mpf(t))
        return out

    def lam_mp(self, dps=50):
        if self.context is not None:
            return self.context.roots_mp(dps)[0].real
        return mpmath.mpf(self.lam)

    def shifted(self, delta: float) -> "Filter":
        """Same coefficients with every translation moved by ``delta`` (real values)."""
        return Filter(self.lam, self.coeffs, [float(t) + delta for t in self.tau])

    def __repr__(self):
        return f"Filter(lam={self.lam!r}, coeffs={self.coeffs.tolist()!r}, tau={self.tau.tolist()!r})"


def eval_filter(f: Filter, y):
    """``A(y)``; vectorised over ``y``."""
    y = np.asarray(y, dtype=float)
    phase = np.multiply.outer(y, f.tau)
    return np.exp(1j * TWO_PI * phase) @ f.weights


def eval_filter_mp(f: Filter, u, tau_mp=None, dps=50) -> complex:
    """``A(u)`` for a multiprecision argument; phases are reduced mod 1 at ``dps``
    digits and ``e(phase)`` is rounded to double precision (exact at quarter turns,
    so exact zeros such as ``1 + e(1/2)`` stay zero)."""
    tau_mp = f.tau_mp(dps) if tau_mp is None else tau_mp
    with mpmath.workdps(dps):
        phase = [2 * mpmath.frac(t * u) for t in tau_mp]
        e = np.array([complex(float(mpmath.cospi(p)), float(mpmath.sinpi(p))) for p in phase])
    return complex(e @ f.weights)


# ---------------------------------------------------------------------------
# trigonometric polynomials on the torus


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """``P_trig(t) = sum_j c_j exp(2 pi i e_j . t)`` on ``T^d``, together with the
    frequency basis ``r`` such that ``A(y) = P_trig(y r mod 1)``."""

    basis: np.ndarray
    coeffs: np.ndarray
    exponents: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "basis", np.atleast_1d(np.asarray(self.basis, dtype=float)))
        object.__setattr__(self, "coeffs", np.atleast_1d(np.asarray(self.coeffs, dtype=complex)))
        ex = np.asarray(self.exponents, dtype=np.int64)
        if ex.ndim == 1:
            ex = ex[:, None]
        object.__setattr__(self, "exponents", ex)
        if ex.shape != (self.coeffs.size, self.basis.size):
            raise errors.DimensionMismatch(
                f"exponents shape {ex.shape} does not match {self.coeffs.size} terms x {self.basis.size} variables"
            )

    @property
    def d(self) -> int:
        return self.basis.size

    def __call__(self, t):
        """Evaluate at torus points ``t`` of shape ``(..., d)``."""
        t = np.asarray(t, dtype=float)
        phase = t @ self.exponents.T.astype(float)
        return np.exp(1j * TWO_PI * phase) @ self.coeffs

    def on_line(self, y):
        """``P_trig(Psi_r(y))``."""
        y = np.asarray(y, dtype=float)
        t = np.mod(np.multiply.outer(y, self.basis), 1.0)
        return self(t)

    def used_variables(self) -> "TrigPolynomial":
        """Drop variables whose exponent column is identically zero."""
        keep = np.any(self.exponents != 0, axis=0)
        if keep.all() or not keep.any():
            return self
        return TrigPolynomial(self.basis[keep], self.coeffs, self.exponents[:, keep])

    def univariate(self):
        """Ascending coefficients (after a monomial shift) when ``d == 1``."""
        if self.d != 1:
            raise errors.UnsupportedDimension(f"not univariate (d = {self.d})")
        e = self.exponents[:, 0]
        e = e - e.min()
        out = np.zeros(e.max() + 1, dtype=complex)
        np.add.at(out, e, self.coeffs)
        return out


def _check_basis(basis_raw):
    exact = [b for b in basis_raw if _is_exact_rational(b) or isinstance(b, str)]
    vals = np.array([float(parse_rational(b)) if isinstance(b, str) else float(b) for b in basis_raw])
    if np.any(vals == 0):
        raise errors.NotIndependentBasis("basis contains a zero frequency")
    if len(exact) > 1:
        raise errors.NotIndependentBasis("two rational basis frequencies are rationally dependent")
    for i in range(vals.size):
        for k in range(i + 1, vals.size):
            if abs(abs(vals[i]) - abs(vals[k])) <= 1e-14 * abs(vals[i]):
                raise errors.NotIndependentBasis(f"basis entries {i} and {k} coincide up to sign")
    return vals


def to_trig_poly(f: Filter, basis: Sequence | None = None) -> TrigPolynomial:
    """Lift ``A`` to a trigonometric polynomial on a torus.

    Exactness must come from the caller: translations are either all Z[lambda]
    elements (basis = powers of lambda, exponents = coordinates, ``d = n``), all
    given by rational coordinates over a user basis, or all rational numbers
    (basis ``[1/q]`` for their common denominator ``q``). No attempt is made to
    detect rational relations among plain floats.
    """
    trans = f.translations
    if f.all_zlambda:
        ctx = f.context
        P = TrigPolynomial(ctx.power_basis(0).real, f.weights, [t.coords for t in trans])
    elif basis is not None or f.basis is not None:
        basis_raw = tuple(basis if basis is not None else f.basis)
        if not all(isinstance(t, BasisCoords) for t in trans):
            raise errors.NoExactCoordinates("translations need rational coordinates over the basis")
        if any(len(t.coords) != len(basis_raw) for t in trans):
            raise errors.DimensionMismatch("coordinate vector length differs from basis length")
        vals = _check_basis(basis_raw)
        q = lcm(c.denominator for t in trans for c in t.coords)
        ex = np.array([[int(c * q) for c in t.coords] for t in trans], dtype=np.int64)
        P = TrigPolynomial(vals / q, f.weights, ex).used_variables()
    elif all(_is_exact_rational(t) for t in trans):
        fr = [Fraction(t) for t in trans]
        q = lcm(x.denominator for x in fr)
        P = TrigPolynomial([1.0 / q], f.weights, [[int(x * q)] for x in fr])
    else:
        raise errors.NoExactCoordinates(
            "irrational translations need Z[lambda] or basis coordinates; "
            "rational relations are not detected automatically"
        )
    y = np.linspace(-37.3, 41.9, 17)
    if np.max(np.abs(P.on_line(y) - eval_filter(f, y))) > 1e-9:
        raise errors.NumericError("trigonometric lift does not reproduce the filter")
    return P


# ---------------------------------------------------------------------------
# sublevel sets


def _golden_min(fun, lo, hi, iters=60):
    """Vectorised golden-section minimisation on brackets ``[lo, hi]``."""
    g = (np.sqrt(5.0) - 1) / 2
    a, b = lo.copy(), hi.copy()
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c_new = b - g * (b - a)
        d_new = a + g * (b - a)
        # reuse one interior evaluation per bracket
        c2 = np.where(left, c_new, d)
        d2 = np.where(left, c, d_new)
        fc2 = np.where(left, np.nan, fd)
        fd2 = np.where(left, fc, np.nan)
        need_c = np.isnan(fc2)
        need_d = np.isnan(fd2)
        if need_c.any():
            fc2[need_c] = fun(c2[need_c])
        if need_d.any():
            fd2[need_d] = fun(d2[need_d])
        c, d, fc, fd = c2, d2, fc2, fd2
    x = (a + b) / 2
    return x, fun(x)


def _bisect(fun, lo, hi, level, iters=60, tol=1e-12):
    """Vectorised bisection for ``fun(x) = level`` with ``fun(lo) - level`` and
    ``fun(hi) - level`` of opposite sign."""
    a, b = lo.copy(), hi.copy()
    fa = fun(a) - level
    for _ in range(iters):
        if np.all(b - a <= tol):
            break
        mid = (a + b) / 2
        fm = fun(mid) - level
        same = np.sign(fm) == np.sign(fa)
        a = np.where(same, mid, a)
        fa = np.where(same, fm, fa)
        b = np.where(same, b, mid)
    return (a + b) / 2


def sublevel_measure(f: Filter, L: float, v_list: Sequence[float], grid: int = 200_000):
    """Lebesgue measure of ``{y in [-L, L] : |A(y)| <= v}`` for each ``v``.

    The grid is augmented with refined local minima of ``|A|`` so that narrow
    dips below ``v`` between grid nodes are not missed; crossings of ``|A| = v``
    are then located by bisection.
    """
    if not L > 0:
        raise errors.ValidationError("L must be positive")
    if grid < 100_000:
        raise errors.ValidationError("grid must have at least 1e5 points")
    mod = lambda x: np.abs(eval_filter(f, x))  # noqa: E731
    y = np.linspace(-L, L, int(grid) + 1)
    g = mod(y)
    interior = np.flatnonzero((g[1:-1] <= g[:-2]) & (g[1:-1] <= g[2:])) + 1
    if interior.size:
        xm, gm = _golden_min(mod, y[interior - 1], y[interior + 1])
        ys = np.concatenate([y, xm])
        gs = np.concatenate([g, gm])
        order = np.argsort(ys, kind="stable")
        ys, gs = ys[order], gs[order]
    else:
        ys, gs = y, g
    out = []
    for v in v_list:
        below = gs <= v
        both = below[:-1] & below[1:]
        total = float(np.sum(ys[1:][both] - ys[:-1][both]))
        change = np.flatnonzero(below[:-1] != below[1:])
        if change.size:
            lo, hi = ys[change], ys[change + 1]
            cross = _bisect(mod, lo, hi, v)
            # segment portion on the sublevel side of the crossing
            left_below = below[change]
            part = np.where(left_below, cross - lo, hi - cross)
            total += float(np.sum(part))
        out.append((float(v), total))
    return out


def sublevel_slope(f: Filter, L: float, v_min: float, v_max: float, n_v: int = 9, grid: int = 400_000):
    """Least-squares slope of ``ln measure`` against ``ln v`` on a log-spaced range."""
    vs = np.geomspace(v_min, v_max, n_v)
    meas = np.array([m for _, m in sublevel_measure(f, L, vs, grid)])
    ok = meas > 0
    if ok.sum() < 2:
        raise errors.NumericError("sublevel sets are empty at the requested levels")
    slope, _ = np.polyfit(np.log(vs[ok]), np.log(meas[ok]), 1)
    return float(slope)


# ---------------------------------------------------------------------------
# named filters used throughout the examples and tests


def box_filter() -> Filter:
    """Indicator of [0, 1]: ``f(x) = f(2x) + f(2x - 1)``."""
    return Filter(2.0, [1.0, 1.0], [0, 1])


def cantor_filter() -> Filter:
    """Uniform measure on the middle-thirds Cantor set, translations {0, 2}."""
    return Filter(3.0, [1.5, 1.5], [0, 2])


def bernoulli_filter(ctx: AlgebraicContext, translations=None) -> Filter:
    """Bernoulli convolution: two equal coefficients, translations {0, 1} in Z[lambda]."""
    n = ctx.n
    if translations is None:
        translations = [ZLambdaElement([0] * n), ZLambdaElement([1] + [0] * (n - 1))]
    m = len(translations)
    a = [abs(ctx.lam) / m] * m
    return Filter(ctx.lam, a, translations, context=ctx)


def three_term_filter() -> Filter:
    """``A(y) = (1 + e(y) + e(sqrt(2) y)) / 3`` with dilation 2 over the basis (1, sqrt 2)."""
    basis = (1.0, float(np.sqrt(2.0)))
    trans = [BasisCoords([0, 0]), BasisCoords([1, 0]), BasisCoords([0, 1])]
    return Filter(2.0, [2 / 3, 2 / 3, 2 / 3], trans, basis=basis)


def growth_filter() -> Filter:
    """``A(y) = 1 + e(y) - e(2y)``, dilation 2 (Mahler measure the golden ratio)."""
    return Filter(2.0, [2.0, 2.0, -2.0], [0, 1, 2])
