"""Algebraic integers given by their minimal polynomial.

An :class:`AlgebraicContext` bundles the roots ``lambda_1..lambda_n`` of a monic
integer polynomial together with the integer companion matrix ``C``, the
Vandermonde matrix ``V`` (``V[i, j] = lambda_j ** i``) and the integer Gram
matrix ``G = V V^T`` whose entries are traces of powers of ``C``. Elements of
``Z[lambda]`` are integer coordinate vectors over the power basis
``1, lambda, ..., lambda^(n-1)``; their conjugates are the entries of ``V^T t``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Sequence

import mpmath
import numpy as np

from . import errors
from .polyroots import aberth, is_real_root, mp_polish

PV, SALEM, NEITHER = "PV", "Salem", "neither"

CLASSIFICATION_TOL = 1e-9


# ---------------------------------------------------------------------------
# exact integer / rational polynomial helpers (ascending coefficient lists)


def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def poly_divmod(num, den):
    """Exact division of ascending rational polynomials."""
    num = [Fraction(x) for x in _trim(num)]
    den = [Fraction(x) for x in _trim(den)]
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    quot = [Fraction(0)] * max(len(num) - len(den) + 1, 1)
    while len(num) >= len(den) and num:
        shift = len(num) - len(den)
        factor = num[-1] / den[-1]
        quot[shift] = factor
        for i, d in enumerate(den):
            num[shift + i] -= factor * d
        num = _trim(num)
    return _trim(quot), num


def poly_gcd(a, b):
    a, b = _trim(a), _trim(b)
    while b:
        _, r = poly_divmod(a, b)
        a, b = b, r
    return [x / a[-1] for x in a] if a else a


def poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def solve_rational(matrix, rhs):
    """Solve ``matrix @ x = rhs`` exactly over the rationals (Gauss-Jordan)."""
    n = len(matrix)
    aug = [[Fraction(x) for x in row] + [Fraction(r)] for row, r in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[-1] for row in aug]


def int_det(matrix):
    """Exact determinant of an integer (or rational) matrix."""
    m = [[Fraction(x) for x in row] for row in matrix]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            if f:
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return det


def int_matmul(a, b):
    return [[sum(x * y for x, y in zip(row, colm)) for colm in zip(*b)] for row in a]


# ---------------------------------------------------------------------------
# polynomial parsing

_TERM = re.compile(r"([+-]?)\s*(\d*)\s*(\*?\s*z(?:\s*\^\s*(\d+))?)?")


def parse_poly(text: str) -> list[int]:
    """Parse ``"z^2-z-1"``-style input into ascending integer coefficients.

    Grammar: a sum of terms ``[sign][int][*]z[^int]`` or integer constants in
    the single variable ``z``. Repeated powers are added.
    """
    s = text.replace(" ", "")
    if not s:
        raise errors.ValidationError("empty polynomial string")
    if re.search(r"[^0-9z\^\*\+\-]", s):
        raise errors.ValidationError(f"unsupported characters in polynomial {text!r}")
    coeffs: dict[int, int] = {}
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos or (pos > 0 and not m.group(1)):
            raise errors.ValidationError(f"cannot parse polynomial {text!r} at offset {pos}")
        sign = -1 if m.group(1) == "-" else 1
        digits, zpart, power = m.group(2), m.group(3), m.group(4)
        if not digits and not zpart:
            raise errors.ValidationError(f"dangling sign in polynomial {text!r}")
        c = int(digits) if digits else 1
        if zpart and zpart.startswith("*") and not digits:
            raise errors.ValidationError(f"dangling '*' in polynomial {text!r}")
        k = (int(power) if power else 1) if zpart else 0
        coeffs[k] = coeffs.get(k, 0) + sign * c
        pos = m.end()
    deg = max(coeffs)
    return [coeffs.get(k, 0) for k in range(deg + 1)]


def format_poly(full: Sequence[int]) -> str:
    terms = []
    for k in range(len(full) - 1, -1, -1):
        c = full[k]
        if c == 0:
            continue
        mag = abs(c)
        body = "z" if k == 1 else (f"z^{k}" if k > 1 else "")
        coef = "" if (mag == 1 and body) else str(mag)
        sign = "-" if c < 0 else "+"
        terms.append((sign, coef + body))
    if not terms:
        return "0"
    first_sign, first = terms[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, t in terms[1:]:
        out += sign + t
    return out


# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class IntPolynomial:
    """Monic integer polynomial ``z^n + c_{n-1} z^{n-1} + ... + c_0``.

    ``coeffs`` holds ``c_0..c_{n-1}``; the leading 1 is implicit.
    """

    coeffs: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    @property
    def full(self) -> list[int]:
        """Ascending coefficients including the leading 1."""
        return list(self.coeffs) + [1]

    def __str__(self):
        return format_poly(self.full)


def validate_min_poly(coeffs) -> IntPolynomial:
    """Validate ``[c_0, ..., c_{n-1}]`` (or a ``"z^2-z-1"`` string).

    A string must describe a monic polynomial. Irreducibility is not checked;
    squarefreeness is, since repeated roots make the Vandermonde matrix singular.
    """
    if isinstance(coeffs, str):
        full = parse_poly(coeffs)
        if full[-1] != 1:
            raise errors.ValidationError(f"polynomial {coeffs!r} is not monic")
        coeffs = full[:-1]
    cs = []
    for c in coeffs:
        if isinstance(c, bool) or int(c) != c:
            raise errors.ValidationError(f"non-integer coefficient {c!r}")
        cs.append(int(c))
    if not cs:
        raise errors.DegreeZero("minimal polynomial must have degree >= 1")
    if cs[0] == 0:
        raise errors.ZeroConstantTerm("constant term c_0 must be nonzero")
    full = cs + [1]
    deriv = [k * full[k] for k in range(1, len(full))]
    if len(poly_gcd(full, deriv)) > 1:
        raise errors.NotSquarefree(f"{format_poly(full)} has a repeated root")
    return IntPolynomial(tuple(cs))


def power_sums(p: IntPolynomial, kmax: int) -> list[int]:
    """Exact ``s_k = sum_j lambda_j^k`` for ``k = 0..kmax`` by Newton's identities."""
    n = p.degree
    a = [p.full[n - i] for i in range(n + 1)]  # a[0] = 1, a[i] = coefficient of z^(n-i)
    s = [n]
    for k in range(1, kmax + 1):
        acc = sum(a[i] * s[k - i] for i in range(1, min(k - 1, n) + 1))
        if k <= n:
            acc += k * a[k]
        s.append(-acc)
    return s


@dataclass(frozen=True, eq=False)
class AlgebraicContext:
    minpoly: IntPolynomial
    roots: np.ndarray
    companion: tuple[tuple[int, ...], ...]
    vandermonde: np.ndarray
    gram: tuple[tuple[int, ...], ...]
    classification: str
    notes: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.minpoly.degree

    @property
    def lam(self) -> float:
        return float(self.roots[0].real)

    @property
    def c0(self) -> int:
        return self.minpoly.coeffs[0]

    @property
    def is_unit(self) -> bool:
        return abs(self.c0) == 1

    @cached_property
    def companion_array(self) -> np.ndarray:
        return np.array(self.companion, dtype=object)

    @cached_property
    def gram_array(self) -> np.ndarray:
        return np.array(self.gram, dtype=object)

    @cached_property
    def conjugate_pairs(self) -> list[tuple[int, int]]:
        """Index pairs ``(j, k)``, ``j < k``, of nonreal complex-conjugate roots."""
        pairs = []
        for j in range(1, self.n):
            if is_real_root(self.roots[j]):
                continue
            for k in range(j + 1, self.n):
                if abs(self.roots[k] - np.conj(self.roots[j])) < 1e-8 * (1 + abs(self.roots[j])):
                    pairs.append((j, k))
        return pairs

    def roots_mp(self, dps=50):
        """Roots as mpmath numbers accurate to ``dps`` digits, in context order."""
        cache = self.notes.setdefault("_mp_roots", {})
        if dps not in cache:
            cache[dps] = mp_polish(self.minpoly.full, self.roots, dps=dps)
        return cache[dps]

    def power_basis(self, j=0) -> np.ndarray:
        """``[1, lambda_j, ..., lambda_j^(n-1)]``."""
        return self.vandermonde[:, j]

    def times_lambda(self, coords):
        """Coordinates of ``lambda * t`` (the map ``t -> C^T t``)."""
        t = [int(x) for x in coords]
        n = self.n
        out = [0] * n
        for i in range(n):
            out[i] = sum(self.companion[k][i] * t[k] for k in range(n))
        return out

    def describe(self) -> dict:
        return {
            "minpoly": str(self.minpoly),
            "coeffs": list(self.minpoly.coeffs),
            "degree": self.n,
            "lambda": self.lam,
            "roots": [[float(r.real), float(r.imag)] for r in self.roots],
            "classification": self.classification,
            "gram": [list(r) for r in self.gram],
            "lambda_choice": self.notes.get("lambda_choice", ""),
        }


def _companion(p: IntPolynomial):
    n = p.degree
    rows = []
    for i in range(n - 1):
        rows.append(tuple(1 if j == i + 1 else 0 for j in range(n)))
    rows.append(tuple(-c for c in p.coeffs))
    return tuple(rows)


def _is_reciprocal(full):
    rev = full[::-1]
    return full == rev or full == [-x for x in rev]


def _order_roots(roots):
    """lambda_1 first, then remaining real roots, then conjugate pairs (+imag first)."""
    real = [complex(r.real, 0.0) for r in roots if is_real_root(r)]
    cplx = [r for r in roots if not is_real_root(r)]
    if not real:
        raise errors.NoRealDominantRoot("polynomial has no real root")
    real.sort(key=lambda r: (-abs(r), -r.real))
    upper = sorted((r for r in cplx if r.imag > 0), key=lambda r: (-abs(r), r.real))
    pairs = []
    for r in upper:
        pairs.extend([r, r.conjugate()])
    if len(pairs) != len(cplx):
        raise errors.NumericError("complex roots do not pair up into conjugates")
    return real, pairs


def _classify(full, roots):
    """PV / Salem / neither for ordered roots (``roots[0]`` is lambda)."""
    tol = CLASSIFICATION_TOL
    rest = roots[1:]
    mods = np.abs(rest)
    near = np.abs(mods - 1.0) <= tol
    if near.any():
        # A root of a reciprocal polynomial off the circle has the distinct
        # partner 1/conj(z) within ~2||z|-1| of it. If no other root is that
        # close, the root lies exactly on the circle.
        if not _is_reciprocal(full):
            raise errors.BoundaryIndeterminate(
                "a conjugate has modulus within 1e-9 of 1 and cannot be placed exactly"
            )
        for idx in np.flatnonzero(near):
            z = rest[idx]
            others = np.delete(roots, idx + 1)
            if np.min(np.abs(others - z)) < 1e-6:
                raise errors.BoundaryIndeterminate(
                    f"root {z} is within 1e-9 of the unit circle and not isolated"
                )
    if np.all(mods[~near] < 1 - tol) and not near.any():
        return PV
    if np.all(mods[~near] < 1 - tol) and near.any():
        return SALEM
    return NEITHER


def build_context(p: IntPolynomial | Sequence[int] | str) -> AlgebraicContext:
    """Roots, companion, Vandermonde and Gram matrices of a minimal polynomial.

    ``lambda_1`` is the real root of largest modulus; it must exceed 1 in modulus.
    """
    if not isinstance(p, IntPolynomial):
        p = validate_min_poly(p)
    full = p.full
    n = p.degree
    z, _ = aberth(full, max_iter=200)
    mp_roots = mp_polish(full, z, dps=30)
    approx = np.array([complex(r) for r in mp_roots])
    real, pairs = _order_roots(approx)
    if abs(real[0]) <= 1 + CLASSIFICATION_TOL:
        raise errors.NoRealDominantRoot("no real root with modulus > 1")
    roots = np.array(real + pairs, dtype=complex)

    # residual check at the polished precision
    with mpmath.workdps(30):
        desc = [mpmath.mpf(c) for c in full[::-1]]
        for r in roots:
            res = abs(mpmath.polyval(desc, mpmath.mpc(r.real, r.imag) if r.imag else mpmath.mpf(r.real)))
            if res >= 1e-12 * (1 + abs(r)) ** n:
                raise errors.NumericError(f"root {r} failed to converge (residual {res})")

    classification = _classify(full, roots)
    companion = _companion(p)
    vander = np.vander(roots, n, increasing=True).T  # V[i, j] = lambda_j^i
    s = power_sums(p, 2 * n - 2)
    gram = tuple(tuple(s[i + j] for j in range(n)) for i in range(n))
    n_big = sum(1 for r in real if abs(r) > 1)
    notes = {
        "lambda_choice": "largest-modulus real root"
        + (f" ({n_big} real roots exceed modulus 1)" if n_big > 1 else "")
    }
    ctx = AlgebraicContext(p, roots, companion, vander, gram, classification, notes)
    # keep mp roots in the same order as ``roots``
    return ctx


@dataclass(frozen=True)
class ZLambdaElement:
    """Element ``sum_i coords[i] * lambda^i`` of ``Z[lambda]``."""

    coords: tuple[int, ...]

    def __init__(self, coords):
        object.__setattr__(self, "coords", tuple(int(c) for c in coords))

    def __len__(self):
        return len(self.coords)


def zlambda_eval(ctx: AlgebraicContext, t) -> tuple[float, list[complex]]:
    """Real value and conjugates ``j = 2..n`` of a ``Z[lambda]`` element."""
    coords = t.coords if isinstance(t, ZLambdaElement) else tuple(int(c) for c in t)
    if len(coords) != ctx.n:
        raise errors.DimensionMismatch(f"expected {ctx.n} coordinates, got {len(coords)}")
    w = ctx.vandermonde.T @ np.array(coords, dtype=float)
    return float(w[0].real), [complex(x) for x in w[1:]]


def zlambda_conjugates_mp(ctx: AlgebraicContext, coords, dps=50):
    """All conjugates ``(V^T t)_j`` at ``dps`` digits."""
    roots = ctx.roots_mp(dps)
    with mpmath.workdps(dps):
        out = []
        for r in roots:
            acc = mpmath.mpf(0)
            for c in reversed(coords):
                acc = acc * r + int(c)
            out.append(acc)
    return out


def alpha_from_rational_vector(ctx: AlgebraicContext, q):
    """``u = V^T G^{-1} q``; returns ``(alpha, u, b)`` with ``b = G^{-1} q`` exact.

    ``alpha = u_1 = sum_i b_i lambda^(i-1)`` is real and ``V u = q``.
    """
    q = [Fraction(x) for x in q]
    if len(q) != ctx.n:
        raise errors.DimensionMismatch(f"expected {ctx.n} components, got {len(q)}")
    b = solve_rational(ctx.gram, q)
    u = ctx.vandermonde.T @ np.array([float(x) for x in b])
    resid = np.max(np.abs(ctx.vandermonde @ u - np.array([float(x) for x in q]))) if ctx.n else 0.0
    if resid >= 1e-10 * max(1.0, max(abs(float(x)) for x in q)):
        raise errors.NumericError(f"reconstruction residual {resid:.3g} too large")
    return float(u[0].real), u, b


def qlambda_mp(ctx: AlgebraicContext, b, dps=50):
    """``sum_i b_i lambda^(i-1)`` for rational ``b`` at ``dps`` digits."""
    lam = ctx.roots_mp(dps)[0]
    with mpmath.workdps(dps):
        acc = mpmath.mpf(0)
        for x in reversed(list(b)):
            x = Fraction(x)
            acc = acc * lam + mpmath.mpf(x.numerator) / x.denominator
        return acc


def parse_rational(s) -> Fraction:
    if isinstance(s, Fraction):
        return s
    if isinstance(s, float):
        return Fraction(s)
    try:
        return Fraction(str(s).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise errors.ValidationError(f"not a rational number: {s!r}") from exc


def lcm(values):
    out = 1
    for v in values:
        out = out * v // gcd(out, v)
    return out
