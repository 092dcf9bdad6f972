"""Cut-and-project quasilattices in ``Z[lambda]``.

For an admissible ``sigma`` the quasilattice is the set of ``x = sum_i l_i lambda^i``
(``l`` integer) whose conjugates satisfy ``|x_j| < sigma_j`` for ``j >= 2``. Only
finite windows ``|x| < L`` are ever materialized. Membership is decided in
floating point where the margin is clear and in 50-digit arithmetic otherwise;
rational elements ``(k, 0, ..., 0)`` are compared exactly. A conjugate that
agrees with its bound to 40 digits is taken to lie on the boundary, which the
strict inequality excludes (``on_boundary="exclude"``); ``on_boundary="raise"``
reports such candidates as BoundaryAmbiguous instead.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from . import errors
from .algebra import AlgebraicContext, zlambda_conjugates_mp
from .filter import Filter

MP_DPS = 50
MP_UNDECIDED = mpmath.mpf(10) ** -40
MAX_CANDIDATES = 5 * 10 ** 6


@dataclass(frozen=True)
class AdmissibleVector:
    """``sigma`` with ``sigma_1 = 0``, ``sigma_j > 0`` and equal entries on conjugate pairs."""

    sigma: tuple

    def __post_init__(self):
        s = tuple(float(x) for x in self.sigma)
        object.__setattr__(self, "sigma", s)
        if not s or s[0] != 0:
            raise errors.ValidationError("sigma_1 must be 0")
        if any(not x > 0 or not math.isfinite(x) for x in s[1:]):
            raise errors.ValidationError("sigma_j must be positive and finite for j >= 2")

    @classmethod
    def for_context(cls, ctx: AlgebraicContext, sigma) -> "AdmissibleVector":
        """Validate ``sigma`` against ``ctx``. A vector of length ``n`` must agree
        on conjugate pairs; shorter input lists one value per real conjugate and
        per pair, in root order, and is expanded by duplication."""
        sigma = [float(x) for x in sigma]
        n = ctx.n
        pairs = ctx.conjugate_pairs
        if len(sigma) != n:
            second = {k for _, k in pairs}
            if len(sigma) != n - len(pairs):
                raise errors.DimensionMismatch(f"sigma has length {len(sigma)}, expected {n}")
            it = iter(sigma)
            full = [None] * n
            for j in range(n):
                if j not in second:
                    full[j] = next(it)
            for j, k in pairs:
                full[k] = full[j]
            sigma = full
        for j, k in pairs:
            if sigma[j] != sigma[k]:
                raise errors.ValidationError(f"sigma must agree on the conjugate pair ({j + 1}, {k + 1})")
        return cls(tuple(sigma))

    def __len__(self):
        return len(self.sigma)

    def __le__(self, other: "AdmissibleVector") -> bool:
        return all(a <= b for a, b in zip(self.sigma, other.sigma))

    def __add__(self, other: "AdmissibleVector") -> "AdmissibleVector":
        return AdmissibleVector(tuple(a + b for a, b in zip(self.sigma, other.sigma)))

    def scaled(self, factors) -> "AdmissibleVector":
        return AdmissibleVector((0.0,) + tuple(s * f for s, f in zip(self.sigma[1:], factors[1:])))


@dataclass(frozen=True)
class QuasilatticeWindow:
    """Points of the quasilattice with ``|x| < L``, sorted by value then coordinates."""

    sigma: AdmissibleVector
    L: float
    values: np.ndarray
    coords: np.ndarray

    @property
    def points(self):
        return [(float(v), tuple(int(x) for x in c)) for v, c in zip(self.values, self.coords)]

    @property
    def coord_set(self) -> frozenset:
        return frozenset(tuple(int(x) for x in c) for c in self.coords)

    def __len__(self):
        return len(self.values)


def _require_pv(ctx):
    if ctx.classification != "PV":
        raise errors.NotPV(f"lambda is not a PV number ({ctx.classification})")


def _check_sigma(ctx, sigma):
    if not isinstance(sigma, AdmissibleVector):
        sigma = AdmissibleVector.for_context(ctx, sigma)
    if len(sigma) != ctx.n:
        raise errors.DimensionMismatch(f"sigma has length {len(sigma)}, expected {ctx.n}")
    for j, k in ctx.conjugate_pairs:
        if sigma.sigma[j] != sigma.sigma[k]:
            raise errors.ValidationError("sigma must agree on conjugate pairs")
    return sigma


def _bounds(L, sigma):
    return np.array([L] + list(sigma.sigma[1:]), dtype=float)


ON_BOUNDARY = ("exclude", "raise")


def _decide_exact(ctx, coords, bounds, mp_bounds=None, on_boundary="exclude"):
    """Membership of one candidate, away from floating point.

    ``mp_bounds`` optionally replaces ``bounds`` by 50-digit values (used for
    scaled windows whose bounds are irrational)."""
    if mp_bounds is None and all(c == 0 for c in coords[1:]):
        k = abs(Fraction(int(coords[0])))
        exact = [Fraction(float(b)) for b in bounds if math.isfinite(b)]
        if on_boundary == "raise" and k in exact:
            raise errors.BoundaryAmbiguous(f"element {tuple(coords)} lies on the window boundary")
        return all(k < b for b in exact)
    conj = zlambda_conjugates_mp(ctx, coords, MP_DPS)
    with mpmath.workdps(MP_DPS):
        for j, (w, b) in enumerate(zip(conj, bounds)):
            if not math.isfinite(b):
                continue
            bound = mp_bounds[j] if mp_bounds is not None else mpmath.mpf(float(b))
            slack = bound - abs(w)
            if abs(slack) < MP_UNDECIDED:
                if on_boundary == "raise":
                    raise errors.BoundaryAmbiguous(f"element {tuple(coords)} lies on the window boundary")
                return False
            if slack < 0:
                return False
    return True


def _filter_candidates(ctx, cand, bounds, mp_bounds=None, on_boundary="exclude"):
    """Boolean mask of candidates (rows of integer coordinates) inside ``bounds``
    (``inf`` entries are ignored)."""
    if cand.shape[0] == 0:
        return np.zeros(0, bool)
    V = ctx.vandermonde
    W = cand.astype(float) @ V
    mod = np.abs(W)
    mod[:, 0] = np.abs(W[:, 0].real)
    scale = np.abs(cand).astype(float) @ np.maximum(np.abs(V), 1.0)
    tol = 1e-10 * (1.0 + scale)
    finite = np.isfinite(bounds)
    slack = np.where(finite, bounds - mod, np.inf)
    inside = np.all(slack > tol, axis=1)
    unsure = ~inside & np.all(slack > -tol, axis=1)
    for i in np.flatnonzero(unsure):
        inside[i] = _decide_exact(ctx, [int(x) for x in cand[i]], bounds, mp_bounds, on_boundary)
    return inside


def _candidates(ctx, bounds):
    """All integer ``l`` that can satisfy ``|(V^T l)_j| < bounds_j``.

    The leading coordinates range over the box given by absolute row sums of
    ``(V^T)^-1``; the last coordinate is then confined to the intersection of the
    intervals imposed by the real conjugates.
    """
    n = ctx.n
    V = ctx.vandermonde
    inv = np.linalg.inv(V.T)
    reach = np.abs(inv) @ bounds
    r = np.floor(reach * (1 + 1e-9) + 1e-9).astype(np.int64)
    if n == 1:
        return np.arange(-r[0], r[0] + 1, dtype=np.int64)[:, None]
    size = math.prod(2 * int(x) + 1 for x in r[:-1])
    if size > MAX_CANDIDATES:
        raise errors.WindowTooLarge(
            f"the search box has {size:.3g} prefixes (limit {MAX_CANDIDATES:.0e}); reduce L or widen sigma"
        )
    prefix = np.array(list(itertools.product(*[range(-x, x + 1) for x in r[:-1]])), dtype=np.int64)
    if prefix.size == 0:
        prefix = np.zeros((1, n - 1), dtype=np.int64)
    lo = np.full(len(prefix), -float(r[-1]))
    hi = np.full(len(prefix), float(r[-1]))
    for j in range(n):
        root = ctx.roots[j]
        if abs(root.imag) > 0 or not math.isfinite(bounds[j]):
            continue
        top = root.real ** (n - 1)
        s = prefix.astype(float) @ V[: n - 1, j].real
        a = (-bounds[j] - s) / top
        b = (bounds[j] - s) / top
        pad = 1e-9 * (1 + np.abs(a) + np.abs(b))
        lo = np.maximum(lo, np.minimum(a, b) - pad)
        hi = np.minimum(hi, np.maximum(a, b) + pad)
    lo_i = np.ceil(lo).astype(np.int64)
    hi_i = np.floor(hi).astype(np.int64)
    count = np.maximum(hi_i - lo_i + 1, 0)
    rows = np.repeat(prefix, count, axis=0)
    offs = np.arange(count.sum()) - np.repeat(np.cumsum(count) - count, count)
    last = np.repeat(lo_i, count) + offs
    return np.column_stack([rows, last])


def _make_window(ctx, sigma, L, cand, mp_bounds=None, on_boundary="exclude"):
    mask = _filter_candidates(ctx, cand, _bounds(L, sigma), mp_bounds, on_boundary)
    pts = cand[mask]
    vals = pts.astype(float) @ ctx.vandermonde[:, 0].real
    order = np.lexsort(tuple(pts[:, i] for i in range(pts.shape[1] - 1, -1, -1)) + (vals,))
    return QuasilatticeWindow(sigma, float(L), vals[order], pts[order])


def enumerate_window(ctx: AlgebraicContext, sigma, L: float, on_boundary: str = "exclude") -> QuasilatticeWindow:
    """Every point of the quasilattice for ``sigma`` with ``|x| < L``.

    Raises
    ------
    NotPV
    BoundaryAmbiguous
        With ``on_boundary="raise"``, if a candidate agrees with a bound to 40 digits.
    """
    _require_pv(ctx)
    if not L > 0:
        raise errors.ValidationError("L must be positive")
    if on_boundary not in ON_BOUNDARY:
        raise errors.ValidationError(f"on_boundary must be one of {ON_BOUNDARY}")
    sigma = _check_sigma(ctx, sigma)
    return _make_window(ctx, sigma, L, _candidates(ctx, _bounds(L, sigma)), on_boundary=on_boundary)


def brute_force_window(ctx: AlgebraicContext, sigma, L: float, box: int = 25) -> frozenset:
    """Coordinates of window points among all ``|l_i| <= box``, each decided at 50 digits."""
    sigma = _check_sigma(ctx, sigma)
    bounds = _bounds(L, sigma)
    out = set()
    for coords in itertools.product(range(-box, box + 1), repeat=ctx.n):
        if _decide_exact(ctx, list(coords), bounds):
            out.add(coords)
    return frozenset(out)


def contains(ctx: AlgebraicContext, sigma, coords, L: float = math.inf) -> bool:
    """Whether ``sum coords_i lambda^i`` is in the quasilattice (and ``|x| < L``)."""
    sigma = _check_sigma(ctx, sigma)
    cand = np.array([list(coords)], dtype=np.int64)
    return bool(_filter_candidates(ctx, cand, _bounds(L, sigma))[0])


# ---------------------------------------------------------------------------
# statistics and checks


@dataclass(frozen=True)
class WindowStats:
    min_gap: float
    max_gap: float
    count: int


def window_stats(w: QuasilatticeWindow) -> WindowStats:
    if len(w) < 2:
        raise errors.TooFewPoints("need at least two points")
    gaps = np.diff(w.values)
    return WindowStats(float(gaps.min()), float(gaps.max()), len(w))


def gap_lower_bound(sigma: AdmissibleVector) -> float:
    """``2^(1-n) prod_{j>=2} sigma_j^-1``, a lower bound on the spacing."""
    n = len(sigma)
    return 2.0 ** (1 - n) / math.prod(sigma.sigma[1:])


def abs_det_vandermonde(ctx: AlgebraicContext) -> float:
    """``|det V| = sqrt(|det V V^T|)`` from the exact Gram determinant."""
    from .algebra import int_det

    return math.sqrt(abs(int_det(ctx.gram)))


@dataclass(frozen=True)
class MinkowskiWitness:
    L_star: float
    value: float
    coords: tuple


def minkowski_threshold(ctx: AlgebraicContext, sigma) -> MinkowskiWitness:
    """``L* = |det V| prod_{j>=2} sigma_j^-1`` and a nonzero point with ``|x| < L*(1 + 1e-9)``."""
    _require_pv(ctx)
    sigma = _check_sigma(ctx, sigma)
    L_star = abs_det_vandermonde(ctx) / math.prod(sigma.sigma[1:])
    w = enumerate_window(ctx, sigma, L_star * (1 + 1e-9))
    # the window is symmetric, so a positive witness exists whenever any does
    idx = np.flatnonzero(np.any(w.coords != 0, axis=1) & (w.values > 0))
    if not idx.size:
        raise errors.NoWitness(f"no nonzero point with |x| < {L_star:.17g}")
    best = idx[np.argmin(w.values[idx])]
    return MinkowskiWitness(L_star, float(w.values[best]), tuple(int(x) for x in w.coords[best]))


def _times_lambda(ctx, coords: np.ndarray) -> np.ndarray:
    C = np.array(ctx.companion, dtype=np.int64)
    return coords @ C  # row l -> (C^T l)^T


@dataclass(frozen=True)
class SelfSimilarityReport:
    holds: bool
    count: int
    missing: tuple
    extra: tuple
    scaled_sigma: tuple


def check_self_similarity(ctx: AlgebraicContext, sigma, L: float) -> SelfSimilarityReport:
    """Compare ``lambda * window(sigma, L)`` with ``window(sigma', |lambda| L)``,
    ``sigma'_j = |lambda_j| sigma_j``, as exact coordinate sets."""
    _require_pv(ctx)
    if not ctx.is_unit:
        raise errors.NotUnit(f"|c0| = {abs(ctx.c0)} is not 1")
    sigma = _check_sigma(ctx, sigma)
    scaled = sigma.scaled(np.abs(ctx.roots))
    w = enumerate_window(ctx, sigma, L)
    image = frozenset(tuple(int(x) for x in r) for r in _times_lambda(ctx, w.coords))
    # the scaled bounds |lambda_j| sigma_j are irrational: decide them at 50 digits
    roots = ctx.roots_mp(MP_DPS)
    with mpmath.workdps(MP_DPS):
        lam_abs = abs(roots[0])
        mp_bounds = [lam_abs * mpmath.mpf(L)] + [abs(r) * mpmath.mpf(s) for r, s in zip(roots[1:], sigma.sigma[1:])]
    L2 = abs(ctx.lam) * L
    target = _make_window(ctx, scaled, L2, _candidates(ctx, _bounds(L2, scaled)), mp_bounds).coord_set
    missing = tuple(sorted(target - image))
    extra = tuple(sorted(image - target))
    return SelfSimilarityReport(not missing and not extra, len(w), missing, extra, scaled.sigma)


@dataclass(frozen=True)
class MultiscaleReport:
    holds: bool
    xi: tuple
    checked: int
    failures: tuple


def multiscale_check(ctx: AlgebraicContext, sigma, f: Filter, L: float) -> MultiscaleReport:
    """With ``xi_j = (1 - |lambda_j|) sigma_j``: every translation lies in the
    quasilattice for ``xi``, and ``lambda tau + tau_j`` lies in the one for
    ``sigma`` for every window point ``tau`` and every translation ``tau_j``.

    Raises
    ------
    NotUnit
    TranslationOutsideXi
        Naming the first translation outside the ``xi`` quasilattice.
    """
    _require_pv(ctx)
    if not ctx.is_unit:
        raise errors.NotUnit(f"|c0| = {abs(ctx.c0)} is not 1")
    sigma = _check_sigma(ctx, sigma)
    if not f.all_zlambda:
        raise errors.ValidationError("filter translations must be Z[lambda] elements")
    xi = AdmissibleVector((0.0,) + tuple((1 - abs(r)) * s for r, s in zip(ctx.roots[1:], sigma.sigma[1:])))
    trans = np.array([t.coords for t in f.translations], dtype=np.int64)
    if trans.shape[1] != ctx.n:
        raise errors.DimensionMismatch("translation coordinates do not match the degree")
    xb = _bounds(math.inf, xi)
    ok = _filter_candidates(ctx, trans, xb)
    if not ok.all():
        j = int(np.flatnonzero(~ok)[0])
        conj = [complex(c) for c in zlambda_conjugates_mp(ctx, list(trans[j]), 30)[1:]]
        raise errors.TranslationOutsideXi(j, tuple(int(x) for x in trans[j]), conj)
    w = enumerate_window(ctx, sigma, L)
    lt = _times_lambda(ctx, w.coords)
    cand = (lt[:, None, :] + trans[None, :, :]).reshape(-1, ctx.n)
    inside = _filter_candidates(ctx, cand, _bounds(math.inf, sigma))
    bad = tuple(tuple(int(x) for x in c) for c in cand[~inside])
    return MultiscaleReport(not bad, xi.sigma, int(cand.shape[0]), bad)


def diffraction_sample(w: QuasilatticeWindow, y_grid) -> np.ndarray:
    """``|S(y)|`` with ``S(y) = sum_{x in window} exp(2 pi i y x)``."""
    y = np.atleast_1d(np.asarray(y_grid, dtype=float))
    out = np.empty(y.shape)
    for lo in range(0, y.size, 256):
        blk = y[lo: lo + 256]
        out[lo: lo + 256] = np.abs(np.exp(2j * np.pi * np.multiply.outer(blk, w.values)).sum(axis=1))
    return out
