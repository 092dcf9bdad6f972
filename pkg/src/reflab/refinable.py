"""Fourier transforms of refinable distributions through the truncated product
``fhat(y) = prod_{k>=1} A(y lambda^-k)``, and the asymptotics built on it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from . import errors
from .algebra import qlambda_mp
from .filter import Filter, eval_filter, eval_filter_mp
from .mahler import MeanEstimate, mahler_filter
from .quadrature import TrigSum, integrate_log_abs, symmetric_cumulative, symmetric_edges

LOG_ZERO_HIT = math.log(1e-300)


class RefinableEvaluator:
    """Evaluator of ``fhat`` for a filter.

    The number of factors for an argument ``y`` is
    ``K = max(K_min, ceil(log_|lambda|(|y| B / (tail_eps (|lambda| - 1)))))`` with
    ``B = 2 pi sum |a_j tau_j| / |lambda|``, so the neglected tail
    ``prod_{k>K} A(y lambda^-k)`` differs from 1 by about ``tail_eps``.
    """

    def __init__(self, filter: Filter, tail_eps: float = 1e-12, K_min: int = 8):
        if not 0 < tail_eps <= 1e-6:
            raise errors.ValidationError("tail_eps must lie in (0, 1e-6]")
        if K_min < 1:
            raise errors.ValidationError("K_min must be >= 1")
        self.filter = filter
        self.tail_eps = float(tail_eps)
        self.K_min = int(K_min)
        self.abs_lam = abs(filter.lam)
        self._tau_mp = {}

    def n_factors(self, ymax: float) -> int:
        B = self.filter.derivative_bound
        ymax = abs(float(ymax))
        if ymax == 0 or B == 0:
            return self.K_min
        arg = ymax * B / (self.tail_eps * (self.abs_lam - 1))
        if arg <= 1:
            return self.K_min
        return max(self.K_min, math.ceil(math.log(arg) / math.log(self.abs_lam)))

    def tau_mp(self, dps):
        if dps not in self._tau_mp:
            self._tau_mp[dps] = self.filter.tau_mp(dps)
        return self._tau_mp[dps]

    def __repr__(self):
        return f"RefinableEvaluator({self.filter!r}, tail_eps={self.tail_eps}, K_min={self.K_min})"


def _is_mp(y):
    return isinstance(y, (mpmath.mpf, mpmath.mpc))


def _fhat_mp(e: RefinableEvaluator, y, dps: int):
    """``(fhat(y), ln|fhat(y)|)`` with phases reduced at ``dps`` digits."""
    f = e.filter
    tau = e.tau_mp(dps)
    K = e.n_factors(float(y))
    with mpmath.workdps(dps):
        lam = f.lam_mp(dps)
        u = mpmath.mpf(y)
        prod = 1 + 0j
        logmod = 0.0
        for _ in range(K):
            u = u / lam
            a = eval_filter_mp(f, u, tau, dps)
            if a == 0:
                return 0j, -math.inf
            prod *= a
            logmod += math.log(abs(a))
            if prod == 0:  # underflow: keep the log-modulus, the value is below 1e-308
                prod = 0j
    return prod, logmod


def eval_fhat(e: RefinableEvaluator, y, dps: int = 50):
    """``fhat(y)`` by the truncated product.

    ``y`` may be a float, an array, or an mpmath number; for the latter the phases
    ``tau_j y lambda^-k`` are reduced modulo 1 in multiprecision, which keeps
    arguments far beyond ``1e12`` accurate.
    """
    if _is_mp(y):
        return _fhat_mp(e, y, dps)[0]
    y = np.asarray(y, dtype=float)
    K = e.n_factors(np.max(np.abs(y)) if y.size else 0.0)
    out = np.ones(y.shape, dtype=complex)
    lam = e.filter.lam
    for k in range(1, K + 1):
        out *= eval_filter(e.filter, y * lam ** (-k))
    return out if out.ndim else complex(out)


def functional_residual(e: RefinableEvaluator, y: float, k: int) -> float:
    """``|fhat(y lambda^k) - fhat(y) prod_{j=0..k-1} A(y lambda^j)|``.

    The index range follows from the product: ``fhat(lambda y) = A(y) fhat(y)``.
    """
    if k < 1:
        raise errors.ValidationError("k must be >= 1")
    lam = e.filter.lam
    lhs = eval_fhat(e, y * lam ** k)
    rhs = eval_fhat(e, y)
    for j in range(k):
        rhs *= complex(eval_filter(e.filter, y * lam ** j))
    return float(abs(lhs - rhs))


# ---------------------------------------------------------------------------
# integrals of ln|fhat| and the decay exponent


class _FhatPanels:
    """Panel evaluator of ``fhat`` for the generic quadrature driver."""

    def __init__(self, e: RefinableEvaluator):
        self.e = e

    def panels(self, starts, width):
        width = np.broadcast_to(np.asarray(width, float), starts.shape)
        from .quadrature import UNIT_NODES

        pts = starts[:, None] + width[:, None] * UNIT_NODES[None, :]
        return eval_fhat(self.e, pts)

    @staticmethod
    def flag(values, width):
        a = np.abs(values)
        return np.min(a, axis=1) < 0.1 * np.max(a, axis=1)


def log_fhat_integrals(e: RefinableEvaluator, L_values, panels_per_unit: int = 64, clip: float = 1e-12,
                       method: str = "scales", threads=None) -> np.ndarray:
    """``int_{-L}^{L} ln|fhat(y)| dy`` for each ``L``.

    ``method="direct"`` integrates the truncated product itself. ``"scales"``
    uses ``ln|fhat(y)| = sum_k ln|A(y lambda^-k)|`` and integrates each scale
    separately, ``int_{-L}^{L} ln|A(y lambda^-k)| dy = |lambda|^k I(L |lambda|^-k)``
    with ``I(T) = int_{-T}^{T} ln|A|``; all ``I(T)`` come from one quadrature pass.
    """
    L_values = np.asarray(L_values, dtype=float)
    f = e.filter
    span = max(1.0, float(np.ptp(f.tau)))
    ppu = panels_per_unit * span
    if method == "direct":
        seg, _, _ = integrate_log_abs(_FhatPanels(e), symmetric_edges(L_values), ppu, clip,
                                      threads=threads)
        T, I = symmetric_cumulative(seg, L_values)
        return np.array([I[np.searchsorted(T, L)] for L in L_values])
    if method != "scales":
        raise errors.ValidationError(f"unknown method {method!r}")
    lam = e.abs_lam
    t_stop = 1e-5
    scales = []  # per L: list of (k, T)
    for L in L_values:
        ks = []
        k = 1
        while L * lam ** (-k) >= t_stop:
            ks.append((k, L * lam ** (-k)))
            k += 1
        scales.append(ks)
    all_T = sorted({T for ks in scales for _, T in ks})
    seg, _, _ = integrate_log_abs(TrigSum(f.weights, f.tau), symmetric_edges(all_T), ppu, clip,
                                  threads=threads)
    T, I = symmetric_cumulative(seg, all_T)
    lookup = dict(zip(T.tolist(), I.tolist()))
    return np.array([math.fsum(lam ** k * lookup[Tk] for k, Tk in ks) for ks in scales])


@dataclass(frozen=True)
class RhoReport:
    rho_closed: float
    rho_numeric: float
    L_grid: tuple
    raw_means: tuple
    extrapolation_residual: float
    slope: float
    mahler: MeanEstimate
    method: str

    def fit(self, L):
        return -self.rho_numeric + self.slope / math.log(L)


def rho_closed_form(f: Filter, n_samples: int = 1 << 18, seed: int = 0):
    """``-ln M(A) / ln|lambda|`` together with the Mahler estimate it came from."""
    M = mahler_filter(f, n_samples=n_samples, seed=seed)
    return -math.log(M.value) / math.log(abs(f.lam)), M


def estimate_rho(e: RefinableEvaluator, L_grid, panels_per_unit: int = 64, method: str = "scales",
                 clip: float = 1e-12, threads=None, seed: int = 0) -> RhoReport:
    """Fit ``m(L) = int_{-L}^{L} ln|fhat| / (2 L ln L)`` by ``-rho + c / ln L``.

    ``rho_numeric`` is minus the intercept, ``extrapolation_residual`` the largest
    deviation of the data from the fitted line.
    """
    L = np.asarray([float(x) for x in L_grid])
    if L.size < 4:
        raise errors.GridTooSmall("L_grid needs at least 4 points")
    if np.any(L <= 1) or np.any(np.diff(L) <= 0):
        raise errors.ValidationError("L_grid must be increasing and > 1")
    ratios = L[1:] / L[:-1]
    if np.max(np.abs(ratios / ratios[0] - 1)) > 1e-6:
        raise errors.ValidationError("L_grid must be geometric")
    if L[-1] > 1e7:
        raise errors.ValidationError("L_grid must not exceed 1e7")
    J = log_fhat_integrals(e, L, panels_per_unit, clip, method, threads)
    means = J / (2 * L * np.log(L))
    x = 1 / np.log(L)
    slope, intercept = np.polyfit(x, means, 1)
    resid = float(np.max(np.abs(means - (intercept + slope * x))))
    closed, M = rho_closed_form(e.filter, seed=seed)
    return RhoReport(float(closed), float(-intercept), tuple(L.tolist()), tuple(means.tolist()), resid,
                     float(slope), M, method)


# ---------------------------------------------------------------------------
# scaling sequences


@dataclass(frozen=True)
class ScalingRow:
    k: int
    fhat: complex
    log_modulus: float
    ratio: float


def _alpha_mp(e: RefinableEvaluator, alpha, dps):
    if _is_mp(alpha):
        return mpmath.mpf(alpha)
    if isinstance(alpha, (list, tuple, np.ndarray)):
        ctx = e.filter.context
        if ctx is None:
            raise errors.ValidationError("exact alpha coordinates need an algebraic context")
        return qlambda_mp(ctx, [Fraction(x) for x in alpha], dps)
    with mpmath.workdps(dps):
        return mpmath.mpf(float(alpha))


def scaling_sequence(e: RefinableEvaluator, alpha, k_max: int, dps: int | None = None) -> list[ScalingRow]:
    """``fhat(alpha lambda^k)`` and ``ratio_k = ln|fhat(alpha lambda^k)| / (k ln|lambda|)``.

    ``alpha`` is a float, an mpmath number, or rational power-basis coordinates
    ``b`` (``alpha = sum b_i lambda^i``; needs the filter's context). Arguments
    ``alpha lambda^k`` are formed in multiprecision.

    Raises
    ------
    ZeroHit
        If ``|fhat(alpha lambda^k)| < 1e-300`` for some ``k``.
    """
    if k_max < 1:
        raise errors.ValidationError("k_max must be >= 1")
    lam_abs = e.abs_lam
    if dps is None:
        dps = 40 + math.ceil(k_max * math.log10(lam_abs))
    rows = []
    with mpmath.workdps(dps):
        a = _alpha_mp(e, alpha, dps)
        lam = e.filter.lam_mp(dps)
        y = a
        for k in range(1, k_max + 1):
            y = y * lam
            val, logmod = _fhat_mp(e, y, dps)
            if logmod < LOG_ZERO_HIT:
                raise errors.ZeroHit(k, math.exp(logmod) if logmod > -math.inf else 0.0)
            rows.append(ScalingRow(k, complex(val), logmod, logmod / (k * math.log(lam_abs))))
    return rows
