"""Mahler measures and Bohr means of ``ln|A|``.

Univariate measures come from Jensen's formula on computed roots; multivariate
ones from randomized quasi-Monte Carlo averages over the torus; the Bohr mean is
a long line average of ``ln|A(y)|``, whose exponential is comparable to ``M(A)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.stats import qmc

from . import errors
from .filter import Filter, TrigPolynomial, to_trig_poly
from .polyroots import roots_with_errors
from .quadrature import TrigSum, integrate_log_abs, symmetric_cumulative, symmetric_edges

JENSEN = "jensen_exact"
TORUS_QMC = "torus_qmc"
LINE_AVERAGE = "line_average"
BOYD_LAWTON = "boyd_lawton"

MACHINE_FLOOR = np.finfo(float).tiny


@dataclass(frozen=True)
class MeanEstimate:
    """A mean (or its exponential) with a reported uncertainty.

    ``unclipped`` repeats ``value`` with the log clip moved to the machine
    floor; ``history`` holds ``(L, mean)`` pairs for line averages.
    """

    value: float
    half_width: float
    samples: int
    method: str
    clip: float | None = None
    unclipped: float | None = None
    history: tuple = field(default=())

    def __post_init__(self):
        if not self.half_width >= 0:
            raise ValueError("half_width must be nonnegative")


def _strip(coeffs):
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    nz = np.flatnonzero(c != 0)
    if nz.size == 0:
        raise errors.ZeroPolynomial("the zero polynomial has no Mahler measure")
    return c[nz[0]: nz[-1] + 1]


def mahler_jensen(coeffs) -> MeanEstimate:
    """``M(P) = |c| prod max(1, |w_j|)`` for ascending ``coeffs``.

    The half width propagates the per-root error estimate ``|P(w)|/|P'(w)|``
    through the roots that are (or might be) outside the unit circle.
    """
    c = _strip(coeffs)
    lead = abs(c[-1])
    if c.size == 1:
        return MeanEstimate(float(lead), 0.0, 0, JENSEN)
    z, err = roots_with_errors(c)
    mod = np.abs(z)
    outside = mod > 1
    value = lead * float(np.prod(mod[outside]))
    near = mod + err > 1
    rel = float(np.sum(err[near] / np.maximum(mod[near], 1.0)))
    return MeanEstimate(float(value), float(value * rel), int(c.size - 1), JENSEN)


def _batch_points(d, n_per_batch, batches, seed):
    rng = np.random.default_rng(seed)
    m = int(round(math.log2(n_per_batch)))
    for _ in range(batches):
        sob = qmc.Sobol(d, scramble=True, seed=rng)
        yield sob.random_base2(m)


def mahler_torus_mean(P: TrigPolynomial, n_samples: int = 1 << 16, clip: float = 1e-8,
                      seed: int = 0, batches: int = 8) -> MeanEstimate:
    """``exp`` of the torus average of ``max(ln clip, ln|P_trig|)``.

    Points come from ``batches`` independently scrambled Sobol nets of
    ``n_samples / batches`` points each (rounded to a power of two); the half
    width is a 95% Student-t interval from the batch means, mapped through exp.
    """
    if not clip > 0:
        raise errors.ValidationError("clip must be positive")
    if batches < 8:
        raise errors.ValidationError("at least 8 batches are needed for a variance estimate")
    if not np.any(P.coeffs != 0):
        raise errors.ZeroPolynomial("P is identically zero")
    per = max(2, 1 << int(round(math.log2(max(2, n_samples // batches)))))
    log_clip = math.log(clip)
    log_floor = math.log(MACHINE_FLOOR)
    means, raw_means = [], []
    for pts in _batch_points(P.d, per, batches, seed):
        lv = np.log(np.maximum(np.abs(P(pts)), MACHINE_FLOOR))
        means.append(math.fsum(np.maximum(lv, log_clip)) / per)
        raw_means.append(math.fsum(np.maximum(lv, log_floor)) / per)
    mean = math.fsum(means) / batches
    raw = math.fsum(raw_means) / batches
    sd = float(np.std(means, ddof=1))
    hw_log = float(stats.t.ppf(0.975, batches - 1)) * sd / math.sqrt(batches)
    value = math.exp(mean)
    return MeanEstimate(value, value * hw_log, per * batches, TORUS_QMC, clip, math.exp(raw))


def bohr_mean_log_modulus(f: Filter, L_schedule, clip: float = 1e-8, panels_per_unit: int = 64,
                          threads=None, min_final_L: float = 1e3) -> MeanEstimate:
    """``(1/2L) int_{-L}^{L} ln|A(y)| dy`` along an increasing schedule of ``L``.

    ``value`` is the mean at the last ``L`` (a logarithm, so ``exp(value)`` is
    comparable to ``M(A)``); ``half_width`` is the change from the previous
    schedule entry. Convergence is reported, not asserted.
    """
    L = [float(x) for x in L_schedule]
    if len(L) < 2:
        raise errors.ScheduleTooShort("need at least two values of L")
    if any(b <= a for a, b in zip(L, L[1:])) or L[0] <= 0:
        raise errors.ValidationError("L schedule must be positive and increasing")
    if L[-1] < min_final_L:
        raise errors.ValidationError(f"final L must be at least {min_final_L:g}")
    span = max(1.0, float(np.ptp(f.tau)))
    F = TrigSum(f.weights, f.tau)
    seg, seg_raw, n_eval = integrate_log_abs(F, symmetric_edges(L), panels_per_unit * span, clip,
                                             threads=threads)
    T, I = symmetric_cumulative(seg, L)
    _, I_raw = symmetric_cumulative(seg_raw, L)
    means = I / (2 * T)
    raw = I_raw / (2 * T)
    hist = tuple((float(t), float(m)) for t, m in zip(T, means))
    return MeanEstimate(float(means[-1]), float(abs(means[-1] - means[-2])), int(n_eval),
                        LINE_AVERAGE, clip, float(raw[-1]), hist)


def boyd_lawton_sequence(P: TrigPolynomial, N_list) -> list[MeanEstimate]:
    """``M(P(z, z^N))`` for each ``N``; these converge to ``M(P)`` as ``N`` grows."""
    if P.d != 2:
        raise errors.UnsupportedDimension(f"only two variables are supported (d = {P.d})")
    out = []
    for N in N_list:
        N = int(N)
        if N < 1:
            raise errors.ValidationError("N must be >= 1")
        e = P.exponents[:, 0] + N * P.exponents[:, 1]
        e = e - e.min()
        c = np.zeros(int(e.max()) + 1, dtype=complex)
        np.add.at(c, e, P.coeffs)
        est = mahler_jensen(c)
        out.append(MeanEstimate(est.value, est.half_width, N, BOYD_LAWTON))
    return out


def mahler_trig(P: TrigPolynomial, n_samples: int = 1 << 18, seed: int = 0) -> MeanEstimate:
    """``M(P)``: exact via Jensen when only one variable is used, else torus QMC."""
    Q = P.used_variables()
    if Q.d == 1 or not np.any(Q.exponents):
        return mahler_jensen(Q.univariate() if Q.d == 1 else [Q.coeffs.sum()])
    return mahler_torus_mean(Q, n_samples=n_samples, seed=seed)


def mahler_filter(f: Filter, n_samples: int = 1 << 18, seed: int = 0) -> MeanEstimate:
    """``M(A)``, the Mahler measure of the torus lift of the filter."""
    return mahler_trig(to_trig_poly(f), n_samples=n_samples, seed=seed)
