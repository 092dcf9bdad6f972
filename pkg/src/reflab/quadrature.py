"""Composite Gauss-Legendre quadrature of ``ln|F|`` for oscillatory ``F`` with
isolated zeros.

Panels of fixed width cover each segment; a panel whose node values dip close
to zero is bisected (up to ``max_depth`` times) so that the logarithmic spikes
are resolved. Two integrals are accumulated: one of ``max(ln clip, ln|F|)`` and
one with the clip at the smallest positive double. Reductions run over fixed
chunks in a fixed order, so results do not depend on the thread count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

NODES, WEIGHTS = np.polynomial.legendre.leggauss(9)
UNIT_NODES = (NODES + 1.0) / 2.0  # on [0, 1]
UNIT_WEIGHTS = WEIGHTS / 2.0
TINY = np.finfo(float).tiny
CHUNK = 1 << 15


def resolve_threads(threads=None) -> int:
    if threads is None:
        threads = os.environ.get("REFLAB_THREADS") or os.cpu_count() or 1
    return max(1, int(threads))


class TrigSum:
    """``F(u) = sum_j c_j exp(2 pi i f_j u)`` with fast panel evaluation."""

    def __init__(self, coeffs, freqs):
        self.c = np.asarray(coeffs, dtype=complex)
        self.f = np.asarray(freqs, dtype=float)
        center = (self.f.max() + self.f.min()) / 2
        # |F| is unchanged by a common frequency shift; use the tightest bound
        self.deriv_bound = 2 * np.pi * float(np.sum(np.abs(self.c) * np.abs(self.f - center)))

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return np.exp(2j * np.pi * np.multiply.outer(u, self.f)) @ self.c

    def panels(self, starts, width):
        """Values at the Gauss nodes of panels ``[s, s + width]``, shape ``(P, 9)``."""
        width = np.broadcast_to(np.asarray(width, dtype=float), starts.shape)
        if np.all(width == width.flat[0]):
            head = np.exp(2j * np.pi * np.multiply.outer(starts, self.f)) * self.c
            rel = np.exp(2j * np.pi * np.multiply.outer(self.f, width.flat[0] * UNIT_NODES))
            return head @ rel
        pts = starts[:, None] + width[:, None] * UNIT_NODES[None, :]
        return self(pts)

    def flag(self, values, width):
        """Panels whose node values come within reach of a zero."""
        reach = width * self.deriv_bound
        # the 1e-3 floor only matters while a panel is coarse on the scale of a dip
        thresh = np.maximum(0.1 * reach, np.where(reach > 1e-2, 1e-3, 0.0))
        return np.min(np.abs(values), axis=1) < thresh


def _panel_logs(absvals, width, log_clip):
    lv = np.log(np.maximum(absvals, TINY))
    clipped = np.maximum(lv, log_clip) @ UNIT_WEIGHTS
    raw = lv @ UNIT_WEIGHTS
    return clipped * width, raw * width


def _integrate_panels(F, starts, width, log_clip, max_depth):
    """Integrate over panels ``[s, s + width]`` with adaptive bisection of flagged panels.

    Returns (clipped, unclipped, n_evaluations) sums using a deterministic order.
    """
    vals = F.panels(starts, width)
    flagged = F.flag(vals, width) if max_depth > 0 else np.zeros(len(starts), bool)
    w = np.broadcast_to(np.asarray(width, float), starts.shape)
    c, r = _panel_logs(np.abs(vals[~flagged]), w[~flagged], log_clip)
    clipped = [float(np.sum(c))]
    raw = [float(np.sum(r))]
    n_eval = vals.size
    s = starts[flagged]
    wf = w[flagged]
    depth = 0
    while s.size:
        depth += 1
        half = wf / 2
        s = np.concatenate([s, s + half])
        wf = np.concatenate([half, half])
        order = np.argsort(s, kind="stable")
        s, wf = s[order], wf[order]
        vals = F.panels(s, wf)
        n_eval += vals.size
        fl = F.flag(vals, wf) if depth < max_depth else np.zeros(len(s), bool)
        c, r = _panel_logs(np.abs(vals[~fl]), wf[~fl], log_clip)
        clipped.append(float(np.sum(c)))
        raw.append(float(np.sum(r)))
        s, wf = s[fl], wf[fl]
    return math.fsum(clipped), math.fsum(raw), n_eval


def integrate_log_abs(F, edges, panels_per_unit=64, clip=1e-8, max_depth=10, threads=None):
    """Integrals of ``ln|F|`` over consecutive segments ``[edges[i], edges[i+1]]``.

    Parameters
    ----------
    F : object with ``panels(starts, width)`` and ``flag(values, width)``
    edges : increasing sequence of floats
    panels_per_unit : int
        Panels per unit length (at least one panel per segment).
    clip : float
        Values of ``|F|`` below ``clip`` count as ``clip``.

    Returns
    -------
    clipped, unclipped : ndarray of segment integrals
    n_eval : int
        Number of integrand evaluations.
    """
    edges = np.asarray(edges, dtype=float)
    log_clip = math.log(clip)
    jobs = []  # (segment index, starts, width)
    for i in range(len(edges) - 1):
        a, b = edges[i], edges[i + 1]
        n = max(1, int(math.ceil((b - a) * panels_per_unit)))
        h = (b - a) / n
        for lo in range(0, n, CHUNK):
            k = np.arange(lo, min(n, lo + CHUNK), dtype=float)
            jobs.append((i, a + h * k, h))

    def run(job):
        i, starts, h = job
        return (i,) + _integrate_panels(F, starts, h, log_clip, max_depth)

    threads = resolve_threads(threads)
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    nseg = len(edges) - 1
    clipped = [[] for _ in range(nseg)]
    raw = [[] for _ in range(nseg)]
    n_eval = 0
    for i, c, r, n in results:
        clipped[i].append(c)
        raw[i].append(r)
        n_eval += n
    return (np.array([math.fsum(x) for x in clipped]), np.array([math.fsum(x) for x in raw]), n_eval)


def symmetric_edges(half_widths):
    """Edges ``-T_k < ... < -T_1 < 0 < T_1 < ... < T_k`` for sorted positive ``T``."""
    t = np.unique(np.asarray(half_widths, dtype=float))
    return np.concatenate([-t[::-1], [0.0], t])


def symmetric_cumulative(segments, half_widths):
    """From segment integrals over :func:`symmetric_edges`, the integrals over
    ``[-T, T]`` for each sorted unique ``T``."""
    t = np.unique(np.asarray(half_widths, dtype=float))
    k = t.size
    neg = segments[:k][::-1]  # [-T_1, 0], [-T_2, -T_1], ...
    pos = segments[k:]
    out = []
    acc_n, acc_p = [], []
    for i in range(k):
        acc_n.append(neg[i])
        acc_p.append(pos[i])
        out.append(math.fsum(acc_n) + math.fsum(acc_p))
    return t, np.array(out)
