"""Simultaneous polynomial root finding (Aberth-Ehrlich) with optional
multiprecision polishing.

Coefficients are always given in ascending order, ``c[0] + c[1] z + ... + c[n] z^n``.
"""
from __future__ import annotations

import mpmath
import numpy as np


def horner(coeffs, z):
    """Evaluate p(z) and p'(z) for ascending ``coeffs`` (vectorised over z)."""
    z = np.asarray(z, dtype=complex)
    p = np.zeros_like(z)
    dp = np.zeros_like(z)
    for c in coeffs[::-1]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _initial_points(coeffs):
    n = len(coeffs) - 1
    # geometric-mean radius of the roots; 1 for monic unit-norm polynomials
    radius = (abs(coeffs[0]) / abs(coeffs[-1])) ** (1.0 / n)
    k = np.arange(n)
    return radius * np.exp(1j * (2 * np.pi * k / n + 0.4))


def aberth(coeffs, max_iter=200, tol=1e-15):
    """Roots of a polynomial with nonzero constant and leading coefficient.

    Parameters
    ----------
    coeffs : sequence of complex
        Ascending coefficients, ``coeffs[-1] != 0`` and ``coeffs[0] != 0``.
    max_iter : int
        Cap on the number of simultaneous correction sweeps.
    tol : float
        Relative size of the Newton correction at which a root is frozen.

    Returns
    -------
    roots : ndarray of complex
    iterations : int
    """
    c = np.asarray(coeffs, dtype=complex)
    n = len(c) - 1
    if n == 1:
        return np.array([-c[0] / c[1]]), 0
    z = _initial_points(c)
    active = np.ones(n, dtype=bool)
    it = 0
    for it in range(1, max_iter + 1):
        p, dp = horner(c, z[active])
        with np.errstate(divide="ignore", invalid="ignore"):
            w = p / dp
            diff = z[active][:, None] - z[None, :]
            idx = np.flatnonzero(active)
            diff[np.arange(len(idx)), idx] = np.inf
            s = np.sum(1.0 / diff, axis=1)
            step = w / (1.0 - w * s)
        step[~np.isfinite(step)] = 0.0
        z[active] -= step
        done = np.abs(step) <= tol * np.maximum(np.abs(z[active]), 1e-300)
        done |= p == 0
        active[np.flatnonzero(active)[done]] = False
        if not active.any():
            break
    return z, it


def newton_polish(coeffs, roots, steps=2):
    """A few plain Newton steps in double precision."""
    z = np.array(roots, dtype=complex)
    for _ in range(steps):
        p, dp = horner(coeffs, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dp != 0, p / dp, 0.0)
        z = z - step
    return z


def roots_with_errors(coeffs):
    """Roots plus a first-order error estimate ``|p(z)| / |p'(z)|`` per root."""
    c = np.asarray(coeffs, dtype=complex)
    z, _ = aberth(c)
    z = newton_polish(c, z, steps=1)
    p, dp = horner(c, z)
    # rounding floor of Horner's scheme, so an exact root still gets a nonzero bound
    scale = horner(np.abs(c), np.abs(z))[0].real * len(c) * np.finfo(float).eps
    with np.errstate(divide="ignore", invalid="ignore"):
        err = (np.abs(p) + scale) / np.abs(dp)
    err[~np.isfinite(err)] = 0.0
    return z, err


def mp_polish(int_coeffs, roots, dps=50, max_steps=60):
    """Newton-polish approximate roots of an integer polynomial to ``dps`` digits.

    Returns a list of ``mpmath.mpc`` (or ``mpf`` for roots flagged real: a root
    whose imaginary part is below ``1e-12 (1 + |z|)`` is polished on the real line).
    """
    out = []
    with mpmath.workdps(dps + 10):
        cs = [mpmath.mpf(int(c)) for c in int_coeffs][::-1]  # descending for polyval
        dcs = [cs[i] * (len(cs) - 1 - i) for i in range(len(cs) - 1)]
        eps = mpmath.mpf(10) ** (-(dps + 5))
        for r in roots:
            real = abs(r.imag) <= 1e-12 * (1 + abs(r))
            z = mpmath.mpf(r.real) if real else mpmath.mpc(r.real, r.imag)
            for _ in range(max_steps):
                step = mpmath.polyval(cs, z) / mpmath.polyval(dcs, z)
                z -= step
                if abs(step) <= eps * (1 + abs(z)):
                    break
            out.append(z)
    return out


def is_real_root(z, tol=1e-12):
    return abs(complex(z).imag) <= tol * (1 + abs(complex(z)))


def root_bound(coeffs):
    """Cauchy bound on root moduli."""
    c = [abs(x) for x in coeffs]
    return 1 + max(c[:-1]) / c[-1] if len(c) > 1 else 0.0

