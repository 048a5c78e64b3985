"""Vectorised safeguarded root finding for increasing scalar functions.

All implicit equations of the package (phase-law inverses, the equation for
the heavy-phase density) are strictly increasing in the unknown, so a
bracketed Newton iteration with a bisection fallback is both robust and fast.
Every array element is solved independently; the loop stops when all
elements have converged.
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError, NumericError

_EPS = np.finfo(float).eps


def expand_bracket(f, lo, hi, max_doublings=200):
    """Grow ``hi`` (keeping ``lo``) until ``f(hi) >= 0`` everywhere.

    ``lo`` must already satisfy ``f(lo) <= 0``.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.array(hi, dtype=float, copy=True)
    fhi = f(hi)
    for _ in range(max_doublings):
        bad = fhi < 0
        if not np.any(bad):
            return hi, fhi
        width = np.where(bad, hi - lo, 0.0)
        hi = np.where(bad, lo + 2.0 * np.maximum(width, 1e-300), hi)
        if not np.all(np.isfinite(hi)):
            break
        fhi = f(hi)
    idx = np.argwhere(np.asarray(fhi) < 0)
    where = tuple(idx[0]) if idx.size else ()
    raise DomainError(
        f"could not bracket root: f stays negative up to hi={np.asarray(hi)[where]!r}"
        f" (lo={np.broadcast_to(lo, np.shape(hi))[where]!r})"
    )


def solve_increasing(f, lo, hi, fprime=None, x0=None, *, rtol=4 * _EPS,
                     ftol=0.0, maxiter=200, expand=True):
    """Solve ``f(x) = 0`` elementwise for an increasing ``f`` on ``[lo, hi]``.

    Parameters
    ----------
    f : callable
        Vectorised, increasing in ``x``; ``f(lo) <= 0`` is required.
    lo, hi : array_like
        Initial bracket.  When ``expand`` is true ``hi`` is doubled until
        ``f(hi) >= 0``.
    fprime : callable, optional
        Derivative of ``f``.  Without it the iteration uses regula falsi
        steps (Illinois variant) instead of Newton steps.
    x0 : array_like, optional
        Starting guess; defaults to the bracket midpoint.
    rtol : float
        Relative bracket width at which an element is declared converged.
    ftol : float or array_like
        Absolute residual level at which an element is declared converged.

    Returns
    -------
    ndarray
        Roots with the broadcast shape of ``lo`` and ``hi``.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    lo, hi = np.broadcast_arrays(lo, hi)
    lo = lo.copy()
    hi = hi.copy()
    flo = np.asarray(f(lo), dtype=float)
    if np.any(flo > 0):
        idx = tuple(np.argwhere(flo > 0)[0])
        raise DomainError(f"f(lo) > 0 at lo={lo[idx]!r}; not a valid bracket")
    if expand:
        hi, fhi = expand_bracket(f, lo, hi)
    else:
        fhi = np.asarray(f(hi), dtype=float)
        if np.any(fhi < 0):
            idx = tuple(np.argwhere(fhi < 0)[0])
            raise DomainError(f"f(hi) < 0 at hi={hi[idx]!r}; not a valid bracket")
    ftol = np.broadcast_to(np.asarray(ftol, dtype=float), lo.shape)

    x = 0.5 * (lo + hi) if x0 is None else np.clip(np.broadcast_to(x0, lo.shape), lo, hi).astype(float)
    done = (flo == 0) | (fhi == 0)
    x = np.where(flo == 0, lo, np.where(fhi == 0, hi, x))
    side = np.zeros(lo.shape, dtype=int)  # Illinois bookkeeping
    flo = flo.copy()
    fhi = fhi.copy()

    for _ in range(maxiter):
        active = ~done
        if not np.any(active):
            return x
        fx = np.asarray(f(x), dtype=float)
        if not np.all(np.isfinite(fx[active])):
            idx = tuple(np.argwhere(active & ~np.isfinite(fx))[0])
            raise NumericError(f"non-finite residual at x={x[idx]!r}")
        conv = active & ((fx == 0) | (np.abs(fx) <= ftol))
        neg = active & (fx < 0)
        pos = active & (fx > 0)
        lo = np.where(neg, x, lo)
        flo = np.where(neg, fx, flo)
        hi = np.where(pos, x, hi)
        fhi = np.where(pos, fx, fhi)
        conv |= active & ((hi - lo) <= rtol * np.maximum(np.abs(lo), np.abs(hi)) + 1e-300)
        done |= conv
        if np.all(done):
            return x

        mid = 0.5 * (lo + hi)
        if fprime is not None:
            d = np.asarray(fprime(x), dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                cand = x - fx / d
        else:
            # Illinois: halve the retained end's value when the same end is kept twice
            f_lo = np.where(neg & (side == -1), 0.5 * flo, flo)
            f_hi = np.where(pos & (side == 1), 0.5 * fhi, fhi)
            side = np.where(neg, -1, np.where(pos, 1, side))
            with np.errstate(divide="ignore", invalid="ignore"):
                cand = lo - f_lo * (hi - lo) / (f_hi - f_lo)
        ok = np.isfinite(cand) & (cand > lo) & (cand < hi)
        tiny = active & ~done & ok & (np.abs(cand - x) <= rtol * np.abs(x))
        x = np.where(active & ~done, np.where(ok, cand, mid), x)
        if fprime is not None:
            # Newton steps below the requested resolution: accept and stop
            done |= tiny
        # a Newton step that lands on a bracket end makes no progress
        x = np.where(~done & ((x <= lo) | (x >= hi)), mid, x)

    active = ~done
    idx = tuple(np.argwhere(active)[0])
    raise NumericError(
        f"root solve did not converge in {maxiter} iterations; bracket "
        f"[{lo[idx]!r}, {hi[idx]!r}]"
    )
