"""Multi-species pressure laws and the built-in law catalog.

A pressure law maps a mass density ``rho`` and ``K`` partial densities
``Z = (Z_1, ..., Z_K)`` (species axis first) to a pressure.  Laws carry the
growth exponents used by the hypothesis audits and, optionally, a monotone
decomposition ``P(rho, rho s) = Pm(rho, s) - R(rho, s)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..errors import CapabilityError, DomainError, NumericError
from .region import AdmissibleRegion


@dataclass(frozen=True)
class Decomposition:
    """``P(rho, rho s) = monotone(rho, s) - remainder(rho, s)``.

    ``monotone`` is nondecreasing in ``rho``; ``remainder`` is nonnegative and
    vanishes for ``rho >= support_radius``.  For the borderline exponent
    ``gamma = 9/5`` a law may also declare ``leading(s)`` such that
    ``monotone - leading(s) rho^gamma`` stays nondecreasing.
    """

    monotone: Callable
    remainder: Callable
    support_radius: float = 0.0
    leading: Optional[Callable] = None


@dataclass(frozen=True)
class PressureLaw:
    name: str
    evaluate: Callable
    region: AdmissibleRegion
    gamma: float
    beta: tuple
    alpha: float
    partial_rho: Optional[Callable] = None
    partial_Z: Optional[Callable] = None
    decomposition: Optional[Decomposition] = None
    A: Optional[float] = None
    breakpoints: Optional[Callable] = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        beta = tuple(float(b) for b in np.atleast_1d(self.beta))
        if len(beta) == 1 and self.region.species_count > 1:
            beta = beta * self.region.species_count
        object.__setattr__(self, "beta", beta)
        if len(beta) != self.region.species_count:
            raise DomainError("need one beta exponent per species")

    @property
    def K(self):
        return self.region.species_count

    def __call__(self, rho, Z):
        return eval_pressure(self, rho, Z)


def as_species(rho, Z, K):
    """Broadcast ``rho`` and ``Z`` to shapes ``S`` and ``(K,) + S``.

    For a single species ``Z`` may be given without the species axis.
    """
    rho = np.asarray(rho, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if not (Z.ndim >= 1 and Z.shape[0] == K and (K > 1 or Z.ndim == rho.ndim + 1)):
        if K == 1:
            Z = Z[None]
        else:
            raise DomainError(f"Z must carry a leading species axis of length {K}")
    shape = np.broadcast_shapes(rho.shape, Z.shape[1:])
    return np.broadcast_to(rho, shape), np.broadcast_to(Z, (K,) + shape)


def _check_nonneg(rho, Z):
    if np.any(rho < 0) or np.any(Z < 0):
        bad = np.argwhere(rho < 0) if np.any(rho < 0) else np.argwhere(np.any(Z < 0, axis=0))
        raise DomainError(f"densities must be nonnegative (first offending index {tuple(bad[0])})")


def _finite_or_raise(val, rho, Z, what="pressure"):
    val = np.asarray(val, dtype=float)
    if not np.all(np.isfinite(val)):
        idx = tuple(np.argwhere(~np.isfinite(val))[0])
        zi = Z[(slice(None),) + idx] if Z.ndim > 1 else Z
        r = rho[idx] if rho.ndim else rho
        raise NumericError(f"non-finite {what} at rho={float(r)!r}, Z={np.asarray(zi).tolist()!r}")
    return val


def eval_pressure(law, rho, Z):
    """Evaluate ``law`` at ``(rho, Z)``; raises on negative or non-finite data."""
    rho, Z = as_species(rho, Z, law.K)
    _check_nonneg(rho, Z)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        val = law.evaluate(rho, Z)
    val = _finite_or_raise(np.broadcast_to(val, rho.shape), rho, Z)
    return val[()]


def _fd_step(x):
    return np.maximum(1e-6, 1e-6 * np.abs(x))


def fd_derivative(fun, x, h=None):
    """Fourth-order central difference ``f'(x)`` with step ``max(1e-6, 1e-6|x|)``."""
    x = np.asarray(x, dtype=float)
    h = _fd_step(x) if h is None else h
    return (-fun(x + 2 * h) + 8 * fun(x + h) - 8 * fun(x - h) + fun(x - 2 * h)) / (12 * h)


def pressure_partials(law, rho, Z):
    """Return ``(dP/drho, dP/dZ)``; ``dP/dZ`` has the species axis first.

    Analytic partials are used when the law declares them, otherwise fourth
    order central differences (one-sided near the axes are avoided by
    shrinking the step to a fraction of the coordinate).
    """
    rho, Z = as_species(rho, Z, law.K)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if law.partial_rho is not None:
            dr = np.broadcast_to(law.partial_rho(rho, Z), rho.shape)
        else:
            h = np.minimum(_fd_step(rho), 0.25 * np.where(rho > 0, rho, np.inf))
            dr = fd_derivative(lambda r: law.evaluate(r, Z), rho, h)
    return dr, pressure_partial_Z(law, rho, Z)


def pressure_partial_Z(law, rho, Z):
    """``dP/dZ`` alone (species axis first), analytic when declared."""
    rho, Z = as_species(rho, Z, law.K)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if law.partial_Z is not None:
            return np.broadcast_to(law.partial_Z(rho, Z), Z.shape)
        dZ = np.empty(Z.shape)
        for i in range(law.K):
            zi = Z[i]
            h = np.minimum(_fd_step(zi), 0.25 * np.where(zi > 0, zi, np.inf))

            def f(z, i=i):
                Zc = np.array(Z, copy=True)
                Zc[i] = z
                return law.evaluate(rho, Zc)
            dZ[i] = fd_derivative(f, zi, h)
    return dZ


def decompose_pressure(law, rho, s):
    """Return the pair ``(monotone part, remainder)`` at ``(rho, s)``.

    ``s`` holds the species ratios ``Z_i / rho`` (species axis first for
    ``K > 1``) and must lie in ``[a_lower, a_upper]``.
    """
    if law.decomposition is None:
        raise CapabilityError(f"law {law.name!r} declares no monotone decomposition")
    rho, s = as_species(rho, s, law.K)
    _check_nonneg(rho, s)
    for i in range(law.K):
        lo, hi = law.region.a_lower[i], law.region.a_upper[i]
        if np.any(s[i] < lo - 1e-14) or np.any(s[i] > hi + 1e-14):
            raise DomainError(f"species ratio outside [{lo}, {hi}]")
    with np.errstate(divide="ignore", invalid="ignore"):
        pm = np.broadcast_to(law.decomposition.monotone(rho, s), rho.shape)
        rm = np.broadcast_to(law.decomposition.remainder(rho, s), rho.shape)
    return pm[()], rm[()]


# ---------------------------------------------------------------------------
# catalog

def _pow(x, p):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p == 0, 1.0, np.power(x, p))


def _dpow(x, p):
    """d/dx x^p with the convention 0 for p == 0."""
    if p == 0:
        return np.zeros_like(np.asarray(x, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        return p * np.power(x, p - 1.0)


def _couplings(couplings, K):
    out = []
    for c in couplings or ():
        C = float(c["C"])
        r = float(c["r"])
        s = np.atleast_1d(np.asarray(c["s"], dtype=float))
        if s.size == 1 and K > 1:
            s = np.full(K, s[0])
        if s.size != K:
            raise DomainError("coupling exponent list must have one entry per species")
        if r < 0 or np.any(s < 0):
            raise DomainError("coupling exponents must be nonnegative")
        out.append((C, r, tuple(float(x) for x in s)))
    return out


def _coupling_value(terms, rho, Z):
    total = 0.0
    for C, r, s in terms:
        t = C * _pow(rho, r)
        for i, si in enumerate(s):
            t = t * _pow(Z[i], si)
        total = total + t
    return total


def _coupling_drho(terms, rho, Z):
    total = 0.0
    for C, r, s in terms:
        t = C * _dpow(rho, r)
        for i, si in enumerate(s):
            t = t * _pow(Z[i], si)
        total = total + t
    return total


def _coupling_dZ(terms, rho, Z):
    out = np.zeros(np.shape(Z))
    for C, r, s in terms:
        for i in range(len(s)):
            t = C * _pow(rho, r) * _dpow(Z[i], s[i])
            for j, sj in enumerate(s):
                if j != i:
                    t = t * _pow(Z[j], sj)
            out[i] = out[i] + t
    return out


def _region_from(params, K):
    lo = params.get("a_lower", [0.0] * K)
    hi = params.get("a_upper", [1.0] * K)
    return AdmissibleRegion(tuple(np.atleast_1d(lo)), tuple(np.atleast_1d(hi)))


def _trivial_decomposition(evaluate):
    def monotone(rho, s):
        return evaluate(rho, rho * s)
    return Decomposition(monotone=monotone, remainder=lambda rho, s: np.zeros(np.shape(rho)))


def separable_law(gamma=2.0, beta=2.0, couplings=(), region=None, coef=1.0):
    """Law ``P = rho^gamma + sum_i Z_i^beta_i + sum_m C_m rho^r_m prod_i Z_i^s_mi``.

    Couplings are dicts ``{"C": .., "r": .., "s": ..}``.  With nonnegative
    coefficients every term increases along rays ``Z = rho s`` and the
    trivial decomposition (zero remainder) is declared.
    """
    region = region or AdmissibleRegion.single(0.0, 1.0)
    K = region.species_count
    beta = tuple(np.broadcast_to(np.atleast_1d(np.asarray(beta, dtype=float)), (K,)).tolist())
    terms = _couplings(couplings, K)

    def evaluate(rho, Z):
        val = coef * _pow(rho, gamma)
        for i in range(K):
            val = val + _pow(Z[i], beta[i])
        return val + _coupling_value(terms, rho, Z)

    def partial_rho(rho, Z):
        return coef * _dpow(rho, gamma) + _coupling_drho(terms, rho, Z)

    def partial_Z(rho, Z):
        out = _coupling_dZ(terms, rho, Z)
        for i in range(K):
            out[i] = out[i] + _dpow(Z[i], beta[i])
        return out

    near_zero = [gamma] + list(beta) + [r + sum(s) for _, r, s in terms]
    growth_A = [gamma - 1.0] + [b - 2.0 for b in beta]
    for _, r, s in terms:
        growth_A += [r - 1.0 + sum(s)] + [r + sum(s) - 2.0]
    decomposition = (_trivial_decomposition(evaluate)
                     if all(C >= 0 for C, _, _ in terms) and coef >= 0 else None)
    return PressureLaw(
        name="e1", evaluate=evaluate, region=region, gamma=float(gamma), beta=beta,
        alpha=float(min(near_zero)), partial_rho=partial_rho, partial_Z=partial_Z,
        decomposition=decomposition, A=float(max(0.0, max(growth_A))),
        params={"gamma": gamma, "beta": list(beta), "couplings": [
            {"C": C, "r": r, "s": list(s)} for C, r, s in terms], "coef": coef,
            **region.to_dict()},
    )


def total_density_law(gamma=2.0, couplings=(), region=None):
    """Law ``P = (rho + sum_i Z_i)^gamma + couplings`` (``beta = gamma``)."""
    region = region or AdmissibleRegion.single(0.0, 1.0)
    K = region.species_count
    terms = _couplings(couplings, K)

    def evaluate(rho, Z):
        return _pow(rho + np.sum(Z, axis=0), gamma) + _coupling_value(terms, rho, Z)

    def partial_rho(rho, Z):
        return _dpow(rho + np.sum(Z, axis=0), gamma) + _coupling_drho(terms, rho, Z)

    def partial_Z(rho, Z):
        base = _dpow(rho + np.sum(Z, axis=0), gamma)
        return _coupling_dZ(terms, rho, Z) + base[None]

    near_zero = [gamma] + [r + sum(s) for _, r, s in terms]
    growth_A = [gamma - 1.0] + [r + sum(s) - 1.0 for _, r, s in terms]
    decomposition = (_trivial_decomposition(evaluate)
                     if all(C >= 0 for C, _, _ in terms) else None)
    return PressureLaw(
        name="e2", evaluate=evaluate, region=region, gamma=float(gamma), beta=(float(gamma),) * K,
        alpha=float(min(near_zero)), partial_rho=partial_rho, partial_Z=partial_Z,
        decomposition=decomposition, A=float(max(0.0, max(growth_A))),
        params={"gamma": gamma, "couplings": [
            {"C": C, "r": r, "s": list(s)} for C, r, s in terms], **region.to_dict()},
    )


def power_law(gamma=2.0, coef=1.0, region=None):
    """Single-density law ``P = coef * rho^gamma`` (independent of ``Z``)."""
    region = region or AdmissibleRegion.single(0.0, 1.0)
    K = region.species_count

    def evaluate(rho, Z):
        return coef * _pow(rho, gamma)

    def partial_rho(rho, Z):
        return coef * _dpow(rho, gamma)

    def partial_Z(rho, Z):
        return np.zeros(np.shape(Z))

    return PressureLaw(
        name="power", evaluate=evaluate, region=region, gamma=float(gamma), beta=(float(gamma),) * K,
        alpha=float(gamma), partial_rho=partial_rho, partial_Z=partial_Z,
        decomposition=_trivial_decomposition(evaluate) if coef >= 0 else None,
        A=float(max(0.0, gamma - 1.0)),
        params={"gamma": gamma, "coef": coef, **region.to_dict()},
    )


def zero_law(region=None):
    """The identically vanishing law (useful to isolate regularization terms)."""
    region = region or AdmissibleRegion.single(0.0, 1.0)
    K = region.species_count
    return PressureLaw(
        name="zero", evaluate=lambda rho, Z: np.zeros(np.shape(rho)), region=region,
        gamma=0.0, beta=(0.0,) * K, alpha=np.inf,
        partial_rho=lambda rho, Z: np.zeros(np.shape(rho)),
        partial_Z=lambda rho, Z: np.zeros(np.shape(Z)),
        decomposition=Decomposition(lambda rho, s: np.zeros(np.shape(rho)),
                                    lambda rho, s: np.zeros(np.shape(rho))),
        A=0.0, params=region.to_dict(),
    )


def log_oscillating_law(gamma=2.0, amplitude=0.5, frequency=10.0, region=None):
    """``P = rho^gamma (1 + a sin(w log(1 + rho))) + sum_i Z_i^gamma``.

    Obeys the growth bounds but is non-monotone along rays on every scale
    once ``a * w > gamma``: no compactly supported remainder can restore
    monotonicity.  Kept in the catalog as an audit counterexample.
    """
    region = region or AdmissibleRegion.single(0.0, 1.0)
    K = region.species_count

    def evaluate(rho, Z):
        return _pow(rho, gamma) * (1 + amplitude * np.sin(frequency * np.log1p(rho))) \
            + np.sum(_pow(Z, gamma), axis=0)

    def partial_rho(rho, Z):
        osc = 1 + amplitude * np.sin(frequency * np.log1p(rho))
        dosc = amplitude * frequency * np.cos(frequency * np.log1p(rho)) / (1 + rho)
        return _dpow(rho, gamma) * osc + _pow(rho, gamma) * dosc

    def partial_Z(rho, Z):
        return np.stack([_dpow(Z[i], gamma) for i in range(K)])

    return PressureLaw(
        name="log_oscillating", evaluate=evaluate, region=region, gamma=float(gamma),
        beta=(float(gamma),) * K, alpha=float(gamma), partial_rho=partial_rho,
        partial_Z=partial_Z, decomposition=None, A=float(gamma),
        params={"gamma": gamma, "amplitude": amplitude, "frequency": frequency,
                **region.to_dict()},
    )


CATALOG = {
    "e1": separable_law,
    "separable": separable_law,
    "e2": total_density_law,
    "total_density": total_density_law,
    "power": power_law,
    "zero": zero_law,
    "log_oscillating": log_oscillating_law,
}


def make_law(name, region=None, **params):
    """Build a catalog law by name, e.g. ``make_law("e1", gamma=2, beta=2)``."""
    try:
        factory = CATALOG[name]
    except KeyError:
        raise DomainError(f"unknown pressure law {name!r}; known: {sorted(CATALOG)}") from None
    return factory(region=region, **params)
