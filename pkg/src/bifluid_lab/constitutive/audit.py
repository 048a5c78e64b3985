"""Sampling audits of the structural pressure hypotheses.

Each check fits constants from envelopes over a fixed ``(rho, s)`` grid and
compares fitted growth exponents with the declared ones.  Exponents are
least-squares slopes of ``log envelope`` against ``log rho`` on a near-vacuum
band and on a large-density band.  Two tolerances drive verdicts:

* comparisons with a declared nonzero bound are indeterminate within 5% of it;
* "bounded at infinity" checks compare a fitted tail exponent with 0 and use
  ``EXPONENT_PASS`` / ``EXPONENT_FAIL`` (pass below the first, fail above the
  second, indeterminate in between).
"""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import BifluidError
from .helmholtz import helmholtz, helmholtz_field
from .laws import decompose_pressure, pressure_partials
from .report import BAND, Check, HypothesisReport, compare_lower, compare_upper, worst

EXPONENT_PASS = 0.02
EXPONENT_FAIL = 0.1
DECOMPOSITION_RTOL = 1e-12
FD_RTOL = 1e-6
BORDERLINE_GAMMA = 1.8


def bog_exponent(g):
    """Integrability gain ``min{2g/3 - 1, g/2}`` from the inverse divergence."""
    return min(2.0 * g / 3.0 - 1.0, g / 2.0)


@dataclass(frozen=True)
class AuditSampling:
    rho_min: float = 1e-6
    rho_max: float = 1e6
    n_rho: int = 121
    n_s: int = 9
    near_band: tuple = (1e-6, 1e-3)
    far_band: tuple = (1e4, 1e6)
    helmholtz_range: tuple = (1e-4, 1e4)
    n_helmholtz: int = 25
    helmholtz_quadrature_points: int = 3
    monotone_points: int = 2001
    lipschitz_floor: float = 1e-2
    n_random: int = 64
    seed: int = 0

    def to_dict(self):
        return asdict(self)

    def rho_grid(self):
        return np.logspace(np.log10(self.rho_min), np.log10(self.rho_max), self.n_rho)


# ---------------------------------------------------------------------------
# sampling helpers

def ratio_grid(region, n_s, *, positive=False):
    """Species ratios covering ``[a_lower, a_upper]``; shape ``(K, M)``.

    With ``positive`` a zero lower bound is replaced by ``1e-3 * a_upper`` so
    that ``Z > 0`` (needed where partials in ``Z`` are taken).
    """
    K = region.species_count
    m = n_s if K == 1 else max(3, int(round(n_s ** (1.0 / K))))
    axes = []
    for lo, hi in zip(region.a_lower, region.a_upper):
        ax = np.linspace(lo, hi, m)
        if positive and ax[0] == 0.0:
            ax[0] = 1e-3 * hi
        axes.append(ax)
    return np.array(list(itertools.product(*axes))).T.reshape(K, -1)


def ray_points(rho, ratios):
    """``rho`` of shape ``(n,)`` and ratios ``(K, M)`` -> ``(rho2, Z)`` on the
    ``(n, M)`` tensor grid."""
    rho2 = np.broadcast_to(rho[:, None], (rho.size, ratios.shape[1]))
    return rho2, rho2[None] * ratios[:, None, :]


def fit_slope(x, y, band):
    """Least-squares slope of ``log y`` vs ``log x`` for ``x`` in ``band``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = (x >= band[0] * (1 - 1e-12)) & (x <= band[1] * (1 + 1e-12)) & (y > 0) & np.isfinite(y)
    if m.sum() < 2:
        return None
    return float(np.polyfit(np.log(x[m]), np.log(y[m]), 1)[0])


def tail_verdict(exponent):
    if exponent is None or exponent <= EXPONENT_PASS:
        return "pass"
    return "indeterminate" if exponent <= EXPONENT_FAIL else "fail"


def _point(rho, Z, idx, **extra):
    rho = np.asarray(rho)
    out = {"rho": float(rho[idx]), "Z": [float(z) for z in np.asarray(Z)[(slice(None),) + idx]]}
    out.update(extra)
    return out


def _evaluate(law, rho, Z):
    with np.errstate(all="ignore"):
        return np.broadcast_to(law.evaluate(rho, Z), np.shape(rho)).astype(float)


def _random_points(law, sampling):
    rng = np.random.default_rng(sampling.seed)
    n = sampling.n_random
    rho = 10 ** rng.uniform(np.log10(sampling.rho_min), np.log10(sampling.rho_max), n)
    lo = np.array(law.region.a_lower)[:, None]
    hi = np.array(law.region.a_upper)[:, None]
    s = lo + (hi - lo) * rng.uniform(size=(law.K, n))
    return rho, rho[None] * s


# ---------------------------------------------------------------------------
# individual checks

def _check_boundary(law, rho, Z, P, extra):
    zero = float(_evaluate(law, np.zeros(1), np.zeros((law.K, 1)))[0])
    Pr = _evaluate(law, *extra)
    pool = [(P, rho, Z), (Pr, extra[0], extra[1])]
    worst_val, witness = np.inf, None
    for vals, r, z in pool:
        idx = np.unravel_index(np.argmin(vals), vals.shape)
        if vals[idx] < worst_val:
            worst_val, witness = float(vals[idx]), _point(r, z, idx, P=float(vals[idx]))
    if zero != 0.0:
        return Check("H3.boundary", "fail", zero, 0.0,
                     {"rho": 0.0, "Z": [0.0] * law.K, "P": zero}, "P(0,0) must vanish")
    finite = bool(np.all(np.isfinite(P)) and np.all(np.isfinite(Pr)))
    if not finite:
        bad = np.argwhere(~np.isfinite(P))
        idx = tuple(bad[0]) if bad.size else (0, 0)
        return Check("H3.boundary", "fail", None, 0.0, _point(rho, Z, idx), "non-finite pressure")
    scale = max(1.0, float(np.max(np.abs(P))))
    if worst_val < -1e-14 * scale:
        return Check("H3.boundary", "fail", worst_val, 0.0, witness, "negative pressure")
    return Check("H3.boundary", "pass", worst_val, 0.0, detail="P(0,0)=0 and min P >= 0")


def _growth_profile(law, rho, Z, *, weak=False):
    D = rho ** law.gamma
    if not weak:
        for i in range(law.K):
            D = D + Z[i] ** law.beta[i]
    return D


def _lower_bound_check(name, vals, D, rho, Z, far_band):
    """Feasibility of ``C (D - 1) <= vals`` with ``C > 0``."""
    above = D > 1.0
    if not np.any(above):
        return "indeterminate", {"C_lower": None}, None, None
    with np.errstate(all="ignore"):
        ratio = np.where(above, vals / (D - 1.0), np.inf)
    idx = np.unravel_index(np.argmin(ratio), ratio.shape)
    c_low = float(ratio[idx])
    env = np.min(ratio, axis=1)
    slope = fit_slope(rho[:, 0], env, far_band)
    witness = _point(rho, Z, idx, ratio=c_low)
    verdict = "pass" if c_low > 0 else "fail"
    if verdict == "pass" and slope is not None:
        verdict = tail_verdict(-slope)
    return verdict, {"C_lower": c_low, "tail_exponent": slope}, witness, c_low


def _check_growth(law, rho, Z, P, sampling):
    D = _growth_profile(law, rho, Z)
    ratio = P / (D + 1.0)
    idx = np.unravel_index(np.argmax(ratio), ratio.shape)
    c_up = float(ratio[idx])
    slope = fit_slope(rho[:, 0], np.max(ratio, axis=1), sampling.far_band)
    v_up = tail_verdict(slope)
    top = np.unravel_index(np.argmax(np.where(rho >= sampling.far_band[1] * 0.999, ratio, -np.inf)),
                           ratio.shape)
    upper = Check("H3.growth_upper", v_up, slope, 0.0,
                  _point(rho, Z, top, ratio=float(ratio[top])) if v_up == "fail" else None,
                  "P <= C(rho^gamma + sum Z^beta + 1); value is the tail exponent of P/(D+1)",
                  {"C_upper": c_up, "tail_exponent": slope})

    v_lo, consts, wit, c_low = _lower_bound_check("strong", P, D, rho, Z, sampling.far_band)
    detail = "P >= C(rho^gamma + sum Z^beta - 1)"
    gam_bog = law.gamma + bog_exponent(law.gamma)
    if v_lo != "pass" and all(b < gam_bog for b in law.beta):
        Dw = _growth_profile(law, rho, Z, weak=True)
        v_w, consts_w, wit_w, c_w = _lower_bound_check("weak", P, Dw, rho, Z, sampling.far_band)
        consts = {**consts, **{k + "_weak": v for k, v in consts_w.items()}}
        if v_w == "pass" or (v_w == "indeterminate" and v_lo == "fail"):
            v_lo, wit, c_low = v_w, wit_w, c_w
            detail = "weak profile P >= C(rho^gamma - 1), admissible since every beta < gamma + gamma_BOG"
    lower = Check("H3.growth_lower", v_lo, c_low, 0.0, wit if v_lo == "fail" else None,
                  detail, consts)
    return [upper, lower]


def _check_helmholtz(law, sampling):
    lo, hi = sampling.helmholtz_range
    rho1 = np.logspace(np.log10(lo), np.log10(hi), sampling.n_helmholtz)
    rho, Z = ray_points(rho1, ratio_grid(law.region, sampling.n_s))
    H = helmholtz_field(law, rho, Z)
    D = _growth_profile(law, rho, Z)
    far = (10 ** ((np.log10(lo) + 3 * np.log10(hi)) / 4), hi)

    ratio = H / (D + 1.0)
    c_up = float(np.max(ratio))
    slope_up = fit_slope(rho1, np.max(ratio, axis=1), far)
    v_up = tail_verdict(slope_up)

    # H(1, Z) = 0 while D - 1 > 0 there, so the lower bound carries its own
    # additive constant: H >= c D - C0 with c > 0.
    lower_env = np.min(H / D, axis=1)
    tail = lower_env[rho1 >= far[0] * 0.999]
    c_low = 0.5 * float(np.min(tail))
    c0 = float(np.max(c_low * D - H)) if c_low > 0 else None
    slope_lo = fit_slope(rho1, lower_env, far)
    v_lo = "pass" if c_low > 0 else "fail"
    if v_lo == "pass":
        v_lo = tail_verdict(-slope_lo if slope_lo is not None else None)
    idx = np.unravel_index(np.argmin(np.where(rho >= far[0] * 0.999, H / D, np.inf)), H.shape)

    # cross-check the fixed rule against adaptive quadrature at a few points
    pick = np.linspace(0, rho.size - 1, sampling.helmholtz_quadrature_points).astype(int)
    flat_r = rho.ravel()[pick]
    flat_Z = Z.reshape(law.K, -1)[:, pick]
    try:
        ref = helmholtz(law, flat_r, flat_Z)
        qerr = float(np.max(np.abs(ref - H.ravel()[pick]) / (1.0 + np.abs(ref))))
        v_q = "pass" if qerr <= 1e-6 else "indeterminate"
    except BifluidError as exc:
        qerr, v_q = None, "indeterminate"
    verdict = worst(v_up, v_lo, v_q)
    witness = None
    if verdict == "fail":
        witness = _point(rho, Z, idx, H_over_D=float((H / D)[idx]))
    return Check("H3.helmholtz_bounds", verdict, slope_up, 0.0, witness,
                 "c D - C0 <= H_P <= C (D + 1) with D = rho^gamma + sum Z^beta",
                 {"C_upper": c_up, "c_lower": c_low, "C0": c0, "upper_tail_exponent": slope_up,
                  "lower_tail_exponent": slope_lo, "quadrature_mismatch": qerr})


def _dZ_bound(law, i):
    g = law.gamma + bog_exponent(law.gamma)
    if law.region.a_lower[i] > 0:
        g = max(g, law.beta[i] + bog_exponent(law.beta[i]))
    return g


def _check_dZ(law, sampling):
    rho1 = sampling.rho_grid()
    rho, Z = ray_points(rho1, ratio_grid(law.region, sampling.n_s, positive=True))
    _, dZ = pressure_partials(law, rho, Z)
    checks = []
    lip_env = np.zeros(rho1.shape)
    for i in range(law.K):
        absd = np.abs(dZ[i])
        env = np.max(absd, axis=1)
        lip_env = np.maximum(lip_env, rho1 * np.sum(np.abs(dZ), axis=0).max(axis=1))
        s0 = fit_slope(rho1, env, sampling.near_band)
        sinf = fit_slope(rho1, env, sampling.far_band)
        gam_low = max(0.0, -s0) if s0 is not None else 0.0
        gam_up = max(sinf + 1.0, 0.0) if sinf is not None else 0.0
        bound = _dZ_bound(law, i)
        v_low = compare_upper(gam_low, 1.0)
        v_up = compare_upper(gam_up, bound)
        with np.errstate(all="ignore"):
            denom = rho ** (-gam_low) + rho ** (gam_up - 1.0)
        C = float(np.max(absd / denom))
        verdict = worst(v_low, v_up)
        witness = None
        if verdict == "fail":
            band_ = sampling.near_band if v_low == "fail" else sampling.far_band
            edge = rho1 <= band_[0] * 1.001 if v_low == "fail" else rho1 >= band_[1] * 0.999
            row = int(np.argmax(edge))
            col = int(np.argmax(absd[row]))
            witness = _point(rho, Z, (row, col), dPdZ=float(absd[row, col]),
                             Gamma_lower=gam_low, Gamma_upper=gam_up, bound=bound)
        name = "H3.dZ_bound" if law.K == 1 else f"H3.dZ_bound[{i}]"
        checks.append(Check(name, verdict, gam_up, bound, witness,
                            "|dP/dZ| <= C(rho^-Gamma_lower + rho^(Gamma_upper - 1))",
                            {"Gamma_lower": gam_low, "Gamma_upper": gam_up, "C": C}))

    nu0 = fit_slope(rho1, lip_env, sampling.near_band)
    nuinf = fit_slope(rho1, lip_env, sampling.far_band)
    bound = max(_dZ_bound(law, i) for i in range(law.K))
    v0 = compare_lower(nu0, 0.0) if nu0 is not None else "pass"
    vinf = compare_upper(nuinf, bound) if nuinf is not None else "pass"
    verdict = worst(v0, vinf)
    witness = None
    if verdict == "fail":
        row = 0 if v0 == "fail" else rho1.size - 1
        witness = {"rho": float(rho1[row]), "L_P": float(lip_env[row]),
                   "near_exponent": nu0, "tail_exponent": nuinf}
    checks.append(Check("H3.lipschitz_s", verdict, nuinf, bound, witness,
                        "s -> P(rho, rho s) Lipschitz with L(rho) ~ rho^(1-Gamma_lower) near 0 "
                        "and rho^Gamma_upper at infinity",
                        {"near_exponent": nu0, "tail_exponent": nuinf,
                         "C": float(np.max(lip_env / (rho1 ** max(nu0 or 0, 0) * (rho1 < 1)
                                                      + rho1 ** max(nuinf or 0, 0) * (rho1 >= 1))))}))
    return checks


def _fd_step(x):
    return np.minimum(np.maximum(1e-6, 1e-6 * np.abs(x)), 0.25 * x)


def _roundoff(P, x):
    """Round-off floor of the difference quotient, expressed relative to FD_RTOL."""
    return 100 * np.finfo(float).eps * (1.0 + P) / _fd_step(x) / FD_RTOL


def _fd(fun, x):
    h = _fd_step(x)
    return (-fun(x + 2 * h) + 8 * fun(x + h) - 8 * fun(x - h) + fun(x - 2 * h)) / (12 * h)


def _check_partials(law, sampling, extra):
    if law.partial_rho is None and law.partial_Z is None:
        return Check("H3.partials_fd", "pass", detail="no analytic partials declared; "
                     "finite differences are the partials")
    rho1 = np.logspace(-2, 2, 9)
    rho, Z = ray_points(rho1, ratio_grid(law.region, sampling.n_s, positive=True))
    rr, zr = extra
    keep = (rr > 1e-2) & (rr < 1e2) & np.all(zr > 1e-8, axis=0)
    rho = np.concatenate([rho.ravel(), rr[keep]])
    Z = np.concatenate([Z.reshape(law.K, -1), zr[:, keep]], axis=1)
    dr, dZ = pressure_partials(law, rho, Z)
    P = np.abs(_evaluate(law, rho, Z))
    errs = []
    with np.errstate(all="ignore"):
        if law.partial_rho is not None:
            fd = _fd(lambda r: _evaluate(law, r, Z), rho)
            errs.append(np.abs(dr - fd) / (np.abs(fd) + _roundoff(P, rho)))
        if law.partial_Z is not None:
            for i in range(law.K):
                def f(z, i=i):
                    Zc = np.array(Z, copy=True)
                    Zc[i] = z
                    return _evaluate(law, rho, Zc)
                fd = _fd(f, Z[i])
                errs.append(np.abs(dZ[i] - fd) / (np.abs(fd) + _roundoff(P, Z[i])))
    err = np.max(np.stack(errs), axis=0)
    j = int(np.argmax(err))
    e = float(err[j])
    verdict = "pass" if e <= FD_RTOL else "fail"
    witness = _point(rho, Z, (j,), relative_error=e) if verdict == "fail" else None
    return Check("H3.partials_fd", verdict, e, FD_RTOL, witness,
                 "declared partials vs 4th-order central differences")


def _dense_rays(law, sampling):
    r = np.concatenate([[0.0], np.logspace(np.log10(sampling.rho_min), np.log10(sampling.rho_max),
                                           sampling.monotone_points)])
    return r, ratio_grid(law.region, sampling.n_s)


def _monotone_along_rays(law, sampling):
    """Return ``(rho, ratios, monotone part, remainder, P)`` along dense rays.

    Uses the declared decomposition when available, otherwise the running
    maximum of ``P`` (the smallest monotone majorant).
    """
    r, ratios = _dense_rays(law, sampling)
    rho, Z = ray_points(r, ratios)
    P = _evaluate(law, rho, Z)
    if law.decomposition is not None:
        pm, rm = decompose_pressure(law, rho, np.broadcast_to(ratios[:, None, :], Z.shape))
        return rho, Z, np.asarray(pm, dtype=float), np.asarray(rm, dtype=float), P, True
    pm = np.maximum.accumulate(P, axis=0)
    return rho, Z, pm, pm - P, P, False


def _check_decomposition(law, sampling, rays):
    rho, Z, pm, rm, P, declared = rays
    scale = np.maximum.reduce([np.abs(pm), np.abs(rm), np.abs(P), np.full(P.shape, 1e-300)])
    if declared:
        mism = np.abs(pm - rm - P) / scale
        idx = np.unravel_index(np.argmax(mism), mism.shape)
        if mism[idx] > DECOMPOSITION_RTOL:
            return Check("H4.decomposition", "fail", float(mism[idx]), DECOMPOSITION_RTOL,
                         _point(rho, Z, idx, mismatch=float(mism[idx])), "P != Pm - R")
        if np.any(rm < -1e-14 * scale):
            idx = np.unravel_index(np.argmin(rm / scale), rm.shape)
            return Check("H4.decomposition", "fail", float(rm[idx]), 0.0,
                         _point(rho, Z, idx, remainder=float(rm[idx])), "negative remainder")
        radius = law.decomposition.support_radius
        outside = rho > radius
        if np.any(outside & (np.abs(rm) > 1e-14 * scale)):
            idx = np.unravel_index(np.argmax(np.where(outside, np.abs(rm), -1)), rm.shape)
            return Check("H4.decomposition", "fail", float(rm[idx]), 0.0,
                         _point(rho, Z, idx, remainder=float(rm[idx]), support_radius=radius),
                         "remainder outside its declared support")
        drop = np.diff(pm, axis=0)
        tol = 1e-12 * np.maximum(np.abs(pm[1:]), np.abs(pm[:-1]))
        if np.any(drop < -tol):
            idx = np.unravel_index(np.argmin(drop + tol), drop.shape)
            idx = (idx[0] + 1, idx[1])
            return Check("H4.decomposition", "fail", float(np.min(drop)), 0.0,
                         _point(rho, Z, idx, decrease=float(np.min(drop))),
                         "declared monotone part decreases")
        return Check("H4.decomposition", "pass", float(np.max(rm)), None,
                     detail="declared decomposition verified along dense rays",
                     constants={"support_radius": radius, "remainder_sup": float(np.max(rm))})
    # fallback: running-maximum majorant, remainder must vanish on the last two decades
    tol = 1e-12 * np.maximum(np.abs(pm), 1e-300)
    active = rm > tol
    support = float(np.max(np.where(active, rho, 0.0)))
    limit = sampling.rho_max / 100.0
    if support <= limit:
        return Check("H4.decomposition", "pass", support, limit,
                     detail="no decomposition declared; monotone majorant found by dense scan",
                     constants={"support_radius": support, "remainder_sup": float(np.max(rm))})
    tail = np.where(rho >= limit, rm, -1.0)
    idx = np.unravel_index(np.argmax(tail), tail.shape)
    return Check("H4.decomposition", "fail", support, limit,
                 _point(rho, Z, idx, dip=float(rm[idx]), running_max=float(pm[idx])),
                 "rho -> P(rho, rho s) keeps decreasing at large rho; no compactly supported "
                 "remainder restores monotonicity")


def _check_borderline(law, sampling, rays):
    if abs(law.gamma - BORDERLINE_GAMMA) > 1e-12:
        return Check("H4.borderline", "pass", detail="gamma > 9/5: no leading-term condition")
    rho, Z, pm, rm, P, declared = rays
    g = rho ** law.gamma
    r, ratios = _dense_rays(law, sampling)
    if declared and law.decomposition.leading is not None:
        f = np.asarray(law.decomposition.leading(ratios), dtype=float).reshape(-1)
        f = np.broadcast_to(f, (ratios.shape[1],))
        pi = pm - f[None, :] * g
        drop = np.diff(pi, axis=0)
        tol = 1e-10 * np.maximum(np.abs(pi[1:]), np.abs(pi[:-1]))
        fmin = float(np.min(f))
        if fmin <= 0 or np.any(drop < -tol):
            idx = np.unravel_index(np.argmin(drop + tol), drop.shape)
            idx = (idx[0] + 1, idx[1])
            return Check("H4.borderline", "fail", fmin, 0.0,
                         _point(rho, Z, idx, leading=fmin, decrease=float(np.min(drop))),
                         "declared leading coefficient does not split off a monotone remainder")
        return Check("H4.borderline", "pass", fmin, 0.0, detail="declared leading term verified",
                     constants={"f_lower": fmin})
    with np.errstate(all="ignore"):
        inc = np.diff(pm, axis=0) / np.diff(g, axis=0)
    inc = np.where(np.isfinite(inc), inc, np.inf)
    f_best = np.min(inc, axis=0)
    fmin = float(np.min(f_best))
    if fmin > 0:
        return Check("H4.borderline", "pass", fmin, 0.0,
                     detail="largest f(s) with Pm - f rho^gamma nondecreasing, from increments",
                     constants={"f_lower": fmin})
    idx = np.unravel_index(np.argmin(inc), inc.shape)
    idx = (idx[0] + 1, idx[1])
    return Check("H4.borderline", "fail", fmin, 0.0, _point(rho, Z, idx, increment_ratio=fmin),
                 "no positive multiple of rho^(9/5) can be split off")


def _check_near_zero(law, sampling):
    rho1 = sampling.rho_grid()
    rho1 = rho1[rho1 < 1.0]
    rho, Z = ray_points(rho1, ratio_grid(law.region, sampling.n_s))
    env = np.max(_evaluate(law, rho, Z), axis=1)
    if np.all(env == 0):
        return Check("H4.near_zero", "pass", np.inf, 0.0, detail="P vanishes near vacuum",
                     constants={"alpha": None, "c": 0.0})
    alpha = fit_slope(rho1, env, sampling.near_band)
    if alpha is None:
        return Check("H4.near_zero", "indeterminate", None, 0.0, detail="too few positive samples")
    c = float(np.max(env / rho1 ** alpha))
    verdict = compare_lower(alpha, 0.0)
    witness = ({"rho": float(rho1[0]), "sup_P": float(env[0]), "alpha": alpha}
               if verdict == "fail" else None)
    return Check("H4.near_zero", verdict, alpha, 0.0, witness,
                 "sup_s P(rho, rho s) <= c rho^alpha on (0, 1)",
                 {"alpha": alpha, "c": c, "alpha_declared": law.alpha})


def _check_lipschitz(law, sampling):
    floor = sampling.lipschitz_floor
    rho1 = sampling.rho_grid()
    rho1 = rho1[rho1 >= floor]
    rho, Z = ray_points(rho1, ratio_grid(law.region, sampling.n_s, positive=True))
    mask = np.all(Z >= floor, axis=0)
    dr, _ = pressure_partials(law, rho, Z)
    second = np.zeros(rho.shape)
    with np.errstate(all="ignore"):
        for j in range(law.K):
            def f(z, j=j):
                Zc = np.array(Z, copy=True)
                Zc[j] = z
                return pressure_partials(law, rho, Zc)[1]
            h = np.minimum(np.maximum(1e-6, 1e-6 * Z[j]), 0.25 * Z[j])
            d2 = (-f(Z[j] + 2 * h) + 8 * f(Z[j] + h) - 8 * f(Z[j] - h) + f(Z[j] - 2 * h)) / (12 * h)
            second = second + np.sum(np.abs(d2), axis=0)
    L = np.where(mask, np.abs(dr) + second, 0.0)
    env = np.max(L, axis=1)
    A_fit = fit_slope(rho1, env, sampling.far_band)
    A_fit = max(A_fit, 0.0) if A_fit is not None else 0.0
    C = float(np.max(env / (1.0 + rho1 ** A_fit)))
    if not np.all(np.isfinite(L)):
        idx = np.unravel_index(np.argmax(~np.isfinite(L)), L.shape)
        return Check("H5.lipschitz", "fail", None, None, _point(rho, Z, idx),
                     "non-finite Lipschitz modulus")
    verdict = "pass"
    if law.A is not None and A_fit > law.A + BAND * max(law.A, 1.0):
        verdict = "indeterminate"
    return Check("H5.lipschitz", verdict, A_fit, law.A, None,
                 f"|dP/drho| + |d2P/dZ2| <= C(r)(1 + rho^A) on rho, Z >= {floor}",
                 {"A": A_fit, "C": C, "r_floor": floor})


# ---------------------------------------------------------------------------

def audit_hypotheses(law, sampling=None):
    """Audit a :class:`PressureLaw` against the structural hypotheses.

    Returns a :class:`HypothesisReport` with one check per condition:
    boundary values and sign, two-sided growth, Helmholtz bounds, the
    ``dP/dZ`` bound and the induced Lipschitz modulus in ``s``, analytic vs
    finite-difference partials, the monotone decomposition (and the leading
    term at ``gamma = 9/5``), the near-vacuum bound and the Lipschitz modulus
    of the partials.
    """
    sampling = sampling or AuditSampling()
    rho1 = sampling.rho_grid()
    rho, Z = ray_points(rho1, ratio_grid(law.region, sampling.n_s))
    P = _evaluate(law, rho, Z)
    extra = _random_points(law, sampling)
    rays = _monotone_along_rays(law, sampling)
    checks = [_check_boundary(law, rho, Z, P, extra)]
    checks += _check_growth(law, rho, Z, P, sampling)
    checks.append(_check_helmholtz(law, sampling))
    checks += _check_dZ(law, sampling)
    checks.append(_check_partials(law, sampling, extra))
    checks.append(_check_decomposition(law, sampling, rays))
    checks.append(_check_borderline(law, sampling, rays))
    checks.append(_check_near_zero(law, sampling))
    checks.append(_check_lipschitz(law, sampling))
    meta = {"law": law.name, "params": law.params, "region": law.region.to_dict(),
            "gamma": law.gamma, "beta": list(law.beta), "band": BAND,
            "exponent_pass": EXPONENT_PASS, "exponent_fail": EXPONENT_FAIL,
            **sampling.to_dict()}
    return HypothesisReport(subject=law.name, checks=checks, sampling=meta)
