"""Proof-tracking monitors evaluated on stored trajectories, and ladder studies.

All functions here are pure functions of trajectories (lists of
:class:`MixtureState` with a grid); nothing advances the dynamics except
:class:`RefinementStudy`, which launches the ladder runs.
"""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import spectral_ops as so
from .config_io import build_run
from .constitutive.laws import fd_derivative
from .constitutive.region import species_ratio
from .constitutive.regularize import regularized_law
from .constitutive.truncation import TruncationKit
from .errors import ConfigError, DomainError
from .solver.run import Trajectory, run, write_ledger_csv
from .solver.state import MixtureState

log = logging.getLogger(__name__)

CADENCE_RTOL = 1e-9


def bog_exponent(gamma):
    """Bogovskii integrability gain ``min(2 gamma / 3 - 1, gamma / 2)``."""
    return min(2.0 * gamma / 3.0 - 1.0, gamma / 2.0)


def _states(traj):
    return list(traj.states if isinstance(traj, Trajectory) else traj)


def _times(states):
    return np.array([s.time for s in states])


def time_integral(times, values):
    """Trapezoidal rule in time (zero for a single checkpoint)."""
    values = np.asarray(values, dtype=float)
    if len(times) < 2:
        return 0.0
    return float(np.sum(0.5 * np.diff(times) * (values[1:] + values[:-1])))


def _time_derivative(states, values):
    """Centered differences at interior checkpoints, one-sided at the ends."""
    t = _times(states)
    if len(t) < 2:
        raise DomainError("a time derivative needs at least two checkpoints")
    return np.gradient(np.asarray(values), t, axis=0)


def check_cadence(a, b):
    ta, tb = _times(_states(a)), _times(_states(b))
    if ta.shape != tb.shape or not np.allclose(ta, tb, rtol=CADENCE_RTOL, atol=1e-12):
        raise DomainError(f"cadence mismatch: {ta.size} checkpoints vs {tb.size} "
                          f"(times must coincide)")


def common_times(*trajectories):
    """Restrict trajectories to the checkpoint times they all share."""
    states = [_states(t) for t in trajectories]
    shared = _times(states[0])
    for s in states[1:]:
        t = _times(s)
        shared = np.array([x for x in shared
                           if np.any(np.isclose(t, x, rtol=CADENCE_RTOL, atol=1e-12))])
    out = []
    for s in states:
        t = _times(s)
        out.append([s[int(np.argmin(np.abs(t - x)))] for x in shared])
    return out


# ---------------------------------------------------------------------------
# renormalized-equation residuals

def _check_map(values, what):
    if not np.all(np.isfinite(values)):
        raise DomainError(f"renormalizing map {what} is not finite on the observed range")


def renorm_residual(traj, b, db=None, *, form="continuity", species=0, epsilon=0.0):
    """L1-in-space residual of a renormalized equation at each checkpoint.

    Parameters
    ----------
    traj
        :class:`Trajectory` (or list of states) with a ``grid`` attribute.
    b, db
        The renormalizing map and its derivative.  For ``form="continuity"``
        and ``"transport"`` ``b`` is scalar; for ``"two_density"`` it is
        ``b(rho, Z_i)`` and ``db`` returns ``(db/drho, db/dZ)``.  Without
        ``db`` central differences are used.
    form
        ``"continuity"``: ``d_t b(rho) + div(b u) + (rho b' - b) div u``;
        ``"two_density"``: ``d_t b + div(b u) + (rho b_rho + Z b_Z - b) div u``;
        ``"transport"``: ``d_t b(s) + u . grad b(s)`` with ``s = Z_i / rho``.
    epsilon
        If positive, the diffusive source that the regularized equations
        produce (``eps b' Lap rho`` and analogues) is subtracted.
    """
    states = _states(traj)
    grid = traj.grid
    if form not in ("continuity", "two_density", "transport"):
        raise DomainError(f"unknown residual form {form!r}")
    bv, flux_coef, source = [], [], []
    for st in states:
        rho, Z, u = st.rho, st.Z[species], st.u
        divu = so.div(grid, u)
        if form == "continuity":
            val = np.asarray(b(rho), dtype=float) * np.ones_like(rho)
            der = db(rho) if db is not None else fd_derivative(b, rho)
            der = np.asarray(der, dtype=float) * np.ones_like(rho)
            _check_map(val, "value")
            _check_map(der, "derivative")
            # div(b u) + (rho b' - b) div u, with the flux taken in conservative form
            adv = so.div(grid, val * u) + (rho * der - val) * divu
            src = der * so.lap(grid, rho)
        elif form == "two_density":
            val = np.asarray(b(rho, Z), dtype=float) * np.ones_like(rho)
            if db is not None:
                br, bz = db(rho, Z)
            else:
                br = fd_derivative(lambda r: b(r, Z), rho)
                bz = fd_derivative(lambda z: b(rho, z), Z)
            br = np.asarray(br, dtype=float) * np.ones_like(rho)
            bz = np.asarray(bz, dtype=float) * np.ones_like(rho)
            for arr, what in ((val, "value"), (br, "rho-derivative"), (bz, "Z-derivative")):
                _check_map(arr, what)
            adv = so.div(grid, val * u) + (rho * br + Z * bz - val) * divu
            src = br * so.lap(grid, rho) + bz * so.lap(grid, Z)
        else:
            s = species_ratio(rho, Z)
            val = np.asarray(b(s), dtype=float) * np.ones_like(rho)
            der = np.asarray(db(s) if db is not None else fd_derivative(b, s), dtype=float)
            _check_map(val, "value")
            _check_map(der, "derivative")
            adv = np.sum(u * so.grad(grid, val), axis=0)
            src = der * (so.lap(grid, Z) - s * so.lap(grid, rho)) / rho
        bv.append(val)
        flux_coef.append(adv)
        source.append(src)
    dbdt = _time_derivative(states, np.stack(bv))
    res = dbdt + np.stack(flux_coef) - epsilon * np.stack(source)
    return np.array([so.integrate(grid, np.abs(r)) for r in res])


def continuity_residual(traj, epsilon, species=None):
    """L1 residual of ``d_t f + div(f u) - eps Lap f`` for ``f = rho`` (or ``Z_i``)."""
    states = _states(traj)
    grid = traj.grid
    f = np.stack([s.rho if species is None else s.Z[species] for s in states])
    dfdt = _time_derivative(states, f)
    out = []
    for k, st in enumerate(states):
        r = dfdt[k] + so.div(grid, f[k] * st.u) - epsilon * so.lap(grid, f[k])
        out.append(so.integrate(grid, np.abs(r)))
    return np.array(out)


# ---------------------------------------------------------------------------
# ratio transport

def s_transport_defect(traj, ref, p=1):
    """Series ``int rho |s - s_ref|^p`` summed over species (vacuum convention ``s = 0``)."""
    if p not in (1, 2):
        raise DomainError(f"p must be 1 or 2, got {p}")
    a, b = _states(traj), _states(ref)
    check_cadence(a, b)
    grid = traj.grid
    out = []
    for sa, sb in zip(a, b):
        s = species_ratio(sa.rho, sa.Z)
        s_ref = species_ratio(sb.rho, sb.Z)
        out.append(so.integrate(grid, sa.rho * np.sum(np.abs(s - s_ref) ** p, axis=0)))
    return np.array(out)


# ---------------------------------------------------------------------------
# improved integrability

@dataclass(frozen=True)
class IntegrabilityReport:
    theta: float
    rho_integral: float
    Z_integrals: tuple
    delta_integral: float

    def to_dict(self):
        return {"theta": self.theta, "rho_integral": self.rho_integral,
                "Z_integrals": list(self.Z_integrals), "delta_integral": self.delta_integral}


def pressure_integrability(traj, theta, law, pressure_params):
    """Space-time integrals ``rho^{gamma+theta}``, ``Z_i^{beta_i+theta}``, ``delta rho^{B+theta}``.

    Requires ``0 < theta <= gamma_BOG = min(2 gamma/3 - 1, gamma/2)``.
    """
    g_bog = bog_exponent(law.gamma)
    if not 0 < theta <= g_bog:
        raise DomainError(f"theta={theta} outside (0, gamma_BOG] with gamma_BOG = "
                          f"min(2 gamma/3 - 1, gamma/2) = {g_bog:.6g} for gamma={law.gamma}")
    states = _states(traj)
    grid = traj.grid
    t = _times(states)
    rho_series = [so.integrate(grid, s.rho ** (law.gamma + theta)) for s in states]
    z_series = [[so.integrate(grid, s.Z[i] ** (law.beta[i] + theta)) for s in states]
                for i in range(law.K)]
    d_series = [so.integrate(grid, s.rho ** (pressure_params.B + theta)) for s in states]
    return IntegrabilityReport(
        theta=float(theta), rho_integral=time_integral(t, rho_series),
        Z_integrals=tuple(time_integral(t, z) for z in z_series),
        delta_integral=pressure_params.delta * time_integral(t, d_series))


# ---------------------------------------------------------------------------
# effective viscous flux and oscillation defect

def covariance(grid, f, g):
    """``<f g> - <f><g>`` with ``<.>`` the spatial mean."""
    return float(so.mean(grid, f * g) - so.mean(grid, f) * so.mean(grid, g))


def viscous_flux(state, config, pressure=None):
    """``F = Pi_delta(rho, Z) - (2 mu + lambda) div u``."""
    pressure = pressure or regularized_law(config.pressure_params, config.law)
    with np.errstate(all="ignore"):
        Pi = pressure.evaluate(state.rho, state.Z)
    return Pi - (2 * config.mu + config.lam) * so.div(config.grid, state.u)


def effective_viscous_flux(state, k, config, pressure=None):
    """Covariance of the effective viscous flux with ``T_k(rho)``."""
    F = viscous_flux(state, config, pressure)
    return covariance(config.grid, F, TruncationKit(k).T(state.rho))


def flux_correlation_series(traj, k, config):
    pressure = regularized_law(config.pressure_params, config.law)
    return np.array([effective_viscous_flux(s, k, config, pressure) for s in _states(traj)])


def oscillation_defect(traj_fine, traj_coarse, k, gamma):
    """``int int |T_k(rho_coarse) - T_k(rho_fine)|^{gamma+1}`` over the run."""
    a, b = _states(traj_fine), _states(traj_coarse)
    check_cadence(a, b)
    grid = traj_fine.grid
    kit = TruncationKit(k)
    vals = [so.integrate(grid, np.abs(kit.T(sc.rho) - kit.T(sf.rho)) ** (gamma + 1))
            for sf, sc in zip(a, b)]
    return time_integral(_times(a), vals)


def truncation_levels(traj, count=5):
    """``2^j median(rho)``, ``j = j0 .. j0 + count - 1`` with ``j0`` the first level above 1."""
    med = float(np.median(np.stack([s.rho for s in _states(traj)])))
    if not med > 0:
        raise DomainError("median density must be positive")
    j0 = 0
    while 2.0 ** j0 * med <= 1.0:
        j0 += 1
    return [2.0 ** j * med for j in range(j0, j0 + count)]


def oscillation_defect_sup(traj_fine, traj_coarse, gamma, ks=None):
    ks = truncation_levels(traj_fine) if ks is None else ks
    return max(oscillation_defect(traj_fine, traj_coarse, k, gamma) for k in ks)


# ---------------------------------------------------------------------------
# refinement studies

AXES = ("epsilon", "delta", "dt", "n")


def fitted_slope(x, y):
    """Least-squares slope of ``log|y|`` against ``log x``; ``None`` if undefined."""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    ok = np.isfinite(y) & (y > 0)
    if np.count_nonzero(ok) < 2:
        return None
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def _run_one(args):
    """Worker: build and run one ladder member; returns the run outputs."""
    base, axis, value, run_dir, save = args
    if axis == "n":
        config, state = build_run(base, grid_n=int(value))
    elif axis == "delta":
        config, state = build_run(base, delta=value)
    elif axis == "dt":
        config, state = build_run(base, dt=value)
    else:
        config, state = build_run(base, epsilon=value)
    res = run(config, state, out_dir=None)
    if run_dir is not None:
        Path(run_dir).mkdir(parents=True, exist_ok=True)
        write_ledger_csv(res, Path(run_dir) / "ledger.csv")
        if save:
            res.trajectory.save(Path(run_dir) / "checkpoints")
    return config, res.trajectory, [row.residual for row in res.ledger], \
        res.max_relative_mass_drift(), res.max_band_defect


def _reload(base, axis, value, run_dir):
    kw = {"grid_n": int(value)} if axis == "n" else {axis: value}
    config, _ = build_run(base, **kw)
    d = Path(run_dir)
    if not (d / "checkpoints" / "trajectory.json").is_file() or not (d / "ledger.csv").is_file():
        raise FileNotFoundError(f"reuse mode: no stored run in {d}")
    traj = Trajectory.load(d / "checkpoints")
    with open(d / "ledger.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    residuals = [float(r["residual"]) for r in rows]
    masses = np.array([[float(r[k]) for k in r if k.startswith("mass_")] for r in rows])
    drift = float(np.max(np.abs(masses - masses[0]) / np.abs(masses[0])))
    bands = max(float(r[k]) for r in rows for k in r if k.startswith("band_") and "_sup_" in k)
    return config, traj, residuals, drift, bands


@dataclass
class RefinementStudy:
    """A ladder of runs differing in one parameter.

    ``values`` must be strictly monotone.  The finest member (smallest
    ``epsilon``/``delta``/``dt``, largest ``n``) stands in for the limit in
    the comparison columns.
    """

    base: dict
    axis: str
    values: list
    theta: float | None = None
    flux_k: float | None = None
    p: int = 1
    slopes_for: list = field(default_factory=lambda: ["max_abs_residual"])
    reuse: str | None = None
    save_checkpoints: bool = True

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"axis must be one of {AXES}, got {self.axis!r}")
        v = np.asarray(self.values, dtype=float)
        if v.size > 1 and not (np.all(np.diff(v) > 0) or np.all(np.diff(v) < 0)):
            raise ConfigError("ladder values must be strictly monotone")
        if self.axis == "n" and not np.all(v == np.round(v)):
            raise ConfigError("grid ladder values must be integers")

    def _finest(self):
        v = list(self.values)
        return v.index(max(v)) if self.axis == "n" else v.index(min(v))

    def execute(self, out_dir=None, jobs=1):
        """Run (or reload) the ladder and return a :class:`StudyResult`."""
        out = Path(out_dir) if out_dir is not None else None
        run_dirs = [None if out is None else out / f"run_{i:02d}" for i in range(len(self.values))]
        if self.reuse is not None:
            src = Path(self.reuse)
            if not src.is_dir():
                raise FileNotFoundError(f"reuse mode: checkpoint directory {src} does not exist")
            runs = [_reload(self.base, self.axis, v, src / f"run_{i:02d}")
                    for i, v in enumerate(self.values)]
        else:
            tasks = [(self.base, self.axis, v, d, self.save_checkpoints)
                     for v, d in zip(self.values, run_dirs)]
            if jobs > 1 and len(tasks) > 1:
                with ProcessPoolExecutor(max_workers=jobs) as pool:
                    runs = list(pool.map(_run_one, tasks))
            else:
                runs = [_run_one(t) for t in tasks]
        return self._summarize(runs)

    def _summarize(self, runs):
        finest = self._finest()
        f_cfg, f_traj = runs[finest][0], runs[finest][1]
        law = f_cfg.law
        theta = self.theta if self.theta is not None else bog_exponent(law.gamma)
        k_flux = self.flux_k
        if k_flux is None:
            k_flux = truncation_levels(f_traj, 1)[0]
        rows, flux_rows = [], []
        for i, (value, (cfg, traj, residuals, drift, band)) in enumerate(zip(self.values, runs)):
            integ = pressure_integrability(traj, theta, cfg.law, cfg.pressure_params)
            flux = flux_correlation_series(traj, k_flux, cfg)
            renorm = renorm_residual(traj, lambda r: r, lambda r: np.ones_like(r),
                                     epsilon=cfg.epsilon)
            row = {
                "value": float(value), "steps": cfg.steps,
                "final_residual": residuals[-1],
                "max_abs_residual": float(np.max(np.abs(residuals))),
                "max_mass_drift": drift, "max_band_defect": band,
                "rho_gamma_theta": integ.rho_integral,
                "delta_rho_B_theta": integ.delta_integral,
                "flux_corr_mean": float(np.mean(flux)), "flux_corr_final": float(flux[-1]),
                "renorm_residual_mean": float(np.mean(renorm)),
            }
            for j, zint in enumerate(integ.Z_integrals):
                row[f"Z{j + 1}_beta_theta"] = zint
            row.update(self._comparisons(traj, f_traj, law.gamma, i == finest))
            rows.append(row)
            flux_rows.extend((float(value), s.step, s.time, c) for s, c in zip(traj, flux))
        slopes = {}
        for name in self.slopes_for:
            if name not in rows[0]:
                raise ConfigError(f"no monitored scalar named {name!r}")
            slopes[name] = fitted_slope(self.values, [r[name] for r in rows]) \
                if len(rows) > 1 else None
        return StudyResult(self, rows, slopes, flux_rows, theta, k_flux)

    def _comparisons(self, traj, f_traj, gamma, is_finest):
        if is_finest:
            return {"l2_diff_to_finest": None, "s_defect_to_finest": None,
                    "osc_defect_to_finest": None}
        a, b = traj, f_traj
        if self.axis == "n":
            a = _resampled(traj, f_traj.grid.n)
        a_states, b_states = common_times(a, b)
        a_c = Trajectory(f_traj.grid, states=a_states)
        b_c = Trajectory(f_traj.grid, states=b_states)
        sa, sb = a_states[-1], b_states[-1]
        diff = so.l2_norm(f_traj.grid, sa.rho - sb.rho)
        return {"l2_diff_to_finest": float(diff),
                "s_defect_to_finest": float(s_transport_defect(a_c, b_c, self.p)[-1]),
                "osc_defect_to_finest": float(oscillation_defect_sup(b_c, a_c, gamma))}


def _resampled(traj, n):
    g = traj.grid
    states = []
    for s in traj:
        new, rho = so.resample(g, s.rho, n)
        _, Z = so.resample(g, s.Z, n)
        _, u = so.resample(g, s.u, n)
        states.append(MixtureState(rho=rho, Z=Z, u=u, time=s.time, step=s.step))
    return Trajectory(so.TorusGrid(g.dim, n), states=states)


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


@dataclass
class StudyResult:
    study: RefinementStudy
    rows: list
    slopes: dict
    flux_rows: list
    theta: float
    flux_k: float

    def columns(self):
        cols = list(self.rows[0])
        return cols + [f"slope_{name}" for name in self.slopes]

    def write(self, out_dir):
        """Write ``study.csv``, ``flux_series.csv`` and ``study.json``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        cols = self.columns()
        with open(out / "study.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["axis"] + cols)
            for row in self.rows:
                w.writerow([self.study.axis] + [_cell(row[c]) for c in self.rows[0]]
                           + [_cell(self.slopes[n]) for n in self.slopes])
        with open(out / "flux_series.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["value", "step", "time", "flux_correlation"])
            for v, step, t, c in self.flux_rows:
                w.writerow([_cell(v), str(step), _cell(t), _cell(c)])
        meta = {"axis": self.study.axis, "values": [float(v) for v in self.study.values],
                "theta": self.theta, "flux_k": self.flux_k, "p": self.study.p,
                "slopes": self.slopes, "cadence": "every checkpoint; centered time differences "
                "inside, one-sided at the ends"}
        (out / "study.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        return out / "study.csv"
