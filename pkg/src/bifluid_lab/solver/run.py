"""Initial-data preparation, the time loop and trajectory archives."""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import spectral_ops as so
from ..constitutive.region import species_ratio
from ..errors import BlowUpError, ConfigError, DomainError
from .ledger import energy_ledger_update, initial_ledger
from .monitors import check_min_principle
from .scheme import Stepper
from .state import MixtureState

log = logging.getLogger(__name__)


def prepare_initial(rho0, Z0, u0, config, smoothing=None):
    """Validate raw initial data and build the starting :class:`MixtureState`.

    Parameters
    ----------
    rho0, Z0, u0
        Density, species densities ``(K,) + grid.shape`` and velocity
        ``(d,) + grid.shape``.
    smoothing
        Optional mode count; ``rho0`` and the ratios ``Z0 / rho0`` are
        projected on that many mode classes and recombined, so a band-valued
        ratio stays in the band whenever the projection keeps it there.

    The velocity is always projected on the first ``config.N`` mode classes.
    Raises :class:`DomainError` naming the worst grid point if positivity or
    the band fails (before or after smoothing).
    """
    g = config.grid
    region = config.region
    rho0 = np.asarray(rho0, dtype=float)
    Z0 = np.asarray(Z0, dtype=float).reshape((region.species_count,) + g.shape)
    u0 = np.asarray(u0, dtype=float).reshape((g.dim,) + g.shape)
    if rho0.shape != g.shape:
        raise ConfigError(f"rho0 has shape {rho0.shape}, grid expects {g.shape}")
    _validate(rho0, Z0, region, "raw initial data")
    if smoothing is not None:
        s = species_ratio(rho0, Z0)
        rho0 = so.project_modes(g, rho0, smoothing)
        s = so.project_modes(g, s, smoothing)
        Z0 = s * rho0
        _validate(rho0, Z0, region, f"initial data smoothed to {smoothing} modes")
    u0 = so.project_modes(g, u0, config.N)
    return MixtureState(rho=rho0, Z=Z0, u=u0, time=0.0, step=0)


def _validate(rho, Z, region, what):
    if np.min(rho) <= 0:
        idx = np.unravel_index(np.argmin(rho), rho.shape)
        raise DomainError(f"{what}: density not strictly positive; worst point {tuple(map(int, idx))} "
                          f"with rho={rho[idx]:.6g}")
    lo, hi = region.band_defects(rho, Z)
    both = np.maximum(lo, hi)
    if np.max(both) > 0:
        i, *idx = np.unravel_index(np.argmax(both), both.shape)
        idx = tuple(int(j) for j in idx)
        ratio = Z[(i,) + idx] / rho[idx]
        raise DomainError(
            f"{what}: species {i + 1} leaves the band [{region.a_lower[i]}, {region.a_upper[i]}]; "
            f"worst point {idx} with Z/rho={ratio:.6g}")


class Trajectory:
    """Checkpointed states of one run, in memory and optionally on disk.

    On disk a trajectory is a directory holding ``trajectory.json`` (index)
    and, per checkpoint ``k``, the fields ``ckpt_k_rho``, ``ckpt_k_Z<i>`` and
    ``ckpt_k_u<j>`` in the raw field format of :func:`spectral_ops.save_field`.
    """

    def __init__(self, grid, config_dict=None, states=None):
        self.grid = grid
        self.config_dict = config_dict or {}
        self.states = list(states or [])

    def append(self, state):
        self.states.append(state)

    def __len__(self):
        return len(self.states)

    def __getitem__(self, i):
        return self.states[i]

    def __iter__(self):
        return iter(self.states)

    @property
    def times(self):
        return np.array([s.time for s in self.states])

    @property
    def steps(self):
        return [s.step for s in self.states]

    def save(self, directory):
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        entries = []
        for k, s in enumerate(self.states):
            stem = f"ckpt_{k:05d}"
            files = {"rho": f"{stem}_rho"}
            so.save_field(d / files["rho"], self.grid, s.rho, name="rho", time=s.time)
            for i, z in enumerate(s.Z):
                files[f"Z{i + 1}"] = f"{stem}_Z{i + 1}"
                so.save_field(d / files[f"Z{i + 1}"], self.grid, z, name=f"Z{i + 1}", time=s.time)
            for j, uj in enumerate(s.u):
                files[f"u{j + 1}"] = f"{stem}_u{j + 1}"
                so.save_field(d / files[f"u{j + 1}"], self.grid, uj, name=f"u{j + 1}", time=s.time)
            entries.append({"index": k, "step": s.step, "time": s.time, "files": files})
        index = {"format": "bifluid-lab trajectory", "version": 1, "grid": self.grid.metadata(),
                 "species": int(self.states[0].Z.shape[0]) if self.states else 0,
                 "config": self.config_dict, "checkpoints": entries}
        (d / "trajectory.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
        return d

    @classmethod
    def load(cls, directory):
        d = Path(directory)
        index_path = d / "trajectory.json"
        if not index_path.is_file():
            raise FileNotFoundError(f"no trajectory index at {index_path}")
        index = json.loads(index_path.read_text())
        g = index["grid"]
        grid = so.TorusGrid(g["dim"], g["n"])
        states = []
        for e in index["checkpoints"]:
            files = e["files"]
            rho = so.load_field(d / files["rho"])[1]
            Z = np.stack([so.load_field(d / files[f"Z{i + 1}"])[1] for i in range(index["species"])])
            u = np.stack([so.load_field(d / files[f"u{j + 1}"])[1] for j in range(grid.dim)])
            states.append(MixtureState(rho=rho, Z=Z, u=u, time=e["time"], step=e["step"]))
        return cls(grid, index.get("config"), states)


@dataclass
class RunResult:
    trajectory: Trajectory
    ledger: list
    monitors: list
    masses: np.ndarray
    galerkin_residuals: list = field(default_factory=list)
    cg_iterations: list = field(default_factory=list)
    final: MixtureState | None = None
    blowup: BlowUpError | None = None

    @property
    def residuals(self):
        return np.array([row.residual for row in self.ledger])

    @property
    def max_band_defect(self):
        return max(m.max_defect for m in self.monitors)

    def max_relative_mass_drift(self):
        m0 = self.masses[0]
        scale = np.where(m0 != 0, np.abs(m0), 1.0)
        return float(np.max(np.abs(self.masses - m0) / scale))


def _fmt(x):
    return repr(float(x))


def ledger_header(K):
    cols = ["step", "time", "kinetic", "helmholtz", "dissipation_cum", "eps_gradient_cum",
            "eps_penalty_cum", "residual", "inf_rho"]
    for kind in ("lower_sup", "upper_sup", "lower_l1", "upper_l1"):
        cols += [f"band_{kind}_{i + 1}" for i in range(K)]
    cols += ["mass_rho"] + [f"mass_Z{i + 1}" for i in range(K)]
    return cols


def ledger_rows(result):
    for k, (row, mon, mass) in enumerate(zip(result.ledger, result.monitors, result.masses)):
        yield ([str(k), _fmt(row.time), _fmt(row.kinetic), _fmt(row.helmholtz_total),
                _fmt(row.dissipation_cum), _fmt(row.eps_gradient_cum), _fmt(row.eps_penalty_cum),
                _fmt(row.residual), _fmt(mon.inf_rho)]
               + [_fmt(v) for v in mon.lower_sup + mon.upper_sup + mon.lower_l1 + mon.upper_l1]
               + [_fmt(v) for v in mass])


def write_ledger_csv(result, path):
    K = result.masses.shape[1] - 1
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ledger_header(K))
        w.writerows(ledger_rows(result))
    return Path(path)


def run(config, initial, out_dir=None, *, keep_states=True, check_galerkin=True):
    """Time-step ``initial`` to ``config.t_end``.

    Every step appends an energy-ledger row, a minimum-principle record and
    the masses; states are checkpointed every ``config.checkpoint_every``
    steps (plus the final one).  With ``out_dir`` the ledger is written to
    ``ledger.csv`` and checkpoints below ``checkpoints/``.

    A :class:`BlowUpError` is re-raised after the partial outputs are written;
    the partial :class:`RunResult` is attached as ``exc.result``.
    """
    stepper = Stepper(config)
    grid = config.grid
    traj = Trajectory(grid, config.to_dict())
    state = initial
    ledger = [initial_ledger(state, config)]
    monitors = [check_min_principle(state, config.region, grid, config.band_threshold)]
    masses = [_masses(state, grid)]
    result = RunResult(traj, ledger, monitors, np.array(masses))
    if keep_states:
        traj.append(state)
    prev = None
    try:
        for n in range(config.steps):
            new = stepper.step(state, prev)
            if check_galerkin:
                rhs, coef = stepper.last_rhs
                result.galerkin_residuals.append(
                    stepper.galerkin_residual(new.inertia, new.u, rhs, coef))
            result.cg_iterations.append(stepper.last_iterations)
            ledger.append(energy_ledger_update(ledger[-1], state, new, config))
            monitors.append(check_min_principle(new, config.region, grid, config.band_threshold))
            masses.append(_masses(new, grid))
            prev, state = state, new
            last = n == config.steps - 1
            if keep_states and (new.step % config.checkpoint_every == 0 or last):
                traj.append(new)
    except BlowUpError as exc:
        result.blowup = exc
        log.error("run stopped: %s", exc)
    result.masses = np.array(masses)
    result.final = state
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_ledger_csv(result, out / "ledger.csv")
        if keep_states:
            traj.save(out / "checkpoints")
    if result.blowup is not None:
        result.blowup.result = result
        raise result.blowup
    return result


def _masses(state, grid):
    rho_mass, z_mass = state.masses(grid)
    return [rho_mass] + z_mass
