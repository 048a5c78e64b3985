"""Independent reference computations shared by the test modules."""
import numpy as np


def richardson_partial(fun, x, h):
    """Central difference with one Richardson step (fourth order)."""
    d1 = (fun(x + h) - fun(x - h)) / (2 * h)
    d2 = (fun(x + h / 2) - fun(x - h / 2)) / h
    return (4 * d2 - d1) / 3


def helmholtz_pde_residual(H, P, rho, Z, rel_step=1e-3):
    """``|rho H_rho + Z H_Z - H - P| / (1 + |P|)`` with finite-difference partials.

    ``H`` and ``P`` are callables of ``(rho, Z)`` (single species, arrays).
    """
    hr = rel_step * rho
    hz = rel_step * Z
    H_r = richardson_partial(lambda r: H(r, Z), rho, hr)
    H_z = richardson_partial(lambda z: H(rho, z), Z, hz)
    p = P(rho, Z)
    return np.abs(rho * H_r + Z * H_z - H(rho, Z) - p) / (1 + np.abs(p))


def loglog_slope(x, y):
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.abs(np.asarray(y, float))),
                            1)[0])
