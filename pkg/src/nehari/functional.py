"""Energy, constraint and H1 gradients on discrete radial fields.

The discrete energy is the fiber-algebra energy of the extracted coefficient
tuple, with the nonlinear integrals evaluated by the per-cell Gauss sampling
of the grid module.  The gradient assemblies below differentiate exactly that
discrete quantity, so the pairing identities h1_inner(grad_I, u) = phi and
h1_inner(grad_phi, u) = phi + psi hold to rounding.
"""

from dataclasses import dataclass

import numpy as np

from . import fiber
from .errors import DegenerateConstraint, NumericalFailure
from .grid import (
    _XI,
    apply_h1,
    gauss_values,
    h1_inner,
    riesz_from_load,
)

DEGENERATE_GRAD_TOL = 1e-14


@dataclass(frozen=True)
class FunctionalEval:
    coeffs: fiber.FiberCoeffs
    I: float
    phi: float
    psi: float


def extract_coeffs(u, params):
    """Coefficient tuple (D, Mms, B, C) of a field."""
    grid = u.grid
    v = u.values
    df = np.diff(v)
    D = float(np.sum(grid.stiff_c * df * df))
    e = grid.mass_e
    Mms = float(
        np.sum(
            v[:-1] ** 2 * e[:, 0]
            + 2.0 * v[:-1] * v[1:] * e[:, 1]
            + v[1:] ** 2 * e[:, 2]
        )
    )
    gv = gauss_values(u)
    B = float(np.sum(grid.tables["s1"].gauss_w * np.abs(gv) ** params.p))
    C = float(np.sum(grid.tables["s2"].gauss_w * np.abs(gv) ** params.q))
    if not all(np.isfinite(x) for x in (D, Mms, B, C)):
        raise NumericalFailure(f"non-finite coefficients ({D}, {Mms}, {B}, {C})")
    return fiber.FiberCoeffs(D=max(D, 0.0), Mms=max(Mms, 0.0), B=B, C=C)


def evaluate(u, params):
    c = extract_coeffs(u, params)
    return FunctionalEval(
        coeffs=c,
        I=fiber.energy(c, params),
        phi=fiber.phi(c, params),
        psi=fiber.psi(c, params),
    )


def _power_load(u, power, table):
    """Nodal gradient of the Gauss-sampled integral int w |u|^power dr,
    divided by power: the load of |u|^{power-2} u against the weight."""
    gv = gauss_values(u)
    core = table.gauss_w * np.abs(gv) ** (power - 2.0) * gv
    load = np.zeros(u.grid.n + 1)
    load[:-1] += core @ (1.0 - _XI)
    load[1:] += core @ _XI
    return load


def grad_I_load(u, params):
    """Nodal load vector of I'(u)."""
    table_p = u.grid.tables["s1"]
    table_q = u.grid.tables["s2"]
    load = (
        apply_h1(u)
        + params.lam * _power_load(u, params.p, table_p)
        - _power_load(u, params.q, table_q)
    )
    if not np.all(np.isfinite(load)):
        raise NumericalFailure("overflow in the energy gradient assembly")
    return load


def grad_phi_load(u, params):
    """Nodal load vector of phi'(u) (coefficients 2, p*lam, -q)."""
    table_p = u.grid.tables["s1"]
    table_q = u.grid.tables["s2"]
    load = (
        2.0 * apply_h1(u)
        + params.p * params.lam * _power_load(u, params.p, table_p)
        - params.q * _power_load(u, params.q, table_q)
    )
    if not np.all(np.isfinite(load)):
        raise NumericalFailure("overflow in the constraint gradient assembly")
    return load


def grad_I(u, params):
    """H1 Riesz representative of I'(u)."""
    return riesz_from_load(u.grid, grad_I_load(u, params))


def grad_phi(u, params):
    """H1 Riesz representative of phi'(u)."""
    return riesz_from_load(u.grid, grad_phi_load(u, params))


def projected_residual(u, params):
    """Least-squares multiplier and residual of min_mu ||I'(u) - mu phi'(u)||_H1.

    Returns a dict with keys mu, residual, plus the two gradient fields for
    reuse by the solver.
    """
    gi = grad_I(u, params)
    gp = grad_phi(u, params)
    denom = h1_inner(gp, gp)
    scale = max(h1_inner(gi, gi), 1.0)
    if denom <= DEGENERATE_GRAD_TOL * scale:
        raise DegenerateConstraint(f"phi'(u) numerically zero (|phi'|^2 = {denom})")
    mu = h1_inner(gi, gp) / denom
    diff = type(u)(u.grid, gi.values - mu * gp.values)
    residual = float(np.sqrt(max(h1_inner(diff, diff), 0.0)))
    return {"mu": mu, "residual": residual, "grad_I": gi, "grad_phi": gp, "proj": diff}
