"""Projected H1 gradient descent on the M+ branch of the Nehari manifold.

Initialization follows the constructive existence proof: put the dilation
orbit of a Gaussian seed on M0 (amplitude/dilation in coefficient space),
back off the dilation slightly so the constraint turns negative, then
project onto the smaller fiber root, which lands on M+.  Descent steps move
against the projected H1 gradient, clamp negative nodal values, and
reproject to the t0 fiber root after every trial step, so accepted iterates
stay on the manifold to root-finder accuracy.
"""

import time
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import fiber, functional, identities
from .errors import (
    BranchLossFailure,
    ConvergenceFailure,
    InitializationFailure,
    InvalidParameter,
    NoNegativeFiber,
    RegimeMismatch,
    RootBracketFailure,
)
from .grid import RadialField, build_grid, dilate_field, gaussian_field, h1_norm
from .params import EXISTENCE, classify

ON_M_SOLVE_TOL = 1e-8
BACKOFF_SWEEP = (0.999, 0.99, 0.9, 0.8)
MAX_HALVINGS = 30


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-6
    max_iter: int = 5000
    armijo_c: float = 1e-4
    step0: float = 1.0
    seed_width: float = 1.0
    dilation_backoff: float = 0.99

    def __post_init__(self):
        if self.tol <= 0.0:
            raise InvalidParameter(f"need tol > 0, got {self.tol}")
        if not 0.0 < self.armijo_c < 1.0:
            raise InvalidParameter(f"need 0 < armijo_c < 1, got {self.armijo_c}")
        if self.max_iter < 1:
            raise InvalidParameter(f"need max_iter >= 1, got {self.max_iter}")
        if self.step0 <= 0.0:
            raise InvalidParameter(f"need step0 > 0, got {self.step0}")
        if self.seed_width <= 0.0:
            raise InvalidParameter(f"need seed_width > 0, got {self.seed_width}")
        if not 0.0 < self.dilation_backoff < 1.0:
            raise InvalidParameter(
                f"need 0 < dilation_backoff < 1, got {self.dilation_backoff}"
            )


@dataclass
class SolveReport:
    solution: RadialField
    m_plus: float
    residual: float
    mu: float
    nehari_residual: float
    pohozaev_residual: float
    psi_value: float
    iterations: int
    trace: list = dataclass_field(default_factory=list)  # (iter, I, phi, psi, residual)
    positivity: float = 0.0
    converged: bool = False
    clamp_history: list = dataclass_field(default_factory=list)
    wall_time: float = 0.0

    def to_dict(self):
        return {
            "m_plus": self.m_plus,
            "residual": self.residual,
            "mu": self.mu,
            "nehari_residual": self.nehari_residual,
            "pohozaev_residual": self.pohozaev_residual,
            "psi_value": self.psi_value,
            "iterations": self.iterations,
            "positivity": self.positivity,
            "converged": self.converged,
        }


def initialize_Mplus(params, grid, cfg):
    """Starting field on M+ built via the M0 construction and fiber projection."""
    regime = classify(params)
    if regime.tag != EXISTENCE or not regime.cond21:
        raise RegimeMismatch(
            "M+ initialization needs the Existence regime with the gap condition"
        )
    seed = gaussian_field(grid, cfg.seed_width)
    c = functional.extract_coeffs(seed, params)
    m0 = fiber.construct_M0(c, params)
    m0_field = dilate_field(seed, m0.r0)
    m0_field = RadialField(grid, m0.t0 * m0_field.values)

    sweep = (cfg.dilation_backoff,) + tuple(
        r for r in BACKOFF_SWEEP if r != cfg.dilation_backoff
    )
    for r_back in sweep:
        trial = dilate_field(m0_field, r_back)
        c_trial = functional.extract_coeffs(trial, params)
        if c_trial.is_zero() or fiber.phi(c_trial, params) >= 0.0:
            continue
        try:
            roots = fiber.fiber_roots(c_trial, params)
        except (NoNegativeFiber, RootBracketFailure):
            continue
        start = RadialField(grid, roots.t0 * trial.values)
        ev = functional.evaluate(start, params)
        if abs(ev.phi) <= ON_M_SOLVE_TOL * max(ev.coeffs.A, 1e-300) and ev.psi < 0.0:
            return start
    raise InitializationFailure(
        "no M+ point reachable from the M0 construction with the backoff sweep"
    )


def _project_to_branch(trial, params):
    """Clamp to the positive cone, then rescale to the t0 fiber root."""
    clamped = np.maximum(trial.values, 0.0)
    clamp_active = bool(np.any(trial.values[:-1] < 0.0))
    cand = RadialField(trial.grid, clamped)
    c = functional.extract_coeffs(cand, params)
    if c.is_zero() or fiber.phi(c, params) >= 0.0:
        return None, clamp_active
    try:
        roots = fiber.fiber_roots(c, params)
    except (NoNegativeFiber, RootBracketFailure):
        return None, clamp_active
    return RadialField(trial.grid, roots.t0 * cand.values), clamp_active


def minimize_on_Mplus(start, params, cfg):
    """Armijo-backtracked projected gradient descent; returns a SolveReport."""
    t_start = time.perf_counter()
    u = start.copy()
    ev = functional.evaluate(u, params)
    if ev.psi >= 0.0:
        raise BranchLossFailure(f"starting point has psi = {ev.psi} >= 0")

    trace = []
    clamp_history = []
    step = cfg.step0
    iterations = 0
    pr = functional.projected_residual(u, params)

    for iterations in range(1, cfg.max_iter + 1):
        trace.append((iterations - 1, ev.I, ev.phi, ev.psi, pr["residual"]))
        if pr["residual"] <= cfg.tol:
            break

        d = pr["proj"].values  # grad_I - mu * grad_phi; descend against it
        tau = step
        accepted = None
        for _ in range(MAX_HALVINGS + 1):
            trial = RadialField(u.grid, u.values - tau * d)
            projected, clamp_active = _project_to_branch(trial, params)
            if projected is not None:
                ev_new = functional.evaluate(projected, params)
                if ev_new.psi < 0.0 and ev_new.I <= ev.I - cfg.armijo_c * tau * pr[
                    "residual"
                ] ** 2:
                    accepted = (projected, ev_new, clamp_active)
                    break
            tau *= 0.5
        if accepted is None:
            report = _final_report(
                u, ev, pr, params, iterations, trace, clamp_history, t_start
            )
            raise BranchLossFailure(
                f"no acceptable step after {MAX_HALVINGS} halvings at iteration "
                f"{iterations}",
                report=report,
            )
        u, ev, clamp_active = accepted
        clamp_history.append(clamp_active)
        # Grow the trial step again after a clean acceptance.
        step = min(2.0 * tau, 64.0 * cfg.step0) if tau == step else tau
        pr = functional.projected_residual(u, params)
    else:
        trace.append((cfg.max_iter, ev.I, ev.phi, ev.psi, pr["residual"]))
        report = _final_report(
            u, ev, pr, params, cfg.max_iter, trace, clamp_history, t_start
        )
        raise ConvergenceFailure(
            f"projected residual {pr['residual']} above tol {cfg.tol} after "
            f"{cfg.max_iter} iterations",
            report=report,
        )

    report = _final_report(
        u, ev, pr, params, iterations - 1, trace, clamp_history, t_start
    )
    report.converged = True
    return report


def _final_report(u, ev, pr, params, iterations, trace, clamp_history, t_start):
    c = ev.coeffs
    interior = u.values[:-1]
    return SolveReport(
        solution=u,
        m_plus=ev.I,
        residual=pr["residual"],
        mu=pr["mu"],
        nehari_residual=identities.nehari_residual(c, params),
        pohozaev_residual=identities.pohozaev_residual(c, params),
        psi_value=ev.psi,
        iterations=iterations,
        trace=trace,
        positivity=float(np.min(interior)),
        clamp_history=clamp_history,
        wall_time=time.perf_counter() - t_start,
    )


def solve(params, grid, cfg):
    """Full pipeline: M+ initialization followed by constrained descent."""
    start = initialize_Mplus(params, grid, cfg)
    return minimize_on_Mplus(start, params, cfg)


def refine_study(params, cfg, grids, gamma=2.0):
    """Solve on each (n, R) setting; returns the list of reports."""
    if len(grids) < 2:
        raise InvalidParameter("refine_study needs at least two grid settings")
    reports = []
    for n, R in grids:
        grid = build_grid(n, R, gamma, params.N, params.s1, params.s2)
        reports.append(solve(params, grid, cfg))
    return reports
