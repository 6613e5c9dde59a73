"""Nehari and Pohozaev identities, residuals, and the nonexistence certificate.

Both identities are scalar relations between the four coefficients of a
field; any exact solution must satisfy both.  In the critical regime the
Pohozaev combination minus (N-2)/2 times the Nehari combination eliminates
both the Dirichlet and the C term and leaves

    certificate = Mms + ((N-s1)/p - (N-2)/2) * lam * B,

a sum of nonnegative terms that must vanish for a solution; that is the
nonexistence mechanism, turned here into a checkable inequality.
"""

from dataclasses import dataclass

import numpy as np

from . import fiber, functional
from .errors import NoNegativeFiber, RegimeMismatch, RootBracketFailure
from .params import CRITICAL, classify

A_FLOOR = 1e-300

VANISHED = "Vanished"
NON_CONVERGED = "NonConverged"
# Iterate-norm fraction of the initial norm below which the descent is
# classified as having driven the candidate to zero.
VANISH_FRACTION = 1e-3


@dataclass(frozen=True)
class IdentityReport:
    nehari: float
    pohozaev: float
    certificate: float
    certificate_coeff: float

    def to_dict(self):
        return {
            "nehari": self.nehari,
            "pohozaev": self.pohozaev,
            "certificate": self.certificate,
            "certificate_coeff": self.certificate_coeff,
        }


def nehari_defect(c, params):
    return c.A + params.lam * c.B - c.C


def pohozaev_defect(c, params):
    N = params.N
    return (
        0.5 * (N - 2.0) * c.D
        + 0.5 * N * c.Mms
        + params.lam * (N - params.s1) / params.p * c.B
        - (N - params.s2) / params.q * c.C
    )


def nehari_residual(c, params):
    return abs(nehari_defect(c, params)) / max(c.A, A_FLOOR)


def pohozaev_residual(c, params):
    return abs(pohozaev_defect(c, params)) / max(c.A, A_FLOOR)


def certificate_coeff(params):
    return (params.N - params.s1) / params.p - (params.N - 2.0) / 2.0


def nonexistence_certificate(c, params):
    """Mms + ((N-s1)/p - (N-2)/2) lam B; equals
    pohozaev_defect - (N-2)/2 * nehari_defect in the critical regime."""
    if classify(params).tag != CRITICAL:
        raise RegimeMismatch("the nonexistence certificate needs q = 2*(s2)")
    return c.Mms + certificate_coeff(params) * params.lam * c.B


def elimination_coefficients(params):
    """(k1, k2) with  certificate = k2 * pohozaev_defect - k1 * nehari_defect
    exactly, hence Mms <= k1 |nehari| + k2 |pohozaev| for solutions."""
    return 0.5 * (params.N - 2.0), 1.0


def identity_report(c, params):
    regime = classify(params)
    cert = (
        nonexistence_certificate(c, params) if regime.tag == CRITICAL else None
    )
    return IdentityReport(
        nehari=nehari_residual(c, params),
        pohozaev=pohozaev_residual(c, params),
        certificate=cert,
        certificate_coeff=certificate_coeff(params),
    )


def _critical_start(params, grid, cfg):
    """Amplitude/width scan for a field with phi < 0 in the critical regime,
    projected onto the t0 fiber root (the M0 construction needs the gap
    condition and is unavailable here)."""
    from .grid import RadialField, gaussian_field

    for width in (cfg.seed_width, 0.5, 1.5, 2.5, 0.3, 3.0):
        seed = gaussian_field(grid, width)
        c = functional.extract_coeffs(seed, params)
        if c.is_zero():
            continue
        for t in np.geomspace(1e-3, 1e3, 121):
            scaled = fiber.scale_amplitude(c, float(t), params)
            if fiber.phi(scaled, params) < 0.0:
                try:
                    roots = fiber.fiber_roots(scaled, params)
                except (NoNegativeFiber, RootBracketFailure):
                    continue
                return RadialField(grid, float(t) * roots.t0 * seed.values)
    return None


def nonexistence_diagnostic(params, grid, cfg):
    """Run the constrained descent in the critical regime and classify it.

    The theorem rules out solutions, so the descent either drives the
    iterate toward zero (Vanished) or fails to settle (NonConverged); the
    certificate value is recorded along the trace and stays >= Mms at every
    nonzero iterate by construction.
    """
    from . import solver
    from .grid import h1_norm

    if classify(params).tag != CRITICAL:
        raise RegimeMismatch("the nonexistence diagnostic needs the critical regime")

    start = _critical_start(params, grid, cfg)
    if start is None:
        return {"classification": NON_CONVERGED, "trace": []}

    u = start.copy()
    ev = functional.evaluate(u, params)
    norm0 = max(np.sqrt(ev.coeffs.A), A_FLOOR)
    trace = []
    classification = NON_CONVERGED
    step = cfg.step0

    for it in range(cfg.max_iter):
        try:
            pr = functional.projected_residual(u, params)
        except Exception:
            break
        cert = nonexistence_certificate(ev.coeffs, params)
        trace.append((it, ev.I, ev.phi, ev.psi, pr["residual"], np.sqrt(ev.coeffs.A), cert))
        if np.sqrt(ev.coeffs.A) < VANISH_FRACTION * norm0:
            classification = VANISHED
            break
        d = pr["proj"].values
        tau = step
        accepted = None
        for _ in range(solver.MAX_HALVINGS + 1):
            trial = type(u)(u.grid, u.values - tau * d)
            projected, _ = solver._project_to_branch(trial, params)
            if projected is not None:
                ev_new = functional.evaluate(projected, params)
                if ev_new.I <= ev.I - cfg.armijo_c * tau * pr["residual"] ** 2:
                    accepted = (projected, ev_new)
                    break
            tau *= 0.5
        if accepted is None:
            break
        u, ev = accepted
        step = min(2.0 * tau, 64.0 * cfg.step0) if tau == step else tau

    return {"classification": classification, "trace": trace}
