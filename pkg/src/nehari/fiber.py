"""Exact fibering algebra on the coefficient 4-tuple (D, Mms, B, C).

Every trial function enters the variational structure only through four
integrals: the Dirichlet energy D, the mass Mms, and the two weighted
nonlinear integrals B (exponent p, weight |x|^{-s1}) and C (exponent q,
weight |x|^{-s2}).  Amplitude scaling t*u and dilation u(x/r) act on the
tuple by explicit powers of t and r, so the whole Nehari fiber structure
(constraint phi, second variation psi, fiber roots, the M0 construction)
can be computed exactly here, independent of any discretization.
"""

from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import (
    InvalidCoefficients,
    InvalidParameter,
    NoNegativeFiber,
    NotOnM,
    NotOnM0,
    RegimeMismatch,
    RootBracketFailure,
)
from .params import EXISTENCE, Params, classify

# Relative tolerances (all scaled by A = D + Mms).
ON_M_TOL = 1e-10
MIN_EXPONENT_GAP = 1e-6
# Guards division by A for the zero tuple.
A_FLOOR = 1e-300


@dataclass(frozen=True)
class FiberCoeffs:
    """Coefficient tuple; A = D + Mms is the squared H1 norm."""

    D: float
    Mms: float
    B: float
    C: float

    def __post_init__(self):
        if min(self.D, self.Mms, self.B, self.C) < 0.0:
            raise InvalidCoefficients(f"negative coefficient in {self}")

    @property
    def A(self) -> float:
        return self.D + self.Mms

    def is_zero(self) -> bool:
        return self.A == 0.0 and self.B == 0.0 and self.C == 0.0


@dataclass(frozen=True)
class FiberRoots:
    """The two roots of the fiber map g bracketing t = 1."""

    t0: float
    t1: float


@dataclass(frozen=True)
class M0Point:
    """Amplitude/dilation factors landing t0 * u_{r0} on M0."""

    t0: float
    r0: float
    coeffs: FiberCoeffs


def _check_gap(params: Params):
    if params.p - params.q < MIN_EXPONENT_GAP:
        raise InvalidParameter(
            f"p - q = {params.p - params.q} too small; fiber exponents degenerate"
        )


def phi(c: FiberCoeffs, params: Params) -> float:
    """Nehari constraint <I'(u), u> = A + lam*B - C."""
    return c.A + params.lam * c.B - c.C


def psi(c: FiberCoeffs, params: Params) -> float:
    """Fiber second variation <I''(u)u, u> = A + (p-1)lam*B - (q-1)C."""
    return c.A + (params.p - 1.0) * params.lam * c.B - (params.q - 1.0) * c.C


def energy(c: FiberCoeffs, params: Params) -> float:
    """Energy I(u) = A/2 + lam*B/p - C/q."""
    return 0.5 * c.A + params.lam * c.B / params.p - c.C / params.q


def fiber_map(c: FiberCoeffs, params: Params, t: float) -> float:
    """g(t) = t^{-2} phi(t*u) = A + lam*t^{p-2}*B - t^{q-2}*C for t > 0."""
    if t <= 0.0:
        raise InvalidParameter(f"fiber parameter must be positive, got t={t}")
    return (
        c.A
        + params.lam * t ** (params.p - 2.0) * c.B
        - t ** (params.q - 2.0) * c.C
    )


def scale_amplitude(c: FiberCoeffs, t: float, params: Params) -> FiberCoeffs:
    """Coefficients of t*u: (t^2 D, t^2 Mms, t^p B, t^q C)."""
    if t <= 0.0:
        raise InvalidParameter(f"amplitude factor must be positive, got t={t}")
    return FiberCoeffs(
        D=t**2 * c.D,
        Mms=t**2 * c.Mms,
        B=t**params.p * c.B,
        C=t**params.q * c.C,
    )


def dilate(c: FiberCoeffs, r: float, params: Params) -> FiberCoeffs:
    """Coefficients of u_r(x) = u(x/r):
    (r^{N-2} D, r^N Mms, r^{N-s1} B, r^{N-s2} C)."""
    if r <= 0.0:
        raise InvalidParameter(f"dilation factor must be positive, got r={r}")
    N = params.N
    return FiberCoeffs(
        D=r ** (N - 2.0) * c.D,
        Mms=r**N * c.Mms,
        B=r ** (N - params.s1) * c.B,
        C=r ** (N - params.s2) * c.C,
    )


def h_compare(x: float, params: Params) -> float:
    """h(x) = (p-2)(x^{q-2} - 1) - (q-2)(x^{p-2} - 1); negative for x > 1."""
    if x <= 0.0:
        raise InvalidParameter(f"need x > 0, got x={x}")
    p, q = params.p, params.q
    return (p - 2.0) * (x ** (q - 2.0) - 1.0) - (q - 2.0) * (x ** (p - 2.0) - 1.0)


def fiber_roots(c: FiberCoeffs, params: Params) -> FiberRoots:
    """The roots t0 in (0,1) and t1 in (1,inf) of g, given g(1) = phi < 0.

    g decreases from A at t=0+ to a negative minimum and then grows like
    t^{p-2}; each root is isolated by geometric bracket expansion from t=1
    and refined by a bracketing solver.
    """
    _check_gap(params)
    if phi(c, params) >= 0.0:
        raise NoNegativeFiber(f"phi = {phi(c, params)} >= 0; fiber never negative")

    def g(t):
        return fiber_map(c, params, t)

    lo = 1.0
    for _ in range(80):
        lo *= 0.5
        if g(lo) > 0.0:
            break
    else:
        raise RootBracketFailure("no positive fiber value found below t = 1")
    hi = 1.0
    for _ in range(80):
        hi *= 2.0
        if g(hi) > 0.0:
            break
    else:
        raise RootBracketFailure("no positive fiber value found above t = 1")

    t0 = brentq(g, lo, 1.0, xtol=1e-300, rtol=8.9e-16, maxiter=200)
    t1 = brentq(g, 1.0, hi, xtol=1e-300, rtol=8.9e-16, maxiter=200)
    return FiberRoots(t0=t0, t1=t1)


def construct_M0(c: FiberCoeffs, params: Params) -> M0Point:
    """Amplitude/dilation pair (t0, r0) with t0 * u_{r0} on M0 (phi = psi = 0).

    Requires the Existence regime with the exponent gap condition, which
    makes the dilation profile
        g(r) = D + r^2 Mms - ((p-q)/(p-2)) C K^{(q-2)/(p-q)} r^e,
        K = (q-2)C / (lam (p-2) B),   e = 2 - s2 - (q-2)(s2-s1)/(p-q) < 0,
    strictly increasing from -inf to +inf, so r0 is its unique root and
        t0 = K^{1/(p-q)} r0^{-(s2-s1)/(p-q)}.
    """
    _check_gap(params)
    if c.is_zero() or c.B == 0.0 or c.C == 0.0:
        raise InvalidCoefficients("construct_M0 needs a nonzero coefficient tuple")
    regime = classify(params)
    if regime.tag != EXISTENCE or not regime.cond21:
        raise RegimeMismatch("construct_M0 needs the Existence regime with cond21")

    p, q, s1, s2, lam = params.p, params.q, params.s1, params.s2, params.lam
    K = (q - 2.0) * c.C / (lam * (p - 2.0) * c.B)
    e = 2.0 - s2 - (q - 2.0) * (s2 - s1) / (p - q)
    coef = (p - q) / (p - 2.0) * c.C * K ** ((q - 2.0) / (p - q))

    def g(r):
        return c.D + r**2 * c.Mms - coef * r**e

    lo = hi = 1.0
    for _ in range(2000):
        if g(lo) < 0.0:
            break
        lo *= 0.5
    else:
        raise RootBracketFailure("no negative dilation profile value found")
    for _ in range(2000):
        if g(hi) > 0.0:
            break
        hi *= 2.0
    else:
        raise RootBracketFailure("no positive dilation profile value found")

    r0 = brentq(g, lo, hi, xtol=1e-300, rtol=8.9e-16, maxiter=500)
    t0 = K ** (1.0 / (p - q)) * r0 ** (-(s2 - s1) / (p - q))
    out = scale_amplitude(dilate(c, r0, params), t0, params)
    return M0Point(t0=t0, r0=r0, coeffs=out)


def m0_perturbation_sign(m0: M0Point, params: Params) -> float:
    """Derivative at r = 1 of the dilation fiber through an M0 point:
    2*Mms + (2-s1)*lam*B - (2-s2)*C.  Positive under the gap condition,
    so shrinking the dilation slightly makes phi negative."""
    c = m0.coeffs
    scale = max(c.A, A_FLOOR)
    if abs(phi(c, params)) > ON_M_TOL * scale or abs(psi(c, params)) > ON_M_TOL * scale:
        raise NotOnM0(
            f"residuals phi={phi(c, params)}, psi={psi(c, params)} exceed "
            f"{ON_M_TOL} * A"
        )
    return (
        2.0 * c.Mms
        + (2.0 - params.s1) * params.lam * c.B
        - (2.0 - params.s2) * c.C
    )


def psi_prime_pairing(c: FiberCoeffs, params: Params) -> float:
    """<psi'(u), u> = 2A + p(p-1)*lam*B - q(q-1)*C.
    On M0 this collapses to (p-2)(q-2)*A."""
    p, q = params.p, params.q
    return 2.0 * c.A + p * (p - 1.0) * params.lam * c.B - q * (q - 1.0) * c.C


def on_manifold_identities(c: FiberCoeffs, params: Params) -> dict:
    """Predicted weighted integrals on the manifold phi = 0:
    lam*B = ((q-2)A + psi)/(p-q) and C = ((p-2)A + psi)/(p-q)."""
    scale = max(c.A, A_FLOOR)
    if c.is_zero() or abs(phi(c, params)) > ON_M_TOL * scale:
        raise NotOnM(f"phi residual {phi(c, params)} exceeds {ON_M_TOL} * A")
    p, q = params.p, params.q
    ps = psi(c, params)
    return {
        "lambdaB_pred": ((q - 2.0) * c.A + ps) / (p - q),
        "C_pred": ((p - 2.0) * c.A + ps) / (p - q),
    }
