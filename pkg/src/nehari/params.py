"""Problem parameters, critical exponents and regime classification.

The problem is  -Δu + u = -λ|x|^{-s1}|u|^{p-2}u + |x|^{-s2}|u|^{q-2}u  on R^N.
Two parameter regimes are supported:

* Existence: 2 < q < p < 2*(s1) and q < 2*(s2).  A positive ground state on
  the M+ branch of the Nehari manifold exists when the exponent gap
  condition (`condition21`) holds.
* Critical: q = 2*(s2) and q < p <= 2*(s1).  No nontrivial solution exists;
  the identities module provides the corresponding certificate.
"""

from dataclasses import dataclass

from .errors import InvalidParameter, RegimeMismatch, UnsupportedRegime

# Tolerance used only for the equality test q = 2*(s2); every other regime
# boundary is a strict floating-point comparison.
CRITICAL_EQ_TOL = 1e-12

EXISTENCE = "Existence"
CRITICAL = "Critical"


def critical_exponent(N: int, s: float) -> float:
    """Hardy-Sobolev critical exponent 2*(s) = 2(N - s)/(N - 2)."""
    if N < 3:
        raise InvalidParameter(f"need N >= 3, got N={N}")
    if not 0.0 <= s <= 2.0:
        raise InvalidParameter(f"need 0 <= s <= 2, got s={s}")
    return 2.0 * (N - s) / (N - 2.0)


@dataclass(frozen=True)
class Params:
    """Problem tuple (N, lambda, s1, s2, p, q)."""

    N: int
    lam: float
    s1: float
    s2: float
    p: float
    q: float

    def __post_init__(self):
        if self.N < 3:
            raise InvalidParameter(f"need N >= 3, got N={self.N}")
        if not (0.0 <= self.s1 < self.s2 < 2.0):
            raise InvalidParameter(
                f"need 0 <= s1 < s2 < 2, got s1={self.s1}, s2={self.s2}"
            )
        if not (2.0 < self.q < self.p):
            raise InvalidParameter(f"need 2 < q < p, got p={self.p}, q={self.q}")
        if self.lam <= 0.0:
            raise InvalidParameter(f"need lambda > 0, got {self.lam}")

    @property
    def crit_s1(self) -> float:
        return critical_exponent(self.N, self.s1)

    @property
    def crit_s2(self) -> float:
        return critical_exponent(self.N, self.s2)


@dataclass(frozen=True)
class Regime:
    """Classification outcome; cond21 is meaningful only for Existence."""

    tag: str
    cond21: bool


def is_critical(params: Params) -> bool:
    return abs(params.q - params.crit_s2) <= CRITICAL_EQ_TOL


def condition21(params: Params) -> bool:
    """Exponent gap condition q > ((2-s2)p + 2(s2-s1))/(2-s1), strict."""
    if is_critical(params):
        raise RegimeMismatch("condition21 is only defined in the Existence regime")
    rhs = ((2.0 - params.s2) * params.p + 2.0 * (params.s2 - params.s1)) / (
        2.0 - params.s1
    )
    return params.q > rhs


def classify(params: Params) -> Regime:
    """Dispatch between the existence and nonexistence hypotheses."""
    if is_critical(params):
        if params.p <= params.crit_s1:
            return Regime(tag=CRITICAL, cond21=False)
        raise UnsupportedRegime(
            f"critical q = 2*(s2) but p={params.p} > 2*(s1)={params.crit_s1}"
        )
    if params.q > params.crit_s2:
        raise UnsupportedRegime(
            f"q={params.q} > 2*(s2)={params.crit_s2} is supercritical"
        )
    if params.p >= params.crit_s1:
        raise UnsupportedRegime(
            f"existence regime needs p < 2*(s1)={params.crit_s1}, got p={params.p}"
        )
    return Regime(tag=EXISTENCE, cond21=condition21(params))
