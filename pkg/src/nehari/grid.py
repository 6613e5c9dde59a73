"""Graded radial mesh with singular-weight quadrature and discrete H1 operators.

All integrals are radial:  int_0^R f(r) r^{N-1-s} dr  with the unit-sphere
surface factor omitted throughout (it multiplies every term of the energy by
the same constant, so critical points and identity residuals are unchanged).

Fields are piecewise linear on nodes r_i = R (i/n)^gamma.  Per cell the
monomial moments  int r^k r^{N-1-s} dr, k = 0, 1, 2  are computed in closed
form, which integrates any quadratic exactly against each weight; nonlinear
integrands |f|^rho are replaced by the quadratic through their values at the
3-point Gauss nodes of the cell.  The r^{-s} singularity at the origin needs
no special casing since N - 1 - s > 0.
"""

from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .errors import AssemblyFailure, GridMismatch, InvalidParameter

# 3-point Gauss-Legendre nodes on [0, 1].
_XI = np.array([0.5 * (1.0 - np.sqrt(0.6)), 0.5, 0.5 * (1.0 + np.sqrt(0.6))])
# Vandermonde in the local coordinate: row k is xi^k at the three nodes.
_VANDER = np.vander(_XI, 3, increasing=True).T


def _power_diff(a, b, c):
    """b^c - a^c elementwise, computed without cancellation for b close to a."""
    out = np.where(a > 0.0, 1.0, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        safe_a = np.where(a > 0.0, a, 1.0)
        out = np.where(
            a > 0.0,
            safe_a**c * np.expm1(c * np.log1p((b - safe_a) / safe_a)),
            b**c,
        )
    return out


def _cell_moments(a, b, alpha):
    """Local moments mu_k = int_a^b ((r-a)/h)^k r^alpha dr for k = 0, 1, 2."""
    h = b - a
    m0 = _power_diff(a, b, alpha + 1.0) / (alpha + 1.0)
    m1 = _power_diff(a, b, alpha + 2.0) / (alpha + 2.0)
    m2 = _power_diff(a, b, alpha + 3.0) / (alpha + 3.0)
    mu0 = m0
    mu1 = (m1 - a * m0) / h
    mu2 = (m2 - 2.0 * a * m1 + a**2 * m0) / h**2
    return np.stack([mu0, mu1, mu2], axis=1)


@dataclass(frozen=True)
class WeightTable:
    """Per-cell quadrature data for one weight r^{N-1-s}."""

    s: float
    mu: np.ndarray  # (n_cells, 3) local moments
    gauss_w: np.ndarray  # (n_cells, 3) effective Gauss weights


@dataclass(frozen=True)
class RadialGrid:
    n: int
    R: float
    gamma: float
    N: int
    s1: float
    s2: float
    nodes: np.ndarray
    tables: dict  # weight key "0" | "s1" | "s2" -> WeightTable
    # Tridiagonal H1 operator (stiffness + mass) and its interior Cholesky factor.
    h1_diag: np.ndarray = dataclass_field(repr=False, default=None)
    h1_off: np.ndarray = dataclass_field(repr=False, default=None)
    mass_e: np.ndarray = dataclass_field(repr=False, default=None)
    stiff_c: np.ndarray = dataclass_field(repr=False, default=None)
    cho: np.ndarray = dataclass_field(repr=False, default=None)

    @property
    def cell_width(self):
        return np.diff(self.nodes)

    def weight_key(self, s_choice):
        if s_choice == 0:
            return "0"
        if s_choice == self.s1:
            return "s1"
        if s_choice == self.s2:
            return "s2"
        raise InvalidParameter(f"no quadrature table for weight exponent {s_choice}")

    def same_layout(self, other):
        return (
            self.n == other.n
            and self.R == other.R
            and self.gamma == other.gamma
            and self.N == other.N
            and self.s1 == other.s1
            and self.s2 == other.s2
        )


@dataclass
class RadialField:
    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).copy()
        if v.shape != (self.grid.n + 1,):
            raise InvalidParameter(
                f"field needs {self.grid.n + 1} nodal values, got shape {v.shape}"
            )
        v[-1] = 0.0
        self.values = v

    def copy(self):
        return RadialField(self.grid, self.values)


def build_grid(n, R, gamma, N, s1, s2):
    """Graded mesh r_i = R (i/n)^gamma with moment tables for s in {0, s1, s2}."""
    if n < 16:
        raise InvalidParameter(f"need n >= 16, got {n}")
    if R <= 0.0:
        raise InvalidParameter(f"need R > 0, got {R}")
    if gamma < 1.0:
        raise InvalidParameter(f"need gamma >= 1, got {gamma}")
    if N < 3:
        raise InvalidParameter(f"need N >= 3, got {N}")
    if not (0.0 <= s1 < s2 < 2.0):
        raise InvalidParameter(f"need 0 <= s1 < s2 < 2, got s1={s1}, s2={s2}")

    nodes = R * (np.arange(n + 1) / n) ** float(gamma)
    nodes[0] = 0.0
    nodes[-1] = R
    a, b = nodes[:-1], nodes[1:]

    tables = {}
    for key, s in (("0", 0.0), ("s1", float(s1)), ("s2", float(s2))):
        mu = _cell_moments(a, b, N - 1.0 - s)
        if not np.all(np.isfinite(mu)) or np.any(mu[:, 0] <= 0.0):
            raise InvalidParameter(f"degenerate moment table for s = {s}")
        gauss_w = np.linalg.solve(_VANDER, mu.T).T
        tables[key] = WeightTable(s=s, mu=mu, gauss_w=gauss_w)

    # Lumped pieces of the tridiagonal H1 operator (weight r^{N-1}):
    # per-cell mass entries for the hat-function products and the cell
    # stiffness constant m0 / h^2.
    mu = tables["0"].mu
    e00 = mu[:, 0] - 2.0 * mu[:, 1] + mu[:, 2]
    e01 = mu[:, 1] - mu[:, 2]
    e11 = mu[:, 2]
    mass_e = np.stack([e00, e01, e11], axis=1)
    h = b - a
    stiff_c = mu[:, 0] / h**2

    diag = np.zeros(n + 1)
    off = np.zeros(n)
    diag[:-1] += stiff_c + e00
    diag[1:] += stiff_c + e11
    off[:] = -stiff_c + e01

    # Interior system (Dirichlet at r = R, natural at the origin), factored once.
    ab = np.zeros((2, n))
    ab[1, :] = diag[:-1]
    ab[0, 1:] = off[:-1]
    try:
        cho = cholesky_banded(ab, lower=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - degenerate grids
        raise AssemblyFailure(f"H1 operator not positive definite: {exc}") from exc

    return RadialGrid(
        n=n,
        R=float(R),
        gamma=float(gamma),
        N=int(N),
        s1=float(s1),
        s2=float(s2),
        nodes=nodes,
        tables=tables,
        h1_diag=diag,
        h1_off=off,
        mass_e=mass_e,
        stiff_c=stiff_c,
        cho=cho,
    )


def _check_same_grid(f, g):
    if f.grid is not g.grid and not f.grid.same_layout(g.grid):
        raise GridMismatch("fields live on different grids")


def gauss_values(f):
    """Values of the linear interpolant at the per-cell Gauss nodes, (n, 3)."""
    v = f.values
    return np.outer(v[:-1], 1.0 - _XI) + np.outer(v[1:], _XI)


def weighted_integral(f, power, s_choice):
    """int_0^R |f|^power r^{N-1-s} dr for s_choice in {0, s1, s2}."""
    if power < 1:
        raise InvalidParameter(f"need power >= 1, got {power}")
    table = f.grid.tables[f.grid.weight_key(s_choice)]
    integrand = np.abs(gauss_values(f)) ** power
    return float(np.sum(table.gauss_w * integrand))


def h1_inner(f, g):
    """int f'g' r^{N-1} dr + int fg r^{N-1} dr, exact for the interpolants."""
    _check_same_grid(f, g)
    grid = f.grid
    fv, gv = f.values, g.values
    df = np.diff(fv)
    dg = np.diff(gv)
    grad = np.sum(grid.stiff_c * df * dg)
    e = grid.mass_e
    mass = np.sum(
        fv[:-1] * gv[:-1] * e[:, 0]
        + (fv[:-1] * gv[1:] + fv[1:] * gv[:-1]) * e[:, 1]
        + fv[1:] * gv[1:] * e[:, 2]
    )
    return float(grad + mass)


def h1_norm(f):
    return float(np.sqrt(max(h1_inner(f, f), 0.0)))


def apply_h1(f):
    """Nodal load vector of the H1 operator applied to f (length n+1)."""
    v = f.values
    grid = f.grid
    out = grid.h1_diag * v
    out[:-1] += grid.h1_off * v[1:]
    out[1:] += grid.h1_off * v[:-1]
    return out


def apply_mass(f):
    """Nodal load vector of the r^{N-1} mass operator applied to f."""
    v = f.values
    e = f.grid.mass_e
    out = np.zeros_like(v)
    out[:-1] += e[:, 0] * v[:-1] + e[:, 1] * v[1:]
    out[1:] += e[:, 1] * v[:-1] + e[:, 2] * v[1:]
    return out


def riesz_from_load(grid, load):
    """Solve h1_inner(v, w) = load . w for all interior test fields w."""
    load = np.asarray(load, dtype=float)
    if load.shape != (grid.n + 1,):
        raise InvalidParameter(f"load needs {grid.n + 1} entries")
    if not np.all(np.isfinite(load)):
        raise AssemblyFailure("non-finite load vector")
    sol = np.zeros(grid.n + 1)
    sol[:-1] = cho_solve_banded((grid.cho, False), load[:-1])
    return RadialField(grid, sol)


def riesz_solve(rhs):
    """Riesz representative of the L2 pairing w -> int rhs w r^{N-1} dr."""
    return riesz_from_load(rhs.grid, apply_mass(rhs))


def dilate_field(f, rho):
    """The field r -> f(r / rho) on the same grid; samples beyond R map to 0."""
    if rho <= 0.0:
        raise InvalidParameter(f"dilation factor must be positive, got {rho}")
    grid = f.grid
    vals = np.interp(grid.nodes / rho, grid.nodes, f.values, right=0.0)
    return RadialField(grid, vals)


def field_from_function(grid, fn):
    return RadialField(grid, np.asarray([fn(r) for r in grid.nodes], dtype=float))


def gaussian_field(grid, width, amplitude=1.0):
    return RadialField(grid, amplitude * np.exp(-grid.nodes**2 / (2.0 * width**2)))
