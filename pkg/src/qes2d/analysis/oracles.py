"""Finite-difference oracles and equation residuals.

1D operators (Dirichlet walls, second order, Richardson over h and h/2):
  parabolic real axis       -Z'' + [w^2 x^6 + k1 x^4 - 2E x^2 + (k2^2 - 1/4)/x^2] Z = lambda Z
  parabolic imaginary axis  same with k1 -> -k1, eigenvalue -lambda
  elliptic angular (mu)     -Z'' + [(D^2 E/4) cos2mu - (D^4 w^2/64) cos^2 2mu + C1/cos^2 mu + C2/sin^2 mu] Z = -lambda Z
  elliptic radial (nu)      -Z'' + [-(D^2 E/4) cosh2nu + (D^4 w^2/64) cosh^2 2nu - C1/cosh^2 nu + C2/sinh^2 nu] Z = lambda Z
with C_i = k_i^2 - 1/4. The j-th eigenvalue of the real/angular operator
belongs to q1 = j, the j-th of the imaginary/radial operator to q2 = j.

The 2D oracle diagonalizes -Delta/2 + V with the 5-point Laplacian on a vertex
grid whose singular axes sit on the excluded Dirichlet boundary, and
extrapolates over three grids.
"""
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from ..errors import AccuracyError, ConvergenceError, ParameterDomainError
from ..potentials import ModelV1, ModelV2, energy_level, potential_value
from ..qes import SexticParameters, ta_imag, ta_real, z_angular, z_radial
from ..recurrence import Basis


class Axis(str, Enum):
    REAL = "real"
    IMAGINARY = "imaginary"


@dataclass(frozen=True)
class OracleSpec:
    """Grid points per unit length (coarse grid), box bounds per axis and eigenvalue count.

    ``bounds`` of None lets the oracle choose them from the potential. The fine
    grid halves the spacing; results are Richardson extrapolated (order 2).
    """

    points_per_unit: float = 400.0
    bounds: tuple = None
    count: int = 6
    convergence_tol: float = 1e-3


def _lowest_tridiagonal(potential, lo, hi, h, count):
    x = np.arange(lo + h, hi - 0.5 * h, h)
    diag = 2.0 / (h * h) + potential(x)
    off = np.full(len(x) - 1, -1.0 / (h * h))
    return eigh_tridiagonal(diag, off, select="i", select_range=(0, count - 1), eigvals_only=True)


def richardson_1d(potential, lo, hi, spec):
    """Lowest spec.count eigenvalues of -d^2 + potential on (lo, hi) with Dirichlet walls."""
    h = 1.0 / spec.points_per_unit
    coarse = _lowest_tridiagonal(potential, lo, hi, h, spec.count)
    fine = _lowest_tridiagonal(potential, lo, hi, h / 2, spec.count)
    extrap = (4.0 * fine - coarse) / 3.0
    change = np.abs(fine - coarse)
    if np.any(change > spec.convergence_tol * 1e3 * np.maximum(1.0, np.abs(fine))):
        raise AccuracyError(f"finite-difference eigenvalues not grid-converged: change {change.max():.3g}")
    return extrap


def _wall(potential, start, level, step=0.05, limit=200.0, margin=60.0):
    """Outer radius where the potential exceeds level + margin (classically forbidden, decayed)."""
    x = start
    while potential(np.array([x]))[0] < level + margin:
        x += step
        if x > limit:
            raise AccuracyError("potential does not confine the oracle domain")
    # a few decay lengths beyond the turning point
    return x + 4.0


def parabolic_potential(model, energy, axis):
    w, k1, c = model.omega, model.k1, model.p2 ** 2 - 0.25
    k = k1 if Axis(axis) is Axis.REAL else -k1
    return lambda x: w * w * x ** 6 + k * x ** 4 - 2 * energy * x ** 2 + c / (x * x)


def elliptic_potential(model, energy, axis, d2):
    w = model.omega
    c1, c2 = model.p1 ** 2 - 0.25, model.p2 ** 2 - 0.25
    if Axis(axis) is Axis.REAL:
        return lambda mu: (d2 * energy / 4 * np.cos(2 * mu) - d2 * d2 * w * w / 64 * np.cos(2 * mu) ** 2
                           + c1 / np.cos(mu) ** 2 + c2 / np.sin(mu) ** 2)
    return lambda nu: (-d2 * energy / 4 * np.cosh(2 * nu) + d2 * d2 * w * w / 64 * np.cosh(2 * nu) ** 2
                       - c1 / np.cosh(nu) ** 2 + c2 / np.sinh(nu) ** 2)


def oracle_lambda_1d(model, basis, energy, axis, spec=OracleSpec(), d2=None):
    """Separation constants from the 1D operator on one axis, ascending in node count on that axis.

    Returned values are lambda (the operator eigenvalue, or its negative for
    the parabolic imaginary and elliptic angular axes), ordered so entry j
    has j nodes on this axis.
    """
    basis, axis = Basis(basis), Axis(axis)
    if basis is Basis.PARABOLIC:
        if not isinstance(model, ModelV1):
            raise ParameterDomainError("the parabolic oracle needs V1")
        pot = parabolic_potential(model, energy, axis)
        lo = 0.0
        hi = spec.bounds[1] if spec.bounds else _wall(pot, 1.0, abs(energy) * 10)
        vals = richardson_1d(pot, lo, hi, spec)
        return vals if axis is Axis.REAL else -vals
    if not isinstance(model, ModelV2) or d2 is None or d2 <= 0:
        raise ParameterDomainError("the elliptic oracle needs V2 and d2 > 0")
    pot = elliptic_potential(model, energy, axis, d2)
    if axis is Axis.REAL:
        return -richardson_1d(pot, 0.0, 0.5 * math.pi, spec)
    hi = spec.bounds[1] if spec.bounds else _wall(pot, 0.5, d2 * abs(energy))
    return richardson_1d(pot, 0.0, hi, spec)


def oracle_sextic(params, spec=OracleSpec()):
    """Lowest eigenvalues of the sextic operator of ``params`` on the half line x > 0."""
    if not isinstance(params, SexticParameters):
        raise ParameterDomainError("oracle_sextic takes SexticParameters")
    pot = params.potential
    hi = spec.bounds[1] if spec.bounds else _wall(pot, 1.0, abs(params.mu2_coefficient) * 10)
    return richardson_1d(pot, 0.0, hi, spec)


def _box_2d(model):
    """Default box: the Gaussian factor is below ~1e-16 at the walls (V1 centred on the shifted x)."""
    r = math.sqrt(2 * 37.0 / model.omega) if isinstance(model, ModelV2) else math.sqrt(37.0 / model.omega) + 1.5
    if isinstance(model, ModelV1):
        x0 = -model.k1 / (4 * model.omega ** 2)
        return (x0 - r, x0 + r), (0.0, 1.6 * r)
    return (0.0, r), (0.0, r)


def _fd_energies(model, bounds, h, count, sigma):
    (xa, xb), (ya, yb) = bounds
    nx = int(round((xb - xa) / h)) - 1
    ny = int(round((yb - ya) / h)) - 1
    hx, hy = (xb - xa) / (nx + 1), (yb - ya) / (ny + 1)
    x = xa + hx * np.arange(1, nx + 1)
    y = ya + hy * np.arange(1, ny + 1)
    X, Y = np.meshgrid(x, y, indexing="ij")
    v = potential_value(model, X, Y).ravel()
    lap = lambda n, d: sp.diags([np.full(n - 1, 1.0), np.full(n, -2.0), np.full(n - 1, 1.0)], [-1, 0, 1]) / (d * d)
    kin = -0.5 * (sp.kron(lap(nx, hx), sp.identity(ny)) + sp.kron(sp.identity(nx), lap(ny, hy)))
    ham = (kin + sp.diags(v)).tocsc()
    try:
        vals = eigsh(ham, k=count, sigma=sigma, which="LM", return_eigenvectors=False, tol=1e-12)
    except ArpackNoConvergence as exc:
        raise ConvergenceError(f"2D eigensolve did not converge: {exc}") from exc
    return np.sort(vals)


def _singular_order(model):
    """Order of the grid error from the x^(1/2+p) edge behavior; 4 stands for the next smooth term."""
    p = min([model.p2] + ([model.p1] if isinstance(model, ModelV2) else []))
    return 2 * p if p < 1 else 4.0


def oracle_energy_2d(model, spec=None, count=6, h=0.2):
    """Lowest ``count`` energies of V1 (half-plane) or V2 (quadrant).

    Grids h, h/2 and h/4 are combined to remove the h^2 error and the edge
    term of order h^(2p) (or h^4 when p >= 1).
    """
    bounds = spec.bounds if spec is not None and spec.bounds else _box_2d(model)
    steps = [h, h / 2, h / 4]
    vals = np.array([_fd_energies(model, bounds, s, count, 0.0) for s in steps])
    order = _singular_order(model)
    design = np.array([[1.0, s * s, s ** order] for s in steps])
    return np.linalg.solve(design, vals)[0]


def _d2(f, x, h):
    """Fourth-order central second difference."""
    return (-f(x + 2 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2 * h)) / (12.0 * h * h)


def _relative(res, terms):
    scale = max(float(np.max(np.abs(t))) for t in terms)
    return float(np.max(np.abs(res)) / scale)


def factor_residual(sol, model, axis, points, h=1e-3):
    """Relative residual of the gauge-dressed factor in its 1D equation at ``points``.

    The scale is the largest individual term of the equation over the points.
    """
    axis = Axis(axis)
    x = np.asarray(points, dtype=float)
    energy = energy_level(model, sol.n)
    real = axis is Axis.REAL
    if sol.d2 is None:
        fn = (lambda t: ta_real(sol, model, t)) if real else (lambda t: ta_imag(sol, model, t))
        pot = parabolic_potential(model, energy, axis)
        sign = 1.0 if real else -1.0
    else:
        fn = (lambda t: z_angular(sol, model, t)) if real else (lambda t: z_radial(sol, model, t))
        pot = elliptic_potential(model, energy, axis, sol.d2)
        sign = -1.0 if real else 1.0
    f, fpp = fn(x), _d2(fn, x, h)
    res = -fpp + pot(x) * f - sign * sol.lam * f
    return _relative(res, [fpp, pot(x) * f, sol.lam * f])


def schrodinger_residual(state, x, y, h=1e-3):
    """Relative residual of (Delta + 2E - 2V) Psi at Cartesian points, scaled by the largest term."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    f = state.at_cartesian
    psi = f(x, y)
    lap = _d2(lambda u: f(u, y), x, h) + _d2(lambda v: f(x, v), y, h)
    v = potential_value(state.model, x, y)
    res = lap + 2.0 * (state.energy - v) * psi
    return _relative(res, [lap, 2.0 * state.energy * psi, 2.0 * v * psi])
