"""Quasi-exact eigenstates of the parabolic and elliptic bases.

Parabolic states of V1 are Psi = C Ta(xi) Ta(i eta) with
    Ta(mu) = exp(-w mu^4/4 - k1 mu^2/(4w)) mu^(1/2+p) Mk(mu^2),   Mk(z) = sum A_s z^s.
Elliptic states of V2 are Psi = C Z(mu) Z(i nu) with
    Z(zeta) = exp(-(D^2 w/16) cos 2 zeta) sin^(1/2+p2) cos^(1/2+p1) U(cos^2 zeta),  U(t) = sum A_s t^s.
On the imaginary axis the constant phase i^(1/2+p) is divided out so every
stored value is real.
"""
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import DomainError, LabelingError, ParameterDomainError, RealnessError
from .potentials import (CoordinateSystem, ModelV1, ModelV2, cartesian_basis_v1, cartesian_basis_v2,
                         energy_level, from_cartesian, polar_basis_v2, to_cartesian)
from .recurrence import (Basis, build_elliptic_recurrence, build_parabolic_recurrence, coefficient_vector,
                         refined_lambda, separation_eigenvalues)

ZERO_REAL_TOL = 1e-8
ZERO_SIGN_TOL = 1e-12


@dataclass(frozen=True)
class QesSolution:
    """One quasi-exact eigenstate: separation constant, coefficients, zeros and node split.

    ``q`` indexes the state in ascending-lambda order. Parabolic zeros live in
    z = mu^2; elliptic zeros live in t = cos^2 zeta.
    """

    basis: Basis
    n: int
    q: int
    lam: float
    coeffs: np.ndarray
    zeros: np.ndarray
    node_split: tuple
    d2: float = None

    def poly(self, z):
        return np.polyval(self.coeffs[::-1], z)


def polynomial_zeros(coeffs):
    """Real zeros of sum A_s z^s via balanced companion-matrix eigenvalues."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=float)[::-1], "f")
    if len(c) <= 1:
        return np.zeros(0)
    roots = np.roots(c)
    bad = np.abs(roots.imag) > ZERO_REAL_TOL * np.maximum(1.0, np.abs(roots))
    if np.any(bad):
        raise RealnessError(f"polynomial has complex zeros {roots[bad]}")
    return np.sort(roots.real)


def _parabolic_split(zeros, n):
    scale = max(1.0, float(np.max(np.abs(zeros)))) if len(zeros) else 1.0
    pos = int(np.sum(zeros > ZERO_SIGN_TOL * scale))
    neg = int(np.sum(zeros < -ZERO_SIGN_TOL * scale))
    if pos + neg != n:
        raise LabelingError(f"zeros {zeros} cannot be split into {n} signed nodes")
    return pos, neg


def _elliptic_split(zeros, n):
    # zeros in (0,1) are angular nodes; t > 1 (and zeros lost to a degree drop at D^2 = 0) are radial
    if np.any(zeros <= 0):
        raise LabelingError(f"elliptic polynomial has zeros outside t > 0: {zeros}")
    q1 = int(np.sum(zeros < 1.0))
    return q1, n - q1


def solve_parabolic(model, n):
    """All n+1 parabolic eigenstates of level n, ascending in lambda."""
    if not isinstance(model, ModelV1):
        raise ParameterDomainError("parabolic states belong to V1")
    rec = build_parabolic_recurrence(model, n)
    out = []
    for q, lam in enumerate(separation_eigenvalues(rec).lambdas):
        lam = refined_lambda(rec, lam)
        coeffs = coefficient_vector(rec, lam, refine=False)
        zeros = polynomial_zeros(coeffs)
        out.append(QesSolution(Basis.PARABOLIC, n, q, float(lam), coeffs, zeros, _parabolic_split(zeros, n)))
    return out


def solve_elliptic(model, n, d2):
    """All n+1 elliptic eigenstates of level n at squared interfocal distance d2 >= 0."""
    if not isinstance(model, ModelV2):
        raise ParameterDomainError("elliptic states belong to V2")
    if d2 < 0:
        raise ParameterDomainError("labelled elliptic states need d2 >= 0")
    rec = build_elliptic_recurrence(model, n, d2)
    out = []
    for q, lam in enumerate(separation_eigenvalues(rec).lambdas):
        lam = refined_lambda(rec, lam)
        coeffs = coefficient_vector(rec, lam, refine=False)
        zeros = polynomial_zeros(coeffs)
        out.append(QesSolution(Basis.ELLIPTIC, n, q, float(lam), coeffs, zeros,
                               _elliptic_split(zeros, n), d2=float(d2)))
    return out


def ordering_consistent(solutions):
    """Ascending lambda must mean ascending q1 (parabolic) or descending q1 (elliptic)."""
    q1 = [s.node_split[0] for s in solutions]
    if solutions and solutions[0].basis is Basis.ELLIPTIC:
        q1 = q1[::-1]
    return q1 == list(range(len(solutions)))


def find_solution(solutions, q1, q2):
    for s in solutions:
        if s.node_split == (q1, q2):
            return s
    raise LabelingError(f"no eigenstate with node split ({q1}, {q2}); available "
                        f"{[s.node_split for s in solutions]}")


def ta_real(sol, model, xi):
    """Ta(xi) on the real axis, extended evenly in |xi|."""
    w, k1, p = model.omega, model.k1, model.p2
    a = np.abs(np.asarray(xi, dtype=float))
    z = a * a
    return np.exp(-0.25 * w * z * z - k1 * z / (4 * w) + (0.5 + p) * np.log(a)) * sol.poly(z)


def ta_imag(sol, model, eta):
    """Ta(i eta) / i^(1/2+p) for eta > 0."""
    w, k1, p = model.omega, model.k1, model.p2
    e = np.asarray(eta, dtype=float)
    z = e * e
    return np.exp(-0.25 * w * z * z + k1 * z / (4 * w) + (0.5 + p) * np.log(e)) * sol.poly(-z)


def z_angular(sol, model, mu):
    """Z(mu) on the real axis (quadrant convention: |sin|, |cos|)."""
    w, p1, p2 = model.omega, model.p1, model.p2
    mu = np.asarray(mu, dtype=float)
    c, s = np.abs(np.cos(mu)), np.abs(np.sin(mu))
    log = -sol.d2 * w / 16 * np.cos(2 * mu) + (0.5 + p2) * np.log(s) + (0.5 + p1) * np.log(c)
    return np.exp(log) * sol.poly(c * c)


def z_radial(sol, model, nu):
    """Z(i nu) / i^(1/2+p2) for nu > 0."""
    w, p1, p2 = model.omega, model.p1, model.p2
    nu = np.asarray(nu, dtype=float)
    ch = np.cosh(nu)
    log = -sol.d2 * w / 16 * np.cosh(2 * nu) + (0.5 + p2) * np.log(np.sinh(nu)) + (0.5 + p1) * np.log(ch)
    return np.exp(log) * sol.poly(ch * ch)


def gauge_eval(sol, model, w):
    """Gauge-dressed polynomial at a point of the physical axes.

    Parabolic: w real (xi) or w = i eta with eta > 0. Elliptic: w = zeta real
    (angular) or w = i nu with nu > 0 (radial). Returns the real value with the
    imaginary-axis phase removed.
    """
    w = complex(w)
    radial_axis = w.real == 0 and w.imag > 0
    if w.imag != 0 and not radial_axis:
        raise DomainError(f"{w} is off the physical axes")
    if sol.basis is Basis.PARABOLIC:
        return float(ta_imag(sol, model, w.imag) if radial_axis else ta_real(sol, model, w.real))
    return float(z_radial(sol, model, w.imag) if radial_axis else z_angular(sol, model, w.real))


class Basis2D(str, Enum):
    CARTESIAN = "cartesian"
    POLAR = "polar"
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"


@dataclass(frozen=True)
class Wavefunction2D:
    """An eigenfunction in its native coordinates (u1, u2).

    Native coordinates: Cartesian (x, y), polar (r, phi), parabolic (xi, eta),
    elliptic (nu, mu). ``normalization`` multiplies the raw product; None means
    unnormalized. Normalized states have unit norm over the full plane, i.e.
    1/multiplicity over the physical half-plane or quadrant.
    """

    model: object
    basis: Basis2D
    labels: tuple
    energy: float
    raw: object = field(repr=False)
    normalization: float = None
    d: float = None
    solutions: tuple = field(default=(), repr=False)

    @property
    def system(self):
        return CoordinateSystem(self.basis.value)

    def __call__(self, u1, u2):
        c = 1.0 if self.normalization is None else self.normalization
        return c * self.raw(np.asarray(u1, dtype=float), np.asarray(u2, dtype=float))

    def at_cartesian(self, x, y):
        u1, u2 = from_cartesian(self.system, x, y, self.d)
        return self(u1, u2)

    def to_cartesian(self, u1, u2):
        return to_cartesian(self.system, u1, u2, self.d)

    def with_normalization(self, c):
        return replace(self, normalization=float(c))


def cartesian_state(model, n1, n2):
    if isinstance(model, ModelV1):
        raw = lambda x, y: cartesian_basis_v1(model, n1, n2, x, y)
    else:
        raw = lambda x, y: cartesian_basis_v2(model, n1, n2, x, y)
    return Wavefunction2D(model, Basis2D.CARTESIAN, (n1, n2), energy_level(model, n1 + n2), raw, 1.0)


def polar_state(model, nr, m):
    raw = lambda r, phi: polar_basis_v2(model, nr, m, r, phi)
    return Wavefunction2D(model, Basis2D.POLAR, (nr, m), energy_level(model, nr + m), raw, 1.0)


def assemble_wavefunction_2d(model, basis, n, q1, q2, d2=None, normalize=False, spec=None):
    """Parabolic Psi(xi, eta) = C Ta(xi) Ta(i eta) or elliptic Psi(nu, mu) = C Z(mu) Z(i nu)."""
    basis = Basis2D(basis)
    if q1 + q2 != n or q1 < 0 or q2 < 0:
        raise LabelingError(f"node split ({q1}, {q2}) does not add up to n={n}")
    if basis is Basis2D.PARABOLIC:
        sol = find_solution(solve_parabolic(model, n), q1, q2)
        raw = lambda xi, eta: ta_real(sol, model, xi) * ta_imag(sol, model, eta)
        d = None
    elif basis is Basis2D.ELLIPTIC:
        if d2 is None or d2 <= 0:
            raise ParameterDomainError("elliptic states need d2 > 0")
        sol = find_solution(solve_elliptic(model, n, d2), q1, q2)
        raw = lambda nu, mu: z_angular(sol, model, mu) * z_radial(sol, model, nu)
        d = math.sqrt(d2)
    else:
        raise ParameterDomainError("assemble builds parabolic or elliptic states; use cartesian_state/polar_state")
    state = Wavefunction2D(model, basis, (n, q1, q2), energy_level(model, n), raw, None, d, (sol,))
    if normalize:
        from .analysis.projections import normalize as _normalize
        state = _normalize(state, spec)
    return state


def hausdorff(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def elliptic_symmetry_residual(model, n, d2, printed=False):
    """Hausdorff distance between spectrum(d2; k1, k2) and spectrum(-d2; k2, k1)."""
    a = separation_eigenvalues(build_elliptic_recurrence(model, n, d2, printed=printed)).lambdas
    b = separation_eigenvalues(build_elliptic_recurrence(model.swapped(), n, -d2, printed=printed)).lambdas
    return hausdorff(a, b)


class LimitKind(str, Enum):
    POLAR_D0 = "polar-d0"
    CARTESIAN_DINF = "cartesian-dinf"


@dataclass
class LimitReport:
    kind: LimitKind
    n: int
    q: int
    d2: np.ndarray
    lambdas: np.ndarray
    fit: dict
    predicted: dict
    error: float
    converged: bool
    tolerance: float


def elliptic_lambdas(model, n, d2):
    return separation_eigenvalues(build_elliptic_recurrence(model, n, d2)).lambdas


def polar_limit_slope(model, n, m):
    """First-order D^2 slope of the branch lambda -> -(2m+1+p1+p2)^2 (triangular perturbation theory)."""
    t0 = build_elliptic_recurrence(model, n, 0.0).lambda_matrix()
    t1 = build_elliptic_recurrence(model, n, 1.0).lambda_matrix() - t0
    # exact first derivative of the (quadratic-in-D^2) matrix at 0: remove the D^4 diagonal piece
    t2 = (build_elliptic_recurrence(model, n, 2.0).lambda_matrix() - 2 * t1 - t0) / 2
    t1 = t1 - t2
    vals, right = np.linalg.eig(t0)
    vals_l, left = np.linalg.eig(t0.T)
    target = -(2 * m + 1 + model.p1 + model.p2) ** 2
    i = int(np.argmin(np.abs(vals - target)))
    j = int(np.argmin(np.abs(vals_l - target)))
    r, l = right[:, i].real, left[:, j].real
    return float(l @ t1 @ r / (l @ r))


def limit_check(model, n, q, kind, d2_sequence, tol=1e-3):
    """Convergence report of lambda_nq(D^2) toward the polar (D->0) or Cartesian (D->inf) regime.

    PolarD0: fits a + b D^2 + c D^4 and compares a with -(2m+1+p1+p2)^2,
    m = n - q, and b with first-order perturbation theory; ``error`` is the
    deviation of lambda at the smallest D^2 from the first-order prediction.
    CartesianDInf: fits lambda - D^4 w^2/64 = b D^2 + c; ``error`` is the
    relative residual of the fit at the largest D^2. The fitted b is reported
    next to the reduction of the recurrence, -(w/4)(4 n1 - 2n + p1 - p2) with
    n1 = n - q, and next to the published coefficient -(w/4)(4 n1 - 2n + 6 + 7 p1 - p2).
    """
    kind = LimitKind(kind)
    d2 = np.asarray(d2_sequence, dtype=float)
    lam = np.array([elliptic_lambdas(model, n, v)[q] for v in d2])
    w, p1, p2 = model.omega, model.p1, model.p2
    if kind is LimitKind.POLAR_D0:
        m = n - q
        lam0 = -(2 * m + 1 + p1 + p2) ** 2
        deg = min(2, len(d2) - 1)
        coef = np.polyfit(d2, lam, deg)[::-1]
        slope = polar_limit_slope(model, n, m)
        i = int(np.argmin(d2))
        err = abs(lam[i] - (lam0 + slope * d2[i]))
        fit = {"intercept": float(coef[0]), "slope": float(coef[1])}
        pred = {"lambda0": lam0, "slope": slope, "m": m}
        ok = err < tol and abs(coef[0] - lam0) < tol
    else:
        n1 = n - q
        y = lam - d2 ** 2 * w * w / 64.0
        b, c = np.polyfit(d2, y, 1)
        i = int(np.argmax(d2))
        model_val = d2[i] ** 2 * w * w / 64.0 + b * d2[i] + c
        err = abs(lam[i] - model_val) / abs(lam[i])
        fit = {"slope": float(b), "intercept": float(c)}
        pred = {"slope": -0.25 * w * (4 * n1 - 2 * n + p1 - p2),
                "printed_slope": -0.25 * w * (4 * n1 - 2 * n + 6 + 7 * p1 - p2), "n1": n1}
        ok = err < tol
    return LimitReport(kind, n, q, d2, lam, fit, pred, float(err), bool(ok), tol)


@dataclass(frozen=True)
class SexticParameters:
    """1D sextic problem -psi'' + [w^2 x^6 + 4 beta w^2 x^4 + mu2 x^2 + (4 delta - 1)(4 delta - 3)/(4 x^2)] psi = lambda psi."""

    omega: float
    beta: float
    delta: float
    mu2_coefficient: float

    def potential(self, x):
        x = np.asarray(x, dtype=float)
        w = self.omega
        return (w * w * x ** 6 + 4 * self.beta * w * w * x ** 4 + self.mu2_coefficient * x ** 2
                + (4 * self.delta - 1) * (4 * self.delta - 3) / (4 * x * x))


def sextic_qes_parameters(model, n):
    """beta = k1/(4w^2), delta = (1+p)/2, mu^2 coefficient k1^2/(4w^2) - w(4n + 4 + 2p)."""
    w, k1, p = model.omega, model.k1, model.p2
    return SexticParameters(w, k1 / (4 * w * w), (1 + p) / 2, k1 * k1 / (4 * w * w) - w * (4 * n + 4 + 2 * p))


def sextic_energy_from_zeros(params, zeros):
    """E = 4 delta [beta w + sum 1/xi_i]; equals lambda/2 when xi_i are the Niven zeros."""
    return 4 * params.delta * (params.beta * params.omega + float(np.sum(1.0 / np.asarray(zeros, dtype=float))))
