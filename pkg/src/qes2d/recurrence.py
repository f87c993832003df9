"""Three-term recurrences of the parabolic and elliptic bases.

Row s of a truncated recurrence reads

    super[s] A_{s+1} + (d_s + kappa * lam) A_s + sub[s] A_{s-1} = 0,   s = 0..n,

with A_{-1} = A_{n+1} = 0 and A_0 = 1. The separation constants are the
eigenvalues of -M / kappa, where M is the tridiagonal matrix (sub, d, super).
"""
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg as sla
from scipy.special import gammaln, gammasgn

from .errors import (ConvergenceError, NotAnEigenvalueError, NumericDegeneracyError,
                     NumericalError, ParameterDomainError, RealnessError)
from .potentials import ModelV1, ModelV2, Sign, energy_level

REALNESS_TOL = 1e-9
DISTINCT_TOL = 1e-9
TRUNCATION_TOL = 1e-8


class Provenance(str, Enum):
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"


@dataclass(frozen=True)
class ThreeTermRecurrence:
    """Truncated recurrence of degree n.

    ``sub[i]`` multiplies A_{s-1} in row s = i + 1. ``super_next`` is the
    coefficient the super-diagonal would carry in row n; it converts the row-n
    residual into the overflow coefficient A_{n+1}.
    """

    degree_n: int
    super: np.ndarray
    diag_base: np.ndarray
    lambda_weight: float
    sub: np.ndarray
    provenance: Provenance
    super_next: float = 1.0
    d2: float = None

    def __post_init__(self):
        n = self.degree_n
        if len(self.super) != n or len(self.sub) != n or len(self.diag_base) != n + 1:
            raise ParameterDomainError("recurrence sequences do not match degree n")
        if self.lambda_weight == 0:
            raise ParameterDomainError("lambda weight must be nonzero")
        if np.any(np.asarray(self.super) == 0) or self.super_next == 0:
            raise ParameterDomainError("super-diagonal coefficient vanishes; forward recurrence ill-posed")

    def matrix(self):
        """Tridiagonal M (lambda-free part) as a dense array."""
        n = self.degree_n
        m = np.diag(np.asarray(self.diag_base, dtype=float))
        if n:
            m += np.diag(self.super, 1) + np.diag(self.sub, -1)
        return m

    def lambda_matrix(self):
        """The matrix whose eigenvalues are the separation constants."""
        return -self.matrix() / self.lambda_weight


@dataclass(frozen=True)
class SeparationSpectrum:
    lambdas: np.ndarray
    recurrence: ThreeTermRecurrence = field(repr=False)
    max_imag_residual: float = 0.0


def _sign_override(model, attr, sign):
    if sign is None or Sign.parse(sign) is getattr(model, attr):
        return model
    return model.with_(**{attr: Sign.parse(sign)})


def build_parabolic_recurrence(model, n, sign2=None):
    """Truncated parabolic recurrence of level n for the V1 model.

    ``sign2`` overrides the model's branch (validated: a Minus branch with
    k2 >= 1/2 raises BranchError).
    """
    if not isinstance(model, ModelV1):
        raise ParameterDomainError("the parabolic recurrence belongs to the V1 model")
    model = _sign_override(model, "sign2", sign2)
    w, k1, p = model.omega, model.k1, model.p2
    s = np.arange(n + 1, dtype=float)
    return ThreeTermRecurrence(
        degree_n=n,
        super=((s[:-1] + 1) * (s[:-1] + 1 + p)),
        diag_base=-(k1 / (4 * w)) * (2 * s + 1 + p),
        lambda_weight=0.25,
        sub=w * (n + 1 - s[1:]),
        provenance=Provenance.PARABOLIC,
        super_next=(n + 1) * (n + 1 + p),
    )


def build_elliptic_recurrence(model, n, d2, signs=None, printed=False):
    """Truncated elliptic recurrence of level n at squared interfocal distance d2.

    ``printed=True`` returns the published form of the diagonal, for
    comparison only: it carries an extra (D^2 w/4) * 6(1 + p1) that
    breaks the D^2 -> -D^2, k1 <-> k2 symmetry.
    """
    if not isinstance(model, ModelV2):
        raise ParameterDomainError("the elliptic recurrence belongs to the V2 model")
    if signs is not None:
        model = _sign_override(_sign_override(model, "sign1", signs[0]), "sign2", signs[1])
    w, p1, p2 = model.omega, model.p1, model.p2
    big = p1 + p2
    s = np.arange(n + 1, dtype=float)
    lin = 4 * s - 2 * n + p1 - p2
    if printed:
        lin = lin + 6 + 6 * p1
    diag = -0.25 * ((2 * s + 1 + big) ** 2 + 0.25 * d2 * w * lin - d2 * d2 * w * w / 64.0)
    return ThreeTermRecurrence(
        degree_n=n,
        super=(s[:-1] + 1) * (s[:-1] + 1 + p1),
        diag_base=diag,
        lambda_weight=-0.25,
        sub=-0.25 * d2 * w * (n - s[1:] + 1),
        provenance=Provenance.ELLIPTIC,
        super_next=(n + 1) * (n + 1 + p1),
        d2=float(d2),
    )


def separation_eigenvalues(rec):
    """Sorted separation constants of a truncated recurrence (realness asserted)."""
    n = rec.degree_n
    t = rec.lambda_matrix()
    imag = 0.0
    try:
        if n == 0:
            lam = np.array([t[0, 0]])
        elif rec.provenance is Provenance.PARABOLIC:
            prod = np.diag(t, 1) * np.diag(t, -1)
            if np.any(prod <= 0):
                raise ParameterDomainError("parabolic recurrence is not symmetrizable")
            lam = sla.eigh_tridiagonal(np.diag(t).copy(), np.sqrt(prod), eigvals_only=True)
        else:
            raw = sla.eigvals(t)
            imag = float(np.max(np.abs(raw.imag)))
            lam = raw.real
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise ConvergenceError(f"tridiagonal eigensolver failed: {exc}") from exc
    lam = np.sort(lam)
    scale = max(1.0, float(np.max(np.abs(lam))))
    if imag > REALNESS_TOL * scale:
        raise RealnessError(f"separation constants have imaginary parts up to {imag:.3e}")
    if n and np.min(np.diff(lam)) <= DISTINCT_TOL * max(1.0, lam[-1] - lam[0]):
        raise NumericalError("separation constants are not distinct to tolerance")
    return SeparationSpectrum(lambdas=lam, recurrence=rec, max_imag_residual=imag)


def symmetrized_matrix(rec):
    """Diagonal similarity of the parabolic lambda-matrix to a symmetric one."""
    t = rec.lambda_matrix()
    n = rec.degree_n
    out = np.diag(np.diag(t))
    if n:
        off = np.sqrt(np.diag(t, 1) * np.diag(t, -1))
        out += np.diag(off, 1) + np.diag(off, -1)
    return out


def _forward(rec, lam):
    n = rec.degree_n
    a = np.zeros(n + 2)
    da = np.zeros(n + 2)
    a[0] = 1.0
    diag = np.asarray(rec.diag_base) + rec.lambda_weight * lam
    sup = np.append(np.asarray(rec.super, dtype=float), rec.super_next)
    for s in range(n + 1):
        prev, dprev = (a[s - 1], da[s - 1]) if s else (0.0, 0.0)
        c = rec.sub[s - 1] if s else 0.0
        a[s + 1] = -(diag[s] * a[s] + c * prev) / sup[s]
        da[s + 1] = -(diag[s] * da[s] + rec.lambda_weight * a[s] + c * dprev) / sup[s]
    return a, da


def coefficient_vector(rec, lam, refine=True):
    """A_0..A_n from the forward recurrence with A_0 = 1.

    A few Newton steps on the overflow coefficient A_{n+1}(lam) polish the
    separation constant first when ``refine`` is set; the refined value is
    kept only if it shrinks the overflow.
    """
    lam = float(lam)
    a, da = _forward(rec, lam)
    if refine:
        best = (abs(a[-1]) / np.max(np.abs(a[:-1])), lam, a)
        for _ in range(4):
            if da[-1] == 0:
                break
            lam = lam - a[-1] / da[-1]
            a, da = _forward(rec, lam)
            rel = abs(a[-1]) / np.max(np.abs(a[:-1]))
            if rel < best[0]:
                best = (rel, lam, a)
            else:
                break
        _, lam, a = best
    overflow = abs(a[-1]) / np.max(np.abs(a[:-1]))
    if overflow > TRUNCATION_TOL:
        raise NotAnEigenvalueError(
            f"lambda={lam!r} does not truncate the recurrence (|A_(n+1)|/max|A| = {overflow:.3e})")
    return a[:-1].copy()


def refined_lambda(rec, lam):
    """Newton-polished separation constant (same criterion as coefficient_vector)."""
    a, da = _forward(rec, lam)
    best = (abs(a[-1]), lam)
    for _ in range(4):
        if da[-1] == 0:
            break
        lam = lam - a[-1] / da[-1]
        a, da = _forward(rec, lam)
        if abs(a[-1]) < best[0]:
            best = (abs(a[-1]), lam)
        else:
            break
    return best[1]


def row_residuals(rec, lam, coeffs):
    """Residual of every row s = 0..n, with A_{-1} = A_{n+1} = 0."""
    a = np.concatenate([[0.0], np.asarray(coeffs, dtype=float), [0.0]])
    n = rec.degree_n
    diag = np.asarray(rec.diag_base) + rec.lambda_weight * lam
    sup = np.append(np.asarray(rec.super, dtype=float), 0.0)
    sub = np.concatenate([[0.0], np.asarray(rec.sub, dtype=float)])
    return np.array([sup[s] * a[s + 2] + diag[s] * a[s + 1] + sub[s] * a[s] for s in range(n + 1)])


class Basis(str, Enum):
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"


def infinite_coefficients(model, basis, energy, lam, d2=None):
    """Coefficient functions (super, diag, sub) of the non-truncated recurrence at energy E.

    Parabolic: the A_{s-1} coefficient is (E + k1^2/(8 w^2) - w(2s + p))/2,
    which vanishes at s = n + 1 exactly on the energy levels.
    """
    basis = Basis(basis)
    w = model.omega
    if basis is Basis.PARABOLIC:
        k1, p = model.k1, model.p2

        def sup(s):
            return (s + 1) * (s + 1 + p)

        def dia(s):
            return 0.25 * (lam - (k1 / w) * (2 * s + 1 + p))

        def sub(s):
            return 0.5 * (energy + k1 * k1 / (8 * w * w) - w * (2 * s + p))
    else:
        if d2 is None:
            raise ParameterDomainError("elliptic tail needs d2")
        p1, p2 = model.p1, model.p2
        big = p1 + p2

        def sup(s):
            return (s + 1) * (s + 1 + p1)

        def dia(s):
            return -0.25 * ((2 * s + 1 + big) ** 2 + d2 * w * s + 0.5 * d2 * w * (1 + p1)
                            - 0.25 * d2 * energy - d2 * d2 * w * w / 64.0 + lam)

        def sub(s):
            return -0.125 * d2 * (energy - w * (2 * s + big))
    return sup, dia, sub


def _is_on_spectrum(model, energy, tol=1e-12):
    w = model.omega
    e0 = energy_level(model, 0)
    nu = (energy - e0) / (2 * w)
    return nu > -0.5 and abs(nu - round(nu)) < tol


def tail_asymptotics_probe(model, basis, e_offspectrum, s_max, lam=0.0, d2=None, depth=None):
    """Ratios r_s = A_{s+1}/A_s, s = 0..s_max-1, of the minimal solution at an off-spectrum energy.

    The minimal solution is obtained by Miller's backward recurrence started
    ``depth`` rows past s_max (default 4 s_max + 200) from A_{N+1} = 0.
    Parabolic ratios satisfy |r_s| sqrt(s) -> sqrt(w) (with an even/odd
    factor xi_+-); elliptic ratios satisfy r_s s -> D^2 w / 4.
    """
    if s_max < 50:
        raise ParameterDomainError("s_max must be at least 50")
    if _is_on_spectrum(model, e_offspectrum):
        raise ParameterDomainError(f"E={e_offspectrum} lies on the spectrum; the series truncates")
    sup, dia, sub = infinite_coefficients(model, basis, e_offspectrum, lam, d2)
    big_n = s_max + (depth if depth is not None else 4 * s_max + 200)
    ratios = np.zeros(big_n + 1)
    # row s: sup(s) r_s r_{s-1} + dia(s) r_{s-1} + sub(s) = 0  =>  r_{s-1} = -sub(s) / (sup(s) r_s + dia(s))
    roots = np.roots([sup(big_n), dia(big_n), sub(big_n)])
    r = float(roots[np.argmin(np.abs(roots))].real)
    for s in range(big_n, 0, -1):
        den = sup(s) * r + dia(s)
        if den == 0 or not math.isfinite(den):
            raise NumericalError(f"backward recurrence broke down at s={s}")
        r = -sub(s) / den
        ratios[s - 1] = r
    out = ratios[:s_max]
    if not np.all(np.isfinite(out)):
        raise NumericalError("tail ratios overflowed")
    return out


def coefficients_from_ratios(ratios):
    """log|A_s| and sign(A_s) for s = 0..len(ratios), with A_0 = 1."""
    r = np.asarray(ratios, dtype=float)
    if np.any(r == 0):
        raise NumericDegeneracyError("zero ratio; coefficients vanish")
    logs = np.concatenate([[0.0], np.cumsum(np.log(np.abs(r)))])
    signs = np.concatenate([[1.0], np.cumprod(np.sign(r))])
    return logs, signs


def tail_series_log(ratios, z):
    """log of sum_s A_s z^s for z > 0 when all A_s > 0 (the minimal solution for k1 <= 0)."""
    logs, signs = coefficients_from_ratios(ratios)
    if np.any(signs < 0):
        raise ParameterDomainError("coefficients change sign; use z on the growing side")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    s = np.arange(len(logs))
    terms = logs[None, :] + s[None, :] * np.log(z)[:, None]
    top = terms.max(axis=1)
    return top + np.log(np.exp(terms - top[:, None]).sum(axis=1))


def continued_fraction_b(model, s, energy, lam):
    """Standard-form coefficient b_s of the parabolic recurrence, xi_s = 1/(b_s + xi_(s+1)).

    Uses A_s/A_(s-1) = xi_s f(s) with
        f(s) = sqrt(w/2) G(s/2+1/2) G(s/2+p/2+1/2) G(s/2+c+1/2) / [G(s/2+1) G(s/2+p/2+1) G(s/2+c)],
        c = p/4 + alpha/(2w),  alpha = -(E + k1^2/(8 w^2))/2,
    so that f(s+1) f(s) = -gamma_s / ((s+1)(s+1+p)) and b_s = -beta_s f(s) / gamma_s.
    """
    w, k1, p = model.omega, model.k1, model.p2
    alpha = -0.5 * (energy + k1 * k1 / (8 * w * w))
    c = p / 4 + alpha / (2 * w)
    num = [s / 2 + 0.5, s / 2 + p / 2 + 0.5, s / 2 + c + 0.5]
    den = [s / 2 + 1, s / 2 + p / 2 + 1, s / 2 + c]
    sgn = np.prod([gammasgn(v) for v in num]) * np.prod([gammasgn(v) for v in den])
    if sgn == 0:
        raise NumericDegeneracyError(f"f({s}) hits a pole of the gamma function")
    f = sgn * math.sqrt(w / 2) * math.exp(sum(gammaln(v) for v in num) - sum(gammaln(v) for v in den))
    beta = 0.25 * (lam - (k1 / w) * (2 * s + 1 + p))
    gamma = -(alpha + w * s + w * p / 2)
    if abs(gamma) < 1e-300:
        raise NumericDegeneracyError(f"gamma_{s} vanishes")
    return -beta * f / gamma


def evaluate_continued_fraction(bs):
    """1/(b_0 + 1/(b_1 + ... + 1/b_(m-1))) evaluated from the tail."""
    x = 0.0
    for b in reversed(list(bs)):
        den = b + x
        if abs(den) < 1e-300:
            raise NumericDegeneracyError("continued fraction denominator vanishes")
        x = 1.0 / den
    return x


def continued_fraction_xi(model, s, depth, energy, lam, b=None):
    """xi_s truncated at ``depth`` levels; ``b`` may override the coefficient function."""
    if depth < 1:
        raise ParameterDomainError("depth must be >= 1")
    coef = b if b is not None else (lambda j: continued_fraction_b(model, j, energy, lam))
    return evaluate_continued_fraction(coef(s + j) for j in range(depth))
