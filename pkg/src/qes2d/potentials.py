"""Models, coordinate maps, energy levels and the exactly solvable closed-form bases.

Normalization conventions: V1 states carry norm 1/2 on the half-plane y > 0,
V2 states carry norm 1/4 on the quadrant x, y > 0. The full-plane norm is
obtained by multiplying with ``model.multiplicity`` (2 or 4).
"""
import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .corefn import PolyFamily, PolyKind, eval_orthopoly
from .errors import BranchError, DomainError, ParameterDomainError


class Sign(Enum):
    PLUS = 1
    MINUS = -1

    @classmethod
    def parse(cls, token):
        if isinstance(token, Sign):
            return token
        table = {"+": cls.PLUS, "plus": cls.PLUS, "1": cls.PLUS, "+1": cls.PLUS,
                 "-": cls.MINUS, "minus": cls.MINUS, "-1": cls.MINUS, "−": cls.MINUS}
        key = str(token).strip().lower()
        if key not in table:
            raise ParameterDomainError(f"sign must be + or -, got {token!r}")
        return table[key]

    def __str__(self):
        return "+" if self is Sign.PLUS else "-"


def check_branch(k, sign, name="k"):
    """Reject the Minus branch unless 0 < k < 1/2."""
    if not k > 0:
        raise ParameterDomainError(f"{name} must be positive, got {k}")
    if sign is Sign.MINUS and k >= 0.5:
        raise BranchError(
            f"{name}={k}: the Plus branch is required when {name} >= 1/2 "
            "(both branches are admissible only for 0 < k < 1/2)")


@dataclass(frozen=True)
class ModelV1:
    """V1 = w^2 (4x^2 + y^2)/2 + k1 x + (k2^2 - 1/4)/(2 y^2)."""

    omega: float
    k1: float
    k2: float
    sign2: Sign = Sign.PLUS

    def __post_init__(self):
        object.__setattr__(self, "sign2", Sign.parse(self.sign2))
        if not self.omega > 0:
            raise ParameterDomainError(f"omega must be positive, got {self.omega}")
        check_branch(self.k2, self.sign2, "k2")

    @property
    def p2(self):
        """Signed coupling +-k2."""
        return self.sign2.value * self.k2

    multiplicity = 2

    def with_(self, **kw):
        return replace(self, **kw)


@dataclass(frozen=True)
class ModelV2:
    """V2 = w^2 (x^2 + y^2)/2 + [(k1^2 - 1/4)/x^2 + (k2^2 - 1/4)/y^2]/2."""

    omega: float
    k1: float
    k2: float
    sign1: Sign = Sign.PLUS
    sign2: Sign = Sign.PLUS

    def __post_init__(self):
        object.__setattr__(self, "sign1", Sign.parse(self.sign1))
        object.__setattr__(self, "sign2", Sign.parse(self.sign2))
        if not self.omega > 0:
            raise ParameterDomainError(f"omega must be positive, got {self.omega}")
        check_branch(self.k1, self.sign1, "k1")
        check_branch(self.k2, self.sign2, "k2")

    @property
    def p1(self):
        return self.sign1.value * self.k1

    @property
    def p2(self):
        return self.sign2.value * self.k2

    multiplicity = 4

    def swapped(self):
        """The model with the two couplings (and branches) exchanged."""
        return ModelV2(self.omega, self.k2, self.k1, self.sign2, self.sign1)

    def with_(self, **kw):
        return replace(self, **kw)


class CoordinateSystem(str, Enum):
    CARTESIAN = "cartesian"
    PARABOLIC = "parabolic"
    POLAR = "polar"
    ELLIPTIC = "elliptic"


@dataclass(frozen=True)
class CoordinatePoint:
    """A point (u1, u2) in one of the separating systems; ``d`` is the interfocal distance."""

    system: CoordinateSystem
    u1: float
    u2: float
    d: float = None

    def __post_init__(self):
        object.__setattr__(self, "system", CoordinateSystem(self.system))
        if self.system is CoordinateSystem.ELLIPTIC and not (self.d is not None and self.d > 0):
            raise ParameterDomainError("elliptic coordinates need an interfocal distance d > 0")


def coordinate_map(p):
    """Cartesian image (x, y) and the area element weight of a CoordinatePoint."""
    return to_cartesian(p.system, p.u1, p.u2, p.d)


def to_cartesian(system, u1, u2, d=None):
    system = CoordinateSystem(system)
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if system is CoordinateSystem.CARTESIAN:
        x, y, w = u1, u2, np.ones_like(u1 * u2)
    elif system is CoordinateSystem.PARABOLIC:
        x, y, w = 0.5 * (u1 ** 2 - u2 ** 2), u1 * u2, u1 ** 2 + u2 ** 2
    elif system is CoordinateSystem.POLAR:
        x, y, w = u1 * np.cos(u2), u1 * np.sin(u2), u1 * np.ones_like(u2)
    else:
        x = 0.5 * d * np.cosh(u1) * np.cos(u2)
        y = 0.5 * d * np.sinh(u1) * np.sin(u2)
        w = d * d / 8.0 * (np.cosh(2 * u1) - np.cos(2 * u2))
    return _unwrap(x), _unwrap(y), _unwrap(w)


def from_cartesian(system, x, y, d=None):
    """Inverse map; parabolic returns eta >= 0, polar/elliptic return angles in [0, 2 pi)."""
    system = CoordinateSystem(system)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if system is CoordinateSystem.CARTESIAN:
        u1, u2 = x, y
    elif system is CoordinateSystem.PARABOLIC:
        r = np.hypot(x, y)
        u1 = np.where(y < 0, -1.0, 1.0) * np.sqrt(np.maximum(r + x, 0.0))
        u2 = np.sqrt(np.maximum(r - x, 0.0))
    elif system is CoordinateSystem.POLAR:
        u1, u2 = np.hypot(x, y), np.mod(np.arctan2(y, x), 2 * np.pi)
    else:
        s = np.hypot(x + 0.5 * d, y) + np.hypot(x - 0.5 * d, y)
        u1 = np.arccosh(np.maximum(s / d, 1.0))
        mu = np.arccos(np.clip(2.0 * x / s, -1.0, 1.0))
        u2 = np.where(y < 0, 2 * np.pi - mu, mu)
    return _unwrap(u1), _unwrap(u2)


def _unwrap(a):
    a = np.asarray(a)
    return float(a) if a.ndim == 0 else a


def potential_value(model, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w2 = model.omega ** 2
    if np.any(y == 0):
        raise DomainError("potential is singular on the axis y = 0")
    if isinstance(model, ModelV1):
        v = 0.5 * w2 * (4 * x ** 2 + y ** 2) + model.k1 * x + (model.k2 ** 2 - 0.25) / (2 * y ** 2)
    else:
        if np.any(x == 0):
            raise DomainError("potential is singular on the axis x = 0")
        v = 0.5 * w2 * (x ** 2 + y ** 2) + 0.5 * ((model.k1 ** 2 - 0.25) / x ** 2
                                                  + (model.k2 ** 2 - 0.25) / y ** 2)
    return _unwrap(v)


def energy_level(model, n):
    """Energy of level n; the level is (n+1)-fold degenerate."""
    if n < 0:
        raise ParameterDomainError(f"n must be nonnegative, got {n}")
    w = model.omega
    if isinstance(model, ModelV1):
        return w * (2 * n + 2 + model.p2) - model.k1 ** 2 / (8 * w * w)
    return w * (2 * n + 2 + model.p1 + model.p2)


def degeneracy(n):
    return n + 1


def _laguerre_factor(n, p, omega, u, log_norm):
    """exp(log_norm) u^(1/2+p) exp(-w u^2/2) L_n^p(w u^2) for u > 0."""
    lag = eval_orthopoly(PolyFamily(PolyKind.LAGUERRE, p), n, omega * u * u)
    return np.exp(log_norm + (0.5 + p) * np.log(u) - 0.5 * omega * u * u) * lag


def oscillator_x_v1(model, n1, x):
    """Shifted Hermite factor psi_n1(x; k1), unit norm on the real line."""
    w = model.omega
    z = np.asarray(x, dtype=float) + model.k1 / (4 * w * w)
    log_norm = 0.25 * math.log(2 * w / math.pi) - 0.5 * (n1 * math.log(2.0) + math.lgamma(n1 + 1))
    h = eval_orthopoly(PolyFamily(PolyKind.HERMITE), n1, math.sqrt(2 * w) * z)
    return np.exp(log_norm - w * z * z) * h


def singular_y_v1(model, n2, y):
    """Laguerre factor psi_n2(y; +-k2), norm 1/2 on y > 0."""
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("the V1 y-factor is defined on y > 0")
    w, p = model.omega, model.p2
    log_norm = 0.5 * ((1 + p) * math.log(w) + math.lgamma(n2 + 1) - math.lgamma(n2 + p + 1))
    return _laguerre_factor(n2, p, w, y, log_norm)


def cartesian_basis_v1(model, n1, n2, x, y):
    """Cartesian V1 eigenfunction psi_n1(x) psi_n2(y), energy level n1 + n2."""
    _check_labels(n1, n2)
    return _unwrap(oscillator_x_v1(model, n1, x) * singular_y_v1(model, n2, y))


def cartesian_basis_v2(model, n1, n2, x, y):
    """Cartesian V2 eigenfunction on the quadrant, norm 1/4."""
    _check_labels(n1, n2)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("V2 Cartesian states are defined on the quadrant x, y > 0")
    w, p1, p2 = model.omega, model.p1, model.p2
    half = lambda n, p: 0.5 * ((1 + p) * math.log(w) + math.lgamma(n + 1) - math.lgamma(n + p + 1))
    return _unwrap(_laguerre_factor(n1, p1, w, x, half(n1, p1)) * _laguerre_factor(n2, p2, w, y, half(n2, p2)))


def polar_basis_v2(model, nr, m, r, phi):
    """Polar V2 eigenfunction (radial Laguerre times angular Jacobi), norm 1/4 on the quadrant."""
    _check_labels(nr, m)
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any(r <= 0) or np.any(phi <= 0) or np.any(phi >= 0.5 * np.pi):
        raise DomainError("polar V2 states are defined on r > 0, 0 < phi < pi/2")
    w, p1, p2 = model.omega, model.p1, model.p2
    big = p1 + p2
    a = 2 * m + big + 1
    log_rad = 0.5 * (math.log(2 * w) + math.lgamma(nr + 1) - math.lgamma(nr + a + 1))
    u = w * r * r
    lag = eval_orthopoly(PolyFamily(PolyKind.LAGUERRE, a), nr, u)
    radial = np.exp(log_rad + 0.5 * a * np.log(u) - 0.5 * u) * lag
    log_ang = 0.5 * (math.log(a) + math.lgamma(m + 1) + math.lgamma(m + big + 1) - math.log(2.0)
                     - math.lgamma(m + p2 + 1) - math.lgamma(m + p1 + 1))
    jac = eval_orthopoly(PolyFamily(PolyKind.JACOBI, p2, p1), m, np.cos(2 * phi))
    angular = np.exp(log_ang + (0.5 + p1) * np.log(np.cos(phi)) + (0.5 + p2) * np.log(np.sin(phi))) * jac
    return _unwrap(radial * angular)


def cartesian_v1_lambdas(model, n1, n2):
    """Cartesian separation constants (lambda1, lambda2); they sum to the energy."""
    w = model.omega
    return w * (2 * n1 + 1) - model.k1 ** 2 / (8 * w * w), w * (2 * n2 + 1 + model.p2)


def _check_labels(a, b):
    if a < 0 or b < 0:
        raise ParameterDomainError(f"quantum numbers must be nonnegative, got ({a}, {b})")

