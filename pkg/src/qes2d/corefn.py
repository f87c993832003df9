"""Classical orthogonal polynomials, terminating hypergeometric series and gamma helpers.

Everything here accepts numpy arrays for ``x`` and evaluates by forward
recurrence in the degree, so moderate degrees (~40) do not overflow.
"""
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ParameterDomainError


class PolyKind(str, Enum):
    HERMITE = "hermite"
    LAGUERRE = "laguerre"
    JACOBI = "jacobi"


@dataclass(frozen=True)
class PolyFamily:
    """Orthogonal polynomial family. Hermite is the physicists' H_n."""

    kind: PolyKind
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        kind = PolyKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind in (PolyKind.LAGUERRE, PolyKind.JACOBI) and not self.alpha > -1:
            raise ParameterDomainError(f"{kind.value}: alpha must exceed -1, got {self.alpha}")
        if kind is PolyKind.JACOBI and not self.beta > -1:
            raise ParameterDomainError(f"jacobi: beta must exceed -1, got {self.beta}")


def eval_orthopoly(family, degree, x):
    """Value of H_n(x), L_n^alpha(x) or P_n^(alpha,beta)(x)."""
    if degree < 0 or int(degree) != degree:
        raise ParameterDomainError(f"degree must be a nonnegative integer, got {degree}")
    degree = int(degree)
    x = np.asarray(x, dtype=float)
    kind, a, b = family.kind, family.alpha, family.beta
    p0 = np.ones_like(x)
    if degree == 0:
        return p0 if p0.ndim else float(p0)
    if kind is PolyKind.HERMITE:
        p1 = 2.0 * x
    elif kind is PolyKind.LAGUERRE:
        p1 = 1.0 + a - x
    else:
        p1 = 0.5 * (a - b) + 0.5 * (a + b + 2.0) * x
    for k in range(1, degree):
        if kind is PolyKind.HERMITE:
            p2 = 2.0 * x * p1 - 2.0 * k * p0
        elif kind is PolyKind.LAGUERRE:
            p2 = ((2 * k + 1 + a - x) * p1 - (k + a) * p0) / (k + 1)
        else:
            c = 2 * k + a + b
            num = (c + 1) * ((c + 2) * c * x + a * a - b * b) * p1 - 2 * (k + a) * (k + b) * (c + 2) * p0
            p2 = num / (2 * (k + 1) * (k + a + b + 1) * c)
        p0, p1 = p1, p2
    return p1 if p1.ndim else float(p1)


class HypKind(str, Enum):
    ONE_F_ONE = "1F1"
    TWO_F_ONE = "2F1"


def hyp_finite(kind, n, params, x):
    """Terminating 1F1(-n; c; x) (params=[c]) or 2F1(-n, b; c; x) (params=[b, c])."""
    kind = HypKind(kind)
    if n < 0 or int(n) != n:
        raise ParameterDomainError(f"n must be a nonnegative integer, got {n}")
    n = int(n)
    params = [float(p) for p in params]
    expected = 1 if kind is HypKind.ONE_F_ONE else 2
    if len(params) != expected:
        raise ParameterDomainError(f"{kind.value} takes {expected} parameter(s) besides -n, got {len(params)}")
    c = params[-1]
    b = params[0] if kind is HypKind.TWO_F_ONE else None
    for j in range(n):
        if c + j == 0:
            raise ParameterDomainError(f"denominator parameter {c} hits a pole of the series")
    x = np.asarray(x, dtype=float)
    term = np.ones_like(x)
    total = np.ones_like(x)
    for j in range(n):
        ratio = (j - n) / ((c + j) * (j + 1))
        if b is not None:
            ratio *= b + j
        term = term * ratio * x
        total = total + term
    return total if total.ndim else float(total)


def ln_gamma(x):
    """log Gamma(x) for x > 0 (stdlib lgamma, accurate to a few ulp)."""
    if not x > 0:
        raise ParameterDomainError(f"ln_gamma needs x > 0, got {x}")
    return math.lgamma(x)


def pochhammer(a, s):
    """Rising factorial (a)_s = a (a+1) ... (a+s-1)."""
    out = 1.0
    for j in range(int(s)):
        out *= a + j
    return out


def gamma_ratio(num, den=()):
    """prod Gamma(num) / prod Gamma(den) for positive arguments, via log differences."""
    return math.exp(sum(ln_gamma(v) for v in num) - sum(ln_gamma(v) for v in den))
