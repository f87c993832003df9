"""Niven zero system of the parabolic states of V1.

The zeros alpha_l of Mk(z) solve
    F_l = sum_{m != l} 2/(alpha_l - alpha_m) + (1+p)/alpha_l - w alpha_l - k1/(2w) = 0,
and the separation constant follows as lambda = 4(1+p)[k1/(4w) + sum 1/alpha_l].
The product Phi(x, y) = prod (y^2/alpha_l + 2x - alpha_l) equals
prod(-1/alpha_l) Mk(xi^2) Mk(-eta^2) in parabolic coordinates.
"""
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import roots_genlaguerre

from .errors import ConvergenceError, DomainError, ParameterDomainError
from .potentials import ModelV1, energy_level
from .qes import solve_parabolic

NEWTON_MAX_ITER = 200
NEWTON_TOL = 1e-13
COLLISION_GAP = 1e-8
DEDUP_TOL = 1e-6
MAX_RESEEDS = 20


@dataclass(frozen=True)
class ZeroConfiguration:
    zeros: np.ndarray
    model: ModelV1
    residual: float

    @property
    def n_positive(self):
        return int(np.sum(self.zeros > 0))


class SeedMode(str, Enum):
    FROM_RECURRENCE = "from-recurrence"
    INDEPENDENT = "independent"


def _check(zeros):
    a = np.asarray(zeros, dtype=float)
    if np.any(a == 0):
        raise DomainError("Niven zeros must be nonzero")
    if len(a) > 1 and np.min(np.diff(np.sort(a))) == 0:
        raise DomainError("Niven zeros must be distinct")
    return a


def niven_equations(model, zeros):
    """Vector F_l of the zero system."""
    a = _check(zeros)
    w, k1, p = model.omega, model.k1, model.p2
    diff = a[:, None] - a[None, :]
    np.fill_diagonal(diff, np.inf)
    return np.sum(2.0 / diff, axis=1) + (1 + p) / a - w * a - k1 / (2 * w)


def niven_jacobian(model, zeros):
    a = _check(zeros)
    w, p = model.omega, model.p2
    diff = a[:, None] - a[None, :]
    np.fill_diagonal(diff, np.inf)
    off = 2.0 / diff ** 2
    jac = off.copy()
    np.fill_diagonal(jac, -np.sum(off, axis=1) - (1 + p) / a ** 2 - w)
    return jac


def niven_residual(model, zeros):
    """max_l |F_l|."""
    if len(zeros) == 0:
        return 0.0
    return float(np.max(np.abs(niven_equations(model, zeros))))


def lambda_from_zeros(model, cfg):
    zeros = cfg.zeros if isinstance(cfg, ZeroConfiguration) else np.asarray(cfg, dtype=float)
    w, k1, p = model.omega, model.k1, model.p2
    return 4 * (1 + p) * (k1 / (4 * w) + float(np.sum(1.0 / zeros)))


def newton_solve(model, seed, max_iter=NEWTON_MAX_ITER, tol=NEWTON_TOL):
    """Damped Newton from ``seed``; halves the step until the residual norm decreases."""
    a = np.array(seed, dtype=float)
    f = niven_equations(model, a)
    norm = np.linalg.norm(f)
    scale = max(1.0, float(np.max(np.abs(a))))
    for _ in range(max_iter):
        if np.max(np.abs(f)) <= tol * scale:
            return a
        step = np.linalg.solve(niven_jacobian(model, a), -f)
        t = 1.0
        while t > 1e-10:
            trial = a + t * step
            if np.all(trial != 0) and (len(trial) < 2 or np.min(np.diff(np.sort(trial))) > COLLISION_GAP * scale):
                f_trial = niven_equations(model, trial)
                if np.linalg.norm(f_trial) < norm:
                    break
            t *= 0.5
        else:
            raise ConvergenceError("Newton line search stalled", seed=seed)
        # zeros never change sign: the (1+p)/alpha barrier keeps them on their side of 0
        a, f = trial, f_trial
        norm = np.linalg.norm(f)
    if np.max(np.abs(f)) <= 1e3 * tol * scale:
        return a
    raise ConvergenceError(f"Newton did not converge, residual {np.max(np.abs(f)):.3g}", seed=seed)


def _laguerre_zeros(j, p):
    """Zeros of L_j^p (Gauss-Laguerre nodes)."""
    return roots_genlaguerre(j, p)[0] if j else np.zeros(0)


def independent_seeds(model, n):
    """For each split (j positive, n-j negative): sqrt(2x/w) over Laguerre zeros x, negatives mirrored."""
    w, p = model.omega, model.p2
    seeds = []
    for j in range(n + 1):
        pos = np.sqrt(_laguerre_zeros(j, p) / w) if j else np.zeros(0)
        neg = -np.sqrt(_laguerre_zeros(n - j, p) / w) if n - j else np.zeros(0)
        seeds.append(np.sort(np.concatenate([neg, pos]) * math.sqrt(2.0)))
    return seeds


def _solve_with_reseed(model, seed, rng_seed):
    rng = np.random.default_rng(rng_seed)
    trial = np.asarray(seed, dtype=float)
    last = None
    for _ in range(MAX_RESEEDS):
        try:
            return newton_solve(model, trial)
        except ConvergenceError as exc:
            last = exc
            scale = max(1.0, float(np.max(np.abs(seed))))
            trial = seed * (1 + 0.05 * rng.standard_normal(len(seed))) + 0.01 * scale * rng.standard_normal(len(seed))
            trial = np.where(np.sign(trial) == np.sign(seed), trial, seed)
    raise ConvergenceError(f"Newton failed after reseeding: {last}", seed=seed)


def _threads():
    try:
        return max(1, int(os.environ.get("QES_THREADS", "0")) or os.cpu_count() or 1)
    except ValueError as exc:
        raise ParameterDomainError("QES_THREADS must be an integer") from exc


def solve_zero_system(model, n, seeds=SeedMode.INDEPENDENT):
    """All n+1 zero configurations of level n, sorted by lambda.

    ``seeds`` is a SeedMode or an explicit list of configurations or arrays.
    Converged configurations are deduplicated by sorted-zero distance.
    """
    if n < 1:
        raise ParameterDomainError("the zero system needs n >= 1")
    if isinstance(seeds, (SeedMode, str)):
        mode = SeedMode(seeds)
        if mode is SeedMode.FROM_RECURRENCE:
            seed_list = [s.zeros for s in solve_parabolic(model, n)]
        else:
            seed_list = independent_seeds(model, n)
    else:
        seed_list = [s.zeros if isinstance(s, ZeroConfiguration) else np.asarray(s, dtype=float) for s in seeds]
    with ThreadPoolExecutor(max_workers=min(_threads(), len(seed_list))) as pool:
        results = list(pool.map(lambda args: _solve_with_reseed(model, *args),
                                [(s, i) for i, s in enumerate(seed_list)]))
    configs = []
    for a in results:
        a = np.sort(a)
        if all(np.max(np.abs(a - c.zeros)) > DEDUP_TOL * max(1.0, np.max(np.abs(a))) for c in configs):
            configs.append(ZeroConfiguration(a, model, niven_residual(model, a)))
    return sorted(configs, key=lambda c: lambda_from_zeros(model, c))


def product_form_eval(model, cfg, x, y):
    """Phi(x, y) = prod_l (y^2/alpha_l + 2x - alpha_l)."""
    zeros = cfg.zeros if isinstance(cfg, ZeroConfiguration) else np.asarray(cfg, dtype=float)
    _check(zeros)
    y = np.asarray(y, dtype=float)
    if np.any(y == 0):
        raise DomainError("the product form is evaluated off the y = 0 axis")
    x = np.asarray(x, dtype=float)
    out = np.ones(np.broadcast(x, y).shape)
    for a in zeros:
        out = out * (y * y / a + 2 * x - a)
    return out if out.ndim else float(out)


def dressed_product(model, cfg, x, y):
    """exp(-w (x + k1/(4w^2))^2 - w y^2/2) y^(1/2+p) Phi(x, y)."""
    w, k1, p = model.omega, model.k1, model.p2
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = x + k1 / (4 * w * w)
    return np.exp(-w * z * z - 0.5 * w * y * y + (0.5 + p) * np.log(y)) * product_form_eval(model, cfg, x, y)


def r_operator_residual(model, cfg, x, y, h=1e-3):
    """Relative residual of R Phi = -2E Phi at the given points (fourth-order central differences).

    R Phi = Phi_xx + Phi_yy + [(1+2p)/y - 2wy] Phi_y - 4w (x + k1/(4w^2)) Phi_x
            + [-w(4+2p) + k1^2/(4w^2)] Phi.
    """
    w, k1, p = model.omega, model.k1, model.p2
    f = lambda u, v: product_form_eval(model, cfg, u, v)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    phi = f(x, y)
    fxx = (-f(x + 2 * h, y) + 16 * f(x + h, y) - 30 * phi + 16 * f(x - h, y) - f(x - 2 * h, y)) / (12 * h * h)
    fyy = (-f(x, y + 2 * h) + 16 * f(x, y + h) - 30 * phi + 16 * f(x, y - h) - f(x, y - 2 * h)) / (12 * h * h)
    fx = (-f(x + 2 * h, y) + 8 * f(x + h, y) - 8 * f(x - h, y) + f(x - 2 * h, y)) / (12 * h)
    fy = (-f(x, y + 2 * h) + 8 * f(x, y + h) - 8 * f(x, y - h) + f(x, y - 2 * h)) / (12 * h)
    energy = energy_level(model, len(cfg.zeros))
    terms = [fxx, fyy, ((1 + 2 * p) / y - 2 * w * y) * fy, -4 * w * (x + k1 / (4 * w * w)) * fx,
             (-w * (4 + 2 * p) + k1 * k1 / (4 * w * w)) * phi, 2 * energy * phi]
    res = sum(terms)
    scale = max(float(np.max(np.abs(t))) for t in terms)
    return float(np.max(np.abs(res)) / scale)
