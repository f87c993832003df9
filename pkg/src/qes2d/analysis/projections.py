"""Inner products, Gram matrices, normalization and the Cartesian-parabolic interbasis matrix.

Inner products are integrals over the physical region (V1: half-plane y > 0,
V2: quadrant) times the model multiplicity, so normalized states have unit
norm on the full plane and ``gram_matrix`` returns the identity.
"""
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..corefn import PolyFamily, PolyKind, eval_orthopoly
from ..errors import AccuracyError, ParameterDomainError
from ..potentials import CoordinateSystem, ModelV1, to_cartesian
from ..qes import Basis2D, assemble_wavefunction_2d, cartesian_state, solve_parabolic, ta_imag, ta_real, z_angular, z_radial
from .quadrature import QuadratureSpec, nodes_weights, singular_endpoint_spec

DEFAULT_SPEC = QuadratureSpec(target_tol=1e-10)
ENVELOPE_DROP = -40.0
MAX_REFINEMENTS = 4

_ANGULAR = (0.0, 0.5 * math.pi)


def _open_axes(system, model):
    """Per axis: 'angle' (fixed interval), 'half' (0, R] or 'line' (both signs)."""
    if system is CoordinateSystem.CARTESIAN:
        return ("line" if isinstance(model, ModelV1) else "half", "half")
    if system is CoordinateSystem.POLAR:
        return ("half", "angle")
    if system is CoordinateSystem.PARABOLIC:
        return ("half", "half")
    return ("half", "angle")


def _log_density(states, system, d, u1, u2):
    vals, jac = _values(states, system, d, u1, u2)
    with np.errstate(divide="ignore"):
        return np.log(np.sum(vals ** 2, axis=0) * jac)


def integration_box(states, system, d=None, drop=ENVELOPE_DROP):
    """Truncated integration box in native coordinates, from a scan of the log density envelope."""
    model = states[0].model
    kinds = _open_axes(system, model)
    probe = np.linspace(0.02, 1.55, 24)
    box = []
    for axis, kind in enumerate(kinds):
        if kind == "angle":
            box.append(_ANGULAR)
            continue
        other_kind = kinds[1 - axis]
        if other_kind == "angle":
            other = probe
        else:
            other = np.concatenate([np.linspace(0.02, 1.0, 8), np.linspace(1.2, 8.0, 18)])
        sides = (1.0, -1.0) if kind == "line" else (1.0,)
        ends = []
        for side in sides:
            r, peak = 0.05, -np.inf
            while True:
                coords = [None, None]
                coords[axis] = np.full_like(other, side * r)
                coords[1 - axis] = other if other_kind != "line" else np.concatenate([other, -other])
                if other_kind == "line":
                    coords[axis] = np.full_like(coords[1 - axis], side * r)
                val = float(np.max(_log_density(states, system, d, coords[0], coords[1])))
                peak = max(peak, val)
                if r > 1.0 and val < peak + drop:
                    break
                r += 0.05 * max(1.0, r)
                if r > 1e3:
                    raise AccuracyError("wavefunction envelope does not decay")
            ends.append(side * r)
        box.append((min(ends), max(ends)) if kind == "line" else (0.0, ends[0]))
    return box


def spec_for(model, spec):
    """Switch to tanh-sinh when a branch exponent 1/2 + p lies below 1/2 (integrable endpoint cusp)."""
    ps = [model.p2] + ([model.p1] if hasattr(model, "p1") else [])
    return singular_endpoint_spec(spec) if min(ps) < 0 else spec


def _grid(spec, box):
    x, wx, wxc = nodes_weights(spec, *box[0])
    y, wy, wyc = nodes_weights(spec, *box[1])
    X, Y = np.meshgrid(x, y, indexing="ij")
    return X, Y, np.outer(wx, wy).ravel(), np.outer(wxc, wyc).ravel()


def _values(states, system, d, X, Y):
    xs, ys, jac = to_cartesian(system, X, Y, d)
    rows = []
    for s in states:
        v = s(X, Y) if s.system is system else s.at_cartesian(xs, ys)
        rows.append(np.asarray(v, dtype=float).ravel())
    return np.array(rows), np.abs(np.asarray(jac, dtype=float)).ravel()


def overlap_matrix(left, right, spec=DEFAULT_SPEC, system=None):
    """M[i, j] = multiplicity * integral of left_i right_j over the physical region.

    Integration runs in ``system`` (default: the native system of left[0]).
    Returns (matrix, error estimate).
    """
    left, right = list(left), list(right)
    ref = left[0]
    system = CoordinateSystem(system) if system is not None else ref.system
    d = next((s.d for s in left + right if s.d is not None), None)
    mult = ref.model.multiplicity
    box = integration_box(left + right, system, d)
    spec = spec_for(ref.model, spec)
    err = np.inf
    for _ in range(MAX_REFINEMENTS + 1):
        X, Y, w, wc = _grid(spec, box)
        a, jac = _values(left, system, d, X, Y)
        b, _ = _values(right, system, d, X, Y)
        m_f = mult * (a * (w * jac)) @ b.T
        m_c = mult * (a * (wc * jac)) @ b.T
        err = float(np.max(np.abs(m_f - m_c)))
        if err <= spec.target_tol * max(1.0, float(np.max(np.abs(m_f)))):
            return m_f, err
        spec = spec.refined()
    raise AccuracyError(f"overlap quadrature error {err:.3g} above {spec.target_tol:.3g}")


def inner_product(a, b, spec=DEFAULT_SPEC, system=None):
    m, err = overlap_matrix([a], [b], spec, system)
    return float(m[0, 0]), err


def gram_matrix(states, spec=DEFAULT_SPEC):
    """Pairwise inner products of states in the native system of the first one."""
    states = list(states)
    if len({s.model for s in states}) != 1:
        raise ParameterDomainError("gram_matrix needs states of one model")
    g, _ = overlap_matrix(states, states, spec)
    return 0.5 * (g + g.T)


def normalization_constant(state, spec=DEFAULT_SPEC):
    """C > 0 with C^2 * integral |raw|^2 = 1/multiplicity over the physical region."""
    raw = state.with_normalization(1.0)
    norm, _ = inner_product(raw, raw, spec)
    return 1.0 / math.sqrt(norm)


def normalize(state, spec=None):
    return state.with_normalization(normalization_constant(state, spec or DEFAULT_SPEC))


def _moment(j, kappa, omega, p, tol=1e-16, max_terms=400):
    """integral_0^inf xi^(1+2p+2j) exp(-w xi^4/2 - kappa xi^2/(2w)) d xi as a series in kappa."""
    x = -kappa / (2 * omega)
    total, biggest = 0.0, 0.0
    for m in range(max_terms):
        a = 0.5 * (j + p + m + 1)
        t = 0.25 * x ** m / math.factorial(m) * math.exp(a * math.log(2 / omega) + math.lgamma(a))
        total += t
        biggest = max(biggest, abs(t))
        if x == 0 or (m > 2 and abs(t) < tol * biggest):
            break
    return total


def parabolic_normalization_series(model, sol):
    """C of the parabolic state from the moment series: 1/C^2 = 2 (X1 Y0 + X0 Y1).

    X_a = sum A_s A_s' I(s+s'+a, k1), Y_a = sum (-1)^(t+t') A_t A_t' I(t+t'+a, -k1),
    with I the gauge moments of ``_moment``.
    """
    w, k1, p = model.omega, model.k1, model.p2
    a = np.asarray(sol.coeffs, dtype=float)
    n = len(a) - 1
    sign = (-1.0) ** np.arange(n + 1)

    def block(coef, kappa, shift):
        return sum(coef[s] * coef[t] * _moment(s + t + shift, kappa, w, p) for s in range(n + 1) for t in range(n + 1))

    x0, x1 = block(a, k1, 0), block(a, k1, 1)
    y0, y1 = block(a * sign, -k1, 0), block(a * sign, -k1, 1)
    return 1.0 / math.sqrt(2.0 * (x1 * y0 + x0 * y1))


def _fixed_1d(f, box, spec):
    err = np.inf
    for _ in range(MAX_REFINEMENTS + 1):
        x, w, wc = nodes_weights(spec, *box)
        v = f(x)
        fine, coarse = v @ w, v @ wc
        err = float(np.max(np.abs(fine - coarse)))
        if err <= spec.target_tol * max(1.0, float(np.max(np.abs(fine)))):
            return fine
        spec = spec.refined()
    raise AccuracyError(f"1D quadrature error {err:.3g} above {spec.target_tol:.3g}")


def _radius_1d(funcs, drop=ENVELOPE_DROP):
    r, peak = 0.05, -np.inf
    while True:
        with np.errstate(divide="ignore"):
            val = max(float(np.log(np.abs(f(np.array([r])))[0] + 1e-320)) for f in funcs)
        peak = max(peak, val)
        if r > 1.0 and val < peak + drop / 2:
            return r
        r += 0.02 * max(1.0, r)
        if r > 1e3:
            raise AccuracyError("1D envelope does not decay")


def double_orthogonality(model, solutions, axis, spec=DEFAULT_SPEC):
    """Unweighted 1D overlap matrix of the factor functions of one level along one axis.

    Parabolic: axis 'real' integrates Ta(xi) over (0, inf), 'imaginary' integrates
    Ta(i eta) over (0, inf). Elliptic: 'real' is Z(mu) over (0, pi/2), 'imaginary'
    is Z(i nu) over (0, inf). Entries are scaled by the diagonal so the result has
    unit diagonal; off-diagonal entries vanish by the orthogonality relations.
    """
    elliptic = solutions[0].d2 is not None
    if elliptic:
        fn = z_angular if axis == "real" else z_radial
    else:
        fn = ta_real if axis == "real" else ta_imag
    funcs = [lambda x, s=s: fn(s, model, x) for s in solutions]
    box = _ANGULAR if elliptic and axis == "real" else (0.0, _radius_1d(funcs))

    def stacked(x):
        v = np.array([f(x) for f in funcs])
        return np.einsum("ik,jk->ijk", v, v)

    m = _fixed_1d(stacked, box, spec_for(model, spec))
    dg = np.sqrt(np.abs(np.diag(m)))
    return m / np.outer(dg, dg)


class InterbasisMethod(str, Enum):
    PROJECTION = "projection"
    CLOSED_SUM = "closed-sum"


@dataclass
class InterbasisMatrix:
    """W[q, n1]: expansion of the parabolic state q (ascending lambda) in Cartesian states (n1, n - n1)."""

    n: int
    entries: np.ndarray
    method: InterbasisMethod
    labels: list = field(default_factory=list)
    report: dict = field(default_factory=dict)

    def orthonormality_defect(self):
        w = self.entries
        return float(np.max(np.abs(w @ w.T - np.eye(len(w)))))


def _parabolic_states(model, n, spec):
    sols = solve_parabolic(model, n)
    states = [assemble_wavefunction_2d(model, Basis2D.PARABOLIC, n, *s.node_split, normalize=True, spec=spec)
              for s in sols]
    return sols, states


def _cartesian_tail(model, n1, n2):
    """psi_n1 psi_n2 / y^(1/2+p) at y -> 0: the x factor normalization and N2 L_n2^p(0)."""
    w, p = model.omega, model.p2
    n1_norm = (2 * w / math.pi) ** 0.25 / math.sqrt(2.0 ** n1 * math.factorial(n1))
    n2_norm = math.exp(0.5 * ((1 + p) * math.log(w) + math.lgamma(n2 + 1) - math.lgamma(n2 + p + 1)))
    lag0 = eval_orthopoly(PolyFamily(PolyKind.LAGUERRE, p), n2, 0.0)
    return n1_norm, n2_norm * lag0


def closed_sum_entry(model, sol, c_par, n1):
    """W from matching both sides of the expansion on the x axis (k1 = 0).

    W = C / (N1 N2 L_n2^p(0) n1!) * sum_{s >= n1, s = n1 mod 2} A_s (2w)^(-s/2) s! / ((s - n1)/2)!
    """
    w = model.omega
    n = sol.n
    n1_norm, tail = _cartesian_tail(model, n1, n - n1)
    total = 0.0
    for s in range(n1, n + 1, 2):
        total += sol.coeffs[s] * math.exp(-0.5 * s * math.log(2 * w) + math.lgamma(s + 1) - math.lgamma((s - n1) // 2 + 1))
    return c_par * total / (n1_norm * tail * math.factorial(n1))


def printed_closed_sum_entry(model, sol, c_par, n1):
    """The published closed form with its two-branch brace selected by the parity of n1."""
    w, p, n = model.omega, model.p2, sol.n
    n2 = n - n1
    pref = c_par * (math.pi / (2 * w)) ** 0.25 * math.sqrt(
        math.gamma(n2 + 1 + p) / (2 * w ** (1 + n1 + p) * math.factorial(n1) * math.factorial(n2)))
    a = sol.coeffs
    total = 0.0
    if n1 % 2 == 0:
        h = n1 // 2
        for s in range(0, n - h + 1):
            if s + h <= n:
                total += (1 + (-1) ** (s + h)) * a[s + h] * math.gamma(2 * s + n1 + 1) / ((2 * w) ** s * math.factorial(s))
    else:
        h = (n1 + 1) // 2
        for s in range(0, n - h + 1):
            if s + h <= n:
                total += (1 + (-1) ** (s + (n1 - 1) // 2)) * a[s + h] * math.gamma(2 * s + n1 + 2) / (
                    (2 * w) ** s * math.gamma(s + 1.5))
    return pref * total


def interbasis_matrix(model, n, method=InterbasisMethod.PROJECTION, spec=DEFAULT_SPEC, compare=True):
    """Cartesian-parabolic expansion coefficients at level n for k1 = 0.

    ClosedSum is always checked against Projection when ``compare`` is set; the
    disagreement (and that of the published closed form) goes into ``report``.
    """
    if not isinstance(model, ModelV1) or model.k1 != 0:
        raise ParameterDomainError("the interbasis expansion is implemented for V1 with k1 = 0")
    method = InterbasisMethod(method)
    sols, par = _parabolic_states(model, n, spec)
    cart = [cartesian_state(model, n1, n - n1) for n1 in range(n + 1)]
    labels = [(n1, n - n1) for n1 in range(n + 1)]
    proj = None
    if method is InterbasisMethod.PROJECTION or compare:
        proj, _ = overlap_matrix(par, cart, spec, CoordinateSystem.PARABOLIC)
    closed = np.array([[closed_sum_entry(model, s, st.normalization, n1) for n1 in range(n + 1)]
                       for s, st in zip(sols, par)])
    printed = np.array([[printed_closed_sum_entry(model, s, st.normalization, n1) for n1 in range(n + 1)]
                        for s, st in zip(sols, par)])
    entries = proj if method is InterbasisMethod.PROJECTION else closed
    report = {}
    if proj is not None:
        report = {"closed_sum_vs_projection": float(np.max(np.abs(closed - proj))),
                  "printed_vs_projection": float(np.max(np.abs(printed - proj))),
                  "agree": bool(np.max(np.abs(closed - proj)) <= 1e-4)}
    return InterbasisMatrix(n, entries, method, labels, report)
