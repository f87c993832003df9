import math

import numpy as np
import pytest

from qes2d.analysis.oracles import Axis, factor_residual, oracle_sextic, schrodinger_residual
from qes2d.errors import DomainError, LabelingError, ParameterDomainError, RealnessError
from qes2d.niven import lambda_from_zeros, solve_zero_system
from qes2d.potentials import ModelV1, ModelV2, Sign, energy_level
from qes2d.qes import (Basis2D, LimitKind, elliptic_lambdas, assemble_wavefunction_2d, cartesian_state, elliptic_symmetry_residual,
                       find_solution, gauge_eval, hausdorff, limit_check, ordering_consistent, polar_limit_slope,
                       polar_state, polynomial_zeros, sextic_energy_from_zeros, sextic_qes_parameters,
                       solve_elliptic, solve_parabolic, ta_imag, ta_real)

RNG = np.random.default_rng(11)


def test_polynomial_zeros():
    assert np.allclose(polynomial_zeros([2.0, -3.0, 1.0]), [1.0, 2.0])
    assert len(polynomial_zeros([1.0])) == 0
    with pytest.raises(RealnessError):
        polynomial_zeros([1.0, 0.0, 1.0])


def test_n1_positive_root_state():
    # lambda = +sqrt(40): A_1 = -sqrt(40)/(4 * 2.5), one zero at z = +1.58 on the real axis
    sols = solve_parabolic(ModelV1(1.0, 0.0, 1.5), 1)
    top = sols[1]
    assert top.lam == pytest.approx(math.sqrt(40), rel=1e-14)
    assert top.coeffs == pytest.approx([1.0, -math.sqrt(40) / 10], rel=1e-14)
    assert top.zeros == pytest.approx([10 / math.sqrt(40)], rel=1e-13)
    assert top.node_split == (1, 0)
    assert sols[0].node_split == (0, 1)


@pytest.mark.parametrize("k1", [-1.0, 0.0, 1.0, 3.0])
def test_parabolic_labels_cover_all_splits(k1):
    m = ModelV1(1.0, k1, 1.5)
    for n in range(1, 7):
        sols = solve_parabolic(m, n)
        assert sorted(s.node_split for s in sols) == [(j, n - j) for j in range(n + 1)]
        assert ordering_consistent(sols)


@pytest.mark.parametrize("d2", [0.5, 2.0, 8.0])
def test_elliptic_labels_cover_all_splits(d2):
    m = ModelV2(1.0, 1.5, 0.25, Sign.PLUS, Sign.MINUS)
    for n in range(1, 6):
        sols = solve_elliptic(m, n, d2)
        assert sorted(s.node_split for s in sols) == [(j, n - j) for j in range(n + 1)]
        assert ordering_consistent(sols)


def test_find_solution_errors():
    sols = solve_parabolic(ModelV1(1.0, 0.0, 1.5), 2)
    assert find_solution(sols, 1, 1).node_split == (1, 1)
    with pytest.raises(LabelingError):
        find_solution(sols, 3, 0)
    with pytest.raises(LabelingError):
        assemble_wavefunction_2d(ModelV1(1.0, 0.0, 1.5), "parabolic", 2, 2, 1)
    with pytest.raises(ParameterDomainError):
        solve_elliptic(ModelV2(1.0, 1.5, 1.5), 2, -1.0)


def test_gauge_eval_axes():
    m = ModelV1(1.0, 0.5, 1.5)
    sol = solve_parabolic(m, 2)[1]
    assert gauge_eval(sol, m, 0.7) == pytest.approx(float(ta_real(sol, m, 0.7)))
    assert gauge_eval(sol, m, 0.7j) == pytest.approx(float(ta_imag(sol, m, 0.7)))
    with pytest.raises(DomainError):
        gauge_eval(sol, m, 0.3 + 0.7j)


def test_node_counts_on_axes():
    m = ModelV1(1.0, 1.0, 1.5)
    xs = np.linspace(0.01, 6, 4000)
    for sol in solve_parabolic(m, 4):
        q1, q2 = sol.node_split
        assert np.sum(np.diff(np.sign(ta_real(sol, m, xs))) != 0) == q1
        assert np.sum(np.diff(np.sign(ta_imag(sol, m, xs))) != 0) == q2


@pytest.mark.parametrize("k1", [-1.0, 0.0, 1.0])
def test_parabolic_factor_residuals(k1):
    m = ModelV1(1.0, k1, 1.5)
    pts = RNG.uniform(0.3, 2.0, 50)
    for n in range(4):
        for sol in solve_parabolic(m, n):
            assert factor_residual(sol, m, Axis.REAL, pts) < 1e-5
            assert factor_residual(sol, m, Axis.IMAGINARY, pts) < 1e-5


def test_elliptic_factor_residuals():
    m = ModelV2(1.0, 1.5, 2.5)
    mu = RNG.uniform(0.1, 1.4, 50)
    nu = RNG.uniform(0.1, 2.0, 50)
    for n in range(4):
        for sol in solve_elliptic(m, n, 2.0):
            assert factor_residual(sol, m, Axis.REAL, mu) < 1e-5
            assert factor_residual(sol, m, Axis.IMAGINARY, nu) < 1e-5


def test_schrodinger_residuals():
    v1 = ModelV1(1.0, 0.5, 1.5)
    v2 = ModelV2(1.0, 1.5, 2.5)
    x = RNG.uniform(-1.5, 1.5, 50)
    y = RNG.uniform(0.3, 2.0, 50)
    xq = RNG.uniform(0.3, 2.0, 50)
    states = [assemble_wavefunction_2d(v1, "parabolic", 2, 1, 1), cartesian_state(v1, 1, 2),
              cartesian_state(v2, 2, 1), polar_state(v2, 1, 1),
              assemble_wavefunction_2d(v2, "elliptic", 3, 1, 2, d2=2.0)]
    for s in states:
        xx = x if s.model is v1 else xq
        assert schrodinger_residual(s, xx, y) < 1e-5


def test_wavefunction_coordinate_consistency():
    m = ModelV2(1.0, 1.5, 2.5)
    s = assemble_wavefunction_2d(m, Basis2D.ELLIPTIC, 2, 1, 1, d2=2.0)
    nu, mu = 0.6, 0.9
    x, y, _ = s.to_cartesian(nu, mu)
    assert s.at_cartesian(x, y) == pytest.approx(s(nu, mu), rel=1e-10)
    assert s.energy == energy_level(m, 2)


def test_hausdorff():
    assert hausdorff([0.0, 1.0], [1.0, 0.0]) == 0.0
    assert hausdorff([0.0], [0.0, 2.0]) == 2.0


def test_elliptic_symmetry():
    m = ModelV2(0.8, 1.5, 2.5)
    for n in range(6):
        for d2 in (0.5, 2.0, 8.0):
            assert elliptic_symmetry_residual(m, n, d2) <= 1e-8
    assert elliptic_symmetry_residual(m, 2, 2.0, printed=True) > 1.0


def test_polar_limit():
    m = ModelV2(1.0, 1.5, 2.5)
    d2 = np.array([1e-3, 2e-3, 4e-3])
    for n in range(4):
        for q in range(n + 1):
            rep = limit_check(m, n, q, LimitKind.POLAR_D0, d2)
            assert rep.converged, rep
            # fitted slope against perturbation theory
            assert rep.fit["slope"] == pytest.approx(rep.predicted["slope"], abs=1e-3)


def test_polar_limit_slope_against_finite_difference():
    m = ModelV2(1.2, 0.25, 1.5, Sign.MINUS, Sign.PLUS)
    for n, q in [(2, 0), (2, 1), (3, 2)]:
        h = 1e-5
        fd = (elliptic_lambdas(m, n, h)[q] - elliptic_lambdas(m, n, -h)[q]) / (2 * h)
        assert polar_limit_slope(m, n, n - q) == pytest.approx(fd, rel=1e-5, abs=1e-8)


def test_cartesian_limit():
    m = ModelV2(1.0, 1.5, 2.5)
    d2 = np.array([200.0, 300.0, 400.0])
    for n in range(4):
        for q in range(n + 1):
            rep = limit_check(m, n, q, LimitKind.CARTESIAN_DINF, d2)
            assert rep.converged
            assert rep.fit["slope"] == pytest.approx(rep.predicted["slope"], abs=0.05)


def test_sextic_parameters_and_oracle():
    m = ModelV1(1.0, 1.0, 1.5)
    for n in range(3):
        params = sextic_qes_parameters(m, n)
        assert params.beta == pytest.approx(0.25) and params.delta == pytest.approx(1.25)
        lam = [s.lam for s in solve_parabolic(m, n)]
        vals = oracle_sextic(params)
        assert np.allclose(vals[:n + 1], lam, atol=1e-3)


def test_sextic_energy_from_zeros():
    m = ModelV1(1.0, 1.0, 1.5)
    params = sextic_qes_parameters(m, 3)
    for cfg in solve_zero_system(m, 3):
        assert sextic_energy_from_zeros(params, cfg.zeros) == pytest.approx(lambda_from_zeros(m, cfg) / 2)
