import math

import numpy as np
import pytest
from scipy import integrate

from qes2d.analysis.projections import (InterbasisMethod, double_orthogonality, gram_matrix, inner_product,
                                        integration_box, interbasis_matrix, normalization_constant,
                                        parabolic_normalization_series)
from qes2d.errors import ParameterDomainError
from qes2d.potentials import CoordinateSystem, ModelV1, ModelV2, Sign
from qes2d.qes import assemble_wavefunction_2d, cartesian_state, polar_state, solve_elliptic, solve_parabolic

V1 = ModelV1(1.0, 0.7, 1.5)
V2 = ModelV2(1.0, 1.5, 2.5)


def off_identity(g):
    return float(np.max(np.abs(g - np.eye(len(g)))))


def level_states(model, basis, n, d2=None):
    if basis == "cartesian":
        return [cartesian_state(model, n1, n - n1) for n1 in range(n + 1)]
    if basis == "polar":
        return [polar_state(model, n - m, m) for m in range(n + 1)]
    return [assemble_wavefunction_2d(model, basis, n, q, n - q, d2=d2, normalize=True) for q in range(n + 1)]


def test_normalization_against_scipy():
    s = assemble_wavefunction_2d(V1, "parabolic", 2, 1, 1)
    c = normalization_constant(s)
    val, _ = integrate.dblquad(lambda eta, xi: s(xi, eta) ** 2 * (xi * xi + eta * eta), 0, 6, 0, 6, epsabs=1e-13)
    assert c == pytest.approx(1.0 / math.sqrt(2 * val), rel=1e-8)


@pytest.mark.parametrize("k1", [-1.0, 0.0, 0.7])
def test_normalization_series(k1):
    m = ModelV1(1.3, k1, 1.5)
    for n in range(4):
        for sol in solve_parabolic(m, n):
            s = assemble_wavefunction_2d(m, "parabolic", n, *sol.node_split)
            assert parabolic_normalization_series(m, sol) == pytest.approx(normalization_constant(s), rel=1e-9)


def test_cartesian_states_are_normalized():
    for model in (V1, V2):
        for n1, n2 in [(0, 0), (2, 1)]:
            val, _ = inner_product(cartesian_state(model, n1, n2), cartesian_state(model, n1, n2))
            assert val == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("model,basis,d2", [
    (V1, "cartesian", None), (V2, "cartesian", None), (V2, "polar", None), (V1, "parabolic", None),
    (V2, "elliptic", 2.0), (ModelV2(1.0, 1.5, 0.25, Sign.PLUS, Sign.MINUS), "polar", None),
    (ModelV2(0.8, 0.25, 1.5, Sign.MINUS, Sign.PLUS), "elliptic", 3.0),
    (ModelV1(1.0, -0.5, 0.3, Sign.MINUS), "parabolic", None)])
def test_gram_identity(model, basis, d2):
    for n in range(5):
        assert off_identity(gram_matrix(level_states(model, basis, n, d2))) < 1e-8


def test_gram_across_levels():
    states = [s for n in range(3) for s in level_states(V1, "parabolic", n)]
    assert off_identity(gram_matrix(states)) < 1e-8


def test_integration_box_decays():
    s = cartesian_state(V2, 1, 1)
    box = integration_box([s], CoordinateSystem.CARTESIAN)
    assert box[0][0] == 0.0 and 5.0 < box[0][1] < 15.0


@pytest.mark.parametrize("axis", ["real", "imaginary"])
def test_double_orthogonality(axis):
    for model, sols in [(V1, lambda n: solve_parabolic(V1, n)), (V2, lambda n: solve_elliptic(V2, n, 2.0))]:
        for n in range(1, 5):
            assert off_identity(double_orthogonality(model, sols(n), axis)) < 1e-8


def test_interbasis_projection_and_closed_sum():
    m = ModelV1(1.0, 0.0, 1.5)
    for n in range(5):
        w = interbasis_matrix(m, n)
        assert w.orthonormality_defect() < 1e-8
        assert w.report["agree"] and w.report["closed_sum_vs_projection"] < 1e-8
        closed = interbasis_matrix(m, n, InterbasisMethod.CLOSED_SUM, compare=False)
        assert np.allclose(closed.entries, w.entries, atol=1e-8)


def test_printed_closed_sum_disagrees():
    w = interbasis_matrix(ModelV1(1.0, 0.0, 1.5), 0)
    assert w.entries[0, 0] == pytest.approx(1.0, abs=1e-9)
    assert w.report["printed_vs_projection"] > 0.1


def test_interbasis_pointwise_reconstruction():
    m = ModelV1(1.0, 0.0, 0.3, Sign.MINUS)
    rng = np.random.default_rng(5)
    x, y = rng.uniform(-2, 2, 20), rng.uniform(0.1, 2.5, 20)
    for n in range(5):
        w = interbasis_matrix(m, n)
        par = level_states(m, "parabolic", n)
        cart = [cartesian_state(m, n1, n - n1) for n1 in range(n + 1)]
        for q, state in enumerate(par):
            rebuilt = sum(w.entries[q, j] * c.at_cartesian(x, y) for j, c in enumerate(cart))
            assert np.max(np.abs(rebuilt - state.at_cartesian(x, y))) < 1e-7


def test_interbasis_requires_k1_zero():
    with pytest.raises(ParameterDomainError):
        interbasis_matrix(V1, 2)
