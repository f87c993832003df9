import numpy as np
import pytest

from qes2d.analysis.oracles import (Axis, OracleSpec, oracle_energy_2d, oracle_lambda_1d, richardson_1d)
from qes2d.errors import ParameterDomainError
from qes2d.potentials import ModelV1, ModelV2, energy_level
from qes2d.qes import find_solution, solve_elliptic, solve_parabolic


def test_richardson_harmonic_oscillator():
    # -u'' + x^2 u on the half line with Dirichlet at 0: odd oscillator levels 3, 7, 11
    vals = richardson_1d(lambda x: x * x, 0.0, 12.0, OracleSpec(points_per_unit=100, count=3))
    assert np.allclose(vals, [3.0, 7.0, 11.0], atol=1e-6)


@pytest.mark.parametrize("k1", [-1.0, 0.0, 1.0])
def test_parabolic_axis_oracles(k1):
    m = ModelV1(1.0, k1, 1.5)
    for n in range(4):
        sols = solve_parabolic(m, n)
        e = energy_level(m, n)
        real = oracle_lambda_1d(m, "parabolic", e, Axis.REAL)
        imag = oracle_lambda_1d(m, "parabolic", e, Axis.IMAGINARY)
        for q1 in range(n + 1):
            lam = find_solution(sols, q1, n - q1).lam
            assert real[q1] == pytest.approx(lam, abs=1e-4)
            assert imag[n - q1] == pytest.approx(lam, abs=1e-4)


def test_elliptic_axis_oracles():
    m = ModelV2(1.0, 1.5, 2.5)
    d2 = 2.0
    for n in range(4):
        sols = solve_elliptic(m, n, d2)
        e = energy_level(m, n)
        ang = oracle_lambda_1d(m, "elliptic", e, Axis.REAL, d2=d2)
        rad = oracle_lambda_1d(m, "elliptic", e, Axis.IMAGINARY, d2=d2)
        for q1 in range(n + 1):
            lam = find_solution(sols, q1, n - q1).lam
            assert ang[q1] == pytest.approx(lam, abs=1e-4 * max(1.0, abs(lam)))
            assert rad[n - q1] == pytest.approx(lam, abs=1e-4 * max(1.0, abs(lam)))


def test_oracle_argument_checks():
    with pytest.raises(ParameterDomainError):
        oracle_lambda_1d(ModelV2(1.0, 1.5, 1.5), "parabolic", 3.0, Axis.REAL)
    with pytest.raises(ParameterDomainError):
        oracle_lambda_1d(ModelV2(1.0, 1.5, 1.5), "elliptic", 3.0, Axis.REAL)


@pytest.mark.parametrize("model", [ModelV1(1.0, 0.8, 1.5), ModelV2(1.0, 1.5, 0.75)])
def test_2d_energies(model):
    vals = oracle_energy_2d(model, count=6)
    expected = sorted(energy_level(model, n) for n in range(3) for _ in range(n + 1))
    assert np.allclose(vals, expected, atol=1e-3)
