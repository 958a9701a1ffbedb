import numpy as np
import pytest

from kobdyn import ball, functional as fe, maps, semigroups as sg
from kobdyn.errors import NotHyperbolic


def test_valiron_closed_form_on_the_siegel_side():
    # g = (2 z1 + i/2): lambda_f^n (g^n z)_1 = z1 + i/2 (1 - 2^-n) -> z1 + i/2
    g = maps.affine_siegel([[2.0]], [0.5j])
    sol = fe.valiron_solve(g)
    Z = sol.samples
    assert sol.lambda_f == 0.5 and sol.lambda_source == "exact"
    assert np.abs(sol.theta(Z) - (Z[:, 0] + 0.5j)).max() < 1e-12
    assert sol.residual_sup < 1e-10
    assert sol.convergence_trace["min_imag"] > 0


def test_valiron_closed_form_through_cayley():
    f = maps.transport(maps.affine_siegel(np.diag([2.0, np.sqrt(2)]), [1j, 0]), "ball")
    sol = fe.valiron_solve(f, samples=300)
    Z = sol.samples
    assert np.abs(sol.theta(Z) - (ball.cayley(Z)[:, 0] + 1j)).max() < 1e-10
    assert sol.residual_sup < 1e-10
    assert fe.valiron_klimit(sol)["monotone"]


def test_valiron_does_not_touch_its_input():
    g = maps.affine_siegel([[2.0]], [0])
    Z = np.array([[1j], [2 + 1j]])
    before = Z.copy()
    fe.valiron_solve(g, sample_set=Z)
    assert np.array_equal(Z, before)


def test_abel_values_and_strip():
    g = maps.affine_siegel([[2.0]], [0])
    ab = fe.abel_solve(g, fe.valiron_solve(g))
    # Theta = z1, so theta(i) = log(i) / log 2
    assert ab(np.array([[1j]]))[0] == pytest.approx(0.5j * np.pi / np.log(2), abs=1e-14)
    assert ab.strip_height == pytest.approx(np.pi / np.log(2))
    assert ab.residual_sup < 1e-10
    assert not ab.surjective


def test_abel_values_lie_in_the_strip():
    f = maps.transport(maps.affine_siegel(np.diag([4.0, 2.0]), [1j, 0]), "ball")
    sol = fe.valiron_solve(f, samples=300)
    ab = fe.abel_solve(f, sol)
    vals = ab(sol.samples)
    assert np.all((vals.imag > 0) & (vals.imag < ab.strip_height))
    assert ab.residual_sup < 1e-10


def test_parabolic_maps_are_refused():
    with pytest.raises(NotHyperbolic):
        fe.valiron_solve(maps.affine_siegel([[1.0]], [1.0]))
    sol = fe.valiron_solve(maps.affine_siegel([[2.0]], [0]))
    sol.lambda_f = 1.0
    with pytest.raises(NotHyperbolic):
        fe.abel_solve(None, sol)


def test_one_valiron_function_serves_the_whole_flow():
    phi = sg.Semigroup.affine_siegel_flow(1.0, 0.3j, omega=[0.7], mu=[-0.2 + 1j])
    out = fe.semigroup_valiron(phi, samples=100)
    assert out["rate"] == pytest.approx(1.0, abs=1e-8)
    assert out["residual_sup"] < 1e-10
