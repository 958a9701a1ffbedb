import warnings

import numpy as np
import pytest

from kobdyn import ball, invariants as inv, lft
from kobdyn.errors import ConstraintViolated, NonzeroCInCaseTwo

S2 = np.sqrt(2)


def hyp(lam, b, D=(), A=None, c=(), **kw):
    return lft.validate_hyperbolic_form(lft.HyperbolicLFTForm.build(lam, b, D, A, c), **kw)


def par(**kw):
    return lft.validate_parabolic_form(lft.ParabolicLFTForm.build(**kw))


def block_form(p, q=3, b=0.9j):
    """q = 3 form with a p-dimensional hyperbolic block."""
    D = [S2 * np.exp(1j * k) for k in range(p - 1)]
    n = q - p
    A = 0.5 * np.eye(n) + 0.2j * np.eye(n, k=1)
    return hyp(2.0, b, D, A, 0.3 * np.ones(n))


@pytest.mark.parametrize("args, name", [
    ((1.0, 0.5j), "lambda>1"),
    ((2.0, 0.1 + 0.5j), "b_pure_imaginary"),
    ((2.0, 0.5j, [1.0]), "|D_ii|=sqrt(lambda)"),
    ((2.0, 0.5j, [], [[S2]], [0]), "Q_positive_definite"),
    ((2.0, 0.01j, [], [[1.0]], [0.5]), "|c|^2+<Q^-1A*c,A*c><=Im b"),
])
def test_hyperbolic_constraints(args, name):
    with pytest.raises(ConstraintViolated) as exc:
        hyp(*args)
    assert exc.value.name == name


def test_upper_bound_is_soft_unless_strict():
    with pytest.warns(UserWarning):
        F = hyp(2.0, 1.5j)
    assert not F.checks["upper_bound_holds"]
    with pytest.raises(ConstraintViolated):
        hyp(2.0, 1.5j, strict_upper=True)


def test_lower_bound_is_the_self_map_condition():
    # exactly on the bound: g(H^q) touches the boundary but stays in the closure
    A, c = np.array([[1.0]]), np.array([0.5])
    lower = 0.25 + 0.25 / (2.0 - 1.0)
    F = hyp(2.0, 1j * lower, [], A, c)
    g = lft.hyperbolic_map(F)
    Z = ball.cayley(np.random.default_rng(0).uniform(-0.5, 0.5, (500, 2)).astype(complex))
    assert ball.siegel_defect(g(Z)).min() > -1e-12


def test_apply_evaluates_the_affine_map():
    F = hyp(2.0, 0.5j, [S2])
    # outside points are fine: the form is affine on all of C^q
    assert np.allclose(lft.apply_hyperbolic_form(F, [-1j, 0]), [-1.5j, 0])
    assert np.allclose(lft.apply_hyperbolic_form(F, [1j, 0.1]), [2.5j, 0.1 * S2])


@pytest.mark.parametrize("p", [1, 2, 3])
def test_canonical_semi_model_blocks(p):
    F = block_form(p)
    rep = lft.canonical_semi_model_hyperbolic(F)
    assert rep.base_dimension == p
    assert rep.intertwining_residual <= 1e-13
    g = lft.hyperbolic_map(F)
    assert inv.canonical_dimension(g, base=np.array([2j, 0.1, 0.1])).rank == p
    assert abs(inv.divergence_rate(rep.tau_model).c - inv.divergence_rate(g).c) < 1e-4
    _, _, dom = lft.hyperbolic_model_domain(F)
    assert dom["member_failures"] == 0 and dom["non_member_entries"] == 0


def test_model_domain_predicate_is_a_shifted_siegel_domain():
    with pytest.warns(UserWarning):
        F = hyp(2.0, 1j, [S2], [[1.0]], [0])
    _, contains, _ = lft.hyperbolic_model_domain(F, check=False)
    # Im b / (lam - 1) = 1: points of H^q and points down to Im z1 = -1 belong
    assert contains(np.array([[-0.5j, 0, 7]]))[0]
    assert not contains(np.array([[-2j, 0, 0]]))[0]
    assert lft.forward_entry_time(lft.hyperbolic_map(F), [[-0.5j, 0, 7], [-2j, 0, 0]]).tolist()[1] == -1


def test_tau_model_is_conjugate_to_tau():
    F = hyp(3.0, 1j, [np.sqrt(3)])
    rep = lft.canonical_semi_model_hyperbolic(F)
    shift = np.array([1j * F.axis_shift, 0])
    z = np.array([2j, 0.3])
    assert np.allclose(rep.tau(z) + shift, rep.tau_model(z + shift))


# ---------------------------------------------------------------- parabolic

def test_parabolic_case_one_is_trivial():
    F = par(b=1j)
    assert lft.parabolic_case(F) == "i"
    rep = lft.parabolic_model_dichotomy(F)
    assert rep.tau_kind == "trivial" and rep.base_dimension == 0


def test_parabolic_case_two_model():
    F = par(a=[1.0], b=1j)
    assert lft.parabolic_case(F) == "ii"
    rep = lft.parabolic_model_dichotomy(F)
    assert rep.tau_kind == "parabolic" and rep.base_dimension == 2
    assert rep.intertwining_residual <= 1e-13


def test_parabolic_case_two_with_extra_blocks():
    F = par(a=[1.0], b=1j + 0.5, D=[np.exp(0.3j)], c=[0], A=[[0.6]])
    rep = lft.parabolic_model_dichotomy(F)
    assert rep.base_dimension == F.p == 3
    assert rep.intertwining_residual <= 1e-13
    _, _, dom = lft.parabolic_model_domain(F)
    assert dom["member_failures"] == 0 and dom["non_member_entries"] == 0


def test_case_two_forbids_c():
    with pytest.raises(NonzeroCInCaseTwo):
        par(a=[1.0], b=1j, c=[0.1], A=[[0.5]])


def test_case_one_domain_oracle():
    F = par(a=[1.0], b=1.5j, c=[0.3], A=[[0.6]])
    _, _, dom = lft.parabolic_model_domain(F)
    assert dom["member_failures"] == 0 and dom["non_member_entries"] == 0


def test_parabolic_steps_follow_the_dichotomy():
    # case ii: g is an automorphism on the first p coordinates, so the step is k(z, g z)
    F = par(a=[1.0], b=1j)
    g = lft.parabolic_map(F)
    z = np.array([2j, 0.1])
    step = inv.hyperbolic_step(g, z).limit
    assert step == pytest.approx(ball.siegel_distance(z, g(z)), rel=1e-10)
    assert step > 0
    case_one = lft.parabolic_map(par(a=[1.0], b=1.5j, c=[0.3], A=[[0.6]]))
    assert inv.hyperbolic_step(case_one, np.array([2j, 0.1, 0.3])).limit < 1e-4


def test_parabolic_constraints():
    with pytest.raises(ConstraintViolated):
        par(a=[1.0], b=0.5j)  # Im b < |a|^2
    with pytest.raises(ConstraintViolated):
        par(b=1j, D=[0.5])


def test_forms_serialise():
    assert block_form(2).as_dict()["p"] == 2
    assert par(a=[1.0], b=1j).as_dict()["kind"] == "lft_parabolic"
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        block_form(3)
