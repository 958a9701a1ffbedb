import numpy as np
import pytest

from kobdyn import ball, invariants as inv, maps, verify
from kobdyn.errors import HypothesisFailed, KobdynError, NotConverged

# lim_{t -> 0} k(z, f z) at z = 1 - t e^{i theta} for f(z) = (1 + 3z) / (3 + z),
# the ball picture of w -> 2w; mpmath at 60 digits with t = 1e-25
STEP_LIMITS = {0.0: 0.69314718055994530942, 0.3: 0.72423313359722943187,
               -0.7: 0.89440205827666022232}


def siegel_to_ball(L, s):
    return maps.transport(maps.affine_siegel(L, s), "ball")


def test_rate_estimator_on_a_synthetic_sequence():
    # a_m = c m + 3 log(1 + m): the second difference cancels the log term
    m = np.arange(0, 4001)
    c = 0.37
    a = c * m + 3 * np.log1p(m)
    r = inv.rate_from_distances(a, tol=1e-10)
    assert abs(r["c"] - c) < 1e-5
    assert r["upper"] >= c
    assert r["bracket"][0] <= c + 1e-12


def test_rate_estimator_drops_non_finite_tail():
    a = np.r_[np.arange(100.0) * 0.5, np.inf, np.inf]
    assert inv.rate_from_distances(a)["c"] == pytest.approx(0.5)


@pytest.mark.parametrize("lam", [1.5, 2.0, 4.0])
def test_divergence_rate_is_log_lambda(lam):
    f = siegel_to_ball([[lam]], [0])
    est = inv.divergence_rate(f, max_m=2000)
    assert abs(est.c - np.log(lam)) < 1e-10
    lo, hi = est.bracket
    assert lo <= np.log(lam) + 1e-12 and hi >= np.log(lam) - 1e-12


def test_divergence_rate_of_powers():
    f = siegel_to_ball(np.diag([4.0, 2.0]), [1j, 0])
    c1 = inv.divergence_rate(f).c
    assert abs(inv.divergence_rate(maps.power(f, 2)).c - 2 * c1) < 1e-10
    assert abs(inv.divergence_rate(maps.power(f, 3)).c - 3 * c1) < 1e-10


def test_parabolic_rate_vanishes():
    f = siegel_to_ball([[1.0]], [1.0])
    est = inv.divergence_rate(f, max_m=10_000)
    assert est.c < 1e-3
    assert est.bracket[0] == 0.0
    # a_m = k(x, f^m x) ~ 2 log m, so the Fekete bound alone is far from 0
    assert est.fekete_bounds[-1] > 1e-4


def test_short_orbit_rate_is_not_certified():
    with pytest.raises(NotConverged) as exc:
        inv.divergence_rate(siegel_to_ball([[1.0]], [1.0]), max_m=7)
    assert exc.value.partial.m_used == 7


def test_hyperbolic_steps():
    up = inv.hyperbolic_step(maps.affine_siegel([[1.0]], [1j]), np.array([1j]))
    assert up.limit < 1e-4
    side = inv.hyperbolic_step(maps.affine_siegel([[1.0]], [1.0]), np.array([1j]))
    assert side.limit == pytest.approx(np.arccosh(1.5), abs=1e-6)
    dil = inv.hyperbolic_step(maps.affine_siegel([[2.0]], [0]), np.array([1j]), m=3)
    assert dil.limit == pytest.approx(3 * np.log(2), abs=1e-12)
    with pytest.raises(KobdynError):
        inv.hyperbolic_step(maps.affine_siegel([[2.0]], [0]), m=0)


def test_parabolic_steps_decay_slowly_but_converge():
    # z -> z + i from i: k(z_n, z_{n+1}) = log((n+2)/(n+1)), about 1/n
    est = inv.hyperbolic_step(maps.affine_siegel([[1.0]], [1j]), np.array([1j]), tol=1e-8)
    assert est.limit < 1e-6
    assert np.all(np.diff(est.values) <= 1e-15)


def test_model_distance():
    f = maps.affine_siegel(np.diag([2.0, 0.5]), [1j, 0])
    # (2^{m+1} - 1) i and (3 2^m - 1) i: distance tends to log(3/2)
    d = inv.model_distance(f, np.array([1j, 0]), np.array([2j, 0]))
    assert d == pytest.approx(np.log(1.5), abs=1e-8)
    # the contracted v direction collapses
    assert inv.model_distance(f, np.array([1j, 0]), np.array([1j, 0.1])) < 1e-8
    assert inv.model_distance(f, np.array([1j, 0]), np.array([1j, 0])) == 0.0


def test_model_distance_needs_univalence():
    f = maps.from_callable(lambda z: z ** 2 / 2, 1, "ball")
    with pytest.raises(KobdynError):
        inv.model_distance(f, np.array([0.1]), np.array([0.2]))


def test_canonical_dimension():
    g = maps.affine_siegel(np.diag([2.0, np.sqrt(2), 0.5]), [1j, 0, 0.3])
    assert inv.canonical_dimension(g, base=np.array([2j, 0.1, 0.1])).rank == 2
    half = maps.from_callable(lambda z: z / 2, 1, "ball", univalent=True,
                              jacobian=lambda z: np.eye(1) / 2)
    assert inv.canonical_dimension(half).rank == 0
    aut = ball.automorphism_to_origin(np.array([0.3, 0.2j]))
    assert inv.canonical_dimension(aut).rank == 2


@pytest.mark.parametrize("theta", sorted(STEP_LIMITS))
def test_step_limit_formula_matches_boundary_limit(theta):
    assert inv.step_limit_formula(0.5, np.exp(1j * theta)) == pytest.approx(
        STEP_LIMITS[theta], abs=1e-14)
    f = verify.shipped_maps()["dilation_2"]
    seq = (1.0 - 2.0 ** -np.arange(1, 31) * np.exp(1j * theta))[:, None]
    rep = inv.step_limit_formula_check(f, maps.denjoy_wolff(f), np.exp(1j * theta), seq)
    assert rep.passed and rep.gap < 1e-4


def test_step_limit_formula_is_zero_for_parabolic_and_rejects_tangency():
    assert inv.step_limit_formula(1.0, 0.3 + 0.1j) == 0.0
    with pytest.raises(KobdynError):
        inv.step_limit_formula(0.5, 1j)


def test_koranyi_family_stays_in_a_koranyi_region():
    a = np.array([1.0, 1j]) / np.sqrt(2)
    for s in inv.koranyi_family(a, n_family=4, length=25, seed=1):
        assert np.all(np.linalg.norm(s, axis=1) < 1)
        assert ball.koranyi_quotient(s, a).max() < 10


def test_lindelof_bounds():
    e1 = np.array([1.0 + 0j])
    seq = np.array([[1 - 2.0 ** -k] for k in range(1, 30)], dtype=complex)
    rep = inv.lindelof_hypotheses(lambda z: z, seq, e1, np.log(3))
    assert rep.all_limits_agree
    with pytest.raises(HypothesisFailed) as exc:
        inv.lindelof_hypotheses(lambda z: z, seq, e1, 0.5)
    assert exc.value.which == 1
