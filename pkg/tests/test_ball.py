import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kobdyn import ball
from kobdyn.errors import BoundaryProximity, KobdynError

# frozen oracles: mpmath at 50 digits, distances through the Moebius quotient
# (Siegel points pulled back by an mpmath Cayley inverse)
K_1D = 0.47957308026188626045
K_2D = 1.7090766875754225213
K_SIEGEL = 1.7818497456182968394
ARCCOSH_15 = 0.962423650119206895


def test_distance_oracles():
    assert ball.kobayashi_distance([0.3], [0.5]) == pytest.approx(K_1D, abs=1e-15)
    assert ball.kobayashi_distance([0.3, 0], [0.5, 0]) == pytest.approx(0.4795730802618863, abs=1e-15)
    z = np.array([0.1 + 0.2j, -0.3j])
    w = np.array([0.5, 0.4 + 0.1j])
    assert ball.kobayashi_distance(z, w) == pytest.approx(K_2D, rel=1e-14)
    p = np.array([0.3 + 2.0j, 0.5 - 0.2j])
    q = np.array([-1.0 + 0.7j, 0.1 + 0.3j])
    assert ball.siegel_distance(p, q) == pytest.approx(K_SIEGEL, rel=1e-13)
    assert ball.siegel_distance([1j], [1 + 1j]) == pytest.approx(ARCCOSH_15, rel=1e-15)
    assert ball.siegel_distance([1j], [2j]) == pytest.approx(np.log(2.0), rel=1e-15)


def test_distance_is_zero_on_the_diagonal_and_symmetric():
    z = np.array([0.2 - 0.1j, 0.3j])
    assert ball.kobayashi_distance(z, z) == 0.0
    w = np.array([-0.5, 0.1])
    assert ball.kobayashi_distance(z, w) == ball.kobayashi_distance(w, z)


def test_near_boundary_distance_keeps_digits():
    # 1 - |z|^2 = 2e-12: the log1p branch keeps the value finite and accurate
    x = 1 - 1e-12
    expected = np.log((1 + x) / (1 - x)) - np.log((1 + 0.5) / (1 - 0.5))
    assert ball.kobayashi_distance([0.5], [x]) == pytest.approx(expected, rel=1e-9)


def test_points_outside_are_rejected():
    with pytest.raises(KobdynError):
        ball.kobayashi_distance([1.2], [0.0])
    with pytest.raises(KobdynError):
        ball.siegel_distance([-1j], [1j])
    assert not ball.in_domain("ball", np.array([0.8, 0.7]))
    assert ball.in_domain("siegel", np.array([2j, 1.0]))
    assert issubclass(BoundaryProximity, KobdynError)


def test_metric_matches_distance_derivative():
    z = np.array([0.3, 0.4j])
    v = np.array([1.0, 1.0])
    assert ball.kobayashi_metric([0.5], [1.0]) == pytest.approx(8 / 3, rel=1e-15)
    h = 1e-6
    fd = ball.kobayashi_distance(z, z + h * v) / h
    assert ball.kobayashi_metric(z, v) == pytest.approx(fd, rel=1e-5)


def test_siegel_metric_matches_ball_metric_through_cayley():
    z = np.array([0.2 + 0.1j, -0.3j])
    v = np.array([0.5 - 0.2j, 1.0])
    h = 1e-7
    p, p2 = ball.cayley(z), ball.cayley(z + h * v)
    dp = (p2 - p) / h
    assert ball.kobayashi_metric(p, dp, "siegel") == pytest.approx(ball.kobayashi_metric(z, v), rel=1e-5)


def test_cayley_round_trip_and_matrices():
    rng = np.random.default_rng(0)
    Z = ball_points(rng, 3, 200)
    back = ball.cayley_inverse(ball.cayley(Z))
    assert np.abs(back - Z).max() < 1e-12
    M = ball.cayley_matrix(3) @ ball.cayley_inverse_matrix(3)
    assert np.allclose(M / M[0, 0], np.eye(4), atol=1e-14)


def test_cayley_of_origin():
    assert np.allclose(ball.cayley(np.zeros(2)), [1j, 0])


def test_horosphere_quotient_and_koranyi():
    a = np.array([1.0, 0.0])
    z = np.array([0.5, 0.0])
    assert ball.horosphere_quotient(z, a) == pytest.approx(0.25 / 0.75)
    E = ball.Horosphere(a, 0.5)
    assert ball.horosphere_contains(E, z) == (True, pytest.approx(1 / 3))
    assert not ball.horosphere_contains(ball.Horosphere(a, 0.3), z)[0]
    K = ball.KoranyiRegion(a, 2.0)
    assert ball.koranyi_contains(K, z)


def test_special_distance_vanishes_on_the_radius():
    a = np.array([1.0, 0.0])
    assert ball.special_distance(np.array([0.9, 0.0]), a) == 0.0
    assert ball.special_distance(np.array([0.9, 0.1]), a) > 0.0


def test_classify_sequence_radial_is_admissible():
    seq = np.array([[1 - 2.0 ** -k, 0.0] for k in range(1, 40)])
    d = ball.classify_sequence(seq, np.array([1.0, 0.0]))
    assert d.is_restricted and d.is_special and d.is_admissible


# ---------------------------------------------------------------- properties

def ball_points(rng, q, n, rmax=0.95):
    z = rng.normal(size=(n, q)) + 1j * rng.normal(size=(n, q))
    z /= np.linalg.norm(z, axis=1)[:, None]
    return z * (rmax * rng.uniform(size=n) ** (1 / (2 * q)))[:, None]


coord = st.floats(-0.55, 0.55, allow_nan=False)


def _clamp(t):
    z = np.array([t[0] + 1j * t[1], t[2] + 1j * t[3]])
    r = np.linalg.norm(z)
    return z if r < 0.95 else z * (0.95 / r)


point2 = st.tuples(coord, coord, coord, coord).map(_clamp)


@settings(max_examples=200, deadline=None)
@given(point2, point2, point2)
def test_triangle_inequality(x, y, z):
    kxy = ball.kobayashi_distance(x, y)
    kyz = ball.kobayashi_distance(y, z)
    kxz = ball.kobayashi_distance(x, z)
    assert kxz <= kxy + kyz + 1e-10


@settings(max_examples=200, deadline=None)
@given(point2, point2, point2)
def test_automorphisms_are_isometries(w, z, u):
    phi = ball.automorphism_to_origin(w)
    before = ball.kobayashi_distance(z, u)
    after = ball.kobayashi_distance(phi(z), phi(u))
    assert after == pytest.approx(before, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(point2, point2)
def test_cayley_is_an_isometry(z, w):
    assert ball.siegel_distance(ball.cayley(z), ball.cayley(w)) == pytest.approx(
        ball.kobayashi_distance(z, w), abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(point2)
def test_automorphism_sends_w_to_origin(w):
    phi = ball.automorphism_to_origin(w)
    assert np.abs(phi(w)).max() < 1e-14


@settings(max_examples=100, deadline=None)
@given(point2, st.floats(0.01, 0.99))
def test_holomorphic_contraction_by_scaling(z, t):
    # z -> t z is a holomorphic self-map, hence a contraction
    w = np.array([0.1, -0.2j])
    assert ball.kobayashi_distance(t * z, t * w) <= ball.kobayashi_distance(z, w) + 1e-12


def test_vectorised_distances_match_scalar():
    rng = np.random.default_rng(1)
    Z, W = ball_points(rng, 2, 50), ball_points(rng, 2, 50)
    vec = ball.distances("ball", Z, W)
    one = [ball.kobayashi_distance(z, w) for z, w in zip(Z, W)]
    assert np.allclose(vec, one, rtol=1e-13, atol=1e-15)
