import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kobdyn import ball, maps, specs, verify
from kobdyn.errors import DomainEscape, Inconclusive, KobdynError


def siegel_to_ball(L, s):
    return maps.transport(maps.affine_siegel(L, s), "ball")


@pytest.mark.parametrize("lam", [1.5, 2.0, 4.0])
def test_transported_dilation_is_hyperbolic(lam):
    dw = maps.denjoy_wolff(siegel_to_ball([[lam]], [0]))
    assert dw.cls == "hyperbolic"
    assert dw.dilation == pytest.approx(1 / lam, abs=1e-12)
    assert np.allclose(dw.point, [1.0], atol=1e-12)


def test_translation_is_parabolic_with_dw_at_e1():
    dw = maps.denjoy_wolff(siegel_to_ball([[1.0]], [1.0]))
    assert dw.cls == "parabolic"
    assert np.allclose(dw.point, [1.0], atol=1e-12)
    assert abs(dw.dilation - 1) < 1e-6


def test_contraction_is_elliptic():
    f = maps.from_callable(lambda z: z / 2, 2, "ball")
    dw = maps.denjoy_wolff(f)
    assert dw.cls == "elliptic" and dw.point is None
    assert np.abs(dw.fixed_point).max() < 1e-9


def test_automorphism_with_interior_fixed_point():
    f = ball.automorphism_to_origin(np.array([0.4, 0.0]))
    # phi_w is an involution; its fixed point lies on the segment [0, w]
    dw = maps.denjoy_wolff(f)
    assert dw.cls == "elliptic"
    assert np.abs(f(dw.fixed_point) - dw.fixed_point).max() < 1e-10


def test_near_parabolic_is_inconclusive():
    f, _ = specs.build({"kind": "lft_hyperbolic", "lambda": 1 + 1e-9})
    with pytest.raises(Inconclusive) as exc:
        maps.denjoy_wolff(maps.transport(f, "ball"))
    assert exc.value.partial.dilation == pytest.approx(1 / (1 + 1e-9), abs=1e-15)


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6), st.sampled_from(["dilation_2", "translation_1"]))
def test_conjugation_moves_the_dw_point(x, y, name):
    f = verify.shipped_maps()[name]
    base = maps.denjoy_wolff(f)
    phi = ball.automorphism_to_origin(np.array([x + 1j * y]))
    dw = maps.denjoy_wolff(maps.conjugate(f, phi))
    assert dw.cls == base.cls
    assert np.linalg.norm(dw.point - phi(base.point)) < 1e-6
    assert abs(dw.dilation - base.dilation) < 1e-6


def test_conjugated_hyperbolic_map_in_two_dimensions():
    f = verify.shipped_maps()["hyperbolic_4z+i_2w"]
    phi = ball.automorphism_to_origin(np.array([0.3 - 0.2j, 0.4j]))
    dw = maps.denjoy_wolff(maps.conjugate(f, phi))
    assert dw.dilation == pytest.approx(0.25, abs=1e-12)
    assert np.linalg.norm(dw.point - phi(np.array([1.0, 0.0]))) < 1e-10


def test_compose_power_and_transport_agree():
    f = siegel_to_ball(np.diag([2.0, np.sqrt(2)]), [1j, 0])
    z = np.array([0.1 + 0.2j, -0.3])
    assert np.allclose(maps.power(f, 3)(z), f(f(f(z))), atol=1e-14)
    assert np.allclose(maps.compose(f, f)(z), f(f(z)), atol=1e-14)
    back = maps.transport(f, "siegel")
    assert np.allclose(ball.cayley_inverse(back(ball.cayley(z))), f(z), atol=1e-13)
    assert np.allclose(maps.iterate(f, z, 0), z)


def test_from_callable_rejects_non_self_maps():
    with pytest.raises(DomainEscape):
        maps.from_callable(lambda z: 2 * z, 1, "ball")
    with pytest.raises(KobdynError):
        maps.power(maps.identity(2), -1)


def test_orbit_truncates_at_horizon():
    f = maps.affine_siegel([[10.0]], [0])
    orb = maps.orbit(f, np.array([1j]), 500, horizon=1e50)
    assert len(orb) < 60
    assert np.abs(orb).max() <= 1e50


# ------------------------------------------------------------ horospheres

def naive_horosphere(a, R, n, rng):
    out = []
    while sum(len(o) for o in out) < n:
        Z = rng.uniform(-1, 1, size=(200_000, 2)) + 1j * rng.uniform(-1, 1, size=(200_000, 2))
        Z = Z[np.linalg.norm(Z, axis=1) < 1]
        out.append(Z[ball.horosphere_quotient(Z, a) < R])
    return np.concatenate(out)[:n]


@pytest.mark.parametrize("R", [0.25, 1.0])
def test_horosphere_sampler_matches_naive_rejection(R):
    a = np.array([1.0, 0.0])
    rng = np.random.default_rng(3)
    fast = maps.sample_horosphere(a, R, 20_000, rng)
    slow = naive_horosphere(a, R, 20_000, rng)
    assert np.all(ball.horosphere_quotient(fast, a) < R)
    assert np.all(np.linalg.norm(fast, axis=1) < 1)
    for stat in (lambda Z: Z[:, 0].real, lambda Z: np.abs(Z[:, 1]) ** 2):
        u, v = stat(fast), stat(slow)
        se = np.sqrt(u.var() / len(u) + v.var() / len(v))
        assert abs(u.mean() - v.mean()) < 5 * se


def test_horosphere_sampler_rotates_to_a():
    a = np.array([np.exp(0.7j) / np.sqrt(2), 1j / np.sqrt(2)])
    Z = maps.sample_horosphere(a, 0.5, 1000, np.random.default_rng(0))
    assert np.all(ball.horosphere_quotient(Z, a) < 0.5)


@pytest.mark.parametrize("name", ["dilation_2", "hyperbolic_4z+i_2w", "translation_1"])
def test_julia_inclusion(name):
    f = verify.shipped_maps()[name]
    rep = maps.julia_check(f, maps.denjoy_wolff(f), samples=2000)
    assert rep.passed and rep.violations == 0


def test_julia_needs_a_boundary_point():
    f = maps.from_callable(lambda z: z / 2, 1, "ball")
    with pytest.raises(KobdynError):
        maps.julia_check(f, maps.denjoy_wolff(f))


@pytest.mark.parametrize("w", [[0.3, 0.2j], [-0.7, 0.1]])
def test_conjugated_parabolic_case_two(w):
    # Jordan block of size 3: eigenvectors alone are only eps^(1/3) accurate
    f = verify.shipped_maps()["parabolic_q2_case_ii"]
    phi = ball.automorphism_to_origin(np.array(w, dtype=complex))
    dw = maps.denjoy_wolff(maps.conjugate(f, phi))
    assert dw.cls == "parabolic"
    assert np.linalg.norm(dw.point - phi(np.array([1.0, 0.0]))) < 1e-12
