import numpy as np
import pytest

from kobdyn import maps, semigroups as sg
from kobdyn.errors import KobdynError

Flow = sg.Semigroup.affine_siegel_flow


def test_closed_form_flow():
    phi = Flow(2.0, 1j, omega=[0.5])
    t = 0.3
    z = np.array([1 + 2j, 0.4])
    w = phi.at(t)(z)
    assert w[0] == pytest.approx(np.exp(2 * t) * z[0] + 1j * (np.exp(2 * t) - 1) / 2)
    assert w[1] == pytest.approx(np.exp((1.0 + 0.5j) * t) * 0.4)


def test_translation_flow_limit():
    phi = Flow(0.0, 1.0)
    assert np.allclose(phi.at(2.5)(np.array([1j])), [2.5 + 1j])


@pytest.mark.parametrize("phi", [Flow(1.0), Flow(1.0, 0.3j, omega=[0.7], mu=[-0.2 + 1j]),
                                 Flow(0.5, 0.0, transport_to="ball")])
def test_semigroup_law(phi):
    r = sg.semigroup_law_residual(phi)
    assert r["law"] < 1e-10
    assert r["identity"] < 1e-14


def test_flows_stay_in_the_domain():
    phi = Flow(1.0, 0.3j, omega=[0.7], mu=[0.5 + 1j])
    Z = maps.sample_points("siegel", 3, 200, np.random.default_rng(0))
    for t in (0.1, 1.0, 5.0):
        W = phi.at(t)(Z)
        assert np.all(W[:, 0].imag - np.sum(np.abs(W[:, 1:]) ** 2, axis=1) > 0)


@pytest.mark.parametrize("kw", [dict(lam=-1.0), dict(lam=1.0, b=-1j), dict(lam=1.0, mu=[0.6])])
def test_invalid_flows(kw):
    with pytest.raises(KobdynError):
        Flow(**kw)


def test_negative_time():
    with pytest.raises(KobdynError):
        Flow(1.0).at(-1.0)


def test_rates():
    assert sg.semigroup_rate(Flow(1.0))["rate"] == pytest.approx(1.0, abs=1e-8)
    assert sg.semigroup_rate(Flow(2.0, transport_to="ball"))["rate"] == pytest.approx(2.0, abs=1e-8)
    assert sg.semigroup_rate(Flow(0.0, 1.0))["rate"] < 1e-6


def test_rate_is_linear_in_time():
    r = sg.rate_linearity_check(Flow(1.0, transport_to="ball"))
    assert abs(r["slope"] - 1.0) < 1e-5
    assert r["max_deviation"] < 1e-5


def test_classification_is_shared_across_times():
    hyp = sg.classify_semigroup(Flow(1.0, transport_to="ball"))
    assert hyp["class"] == "hyperbolic" and hyp["consistent"]
    par = sg.classify_semigroup(Flow(0.0, 1.0, transport_to="ball"))
    assert par["class"] == "parabolic" and par["consistent"]
    ell = sg.classify_semigroup(sg.Semigroup.from_closure(lambda t, z: np.exp(-t) * z, 1, "ball"))
    assert ell["class"] == "elliptic" and ell["consistent"]


def test_as_dict_round_trip_fields():
    d = Flow(1.0, 0.3j, omega=[0.7], mu=[-0.2 + 1j]).as_dict()
    assert d["lambda"] == 1.0 and d["b"] == [0.0, 0.3] and d["mu"] == [[-0.2, 1.0]]
