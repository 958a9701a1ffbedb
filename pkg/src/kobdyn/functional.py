"""Valiron and Abel equations for hyperbolic self-maps.

Valiron: ``Theta(f(z)) = Theta(z) / lambda_f`` with ``Theta`` valued in the
upper half-plane, estimated as ``lim lambda_f^n (f^n z)_1`` in a Siegel
chart where the Denjoy-Wolff point sits at infinity.  Abel:
``theta = log(Theta) / log(1/lambda_f)`` solves ``theta(f(z)) = theta(z) + 1``
and takes values in the strip ``0 < Im < pi / log(1/lambda_f)``.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import ball
from .errors import NotConverged, NotHyperbolic
from .invariants import koranyi_family
from .maps import HORIZON, chart_dilation, denjoy_wolff, sample_points, working_chart

EXACT_TOL = 1e-14


def _chart_dilation(chart, dw):
    exact = chart_dilation(chart, EXACT_TOL)
    if exact is not None and exact < 1.0:
        return exact, "exact"
    return float(dw.dilation), "estimated"


@dataclass
class ValironSolution:
    theta: Callable
    lambda_f: float
    residual_sup: float
    convergence_trace: dict
    dw: object = None
    lambda_source: str = "estimated"
    filling: str = "not certified"
    samples: np.ndarray = field(default=None, repr=False)
    domain: str = "ball"

    def __call__(self, z):
        return self.theta(z)

    def as_dict(self):
        return {"lambda_f": self.lambda_f, "lambda_source": self.lambda_source,
                "residual_sup": self.residual_sup, "filling": self.filling,
                "convergence": self.convergence_trace}


def _require_hyperbolic(f, tol):
    dw = denjoy_wolff(f, tol=tol)
    if dw.cls != "hyperbolic":
        raise NotHyperbolic(f"the Valiron equation needs a hyperbolic map, got {dw.cls}")
    return dw


def _valiron_values(chart, lam_f, Z, cap, tol):
    """Normalised iterates for a batch of points; returns values, steps, gaps."""
    P = np.array(np.atleast_2d(chart.to_chart(np.asarray(Z, dtype=complex))))
    g = chart.map
    T = P[:, 0].copy()
    done = np.zeros(len(P), bool)
    gaps = np.full(len(P), np.inf)
    steps = np.zeros(len(P), int)
    scale = 1.0
    for n in range(1, cap + 1):
        active = ~done
        P[active] = g(P[active])
        scale *= lam_f
        T_new = scale * P[active, 0]
        gap = np.abs(T_new - T[active])
        gaps[active] = gap
        steps[active] = n
        T[active] = T_new
        big = np.abs(P[active]).max(axis=1) > HORIZON
        settled = gap <= tol * np.maximum(1.0, np.abs(T_new))
        idx = np.nonzero(active)[0]
        done[idx[settled | big]] = True
        if done.all():
            break
    return T, steps, gaps, done


def valiron_solve(f, sample_set=None, cap=10_000, tol=1e-14, samples=1000, seed=0,
                  dw_tol=1e-6):
    """Normalised-iterate solution of the Valiron equation.

    ``tol`` is the relative Cauchy gap at which a point counts as settled;
    points still moving at ``cap`` raise :class:`NotConverged` with the
    solution attached.  The residual is measured on ``sample_set`` (a
    seeded interior sample of ``f.domain`` by default).
    """
    dw = _require_hyperbolic(f, dw_tol)
    chart = working_chart(f)
    lam_f, source = _chart_dilation(chart, dw)
    settle = max(tol, 4 * np.finfo(float).eps)

    def theta(z):
        z = np.asarray(z, dtype=complex)
        single = z.ndim == 1
        T, _, _, done = _valiron_values(chart, lam_f, np.atleast_2d(z), cap, settle)
        if not done.all():
            raise NotConverged(f"{int((~done).sum())} points unsettled after {cap} steps")
        return T[0] if single else T

    if sample_set is None:
        sample_set = sample_points(f.domain, f.dim, samples, np.random.default_rng(seed))
    Z = np.atleast_2d(np.asarray(sample_set, dtype=complex))
    T, steps, gaps, done = _valiron_values(chart, lam_f, Z, cap, settle)
    TF, _, _, done_f = _valiron_values(chart, lam_f, f(Z), cap, settle)
    res = np.abs(TF - T / lam_f)
    trace = {"max_steps": int(steps.max()), "max_final_gap": float(gaps.max()),
             "unsettled": int((~done).sum() + (~done_f).sum()),
             "min_imag": float(T.imag.min())}
    sol = ValironSolution(theta, lam_f, float(res.max()), trace, dw, source, samples=Z,
                          domain=f.domain)
    if trace["unsettled"]:
        raise NotConverged(f"{trace['unsettled']} sample points unsettled after {cap} steps",
                           partial=sol)
    return sol


def valiron_klimit(sol, n_family=8, length=40, seed=0, tail=10):
    """|Theta| along seeded Koranyi sequences to the Denjoy-Wolff point.

    Returns per-sequence tails and whether every tail increases strictly.
    """
    a = sol.dw.point
    seqs = koranyi_family(a, n_family, length, seed)
    tails, ok = [], True
    for s in seqs:
        pts = s if sol.domain == "ball" else ball.cayley(s)
        vals = np.abs(sol.theta(pts))[-tail:]
        tails.append(vals.tolist())
        ok = ok and bool(np.all(np.diff(vals) > 0))
    return {"monotone": ok, "tails": tails, "last": [t[-1] for t in tails]}


@dataclass
class AbelSolution:
    theta_abel: Callable
    residual_sup: float
    strip_height: float
    surjective: bool = False

    def __call__(self, z):
        return self.theta_abel(z)

    def as_dict(self):
        return {"residual_sup": self.residual_sup, "strip_height": self.strip_height,
                "surjective": self.surjective}


def abel_solve(f, valiron, sample_set=None):
    """``theta = log(Theta) / log(1/lambda_f)`` (principal branch)."""
    lam = valiron.lambda_f
    if not 0.0 < lam < 1.0:
        raise NotHyperbolic("the Abel solution needs 0 < lambda_f < 1")
    scale = np.log(1.0 / lam)

    def theta(z):
        return np.log(valiron.theta(z)) / scale

    Z = valiron.samples if sample_set is None else np.atleast_2d(sample_set)
    res = np.abs(theta(f(Z)) - theta(Z) - 1.0)
    return AbelSolution(theta, float(res.max()), float(np.pi / scale))


def semigroup_valiron(phi, t_grid=(0.5, 1.0, 2.0), sample_set=None, samples=200, seed=0,
                      cap=10_000):
    """One Valiron function from ``phi_1`` checked against every ``phi_t``."""
    from .semigroups import semigroup_rate
    f1 = phi.at(1.0)
    sol = valiron_solve(f1, sample_set, cap=cap, samples=samples, seed=seed)
    lam = semigroup_rate(phi)["rate"]
    Z = sol.samples
    T = sol.theta(Z)
    per_t = {}
    for t in t_grid:
        Tt = sol.theta(phi.at(t)(Z))
        per_t[float(t)] = float(np.max(np.abs(Tt - np.exp(lam * t) * T)))
    return {"rate": lam, "residuals": per_t, "residual_sup": max(per_t.values()),
            "valiron": sol.as_dict()}
