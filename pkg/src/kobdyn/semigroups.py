"""One-parameter semigroups of self-maps.

Affine Siegel flows are integrated in closed form::

    z1(t) = e^{lam t} z1 + b (e^{lam t} - 1) / lam      (z1 + b t when lam = 0)
    u(t)  = e^{(lam/2 + i omega) t} u
    v(t)  = e^{mu t} v,   Re mu <= lam / 2

with ``Im b >= 0``; these are holomorphic self-maps of H^q for every
``t >= 0``.  Anything else is a user closure ``(t, z) -> phi_t(z)``.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import ball
from .errors import KobdynError, NotConverged
from .maps import (HORIZON, affine_siegel, denjoy_wolff, from_callable, sample_points,
                   transport)
from .invariants import divergence_rate


def _expm1_over(lam, t):
    """``(e^{lam t} - 1) / lam`` with the ``lam -> 0`` limit ``t``."""
    return t if lam == 0 else np.expm1(lam * t) / lam


@dataclass(frozen=True, eq=False)
class Semigroup:
    kind: str
    dim: int
    domain: str
    params: dict = field(default_factory=dict)
    closure: Callable | None = None

    @classmethod
    def affine_siegel_flow(cls, lam=1.0, b=0.0, omega=(), mu=(), transport_to=None):
        lam = float(lam)
        b = complex(b)
        omega = np.atleast_1d(np.asarray(omega, dtype=float)).ravel()
        mu = np.atleast_1d(np.asarray(mu, dtype=complex)).ravel()
        if lam < 0:
            raise KobdynError("the flow needs lam >= 0")
        if b.imag < 0:
            raise KobdynError("the flow needs Im b >= 0")
        if np.any(mu.real > lam / 2 + 1e-15):
            raise KobdynError("the flow needs Re mu <= lam / 2")
        q = 1 + omega.size + mu.size
        domain = "ball" if transport_to == "ball" else "siegel"
        return cls("affine_siegel_flow", q, domain,
                   {"lam": lam, "b": b, "omega": omega, "mu": mu})

    @classmethod
    def from_closure(cls, fn, dim, domain):
        return cls("closure", dim, domain, closure=fn)

    def linear(self, t):
        p = self.params
        lam = p["lam"]
        diag = np.r_[np.exp(lam * t), np.exp((lam / 2 + 1j * p["omega"]) * t),
                     np.exp(p["mu"] * t)]
        shift = np.zeros(self.dim, dtype=complex)
        shift[0] = p["b"] * _expm1_over(lam, t)
        return np.diag(diag.astype(complex)), shift

    def at(self, t):
        """``phi_t`` as a :class:`SelfMap`."""
        t = float(t)
        if t < 0:
            raise KobdynError("semigroups are defined for t >= 0")
        if self.kind == "closure":
            return from_callable(lambda z: self.closure(t, z), self.dim, self.domain,
                                 univalent=True, label=f"phi_{t:g}")
        L, s = self.linear(t)
        g = affine_siegel(L, s, kind="lft_siegel", label=f"phi_{t:g}")
        return transport(g, "ball") if self.domain == "ball" else g

    def evaluate(self, t, z):
        return self.at(t)(z)

    def as_dict(self):
        if self.kind == "closure":
            return {"kind": "closure", "dim": self.dim, "domain": self.domain}
        p = self.params
        return {"kind": "semigroup_affine_siegel", "lambda": p["lam"],
                "b": [p["b"].real, p["b"].imag], "omega": p["omega"].tolist(),
                "mu": [[m.real, m.imag] for m in p["mu"]], "domain": self.domain}


def semigroup_law_residual(phi, n=100, seed=0, t_max=4.0):
    """``max |phi_{t+s}(z) - phi_t(phi_s(z))|`` (relative) and ``|phi_0 - id|``."""
    rng = np.random.default_rng(seed)
    Z = sample_points(phi.domain, phi.dim, n, rng)
    T = rng.uniform(0, t_max, size=n)
    S = rng.uniform(0, t_max, size=n)
    worst = 0.0
    for t, s, z in zip(T, S, Z):
        lhs = phi.at(t + s)(z)
        rhs = phi.at(t)(phi.at(s)(z))
        worst = max(worst, float(np.abs(lhs - rhs).max() / max(1.0, np.abs(lhs).max())))
    ident = float(np.abs(phi.at(0.0)(Z) - Z).max())
    return {"law": worst, "identity": ident, "samples": n}


def semigroup_rate(phi, x=None, t_min=0.125, t_max=2.0 ** 30, tol=1e-8):
    """Continuous-time divergence rate ``lim k(x, phi_t x) / t``.

    ``a(t) = k(x, phi_t x)`` is sampled on the doubling grid
    ``t_min 2^j <= t_max``, cut where the orbit leaves the representable
    range.  ``inf a(t)/t`` is the certified upper bound; the point
    estimate is the second difference ``(a(4T) - 2a(2T) + a(T)) / T`` at
    the end of the grid (constant and logarithmic terms cancel), with its
    change from the previous grid point as error.
    """
    q = phi.dim
    if x is None:
        x = np.zeros(q, complex) if phi.domain == "ball" else ball.cayley(np.zeros(q))
    x = np.asarray(x, dtype=complex)
    siegel = phi.kind == "affine_siegel_flow"
    if siegel and phi.domain == "ball":
        x = ball.cayley(x)
    ts, a = [], []
    t = t_min
    while t <= t_max:
        if siegel:
            L, s = phi.linear(t)
            y = L @ x + s
            if not np.all(np.isfinite(y)) or np.abs(y).max() > HORIZON:
                break
            d = ball.siegel_distance(x, y)
        else:
            y = phi.at(t)(x)
            if phi.domain == "ball" and ball.ball_defect(y) < 1e-13:
                break
            d = ball.distance(phi.domain, x, y)
        ts.append(t)
        a.append(d)
        t *= 2.0
    ts, a = np.array(ts), np.array(a)
    if len(ts) < 4:
        raise NotConverged("too few time samples for a rate estimate")
    ratios = a / ts
    upper = float(np.min(ratios))
    n = len(ts) - 1

    def second(k):
        return (a[k] - 2 * a[k - 1] + a[k - 2]) / ts[k - 2]

    est = second(n)
    err = abs(est - second(n - 1)) + tol
    rate = float(min(max(est, 0.0), upper))
    out = {"rate": rate, "upper": upper, "bracket": [max(0.0, rate - err), min(upper, rate + err)],
           "t_grid": ts.tolist(), "ratios": ratios.tolist()}
    if out["bracket"][1] - out["bracket"][0] > 100 * tol:
        raise NotConverged(f"semigroup rate bracket {out['bracket']} too wide", partial=out)
    return out


def rate_linearity_check(phi, t_grid=(0.5, 1.0, 2.0, 4.0), max_m=2000, tol=1e-8):
    """``c(phi_t)`` per ``t`` against the least-squares line through the origin."""
    t = np.asarray(t_grid, dtype=float)
    c = np.array([divergence_rate(phi.at(ti), max_m=max_m, tol=tol).c for ti in t])
    slope = float(np.dot(t, c) / np.dot(t, t))
    c1 = divergence_rate(phi.at(1.0), max_m=max_m, tol=tol).c
    dev = np.abs(c - slope * t)
    return {"t_grid": t.tolist(), "rates": c.tolist(), "slope": slope, "c1": c1,
            "slope_vs_c1": abs(slope - c1), "max_deviation": float(dev.max()),
            "max_deviation_vs_c1": float(np.abs(c - c1 * t).max())}


def classify_semigroup(phi, t_samples=(0.5, 2.0), tol=1e-5):
    """Class of ``phi_1`` with shared-DW-point and ``e^{-lam t}`` dilation checks."""
    dw1 = denjoy_wolff(phi.at(1.0))
    per = {}
    consistent = True
    rate = None
    if dw1.cls != "elliptic":
        rate = -np.log(dw1.dilation)
    for t in t_samples:
        dw = denjoy_wolff(phi.at(t))
        entry = {"class": dw.cls}
        if dw1.cls == "elliptic":
            fp = dw1.fixed_point
            g = phi.at(t)
            entry["fixed_point_residual"] = float(np.abs(g(fp) - fp).max())
            ok = dw.cls == "elliptic" and entry["fixed_point_residual"] < 1e-8
        else:
            entry["dilation"] = dw.dilation
            entry["expected_dilation"] = float(np.exp(-rate * t))
            entry["point_gap"] = float(np.linalg.norm(dw.point - dw1.point))
            ok = (dw.cls == dw1.cls and entry["point_gap"] < 1e-6
                  and abs(dw.dilation - entry["expected_dilation"]) < tol)
        entry["consistent"] = bool(ok)
        consistent = consistent and ok
        per[float(t)] = entry
    return {"class": dw1.cls, "dw": dw1.as_dict(), "rate": rate, "per_t": per,
            "consistent": consistent}
