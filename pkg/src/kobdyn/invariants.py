"""Dynamical invariants: hyperbolic m-step, divergence rate, model pseudo-distance,
rank of the limit pulled-back metric, and boundary-limit checks.

All limits are decided on finite data.  Where a quantity is a monotone
limit (steps, model distances) the raw sequence is returned together with
the declared limit; where only one-sided certificates exist (the Fekete
infimum for the divergence rate) the estimate is reported as a bracket.
"""

from dataclasses import dataclass, field

import numpy as np

from . import ball
from .errors import (HypothesisFailed, KobdynError, MonotonicityViolation,
                     NotConverged)
from .maps import HORIZON, SelfMap, orbit, transport, trim_to_floor, working_chart

EPS = np.finfo(float).eps


def _chart_orbit(chart, x, n):
    horizon = HORIZON if chart.domain == "siegel" else np.inf
    orb = orbit(chart.map, x, n, horizon)
    if chart.domain == "ball":
        # stop before 1 - |z|^2 loses all its digits
        ok = np.nonzero(ball.ball_defect(orb) < 1e-13)[0]
        if ok.size:
            orb = orb[:max(ok[0], 1)]
    return orb


def _default_point(f):
    q = f.dim
    return np.zeros(q, complex) if f.domain == "ball" else ball.cayley(np.zeros(q))


def _conditioning(chart, P):
    """Rough rounding-error scale of distances evaluated at chart points ``P``."""
    P = np.atleast_2d(P)
    if chart.domain == "ball":
        return 1.0 / np.maximum(ball.ball_defect(P), 1e-300)
    r = np.maximum(ball.siegel_defect(P), 1e-300)
    return np.maximum(1.0, np.abs(P).max(axis=1)) / np.minimum(r, 1.0) * np.maximum(1.0, 1.0 / r)


# ------------------------------------------------------------- divergence rate

def rate_from_distances(dists, tol=1e-8):
    """Divergence-rate estimate from ``dists[m] = k(x, f^m x)``, m = 0..N.

    ``a_m = k(x, f^m x)`` is subadditive, so ``min a_m / m`` is a certified
    upper bound (Fekete).  The point estimate uses the second difference
    ``(a_{4M} - 2 a_{2M} + a_M) / M``, which cancels both a constant and a
    ``log m`` correction in ``a_m`` (the parabolic growth mode).  Its change
    between ``M`` and ``M/2`` is the error estimate.
    """
    a = np.asarray(dists, dtype=float)
    bad = np.nonzero(~np.isfinite(a))[0]
    if bad.size:
        a = a[:bad[0]]
    N = len(a) - 1
    if N < 1:
        raise NotConverged("orbit too short for a divergence rate")
    m = np.arange(1, N + 1)
    ratios = a[1:] / m
    fekete = np.minimum.accumulate(ratios)
    upper = float(fekete[-1])

    def second_difference(M):
        return (a[4 * M] - 2.0 * a[2 * M] + a[M]) / M

    M = N // 4
    if M >= 2:
        e1, e0 = second_difference(M), second_difference(M // 2)
        err = abs(e1 - e0) + tol
        c = float(min(max(e1, 0.0), upper))
    else:
        c, err = upper, np.inf
    return {"c": c, "err": float(err), "ratios": ratios, "fekete": fekete, "upper": upper,
            "bracket": (max(0.0, c - err), min(upper, c + err))}


@dataclass
class DivergenceEstimate:
    ratios: np.ndarray
    fekete_bounds: np.ndarray
    via_steps: dict
    c: float
    bracket: tuple
    m_used: int
    truncated: bool = False

    @property
    def width(self):
        return self.bracket[1] - self.bracket[0]

    def as_dict(self):
        return {"c": self.c, "bracket": list(self.bracket), "m_used": self.m_used,
                "fekete_inf": float(self.fekete_bounds[-1]),
                "last_ratio": float(self.ratios[-1]),
                "via_steps": {str(k): v for k, v in self.via_steps.items()},
                "truncated_at_horizon": self.truncated}


def divergence_rate(f, x=None, max_m=2000, tol=1e-8, chart=None):
    """Divergence rate ``c(f) = lim k(x, f^m x) / m`` with a Fekete bracket.

    The orbit is iterated in the map's working chart and stops early if it
    leaves the representable range or its rounding floor passes ``tol/100``
    (``m_used`` then records the length).
    ``via_steps`` holds ``s_m(x)/m`` at dyadic gaps, each step limit
    approximated by the last available ``k(f^n x, f^{n+m} x)``.
    Raises NotConverged (with the estimate attached) if the bracket is
    wider than ``100 tol``.
    """
    x = _default_point(f) if x is None else np.asarray(x, dtype=complex)
    chart = working_chart(f) if chart is None else chart
    P = chart.to_chart(x)
    orb, _ = trim_to_floor(chart, _chart_orbit(chart, P, max_m), tol / 100)
    dists = ball.distances(chart.domain, P[None], orb)
    rate = rate_from_distances(dists, tol)
    N = len(orb) - 1
    via = {}
    gap = 1
    while gap <= max(N // 2, 1) and N >= 1:
        via[gap] = float(ball.distances(chart.domain, orb[N - gap][None], orb[N][None])[0] / gap)
        gap *= 2
    est = DivergenceEstimate(rate["ratios"], rate["fekete"], via, rate["c"], rate["bracket"],
                             N, truncated=N < max_m)
    if est.width > 100 * tol:
        raise NotConverged(f"divergence-rate bracket {est.bracket} wider than {100 * tol:g}",
                           partial=est)
    return est


# ----------------------------------------------------------------- m-steps

@dataclass
class StepEstimate:
    m: int
    values: np.ndarray
    limit: float
    window: int
    method: str

    def as_dict(self):
        return {"m": self.m, "limit": self.limit, "window": self.window, "method": self.method,
                "n_terms": len(self.values), "first": float(self.values[0]),
                "last": float(self.values[-1])}


def _dyadic_aitken(v, N):
    """Aitken extrapolation from ``v_{N/4}, v_{N/2}, v_N``.

    Exact for ``v_n = L + C n^{-alpha}`` with any ``alpha > 0``, which
    covers the ``1/n`` and ``1/sqrt(n)`` tails seen in practice.
    """
    a, b, c = v[N // 4 - 1], v[N // 2 - 1], v[N - 1]
    d1, d2 = a - b, b - c
    if d2 <= 0.0:
        return float(c)
    if d1 <= d2:
        return None
    rho = d2 / d1
    return float(min(max(c - d2 * rho / (1.0 - rho), 0.0), c))


def _monotone_limit(values, window, tol, slack, what):
    """Limit of a nonincreasing sequence, decided at dyadic lengths N.

    Declared flat when the last ``window`` terms and ``v_N - v_{N/2}`` are
    both below ``tol``; otherwise the dyadic Aitken extrapolation is
    accepted once two successive values agree within ``tol``.
    Returns ``(limit, method, N)``.
    """
    v = np.asarray(values, dtype=float)
    inc = np.diff(v) - slack[1:len(v)]
    bad = np.nonzero(inc > 0)[0]
    if bad.size:
        i = bad[0]
        raise MonotonicityViolation(f"{what} increases at n={i}: {v[i]!r} -> {v[i + 1]!r}")
    n = len(v)
    if n < 2 * window:
        if n and np.ptp(v) < tol:
            return float(v[-1]), "flat_tail", n
        raise NotConverged(f"{what}: only {n} terms available")
    N = 2 * window
    prev = None
    while N <= n:
        head, tail = v[N // 2 - 1], v[N - 1]
        if np.ptp(v[N - window:N]) < tol and head - tail < tol:
            return float(tail), "flat_tail", N
        L = _dyadic_aitken(v, N)
        if L is not None and prev is not None and abs(L - prev) < tol:
            return L, "aitken", N
        prev = L
        N = N * 2 if 2 * N <= n or N == n else n
    raise NotConverged(f"{what}: tail not flat after {n} terms")


def hyperbolic_step(f, x=None, m=1, window=20, tol=1e-8, cap=65536, chart=None):
    """Hyperbolic m-step ``s_m(x) = lim_n k(f^n x, f^{n+m} x)``."""
    if m < 1:
        raise KobdynError("the gap m must be at least 1")
    x = _default_point(f) if x is None else np.asarray(x, dtype=complex)
    chart = working_chart(f) if chart is None else chart
    orb = _chart_orbit(chart, chart.to_chart(x), cap + m)
    n = len(orb) - m
    if n < 1:
        raise NotConverged("orbit too short for the requested gap")
    values = ball.distances(chart.domain, orb[:n], orb[m:m + n])
    cond = np.maximum(_conditioning(chart, orb[:n]), _conditioning(chart, orb[m:m + n]))
    slack = 1e-10 + 64 * EPS * cond
    try:
        limit, method, used = _monotone_limit(values, window, tol, slack, "m-step sequence")
    except NotConverged as exc:
        exc.partial = StepEstimate(m, values, float(values[-1]), window, "unconverged")
        raise
    return StepEstimate(m, values[:used], limit, window, method)


def _check_univalent(f, n_pairs=32, seed=0):
    if not f.univalent:
        raise KobdynError("this operation needs a map declared univalent")
    from .maps import sample_points
    rng = np.random.default_rng(seed)
    Z = sample_points(f.domain, f.dim, n_pairs, rng, 0.9)
    W = sample_points(f.domain, f.dim, n_pairs, rng, 0.9)
    for z, w in zip(Z, W):
        if np.linalg.norm(f(z) - f(w)) < 1e-14 * max(1.0, np.linalg.norm(z - w)):
            raise KobdynError("injectivity spot check failed: two samples collide")


def model_distance(f, z, w, cap=10_000, tol=1e-10, window=20):
    """Pseudo-distance ``lim_m k(f^m z, f^m w)`` of the abstract model."""
    _check_univalent(f)
    chart = working_chart(f)
    Z = _chart_orbit(chart, chart.to_chart(np.asarray(z, complex)), cap)
    W = _chart_orbit(chart, chart.to_chart(np.asarray(w, complex)), cap)
    n = min(len(Z), len(W))
    values = ball.distances(chart.domain, Z[:n], W[:n])
    if values[0] == 0.0:
        return 0.0
    cond = np.maximum(_conditioning(chart, Z[:n]), _conditioning(chart, W[:n]))
    slack = 1e-10 + 64 * EPS * cond
    limit, _, _ = _monotone_limit(values, window, tol, slack, "model distance sequence")
    return limit


# ------------------------------------------------------------ limit metric rank

@dataclass
class LimitMetricReport:
    matrices: list
    eigenvalue_trajectories: np.ndarray
    rank: int
    tolerance: float
    normaliser: float

    def as_dict(self):
        return {"rank": self.rank, "tolerance": self.tolerance,
                "final_normalised_eigenvalues": self.eigenvalue_trajectories[-1].tolist(),
                "steps": len(self.matrices) - 1}


def canonical_dimension(f, base=None, cap=100, eig_tol=1e-6, window=10):
    """Rank of ``lim (f^m)^* kappa`` at ``base``.

    ``H_m = J_m^H G(f^m(base)) J_m`` is the Hermitian form of the pulled
    back metric (``G`` the metric form of the chart, ``J_m`` the Jacobian of
    ``f^m``).  Eigenvalues are normalised by the largest eigenvalue of
    ``H_0`` and the rank counts those whose limit exceeds ``eig_tol``.
    """
    _check_univalent(f)
    base = _default_point(f) if base is None else np.asarray(base, complex)
    chart = working_chart(f)
    g = chart.map
    P = chart.to_chart(base)
    J = np.eye(f.dim, dtype=complex)
    mats, eigs = [], []
    for m in range(cap + 1):
        G = ball.metric_form(chart.domain, P)
        H = np.conj(J).T @ G @ J
        if np.abs(H - np.conj(H).T).max() > 1e-10 * max(1.0, np.abs(H).max()):
            raise KobdynError("pulled-back form lost hermitian symmetry")
        H = 0.5 * (H + np.conj(H).T)
        mats.append(H)
        eigs.append(np.sort(np.linalg.eigvalsh(H))[::-1])
        if m == cap:
            break
        J = g.jac(P) @ J
        P = g(P)
        if not np.all(np.isfinite(P)) or np.abs(P).max() > HORIZON:
            break
    eigs = np.array(eigs)
    scale = eigs[0, 0]
    norm = eigs / scale
    if np.any(np.diff(norm, axis=0) > 1e-8):
        raise KobdynError("pulled-back eigenvalues increased; the map is not a contraction")
    tail = norm[-window:]
    if np.any(np.ptp(tail, axis=0) >= eig_tol / 10):
        raise NotConverged("limit-metric eigenvalues still moving at cap")
    rank = int(np.sum(norm[-1] > eig_tol))
    return LimitMetricReport(mats, norm, rank, eig_tol, float(scale))


# ------------------------------------------------------- boundary behaviour

def step_limit_formula(dilation, c_phase):
    """``log((|conj(c)^2 + lam| + (1 - lam)) / (|conj(c)^2 + lam| - (1 - lam)))``."""
    c_phase = complex(c_phase)
    if abs(np.conj(c_phase) ** 2 + 1.0) < 1e-14:
        raise KobdynError("conj(c)^2 = -1: the phase is tangential")
    w = abs(np.conj(c_phase) ** 2 + dilation)
    return float(np.log((w + (1.0 - dilation)) / (w - (1.0 - dilation))))


@dataclass
class StepLimitReport:
    formula: float
    empirical: float
    gap: float
    admissible: bool
    phase: complex
    passed: bool
    tail: np.ndarray = field(repr=False, default=None)

    def as_dict(self):
        return {"formula": self.formula, "empirical": self.empirical, "gap": self.gap,
                "admissible": self.admissible, "phase": [self.phase.real, self.phase.imag],
                "passed": self.passed}


def step_limit_formula_check(f, dw, c_phase, seq, tol=1e-4, window=10):
    """Compare ``lim k(z_k, f(z_k))`` along ``seq`` with the closed-form limit."""
    seq = np.atleast_2d(np.asarray(seq, complex))
    diag = ball.classify_sequence(seq, dw.point, window=min(window, len(seq)))
    zeta = ball.inner(seq[-1], dw.point)
    phase = (1.0 - zeta) / abs(1.0 - zeta)
    value = step_limit_formula(dw.dilation, c_phase)
    fb = transport(f, "ball")
    chart = working_chart(fb)
    P = chart.to_chart(seq[-window:])
    emp = ball.distances(chart.domain, P, chart.map(P))
    gap = abs(float(emp[-1]) - value)
    return StepLimitReport(value, float(emp[-1]), gap, diag.is_admissible, complex(phase),
                           gap < tol and diag.is_admissible, emp)


def koranyi_family(a, n_family=8, length=30, seed=0, max_angle=1.2, max_perp=0.5):
    """Seeded sequences converging to ``a`` inside Koranyi regions.

    Sequence ``j`` has ``<z, a> = 1 - 2^{-k} e^{i theta_j}`` and an
    orthogonal part taking a fixed fraction ``rho_j < max_perp`` of the
    available room ``1 - |<z,a>|^2``.
    """
    a = ball.as_boundary_point(a)
    q = a.size
    rng = np.random.default_rng(seed)
    U = ball.unitary_to_e1(a)
    out = []
    for _ in range(n_family):
        theta = rng.uniform(-max_angle, max_angle)
        rho = rng.uniform(0.0, max_perp)
        d = rng.normal(size=q - 1) + 1j * rng.normal(size=q - 1)
        d = d / np.linalg.norm(d) if q > 1 else d
        seq = np.zeros((length, q), complex)
        for k in range(1, length + 1):
            zeta = 1.0 - 2.0 ** (-k) * np.exp(1j * theta)
            room = 1.0 - abs(zeta) ** 2
            seq[k - 1, 0] = zeta
            if q > 1:
                seq[k - 1, 1:] = np.sqrt(rho * room) * d
        out.append(seq @ np.conj(U))
    return out


@dataclass
class LindelofReport:
    C: float
    max_step: float
    max_special: float
    limit: np.ndarray
    family_limits: list
    all_limits_agree: bool

    def as_dict(self):
        return {"C": self.C, "max_step": self.max_step, "max_special": self.max_special,
                "limit": [[float(v.real), float(v.imag)] for v in np.atleast_1d(self.limit)],
                "all_limits_agree": self.all_limits_agree}


def lindelof_hypotheses(h, seq, a, C, n_family=8, seed=0, limit_tol=1e-3, slack=1e-10):
    """Check the two bounds on ``seq`` and compare the limits of ``h`` along Koranyi sequences."""
    seq = np.atleast_2d(np.asarray(seq, complex))
    a = ball.as_boundary_point(a)
    steps = ball.distances("ball", seq[:-1], seq[1:])
    bad = np.nonzero(steps > C + slack)[0]
    if bad.size:
        raise HypothesisFailed(1, int(bad[0]), float(steps[bad[0]]), C)
    special = ball.special_distance(seq, a)
    bad = np.nonzero(special > C + slack)[0]
    if bad.size:
        raise HypothesisFailed(2, int(bad[0]), float(special[bad[0]]), C)
    hv = h if callable(h) else h.evaluate
    L = np.atleast_1d(hv(seq[-1]))
    fam = [np.atleast_1d(hv(s[-1])) for s in koranyi_family(a, n_family, seed=seed)]
    agree = all(np.linalg.norm(v - L) < limit_tol for v in fam)
    return LindelofReport(C, float(steps.max()) if steps.size else 0.0,
                          float(special.max()), L, fam, agree)
