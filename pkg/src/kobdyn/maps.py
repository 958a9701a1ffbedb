"""Holomorphic self-maps of B^q and H^q: representation, iteration, classification.

Linear-fractional maps (ball automorphisms, Siegel normal forms, their
compositions and Cayley transports) carry a projective matrix ``M`` acting
on homogeneous coordinates ``(z, 1)``; everything else is a closure.

Orbits that escape to the boundary lose precision quickly in ball
coordinates (``1 - |z|`` underflows after a few dozen hyperbolic steps).
All orbit-driven estimators therefore run in a *chart*: a Siegel
realisation of the map whose Denjoy-Wolff point sits at infinity, where
both the iterates and the distances stay well conditioned.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import ball
from ._accel import kernels
from .errors import (DomainEscape, Inconclusive, KobdynError, NotConverged,
                     SamplingStarved)

FD_STEP = 1e-6
DOMAIN_TOL = 1e-12
HORIZON = 1e100
PARABOLIC_TOL = 1e-6
SNAP_TOL = 1e-6
EIG_DEFECT_MIN = 1e-6


def _vec(z):
    z = np.asarray(z, dtype=complex)
    return z.reshape(1) if z.ndim == 0 else z


@dataclass(frozen=True, eq=False)
class SelfMap:
    """An evaluable holomorphic self-map of ``domain`` ('ball' or 'siegel')."""

    evaluate: Callable
    domain: str
    dim: int
    kind: str
    jacobian: Callable | None = None
    matrix: np.ndarray | None = None
    twin: "SelfMap | None" = None
    univalent: bool = False
    label: str = ""

    def __call__(self, z):
        return self.evaluate(_vec(z))

    @property
    def is_lft(self):
        return self.matrix is not None

    @property
    def is_affine(self):
        if self.matrix is None:
            return False
        q = self.dim
        return bool(np.all(self.matrix[q, :q] == 0))

    def jac(self, z):
        """Exact Jacobian when known, otherwise central differences (h=1e-6 relative)."""
        z = _vec(z)
        if self.jacobian is not None:
            return self.jacobian(z)
        q = self.dim
        J = np.empty((q, q), dtype=complex)
        for j in range(q):
            h = FD_STEP * max(1.0, abs(z[j]))
            e = np.zeros(q, dtype=complex)
            e[j] = h
            J[:, j] = (self(z + e) - self(z - e)) / (2 * h)
        return J


# ---------------------------------------------------------------- constructors

def _lft_eval(M):
    q = M.shape[0] - 1
    A, b, c, d = M[:q, :q], M[:q, q], M[q, :q], M[q, q]

    def evaluate(z):
        if z.ndim == 1:
            return (A @ z + b) / (c @ z + d)
        return (z @ A.T + b) / (z @ c + d)[:, None]

    def jacobian(z):
        den = c @ z + d
        w = (A @ z + b) / den
        return (A - np.outer(w, c)) / den

    return evaluate, jacobian


def lft_map(M, domain, kind="lft", univalent=True, label="", twin=None):
    """Linear-fractional map ``z -> (A z + b) / (c.z + d)`` from its matrix."""
    M = np.array(M, dtype=complex)
    q = M.shape[0] - 1
    if M.shape != (q + 1, q + 1) or q < 1:
        raise KobdynError("LFT matrices are (q+1) x (q+1)")
    evaluate, jacobian = _lft_eval(M)
    return SelfMap(evaluate, domain, q, kind, jacobian=jacobian, matrix=M,
                   twin=twin, univalent=univalent, label=label)


def affine_siegel(L, shift, kind="lft_siegel", label="", univalent=True):
    """Affine self-map ``z -> L z + shift`` of H^q."""
    L = np.atleast_2d(np.asarray(L, dtype=complex))
    q = L.shape[0]
    M = np.zeros((q + 1, q + 1), dtype=complex)
    M[:q, :q] = L
    M[:q, q] = _vec(shift)
    M[q, q] = 1.0
    return lft_map(M, "siegel", kind=kind, label=label, univalent=univalent)


def sample_points(domain, q, n, rng, max_radius=0.95):
    """Seeded interior sample: ball points with norm < max_radius, or their Cayley images."""
    X = rng.normal(size=(n, q)) + 1j * rng.normal(size=(n, q))
    X /= np.linalg.norm(X, axis=1)[:, None]
    X *= max_radius * rng.uniform(size=(n, 1)) ** (1.0 / (2 * q))
    return X if domain == "ball" else ball.cayley(X)


def from_callable(fn, dim, domain, jacobian=None, kind="closure", univalent=False,
                  label="", seed=0, n_check=64):
    """Wrap a user function, checking on a seeded sample that it maps the domain into itself."""
    f = SelfMap(lambda z: _vec(fn(z)), domain, dim, kind, jacobian=jacobian,
                univalent=univalent, label=label)
    rng = np.random.default_rng(seed)
    for z in sample_points(domain, dim, n_check, rng):
        w = f(z)
        if w.shape != (dim,) or not ball.in_domain(domain, w, DOMAIN_TOL):
            raise DomainEscape(f"{label or 'map'} sends {z} outside the {domain}")
    return f


def compose(f, g):
    """``f o g``; LFTs compose by matrix product, anything else by closure."""
    if f.domain != g.domain or f.dim != g.dim:
        raise KobdynError("composition needs matching domains")
    if f.is_lft and g.is_lft:
        kind = "ball_automorphism" if f.kind == g.kind == "ball_automorphism" else "composition"
        return lft_map(f.matrix @ g.matrix, f.domain, kind=kind,
                       univalent=f.univalent and g.univalent,
                       label=f"{f.label}o{g.label}")

    def jac(z):
        return f.jac(g(z)) @ g.jac(z)

    return SelfMap(lambda z: f(g(z)), f.domain, f.dim, "composition", jacobian=jac,
                   univalent=f.univalent and g.univalent, label=f"{f.label}o{g.label}")


def power(f, k):
    if k < 0:
        raise KobdynError("negative powers are not self-maps")
    if f.is_lft:
        g = lft_map(np.linalg.matrix_power(f.matrix, k), f.domain, kind=f.kind,
                    univalent=f.univalent, label=f"{f.label}^{k}")
        if f.twin is not None:
            t = lft_map(np.linalg.matrix_power(f.twin.matrix, k), f.twin.domain,
                        kind=f.twin.kind, univalent=f.univalent, twin=g)
            object.__setattr__(g, "twin", t)
        return g
    out = identity(f.dim, f.domain)
    for _ in range(k):
        out = compose(f, out)
    return out


def identity(q, domain="ball"):
    return lft_map(np.eye(q + 1), domain, kind="ball_automorphism" if domain == "ball"
                   else "lft_siegel", label="id")


def transport(f, to):
    """Conjugate by the Cayley transform into ``to`` ('ball' or 'siegel').

    The result remembers ``f`` as its twin, so chart-based estimators can
    iterate in the Siegel realisation.
    """
    if f.domain == to:
        return f
    if f.twin is not None and f.twin.domain == to:
        return f.twin
    q = f.dim
    C, Ci = ball.cayley_matrix(q), ball.cayley_inverse_matrix(q)
    if f.is_lft:
        M = Ci @ f.matrix @ C if to == "ball" else C @ f.matrix @ Ci
        kind = f.kind if f.kind != "lft_siegel" else "composition"
        return lft_map(M / M[q, q] if M[q, q] != 0 else M, to, kind=kind,
                       univalent=f.univalent, label=f"{f.label}~", twin=f)
    there, back = (ball.cayley_inverse, ball.cayley) if to == "ball" else (ball.cayley, ball.cayley_inverse)
    return SelfMap(lambda z: there(f(back(z))), to, q, "closure",
                   univalent=f.univalent, label=f"{f.label}~", twin=f)


def conjugate(f, phi):
    """``phi o f o phi^{-1}`` for an LFT automorphism ``phi`` of the same domain."""
    if not (f.is_lft and phi.is_lft):
        raise KobdynError("conjugation is implemented for linear-fractional maps")
    M = phi.matrix @ f.matrix @ np.linalg.inv(phi.matrix)
    q = f.dim
    return lft_map(M / M[q, q] if M[q, q] != 0 else M, f.domain, kind=f.kind,
                   univalent=f.univalent, label=f"{phi.label}({f.label})")


# ------------------------------------------------------------------- iteration

def orbit(f, z, n, horizon=np.inf):
    """Array of iterates ``z, f(z), ..., f^n(z)``, truncated if the orbit blows up."""
    z = _vec(z)
    if f.is_lft:
        return kernels.lft_orbit(f.matrix, z, n, horizon, f.domain == "ball")
    out = [z]
    for _ in range(n):
        z = f(z)
        if not np.all(np.isfinite(z)) or np.max(np.abs(z)) > horizon:
            break
        if f.domain == "ball" and np.vdot(z, z).real >= 1.0:
            break
        out.append(z)
    return np.array(out)


def iterate(f, z, m):
    """``f^m(z)``; ``m = 0`` returns ``z``."""
    z = _vec(z)
    if m < 0:
        raise KobdynError("m must be nonnegative")
    if m == 0:
        return z.copy()
    orb = orbit(f, z, m)
    if len(orb) < m + 1:
        raise DomainEscape(f"iterate {len(orb)} left the {f.domain}")
    w = orb[-1]
    if f.domain == "ball":
        if np.linalg.norm(w) > 1.0 + 1e-10:
            raise DomainEscape("iterate left the ball")
    elif ball.siegel_defect(w) < -1e-10 * max(1.0, abs(w[0].imag)):
        raise DomainEscape("iterate left the Siegel half-space")
    return w


# ----------------------------------------------------------------------- charts

@dataclass(frozen=True, eq=False)
class Chart:
    """A working realisation of a map for orbit computations.

    ``map`` lives on ``map.domain``; ``to_chart``/``from_chart`` convert
    points of the original map's domain.  For Siegel charts ``rotation`` is
    the unitary ``U`` with ``ball point = U^H Psi^{-1}(P)``.
    """

    map: SelfMap
    to_chart: Callable
    from_chart: Callable
    source_domain: str
    rotation: np.ndarray | None = None

    @property
    def domain(self):
        return self.map.domain

    def to_ball(self, P):
        """Ball coordinates (of the original ball realisation) of chart points."""
        P = np.asarray(P, dtype=complex)
        if self.domain == "ball":
            return P
        z = ball.cayley_inverse(P)
        U = self.rotation
        return z if U is None else z @ np.conj(U)

    def ball_defect(self, P):
        """``1 - |z|^2`` of the ball point represented by ``P``, computed stably."""
        P = np.asarray(P, dtype=complex)
        if self.domain == "ball":
            return ball.ball_defect(P)
        return ball.ball_defect_from_siegel(P)

    def infinity(self):
        """Ball point sent to infinity by the chart (the Denjoy-Wolff candidate)."""
        e1 = np.zeros(self.map.dim, dtype=complex)
        e1[0] = 1.0
        return e1 if self.rotation is None else np.conj(self.rotation).T @ e1


def _ident(z):
    return np.asarray(z, dtype=complex)


def _polish_eigenvector(M, vals, k):
    """Project eigenvector ``k`` onto the numerical kernel of ``M - mu``.

    ``mu`` is the mean of the eigenvalue cluster around ``vals[k]``; the
    cluster mean is accurate to rounding even when the individual
    eigenvalues of a Jordan block of size s are only ``eps^(1/s)``
    accurate, and so is the kernel it defines.  Distinct eigenvalues caught
    in the window leave the kernel empty and the eigenvector untouched.
    """
    scale = max(1.0, np.abs(vals).max())
    cluster = np.abs(vals - vals[k]) < 1e-3 * scale
    mu = vals[cluster].mean()
    _, sv, Vh = np.linalg.svd(M - mu * np.eye(M.shape[0]))
    kernel = Vh[sv < 1e-8 * max(1.0, sv[0])].conj().T
    return kernel


def refine_boundary_fixed_point(M, a0, tol=0.1):
    """Snap an orbit-estimated boundary point to the nearest boundary eigenvector of ``M``.

    Parabolic orbits approach their attractor only like ``1/m``, so the
    orbit estimate may be a few 1e-3 off; the other boundary fixed point,
    if any, repels and is not where orbits end up.
    """
    q = M.shape[0] - 1
    vals, vecs = np.linalg.eig(M)
    best, best_gap, best_k = None, tol, None
    for k in range(q + 1):
        v = vecs[:, k]
        if abs(v[q]) < 1e-300:
            continue
        a = v[:q] / v[q]
        if abs(np.linalg.norm(a) - 1.0) > 1e-6:
            continue
        gap = np.linalg.norm(a - a0)
        if gap < best_gap:
            best, best_gap, best_k = v, gap, k
    if best is None:
        return a0 / np.linalg.norm(a0)
    K = _polish_eigenvector(M, vals, best_k)
    if K.shape[1]:
        v = K @ (np.conj(K).T @ best)
        if abs(v[q]) > 1e-300:
            best = v
    a = best[:q] / best[q]
    return a / np.linalg.norm(a)


def working_chart(f, a=None, seed_point=None):
    """Pick the best-conditioned realisation of ``f`` for orbit work.

    Siegel maps are used as they are; Cayley transports reuse their Siegel
    twin; other ball LFTs are rotated so that their (refined) boundary
    attractor ``a`` becomes e1 and then Cayley-transported.  Closures on
    the ball stay in ball coordinates.
    """
    q = f.dim
    if f.domain == "siegel":
        return Chart(f, _ident, _ident, "siegel")
    if f.twin is not None and f.twin.domain == "siegel" and a is None:
        return Chart(f.twin, ball.cayley, ball.cayley_inverse, "ball")
    if not f.is_lft:
        return Chart(f, _ident, _ident, "ball")
    if a is None:
        z0 = np.zeros(q, complex) if seed_point is None else _vec(seed_point)
        orb = orbit(f, z0, 4000)
        z = orb[-1]
        if ball.ball_defect(z) > 1e-4:
            return Chart(f, _ident, _ident, "ball")
        a = z / np.linalg.norm(z)
    a = refine_boundary_fixed_point(f.matrix, _vec(a))
    U = ball.unitary_to_e1(a)
    R = np.eye(q + 1, dtype=complex)
    R[:q, :q] = U
    G = ball.cayley_matrix(q) @ R @ f.matrix @ np.conj(R).T @ ball.cayley_inverse_matrix(q)
    G = G / G[q, q]
    scale = np.abs(G[:q, :]).max()
    if np.abs(G[q, :q]).max() * max(1.0, scale) < SNAP_TOL:
        G[q, :q] = 0.0
        # an affine self-map of H^q fixing infinity cannot feed z1 into u
        if q > 1 and np.abs(G[1:q, 0]).max() < SNAP_TOL * max(1.0, scale):
            G[1:q, 0] = 0.0
    g = lft_map(G, "siegel", kind="composition", univalent=f.univalent, label=f"{f.label}@chart")

    def to_chart(z):
        z = np.asarray(z, dtype=complex)
        return ball.cayley(z @ U.T if z.ndim > 1 else U @ z)

    def from_chart(P):
        z = ball.cayley_inverse(P)
        return z @ np.conj(U) if z.ndim > 1 else np.conj(U).T @ z

    return Chart(g, to_chart, from_chart, "ball", rotation=U)


# ----------------------------------------------------------------- fixed points

def _chart_escape_orbit(chart, x, n):
    horizon = HORIZON if chart.domain == "siegel" else np.inf
    return orbit(chart.map, x, n, horizon)


def rounding_floor(chart, P):
    """Rounding floor of a rate estimated from a Siegel-chart orbit, per point.

    Every step adds about ``eps |P|`` of drift to ``r = Im z1 - |u|^2``, so
    after ``m`` steps ``log r`` is off by ``m eps |P| / r`` and a rate
    (a slope in ``m``) by ``eps |P| / r``.  Ball charts return zeros.
    """
    P = np.atleast_2d(P)
    if chart.domain != "siegel":
        return np.zeros(len(P))
    r = np.maximum(ball.siegel_defect(P), 1e-300)
    return np.finfo(float).eps * np.maximum(1.0, np.abs(P).max(axis=1)) / r


def trim_to_floor(chart, orb, budget, keep=16):
    """Longest orbit prefix whose rounding floor stays below ``budget``."""
    over = np.nonzero(rounding_floor(chart, orb) > budget)[0]
    if over.size and over[0] >= keep:
        return orb[:over[0]], True
    return orb, False


def find_fixed_point(f, seeds=None, tol=1e-10, max_iter=100_000, escape_tol=1e-8):
    """Interior fixed point of ``f`` or ``None`` when orbits leave every compact set.

    LFTs are first checked algebraically (interior fixed points are
    eigenvectors ``(p, 1)`` of the matrix).  Orbits are then iterated from
    each seed; an orbit whose ball defect ``1 - |z|^2`` drops below
    ``escape_tol`` counts as escaping.  Hitting ``max_iter`` with neither
    outcome raises :class:`Inconclusive`.
    """
    q = f.dim
    ball_f = transport(f, "ball") if f.domain == "siegel" else f
    if ball_f.is_lft:
        M = ball_f.matrix
        _, vecs = np.linalg.eig(M)
        for k in range(q + 1):
            v = vecs[:, k]
            if abs(v[q]) < 1e-12:
                continue
            p = v[:q] / v[q]
            # eigenvectors of defective (parabolic) matrices are only sqrt(eps)
            # accurate, so candidates this close to the sphere are left to the orbit test
            if ball.ball_defect(p) > EIG_DEFECT_MIN and np.linalg.norm(ball_f(p) - p) < max(tol, 1e-12):
                return p if f.domain == "ball" else ball.cayley(p)
    if seeds is None:
        seeds = [np.zeros(q, complex)] if f.domain == "ball" else [ball.cayley(np.zeros(q))]
    chart = working_chart(f) if f.domain == "ball" else Chart(f, _ident, _ident, "siegel")
    undecided = False
    for s in seeds:
        z = chart.to_chart(_vec(s))
        done = 0
        decided = False
        while done < max_iter:
            step = min(1024, max_iter - done)
            orb = _chart_escape_orbit(chart, z, step)
            done += step
            if len(orb) < 2:
                decided = True
                break
            gaps = ball.distances(chart.domain, orb[:-1], orb[1:])
            hit = np.nonzero(gaps < tol)[0]
            if hit.size:
                p = chart.to_ball(orb[hit[0] + 1])
                if ball.ball_defect(p) > escape_tol:
                    return chart.from_chart(orb[hit[0] + 1]) if f.domain == "ball" else orb[hit[0] + 1]
            if np.min(chart.ball_defect(orb)) < escape_tol or len(orb) < step + 1:
                decided = True
                break
            z = orb[-1]
        if not decided:
            undecided = True
    if undecided and not ball_f.is_lft:
        raise Inconclusive("orbits neither converged nor escaped within max_iter")
    return None


# --------------------------------------------------------------- Denjoy-Wolff

@dataclass
class DenjoyWolffData:
    point: np.ndarray | None
    dilation: float | None
    cls: str
    fixed_point: np.ndarray | None = None
    orbit_trace: dict = field(default_factory=dict)

    def as_dict(self):
        def cx(v):
            return None if v is None else [[float(x.real), float(x.imag)] for x in v]
        return {"class": self.cls, "dw_point": cx(self.point), "dilation": self.dilation,
                "fixed_point": cx(self.fixed_point),
                "diagnostics": {k: v for k, v in self.orbit_trace.items()
                                if not isinstance(v, np.ndarray)}}


def chart_dilation(chart, tol=1e-14):
    """Exact ``lambda_f`` of an affine chart map triangular in z1, else None.

    There ``z1 -> L00 z1 + ...`` with the Denjoy-Wolff point at infinity, so
    the dilation is ``1 / L00`` whenever ``L00`` is real and ``>= 1``.
    """
    M = chart.map.matrix
    q = chart.map.dim
    if chart.domain != "siegel" or M is None:
        return None
    if np.any(M[q, :q] != 0) or np.any(M[0, 1:q] != 0):
        return None
    lam = M[0, 0] / M[q, q]
    if abs(lam.imag) < tol * abs(lam) and lam.real >= 1.0 - tol:
        return 1.0 / lam.real
    return None


def _richardson_quotient(one_minus):
    qs = one_minus[1:] / one_minus[:-1]
    n = len(qs)
    if n < 4:
        return float(qs[-1]) if n else np.nan, qs
    return float(2.0 * qs[-1] - qs[(n - 1) // 2]), qs


def denjoy_wolff(f, seed=None, tol=1e-6, max_iter=100_000, parabolic_tol=PARABOLIC_TOL,
                 escape_tol=1e-6):
    """Denjoy-Wolff point and dilation estimated along an orbit.

    The dilation is estimated twice: (i) tail quotients
    ``(1-|z_{m+1}|)/(1-|z_m|)`` with one Richardson step in ``1/m``, and
    (ii) ``exp(-c)`` from the divergence-rate estimator on the same orbit.
    (ii) is reported; disagreement beyond ``10 tol`` raises Inconclusive.
    """
    from .invariants import rate_from_distances

    q = f.dim
    if seed is None:
        seed = np.zeros(q, complex) if f.domain == "ball" else ball.cayley(np.zeros(q))
    p = find_fixed_point(f, [seed], max_iter=max_iter)
    if p is not None:
        return DenjoyWolffData(None, None, "elliptic", fixed_point=p)

    chart = working_chart(f, seed_point=seed if f.domain == "ball" else None)
    exact = chart_dilation(chart)
    if exact is not None and 1e-12 < 1.0 - exact <= parabolic_tol:
        raise Inconclusive(
            f"dilation {exact:.15g} lies within {parabolic_tol:g} of 1: too close to parabolic to classify",
            partial=DenjoyWolffData(chart.infinity(), exact, "unknown",
                                    orbit_trace={"exact_dilation": exact}))
    x = chart.to_chart(_vec(seed))
    n = 256
    prev = None
    trace = {}
    while True:
        orb = _chart_escape_orbit(chart, x, n)
        truncated = len(orb) < n + 1
        orb, trimmed = trim_to_floor(chart, orb, tol / 100)
        truncated = truncated or trimmed
        defect = chart.ball_defect(orb)
        norms = np.sqrt(np.clip(1.0 - defect, 0.0, 1.0))
        one_minus = defect / (1.0 + norms)
        lam_i, qs = _richardson_quotient(one_minus)
        dists = ball.distances(chart.domain, x[None], orb)
        rate = rate_from_distances(dists, tol=1e-12)
        lam_ii = float(np.exp(-rate["c"]))
        est = (lam_i, lam_ii)
        settled = prev is not None and max(abs(est[0] - prev[0]), abs(est[1] - prev[1])) < tol / 10
        escaped = defect[-1] < escape_tol
        if truncated or (settled and escaped) or n >= max_iter:
            break
        prev = est
        n = min(2 * n, max_iter)

    trace = {"steps": len(orb) - 1, "rounding_trimmed": bool(trimmed), "dilation_quotient": lam_i, "dilation_rate": lam_ii,
             "c": rate["c"], "final_defect": float(defect[-1]),
             "quotients_tail": qs[-10:], "norms_tail": norms[-10:]}
    if not escaped and not truncated:
        raise Inconclusive("orbit has not approached the boundary",
                           partial=DenjoyWolffData(None, lam_ii, "unknown", orbit_trace=trace))

    size = np.abs(orb).max(axis=1)
    if chart.domain == "siegel" and size[-1] > 1e3 * max(1.0, size[0]):
        # the orbit leaves every bounded set of the chart, so it converges to infinity
        a = chart.infinity()
        trace["direction_from"] = "chart_infinity"
    else:
        last = chart.to_ball(orb[len(orb) // 2:])
        dirs = last / np.linalg.norm(last, axis=1)[:, None]
        a = dirs[-1]
        if np.linalg.norm(dirs[-1] - dirs[0]) > 1e-3:
            raise NotConverged("Denjoy-Wolff direction did not stabilise")
        trace["direction_from"] = "orbit"

    if abs(lam_i - lam_ii) > 10 * tol:
        raise Inconclusive(
            f"dilation estimators disagree: quotient {lam_i:.10g} vs rate {lam_ii:.10g}",
            partial=DenjoyWolffData(a, lam_ii, "unknown", orbit_trace=trace))
    cls = "parabolic" if abs(lam_ii - 1.0) <= parabolic_tol else "hyperbolic"
    # Siegel inputs report the DW point in ball coordinates (through Psi^{-1}).
    return DenjoyWolffData(a, lam_ii, cls, orbit_trace=trace)


def classify(f, tol=PARABOLIC_TOL, **kwargs):
    """'elliptic', 'hyperbolic' or 'parabolic'."""
    return denjoy_wolff(f, parabolic_tol=tol, **kwargs).cls


# -------------------------------------------------------------------- Julia

def sample_horosphere(a, R, n, rng, batch=20_000, max_batches=200, inflate=1e-3):
    """Uniform sample of ``n`` points of E(a, R) by rejection.

    E(e1, R) is the ellipsoid ``|z1 - c|^2 / rho1^2 + |z'|^2 / rho2^2 < 1``
    with ``c = 1/(1+R)``, ``rho1 = R/(1+R)``, ``rho2 = sqrt(R/(1+R))``;
    proposals are uniform in a slightly inflated copy (rotated to ``a``)
    and rejected with the exact quotient test.
    """
    a = ball.as_boundary_point(a)
    q = a.size
    U = ball.unitary_to_e1(a)
    axes = np.full(q, np.sqrt(R / (1.0 + R)))
    axes[0] = R / (1.0 + R)
    axes *= 1.0 + inflate
    got = []
    count = 0
    for _ in range(max_batches):
        X = rng.normal(size=(batch, q)) + 1j * rng.normal(size=(batch, q))
        X /= np.linalg.norm(X, axis=1)[:, None]
        X *= rng.uniform(size=(batch, 1)) ** (1.0 / (2 * q))
        X = X * axes
        X[:, 0] += 1.0 / (1.0 + R)
        X = X @ np.conj(U)
        ok = np.linalg.norm(X, axis=1) < 1.0
        keep = X[ok][ball.horosphere_quotient(X[ok], a) < R]
        got.append(keep)
        count += len(keep)
        if count >= n:
            return np.concatenate(got)[:n]
    raise SamplingStarved(f"only {count} of {n} points landed in E(a, {R})")


def horosphere_boundary_points(a, R, n, rng):
    """Points with horosphere quotient exactly ``R`` (up to rounding)."""
    a = ball.as_boundary_point(a)
    q = a.size
    w = (rng.normal(size=(n, q - 1)) + 1j * rng.normal(size=(n, q - 1))) * 0.5
    x = rng.normal(size=n)
    P = np.empty((n, q), dtype=complex)
    P[:, 0] = x + 1j * (1.0 / R + np.sum(np.abs(w) ** 2, axis=1))
    P[:, 1:] = w
    U = ball.unitary_to_e1(a)
    return ball.cayley_inverse(P) @ np.conj(U)


@dataclass
class JuliaReport:
    dilation: float
    per_radius: dict
    worst_margin: float
    violations: int
    passed: bool

    def as_dict(self):
        return {"dilation": self.dilation, "per_radius": self.per_radius,
                "worst_margin": self.worst_margin, "violations": self.violations,
                "passed": self.passed}


def julia_check(f, dw, R_grid=(0.25, 1.0, 4.0), samples=1000, seed=0, margin_tol=1e-8,
                on_boundary=False):
    """Check ``f(E(a, R)) subset E(a, lambda_f R)`` on sampled horosphere points.

    The margin of a sample is ``quotient(f(z)) - lambda_f R``; a positive
    margin above ``margin_tol * max(1, lambda_f R)`` is a violation.
    """
    if dw.point is None or dw.dilation is None:
        raise KobdynError("Julia inclusion needs a non-elliptic map with Denjoy-Wolff data")
    fb = transport(f, "ball")
    rng = np.random.default_rng(seed)
    per = {}
    worst = -np.inf
    bad = 0
    for R in R_grid:
        Z = (horosphere_boundary_points(dw.point, R, samples, rng) if on_boundary
             else sample_horosphere(dw.point, R, samples, rng))
        W = fb(Z)
        target = dw.dilation * R
        margins = ball.horosphere_quotient(W, dw.point) - target
        worst_R = float(margins.max())
        nbad = int(np.sum(margins > margin_tol * max(1.0, target)))
        per[float(R)] = {"worst_margin": worst_R, "violations": nbad}
        worst = max(worst, worst_R)
        bad += nbad
    return JuliaReport(float(dw.dilation), per, float(worst), bad, bad == 0)
