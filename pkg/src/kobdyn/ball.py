"""Complex hyperbolic geometry of the unit ball B^q and the Siegel half-space H^q.

Points are plain complex numpy vectors.  Distances use the curvature -1
normalisation, ``k(0, z) = log((1 + |z|) / (1 - |z|))``; the Siegel
half-space is ``{(z1, w) : Im z1 > |w|^2}`` and is identified with the ball
through the Cayley transform ``Psi(z) = i (e1 + z) / (1 - z1)``.

Inner products follow ``<u, v> = sum(u_i * conj(v_i))``.
"""

from dataclasses import dataclass, field

import numpy as np

from ._accel import kernels
from .errors import BoundaryProximity, KobdynError, NotConvergent

EPS_BOUNDARY = 1e-14
BOUNDARY_TOL = 1e-12


def inner(u, v):
    """Hermitian inner product ``sum(u_i conj(v_i))``."""
    return np.sum(np.asarray(u) * np.conj(np.asarray(v)), axis=-1)


def _vec(z):
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        z = z.reshape(1)
    return z


def ball_defect(z):
    """``1 - |z|^2`` computed as ``(1 - |z|)(1 + |z|)``."""
    n = np.linalg.norm(_vec(z), axis=-1)
    return (1.0 - n) * (1.0 + n)


def siegel_defect(p):
    """Defining function ``Im p1 - |p'|^2`` of the Siegel half-space."""
    p = _vec(p)
    return p[..., 0].imag - np.sum(np.abs(p[..., 1:]) ** 2, axis=-1)


def as_ball_point(z, eps=EPS_BOUNDARY):
    z = _vec(z)
    if z.ndim != 1 or z.size < 1:
        raise KobdynError("ball points are nonempty complex vectors")
    if np.linalg.norm(z) >= 1.0 - eps:
        raise BoundaryProximity(f"|z| = {np.linalg.norm(z)!r} is within {eps} of the sphere")
    return z


def as_siegel_point(p, eps=EPS_BOUNDARY):
    p = _vec(p)
    if p.ndim != 1 or p.size < 1:
        raise KobdynError("Siegel points are nonempty complex vectors")
    if siegel_defect(p) <= -eps:
        raise BoundaryProximity(f"Im z1 - |w|^2 = {siegel_defect(p)!r} is not positive")
    return p


def as_boundary_point(a):
    a = _vec(a)
    if abs(np.linalg.norm(a) - 1.0) > BOUNDARY_TOL:
        raise KobdynError(f"boundary points need unit norm, got {np.linalg.norm(a)!r}")
    return a


def in_domain(domain, z, tol=0.0):
    """Membership test; ``tol`` > 0 tolerates points slightly outside."""
    if domain == "ball":
        return bool(np.linalg.norm(z) < 1.0 + tol)
    return bool(siegel_defect(z) > -tol)


# --------------------------------------------------------------- distances

def kobayashi_distance(z, w, eps=EPS_BOUNDARY):
    """Kobayashi distance of B^q, ``log((1 + |T_w z|) / (1 - |T_w z|))``.

    Close pairs are evaluated through ``atanh`` of the pseudo-hyperbolic
    distance, far pairs through the defect product, so both regimes keep
    full relative accuracy.
    """
    z = as_ball_point(z, eps)
    w = as_ball_point(w, eps)
    if z.shape != w.shape:
        raise KobdynError("points of different dimensions")
    return float(kernels.ball_distance_pairs(z[None], w[None])[0])


def siegel_distance(p, q, eps=EPS_BOUNDARY):
    """Kobayashi distance of H^q, equal to the ball distance of Cayley preimages."""
    p = as_siegel_point(p, eps)
    q = as_siegel_point(q, eps)
    if siegel_defect(p) <= 0 or siegel_defect(q) <= 0:
        raise BoundaryProximity("point on the boundary of H^q")
    return float(kernels.siegel_distance_pairs(p[None], q[None])[0])


def distance(domain, z, w):
    if domain == "ball":
        return kobayashi_distance(z, w)
    return siegel_distance(z, w)


def distances(domain, Z, W):
    """Row-wise distances between two stacks of points (no validation)."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    Z, W = np.broadcast_arrays(Z, W)
    if domain == "ball":
        return kernels.ball_distance_pairs(Z, W)
    return kernels.siegel_distance_pairs(Z, W)


# ------------------------------------------------------ infinitesimal metric

def metric_form(domain, z):
    """Hermitian matrix H with ``kappa(z; v)^2 = v^H H v``."""
    z = _vec(z)
    q = z.size
    if domain == "ball":
        d = ball_defect(z)
        if d <= EPS_BOUNDARY:
            raise BoundaryProximity("metric requested at the sphere")
        return 4.0 * (d * np.eye(q) + np.outer(z, np.conj(z))) / d ** 2
    r = siegel_defect(z)
    if r <= 0:
        raise BoundaryProximity("metric requested on the boundary of H^q")
    g = np.concatenate([[1 / 2j], -np.conj(z[1:])])
    H = 4.0 * np.outer(np.conj(g), g) / r ** 2
    H[1:, 1:] += 4.0 * np.eye(q - 1) / r
    return H


def kobayashi_metric(z, v, domain="ball"):
    """Infinitesimal Kobayashi metric ``kappa(z; v)``.

    On the ball this is ``2 sqrt((1-|z|^2)|v|^2 + |<v,z>|^2) / (1-|z|^2)``,
    the normalisation whose radial integral reproduces the distance.
    """
    z = as_ball_point(z) if domain == "ball" else as_siegel_point(z)
    v = _vec(v)
    if domain == "ball":
        d = ball_defect(z)
        val = d * np.vdot(v, v).real + abs(inner(v, z)) ** 2
        return float(2.0 * np.sqrt(val) / d)
    val = np.vdot(v, metric_form(domain, z) @ v).real
    return float(np.sqrt(max(val, 0.0)))


# --------------------------------------------------------- Cayley transform

def cayley_matrix(q):
    """Projective matrix of ``Psi``, acting on homogeneous ``(z, 1)``."""
    M = np.zeros((q + 1, q + 1), dtype=complex)
    M[:q, :q] = 1j * np.eye(q)
    M[0, q] = 1j
    M[q, 0] = -1.0
    M[q, q] = 1.0
    return M


def cayley_inverse_matrix(q):
    M = np.zeros((q + 1, q + 1), dtype=complex)
    M[:q, :q] = 2.0 * np.eye(q)
    M[0, 0] = 1.0
    M[0, q] = -1j
    M[q, 0] = 1.0
    M[q, q] = 1j
    return M


def cayley(z):
    """``Psi(z) = i (e1 + z) / (1 - z1)`` from B^q to H^q."""
    z = _vec(z)
    den = 1.0 - z[..., 0]
    if np.any(np.abs(den) < EPS_BOUNDARY):
        raise BoundaryProximity("Cayley transform evaluated at e1")
    out = 1j * z / den[..., None] if z.ndim > 1 else 1j * z / den
    out[..., 0] = 1j * (1.0 + z[..., 0]) / den
    return out


def cayley_inverse(p):
    """Inverse Cayley transform: ``z1 = (p1 - i)/(p1 + i)``, ``z' = 2 p'/(p1 + i)``."""
    p = _vec(p)
    den = p[..., 0] + 1j
    out = 2.0 * p / den[..., None] if p.ndim > 1 else 2.0 * p / den
    out[..., 0] = (p[..., 0] - 1j) / den
    return out


def ball_defect_from_siegel(p):
    """``1 - |Psi^{-1}(p)|^2`` evaluated without forming the ball point."""
    p = _vec(p)
    return 4.0 * siegel_defect(p) / np.abs(p[..., 0] + 1j) ** 2


# -------------------------------------------------------------- automorphisms

def mobius_matrix(w):
    """Projective matrix of the involution ``phi_w`` swapping ``w`` and 0.

    ``phi_w(z) = (w - P z - s Q z) / (1 - <z, w>)`` with ``P`` the
    orthogonal projection on span(w), ``Q = I - P`` and
    ``s = sqrt(1 - |w|^2)``.  For ``w = 0`` this is ``z -> -z``.
    """
    w = as_ball_point(w)
    q = w.size
    nw = np.linalg.norm(w)
    u = w / nw if nw > 0 else w
    P = np.outer(u, np.conj(u))
    s = np.sqrt((1.0 - nw) * (1.0 + nw))
    M = np.zeros((q + 1, q + 1), dtype=complex)
    M[:q, :q] = -(P + s * (np.eye(q) - P))
    M[:q, q] = w
    M[q, :q] = -np.conj(w)
    M[q, q] = 1.0
    return M


def automorphism_to_origin(w):
    """The involutive ball automorphism with ``phi(w) = 0`` and ``phi(0) = w``."""
    from .maps import lft_map
    return lft_map(mobius_matrix(w), "ball", kind="ball_automorphism",
                   univalent=True, label="phi_w")


def unitary_to_e1(a):
    """A unitary matrix sending the unit vector ``a`` to ``e1``."""
    a = _vec(a) / np.linalg.norm(a)
    q = a.size
    phase = a[0] / abs(a[0]) if abs(a[0]) > 0 else 1.0
    v = a.copy()
    v[0] += phase
    # Householder reflection maps a to -phase e1; fix the phase afterwards.
    H = np.eye(q) - 2.0 * np.outer(v, np.conj(v)) / np.vdot(v, v).real
    U = -np.conj(phase) * H
    return U


# ------------------------------------------------------- horospheres, regions

def horosphere_quotient(z, a):
    """``|1 - <z, a>|^2 / (1 - |z|^2)``; vectorised over leading axes."""
    z = _vec(z)
    return np.abs(1.0 - inner(z, a)) ** 2 / ball_defect(z)


def koranyi_quotient(z, a):
    """``|1 - <z, a>| / (1 - |z|)``; membership in K(a, R) means < R."""
    z = _vec(z)
    n = np.linalg.norm(z, axis=-1)
    return np.abs(1.0 - inner(z, a)) / (1.0 - n)


@dataclass(frozen=True)
class Horosphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_boundary_point(self.center))
        if not self.radius > 0:
            raise KobdynError("horosphere radius must be positive")

    def contains(self, z):
        return horosphere_contains(self, z)


@dataclass(frozen=True)
class KoranyiRegion:
    vertex: np.ndarray
    amplitude: float

    def __post_init__(self):
        object.__setattr__(self, "vertex", as_boundary_point(self.vertex))
        if not self.amplitude > 1:
            raise KobdynError("Koranyi amplitude must exceed 1")

    def contains(self, z):
        return koranyi_contains(self, z)


def horosphere_contains(E, z):
    """Return ``(inside, quotient)`` for the strict inequality ``quotient < R``."""
    qv = float(horosphere_quotient(as_ball_point(z), E.center))
    return qv < E.radius, qv


def koranyi_contains(K, z):
    return bool(koranyi_quotient(as_ball_point(z), K.vertex) < K.amplitude)


# ------------------------------------------------------ sequence diagnostics

def _tail_bounded(values, growth=0.25):
    """Finite-tail boundedness: the second half may not outgrow the first."""
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        return False
    h = len(values) // 2
    if h == 0:
        return True
    return bool(values[h:].max() <= (1.0 + growth) * values[:h].max() + 1e-300)


@dataclass
class SequenceDiagnostics:
    is_restricted: bool
    special_distances: np.ndarray
    is_special: bool
    is_admissible: bool
    koranyi_amplitude_bound: float | None
    special_bounded: bool
    bgp_consistent: bool
    tails: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "is_restricted": self.is_restricted,
            "is_special": self.is_special,
            "is_admissible": self.is_admissible,
            "koranyi_amplitude_bound": self.koranyi_amplitude_bound,
            "special_bounded": self.special_bounded,
            "bgp_consistent": self.bgp_consistent,
            "special_distances_tail": self.tails["special_distances"].tolist(),
        }


def special_distance(z, a):
    """``k(z, <z,a> a)`` via ``2 atanh(sqrt(|z - <z,a>a|^2 / (1 - |<z,a>|^2)))``."""
    z = _vec(z)
    zeta = inner(z, a)
    perp = z - zeta[..., None] * a if z.ndim > 1 else z - zeta * a
    az = np.abs(zeta)
    d = np.sum(np.abs(perp) ** 2, axis=-1) / ((1.0 - az) * (1.0 + az))
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(d < 1.0, 2.0 * np.arctanh(np.sqrt(np.minimum(d, 1.0))), np.inf)


def classify_sequence(seq, a, window=20, tol=1e-8, approach_tol=1e-3, growth=0.25):
    """Tail-based restricted / special / admissible diagnostics at ``a``.

    Every "lim" is decided on the last ``window`` terms.  Restrictedness and
    Koranyi containment are boundedness questions (second half of the tail
    may not exceed the first by more than ``growth``); specialness asks the
    last special distance to be below ``tol`` with a nonincreasing trend.
    The raw tails are returned in ``tails`` so callers can decide again.
    """
    Z = np.atleast_2d(np.asarray(seq, dtype=complex))
    a = as_boundary_point(a)
    if np.any(np.linalg.norm(Z, axis=1) >= 1.0):
        raise NotConvergent("sequence leaves the ball")
    tail = Z[-window:]
    gap = np.linalg.norm(tail - a, axis=1)
    if gap[-1] > approach_tol or gap[-1] > gap[0]:
        raise NotConvergent(f"tail does not approach a (last gap {gap[-1]:.3e})")

    zeta = inner(tail, a)
    az = np.abs(zeta)
    nontangential = np.abs(1.0 - zeta) / (1.0 - az)
    restricted = _tail_bounded(nontangential, growth)

    sd = special_distance(Z, a)
    sd_tail = sd[-window:]
    special_bounded = _tail_bounded(sd_tail + 1.0, growth)
    special = bool(sd_tail[-1] <= tol and sd_tail[-1] <= sd_tail[0] + tol)

    kq = koranyi_quotient(tail, a)
    in_koranyi = _tail_bounded(kq, growth)
    bound = float(kq.max()) if in_koranyi else None

    return SequenceDiagnostics(
        is_restricted=restricted,
        special_distances=sd,
        is_special=special,
        is_admissible=special and restricted,
        koranyi_amplitude_bound=bound,
        special_bounded=special_bounded,
        bgp_consistent=in_koranyi == (restricted and special_bounded),
        tails={"gap": gap, "nontangential": nontangential,
               "special_distances": sd_tail, "koranyi": kq},
    )
