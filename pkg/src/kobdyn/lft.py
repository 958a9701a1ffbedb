"""Normal forms of univalent hyperbolic and parabolic linear-fractional maps of H^q.

Hyperbolic form::

    g(z1, u, v) = (lam z1 + b, D u, A v + c),   u in C^{p-1}, v in C^{q-p}

Parabolic form::

    g(z1, u, v, w) = (z1 + 2i<u,a> + 2i<w,c> + b, u + a, D v, A w)

with u in C^{r-1}, v in C^{p-r}, w in C^{q-p}.  Both are affine maps of
C^q, so they are returned as :func:`kobdyn.maps.affine_siegel` maps; the
model domain, the retraction ``r`` and the automorphism ``tau`` of the
canonical semi-model are written down in closed form and checked against
sampling oracles.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import ball
from .errors import (ConsistencyFailure, ConstraintViolated, DomainEscape, KobdynError,
                     NonzeroCInCaseTwo)
from .maps import affine_siegel, sample_points

PD_TOL = 1e-10
RE_B_TOL = 1e-12
MODULUS_TOL = 1e-12
CASE_TOL = 1e-10
CONSTRAINT_TOL = 1e-12


def _cvec(x):
    return np.atleast_1d(np.asarray(x if x is not None else [], dtype=complex)).ravel()


def _cmat(A, n):
    if A is None or np.size(A) == 0:
        return np.zeros((n, n), dtype=complex)
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if A.shape != (n, n):
        raise KobdynError(f"block A must be {n}x{n}, got {A.shape}")
    return A


def _block_diag(*blocks):
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    k = 0
    for b in blocks:
        m = b.shape[0]
        out[k:k + m, k:k + m] = b
        k += m
    return out


# --------------------------------------------------------------- hyperbolic

@dataclass(frozen=True, eq=False)
class HyperbolicLFTForm:
    lam: float
    b: complex
    D: np.ndarray
    A: np.ndarray
    c: np.ndarray
    checks: dict = field(default_factory=dict)

    @classmethod
    def build(cls, lam, b, D=(), A=None, c=()):
        D, c = _cvec(D), _cvec(c)
        return cls(float(lam), complex(b), D, _cmat(A, c.size), c)

    @property
    def p(self):
        return 1 + self.D.size

    @property
    def q(self):
        return self.p + self.c.size

    @property
    def Q(self):
        A = self.A
        return self.lam * np.eye(A.shape[0]) - np.conj(A).T @ A

    def linear_part(self):
        return _block_diag(np.array([[self.lam]], complex), np.diag(self.D), self.A)

    def shift(self):
        s = np.zeros(self.q, dtype=complex)
        s[0] = self.b
        s[self.p:] = self.c
        return s

    @property
    def axis_shift(self):
        """``Im b / (lam - 1)``: Omega is ``Im z1 > |u|^2 - axis_shift``."""
        return self.b.imag / (self.lam - 1.0)

    def as_dict(self):
        return {"kind": "lft_hyperbolic", "lambda": self.lam,
                "b": [self.b.real, self.b.imag],
                "D": [[v.real, v.imag] for v in self.D],
                "A": [[[v.real, v.imag] for v in row] for row in self.A],
                "c": [[v.real, v.imag] for v in self.c], "p": self.p}


def validate_hyperbolic_form(form, strict_upper=False):
    """Check the normal-form constraints; returns a copy carrying ``checks``.

    The lower bound ``|c|^2 + <Q^{-1} A^* c, A^* c> <= Im b`` is exactly the
    condition for ``g(H^q)`` to lie in ``H^q`` and is always enforced.  The
    upper bound ``Im b < lam - 1`` is reported as a flag and only enforced
    with ``strict_upper``.
    """
    lam, b, D, A, c = form.lam, form.b, form.D, form.A, form.c
    checks = {}
    if not lam > 1.0:
        raise ConstraintViolated("lambda>1", lam - 1.0)
    if abs(b.real) > RE_B_TOL:
        raise ConstraintViolated("b_pure_imaginary", abs(b.real))
    if D.size:
        dev = float(np.abs(np.abs(D) - np.sqrt(lam)).max())
        if dev > MODULUS_TOL * np.sqrt(lam):
            raise ConstraintViolated("|D_ii|=sqrt(lambda)", dev)
    eigs = np.linalg.eigvalsh(form.Q) if c.size else np.array([])
    checks["Q_eigenvalues"] = eigs.tolist()
    if c.size:
        if eigs.min() <= PD_TOL:
            raise ConstraintViolated("Q_positive_definite", float(eigs.min()))
        sv = np.linalg.svd(A, compute_uv=False)
        if sv.min() <= PD_TOL * max(1.0, sv.max()):
            raise ConstraintViolated("A_invertible", float(sv.min()))
        Ac = np.conj(A).T @ c
        lower = float(np.vdot(c, c).real + np.vdot(Ac, np.linalg.solve(form.Q, Ac)).real)
    else:
        lower = 0.0
    checks["lower_bound"] = lower
    margin = b.imag - lower
    checks["lower_margin"] = margin
    if margin < -CONSTRAINT_TOL * max(1.0, lower):
        raise ConstraintViolated("|c|^2+<Q^-1A*c,A*c><=Im b", margin)
    upper = (lam - 1.0) - b.imag
    checks["upper_margin"] = upper
    checks["upper_bound_holds"] = bool(upper > 0)
    if upper <= 0:
        if strict_upper:
            raise ConstraintViolated("Im b<lambda-1", upper)
        warnings.warn(f"Im b = {b.imag:g} is not below lambda - 1 = {lam - 1:g}",
                      stacklevel=2)
    return HyperbolicLFTForm(lam, b, D, A, c, checks)


def hyperbolic_map(form):
    return affine_siegel(form.linear_part(), form.shift(), kind="lft_hyperbolic",
                         label=f"hyp(lam={form.lam:g})")


def apply_hyperbolic_form(form, z):
    z = np.asarray(z, dtype=complex)
    w = hyperbolic_map(form)(z)
    if np.any((ball.siegel_defect(w) <= 0) & (ball.siegel_defect(z) > 0)):
        raise DomainEscape("image left H^q: the form parameters are invalid")
    return w


@dataclass
class SemiModelReport:
    base_dimension: int
    tau_kind: str
    tau_params: dict
    omega_description: str
    retraction: str
    tau: object = None
    tau_model: object = None
    intertwining_residual: float | None = None
    extras: dict = field(default_factory=dict)

    def as_dict(self):
        out = {"base_dimension": self.base_dimension, "tau_kind": self.tau_kind,
               "tau_params": self.tau_params, "omega": self.omega_description,
               "retraction": self.retraction,
               "intertwining_residual": self.intertwining_residual}
        out.update(self.extras)
        return out


def hyperbolic_omega_margin(form, Z):
    """``Im z1 - |u|^2 + Im b/(lam-1)``; positive exactly on Omega."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    u = Z[:, 1:form.p]
    return Z[:, 0].imag - np.sum(np.abs(u) ** 2, axis=1) + form.axis_shift


def forward_entry_time(g, Z, N=200):
    """First ``n <= N`` with ``g^n(z)`` in H^q, or -1."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex)).copy()
    out = np.full(len(Z), -1)
    for n in range(N + 1):
        with np.errstate(invalid="ignore"):
            inside = (out < 0) & (ball.siegel_defect(Z) > 0)
        out[inside] = n
        if np.all(out >= 0):
            break
        with np.errstate(over="ignore", invalid="ignore"):
            Z = g(Z)
    return out


def sample_around(q, n, rng, scale=3.0):
    return scale * (rng.normal(size=(n, q)) + 1j * rng.normal(size=(n, q)))


def _split_samples(margin_fn, q, n, rng, min_margin, scale=3.0):
    members, others = [], []
    while len(members) < n or len(others) < n:
        Z = sample_around(q, 4 * n, rng, scale)
        m = margin_fn(Z)
        members.extend(Z[m > min_margin])
        others.extend(Z[m < -min_margin])
    return np.array(members[:n]), np.array(others[:n])


def model_domain_check(g, margin_fn, q, n=1000, N=200, seed=0, min_margin=1e-3):
    """Compare a closed-form model-domain predicate with forward iteration.

    Members must reach H^q within ``N`` steps and non-members never.  Raises
    :class:`ConsistencyFailure` on any contradiction; returns the counts.
    """
    rng = np.random.default_rng(seed)
    mem, non = _split_samples(margin_fn, q, n, rng, min_margin)
    t_mem = forward_entry_time(g, mem, N)
    t_non = forward_entry_time(g, non, N)
    bad_mem = int(np.sum(t_mem < 0))
    bad_non = int(np.sum(t_non >= 0))
    report = {"members": len(mem), "non_members": len(non), "N": N,
              "member_failures": bad_mem, "non_member_entries": bad_non,
              "max_entry_time": int(t_mem.max()) if len(mem) else 0}
    if bad_mem or bad_non:
        raise ConsistencyFailure(f"model-domain predicate contradicted by iteration: {report}")
    return report


def hyperbolic_model_domain(form, n=1000, N=200, seed=0, check=True):
    """Omega = union of g^{-n}(H^q): description, predicate and oracle report."""
    shift = form.axis_shift

    def contains(z):
        return hyperbolic_omega_margin(form, z) > 0

    desc = f"Im z1 > |u|^2 - {shift:.17g}  (u = z2..z{form.p}; v free in C^{form.q - form.p})"
    report = None
    if check:
        report = model_domain_check(hyperbolic_map(form), lambda Z: hyperbolic_omega_margin(form, Z),
                                    form.q, n, N, seed)
    return desc, contains, report


def _intertwining_residual(g, r, tau, Z):
    lhs = r(g(Z))
    rhs = tau(r(Z))
    return float(np.max(np.abs(lhs - rhs)))


def canonical_semi_model_hyperbolic(form, samples=1000, seed=0):
    """``r(z1,u,v) = (z1,u)`` and ``tau(z1,u) = (lam z1 + b, D u)`` on Lambda."""
    p = form.p
    g = hyperbolic_map(form)
    tau = affine_siegel(_block_diag(np.array([[form.lam]], complex), np.diag(form.D)),
                        np.r_[form.b, np.zeros(p - 1)], kind="lft_hyperbolic", label="tau")
    # Lambda is H^p shifted by i Im b/(lam-1); there tau is (lam w1, D u)
    tau_model = affine_siegel(tau.matrix[:p, :p], np.zeros(p), kind="lft_hyperbolic",
                              label="tau_on_H")

    def r(Z):
        return np.atleast_2d(Z)[:, :p]

    Z = sample_points("siegel", form.q, samples, np.random.default_rng(seed))
    res = _intertwining_residual(g, r, tau, Z)
    return SemiModelReport(
        base_dimension=p, tau_kind="hyperbolic",
        tau_params={"lambda": form.lam, "b": [form.b.real, form.b.imag],
                    "D": [[v.real, v.imag] for v in form.D], "dilation": 1.0 / form.lam,
                    "formula": "tau(z1,u) = (lambda z1 + b, D u)"},
        omega_description=hyperbolic_model_domain(form, check=False)[0],
        retraction=f"r(z1,u,v) = (z1,u) = z[:{p}]",
        tau=tau, tau_model=tau_model, intertwining_residual=res,
        extras={"model_shift": form.axis_shift})


# ---------------------------------------------------------------- parabolic

@dataclass(frozen=True, eq=False)
class ParabolicLFTForm:
    a: np.ndarray
    b: complex
    c: np.ndarray
    D: np.ndarray
    A: np.ndarray
    checks: dict = field(default_factory=dict)

    @classmethod
    def build(cls, a=(), b=0.0, c=(), D=(), A=None):
        a, c, D = _cvec(a), _cvec(c), _cvec(D)
        return cls(a, complex(b), c, D, _cmat(A, c.size))

    @property
    def r(self):
        return 1 + self.a.size

    @property
    def p(self):
        return self.r + self.D.size

    @property
    def q(self):
        return self.p + self.c.size

    @property
    def Q(self):
        A = self.A
        return np.eye(A.shape[0]) - A @ np.conj(A).T

    @property
    def delta(self):
        """``Im b - |a|^2``, the quantity deciding the dichotomy."""
        return self.b.imag - float(np.vdot(self.a, self.a).real)

    def linear_part(self):
        q, r, p = self.q, self.r, self.p
        L = np.eye(q, dtype=complex)
        L[0, 1:r] = 2j * np.conj(self.a)
        L[0, p:] = 2j * np.conj(self.c)
        L[r:p, r:p] = np.diag(self.D)
        L[p:, p:] = self.A
        return L

    def shift(self):
        s = np.zeros(self.q, dtype=complex)
        s[0] = self.b
        s[1:self.r] = self.a
        return s

    def as_dict(self):
        def cx(v):
            return [[x.real, x.imag] for x in v]
        return {"kind": "lft_parabolic", "a": cx(self.a), "b": [self.b.real, self.b.imag],
                "c": cx(self.c), "D": cx(self.D), "A": [cx(row) for row in self.A],
                "r": self.r, "p": self.p}


def parabolic_case(form):
    d = form.delta
    if d > CASE_TOL:
        return "i"
    if d >= -CASE_TOL:
        return "ii"
    return "violated"


def validate_parabolic_form(form):
    """Check the normal-form constraints; returns a copy carrying ``checks``.

    Besides the constraint ``Im b - |a|^2 >= <Q^{-1} c, c>`` with
    ``Q = I - A A^*``, the self-map margin
    ``Im b - |a|^2 - <(I - A^* A)^{-1} c, c>`` is enforced; the two agree
    for normal ``A``.
    """
    checks = {"delta": form.delta, "case": parabolic_case(form)}
    if checks["case"] == "ii" and np.linalg.norm(form.c) > CONSTRAINT_TOL:
        raise NonzeroCInCaseTwo("Im b = |a|^2 forces c = 0")
    if form.D.size:
        dev = float(np.abs(np.abs(form.D) - 1.0).max())
        if dev > MODULUS_TOL:
            raise ConstraintViolated("|D_ii|=1", dev)
    lower = 0.0
    self_map = 0.0
    if form.c.size:
        eigs = np.linalg.eigvalsh(form.Q)
        checks["Q_eigenvalues"] = eigs.tolist()
        if eigs.min() <= PD_TOL:
            raise ConstraintViolated("Q_positive_definite", float(eigs.min()))
        sv = np.linalg.svd(form.A, compute_uv=False)
        if sv.min() <= PD_TOL:
            raise ConstraintViolated("A_invertible", float(sv.min()))
        c = form.c
        lower = float(np.vdot(c, np.linalg.solve(form.Q, c)).real)
        P = np.eye(c.size) - np.conj(form.A).T @ form.A
        self_map = float(np.vdot(c, np.linalg.solve(P, c)).real)
    checks["lower_bound"] = lower
    margin = form.delta - lower
    checks["margin"] = margin
    if margin < -CONSTRAINT_TOL * max(1.0, lower):
        raise ConstraintViolated("Im b-|a|^2>=<Q^-1c,c>", margin)
    sm = form.delta - self_map
    checks["self_map_margin"] = sm
    if sm < -CONSTRAINT_TOL * max(1.0, self_map):
        raise ConstraintViolated("self_map", sm)
    return ParabolicLFTForm(form.a, form.b, form.c, form.D, form.A, checks)


def parabolic_map(form):
    return affine_siegel(form.linear_part(), form.shift(), kind="lft_parabolic",
                         label="par")


def apply_parabolic_form(form, z):
    return parabolic_map(form)(np.asarray(z, dtype=complex))


def parabolic_omega_margin(form, Z):
    """Signed margin of Omega: +inf in case i, ``Im z1 - |u|^2 - |v|^2`` in case ii."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    if parabolic_case(form) == "i":
        return np.full(len(Z), np.inf)
    return Z[:, 0].imag - np.sum(np.abs(Z[:, 1:form.p]) ** 2, axis=1)


def parabolic_model_dichotomy(form, samples=1000, seed=0):
    """Model domain and canonical semi-model in the two cases of the dichotomy."""
    form = form if form.checks else validate_parabolic_form(form)
    case = parabolic_case(form)
    if case == "i":
        return SemiModelReport(
            base_dimension=0, tau_kind="trivial", tau_params={},
            omega_description=f"C^{form.q}", retraction="constant",
            extras={"case": "i", "delta": form.delta})
    p, r = form.p, form.r
    L = form.linear_part()[:p, :p]
    s = form.shift()[:p]
    tau = affine_siegel(L, s, kind="lft_parabolic", label="tau")

    def rr(Z):
        return np.atleast_2d(Z)[:, :p]

    g = parabolic_map(form)
    Z = sample_points("siegel", form.q, samples, np.random.default_rng(seed))
    res = _intertwining_residual(g, rr, tau, Z)
    moving = np.linalg.norm(form.a) > 0 or abs(form.b) > 0
    if moving:
        kind = "parabolic"
    elif np.allclose(form.D, 1.0):
        kind = "identity"
    else:
        kind = "elliptic"
    return SemiModelReport(
        base_dimension=p, tau_kind=kind,
        tau_params={"a": [[x.real, x.imag] for x in form.a], "b": [form.b.real, form.b.imag],
                    "D": [[x.real, x.imag] for x in form.D],
                    "formula": "tau(z1,u,v) = (z1 + 2i<u,a> + b, u + a, D v)"},
        omega_description=f"Im z1 > |u|^2 + |v|^2  (u = z2..z{r}, v = z{r + 1}..z{p}; "
                          f"w free in C^{form.q - p})",
        retraction=f"r(z1,u,v,w) = (z1,u,v) = z[:{p}]",
        tau=tau, tau_model=tau, intertwining_residual=res,
        extras={"case": "ii", "delta": form.delta})


def parabolic_model_domain(form, n=1000, N=200, seed=0, check=True):
    case = parabolic_case(form)
    margin = lambda Z: parabolic_omega_margin(form, Z)  # noqa: E731
    desc = f"C^{form.q}" if case == "i" else "Im z1 > |u|^2 + |v|^2"

    def contains(z):
        return margin(z) > 0

    report = None
    if check:
        if case == "i":
            rng = np.random.default_rng(seed)
            # entry takes about (|u|^2 - Im z1) / delta steps, so stay near the origin
            Z = sample_around(form.q, n, rng, scale=1.0)
            t = forward_entry_time(parabolic_map(form), Z, N)
            report = {"members": n, "non_members": 0, "N": N,
                      "member_failures": int(np.sum(t < 0)), "non_member_entries": 0,
                      "max_entry_time": int(t.max())}
            if report["member_failures"]:
                raise ConsistencyFailure(f"points of C^q never entered H^q: {report}")
        else:
            report = model_domain_check(parabolic_map(form), margin, form.q, n, N, seed)
    return desc, contains, report
