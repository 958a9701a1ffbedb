"""JSON map specifications and run configuration.

Complex numbers are written as ``[re, im]`` pairs (a bare real is also
accepted).  Map documents carry a ``kind``:

* ``lft_hyperbolic``: ``lambda``, ``b``, ``D``, ``A``, ``c``, optional ``p``
* ``lft_parabolic``: ``a``, ``b``, ``c``, ``D``, ``A``, optional ``r``, ``p``
* ``ball_automorphism``: ``w`` and optional unitary ``U`` (``z -> U phi_w(z)``)
* ``composition``: ``maps``, a list ``[f, g, ...]`` meaning ``f o g o ...``
* ``semigroup_affine_siegel``: ``lambda``, ``b``, ``omega``, ``mu``

``"transport": "cayley"`` moves a Siegel map to the ball (or a ball map to
H^q).
"""

import json
import os
import warnings
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import ball
from .errors import KobdynError, SpecError
from .lft import (HyperbolicLFTForm, ParabolicLFTForm, hyperbolic_map,
                  parabolic_map, validate_hyperbolic_form, validate_parabolic_form)
from .maps import compose, lft_map, transport
from .semigroups import Semigroup

MAP_KINDS = ("lft_hyperbolic", "lft_parabolic", "ball_automorphism", "composition",
             "semigroup_affine_siegel")


def parse_complex(x):
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise SpecError(f"expected a complex number as [re, im], got {x!r}")


def parse_vector(xs):
    if xs is None:
        return np.zeros(0, dtype=complex)
    if not isinstance(xs, list):
        raise SpecError(f"expected a list of complex numbers, got {xs!r}")
    return np.array([parse_complex(x) for x in xs], dtype=complex)


def parse_matrix(rows):
    if rows is None or rows == []:
        return np.zeros((0, 0), dtype=complex)
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise SpecError("expected a matrix as a list of rows")
    M = np.array([[parse_complex(x) for x in r] for r in rows], dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise SpecError(f"expected a square matrix, got shape {M.shape}")
    return M


def _require(doc, key):
    if key not in doc:
        raise SpecError(f"missing field {key!r} for kind {doc.get('kind')!r}")
    return doc[key]


def _check_split(doc, key, value):
    if key in doc and int(doc[key]) != value:
        raise SpecError(f"{key}={doc[key]} is inconsistent with the block sizes ({key}={value})")


def hyperbolic_form_from(doc, strict_upper=False):
    lam = _require(doc, "lambda")
    if not isinstance(lam, (int, float)):
        raise SpecError("lambda must be a real number")
    form = HyperbolicLFTForm.build(lam, parse_complex(doc.get("b", 0.0)),
                                   parse_vector(doc.get("D", [])),
                                   parse_matrix(doc.get("A", [])),
                                   parse_vector(doc.get("c", [])))
    _check_split(doc, "p", form.p)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return validate_hyperbolic_form(form, strict_upper=strict_upper)


def parabolic_form_from(doc):
    form = ParabolicLFTForm.build(parse_vector(doc.get("a", [])),
                                  parse_complex(doc.get("b", 0.0)),
                                  parse_vector(doc.get("c", [])),
                                  parse_vector(doc.get("D", [])),
                                  parse_matrix(doc.get("A", [])))
    _check_split(doc, "r", form.r)
    _check_split(doc, "p", form.p)
    return validate_parabolic_form(form)


def _ball_automorphism(doc):
    w = parse_vector(_require(doc, "w"))
    if w.size == 0:
        raise SpecError("w must have at least one coordinate")
    try:
        phi = ball.automorphism_to_origin(w)
    except KobdynError as exc:
        raise SpecError(str(exc)) from exc
    if "U" in doc:
        U = parse_matrix(doc["U"])
        if U.shape != (w.size, w.size) or not np.allclose(np.conj(U).T @ U, np.eye(w.size), atol=1e-12):
            raise SpecError("U must be a unitary matrix of the same dimension as w")
        R = np.eye(w.size + 1, dtype=complex)
        R[:-1, :-1] = U
        phi = lft_map(R @ phi.matrix, "ball", kind="ball_automorphism", label="U.phi_w")
    return phi


def build(doc):
    """Parse a map document; returns ``(object, info)``.

    ``object`` is a :class:`SelfMap`, or a :class:`Semigroup` for the
    semigroup kind; ``info`` holds the validated normal form, if any.
    """
    if not isinstance(doc, dict):
        raise SpecError("a map specification is a JSON object")
    kind = doc.get("kind")
    if kind not in MAP_KINDS:
        raise SpecError(f"unknown kind {kind!r}; expected one of {', '.join(MAP_KINDS)}")
    cayley = doc.get("transport")
    if cayley not in (None, "cayley"):
        raise SpecError(f"unknown transport {cayley!r}")
    info = {"kind": kind}
    try:
        if kind == "semigroup_affine_siegel":
            lam = _require(doc, "lambda")
            phi = Semigroup.affine_siegel_flow(lam, parse_complex(doc.get("b", 0.0)),
                                               [float(x) for x in doc.get("omega", [])],
                                               parse_vector(doc.get("mu", [])),
                                               transport_to="ball" if cayley else None)
            return phi, info
        if kind == "lft_hyperbolic":
            form = hyperbolic_form_from(doc)
            f = hyperbolic_map(form)
            info["form"] = form
        elif kind == "lft_parabolic":
            form = parabolic_form_from(doc)
            f = parabolic_map(form)
            info["form"] = form
        elif kind == "ball_automorphism":
            f = _ball_automorphism(doc)
        else:
            parts = _require(doc, "maps")
            if not isinstance(parts, list) or not parts:
                raise SpecError("composition needs a nonempty list of maps")
            built = [build(p)[0] for p in parts]
            if any(isinstance(g, Semigroup) for g in built):
                raise SpecError("semigroups cannot appear inside a composition")
            f = built[-1]
            for g in reversed(built[:-1]):
                if g.domain != f.domain or g.dim != f.dim:
                    raise SpecError("composed maps must share domain and dimension")
                f = compose(g, f)
    except SpecError:
        raise
    except (KobdynError, ValueError, TypeError) as exc:
        raise SpecError(f"{type(exc).__name__}: {exc}") from exc
    if cayley:
        f = transport(f, "siegel" if f.domain == "ball" else "ball")
    return f, info


def load_spec(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed JSON in {path}: {exc}") from exc
    return doc


# --------------------------------------------------------------- run config

@dataclass(frozen=True)
class RunConfig:
    tol: float = 1e-8
    max_iter: int = 100_000
    cap: int = 10_000
    samples: int = 1000
    seed: int = 0
    eig_tol: float = 1e-6
    output: str | None = None
    format: str = "json"

    def __post_init__(self):
        for name in ("tol", "eig_tol"):
            if not getattr(self, name) > 0:
                raise SpecError(f"{name} must be positive")
        for name in ("max_iter", "cap", "samples"):
            if int(getattr(self, name)) <= 0:
                raise SpecError(f"{name} must be a positive count")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise SpecError("seed must be a 64-bit unsigned integer")
        if self.format not in ("json", "csv"):
            raise SpecError("format must be json or csv")

    def as_dict(self):
        return asdict(self)


def load_config(overrides=None, env=None):
    """Defaults, then the JSON file named by ``KOBDYN_CONFIG``, then ``overrides``."""
    env = os.environ if env is None else env
    values = {}
    path = env.get("KOBDYN_CONFIG")
    if path:
        doc = load_spec(path)
        if not isinstance(doc, dict):
            raise SpecError("KOBDYN_CONFIG must point to a JSON object")
        values.update(doc)
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    known = {f.name for f in fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise SpecError(f"unknown config keys: {sorted(unknown)}")
    for name in ("max_iter", "cap", "samples", "seed"):
        if name in values:
            v = values[name]
            if isinstance(v, bool) or not float(v).is_integer():
                raise SpecError(f"{name} must be an integer")
            values[name] = int(v)
    try:
        return RunConfig(**values)
    except (TypeError, ValueError) as exc:
        raise SpecError(str(exc)) from exc
