"""Command-line front end.

    kobdyn classify|divergence-rate|step|model|valiron|abel|semigroup|orbit --map FILE [options]
    kobdyn verify SUITE [options]

Exit codes: 0 success, 1 bad specification or configuration, 2 a limit
that did not settle (the partial report is still written), 3 a failed
verification property.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import ball, verify
from .errors import (ConstraintViolated, DomainEscape, Inconclusive, KobdynError, NotConverged,
                     SpecError)
from .functional import abel_solve, valiron_klimit, valiron_solve
from .invariants import canonical_dimension, divergence_rate, hyperbolic_step
from .lft import (canonical_semi_model_hyperbolic, hyperbolic_model_domain,
                  parabolic_model_dichotomy, parabolic_model_domain)
from .maps import HORIZON, SelfMap, denjoy_wolff, working_chart
from .semigroups import (Semigroup, classify_semigroup, rate_linearity_check,
                         semigroup_law_residual, semigroup_rate)
from .specs import build, load_config, load_spec, parse_vector

COMMANDS = ("classify", "divergence-rate", "step", "model", "valiron", "abel", "semigroup",
            "verify", "orbit")
RANK_STEPS = 100


class Partial(Exception):
    """A limit failed to settle; ``report`` is written before exiting with 2."""

    def __init__(self, exc, report):
        super().__init__(str(exc))
        self.exc = exc
        self.report = report


# ------------------------------------------------------------- serialisation

def jsonable(x):
    if hasattr(x, "as_dict"):
        return jsonable(x.as_dict())
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if x is None or isinstance(x, str):
        return x
    return repr(x)


def fmt(x):
    """17 significant digits, locale independent."""
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _flatten(prefix, x, rows):
    if isinstance(x, dict):
        for k, v in x.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(x, list) and x and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                           for v in x):
        rows.append((prefix, ";".join(fmt(v) for v in x)))
    elif isinstance(x, list):
        for i, v in enumerate(x):
            _flatten(f"{prefix}[{i}]", v, rows)
    elif isinstance(x, bool) or x is None:
        rows.append((prefix, str(x).lower() if x is not None else ""))
    elif isinstance(x, (int, float)):
        rows.append((prefix, fmt(x) if isinstance(x, float) else str(x)))
    else:
        rows.append((prefix, str(x)))


def render(report, form):
    if form == "json":
        return json.dumps(jsonable(report), indent=2) + "\n"
    if "rows" in report:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(report["columns"])
        for r in report["rows"]:
            w.writerow([fmt(v) if isinstance(v, float) else v for v in r])
        return buf.getvalue()
    rows = []
    _flatten("", jsonable(report), rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("key", "value"))
    w.writerows(rows)
    return buf.getvalue()


def emit(report, config):
    text = render(report, config.format)
    if config.output:
        with open(config.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------------ helpers

def _load_map(args, want="map"):
    if not args.map:
        raise SpecError("--map FILE is required")
    obj, info = build(load_spec(args.map))
    if want == "map" and not isinstance(obj, SelfMap):
        raise SpecError(f"{args.command} needs a self-map, got a {info['kind']} specification")
    if want == "semigroup" and not isinstance(obj, Semigroup):
        raise SpecError(f"{args.command} needs a semigroup_affine_siegel specification, "
                        f"got {info['kind']}")
    return obj, info


def _point(args, f):
    if args.point is None:
        return np.zeros(f.dim, complex) if f.domain == "ball" else ball.cayley(np.zeros(f.dim))
    try:
        doc = json.loads(args.point)
    except json.JSONDecodeError as exc:
        raise SpecError(f"--point is not JSON: {exc}") from exc
    z = parse_vector(doc)
    if z.size != f.dim:
        raise SpecError(f"--point has {z.size} coordinates, the map acts on dimension {f.dim}")
    if not ball.in_domain(f.domain, z):
        raise SpecError(f"--point is not in the {f.domain} domain")
    return z


def _partial(exc):
    p = getattr(exc, "partial", None)
    return None if p is None else jsonable(p)


# ----------------------------------------------------------------- commands

def cmd_classify(args, config):
    f, info = _load_map(args)
    try:
        dw = denjoy_wolff(f, max_iter=config.max_iter)
    except (Inconclusive, NotConverged) as exc:
        raise Partial(exc, {"status": type(exc).__name__, "partial": _partial(exc)})
    return dw.as_dict()


def cmd_divergence_rate(args, config):
    f, _ = _load_map(args)
    x = _point(args, f)
    max_m = args.steps if args.steps is not None else 2000
    try:
        est = divergence_rate(f, x, max_m=max_m, tol=config.tol)
    except NotConverged as exc:
        raise Partial(exc, {"status": "NotConverged", "partial": _partial(exc)})
    return est.as_dict()


def cmd_step(args, config):
    f, _ = _load_map(args)
    x = _point(args, f)
    try:
        est = hyperbolic_step(f, x, m=args.m, tol=config.tol, cap=config.max_iter)
    except NotConverged as exc:
        raise Partial(exc, {"status": "NotConverged", "partial": _partial(exc)})
    return est.as_dict()


def cmd_model(args, config):
    f, info = _load_map(args)
    form = info.get("form")
    out = {"map_kind": info["kind"]}
    if info["kind"] == "lft_hyperbolic":
        rep = canonical_semi_model_hyperbolic(form, samples=config.samples, seed=config.seed)
        _, _, dom = hyperbolic_model_domain(form, n=config.samples, seed=config.seed)
        out.update(form=form.as_dict(), semi_model=rep.as_dict(), model_domain=dom)
    elif info["kind"] == "lft_parabolic":
        rep = parabolic_model_dichotomy(form, samples=config.samples, seed=config.seed)
        _, _, dom = parabolic_model_domain(form, n=config.samples, seed=config.seed)
        out.update(form=form.as_dict(), semi_model=rep.as_dict(), model_domain=dom)
    else:
        out["semi_model"] = None
    try:
        lim = canonical_dimension(f, cap=min(config.cap, RANK_STEPS), eig_tol=config.eig_tol)
    except NotConverged as exc:
        out["limit_metric"] = {"status": "NotConverged", "partial": _partial(exc)}
        raise Partial(exc, out)
    out["limit_metric"] = lim.as_dict()
    out["k"] = lim.rank
    return out


def _valiron(f, config):
    try:
        return valiron_solve(f, cap=config.cap, samples=config.samples, seed=config.seed)
    except NotConverged as exc:
        raise Partial(exc, {"status": "NotConverged", "partial": _partial(exc)})


def cmd_valiron(args, config):
    f, _ = _load_map(args)
    sol = _valiron(f, config)
    out = sol.as_dict()
    out["dw"] = sol.dw.as_dict()
    out["k_limit"] = valiron_klimit(sol, seed=config.seed)
    return out


def cmd_abel(args, config):
    f, _ = _load_map(args)
    sol = _valiron(f, config)
    ab = abel_solve(f, sol)
    return {"abel": ab.as_dict(), "valiron": sol.as_dict()}


def cmd_semigroup(args, config):
    phi, _ = _load_map(args, want="semigroup")
    grid = tuple(args.t_grid) if args.t_grid else (0.5, 1.0, 2.0, 4.0)
    out = {"semigroup": phi.as_dict(),
           "law": semigroup_law_residual(phi, n=min(config.samples, 100), seed=config.seed)}
    try:
        out["rate"] = semigroup_rate(phi, tol=config.tol)
        out["linearity"] = rate_linearity_check(phi, grid, tol=config.tol)
        out["classification"] = classify_semigroup(phi)
    except (NotConverged, Inconclusive) as exc:
        out["status"] = type(exc).__name__
        out["partial"] = _partial(exc)
        raise Partial(exc, out)
    return out


def cmd_orbit(args, config):
    """Orbit rows for plotting; distances are evaluated in the working chart."""
    f, _ = _load_map(args)
    x = _point(args, f)
    steps = args.steps if args.steps is not None else 100
    if steps < 0:
        raise SpecError("--steps must be nonnegative")
    chart = working_chart(f)
    q = f.dim
    columns = ["m"] + [f"{part}_z{j + 1}" for j in range(q) for part in ("re", "im")] + [
        "norm", "k_z0_zm", "k_zm_zm1"]
    P0 = chart.to_chart(x)
    P = [P0]
    error = None
    for m in range(1, steps + 2):
        nxt = chart.map(P[-1])
        bad = not np.all(np.isfinite(nxt)) or (
            chart.domain == "siegel" and np.abs(nxt).max() > HORIZON)
        if not bad:
            bad = not (chart.ball_defect(nxt) > 0 if chart.domain == "siegel"
                       else ball.ball_defect(nxt) > 0)
        if bad:
            error = f"DomainEscape: iterate {m} left the representable domain"
            break
        P.append(nxt)
    P = np.array(P)
    Z = np.atleast_2d(chart.from_chart(P))
    d0 = ball.distances(chart.domain, P0[None], P)
    dstep = ball.distances(chart.domain, P[:-1], P[1:])
    rows = []
    n_rows = min(steps + 1, len(P))
    for m in range(n_rows):
        coords = [float(v) for z in Z[m] for v in (z.real, z.imag)]
        kstep = float(dstep[m]) if m < len(dstep) else ""
        rows.append([m] + coords + [float(np.linalg.norm(Z[m])), float(d0[m]), kstep])
    if error is not None:
        rows.append(["error", error] + [""] * (len(columns) - 2))
    out = {"columns": columns, "rows": rows}
    if error is not None:
        raise Partial(DomainEscape(error), out)
    return out


def cmd_verify(args, config):
    rep = verify.run_suite(args.suite, samples=args.samples, seed=config.seed)
    return rep.as_dict()


HANDLERS = {
    "classify": cmd_classify,
    "divergence-rate": cmd_divergence_rate,
    "step": cmd_step,
    "model": cmd_model,
    "valiron": cmd_valiron,
    "abel": cmd_abel,
    "semigroup": cmd_semigroup,
    "verify": cmd_verify,
    "orbit": cmd_orbit,
}


# ------------------------------------------------------------------- parser

def build_parser():
    ap = argparse.ArgumentParser(prog="kobdyn", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--map", help="JSON map or semigroup specification")
    common.add_argument("--tol", type=float)
    common.add_argument("--max-iter", type=int, dest="max_iter")
    common.add_argument("--cap", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--eig-tol", type=float, dest="eig_tol")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--point", help='start point as JSON, e.g. "[[0.3, 0], [0, 0.1]]"')
    common.add_argument("--m", type=int, default=1, help="gap of the hyperbolic m-step")
    common.add_argument("--steps", type=int, help="orbit length (orbit, divergence-rate)")
    common.add_argument("--t-grid", type=float, nargs="+", dest="t_grid")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "verify":
            p.add_argument("suite", choices=sorted(verify.SUITES))
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in
                 ("tol", "max_iter", "cap", "samples", "seed", "eig_tol", "output", "format")}
    try:
        config = load_config(overrides)
    except SpecError as exc:
        print(f"kobdyn: {exc}", file=sys.stderr)
        return 1
    header = {"command": args.command, "config": config.as_dict()}
    try:
        report = HANDLERS[args.command](args, config)
    except Partial as p:
        print(f"kobdyn: {type(p.exc).__name__}: {p.exc}", file=sys.stderr)
        emit(p.report if "rows" in p.report else {**header, "status": "partial", **p.report},
             config)
        return 2
    except (SpecError, ConstraintViolated) as exc:
        print(f"kobdyn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (Inconclusive, NotConverged) as exc:
        print(f"kobdyn: {type(exc).__name__}: {exc}", file=sys.stderr)
        emit({**header, "status": type(exc).__name__, "partial": _partial(exc)}, config)
        return 2
    except KobdynError as exc:
        print(f"kobdyn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if "rows" in report:
        emit(report, config)
        return 0
    emit({**header, "status": "ok", **report}, config)
    if args.command == "verify" and not report["passed"]:
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
