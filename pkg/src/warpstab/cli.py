"""Command-line driver.

Subcommands::

    curvature   tabulate rho, rho', rho'' and the scalar curvature on an r grid
    classify    stability verdicts for one or more values of a
    diagram     theorem-catalog verdict grid over (alpha, a) for rho = r^alpha
    hcurve      the growth-instability threshold as a function of zeta
    certify     search the destabilizing families for Q_a(f) < 0
    eig         first Dirichlet eigenvalue on one truncated domain
    scan        eigenvalue scan over growing domains
    cone        minimal-cone form sweep over cutoff radii
    replay      re-run a recorded command and verify reproduction

Global flags: ``--config <path>``, ``--out <dir>``, ``--format {csv,record}``,
``--tol <real>``, ``--threads <int>``.  Every command writes
``<out>/<command>.csv`` plus a line-delimited JSON record
``<out>/<command>.record``; ``--format`` selects which of the two is echoed
to stdout.  CSV bodies are deterministic: replaying a record must reproduce
them byte for byte.

Manifold config keys (``key = value`` lines, ``#`` comments)::

    interval = half_line | full_line | segment
    interval.lo, interval.hi      # segment only
    n = 3                         # manifold dimension (>= 3)
    fiber.kind = sphere | custom
    fiber.radius = 1.0            # sphere fibers
    fiber.scalar_curvature, fiber.area   # custom fibers
    warping.kind = power | power_log | sinh | cosh | linear | constant | sampled
    warping.coefficient, warping.exponent    # power: c * r^alpha
    warping.exponent, warping.log_power      # power_log: r^alpha log(r+e)^k
    warping.slope, warping.intercept         # linear
    warping.value                            # constant
    warping.grid, warping.values             # sampled (comma-separated)

Command parameters (a, a_grid, r_min, ...) may also be given in the config
file under the same names as the flags (dashes become underscores); flags
take precedence.

Exit codes: 0 success, 1 numeric failure, 2 configuration error.
"""

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .certificates import (
    InstabilityCertificate,
    SearchBudget,
    certificate_from_record,
    search_instability,
)
from .cones import ConeSpec, cone_quadform, cone_test_function, slope_coefficient
from .config import manifold_from_config, manifold_to_config, parse_kv_file
from .errors import ConfigError, WarpStabError
from .geometry import eval_rho, scalar_curvature
from .quadform import QuadratureSpec
from .spectrum import Discretization, UnstableOn, first_eigenvalue, geometric_schedule, stability_scan
from .thresholds import (
    VerdictStatus,
    classify,
    convex_end_bound,
    diagram,
    growth_threshold,
    h_curve,
    yamabe_bound,
)

_RECORD_TOL = 1e-7


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _csv_body(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _write_outputs(args, command: str, header, rows, record: dict) -> None:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    body = _csv_body(header, rows)
    record = dict(record)
    record.setdefault("command", command)
    record["tool_version"] = __version__
    record["csv_sha256"] = hashlib.sha256(body.encode()).hexdigest()
    record["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    (out_dir / f"{command}.csv").write_text(body)
    with open(out_dir / f"{command}.record", "a") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")
    if args.format == "record":
        print(json.dumps(record, sort_keys=True))
    else:
        sys.stdout.write(body)


def _load_manifold(args) -> tuple[dict, object]:
    if not args.config:
        raise ConfigError("this command needs --config with a manifold description")
    cfg = parse_kv_file(args.config)
    spec = manifold_from_config(cfg)
    return cfg, spec


def _cfg_fallback(args, cfg: dict, name: str, value):
    """Flag value, else config-file key, else the built-in default."""
    if value is not None:
        return value
    return cfg.get(name)


def _float_list(raw) -> list[float]:
    if raw is None:
        return []
    if isinstance(raw, (list, tuple)):
        return [float(x) for x in raw]
    return [float(x) for x in str(raw).split(",") if x.strip()]


def _quadrature(args) -> QuadratureSpec:
    return QuadratureSpec(rel_tol=args.tol) if args.tol else QuadratureSpec()


def _run_config(args, cfg: dict, extra: dict) -> dict:
    run = {"manifold": {k: v for k, v in cfg.items()}}
    run.update(extra)
    return run


# ---------------------------------------------------------------- commands


def cmd_curvature(args) -> int:
    cfg, spec = _load_manifold(args)
    r_min = float(_cfg_fallback(args, cfg, "r_min", args.r_min) or 0.1)
    r_max = float(_cfg_fallback(args, cfg, "r_max", args.r_max) or 100.0)
    r_points = int(_cfg_fallback(args, cfg, "r_points", args.r_points) or 50)
    if not (r_max > r_min > 0):
        raise ConfigError("need r_max > r_min > 0")
    grid = np.geomspace(r_min, r_max, r_points)
    rows = []
    for r in grid:
        rho, d1, d2 = eval_rho(spec, float(r))
        rows.append([float(r), float(rho), float(d1), float(d2), float(scalar_curvature(spec, float(r)))])
    record = _run_config(args, cfg, {"r_min": r_min, "r_max": r_max, "r_points": r_points})
    _write_outputs(args, "curvature", ["r", "rho", "rho_prime", "rho_second", "scalar_curvature"], rows, record)
    return 0


def cmd_classify(args) -> int:
    cfg, spec = _load_manifold(args)
    a_values = _float_list(args.a if args.a is not None else cfg.get("a_grid", cfg.get("a")))
    if not a_values:
        raise ConfigError("classify needs --a (comma-separated values)")
    a_values = sorted(a_values)
    n = spec.n
    ya = float(yamabe_bound(n))
    ke = float(convex_end_bound(n))
    env = spec.warping.asymptotics().power_envelope
    h_val = float(growth_threshold(n, env[0])) if env and env[0] > 1 else None

    def one(a):
        v = classify(spec, a, run_numeric=not args.no_numeric)
        crossed = [name for name, thr in (("yamabe", ya), ("convex_end", ke), ("growth", h_val)) if thr is not None and a > thr]
        return [a, v.status.value, v.provenance, ya, ke, "" if h_val is None else h_val, ";".join(crossed)]

    if args.threads and args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as ex:
            rows = list(ex.map(one, a_values))
    else:
        rows = [one(a) for a in a_values]
    record = _run_config(args, cfg, {"a_values": a_values, "verdicts": [r[1] for r in rows]})
    _write_outputs(
        args,
        "classify",
        ["a", "status", "provenance", "yamabe_bound", "convex_end_bound", "growth_threshold", "crossed"],
        rows,
        record,
    )
    return 0


def cmd_diagram(args) -> int:
    cfg = parse_kv_file(args.config) if args.config else {}
    n = int(_cfg_fallback(args, cfg, "n", args.n) or 3)
    alpha_grid = _float_list(args.alpha_grid or cfg.get("alpha_grid")) or list(
        np.linspace(1.0, 5.0, 17)
    )
    a_grid = _float_list(args.a_grid or cfg.get("a_grid")) or list(np.linspace(0.0, 0.5, 21))
    cells = diagram(n, a_grid, alpha_grid)
    rows = [
        [c.alpha, c.a, c.verdict, ";".join(c.stable_by), ";".join(c.unstable_by)] for c in cells
    ]
    record = _run_config(args, cfg, {"n": n, "alpha_grid": alpha_grid, "a_grid": a_grid})
    _write_outputs(args, "diagram", ["alpha", "a", "verdict", "stable_by", "unstable_by"], rows, record)
    return 0


def cmd_hcurve(args) -> int:
    cfg = parse_kv_file(args.config) if args.config else {}
    n = int(_cfg_fallback(args, cfg, "n", args.n) or 3)
    z_min = float(_cfg_fallback(args, cfg, "zeta_min", args.zeta_min) or 1.0 + 1e-4)
    z_max = float(_cfg_fallback(args, cfg, "zeta_max", args.zeta_max) or 1e6)
    z_points = int(_cfg_fallback(args, cfg, "zeta_points", args.zeta_points) or 200)
    grid = np.geomspace(z_min, z_max, z_points)
    curve = h_curve(n, grid)
    rows = [[z, h] for z, h in curve]
    record = _run_config(
        args,
        cfg,
        {
            "n": n,
            "zeta_min": z_min,
            "zeta_max": z_max,
            "limits": [float(yamabe_bound(n)), float(convex_end_bound(n))],
        },
    )
    _write_outputs(args, "hcurve", ["zeta", "h"], rows, record)
    return 0


def _budget_from_args(args, cfg) -> SearchBudget:
    kw = {}
    q = _float_list(args.q_values or cfg.get("q_values"))
    r = _float_list(args.r_values or cfg.get("r_values"))
    b = _float_list(args.betas or cfg.get("betas"))
    if q:
        kw["q_values"] = tuple(q)
    if r:
        kw["r_values"] = tuple(r)
    if b:
        kw["betas"] = tuple(b)
    return SearchBudget(**kw)


def cmd_certify(args) -> int:
    cfg, spec = _load_manifold(args)
    a_raw = _cfg_fallback(args, cfg, "a", args.a)
    if a_raw is None:
        raise ConfigError("certify needs --a")
    a = float(a_raw)
    families = tuple((args.families or cfg.get("families") or "kawai,poly_a,poly_b").split(","))
    budget = _budget_from_args(args, cfg)
    result = search_instability(spec, a, families=families, budget=budget, quad=_quadrature(args))
    manifold = manifold_to_config(spec)
    if isinstance(result, InstabilityCertificate):
        fam = result.family
        rows = [[
            "yes",
            fam["kind"],
            json.dumps(fam, sort_keys=True),
            result.q_value,
            result.rayleigh,
        ]]
        record = result.to_record(manifold)
        record.update(_run_config(args, cfg, {"found": True}))
    else:
        rows = [["no", "", "", result.best_q, result.best_rayleigh]]
        record = _run_config(
            args,
            cfg,
            {
                "found": False,
                "a": a,
                "best_q": result.best_q,
                "best_rayleigh": result.best_rayleigh,
                "candidates_tried": result.candidates_tried,
            },
        )
        record["manifold"] = manifold
    _write_outputs(args, "certify", ["found", "family", "parameters", "q_value", "rayleigh"], rows, record)
    return 0


def cmd_eig(args) -> int:
    cfg, spec = _load_manifold(args)
    a = float(_cfg_fallback(args, cfg, "a", args.a) or 0.0)
    lo = float(_cfg_fallback(args, cfg, "lo", args.lo) or 1.0)
    hi = float(_cfg_fallback(args, cfg, "hi", args.hi) or 2.0)
    nodes = int(_cfg_fallback(args, cfg, "nodes", args.nodes) or 2048)
    res = first_eigenvalue(spec, a, Discretization(lo, hi, nodes))
    rows = [[nodes, res.lam1, res.lam1_fine, res.lam1_richardson, res.residual]]
    record = _run_config(
        args,
        cfg,
        {
            "a": a,
            "lo": lo,
            "hi": hi,
            "nodes": nodes,
            "lambda1": res.lam1,
            "lambda1_richardson": res.lam1_richardson,
        },
    )
    _write_outputs(
        args, "eig", ["nodes", "lambda1", "lambda1_fine", "lambda1_richardson", "residual"], rows, record
    )
    return 0


def cmd_scan(args) -> int:
    cfg, spec = _load_manifold(args)
    a = float(_cfg_fallback(args, cfg, "a", args.a) or 0.0)
    lo = float(_cfg_fallback(args, cfg, "lo", args.lo) or 1.0)
    doublings = int(_cfg_fallback(args, cfg, "doublings", args.doublings) or 12)
    max_nodes = int(_cfg_fallback(args, cfg, "max_nodes", args.max_nodes) or 2**16)
    schedule = geometric_schedule(lo, max_doublings=doublings, max_nodes=max_nodes)
    outcome = stability_scan(spec, a, schedule)
    rows = [[r_lo, r_hi, nn, lam] for (r_lo, r_hi, nn, lam) in outcome.rows]
    summary = {
        "a": a,
        "outcome": type(outcome).__name__,
    }
    if isinstance(outcome, UnstableOn):
        summary.update({"domain": list(outcome.domain), "lambda1": outcome.lam1})
    else:
        summary.update({"min_lambda1": outcome.min_lam1, "at_domain": list(outcome.at_domain)})
    record = _run_config(args, cfg, summary)
    _write_outputs(args, "scan", ["lo", "hi", "nodes", "lambda1"], rows, record)
    return 0


def cmd_cone(args) -> int:
    cfg = parse_kv_file(args.config) if args.config else {}
    n = int(_cfg_fallback(args, cfg, "cone_n", args.cone_n) or 8)
    a_values = _float_list(args.a if args.a is not None else cfg.get("a", "1.0"))
    r_values = _float_list(args.r_values or cfg.get("r_values")) or [1e4, 1e5, 1e6]
    cone = ConeSpec(n)
    rows = []
    for a in a_values:
        prev = None
        for r in r_values:
            q = cone_quadform(cone, a, cone_test_function(cone, a, r))
            slope = "" if prev is None else (q - prev[0]) / (math.log(r) - math.log(prev[1]))
            rows.append([n, a, r, q, slope, slope_coefficient(n, a)])
            prev = (q, r)
    record = _run_config(args, cfg, {"cone_n": n, "a_values": a_values, "r_values": r_values})
    _write_outputs(
        args, "cone", ["n", "a", "R", "Q", "slope_estimate", "slope_coefficient"], rows, record
    )
    return 0


def cmd_replay(args) -> int:
    path = Path(args.record)
    if not path.exists():
        raise ConfigError(f"record file not found: {path}")
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not lines:
        raise ConfigError("record file is empty")
    record = json.loads(lines[-1])
    if record.get("type") == "instability_certificate":
        spec = manifold_from_config(record["manifold"])
        recomputed, recorded = certificate_from_record(spec, record)
        ok = math.isclose(recomputed, recorded, rel_tol=_RECORD_TOL, abs_tol=1e-12)
        print(
            f"certificate replay: recomputed Q={recomputed!r}, recorded Q={recorded!r}, "
            f"{'PASS' if ok else 'FAIL'}"
        )
        return 0 if ok else 1
    command = record.get("command")
    if command not in _REPLAYABLE:
        raise ConfigError(f"cannot replay record of command {command!r}")
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        replay_args = _args_from_record(record, tmp)
        _REPLAYABLE[command](replay_args)
        new_body = (Path(tmp) / f"{command}.csv").read_text()
    new_hash = hashlib.sha256(new_body.encode()).hexdigest()
    ok = new_hash == record.get("csv_sha256")
    print(f"replay {command}: csv sha256 {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def _args_from_record(record: dict, out_dir: str) -> argparse.Namespace:
    """Reconstruct a namespace for re-running a recorded tabulation command."""
    ns = argparse.Namespace(
        config=None,
        out=out_dir,
        format="csv",
        tol=None,
        threads=1,
        a=None,
        no_numeric=False,
        r_min=record.get("r_min"),
        r_max=record.get("r_max"),
        r_points=record.get("r_points"),
        n=record.get("n"),
        alpha_grid=",".join(map(repr, record.get("alpha_grid", []))) or None,
        a_grid=",".join(map(repr, record.get("a_grid", []))) or None,
        zeta_min=record.get("zeta_min"),
        zeta_max=record.get("zeta_max"),
        zeta_points=record.get("zeta_points"),
        cone_n=record.get("cone_n"),
        r_values=",".join(map(repr, record.get("r_values", []))) or None,
        q_values=None,
        betas=None,
        families=None,
        lo=record.get("lo"),
        hi=record.get("hi"),
        nodes=record.get("nodes"),
        doublings=record.get("doublings"),
        max_nodes=record.get("max_nodes"),
    )
    if record.get("a_values"):
        ns.a = ",".join(map(repr, record["a_values"]))
    elif record.get("a") is not None:
        ns.a = repr(record["a"])
    manifold = record.get("manifold")
    if manifold:
        import tempfile

        cfg_path = Path(out_dir) / "_manifold.cfg"
        cfg_path.write_text("".join(f"{k} = {v}\n" for k, v in manifold.items()))
        ns.config = str(cfg_path)
    return ns


_REPLAYABLE = {}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="warpstab",
        description="Stability of Delta - a*S on warped products and minimal cones",
    )
    parser.add_argument("--config", help="manifold config file (key = value lines)")
    parser.add_argument("--out", default=".", help="output directory (default: .)")
    parser.add_argument("--format", choices=("csv", "record"), default="csv")
    parser.add_argument("--tol", type=float, default=None, help="quadrature relative tolerance")
    parser.add_argument("--threads", type=int, default=1)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curvature", help="curvature table on an r grid")
    p.add_argument("--r-min", dest="r_min", type=float)
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--r-points", dest="r_points", type=int)
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("classify", help="stability verdicts over an a grid")
    p.add_argument("--a", help="comma-separated a values")
    p.add_argument("--no-numeric", action="store_true", help="theorem layer only")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("diagram", help="(alpha, a) verdict grid for rho = r^alpha")
    p.add_argument("--n", type=int)
    p.add_argument("--alpha-grid", dest="alpha_grid", help="comma-separated exponents")
    p.add_argument("--a-grid", dest="a_grid", help="comma-separated a values")
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("hcurve", help="growth-instability threshold curve")
    p.add_argument("--n", type=int)
    p.add_argument("--zeta-min", dest="zeta_min", type=float)
    p.add_argument("--zeta-max", dest="zeta_max", type=float)
    p.add_argument("--zeta-points", dest="zeta_points", type=int)
    p.set_defaults(func=cmd_hcurve)

    p = sub.add_parser("certify", help="search for an instability certificate")
    p.add_argument("--a")
    p.add_argument("--families", help="comma list from kawai,poly_a,poly_b")
    p.add_argument("--q-values", dest="q_values")
    p.add_argument("--r-values", dest="r_values")
    p.add_argument("--betas")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("eig", help="first eigenvalue on one domain")
    p.add_argument("--a")
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--nodes", type=int)
    p.set_defaults(func=cmd_eig)

    p = sub.add_parser("scan", help="eigenvalue scan over growing domains")
    p.add_argument("--a")
    p.add_argument("--lo", type=float)
    p.add_argument("--doublings", type=int)
    p.add_argument("--max-nodes", dest="max_nodes", type=int)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("cone", help="minimal-cone form sweep")
    p.add_argument("--cone-n", dest="cone_n", type=int)
    p.add_argument("--a", help="comma-separated a values (each >= 1)")
    p.add_argument("--r-values", dest="r_values", help="comma-separated cutoff radii")
    p.set_defaults(func=cmd_cone)

    p = sub.add_parser("replay", help="re-run a recorded command and verify")
    p.add_argument("record", help="path to a .record file")
    p.set_defaults(func=cmd_replay)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except WarpStabError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1


_REPLAYABLE.update(
    {
        "curvature": cmd_curvature,
        "classify": cmd_classify,
        "diagram": cmd_diagram,
        "hcurve": cmd_hcurve,
        "eig": cmd_eig,
        "scan": cmd_scan,
        "cone": cmd_cone,
    }
)


if __name__ == "__main__":
    sys.exit(main())
