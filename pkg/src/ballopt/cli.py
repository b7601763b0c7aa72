"""Command-line interface: limit | solve | optimize | sweep | verify.

Exit codes: 0 success, 1 check failure, 2 configuration error, 3 solver
failure.  A structured-text config file supplies the many sweep parameters;
flags override config keys.  Environment overrides: BALLOPT_OUTDIR,
BALLOPT_WORKERS.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .config import ConfigError, RunConfig, parse_config
from .eigsolve import BallSpec, assemble, principal_eigenvalue, rasterize_weight
from .geometry import build_domain
from .limit import WeightParams, eval_w, solve_limit
from .outputs import (
    check_writable,
    fmt_float,
    read_csv,
    shape_boundary_points,
    svg_center_trajectory,
    svg_line_plot,
    write_csv,
    write_json,
)
from .placement import PlacementProblem, default_workers, optimize_center
from .sweep import SweepOptions, run_sweep


def _load_config(args) -> RunConfig:
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    else:
        cfg = _flags_only_config(args)
    for key in ("h", "eps", "stride", "m_bar", "m_under"):
        flag = getattr(args, key.replace("m_bar", "mbar").replace("m_under", "munder"), None)
        if flag is not None:
            setattr(cfg, key, flag)
    if getattr(args, "outdir", None):
        cfg.outdir = args.outdir
    if os.environ.get("BALLOPT_OUTDIR"):
        cfg.outdir = os.environ["BALLOPT_OUTDIR"]
    if os.environ.get("BALLOPT_WORKERS"):
        cfg.workers = int(os.environ["BALLOPT_WORKERS"])
    elif getattr(args, "workers", None):
        cfg.workers = args.workers
    return cfg


def _flags_only_config(args) -> RunConfig:
    domain = getattr(args, "domain", None)
    if not domain:
        raise ConfigError("missing domain section: pass --config or --domain")
    tag, _, rest = domain.partition(":")
    params: dict = {}
    for item in filter(None, rest.split(";")):
        key, _, raw = item.partition("=")
        vals = [float(v) for v in raw.split(",")]
        params[key.strip()] = vals[0] if len(vals) == 1 else tuple(vals)
    return RunConfig(shape_tag=tag.strip(), shape_params=params,
                     m_bar=args.mbar or 1.0, m_under=args.munder or 1.0,
                     source_text=f"flags:{vars(args)}")


def cmd_limit(args) -> int:
    params = WeightParams(dim=args.dim, m_bar=args.mbar, m_under=args.munder,
                          rho=args.rho)
    sol = solve_limit(params)
    payload = {
        "N": params.dim, "m_bar": params.m_bar, "m_under": params.m_under,
        "rho": params.rho, "lambda0": sol.lambda0, "A": sol.coef_inner,
        "B": sol.coef_outer, "gamma": sol.gamma, "phi": sol.phi,
    }
    print(json.dumps({k: (fmt_float(v) if isinstance(v, float) else v)
                      for k, v in payload.items()}, indent=2))
    if args.w_table:
        rs = np.linspace(0.0, args.w_table_rmax, 401)
        with open(args.w_table, "w") as fh:
            fh.write("r,w\n")
            for r, w in zip(rs, eval_w(rs, sol)):
                fh.write(f"{fmt_float(r)},{fmt_float(w)}\n")
    return 0


def cmd_solve(args) -> int:
    cfg = _load_config(args)
    if cfg.eps is None:
        raise ConfigError("eps is required for solve (flag --eps or optimizer.eps)")
    shape = cfg.build_shape()
    domain = build_domain(shape, cfg.resolved_h())
    center = tuple(args.center) if args.center else tuple(
        np.asarray(shape.anchor(), dtype=float))
    op = assemble(domain)
    weight = rasterize_weight(domain, BallSpec(center=center, eps=cfg.eps, dim=domain.dim),
                              cfg.m_bar, cfg.m_under)
    res = principal_eigenvalue(op, weight, polish=True, certify=cfg.certify)
    print(json.dumps({"lambda": fmt_float(res.lam), "residual": fmt_float(res.residual),
                      "iterations": res.iterations, "certified": res.certified}, indent=2))
    if args.u_csv:
        rows = [{"x": p[0], "y": p[1] if domain.dim > 1 else 0.0, "u": v}
                for p, v in zip(domain.node_coords(), res.u.ravel())]
        write_csv(args.u_csv, rows, cfg.config_hash())
    return 0


def cmd_optimize(args) -> int:
    cfg = _load_config(args)
    if cfg.eps is None:
        raise ConfigError("eps is required for optimize (flag --eps or optimizer.eps)")
    shape = cfg.build_shape()
    domain = build_domain(shape, cfg.resolved_h())
    problem = PlacementProblem(domain=domain, eps=cfg.eps, m_bar=cfg.m_bar,
                               m_under=cfg.m_under, guard=cfg.guard,
                               workers=cfg.workers, certify_final=cfg.certify)
    result = optimize_center(problem, stride=cfg.stride, k_best=cfg.k_best)
    payload = {
        "center": [fmt_float(c) for c in result.center],
        "lambda": fmt_float(result.lam),
        "evaluations": result.evaluations,
        "residual": fmt_float(result.eigen.residual),
        "certified": result.eigen.certified,
        "trace": [{"center": list(c), "lambda": fmt_float(l)} for c, l in result.trace],
    }
    print(json.dumps(payload, indent=2))
    if args.svg and domain.dim == 2:
        check_writable(os.path.dirname(args.svg) or ".")
        svg_center_trajectory(args.svg, shape_boundary_points(shape),
                              [result.center], [problem.radius],
                              config_hash=cfg.config_hash(), timestamp=cfg.timestamps)
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    shape = cfg.build_shape()
    domain = build_domain(shape, cfg.resolved_h())
    check_writable(cfg.outdir)
    options = SweepOptions(
        m_bar=cfg.m_bar, m_under=cfg.m_under, eps_list=tuple(cfg.eps_list),
        h=cfg.h, h_blow=cfg.h_blow, stride=cfg.stride, k_best=cfg.k_best,
        guard=cfg.guard, workers=cfg.workers, certify=cfg.certify,
        compute_blowup=cfg.compute_blowup,
    )
    chash = cfg.config_hash()
    rows_done: list[dict] = []

    def persist(rec):
        rows_done.append(rec.to_dict())
        write_csv(os.path.join(cfg.outdir, "records.csv"), rows_done, chash)

    result = run_sweep(domain, options, on_row=persist)
    write_json(os.path.join(cfg.outdir, "report.json"), result.report, chash)

    oks = [r for r in result.records if not r.error]
    if oks:
        eps = [r.eps for r in oks]
        svg_line_plot(os.path.join(cfg.outdir, "lambda_tilde.svg"),
                      [(eps, [r.lam_tilde for r in oks], "k^2 lambda_eps"),
                       (eps, [result.limit.lambda0] * len(eps), "limit value")],
                      "Scaled eigenvalue along the sweep", "eps", "lambda~",
                      config_hash=chash, timestamp=cfg.timestamps)
        pos = [r for r in oks if r.gap_matched and r.gap_matched > 0]
        if pos:
            svg_line_plot(os.path.join(cfg.outdir, "gap_vs_beta.svg"),
                          [([r.beta for r in pos], [r.gap_matched for r in pos], "gap"),
                           ([r.beta for r in pos],
                            [result.limit.phi * math.exp(-r.beta * r.psi_tilde) for r in pos],
                            "phi exp(-beta psi)")],
                          "Eigenvalue gap vs beta", "beta", "log10 gap", logy=True,
                          config_hash=chash, timestamp=cfg.timestamps)
        if domain.dim == 2:
            svg_center_trajectory(os.path.join(cfg.outdir, "centers.svg"),
                                  shape_boundary_points(shape),
                                  [r.center for r in oks],
                                  [math.nan if r.error else
                                   BallSpec(center=r.center, eps=r.eps, dim=2).radius
                                   for r in oks],
                                  config_hash=chash, timestamp=cfg.timestamps)
    n_err = sum(1 for r in result.records if r.error)
    print(json.dumps({"rows": len(result.records), "row_errors": n_err,
                      "outdir": cfg.outdir}, indent=2))
    return 3 if n_err == len(result.records) else 0


def cmd_verify(args) -> int:
    from .verification import run_profile

    results = run_profile(args.profile, workers=args.workers or default_workers())
    failed = [r for r in results if not r.passed]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.name} ({r.seconds:.1f}s): {r.detail}")
    if failed:
        print(f"FAILED: {failed[0].name}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ballopt", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    lim = sub.add_parser("limit", help="solve the measure-1 limit problem")
    lim.add_argument("--dim", type=int, default=2, choices=(1, 2, 3))
    lim.add_argument("--mbar", type=float, required=True)
    lim.add_argument("--munder", type=float, required=True)
    lim.add_argument("--rho", type=float, default=None)
    lim.add_argument("--w-table", default=None, help="write w(r) samples to CSV")
    lim.add_argument("--w-table-rmax", type=float, default=8.0)
    lim.set_defaults(func=cmd_limit)

    def common(sp, eps_required=False):
        sp.add_argument("--config", default=None)
        sp.add_argument("--domain", default=None,
                        help="shape spec, e.g. 'disk:radius=1' or 'rectangle:lo=0,0;hi=2,1'")
        sp.add_argument("--eps", type=float, default=None)
        sp.add_argument("--mbar", type=float, default=None)
        sp.add_argument("--munder", type=float, default=None)
        sp.add_argument("--h", type=float, default=None)
        sp.add_argument("--outdir", default=None)
        sp.add_argument("--workers", type=int, default=None)

    sol = sub.add_parser("solve", help="principal eigenvalue for one ball placement")
    common(sol)
    sol.add_argument("--center", type=float, nargs="+", default=None)
    sol.add_argument("--u-csv", default=None)
    sol.set_defaults(func=cmd_solve)

    opt = sub.add_parser("optimize", help="optimal ball center for one measure")
    common(opt)
    opt.add_argument("--stride", type=float, default=None)
    opt.add_argument("--svg", default=None)
    opt.set_defaults(func=cmd_optimize)

    sw = sub.add_parser("sweep", help="vanishing-measure sweep with reports")
    common(sw)
    sw.set_defaults(func=cmd_sweep)

    ver = sub.add_parser("verify", help="run the acceptance checks")
    ver.add_argument("--profile", choices=("quick", "standard", "full"), default="quick")
    ver.add_argument("--workers", type=int, default=None)
    ver.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, ValueError, MemoryError, OSError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
