"""
tubewave command line: solve | sweep | verify.

    python backend/tubewave/main.py solve  --config regression/exponential_bump_g1.json
    python backend/tubewave/main.py sweep  --config cfg.json --omega-range 1:20:8
    python backend/tubewave/main.py verify --config cfg.json --golden golden/

Exit codes: 0 ok, 2 bad config, 3 solver failure, 4 failed gate.
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from dotenv import load_dotenv

from dispersion import build_context
from errors import ConfigError, GateError, TubeWaveError
from fields import BoundaryForcing, boundary_error, check_boundary, check_residuals, residual_report, solve_fields
from jost_solver import solve_jost
from oracle import check_agreement, compare, solve_ode
from reports import (
    compare_golden, plot_pressure, summary_rows, write_dispersion, write_fields,
    write_snapshots, write_summary, write_sweep_summary,
)
from run_config import apply_overrides, load_config
from wall_profile import AsymptoticsViolated, check_asymptotics

load_dotenv()
logging.basicConfig(
    level=os.getenv("TUBEWAVE_LOG_LEVEL", "INFO").upper(),
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)
logger = logging.getLogger(__name__)

BOUNDARY_TOL = 1e-10


class WeierstrassViolation(GateError):
    pass


@dataclass
class RunResult:
    omega: float
    ctx: object
    jost: object
    fields: object
    residuals: dict
    boundary_error: float
    abs_q: np.ndarray


def run_frequency(config, omega):
    """Context, Jost solution and fields for one frequency; gates are left to the caller."""
    n = config.numerics
    try:
        check_asymptotics(config.profile, n.x_max, 1e-6)
    except AsymptoticsViolated as e:
        logger.warning(f"⚠️ {e}")
    ctx = build_context(config.tube, config.spectrum, config.profile, omega, n.x_max, n.tol)
    grid = n.points
    jost = solve_jost(ctx, grid, n.tol, n.n_max, n.nodes_per_panel, n.panel_scale)
    forcing = BoundaryForcing(p0=config.p0, omega=omega)
    fields, node_fields = solve_fields(jost, ctx, forcing)
    residuals = residual_report(node_fields, ctx)
    return RunResult(
        omega=omega, ctx=ctx, jost=jost, fields=fields, residuals=residuals,
        boundary_error=boundary_error(fields, forcing), abs_q=np.abs(ctx.q(grid)),
    )


def check_weierstrass(jost):
    if not jost.weierstrass_holds:
        raise WeierstrassViolation(f"Neumann term norms exceed (|δ|∫|q|)^n/n! (c = {jost.c:.3e})")
    return jost


def apply_gates(config, result):
    check_residuals(result.residuals, config.numerics.residual_tol)
    check_boundary(result.fields, BoundaryForcing(config.p0, result.omega), BOUNDARY_TOL)
    check_weierstrass(result.jost)


def write_solve_outputs(config, result, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    write_fields(os.path.join(out_dir, "fields.csv"), result.fields, result.abs_q)
    write_summary(
        os.path.join(out_dir, "summary.csv"),
        summary_rows(result.ctx, result.jost, result.fields, result.residuals, result.boundary_error),
    )
    if config.outputs.snapshots > 0:
        write_snapshots(os.path.join(out_dir, "snapshots.csv"), result.fields, config.outputs.snapshots)
    if config.outputs.plots:
        plot_pressure(out_dir, result.fields, title=f"{config.name}, ω = {result.omega:.6g} rad/s")
    logger.info(f"📁 outputs written to {out_dir}")


def _single_omega(config):
    if config.omega is not None:
        return config.omega
    if config.omegas:
        return config.omegas[0]
    raise ConfigError("forcing.omega is required")


def _load(args):
    config = load_config(args.config)
    plots = None if args.plots is None else args.plots == "on"
    return apply_overrides(
        config, omega=args.omega, omega_range=getattr(args, "omega_range", None), out=args.out,
        tol=args.tol, x_max=args.xmax, grid=args.grid, plots=plots,
    )


def cmd_solve(args):
    config = _load(args)
    result = run_frequency(config, _single_omega(config))
    write_solve_outputs(config, result, config.outputs.directory)
    apply_gates(config, result)
    print(f"✅ {config.name}: δ = {result.ctx.delta:.12g}, {result.jost.n_terms} terms, "
          f"max residual {max(result.residuals.values()):.2e}")
    return 0


def _sweep_one(config, omega):
    row = {"omega": omega, "status": "ok", "code": 0}
    try:
        result = run_frequency(config, omega)
        row.update(
            delta=result.ctx.delta, n_terms=result.jost.n_terms, q_l1=result.ctx.q_l1,
            tail_bound=result.jost.tail_bound, max_residual=max(result.residuals.values()),
        )
        apply_gates(config, result)
    except TubeWaveError as e:
        logger.error(f"❌ ω = {omega:.6g}: {e}")
        row.update(status=type(e).__name__, code=e.exit_code, error=str(e))
    return row


def thread_count():
    value = os.getenv("TUBEWAVE_THREADS")
    if not value:
        return min(8, os.cpu_count() or 1)
    try:
        return max(int(value), 1)
    except ValueError as e:
        raise ConfigError(f"TUBEWAVE_THREADS must be an integer (got '{value}')") from e


def cmd_sweep(args):
    config = _load(args)
    omegas = list(config.omegas) if config.omegas else ([config.omega] if config.omega is not None else [])
    if not omegas:
        raise ConfigError("sweep needs at least one frequency (forcing.omega_range or --omega-range)")
    workers = min(thread_count(), len(omegas))
    logger.info(f"🔄 sweeping {len(omegas)} frequencies on {workers} workers")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda w: _sweep_one(config, w), omegas))
    out_dir = config.outputs.directory
    os.makedirs(out_dir, exist_ok=True)
    write_dispersion(os.path.join(out_dir, "dispersion.csv"), rows)
    write_sweep_summary(os.path.join(out_dir, "sweep_summary.csv"), rows)
    failed = [r for r in rows if r["code"]]
    if failed:
        print(f"⚠️ {len(failed)} of {len(rows)} frequencies failed")
        return max(r["code"] for r in failed)
    print(f"✅ sweep of {len(rows)} frequencies written to {out_dir}")
    return 0


def cmd_verify(args):
    config = _load(args)
    n = config.numerics
    result = run_frequency(config, _single_omega(config))
    oracle = solve_ode(result.ctx, n.points, n.oracle_tol, n.oracle_method)
    comparison = compare(result.jost, oracle, n.oracle_tol)
    out_dir = config.outputs.directory
    write_solve_outputs(config, result, out_dir)

    checks = [
        ("residuals", lambda: check_residuals(result.residuals, n.residual_tol)),
        ("boundary", lambda: check_boundary(result.fields, BoundaryForcing(config.p0, result.omega), BOUNDARY_TOL)),
        ("oracle", lambda: check_agreement(comparison, n.oracle_tol)),
        ("weierstrass", lambda: check_weierstrass(result.jost)),
    ]
    golden = args.golden or config.outputs.golden
    if golden:
        checks.append(("golden", lambda: compare_golden(out_dir, golden)))

    print(f"🧪 verify {config.name} at ω = {result.omega:.6g}")
    print(f"  δ = {result.ctx.delta:.12g}, ∫|q| = {result.ctx.q_l1:.6e}, terms = {result.jost.n_terms}")
    for name, value in result.residuals.items():
        print(f"  residual {name:<10} {value:.3e}")
    print(f"  boundary error      {result.boundary_error:.3e}")
    print(f"  oracle deviation    {comparison.deviation:.3e} at x = {comparison.location:.6g}")
    print(f"  tail bound          {result.jost.tail_bound:.3e}")
    failures = []
    for name, check in checks:
        try:
            check()
            print(f"  ✅ {name}")
        except GateError as e:
            print(f"  ❌ {name}: {e}")
            failures.append(name)
    return 4 if failures else 0


def build_parser():
    parser = argparse.ArgumentParser(prog="tubewave", description="Harmonic waves in a non-uniform viscoelastic tube")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler in (("solve", cmd_solve), ("sweep", cmd_sweep), ("verify", cmd_verify)):
        p = sub.add_parser(name)
        p.set_defaults(handler=handler)
        p.add_argument("--config", required=True)
        p.add_argument("--omega", type=float)
        p.add_argument("--out")
        p.add_argument("--tol", type=float)
        p.add_argument("--xmax", type=float)
        p.add_argument("--grid", type=int)
        p.add_argument("--plots", choices=("on", "off"))
        if name == "sweep":
            p.add_argument("--omega-range", dest="omega_range")
        if name == "verify":
            p.add_argument("--golden")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except TubeWaveError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
