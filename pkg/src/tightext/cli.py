"""Command-line frontend: extensions on graph files and image inpainting.

Exit codes: 0 success, 1 solver failure (non-convergence, stall), 2 input
error.  All runs are deterministic for identical inputs and flags.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from .graph import GraphFormatError, VertexFunction, lipschitz_profile, load_graph
from .harmonic import IterationConfig, extend_componentwise
from .imaging import (
    ImageGrid,
    InpaintStalled,
    PatchConfig,
    inpaint,
    load_masked_image,
    read_image,
    write_image,
)
from .oracle import MAX_ENERGY_DIM, OracleConfig, brute_force_Is, brute_force_prox
from .tight import AdmmConfig, energy_Is, minimize_Is, prox_conj_group_maxnorm_pow, prox_group_maxnorm_pow

__all__ = ["main"]


def _write_report(lines: dict, path: str | None) -> None:
    text = "".join(f"{k}={v}\n" for k, v in lines.items())
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stderr.write(text)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _cmd_extend(args) -> int:
    t0 = time.perf_counter()
    prob = load_graph(args.graph_file)
    report: dict = {
        "command": "extend",
        "method": args.method,
        "nodes": prob.graph.node_count,
        "interior": prob.interior.size,
        "dim": prob.dim,
    }
    if args.method == "componentwise":
        cfg = IterationConfig(tau=args.tau, tol=args.tol, max_iters=args.max_iters)
        u, rep = extend_componentwise(prob, cfg)
        report.update(
            tau=args.tau,
            iterations=rep.iterations,
            converged=rep.converged,
            step_norm=_fmt(rep.final_step_norm),
            residual=_fmt(rep.residual),
        )
        converged = rep.converged
    else:
        cfg = AdmmConfig(s=args.s, gamma=args.gamma, tol_primal=args.tol,
                         tol_dual=args.tol, max_iters=args.max_iters)
        u, rep = minimize_Is(prob, cfg)
        report.update(
            s=args.s,
            gamma=args.gamma,
            iterations=rep.iterations,
            converged=rep.converged,
            primal_residual=_fmt(rep.primal_residual),
            dual_residual=_fmt(rep.dual_residual),
            energy=_fmt(rep.objective),
        )
        converged = rep.converged
    profile = lipschitz_profile(u, prob)
    if len(profile):
        report["sup_lipschitz"] = _fmt(profile.sorted_desc[0])
    report["wall_time_s"] = f"{time.perf_counter() - t0:.6f}"
    _write_report(report, args.report)

    if not converged:
        print("error: solver did not converge within the iteration budget", file=sys.stderr)
        return 1
    lines = "".join(
        f"u {x} " + " ".join(_fmt(v) for v in u.data[x]) + "\n"
        for x in range(u.node_count)
    )
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(lines)
    else:
        sys.stdout.write(lines)
    return 0


def _cmd_inpaint(args) -> int:
    t0 = time.perf_counter()
    img = load_masked_image(args.image, args.mask)
    iter_cfg = IterationConfig(tau=args.tau, tol=args.tol, max_iters=args.max_iters)
    admm_cfg = AdmmConfig(s=args.s, gamma=args.gamma, tol_primal=args.tol,
                          tol_dual=args.tol, max_iters=args.max_iters)
    patch_cfg = PatchConfig(patch_half=args.patch, radius=args.radius,
                            neighbors=args.knn, sigma=args.sigma)
    report: dict = {
        "command": "inpaint",
        "method": args.method,
        "graph": args.graph,
        "color": args.color,
        "width": img.width,
        "height": img.height,
        "channels": img.channels,
        "missing": img.missing_count,
    }
    try:
        out, rep = inpaint(
            img,
            method=args.method,
            graph=args.graph,
            color=args.color,
            s=args.s,
            yuv_scale=args.yuv_scale,
            iter_cfg=iter_cfg,
            admm_cfg=admm_cfg,
            patch_cfg=patch_cfg,
            dump_graph_prefix=args.dump_graph,
        )
    except InpaintStalled as exc:
        report.update(
            outer_iterations=exc.report.outer_iterations,
            frontier_sizes=",".join(str(f) for f in exc.report.frontier_sizes),
            stalled=exc.reason,
            unreachable=len(exc.unreachable),
            wall_time_s=f"{time.perf_counter() - t0:.6f}",
        )
        _write_report(report, args.report)
        print(f"error: {exc}", file=sys.stderr)
        if args.allow_partial:
            write_image(args.output, exc.partial, bit_depth=args.bit_depth)
            print(f"partial result written to {args.output}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        report.update(error=str(exc), wall_time_s=f"{time.perf_counter() - t0:.6f}")
        _write_report(report, args.report)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report.update(
        outer_iterations=rep.outer_iterations,
        frontier_sizes=",".join(str(f) for f in rep.frontier_sizes),
        solver_iterations=",".join(str(i) for i in rep.solver_iterations),
        wall_time_s=f"{time.perf_counter() - t0:.6f}",
    )
    _write_report(report, args.report)
    write_image(args.output, out, bit_depth=args.bit_depth)
    return 0


def _cmd_prox_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    worst_moreau = 0.0
    worst_oracle = 0.0
    cfg = OracleConfig(grid_resolution=9, refinement_rounds=5)
    for _ in range(args.samples):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 4))
        x = rng.normal(0.0, 2.0, (n, m))
        s = float(rng.uniform(2.0, 40.0))
        lam = float(rng.uniform(0.1, 10.0))
        z = prox_group_maxnorm_pow(x, s, lam)
        y = prox_conj_group_maxnorm_pow(x, s, lam)
        rel = float(np.abs(z + y - x).max()) / max(1.0, float(np.abs(x).max()))
        worst_moreau = max(worst_moreau, rel)
        if x.size <= 4:
            zb = brute_force_prox(x, s, lam, cfg)
            worst_oracle = max(worst_oracle, float(np.abs(zb - z).max()))
    ok = worst_moreau < 1e-9 and worst_oracle < 1e-4
    _write_report(
        {
            "command": "prox-check",
            "samples": args.samples,
            "worst_moreau_rel": _fmt(worst_moreau),
            "worst_oracle_abs": _fmt(worst_oracle),
            "ok": ok,
        },
        args.report,
    )
    return 0 if ok else 1


def _cmd_oracle_check(args) -> int:
    prob = load_graph(args.graph_file)
    if prob.interior.size * prob.dim > MAX_ENERGY_DIM:
        print(
            f"error: oracle handles at most {MAX_ENERGY_DIM} free scalars, "
            f"got {prob.interior.size * prob.dim}",
            file=sys.stderr,
        )
        return 2
    u_admm, rep = minimize_Is(prob, AdmmConfig(s=args.s))
    u_bf, obj_bf = brute_force_Is(prob, args.s)
    diff = abs(rep.objective - obj_bf)
    ok = rep.converged and diff < args.tol_objective
    _write_report(
        {
            "command": "oracle-check",
            "s": args.s,
            "solver_objective": _fmt(rep.objective),
            "oracle_objective": _fmt(obj_bf),
            "difference": _fmt(diff),
            "ok": ok,
        },
        args.report,
    )
    return 0 if ok else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tightext",
        description="Tight Lipschitz extensions on weighted graphs and image inpainting.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_solver_flags(p):
        p.add_argument("--method", choices=("componentwise", "admm"), default="admm")
        p.add_argument("--s", type=float, default=20.0, help="energy exponent for admm")
        p.add_argument("--tau", type=float, default=0.4, help="step size for componentwise")
        p.add_argument("--gamma", type=float, default=1.0, help="admm penalty parameter")
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--max-iters", type=int, default=20_000, dest="max_iters")
        p.add_argument("--report", default=None, help="write key=value diagnostics here")

    p_ext = sub.add_parser("extend", help="extend boundary values given in a graph file")
    p_ext.add_argument("graph_file")
    p_ext.add_argument("--output", "-o", default=None, help="extension output (default stdout)")
    add_solver_flags(p_ext)
    p_ext.set_defaults(func=_cmd_extend)

    p_inp = sub.add_parser("inpaint", help="fill the masked pixels of an image")
    p_inp.add_argument("image")
    p_inp.add_argument("mask", help="8-bit grayscale mask: 255=missing, 0=known")
    p_inp.add_argument("output")
    p_inp.add_argument("--graph", choices=("grid4", "grid8", "knn"), default="grid4")
    p_inp.add_argument("--color", choices=("rgb", "yuv"), default="rgb")
    p_inp.add_argument("--yuv-scale", type=float, default=1.0, dest="yuv_scale")
    p_inp.add_argument("--patch", type=int, default=7, help="patch half-size")
    p_inp.add_argument("--radius", type=int, default=15, help="candidate window half-size")
    p_inp.add_argument("--knn", type=int, default=10, help="nearest neighbors per pixel")
    p_inp.add_argument("--sigma", type=float, default=0.1, help="similarity scaling")
    p_inp.add_argument("--bit-depth", type=int, choices=(8, 16), default=8, dest="bit_depth")
    p_inp.add_argument("--allow-partial", action="store_true", dest="allow_partial")
    p_inp.add_argument("--dump-graph", default=None, dest="dump_graph",
                       help="write the solve graph(s) to <prefix>.*.graph")
    add_solver_flags(p_inp)
    p_inp.set_defaults(func=_cmd_inpaint)

    p_prox = sub.add_parser("prox-check", help="self-test the group-norm proximal operator")
    p_prox.add_argument("--samples", type=int, default=100)
    p_prox.add_argument("--seed", type=int, default=0)
    p_prox.add_argument("--report", default=None)
    p_prox.set_defaults(func=_cmd_prox_check)

    p_or = sub.add_parser("oracle-check", help="cross-check the solver against brute force")
    p_or.add_argument("graph_file")
    p_or.add_argument("--s", type=float, default=4.0)
    p_or.add_argument("--tol-objective", type=float, default=1e-4, dest="tol_objective")
    p_or.add_argument("--report", default=None)
    p_or.set_defaults(func=_cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GraphFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
