"""Command-line front end: campaign sweeps, single-frame debugging, oracle checks.

Exit codes are part of the contract: 0 success, 1 runtime or validation
failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import ConfigError, apply_overrides, build_campaign, load_config
from .ga import GaRunFailed, run_ga
from .harness import CampaignConfig, _frame_rngs, make_frame_context, run_campaign
from .sensing import sensing_for_precoders
from .comm import evaluate_comm
from .validate import CHECK_NAMES, run_checks

__all__ = ["main"]

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", metavar="PATH", help="key=value config file")
    shared.add_argument("--override", metavar="K=V", action="append", default=[],
                        help="override one config key (repeatable)")
    shared.add_argument("--seed", type=int, metavar="U64",
                        help="master seed (overrides config)")

    parser = argparse.ArgumentParser(
        prog="ddisac",
        description="Delay-Doppler ISAC link simulator: sweep the power split, "
                    "debug single frames, or run the numerical oracle suite.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_camp = sub.add_parser("campaign", parents=[shared],
                            help="Monte-Carlo sweep over the power-split list")
    p_camp.add_argument("--out", metavar="DIR", help="directory for CSV outputs")
    p_camp.add_argument("--workers", type=int, default=1, metavar="N",
                        help="worker processes (default 1)")

    p_frame = sub.add_parser("frame", parents=[shared],
                             help="run one frame verbosely")
    p_frame.add_argument("--alpha", type=float, required=True, metavar="F",
                         help="common power share, must appear in alpha_list")
    p_frame.add_argument("--frame", type=int, default=0, metavar="N",
                         help="frame index (default 0)")

    p_val = sub.add_parser("validate", parents=[shared],
                           help="run the numerical oracle checks")
    p_val.add_argument("--checks", metavar="LIST",
                       help="comma-separated subset of: " + ", ".join(CHECK_NAMES))
    return parser


def _load_campaign_config(args) -> CampaignConfig:
    values = load_config(args.config) if args.config else {}
    values = apply_overrides(values, args.override)
    cfg = build_campaign(values)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    return cfg


def _print_summary(summary) -> None:
    print(f"{'alpha':>6} {'avg_R_min':>10} {'avg_CRB_tau':>12} {'avg_CRB_nu':>12} "
          f"{'Rc-Met%':>8} {'feas%':>7} {'frames':>7}")
    for row in summary.rows:
        print(f"{row.alpha:>6g} {row.avg_r_min:>10.4f} {row.avg_crb_tau:>12.4e} "
              f"{row.avg_crb_nu:>12.4e} {row.rc_met_pct:>8.1f} "
              f"{row.feasible_pct:>7.1f} {row.n_frames:>7d}")
    if summary.n_failed:
        print(f"warning: {summary.n_failed} frame(s) failed and were excluded")


def cmd_campaign(args) -> int:
    cfg = _load_campaign_config(args)
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    summary = run_campaign(cfg, workers=args.workers, out_dir=args.out)
    _print_summary(summary)
    return EXIT_OK


def cmd_frame(args) -> int:
    cfg = _load_campaign_config(args)
    if args.alpha not in cfg.alpha_list:
        print(f"error: alpha {args.alpha} not in alpha_list {list(cfg.alpha_list)}",
              file=sys.stderr)
        return EXIT_USAGE
    if args.frame < 0:
        print("error: --frame must be >= 0", file=sys.stderr)
        return EXIT_USAGE

    alpha_index = cfg.alpha_list.index(args.alpha)
    _, ga_seq = _frame_rngs(cfg, alpha_index, args.frame)
    ctx = make_frame_context(cfg, args.alpha, args.frame)
    ga_cfg = dataclasses.replace(cfg.ga, seed=ga_seq)

    print(f"frame alpha={args.alpha:g} index={args.frame} seed={cfg.master_seed}")
    best_p, best, trace = run_ga(ga_cfg, ctx)

    print("GA best-fitness trace:")
    for gen, score in enumerate(trace):
        print(f"  gen {gen:3d}  {score: .6f}")

    print("fitness breakdown:")
    print(f"  r_min       {best.r_min:.6f}")
    print(f"  penalty_c   {best.penalty_c:.6f}")
    print(f"  penalty_tau {best.penalty_tau:.6f}")
    print(f"  penalty_nu  {best.penalty_nu:.6f}")
    print(f"  fitness     {best.fitness:.6f}")
    print(f"  feasible    {best.feasible}  rc_met {best.rc_met}")

    metrics = evaluate_comm(ctx.estimates, best_p, ctx.imp, r_c_req=ctx.qos.r_c_req)
    print("per-user link metrics:")
    for k in range(best_p.num_users):
        print(f"  user {k}: sinr_c {metrics.sinr_c[k]:.6g}  "
              f"sinr_p {metrics.sinr_p[k]:.6g}  "
              f"rate_c {metrics.rate_c[k]:.6f}  rate_p {metrics.rate_p[k]:.6f}")

    f = sensing_for_precoders(best_p, ctx.symbols, ctx.target, ctx.grid)
    print("Fisher information:")
    print(f"  I_tautau {f.i_tautau:.6e}  I_nunu {f.i_nunu:.6e}  "
          f"I_taunu {f.i_taunu:.6e}  det {f.det:.6e}")
    print(f"bounds: crb_tau {f.crb_tau:.6e} s^2  crb_nu {f.crb_nu:.6e} Hz^2")
    return EXIT_OK


def cmd_validate(args) -> int:
    names = None
    if args.checks:
        names = tuple(n.strip() for n in args.checks.split(",") if n.strip())
        unknown = [n for n in names if n not in CHECK_NAMES]
        if unknown:
            print(f"error: unknown checks: {', '.join(unknown)} "
                  f"(available: {', '.join(CHECK_NAMES)})", file=sys.stderr)
            return EXIT_USAGE
    results = run_checks(names=names, seed=args.seed if args.seed is not None else 0)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:<{width}}  worst rel err {r.worst_rel:.3e} "
              f"(tol {r.tolerance:g})")
    if all(r.passed for r in results):
        return EXIT_OK
    worst = max((r for r in results if not r.passed), key=lambda r: r.worst_rel)
    print(f"validation failed: {worst.name} worst rel err {worst.worst_rel:.3e}",
          file=sys.stderr)
    return EXIT_RUNTIME


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"campaign": cmd_campaign, "frame": cmd_frame, "validate": cmd_validate}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GaRunFailed as exc:
        print(f"optimizer failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001  keep the exit-code contract
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
