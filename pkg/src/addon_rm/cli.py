"""Command line entry point: ``addon-rm {solve,oracle,learn,gap,table1}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from .demand import ScenarioError
from .fptas import error_bound, fptas_solve, resolution_for_epsilon
from .harness import (CHECKPOINTS, ConfigError, ExperimentConfig, benchmark,
                      compute_regret_percentage, optimality_gap, resolve_scenario,
                      run_replications, run_table1_suite, write_learning_csv, write_meta,
                      write_table1_csv)
from .oracle import DEFAULT_ENUMERATION_CAP, EnumerationTooLarge, brute_force_solve, exact_policy_revenue
from .policy import PolicyError

log = logging.getLogger("addon_rm")

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 2, 3


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    print(text)


def cmd_solve(args) -> int:
    instance = resolve_scenario(args.scenario)
    if args.k is not None:
        if args.k < 1:
            raise ConfigError("--k must be a positive integer")
        k = args.k
    else:
        if not 0 < args.epsilon < 1:
            raise ConfigError("--epsilon must lie in (0, 1)")
        vstar = args.vstar
        if vstar is None:
            # any feasible policy's revenue is a valid lower bound on the optimum
            vstar = exact_policy_revenue(instance, fptas_solve(instance, 1)[0])
        if vstar <= 0:
            raise ConfigError("--vstar must be positive (or the instance has zero revenue)")
        k = resolution_for_epsilon(instance, args.epsilon, vstar)
    policy, approx = fptas_solve(instance, k)
    _emit({"resolution": k, "approx_revenue": approx,
           "revenue": exact_policy_revenue(instance, policy),
           "error_bound": error_bound(instance, k), "policy": policy.to_dict()}, args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    instance = resolve_scenario(args.scenario)
    policy, value = brute_force_solve(instance, args.cap)
    _emit({"revenue": value, "policy": policy.to_dict()}, args.out)
    return EXIT_OK


def cmd_learn(args) -> int:
    config = ExperimentConfig(scenario=args.scenario, mode="learn", horizon=args.horizon,
                              replications=args.seeds, base_seed=args.base_seed,
                              epsilon=args.epsilon, ucb_scale=args.ucb_scale,
                              output_path=args.out)
    instance = resolve_scenario(config.scenario)
    bench = benchmark(instance)
    seeds = [config.base_seed + r for r in range(config.replications)]
    started = time.perf_counter()
    runs = run_replications(instance, config.horizon, seeds, config.epsilon, config.ucb_scale,
                            workers=args.workers)
    log.info("learned %d runs in %.1fs", len(runs), time.perf_counter() - started)
    summary = {"r_star": bench.revenue, "r_star_method": bench.method,
               "r_star_bound": bench.bound}
    if bench.revenue > 0:
        report = compute_regret_percentage(runs, bench.revenue, CHECKPOINTS + (config.horizon,),
                                           bench.method)
        summary["regret_pct"] = {str(t): [pct, se] for t, pct, se in report.checkpoints}
    if config.output_path:
        write_learning_csv(config.output_path, runs, bench.revenue)
        write_meta(config.output_path, config, **summary,
                   k_cap_applied=any(tr.k_capped for tr in runs),
                   episodes={str(tr.seed): len(tr.policies) for tr in runs})
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_gap(args) -> int:
    instance = resolve_scenario(args.scenario)
    r_star, r_zero, gap = optimality_gap(instance)
    _emit({"r_star": r_star, "r_star_no_addon": r_zero, "gap_pct": gap}, args.out)
    return EXIT_OK


def _csv_list(text: str, cast=str) -> list:
    try:
        return [cast(x) for x in text.split(",") if x]
    except ValueError:
        raise ConfigError(f"cannot parse list {text!r}") from None


def cmd_table1(args) -> int:
    effects = _csv_list(args.effects)
    limits = _csv_list(args.space_limits, int)
    config = ExperimentConfig(scenario="bundled", mode="table1", horizon=args.horizon,
                              replications=args.seeds, base_seed=args.base_seed,
                              epsilon=args.epsilon, ucb_scale=args.ucb_scale,
                              output_path=args.out)
    for e in effects:
        resolve_scenario(f"bundled:{e}:0")
    if any(not 0 <= s <= 20 for s in limits):
        raise ConfigError("space limits must lie in [0, 20]")
    rows = run_table1_suite(effects, limits, config.replications, config.base_seed,
                            config.horizon, config.epsilon, config.ucb_scale,
                            workers=args.workers, learn=not args.gap_only)
    if config.output_path:
        write_table1_csv(config.output_path, rows)
        write_meta(config.output_path, config, effects=effects, space_limits=limits)
    for row in rows:
        regrets = " ".join(f"{row.regret[t]:6.2f}%" if t in row.regret else "     -"
                           for t in CHECKPOINTS)
        print(f"{row.effect:>6} S={row.S:<2} regret {regrets}  gap {row.gap_pct:6.2f}%  "
              f"beat {row.beat_period}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="addon-rm", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_arg(p):
        p.add_argument("--scenario", default="bundled:medium:6",
                       help="scenario JSON file or bundled[:low|medium|high[:S]]")

    p = sub.add_parser("solve", help="FPTAS on a scenario")
    scenario_arg(p)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--k", type=int, default=None, help="grid resolution; overrides --epsilon")
    p.add_argument("--vstar", type=float, default=None, help="lower bound on the optimum")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="exact brute-force solve")
    scenario_arg(p)
    p.add_argument("--cap", type=int, default=DEFAULT_ENUMERATION_CAP)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("learn", help="UCB learning runs over a batch of seeds")
    scenario_arg(p)
    p.add_argument("--horizon", type=int, default=8760)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--ucb-scale", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("gap", help="optimality gap of allowing add-on discounts")
    scenario_arg(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("table1", help="regret and gap suite on the bundled scenario")
    p.add_argument("--effects", default="low,medium,high")
    p.add_argument("--space-limits", default="4,6,8")
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--horizon", type=int, default=8760)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--ucb-scale", type=float, default=0.125)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--gap-only", action="store_true", help="skip the learning runs")
    p.add_argument("--out")
    p.set_defaults(func=cmd_table1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, EnumerationTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ScenarioError, PolicyError) as exc:
        print(f"infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
