"""Command-line entry point.

Exit codes: 0 on success, 1 on bad arguments or configs, 2 when a solver or
rounding step refuses or finds nothing feasible.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from .errors import (ConfigError, DimensionError, FairbidError, NumericalError,
                     PreconditionError, RefusalError)
from .io import load_instance_config, write_population_csv
from .lp import DualCertificate, MWConfig, solve_mw
from .model import Instance, evaluate
from .online import run_horizon
from .oracle import brute_force_integer_opt, exact_lp
from .rounding import deterministic_round, flexibility, randomized_round_trials
from .simulator.auction import Strategy, run_auction
from .simulator.scenarios import (SCENARIOS, SWEEP_AUTOBIDDER, SWEEP_BUDGETS, build_scenario,
                                  compare_strategies, example_3_1_outcome_parity_bids,
                                  load_scenario_file, standard_strategies,
                                  write_comparison_csv)
from .simulator.strategies import (AutobidderConfig, approximate_parity_strategy,
                                   autobidder_strategy, average_bid_parity_strategy,
                                   bid_outcome_parity_strategy, bid_parity_strategy)

EXIT_OK, EXIT_INVALID, EXIT_REFUSED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; we reserve 2 for refusals
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _default_seed() -> int:
    raw = os.environ.get("FAIRBID_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"FAIRBID_SEED must be an integer, got {raw!r}") from None


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _emit(payload: dict, args) -> None:
    if not args.deterministic:
        payload = {**payload, "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat()}
    text = json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _duals_json(d: DualCertificate | None):
    if d is None:
        return None
    return {"alpha": d.alpha, "beta": d.beta, "delta": d.delta}


def _instance(args) -> Instance:
    if not args.config:
        raise ConfigError("missing field '--config'")
    inst = load_instance_config(args.config)
    if getattr(args, "budget", None) is not None:
        inst = inst.with_budget(args.budget)
    return inst


# subcommands


def cmd_solve(args) -> int:
    inst = _instance(args)
    res = solve_mw(inst, MWConfig(delta=args.delta))
    report = res.report()
    report.update(command="solve", x=res.x, duals=_duals_json(res.duals),
                  bounds={"V_obj": res.bounds.V_obj, "V_budget": res.bounds.V_budget,
                          "V_group": res.bounds.V_group})
    found = res.achieved_V > 0 or res.bounds.degenerate
    report["status"] = "ok" if found else "no_feasible_candidate"
    _emit(report, args)
    return EXIT_OK if found else EXIT_REFUSED


def _load_solution(path, n: int) -> np.ndarray:
    try:
        sol = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"field '--solution': cannot read {path} ({exc})") from None
    if not isinstance(sol, dict) or "x" not in sol:
        raise ConfigError("missing field 'x' in solution file")
    x = np.asarray(sol["x"], dtype=float)
    if x.shape != (n,):
        raise ConfigError(f"field 'x' has length {x.size}, instance has {n} queries")
    return x


def _eval_json(inst: Instance, alloc) -> dict:
    ev = evaluate(inst, alloc)
    return {"objective": ev.objective, "spend": ev.spend,
            "group_slack": ev.slack_by_name(), "feasible": ev.feasible}


def cmd_round(args) -> int:
    inst = _instance(args)
    if not args.solution:
        raise ConfigError("missing field '--solution'")
    x = _load_solution(args.solution, inst.n)
    report = {"command": "round", "mode": args.mode, "fractional": _eval_json(inst, x)}
    if args.mode == "det":
        y = deterministic_round(inst, x).y
        report.update(y=y, rounded=_eval_json(inst, y))
    else:
        flex = flexibility(inst, x)
        Y = randomized_round_trials(inst, x, flex.s_zero, args.epsilon, args.seed, args.trials)
        per_trial = [_eval_json(inst, y) for y in Y]
        obj = np.array([t["objective"] for t in per_trial])
        report.update(
            epsilon=args.epsilon, seed=args.seed, trials=args.trials,
            gamma=flex.gamma, per_trial=per_trial,
            aggregate={"mean_objective": float(obj.mean()),
                       "objective_stderr": float(obj.std(ddof=1) / np.sqrt(obj.size))
                       if obj.size > 1 else 0.0,
                       "feasible_fraction": float(np.mean([t["feasible"] for t in per_trial]))})
    _emit(report, args)
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = _instance(args)
    if args.method == "brute":
        alloc, _ = brute_force_integer_opt(inst)
        x, duals, it = alloc.y, None, 0
    else:
        res = exact_lp(inst, enforce_size=not args.no_size_limit)
        x, duals, it = res.x, res.duals, 0
    ev = evaluate(inst, x)
    report = {"command": "oracle", "method": args.method, "objective": ev.objective,
              "spend": ev.spend, "group_slack": ev.slack_by_name(), "delta": None,
              "achieved_V": ev.objective, "iterations": it, "x": x,
              "duals": _duals_json(duals)}
    _emit(report, args)
    return EXIT_OK


def cmd_online(args) -> int:
    dist = _instance(args)
    budget = dist.budget if args.budget is None else args.budget
    rep = run_horizon(dist, budget, args.horizon, args.eta, args.seed,
                      hindsight_delta=args.hindsight_delta)
    if args.steps:
        with open(args.steps, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rep.step_rows())
    _emit({"command": "online", "seed": args.seed, **rep.summary()}, args)
    return EXIT_OK


def _scenario(args, seed):
    overrides = {}
    if args.women_share is not None:
        overrides["women_share"] = args.women_share
    if args.scenario_file:
        if overrides:
            raise ConfigError("field '--women-share' cannot be combined with '--scenario-file'")
        return load_scenario_file(args.scenario_file, seed)
    if args.scenario not in SCENARIOS:
        raise ConfigError(f"field '--scenario' must be one of {', '.join(SCENARIOS)}")
    return build_scenario(args.scenario, overrides, seed)


def _sample(args, seed) -> Instance:
    """Disjoint calibration sample for single-bid strategies."""
    sc = _scenario(args, seed)
    return sc.instance


def _parse_strategy(spec: str, inst: Instance, sample: Instance, group_pair) -> Strategy:
    name, _, rest = spec.partition(":")
    params = [p for p in rest.split(":") if p] if rest else []

    def nums(k):
        if len(params) != k:
            raise ConfigError(f"field '--strategy': {name} takes {k} numeric parameter(s)")
        try:
            return [float(p) for p in params]
        except ValueError:
            raise ConfigError(f"field '--strategy': bad number in {spec!r}") from None

    if name == "single_bid":
        return Strategy.single(nums(1)[0])
    if name == "outcome_parity_example":
        nums(0)
        return Strategy.per_query(example_3_1_outcome_parity_bids(inst), "outcome_parity")
    if name == "bid_parity":
        nums(0)
        return bid_parity_strategy(sample, inst.budget)
    if name == "bid_and_outcome_parity":
        nums(0)
        return bid_outcome_parity_strategy(sample, group_pair, inst.budget)
    if name == "average_bid_parity":
        w, eps = nums(2)
        return average_bid_parity_strategy(inst, group_pair, w, eps)
    if name == "approximate_parity":
        w, eps = nums(2)
        return approximate_parity_strategy(inst, group_pair, w, eps)
    if name == "autobidder":
        nums(0)
        return autobidder_strategy(inst, SWEEP_AUTOBIDDER)
    raise ConfigError(f"field '--strategy': unknown strategy {name!r}")


def _group_pair(inst: Instance):
    if inst.n_groups < 2:
        raise ConfigError("scenario needs two groups")
    return tuple(inst.group_names[:2])


def cmd_simulate(args) -> int:
    pop_seed, sample_seed, sim_seed = np.random.SeedSequence(args.seed).generate_state(3)
    sc = _scenario(args, int(pop_seed))
    inst = sc.instance
    if args.budget is not None:
        inst = inst.with_budget(args.budget)
    elif sc.name == "synthetic" and inst.budget == 0:
        inst = inst.with_budget(SWEEP_BUDGETS[0])
    sample = _sample(args, int(sample_seed)) if sc.name == "synthetic" else inst
    strat = _parse_strategy(args.strategy, inst, sample, _group_pair(inst))
    rep = run_auction(inst, strat, args.price, args.pay_per or sc.pay_per, int(sim_seed),
                      args.trials, args.stop_rule, jobs=args.jobs)
    payload = {"command": "simulate", "scenario": sc.name, "strategy": strat.description,
               "bid": strat.bid, "budget": inst.budget, "price_model": args.price,
               "pay_per": rep.pay_per, "stop_rule": args.stop_rule, "seed": args.seed,
               **rep.summary()}
    _emit(payload, args)
    return EXIT_OK


def _budgets(raw: str | None):
    if raw is None:
        return list(SWEEP_BUDGETS)
    try:
        vals = [float(b) for b in raw.split(",") if b.strip()]
    except ValueError:
        raise ConfigError(f"field '--budgets': cannot parse {raw!r}") from None
    if not vals or any(b < 0 for b in vals):
        raise ConfigError("field '--budgets' needs nonnegative numbers")
    return vals


def cmd_compare(args) -> int:
    pop_seed, sample_seed, sim_seed = np.random.SeedSequence(args.seed).generate_state(3)
    sc = _scenario(args, int(pop_seed))
    inst = sc.instance
    sample = _sample(args, int(sample_seed)) if sc.name == "synthetic" else inst
    pair = _group_pair(inst)
    strategies = standard_strategies(sample, pair, SWEEP_AUTOBIDDER
                                     if args.delta is None else
                                     AutobidderConfig(delta=args.delta))
    rows = compare_strategies(inst, strategies, _budgets(args.budgets), int(sim_seed),
                              args.trials, sc.pay_per, args.price, jobs=args.jobs)
    names = list(inst.group_names)
    if args.csv:
        write_comparison_csv(rows, names, args.csv)
    _emit({"command": "compare", "scenario": sc.name, "seed": args.seed,
           "trials": args.trials, "rows": [r.as_dict(names) for r in rows]}, args)
    return EXIT_OK


def cmd_generate(args) -> int:
    if not args.out:
        raise ConfigError("missing field '--out'")
    sc = _scenario(args, args.seed)
    write_population_csv(sc.instance, args.out)
    return EXIT_OK


# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fairbid", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", help="instance JSON config")
        sp.add_argument("--seed", type=int, default=None,
                        help="random seed (default: $FAIRBID_SEED or 0)")
        sp.add_argument("--out", help="write the JSON report here instead of stdout")
        sp.add_argument("--deterministic", action="store_true",
                        help="omit the timestamp so reruns are byte-identical")

    def scenario_opts(sp):
        sp.add_argument("--scenario", default="example_3_1")
        sp.add_argument("--scenario-file", help="JSON naming a scenario plus overrides")
        sp.add_argument("--women-share", type=float, default=None)
        sp.add_argument("--trials", type=int, default=1000)
        sp.add_argument("--price", choices=("first", "second"), default="second")
        sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("solve", help="approximate LP solve with multiplicative weights")
    common(sp)
    sp.add_argument("--delta", type=float, default=0.05)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("round", help="round a saved fractional solution")
    common(sp)
    sp.add_argument("--solution", help="JSON written by 'solve' or 'oracle'")
    sp.add_argument("--mode", choices=("det", "rand"), default="rand")
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--trials", type=int, default=1)
    sp.set_defaults(func=cmd_round)

    sp = sub.add_parser("oracle", help="exact LP or brute-force integer optimum")
    common(sp)
    sp.add_argument("--method", choices=("lp", "brute"), default="lp")
    sp.add_argument("--no-size-limit", action="store_true")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("online", help="online primal-dual bidder on i.i.d. draws")
    common(sp)
    sp.add_argument("--horizon", type=int, default=1000)
    sp.add_argument("--budget", type=float, default=None)
    sp.add_argument("--eta", type=float, default=None)
    sp.add_argument("--steps", help="per-step CSV output path")
    sp.add_argument("--hindsight-delta", type=float, default=None)
    sp.set_defaults(func=cmd_online)

    sp = sub.add_parser("simulate", help="run one strategy on a scenario")
    common(sp, config=False)
    scenario_opts(sp)
    sp.add_argument("--strategy", default="single_bid:1.0")
    sp.add_argument("--budget", type=float, default=None)
    sp.add_argument("--pay-per", choices=("click", "impression"), default=None)
    sp.add_argument("--stop-rule", choices=("stop", "skip"), default="stop")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("compare", help="sweep budgets over the standard strategies")
    common(sp, config=False)
    scenario_opts(sp)
    sp.set_defaults(scenario="synthetic")
    sp.add_argument("--budgets", help="comma-separated budgets")
    sp.add_argument("--delta", type=float, default=None, help="autobidder solver accuracy")
    sp.add_argument("--csv", help="plot-data CSV output path")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("generate", help="write a scenario population CSV")
    common(sp, config=False)
    sp.add_argument("--scenario", default="synthetic")
    sp.add_argument("--scenario-file")
    sp.add_argument("--women-share", type=float, default=None)
    sp.set_defaults(func=cmd_generate)
    return p


def _check(args) -> None:
    for name in ("trials", "horizon", "jobs"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            raise ConfigError(f"field '--{name}' must be at least 1")
    for name in ("delta", "epsilon"):
        v = getattr(args, name, None)
        if v is not None and not 0 < v < 1:
            raise ConfigError(f"field '--{name}' must lie in (0, 1)")
    if getattr(args, "eta", None) is not None and args.eta <= 0:
        raise ConfigError("field '--eta' must be positive")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.seed is None:
            args.seed = _default_seed()
        _check(args)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except (RefusalError, NumericalError) as exc:
        print(f"fairbid: refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (ConfigError, DimensionError, PreconditionError, OSError) as exc:
        print(f"fairbid: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FairbidError as exc:
        print(f"fairbid: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
