"""Command-line front end: generate, solve, evaluate, simulate, sweep.

Exit codes: 0 on success, 2 for usage or validation problems (bad flags,
kind/mode mismatch, malformed files), 3 for I/O failures. All randomness
flows through an explicit --seed; commands that need one refuse to run
without it. Reports are JSON with sorted keys; re-running a seeded command
reproduces every output byte except the wall_time_s field.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import generators, linear, oracle
from .general import (
    first_best,
    solve_binary,
    solve_iid_single_prize,
    solve_no_agent_value,
)
from .model import (
    Contract,
    LinearContract,
    contract_to_json_dict,
    instance_digest,
    load_contract_json,
    load_json,
    save_json,
    validate_contract,
)
from .tie_breaking import optimal_policy
from .weitzman import evaluate_exact, simulate


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _base_report(args, instance, solver: str) -> dict:
    return {
        "command": [str(a) for a in args.command_echo],
        "instance_digest": instance_digest(instance),
        "solver": solver,
    }


def cmd_generate(args) -> int:
    out = _out_dir(args)
    if args.family is not None:
        if args.family == "linear-gap":
            instance = generators.gen_linear_gap_family(args.n)
            extra = ""
        else:
            if args.k is None:
                raise ValueError("generate: --family paper-iid needs --k")
            instance, alpha = generators.gen_paper_example_iid(args.n, args.k)
            extra = f" (alpha={alpha:.12g})"
        path = out / "instance.json"
        save_json(instance, path)
        print(f"wrote {path}{extra}")
        return 0
    if args.kind is None:
        raise ValueError("generate: need --kind or --family")
    if args.seed is None:
        raise ValueError("generate: --seed is required for random instances")
    if args.m is None:
        raise ValueError("generate: --m is required for random instances")
    instance = generators.gen_random(args.n, args.m, args.seed, args.kind)
    path = out / "instance.json"
    save_json(instance, path)
    print(f"wrote {path}")
    return 0


def cmd_solve(args) -> int:
    instance = load_json(args.instance)
    out = _out_dir(args)
    started = time.monotonic()
    report = _base_report(args, instance, args.mode)

    if args.mode == "linear":
        alpha, contract, utilities = linear.optimal_linear(instance)
        contract_json = contract_to_json_dict(LinearContract(alpha))
        report["alpha_star"] = alpha
    elif args.mode == "no-agent-value":
        contract, utilities = solve_no_agent_value(instance)
        contract_json = contract_to_json_dict(contract)
    elif args.mode == "binary":
        solution = solve_binary(instance)
        contract, utilities = solution.contract, solution.utilities
        contract_json = contract_to_json_dict(contract)
        report["order"] = list(solution.order)
        report["excluded_boxes"] = list(solution.excluded)
        report["greedy_value"] = solution.internal_value
    else:  # iid
        solution = solve_iid_single_prize(instance)
        contract, utilities = solution.contract, solution.utilities
        contract_json = contract_to_json_dict(contract)
        plan = solution.plan
        report["phase_plan"] = {
            "phase1_len": plan.phase1_len,
            "phase2_len": plan.tail_count,
            "lifted_count": plan.lifted_count,
            "lifted_cap": plan.lifted_cap,
            "lifted_transfer": plan.lifted_transfer,
            "front_count": plan.front_count,
            "front_transfer": plan.front_transfer,
            "tail_transfer": plan.tail_transfer,
        }

    report["utilities"] = {"agent": utilities.agent, "principal": utilities.principal}

    oracle_requested = args.oracle or args.oracle_grid is not None
    if oracle_requested:
        if args.mode == "linear":
            if args.oracle_grid is None:
                raise ValueError("solve: linear oracle needs --oracle-grid STEP")
            alpha_o, value = oracle.grid_search_linear(instance, args.oracle_grid)
            name = f"grid(step={args.oracle_grid:g})"
            detail = {"alpha": alpha_o}
        elif args.mode == "no-agent-value":
            value = first_best(instance)
            name = "first-best"
            detail = {}
        elif args.mode == "binary":
            order_o, _, value = oracle.enumerate_orderings_binary(instance)
            name = "all-orderings"
            detail = {"order": list(order_o)}
        else:
            payments, value = oracle.enumerate_payments_iid(instance)
            name = "payment-enumeration"
            detail = {"payments": list(payments)}
        report["oracle"] = {
            "name": name,
            "utility": value,
            "delta": value - utilities.principal,
            **detail,
        }

    report["wall_time_s"] = time.monotonic() - started
    contract_path = out / "contract.json"
    _write_json(contract_path, contract_json)
    _write_json(out / "report.json", report)
    print(f"wrote {contract_path}")
    print(f"principal_utility={utilities.principal:.12g} agent_utility={utilities.agent:.12g}")
    return 0


def _materialize_contract(instance, raw) -> Contract:
    contract = raw.to_contract(instance) if isinstance(raw, LinearContract) else raw
    violations = validate_contract(instance, contract)
    if violations:
        raise ValueError("contract does not fit the instance: " + "; ".join(violations))
    return contract


def cmd_evaluate(args) -> int:
    instance = load_json(args.instance)
    raw = load_contract_json(args.contract)
    contract = _materialize_contract(instance, raw)
    out = _out_dir(args)
    started = time.monotonic()
    policy = optimal_policy(instance, contract)
    utilities = evaluate_exact(instance, contract, policy)
    report = _base_report(args, instance, "evaluate")
    report["utilities"] = {"agent": utilities.agent, "principal": utilities.principal}
    report["policy"] = policy.to_json_dict()
    if args.simulate is not None:
        if args.seed is None:
            raise ValueError("evaluate: --simulate needs --seed")
        result = simulate(instance, contract, policy, args.simulate, args.seed)
        report["monte_carlo"] = {
            "trials": result.trials,
            "seed": result.seed,
            "agent": result.utilities.agent,
            "principal": result.utilities.principal,
            "agent_stderr": result.agent_stderr,
            "principal_stderr": result.principal_stderr,
        }
    report["wall_time_s"] = time.monotonic() - started
    _write_json(out / "report.json", report)
    print(f"principal_utility={utilities.principal:.12g} agent_utility={utilities.agent:.12g}")
    return 0


def cmd_simulate(args) -> int:
    instance = load_json(args.instance)
    raw = load_contract_json(args.contract)
    contract = _materialize_contract(instance, raw)
    if args.seed is None:
        raise ValueError("simulate: --seed is required")
    out = _out_dir(args)
    started = time.monotonic()
    policy = optimal_policy(instance, contract)
    exact = evaluate_exact(instance, contract, policy)
    result = simulate(instance, contract, policy, args.trials, args.seed)
    report = _base_report(args, instance, "simulate")
    report["exact"] = {"agent": exact.agent, "principal": exact.principal}
    report["monte_carlo"] = {
        "trials": result.trials,
        "seed": result.seed,
        "agent": result.utilities.agent,
        "principal": result.utilities.principal,
        "agent_stderr": result.agent_stderr,
        "principal_stderr": result.principal_stderr,
    }
    report["wall_time_s"] = time.monotonic() - started
    _write_json(out / "report.json", report)
    print(
        f"mc_principal={result.utilities.principal:.12g} (+-{result.principal_stderr:.3g}) "
        f"exact={exact.principal:.12g}"
    )
    return 0


def cmd_sweep(args) -> int:
    if not 0.0 < args.step <= 1.0:
        raise ValueError("sweep: step must be in (0, 1]")
    instance = load_json(args.instance)
    out = _out_dir(args)
    rows = linear.alpha_sweep(instance, args.step)
    alpha_star, _, _ = linear.optimal_linear(instance)
    path = out / "sweep.csv"
    linear.write_sweep_csv(rows, path, alpha_star=alpha_star)
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pandora-contracts",
        description="Exploration-contract solvers over boxed search instances",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_gen = sub.add_parser("generate", help="write an instance file")
    p_gen.add_argument("--kind", choices=["general", "binary", "iid_single_prize"])
    p_gen.add_argument("--family", choices=["linear-gap", "paper-iid"])
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--m", type=int)
    p_gen.add_argument("--k", type=int, help="phase boundary for --family paper-iid")
    p_gen.add_argument("--seed", type=int)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_generate)

    p_solve = sub.add_parser("solve", help="compute an optimal contract")
    p_solve.add_argument("instance")
    p_solve.add_argument("--mode", choices=["linear", "no-agent-value", "binary", "iid"], required=True)
    p_solve.add_argument("--oracle", action="store_true", help="cross-check against the brute-force oracle")
    p_solve.add_argument("--oracle-grid", type=float, help="grid step for the linear-contract oracle")
    p_solve.add_argument("--out", required=True)
    p_solve.set_defaults(func=cmd_solve)

    p_eval = sub.add_parser("evaluate", help="evaluate a contract on an instance")
    p_eval.add_argument("instance")
    p_eval.add_argument("--contract", required=True)
    p_eval.add_argument("--simulate", type=int, help="add a Monte Carlo estimate with this many trials")
    p_eval.add_argument("--seed", type=int)
    p_eval.add_argument("--out", required=True)
    p_eval.set_defaults(func=cmd_evaluate)

    p_sim = sub.add_parser("simulate", help="Monte Carlo estimate of a contract's utilities")
    p_sim.add_argument("instance")
    p_sim.add_argument("--contract", required=True)
    p_sim.add_argument("--trials", type=int, required=True)
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="CSV of utilities over a commission grid")
    p_sweep.add_argument("instance")
    p_sweep.add_argument("--step", type=float, required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.command_echo = list(sys.argv[1:] if argv is None else argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
