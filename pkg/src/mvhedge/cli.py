"""Command-line surface.

Subcommands: validate, solve, oracle, measures, simulate-jd, check-arai.
Exit codes: 0 when every requested check passes its tolerance, 1 on a
failed check or unusable input data, 2 on usage errors (unknown flags or
parameters outside their domain).
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import oracle as oracle_mod
from .coefficients import opportunity_process, coefficient_system
from .hedging import optimal_strategy, value_at, verify_optimality
from .jumpdiff import (JumpDiffusionParams, SimulationError,
                       bsde_residual, mc_pure_investment)
from .measures import (arai_example_check, conditional_price,
                       dual_value_check, equivalence_check,
                       minimal_martingale_density, vomm_density)
from .report import Check, Report
from .scenario import ParsedScenario, ScenarioFormatError, parse_scenario, resolve_payoff
from .tree import ArbitrageError, PredictableControl

MC_BIAS_BUDGET = 5e-4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvhedge",
        description="Mean-variance hedging on finite scenario trees")
    sub = parser.add_subparsers(dest="command", required=True)

    def tree_flags(p, capital=True):
        p.add_argument("--scenario", required=True, help="scenario file path")
        p.add_argument("--payoff", help="payoff expression overriding the "
                       "file (terminal_price | call strike=<k> | "
                       "put strike=<k> | constant value=<c>)")
        if capital:
            p.add_argument("--capital", type=float, default=0.0,
                           help="initial capital x (default 0)")

    def output_flags(p, default_format="table"):
        p.add_argument("--output", help="write the report here instead of "
                       "stdout")
        p.add_argument("--format", choices=["table", "csv", "structured"],
                       default=default_format)
        p.add_argument("--tolerance", type=float, default=1e-8,
                       help="comparison tolerance where applicable "
                       "(default 1e-8)")

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("--scenario", required=True)
    output_flags(p)

    p = sub.add_parser("solve", help="coefficients, strategy and value")
    tree_flags(p)
    output_flags(p)

    p = sub.add_parser("oracle", help="recursion versus brute force")
    tree_flags(p)
    output_flags(p)

    p = sub.add_parser("measures", help="martingale measure densities and "
                       "duality checks")
    tree_flags(p, capital=False)
    output_flags(p)

    p = sub.add_parser("simulate-jd", help="jump-diffusion Monte Carlo "
                       "against closed forms")
    for flag, default in (("--mu", 0.05), ("--sigma", 0.2), ("--eta", 0.1),
                          ("--alpha", 2.0), ("--s0", 1.0), ("--horizon", 1.0)):
        p.add_argument(flag, type=float, default=default)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--paths", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    output_flags(p, default_format="csv")

    p = sub.add_parser("check-arai", help="two-sided Poisson counterexample "
                       "parameter checks")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    output_flags(p)
    return parser


def _emit(report: Report, args) -> int:
    text = report.render(args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report.passed else 1


def _load(args, need_payoff=True) -> tuple[ParsedScenario, dict | None, str | None]:
    parsed = parse_scenario(args.scenario)
    payoff, source = parsed.payoff, parsed.payoff_source
    if getattr(args, "payoff", None):
        if payoff is not None:
            print(f"note: --payoff overrides the {source} payoff from the "
                  "scenario file", file=sys.stderr)
        payoff = resolve_payoff(parsed.tree, args.payoff)
        source = args.payoff
    if payoff is None and need_payoff:
        payoff = {nid: 0.0 for nid in parsed.tree.terminal_ids()}
        source = "constant value=0 (default)"
    return parsed, payoff, source


def _refuse_arbitrage(parsed: ParsedScenario) -> None:
    if parsed.warnings:
        raise ArbitrageError("; ".join(parsed.warnings))


def cmd_validate(args) -> int:
    from .tree import no_arbitrage_check, validate_tree
    try:
        parsed = parse_scenario(args.scenario)
    except ScenarioFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    tree = parsed.tree
    report = Report("validate", columns=["property", "value"])
    report.rows = [
        {"property": "nodes", "value": len(tree)},
        {"property": "horizon", "value": tree.horizon},
        {"property": "terminal_nodes", "value": sum(1 for _ in tree.terminal_ids())},
        {"property": "arbitrage_free", "value": no_arbitrage_check(tree)},
        {"property": "payoff", "value": parsed.payoff_source or "none"},
    ]
    report.checks.append(Check("structural_violations",
                               float(len(validate_tree(tree))), 0.0, True))
    report.warnings.extend(parsed.warnings)
    return _emit(report, args)


def _node_rows(tree, coeffs, theta, wealth, mmm, vomm):
    rows = []
    for nid in tree.ids():
        n = tree.node(nid)
        rows.append({
            "time": n.time,
            "id": nid,
            "v0": coeffs.v0[nid],
            "v1": coeffs.v1[nid],
            "v2": coeffs.v2[nid],
            "theta": theta[nid] if nid in theta else None,
            "wealth": wealth[nid],
            "mmm_density": mmm.z[nid],
            "vomm_density": vomm.z[nid],
        })
    return rows


def cmd_solve(args) -> int:
    parsed, payoff, source = _load(args)
    _refuse_arbitrage(parsed)
    tree = parsed.tree
    coeffs, controls = coefficient_system(tree, payoff)
    theta, wealth = optimal_strategy(tree, coeffs, controls, args.capital)
    y2, a = opportunity_process(tree)
    mmm = minimal_martingale_density(tree)
    vomm = vomm_density(tree, y2, a)
    probe = PredictableControl.constant(tree, 0.0)
    cert = verify_optimality(tree, coeffs, theta, probe, args.capital)

    report = Report("solve", columns=["time", "id", "v0", "v1", "v2", "theta",
                                      "wealth", "mmm_density", "vomm_density"])
    report.rows = _node_rows(tree, coeffs, theta, wealth, mmm, vomm)
    report.summary = {
        "capital": args.capital,
        "payoff": source,
        "root_value": value_at(coeffs, tree.root, args.capital),
        "root_theta": theta[tree.root] if tree.root in theta else None,
    }
    report.checks = [
        Check("optimal_drift_max", cert.max_abs_star_drift, 1e-10,
              cert.max_abs_star_drift <= 1e-10,
              "value drift along the optimal wealth path"),
        Check("probe_drift_min", cert.min_probe_drift, -1e-10,
              cert.min_probe_drift >= -1e-10,
              "value drift along the zero-strategy path"),
    ]
    report.warnings.extend(cert.violations)
    return _emit(report, args)


def cmd_oracle(args) -> int:
    parsed, payoff, source = _load(args)
    _refuse_arbitrage(parsed)
    tree = parsed.tree
    coeffs, controls = coefficient_system(tree, payoff)
    theta, _ = optimal_strategy(tree, coeffs, controls, args.capital)
    values = oracle_mod.conditional_values(tree, payoff, args.capital)
    theta_oracle, _ = oracle_mod.project_strategy(tree, payoff, args.capital)

    tol = args.tolerance
    rows, worst_value = [], 0.0
    for nid in tree.ids():
        rec = value_at(coeffs, nid, args.capital)
        orc = values[nid]
        gap = abs(rec - orc) / (1.0 + abs(orc))
        worst_value = max(worst_value, gap)
        rows.append({"time": tree.node(nid).time, "id": nid,
                     "value_recursion": rec, "value_oracle": orc,
                     "gap": rec - orc})
    worst_theta = max((abs(theta[nid] - theta_oracle[nid])
                       for nid in tree.nonterminal_ids()), default=0.0)

    report = Report("oracle", columns=["time", "id", "value_recursion",
                                       "value_oracle", "gap"])
    report.rows = rows
    report.summary = {"capital": args.capital, "payoff": source}
    report.checks = [
        Check("value_gap_max", worst_value, tol, worst_value <= tol,
              "relative gap recursion vs brute force"),
        Check("strategy_gap_max", worst_theta, tol, worst_theta <= tol,
              "control gap feedback vs projection"),
    ]
    return _emit(report, args)


def cmd_measures(args) -> int:
    parsed, payoff, source = _load(args)
    _refuse_arbitrage(parsed)
    tree = parsed.tree
    y2, a = opportunity_process(tree)
    coeffs, _ = coefficient_system(tree, payoff)
    mmm = minimal_martingale_density(tree)
    vomm = vomm_density(tree, y2, a)
    dual = dual_value_check(tree, vomm, y2)
    price = conditional_price(tree, vomm, payoff, coeffs)
    gamma = PredictableControl({nid: -a[nid] for nid in tree.nonterminal_ids()})
    equiv = equivalence_check(tree, gamma)

    report = Report("measures", columns=["time", "id", "y2", "mmm_density",
                                         "vomm_density"])
    for nid in tree.ids():
        report.rows.append({"time": tree.node(nid).time, "id": nid,
                            "y2": y2[nid], "mmm_density": mmm.z[nid],
                            "vomm_density": vomm.z[nid]})
    report.summary = {
        "payoff": source,
        "mmm_signed": mmm.signed,
        "vomm_signed": vomm.signed,
        "vomm_equivalent": equiv.equivalent,
        "equivalence_margin": equiv.margin,
        "skipped_zero_density_nodes": len(dual.skipped),
    }
    report.checks = [
        Check("dual_value_gap_max", dual.max_deviation, dual.tolerance,
              dual.passed, "second moment of density ratio times y2 vs 1"),
        Check("conditional_price_gap_max", price.max_deviation,
              price.tolerance, price.passed, "v1/v2 vs Bayes-rule price"),
    ]
    report.warnings.extend(f"density vanishes at node {nid}; conditional "
                           "checks skipped there" for nid in dual.skipped)
    return _emit(report, args)


def cmd_simulate_jd(args) -> int:
    try:
        params = JumpDiffusionParams(mu=args.mu, sigma=args.sigma,
                                     eta=args.eta, alpha=args.alpha,
                                     s0=args.s0, horizon=args.horizon)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    est = mc_pure_investment(params, args.steps, args.paths, args.seed)

    grid = np.linspace(0.0, params.horizon, args.steps + 1)
    y = np.exp(params.kappa * (grid - params.horizon))
    zeros = np.zeros_like(grid)
    residual = bsde_residual(params, grid, y, zeros, zeros)

    price_cf = params.s0 * math.exp(params.mu * params.horizon)
    rows = [
        {"quantity": "pure_investment_objective", "estimate": est.estimate,
         "stderr": est.stderr, "closed_form": est.closed_form,
         "z_score": (est.estimate - est.closed_form) / est.stderr
         if est.stderr else 0.0},
        {"quantity": "zero_strategy_objective",
         "estimate": est.zero_strategy_estimate, "stderr": 0.0,
         "closed_form": 1.0, "z_score": 0.0},
        {"quantity": "terminal_price_mean", "estimate": est.terminal_price_mean,
         "stderr": est.terminal_price_stderr, "closed_form": price_cf,
         "z_score": (est.terminal_price_mean - price_cf)
         / est.terminal_price_stderr if est.terminal_price_stderr else 0.0},
        {"quantity": "bsde_residual_closed_form", "estimate": residual,
         "stderr": None, "closed_form": 0.0, "z_score": None},
    ]
    report = Report("simulate-jd", columns=["quantity", "estimate", "stderr",
                                            "closed_form", "z_score"])
    report.rows = rows
    report.summary = {
        "steps": args.steps, "paths": args.paths, "seed": args.seed,
        "rejection_rate": est.rejection_rate,
    }
    gap = abs(est.estimate - est.closed_form)
    bound = 3.0 * est.stderr + MC_BIAS_BUDGET
    price_gap = abs(est.terminal_price_mean - price_cf)
    price_bound = 3.0 * est.terminal_price_stderr + MC_BIAS_BUDGET * params.s0
    report.checks = [
        Check("pure_investment_gap", gap, bound, gap <= bound,
              "MC vs closed form, 3 stderr plus bias budget"),
        Check("terminal_price_gap", price_gap, price_bound,
              price_gap <= price_bound,
              "mean terminal price vs closed form"),
        Check("bsde_residual", residual, 1e-6, residual <= 1e-6,
              "closed form plugged into the backward equation"),
    ]
    return _emit(report, args)


def cmd_check_arai(args) -> int:
    try:
        result = arai_example_check(args.gamma, args.epsilon, args.beta)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = Report("check-arai", columns=["check", "margin", "passed",
                                           "detail"])
    for c in result.checks:
        report.rows.append({"check": c.name, "margin": c.margin,
                            "passed": c.passed, "detail": c.detail})
    report.summary = {"gamma": args.gamma, "epsilon": args.epsilon,
                      "beta": args.beta, "verdict": result.verdict}
    report.checks = [Check(c.name, c.margin, None, c.passed, c.detail)
                     for c in result.checks]
    return _emit(report, args)


_DISPATCH = {
    "validate": cmd_validate,
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "measures": cmd_measures,
    "simulate-jd": cmd_simulate_jd,
    "check-arai": cmd_check_arai,
}


def run_command(argv) -> int:
    """Parse argv and run one subcommand, returning the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except (ScenarioFormatError, FileNotFoundError, ArbitrageError,
            SimulationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
