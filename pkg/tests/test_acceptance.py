"""Acceptance suite: one test per release criterion.

Each criterion prints a single PASS/FAIL line on the real stdout (so the
lines survive pytest's capture) and asserts.  The random-tree corpus is
seeded and therefore identical on every run.
"""

import json
import math
import time

import numpy as np
import pytest

from mvhedge.cli import run_command
from mvhedge.coefficients import (coefficient_system,
                                  deterministic_tradeoff_solution,
                                  opportunity_process)
from mvhedge.hedging import optimal_strategy, value_at, verify_optimality
from mvhedge.jumpdiff import (JumpDiffusionParams, bsde_residual,
                              mc_pure_investment)
from mvhedge.measures import (arai_example_check, conditional_price,
                              dual_value_check, vomm_density)
from mvhedge.oracle import (conditional_values, min_variance_signed_measure,
                            project_strategy)
from mvhedge.tree import (Node, PredictableControl, ScenarioTree, cond_exp,
                          stochastic_exponential)
from treegen import random_payoff, random_probe, random_tree

N_TREES = 200
CAPITALS = (-1.0, 0.0, 2.0)
FIT_CAPITALS = (-2.0, -1.0, 0.0, 1.0, 2.0)


CRITERION_LINES: list[str] = []


def report(num, desc, ok, detail=""):
    tail = f": {detail}" if detail else ""
    line = f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'} {desc}{tail}"
    CRITERION_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def corpus():
    out = []
    for seed in range(N_TREES):
        tree = random_tree(seed)
        out.append((seed, tree, random_payoff(tree, seed)))
    return out


def test_criterion_1_oracle_equivalence(corpus):
    t0 = time.perf_counter()
    worst_value = worst_theta = 0.0
    for seed, tree, payoff in corpus:
        coeffs, controls = coefficient_system(tree, payoff)
        for x in CAPITALS:
            theta, _ = optimal_strategy(tree, coeffs, controls, x)
            theta_oracle, value_oracle = project_strategy(tree, payoff, x)
            recursion = value_at(coeffs, tree.root, x)
            gap = abs(recursion - value_oracle)
            worst_value = max(worst_value,
                              gap / (1.0 + abs(value_oracle)))
            assert gap <= 1e-8 + 1e-8 * abs(value_oracle)
            for nid in tree.nonterminal_ids():
                d = abs(theta[nid] - theta_oracle[nid])
                worst_theta = max(worst_theta, d)
                assert d <= 1e-8
    elapsed = time.perf_counter() - t0
    report(1, "oracle equivalence on 200 random trees",
           elapsed < 30.0,
           f"max value gap {worst_value:.2e}, max control gap "
           f"{worst_theta:.2e}, {elapsed:.1f}s")


def test_criterion_2_quadratic_structure(corpus):
    design = np.column_stack([np.ones(len(FIT_CAPITALS)),
                              FIT_CAPITALS,
                              np.square(FIT_CAPITALS)])
    worst = 0.0
    for seed, tree, payoff in corpus:
        coeffs, _ = coefficient_system(tree, payoff)
        values = {x: conditional_values(tree, payoff, x) for x in FIT_CAPITALS}
        for nid in tree.ids():
            y = np.array([values[x][nid] for x in FIT_CAPITALS])
            c0, c1, c2 = np.linalg.lstsq(design, y, rcond=None)[0]
            gaps = (abs(c0 - coeffs.v0[nid]),
                    abs(-c1 / 2.0 - coeffs.v1[nid]),
                    abs(c2 - coeffs.v2[nid]))
            worst = max(worst, *gaps)
            assert all(g <= 1e-8 for g in gaps)
    report(2, "parabola fit through oracle values recovers coefficients",
           True, f"max coefficient gap {worst:.2e}")


def test_criterion_3_martingale_optimality(corpus):
    worst_star = 0.0
    worst_probe = math.inf
    probes_run = 0
    for seed, tree, payoff in corpus:
        coeffs, controls = coefficient_system(tree, payoff)
        theta, _ = optimal_strategy(tree, coeffs, controls, 1.0)
        n_probes = 5 if seed < 20 else 0
        for k in range(max(n_probes, 1)):
            probe = random_probe(tree, seed * 101 + k) if n_probes else theta
            rep = verify_optimality(tree, coeffs, theta, probe, 1.0)
            worst_star = max(worst_star, rep.max_abs_star_drift)
            worst_probe = min(worst_probe, rep.min_probe_drift)
            assert rep.passed
            probes_run += 1 if n_probes else 0
    assert probes_run == 100
    report(3, "value drift zero on optimal paths, nonnegative on probes",
           worst_star <= 1e-10 and worst_probe >= -1e-10,
           f"max |optimal drift| {worst_star:.2e}, min probe drift "
           f"{worst_probe:.2e} over {probes_run} probes")


def test_criterion_4_opportunity_bounds(corpus):
    lo = 1.0
    for seed, tree, _ in corpus:
        y2, _ = opportunity_process(tree)
        for nid in tree.ids():
            assert 0.0 < y2[nid] <= 1.0
            lo = min(lo, y2[nid])
        for nid in tree.nonterminal_ids():
            assert cond_exp(tree, y2, nid) >= y2[nid] - 1e-12
    report(4, "opportunity process in (0,1] and a submartingale",
           True, f"min value {lo:.6f}")


def test_criterion_5_duality(corpus):
    worst_obj = worst_dual = 0.0
    for seed, tree, _ in corpus:
        y2, a = opportunity_process(tree)
        _, objective = min_variance_signed_measure(tree)
        worst_obj = max(worst_obj, abs(objective * y2[tree.root] - 1.0))
        assert abs(objective * y2[tree.root] - 1.0) <= 1e-8
        dens = vomm_density(tree, y2, a)
        rep = dual_value_check(tree, dens, y2)
        worst_dual = max(worst_dual, rep.max_deviation)
        assert rep.max_deviation <= 1e-9
    report(5, "dual optimum is the reciprocal of the opportunity process",
           True, f"max |objective*y2 - 1| {worst_obj:.2e}, max node-wise "
           f"deviation {worst_dual:.2e}")


def test_criterion_6_vomm_formula(corpus):
    worst_leaf = worst_form = 0.0
    for seed, tree, _ in corpus:
        y2, a = opportunity_process(tree)
        dens = vomm_density(tree, y2, a)
        z_oracle, _ = min_variance_signed_measure(tree)
        for nid in tree.terminal_ids():
            gap = abs(dens.z[nid] - z_oracle[nid])
            worst_leaf = max(worst_leaf, gap)
            assert gap <= 1e-8
        # the two closed-form constructions, rebuilt explicitly
        gamma = PredictableControl({nid: -a[nid]
                                    for nid in tree.nonterminal_ids()})
        expo = stochastic_exponential(tree, gamma, tree.root)
        y0 = y2[tree.root]
        tower = {nid: expo[nid] / y0 for nid in tree.terminal_ids()}
        for t in range(tree.horizon - 1, -1, -1):
            for nid in tree.level(t):
                if tree.children(nid):
                    tower[nid] = cond_exp(tree, tower, nid)
        for nid in tree.ids():
            gap = abs(y2[nid] * expo[nid] / y0 - tower[nid])
            worst_form = max(worst_form, gap)
            assert gap <= 1e-10
    report(6, "variance-optimal density matches the oracle optimum",
           True, f"max leaf gap {worst_leaf:.2e}, max construction gap "
           f"{worst_form:.2e}")


def test_criterion_7_conditional_price(corpus):
    worst = 0.0
    for seed, tree, payoff in corpus:
        y2, a = opportunity_process(tree)
        coeffs, _ = coefficient_system(tree, payoff)
        dens = vomm_density(tree, y2, a)
        rep = conditional_price(tree, dens, payoff, coeffs)
        worst = max(worst, rep.max_deviation)
        assert rep.max_deviation <= 1e-9
    report(7, "v1/v2 prices the payoff under the variance-optimal measure",
           True, f"max deviation {worst:.2e}")


def _binomial(levels):
    nodes = [Node("r", 0, None, 1.0, 10.0)]
    frontier = [("r", 10.0)]
    for t in range(levels):
        nxt = []
        for nid, price in frontier:
            for tag, ds, p in (("u", 1.0, 0.6), ("d", -1.0, 0.4)):
                cid = f"{nid}{tag}"
                nodes.append(Node(cid, t + 1, nid, p, price + ds))
                nxt.append((cid, price + ds))
        frontier = nxt
    return ScenarioTree(nodes)


def test_criterion_8_deterministic_tradeoff():
    worst = 0.0
    for levels in (1, 2, 3):
        tree = _binomial(levels)
        closed = deterministic_tradeoff_solution(tree)
        y2, _ = opportunity_process(tree)
        for nid in tree.ids():
            rel = abs(closed[nid] - y2[nid]) / y2[nid]
            worst = max(worst, rel)
            assert rel <= 1e-9
    one = opportunity_process(_binomial(1))[0]["r"]
    two = opportunity_process(_binomial(2))[0]["r"]
    assert one == pytest.approx(0.96, rel=1e-12)
    assert two == pytest.approx(0.96**2, rel=1e-12)
    # oracle confirmation of the worked values
    zero1 = {nid: 0.0 for nid in _binomial(1).terminal_ids()}
    _, v1 = project_strategy(_binomial(1), zero1, 1.0)
    zero2 = {nid: 0.0 for nid in _binomial(2).terminal_ids()}
    _, v2 = project_strategy(_binomial(2), zero2, 1.0)
    assert v1 == pytest.approx(0.96, rel=1e-10)
    assert v2 == pytest.approx(0.96**2, rel=1e-10)
    report(8, "closed-form opportunity process on iid trees",
           True, f"worked values 0.96 and {0.96**2:.4f} confirmed, max "
           f"relative gap {worst:.2e}")


def test_criterion_9_jump_diffusion_closed_form():
    params = JumpDiffusionParams(mu=0.05, sigma=0.2, eta=0.1, alpha=2.0,
                                 s0=1.0, horizon=1.0)
    t0 = time.perf_counter()
    est = mc_pure_investment(params, steps=500, n_paths=100_000, seed=42)
    elapsed = time.perf_counter() - t0
    gap = abs(est.estimate - est.closed_form)
    bound = 3.0 * est.stderr + 5e-4
    grid = np.linspace(0.0, 1.0, 501)
    y = np.exp(params.kappa * (grid - 1.0))
    zeros = np.zeros_like(grid)
    residual = bsde_residual(params, grid, y, zeros, zeros)
    ok = gap <= bound and residual <= 1e-6 and elapsed < 60.0
    report(9, "Monte Carlo pure investment hits exp(-1/24)",
           ok, f"estimate {est.estimate:.6f} vs {est.closed_form:.6f}, "
           f"gap {gap:.2e} <= {bound:.2e}, backward-equation residual "
           f"{residual:.2e}, {elapsed:.1f}s")


def test_criterion_10_poisson_counterexample(capsys):
    result = arai_example_check(0.5, 0.5, 0.0)
    assert result.passed and all(c.passed for c in result.checks)
    assert run_command(["check-arai", "--gamma", "0.5", "--epsilon", "0.5",
                        "--beta", "0"]) == 0
    assert run_command(["check-arai", "--gamma", "0.5", "--epsilon", "0",
                        "--beta", "0"]) == 2
    capsys.readouterr()
    report(10, "counterexample parameter checks pass, boundary rejected",
           True, "four checks pass at (0.5, 0.5, 0); epsilon=0 exits 2")


def test_criterion_11_reproducibility(tmp_path):
    argv = ["simulate-jd", "--steps", "120", "--paths", "20000", "--seed",
            "13", "--format", "structured"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run_command(argv + ["--output", str(a)]) == 0
    assert run_command(argv + ["--output", str(b)]) == 0
    identical = a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    report(11, "seeded commands emit byte-identical structured output",
           identical and doc["passed"],
           f"{len(a.read_bytes())} bytes, identical={identical}")
