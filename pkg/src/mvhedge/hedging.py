"""Optimal strategies, wealth paths, values and optimality certificates.

The optimal position is affine in current wealth, ``theta = b - a * x``,
with the adjustments computed by the coefficient recursion.  Optimality
is certified through one-step drifts of the value process along wealth
paths: zero along the optimal strategy, nonnegative along any other.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field

from .coefficients import AdjustmentControls, CoefficientTriple
from .tree import AdaptedProcess, PredictableControl, ScenarioTree, cond_exp

DRIFT_TOL = 1e-10
VALUE_NEG_TOL = 1e-10


def optimal_strategy(tree: ScenarioTree, coeffs: CoefficientTriple,
                     controls: AdjustmentControls, x: float,
                     start: str | None = None):
    """Feedback strategy and its wealth path on the subtree below ``start``.

    The wealth starts at ``x``, the position at each non-terminal node n
    is ``b(n) - a(n) * wealth(n)``, and wealth propagates with the price
    increment: ``X_child = X_n + theta_n * dS``.
    """
    start = tree.root if start is None else start
    wealth = {start: float(x)}
    theta = {}
    for nid in tree.subtree_ids(start):
        kids = tree.children(nid)
        if not kids:
            continue
        theta[nid] = controls.b[nid] - controls.a[nid] * wealth[nid]
        for c in kids:
            wealth[c] = wealth[nid] + theta[nid] * tree.delta_s(c)
    return PredictableControl(theta), AdaptedProcess(wealth)


def value_at(coeffs: CoefficientTriple, nid: str, x: float) -> float:
    """Quadratic value ``v0 - 2*v1*x + v2*x**2`` at one node.

    The value is a conditional minimum of a square, so it cannot be
    negative; rounding slack down to -1e-10 is clamped to zero, anything
    below that means the coefficients are inconsistent.
    """
    v = coeffs.v0[nid] - 2.0 * coeffs.v1[nid] * x + coeffs.v2[nid] * x * x
    if v < 0.0:
        if v < -VALUE_NEG_TOL:
            raise ValueError(f"negative value {v!r} at node {nid}: "
                             "coefficients inconsistent")
        return 0.0
    return v


@dataclass
class OptimalityReport:
    """Per-node one-step drifts of the value along two wealth paths."""
    star_drift: dict[str, float]
    probe_drift: dict[str, float]
    max_abs_star_drift: float
    min_probe_drift: float
    violations: list[str] = field(default_factory=list)
    passed: bool = True


def _wealth_path(tree: ScenarioTree, theta: Mapping[str, float], x: float,
                 start: str) -> dict[str, float]:
    wealth = {start: float(x)}
    for nid in tree.subtree_ids(start):
        for c in tree.children(nid):
            wealth[c] = wealth[nid] + theta[nid] * tree.delta_s(c)
    return wealth


def verify_optimality(tree: ScenarioTree, coeffs: CoefficientTriple,
                      theta_star: Mapping[str, float],
                      theta_probe: Mapping[str, float], x: float,
                      start: str | None = None) -> OptimalityReport:
    """Certify the martingale optimality principle numerically.

    For each non-terminal node of the subtree, reports the drift
    ``E[value(next wealth) | n] - value(wealth(n))`` under ``theta_star``
    (must vanish within 1e-10) and under ``theta_probe`` (must be above
    -1e-10; any admissible control makes the value a submartingale).
    Violations are flagged, not raised, so callers can print the table.
    """
    start = tree.root if start is None else start
    report = OptimalityReport({}, {}, 0.0, math.inf)
    for label, theta, drifts in (("optimal", theta_star, report.star_drift),
                                 ("probe", theta_probe, report.probe_drift)):
        wealth = _wealth_path(tree, theta, x, start)
        values = {nid: value_at(coeffs, nid, wealth[nid]) for nid in wealth}
        for nid in tree.subtree_ids(start):
            if tree.is_terminal(nid):
                continue
            drifts[nid] = cond_exp(tree, values, nid) - values[nid]
    report.max_abs_star_drift = max(
        (abs(d) for d in report.star_drift.values()), default=0.0)
    report.min_probe_drift = min(report.probe_drift.values(), default=0.0)
    for nid, d in report.star_drift.items():
        if abs(d) > DRIFT_TOL:
            report.violations.append(
                f"node {nid}: optimal-path drift {d!r} not zero")
    for nid, d in report.probe_drift.items():
        if d < -DRIFT_TOL:
            report.violations.append(
                f"node {nid}: probe-path drift {d!r} negative")
    report.passed = not report.violations
    return report


def hedging_error(tree: ScenarioTree, payoff: Mapping[str, float],
                  theta: Mapping[str, float], x: float) -> float:
    """Expected squared difference between the payoff and the terminal
    wealth of ``theta`` started at the root with capital ``x``; the exact
    path sum over terminal nodes."""
    wealth = _wealth_path(tree, theta, x, tree.root)
    return math.fsum(tree.path_probability(nid)
                     * (payoff[nid] - wealth[nid]) ** 2
                     for nid in tree.terminal_ids())
