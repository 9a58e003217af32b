"""Backward recursions for the quadratic value coefficients.

The conditional minimal squared hedging error at node ``n`` with running
capital ``x`` is the parabola ``v0(n) - 2*v1(n)*x + v2(n)*x**2``.  The
three coefficient processes solve one-step dynamic programming
recursions driven by conditional moments of the price increment, rolled
backwards from the terminal data ``v2 = 1``, ``v1 = H``, ``v0 = H**2``.

``v2`` alone is the opportunity process: the value of the pure
investment problem started with one unit of capital and nothing to
hedge.  It stays in (0, 1] on every arbitrage-free tree.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

from .tree import (AdaptedProcess, ArbitrageError, PredictableControl,
                   ScenarioTree, cond_exp, lambda_and_tradeoff,
                   no_arbitrage_check)

LEVEL_CONST_TOL = 1e-10


@dataclass(frozen=True)
class CoefficientTriple:
    """Quadratic value coefficients, one value of each per node."""
    v0: AdaptedProcess
    v1: AdaptedProcess
    v2: AdaptedProcess


@dataclass(frozen=True)
class AdjustmentControls:
    """Feedback ingredients of the optimal strategy ``theta = b - a*x``.

    ``a`` is the pure-investment adjustment (the optimal position per
    unit of wealth when there is nothing to hedge, with flipped sign),
    ``b`` the payoff adjustment.  Both are zero on riskless steps.
    """
    a: PredictableControl
    b: PredictableControl


def _check_unit_interval(y: float, nid: str) -> float:
    """Enforce the (0, 1] range of the quadratic coefficient.

    Probabilities are only required to sum to one within 1e-12, so the
    conditional mean of an all-ones process can exceed 1 by a few ulp;
    that rounding slack is clamped.  Anything else is a genuine bug: the
    recursion cannot leave (0, 1] on an arbitrage-free tree.
    """
    if 0.0 < y <= 1.0:
        return y
    if 1.0 < y <= 1.0 + 1e-12:
        return 1.0
    raise RuntimeError(f"positivity violated: quadratic coefficient {y!r} "
                       f"at node {nid} (this is a bug, not a model property)")


def _step_moments(tree: ScenarioTree, y2: Mapping[str, float], nid: str):
    """Conditional moments E[y2*dS], E[y2*dS^2] over the step out of nid."""
    kids = tree.children(nid)
    a = math.fsum(tree.prob(c) * y2[c] * tree.delta_s(c) for c in kids)
    b = math.fsum(tree.prob(c) * y2[c] * tree.delta_s(c) ** 2 for c in kids)
    return a, b


def opportunity_process(tree: ScenarioTree):
    """Solve the pure-investment problem backwards.

    Returns ``(y2, a)``: the opportunity process with terminal value 1 and

        y2(n) = E[y2 | n] - E[y2*dS | n]**2 / E[y2*dS**2 | n]

    at every non-terminal node, together with the adjustment
    ``a(n) = E[y2*dS | n] / E[y2*dS**2 | n]`` (zero when the denominator
    vanishes, i.e. on riskless steps).
    """
    if not no_arbitrage_check(tree):
        raise ArbitrageError("no equivalent martingale measure: some node's "
                             "price change is one-sided")
    y2 = {nid: 1.0 for nid in tree.terminal_ids()}
    adj = {}
    for t in range(tree.horizon - 1, -1, -1):
        for nid in tree.level(t):
            num, den = _step_moments(tree, y2, nid)
            mean = cond_exp(tree, y2, nid)
            if den == 0.0:
                y2[nid] = mean
                adj[nid] = 0.0
            else:
                y2[nid] = mean - num * num / den
                adj[nid] = num / den
            y2[nid] = _check_unit_interval(y2[nid], nid)
    return AdaptedProcess(y2), PredictableControl(adj)


def coefficient_system(tree: ScenarioTree, payoff: Mapping[str, float]):
    """Roll all three value coefficients backwards for payoff ``payoff``.

    ``payoff`` must assign a value to every terminal node.  Returns
    ``(CoefficientTriple, AdjustmentControls)``; the optimal position at
    node ``n`` with wealth ``x`` is ``b(n) - a(n) * x``.
    """
    if not no_arbitrage_check(tree):
        raise ArbitrageError("no equivalent martingale measure: some node's "
                             "price change is one-sided")
    missing = [nid for nid in tree.terminal_ids() if nid not in payoff]
    if missing:
        raise ValueError(f"payoff missing at terminal nodes {missing[:5]}")

    v2 = {nid: 1.0 for nid in tree.terminal_ids()}
    v1 = {nid: float(payoff[nid]) for nid in tree.terminal_ids()}
    v0 = {nid: float(payoff[nid]) ** 2 for nid in tree.terminal_ids()}
    a_ctl, b_ctl = {}, {}

    for t in range(tree.horizon - 1, -1, -1):
        for nid in tree.level(t):
            a2, den = _step_moments(tree, v2, nid)
            d1 = math.fsum(tree.prob(c) * v1[c] * tree.delta_s(c)
                           for c in tree.children(nid))
            e2 = cond_exp(tree, v2, nid)
            e1 = cond_exp(tree, v1, nid)
            e0 = cond_exp(tree, v0, nid)
            if den == 0.0:
                v2[nid], v1[nid], v0[nid] = e2, e1, e0
                a_ctl[nid] = b_ctl[nid] = 0.0
            else:
                v2[nid] = e2 - a2 * a2 / den
                v1[nid] = e1 - d1 * a2 / den
                v0[nid] = e0 - d1 * d1 / den
                a_ctl[nid] = a2 / den
                b_ctl[nid] = d1 / den
            v2[nid] = _check_unit_interval(v2[nid], nid)

    coeffs = CoefficientTriple(AdaptedProcess(v0), AdaptedProcess(v1),
                               AdaptedProcess(v2))
    return coeffs, AdjustmentControls(PredictableControl(a_ctl),
                                      PredictableControl(b_ctl))


def deterministic_tradeoff_solution(tree: ScenarioTree) -> AdaptedProcess:
    """Closed-form opportunity process when the tradeoff is deterministic.

    Requires the tradeoff increment from :func:`lambda_and_tradeoff` to
    be constant across the nodes of each time level (a level function).
    The opportunity process is then the running product

        y2(node at time k) = prod_{levels j >= k} 1 / (1 + dK_j),

    which this returns as a level function on the whole tree.
    """
    _, _, tradeoff = lambda_and_tradeoff(tree)
    level_dk = []
    for t in range(tree.horizon):
        vals = [tradeoff[nid] for nid in tree.level(t)]
        lo, hi = min(vals), max(vals)
        spread = hi - lo
        if spread > LEVEL_CONST_TOL * max(1.0, abs(hi)):
            raise ValueError(
                f"deterministic tradeoff assumption violated at level {t}: "
                f"increments spread {spread!r} across nodes")
        level_dk.append(vals[0])

    y_level = [1.0] * (tree.horizon + 1)
    for t in range(tree.horizon - 1, -1, -1):
        y_level[t] = y_level[t + 1] / (1.0 + level_dk[t])

    return AdaptedProcess({nid: y_level[tree.node(nid).time]
                           for nid in tree.ids()})


def psi_and_g(tree: ScenarioTree, y2: Mapping[str, float]):
    """Decompose the opportunity process against the price martingale.

    Returns ``(psi, g, residual)``:

    * ``psi(n)`` solves ``psi * qv = Cov(y2_next, dS | n)`` (the
      integrand of the orthogonal projection of the martingale part of
      ``y2`` on the price martingale),
    * ``g(n)`` solves ``g * qv = E[(y2_next - E[y2_next|n]) * dS**2 | n]``
      (the jump correction entering the recursion denominator),
    * ``residual`` is the worst gap, over non-terminal nodes, between
      the one-step drift ``E[y2|n] - y2(n)`` and its reformulation
      ``(psi + lam*pY)**2 / (pY*(1 + lam**2*qv) + g) * qv`` built from
      these pieces.  Riskless steps contribute zero throughout.
    """
    lam, qv, _ = lambda_and_tradeoff(tree)
    psi, g = {}, {}
    residual = 0.0
    for nid in tree.nonterminal_ids():
        kids = tree.children(nid)
        p_y = cond_exp(tree, y2, nid)
        if qv[nid] == 0.0:
            psi[nid] = 0.0
            g[nid] = 0.0
            continue
        mean_ds = math.fsum(tree.prob(c) * tree.delta_s(c) for c in kids)
        cov = math.fsum(tree.prob(c) * y2[c] * tree.delta_s(c) for c in kids)
        cov -= p_y * mean_ds
        psi[nid] = cov / qv[nid]
        g[nid] = math.fsum(tree.prob(c) * (y2[c] - p_y) * tree.delta_s(c) ** 2
                           for c in kids) / qv[nid]

        drift = p_y - y2[nid]
        num = psi[nid] + lam[nid] * p_y
        den = p_y * (1.0 + lam[nid] ** 2 * qv[nid]) + g[nid]
        residual = max(residual, abs(drift - num * num / den * qv[nid]))
    return PredictableControl(psi), PredictableControl(g), residual
