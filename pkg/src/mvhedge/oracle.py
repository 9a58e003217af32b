"""Exact brute-force solvers used as ground truth in the test suite.

Everything here solves the hedging problems as one flat linear-algebra
problem over the whole tree, with no dynamic programming, so the results
are independent of the backward recursions they are checked against.
Intended for small trees only (a few hundred nodes); exactness, not
scalability, is the point.
"""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from .tree import AdaptedProcess, PredictableControl, ScenarioTree

KKT_TOL = 1e-10


def _paths(tree: ScenarioTree, start: str):
    """Leaves under ``start`` with their conditional path probability and
    the list of (deciding node, price increment) edges along the way."""
    out = []
    stack = [(start, 1.0, [])]
    while stack:
        nid, p, edges = stack.pop()
        kids = tree.children(nid)
        if not kids:
            out.append((nid, p, edges))
            continue
        for c in kids:
            stack.append((c, p * tree.prob(c), edges + [(nid, tree.delta_s(c))]))
    out.sort(key=lambda item: item[0])
    return out


def project_strategy(tree: ScenarioTree, payoff: Mapping[str, float],
                     x: float, start: str | None = None):
    """Minimize the expected squared hedging error by direct least squares.

    One unknown position per non-terminal node of the subtree; the
    terminal wealth is affine in those unknowns, so the minimizer solves
    a (probability-weighted) linear least-squares problem.  Singular
    systems get the minimum-norm solution, which puts a zero position on
    riskless steps.

    Returns ``(theta, value)`` with ``theta`` a PredictableControl on the
    subtree and ``value`` the achieved minimum.
    """
    start = tree.root if start is None else start
    paths = _paths(tree, start)
    deciders = [nid for nid in tree.subtree_ids(start) if tree.children(nid)]
    col = {nid: j for j, nid in enumerate(deciders)}

    a = np.zeros((len(paths), len(deciders)))
    y = np.empty(len(paths))
    w = np.empty(len(paths))
    for i, (leaf, p, edges) in enumerate(paths):
        for nid, ds in edges:
            a[i, col[nid]] = ds
        y[i] = payoff[leaf] - x
        w[i] = p

    sw = np.sqrt(w)
    theta, *_ = np.linalg.lstsq(sw[:, None] * a, sw * y, rcond=None)

    resid = y - a @ theta
    grad = a.T @ (w * resid)
    if len(grad) and np.max(np.abs(grad)) > KKT_TOL * max(1.0, np.abs(y).max()):
        raise RuntimeError(
            f"projection normal equations not satisfied, residual "
            f"{np.max(np.abs(grad)):.3e}")
    value = float(w @ resid**2)
    return PredictableControl(dict(zip(deciders, map(float, theta)))), value


def conditional_values(tree: ScenarioTree, payoff: Mapping[str, float],
                       x: float) -> AdaptedProcess:
    """Minimal conditional squared hedging error at every node, each
    obtained by an independent projection on that node's subtree."""
    out = {}
    for nid in tree.ids():
        if tree.is_terminal(nid):
            out[nid] = (payoff[nid] - x) ** 2
        else:
            _, out[nid] = project_strategy(tree, payoff, x, start=nid)
    return AdaptedProcess(out)


def min_variance_signed_measure(tree: ScenarioTree):
    """Signed measure of unit mass that makes the price a martingale and
    has the smallest second moment of its leaf density.

    Solved as an equality-constrained least-norm problem in the scaled
    leaf densities: minimize ``sum p * z**2`` subject to the unit-mass
    row and one martingale row per non-terminal node.  Redundant rows
    are harmless (minimum-norm solve); genuinely infeasible rows mean
    the tree admits arbitrage.

    Returns ``(z, objective)`` where ``z`` maps every node to the
    density process value (leaves carry the measure, interior nodes the
    conditional expectation of the leaf values).
    """
    leaves = list(tree.terminal_ids())
    idx = {nid: i for i, nid in enumerate(leaves)}
    p = np.array([tree.path_probability(nid) for nid in leaves])

    deciders = list(tree.nonterminal_ids())
    rows = np.zeros((1 + len(deciders), len(leaves)))
    rhs = np.zeros(1 + len(deciders))
    rows[0] = p
    rhs[0] = 1.0
    for r, nid in enumerate(deciders, start=1):
        for leaf, pp, edges in _paths(tree, nid):
            ds = dict(edges)[nid]
            rows[r, idx[leaf]] = tree.path_probability(nid) * pp * ds

    # least-norm in w = sqrt(p) * z so the objective is the plain 2-norm
    sp = np.sqrt(p)
    b = rows / sp
    w, *_ = np.linalg.lstsq(b, rhs, rcond=None)
    gap = np.max(np.abs(b @ w - rhs))
    if gap > 1e-10:
        rank = np.linalg.matrix_rank(b)
        raise ValueError(
            "no signed martingale measure with unit mass: constraint "
            f"residual {gap:.3e} (rank {rank} of {b.shape[0]} rows)")

    z = {nid: float(w[idx[nid]] / sp[idx[nid]]) for nid in leaves}
    for t in range(tree.horizon - 1, -1, -1):
        for nid in tree.level(t):
            kids = tree.children(nid)
            if kids:
                z[nid] = float(sum(tree.prob(c) * z[c] for c in kids))
    objective = float(w @ w)
    return AdaptedProcess(z), objective
