"""Scenario-tree market model in finite discrete time.

A market is a finite event tree: every node carries a time index, the
conditional probability of the branch leading to it and a scalar asset
price; terminal nodes may carry a payoff.  All stochastic processes are
plain mappings keyed by node id:

* an adapted process assigns one value to every node,
* a predictable control assigns one value to every non-terminal node
  (the position held over the following step).

Only single-asset trees are supported; the scenario parser rejects
anything else.
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Mapping
from dataclasses import dataclass

PROB_SUM_TOL = 1e-12
REL_IDENTITY_TOL = 1e-10


class TreeStructureError(ValueError):
    """Node list cannot be wired into a tree at all."""


class ArbitrageError(ValueError):
    """Operation requires an arbitrage-free tree."""


@dataclass(frozen=True)
class Node:
    id: str
    time: int
    parent: str | None
    prob: float
    price: float
    payoff: float | None = None


class ScenarioTree:
    """Finite event tree with a single root at time 0.

    Construction wires parent/child links and raises
    :class:`TreeStructureError` for graphs that are not trees (duplicate
    ids, dangling parents, no unique root, broken time indexing).
    Value-level invariants such as probability sums are *not* enforced
    here; :func:`validate_tree` reports them as diagnostics so malformed
    inputs can be inspected.

    The tree and every process derived from it are immutable after
    construction; all operations in this package are pure functions and
    safe to call concurrently on shared trees.
    """

    def __init__(self, nodes):
        node_list = [n if isinstance(n, Node) else Node(**n) for n in nodes]
        if not node_list:
            raise TreeStructureError("empty node list")

        self._nodes: dict[str, Node] = {}
        for n in node_list:
            if n.id in self._nodes:
                raise TreeStructureError(f"duplicate node id {n.id!r}")
            self._nodes[n.id] = n

        roots = [n for n in node_list if n.parent is None]
        if len(roots) != 1:
            raise TreeStructureError(
                f"expected exactly one root node, found {len(roots)}")
        self.root: str = roots[0].id
        if roots[0].time != 0:
            raise TreeStructureError(
                f"root node {self.root!r} has time {roots[0].time}, expected 0")

        children: dict[str, list[str]] = {n.id: [] for n in node_list}
        for n in node_list:
            if n.parent is None:
                continue
            if n.parent not in self._nodes:
                raise TreeStructureError(
                    f"node {n.id!r} references unknown parent {n.parent!r}")
            if n.time != self._nodes[n.parent].time + 1:
                raise TreeStructureError(
                    f"node {n.id!r} at time {n.time} has parent at time "
                    f"{self._nodes[n.parent].time}")
            children[n.parent].append(n.id)

        # canonical ordering everywhere: (time, id lexicographic)
        self._children: dict[str, tuple[str, ...]] = {
            nid: tuple(sorted(kids)) for nid, kids in children.items()}
        self.horizon: int = max(n.time for n in node_list)
        self._order: tuple[str, ...] = tuple(
            n.id for n in sorted(node_list, key=lambda n: (n.time, n.id)))
        self._levels: list[tuple[str, ...]] = [
            tuple(nid for nid in self._order if self._nodes[nid].time == t)
            for t in range(self.horizon + 1)]

        path_prob: dict[str, float] = {self.root: 1.0}
        for nid in self._order:
            if nid == self.root:
                continue
            n = self._nodes[nid]
            path_prob[nid] = path_prob[n.parent] * n.prob
        self._path_prob = path_prob

    # -- lookups ---------------------------------------------------------

    def node(self, nid: str) -> Node:
        return self._nodes[nid]

    def children(self, nid: str) -> tuple[str, ...]:
        return self._children[nid]

    def price(self, nid: str) -> float:
        return self._nodes[nid].price

    def prob(self, nid: str) -> float:
        return self._nodes[nid].prob

    def delta_s(self, child_id: str) -> float:
        """Price increment over the edge leading into ``child_id``."""
        child = self._nodes[child_id]
        if child.parent is None:
            raise ValueError("root has no incoming edge")
        return child.price - self._nodes[child.parent].price

    def path_probability(self, nid: str) -> float:
        return self._path_prob[nid]

    def is_terminal(self, nid: str) -> bool:
        return not self._children[nid]

    # -- canonical iteration ---------------------------------------------

    def ids(self) -> tuple[str, ...]:
        return self._order

    def level(self, t: int) -> tuple[str, ...]:
        return self._levels[t]

    def nonterminal_ids(self) -> Iterator[str]:
        return (nid for nid in self._order if self._children[nid])

    def terminal_ids(self) -> Iterator[str]:
        return (nid for nid in self._order if not self._children[nid])

    def subtree_ids(self, start: str) -> list[str]:
        """Nodes of the subtree rooted at ``start``, in canonical order."""
        if start not in self._nodes:
            raise KeyError(start)
        out = [start]
        frontier = [start]
        while frontier:
            nxt = []
            for nid in frontier:
                nxt.extend(self._children[nid])
            nxt.sort(key=lambda i: (self._nodes[i].time, i))
            out.extend(nxt)
            frontier = nxt
        return out

    def payoffs(self) -> dict[str, float] | None:
        """Explicit terminal payoffs, or None if any terminal lacks one."""
        out = {}
        for nid in self.terminal_ids():
            p = self._nodes[nid].payoff
            if p is None:
                return None
            out[nid] = p
        return out

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, nid: str) -> bool:
        return nid in self._nodes


class _NodeValues(Mapping):
    """Immutable id -> value mapping shared by the process types."""

    __slots__ = ("value",)

    def __init__(self, value: Mapping[str, float]):
        object.__setattr__(self, "value", dict(value))

    def __setattr__(self, name, _):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __getitem__(self, nid: str) -> float:
        return self.value[nid]

    def __iter__(self):
        return iter(self.value)

    def __len__(self) -> int:
        return len(self.value)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.value!r})"


class AdaptedProcess(_NodeValues):
    """One real value per node of the associated tree."""

    @classmethod
    def constant(cls, tree: ScenarioTree, c: float) -> "AdaptedProcess":
        return cls({nid: float(c) for nid in tree.ids()})


class PredictableControl(_NodeValues):
    """One real value per non-terminal node: the position held over the
    step out of that node."""

    @classmethod
    def constant(cls, tree: ScenarioTree, c: float) -> "PredictableControl":
        return cls({nid: float(c) for nid in tree.nonterminal_ids()})


def check_adapted(tree: ScenarioTree, values: Mapping[str, float]) -> None:
    missing = [nid for nid in tree.ids() if nid not in values]
    if missing:
        raise ValueError(f"process missing values at nodes {missing[:5]}")


def check_predictable(tree: ScenarioTree, values: Mapping[str, float]) -> None:
    missing = [nid for nid in tree.nonterminal_ids() if nid not in values]
    if missing:
        raise ValueError(f"control missing values at nodes {missing[:5]}")


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def validate_tree(tree: ScenarioTree) -> list[str]:
    """Diagnostic check of all value-level tree invariants.

    Returns an empty list iff the tree is well formed; otherwise one
    message per violation, each naming the offending node and rule.
    Missing terminal payoffs are deliberately not a violation here; the
    operations that need payoffs report that themselves.
    """
    problems = []
    for nid in tree.ids():
        n = tree.node(nid)
        if not (0.0 < n.prob <= 1.0):
            problems.append(f"node {nid}: branch probability {n.prob!r} "
                            "outside (0, 1]")
        if not math.isfinite(n.price):
            problems.append(f"node {nid}: price {n.price!r} is not finite")
        if n.payoff is not None:
            if not math.isfinite(n.payoff):
                problems.append(f"node {nid}: payoff {n.payoff!r} is not finite")
            if n.time != tree.horizon:
                problems.append(f"node {nid}: payoff attached at time "
                                f"{n.time} != horizon {tree.horizon}")
        kids = tree.children(nid)
        if kids:
            total = math.fsum(tree.prob(c) for c in kids)
            if abs(total - 1.0) > PROB_SUM_TOL:
                problems.append(f"node {nid}: children probabilities sum "
                                f"{total!r} != 1")
        elif n.time != tree.horizon:
            problems.append(f"node {nid}: leaf at time {n.time} before "
                            f"horizon {tree.horizon}")
    return problems


def cond_exp(tree: ScenarioTree, values: Mapping[str, float], nid: str) -> float:
    """One-step conditional expectation at a non-terminal node:
    the probability-weighted average of ``values`` over the children."""
    kids = tree.children(nid)
    if not kids:
        raise ValueError(f"no conditional expectation at terminal node {nid!r}")
    return math.fsum(tree.prob(c) * values[c] for c in kids)


def doob_decomposition(tree: ScenarioTree):
    """Split the price increments into predictable drift plus a
    conditionally centered martingale increment.

    Returns ``(drift, mart)`` where ``drift`` is a PredictableControl
    (per non-terminal node) and ``mart`` maps every non-root node to the
    increment of the martingale part over its incoming edge.  The two
    reconstruct the price increment edge by edge exactly.
    """
    drift = {}
    mart = {}
    for nid in tree.nonterminal_ids():
        kids = tree.children(nid)
        a = math.fsum(tree.prob(c) * tree.delta_s(c) for c in kids)
        drift[nid] = a
        for c in kids:
            mart[c] = tree.delta_s(c) - a
    return PredictableControl(drift), mart


def lambda_and_tradeoff(tree: ScenarioTree):
    """Per-step market-price-of-risk ratio, conditional variance of the
    price increment, and their mean-variance tradeoff increment.

    At each non-terminal node with conditional mean ``a`` and variance
    ``v`` of the next price increment this returns ``lam = a / v``,
    ``qv = v`` and ``tradeoff = lam**2 * v = a**2 / v``.  A riskless step
    (``v == 0`` and ``a == 0``) contributes zero to all three; ``v == 0``
    with ``a != 0`` is a one-step arbitrage and raises.
    """
    lam, qv, tradeoff = {}, {}, {}
    for nid in tree.nonterminal_ids():
        kids = tree.children(nid)
        a = math.fsum(tree.prob(c) * tree.delta_s(c) for c in kids)
        m2 = math.fsum(tree.prob(c) * tree.delta_s(c) ** 2 for c in kids)
        var = m2 - a * a
        if var <= 0.0:
            # all increments conditionally equal; only zero is admissible
            if a != 0.0:
                raise ArbitrageError(
                    f"arbitrage step at node {nid}: deterministic nonzero "
                    f"return {a!r}")
            lam[nid], qv[nid], tradeoff[nid] = 0.0, 0.0, 0.0
        else:
            lam[nid] = a / var
            qv[nid] = var
            tradeoff[nid] = a * a / var
    return (PredictableControl(lam), PredictableControl(qv),
            PredictableControl(tradeoff))


def stochastic_exponential(tree: ScenarioTree, gamma: Mapping[str, float],
                           start: str) -> AdaptedProcess:
    """Multiplicative exponential of the integral of ``gamma`` against the
    price, over the subtree rooted at ``start``.

    Value 1 at ``start``; at each descendant, the parent value times
    ``1 + gamma(parent) * delta_S``.  Zero and negative values are legal
    (the exponential is signed), and a zero is absorbing on the whole
    subtree below it.
    """
    out = {start: 1.0}
    for nid in tree.subtree_ids(start):
        for c in tree.children(nid):
            out[c] = out[nid] * (1.0 + gamma[nid] * tree.delta_s(c))
    return AdaptedProcess(out)


def no_arbitrage_check(tree: ScenarioTree) -> bool:
    """True iff at every non-terminal node the one-step price change is
    identically zero or takes both a strictly positive and a strictly
    negative value.  On a finite tree this is equivalent to the
    existence of an equivalent martingale measure."""
    for nid in tree.nonterminal_ids():
        moves = [tree.delta_s(c) for c in tree.children(nid)]
        if all(m == 0.0 for m in moves):
            continue
        if not (min(moves) < 0.0 < max(moves)):
            return False
    return True
