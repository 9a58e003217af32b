"""Seeded random arbitrage-free trees, payoffs and probe controls.

Every generated object is a pure function of its seed, so the corpus
used by the acceptance suite is reproducible.  Trees have depth up to 4
and at most 3 children per node; single-child steps are riskless (zero
price move), multi-child steps always contain a strictly positive and a
strictly negative move, which keeps the tree arbitrage-free by
construction.
"""

from __future__ import annotations

import random

from mvhedge.tree import Node, PredictableControl, ScenarioTree


def random_tree(seed: int, max_depth: int = 4, max_children: int = 3,
                s0: float = 10.0) -> ScenarioTree:
    rng = random.Random(seed)
    depth = rng.randint(1, max_depth)
    nodes = [Node("n0", 0, None, 1.0, s0)]
    frontier = [("n0", s0)]
    counter = 1
    for t in range(depth):
        nxt = []
        for nid, price in frontier:
            k = rng.randint(1, max_children)
            if k == 1:
                moves = [0.0]
            else:
                moves = [rng.uniform(0.1, 2.0), -rng.uniform(0.1, 2.0)]
                moves += [rng.uniform(-2.0, 2.0) for _ in range(k - 2)]
                rng.shuffle(moves)
            raw = [rng.uniform(0.2, 1.0) for _ in range(k)]
            total = sum(raw)
            probs = [w / total for w in raw]
            probs[-1] = 1.0 - sum(probs[:-1])
            for prob, move in zip(probs, moves):
                cid = f"n{counter}"
                counter += 1
                nodes.append(Node(cid, t + 1, nid, prob, price + move))
                nxt.append((cid, price + move))
        frontier = nxt
    return ScenarioTree(nodes)


def random_payoff(tree: ScenarioTree, seed: int) -> dict[str, float]:
    rng = random.Random(seed ^ 0x5EED)
    kind = rng.choice(["terminal_price", "call", "put", "noise"])
    out = {}
    strike = rng.uniform(6.0, 14.0)
    for nid in tree.terminal_ids():
        s = tree.price(nid)
        if kind == "terminal_price":
            out[nid] = s
        elif kind == "call":
            out[nid] = max(s - strike, 0.0)
        elif kind == "put":
            out[nid] = max(strike - s, 0.0)
        else:
            out[nid] = rng.uniform(-5.0, 15.0)
    return out


def random_probe(tree: ScenarioTree, seed: int) -> PredictableControl:
    rng = random.Random(seed ^ 0xBEEF)
    return PredictableControl({nid: rng.uniform(-2.0, 2.0)
                               for nid in tree.nonterminal_ids()})
