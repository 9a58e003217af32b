"""Scenario file parsing, payoff expressions and serialization.

Scenario files are JSON documents with a version field and one record
per node:

    {
      "version": 1,
      "payoff": "call strike=10",          # optional expression
      "nodes": [
        {"id": "root", "time": 0, "prob": 1.0, "price": 10.0},
        {"id": "u", "time": 1, "parent": "root", "prob": 0.6, "price": 11.0},
        {"id": "d", "time": 1, "parent": "root", "prob": 0.4, "price": 9.0}
      ]
    }

Terminal payoffs come either from a payoff expression (one of
``terminal_price``, ``call strike=<k>``, ``put strike=<k>``,
``constant value=<c>``) or from explicit ``payoff`` fields on terminal
records; supplying both is an error.  Prices must be scalars: this
package models a single risky asset and rejects anything else up front.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .tree import Node, ScenarioTree, TreeStructureError, no_arbitrage_check, validate_tree

FORMAT_VERSION = 1


class ScenarioFormatError(ValueError):
    pass


@dataclass
class ParsedScenario:
    tree: ScenarioTree
    payoff: dict[str, float] | None
    payoff_source: str | None
    warnings: list[str] = field(default_factory=list)


def resolve_payoff(tree: ScenarioTree, expression: str) -> dict[str, float]:
    """Evaluate a payoff expression on the terminal nodes."""
    tokens = expression.strip().split()
    if not tokens:
        raise ScenarioFormatError("empty payoff expression")
    kind, params = tokens[0], {}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise ScenarioFormatError(
                f"malformed payoff parameter {tok!r} in {expression!r}")
        key, _, raw = tok.partition("=")
        try:
            params[key] = float(raw)
        except ValueError:
            raise ScenarioFormatError(
                f"payoff parameter {tok!r} is not a number") from None

    def require(*names):
        if set(params) != set(names):
            raise ScenarioFormatError(
                f"payoff {kind!r} expects parameters {names}, got "
                f"{sorted(params)}")

    terminals = list(tree.terminal_ids())
    if kind == "terminal_price":
        require()
        return {nid: tree.price(nid) for nid in terminals}
    if kind == "call":
        require("strike")
        k = params["strike"]
        return {nid: max(tree.price(nid) - k, 0.0) for nid in terminals}
    if kind == "put":
        require("strike")
        k = params["strike"]
        return {nid: max(k - tree.price(nid), 0.0) for nid in terminals}
    if kind == "constant":
        require("value")
        return {nid: params["value"] for nid in terminals}
    raise ScenarioFormatError(
        f"unknown payoff expression {kind!r}; expected terminal_price, "
        "call strike=<k>, put strike=<k> or constant value=<c>")


def _require_number(record, key, nid):
    v = record.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioFormatError(
            f"node {nid!r}: field {key!r} must be a scalar number, got "
            f"{v!r} (multi-asset records are not supported)")
    return float(v)


def parse_scenario(path: str) -> ParsedScenario:
    """Load and fully validate a scenario file.

    Syntax errors carry the line and column from the JSON parser;
    semantic problems echo the diagnostics of ``validate_tree``.  A tree
    that admits arbitrage parses fine but gets a warning; the solve
    commands refuse to run on it.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(
            f"{path}: syntax error at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from None

    if not isinstance(doc, dict):
        raise ScenarioFormatError(f"{path}: top level must be an object")
    if doc.get("version") != FORMAT_VERSION:
        raise ScenarioFormatError(
            f"{path}: unsupported format version {doc.get('version')!r}, "
            f"expected {FORMAT_VERSION}")
    records = doc.get("nodes")
    if not isinstance(records, list) or not records:
        raise ScenarioFormatError(f"{path}: 'nodes' must be a non-empty list")

    nodes = []
    explicit_payoffs = {}
    for rec in records:
        if not isinstance(rec, dict):
            raise ScenarioFormatError(f"{path}: node record {rec!r} is not "
                                      "an object")
        nid = rec.get("id")
        if not isinstance(nid, str) or not nid:
            raise ScenarioFormatError(f"{path}: node record missing string "
                                      f"'id': {rec!r}")
        time = rec.get("time")
        if isinstance(time, bool) or not isinstance(time, int):
            raise ScenarioFormatError(f"node {nid!r}: 'time' must be an "
                                      "integer")
        parent = rec.get("parent")
        if parent is not None and not isinstance(parent, str):
            raise ScenarioFormatError(f"node {nid!r}: 'parent' must be a "
                                      "string or absent")
        prob = _require_number(rec, "prob", nid) if "prob" in rec else 1.0
        price = _require_number(rec, "price", nid)
        payoff = None
        if rec.get("payoff") is not None:
            payoff = _require_number(rec, "payoff", nid)
            explicit_payoffs[nid] = payoff
        unknown = set(rec) - {"id", "time", "parent", "prob", "price", "payoff"}
        if unknown:
            raise ScenarioFormatError(
                f"node {nid!r}: unknown fields {sorted(unknown)}")
        nodes.append(Node(id=nid, time=time, parent=parent, prob=prob,
                          price=price, payoff=payoff))

    try:
        tree = ScenarioTree(nodes)
    except TreeStructureError as exc:
        raise ScenarioFormatError(f"{path}: {exc}") from None

    problems = validate_tree(tree)
    if problems:
        listing = "\n  ".join(problems)
        raise ScenarioFormatError(f"{path}: invalid scenario:\n  {listing}")

    expression = doc.get("payoff")
    if expression is not None and not isinstance(expression, str):
        raise ScenarioFormatError(f"{path}: 'payoff' must be a string "
                                  "expression")
    if expression is not None and explicit_payoffs:
        raise ScenarioFormatError(
            f"{path}: payoff expression and explicit node payoffs are "
            "mutually exclusive")

    payoff = None
    source = None
    if expression is not None:
        payoff = resolve_payoff(tree, expression)
        source = expression
    elif explicit_payoffs:
        missing = [nid for nid in tree.terminal_ids()
                   if nid not in explicit_payoffs]
        if missing:
            raise ScenarioFormatError(
                f"{path}: explicit payoffs missing at terminal nodes "
                f"{missing[:5]}")
        stray = [nid for nid in explicit_payoffs if tree.children(nid)]
        if stray:
            raise ScenarioFormatError(
                f"{path}: payoff attached to non-terminal nodes {stray[:5]}")
        payoff = explicit_payoffs
        source = "explicit"

    warnings = []
    if not no_arbitrage_check(tree):
        warnings.append("tree admits arbitrage: some node's price change is "
                        "one-sided; solve commands will refuse it")
    return ParsedScenario(tree, payoff, source, warnings)


def serialize_scenario(tree: ScenarioTree, payoff_expression: str | None = None) -> str:
    """Canonical JSON rendering of a tree; parsing it back yields an
    identical tree id for id."""
    records = []
    for nid in tree.ids():
        n = tree.node(nid)
        rec = {"id": n.id, "time": n.time}
        if n.parent is not None:
            rec["parent"] = n.parent
        rec["prob"] = n.prob
        rec["price"] = n.price
        if n.payoff is not None:
            rec["payoff"] = n.payoff
        records.append(rec)
    doc = {"version": FORMAT_VERSION}
    if payoff_expression is not None:
        doc["payoff"] = payoff_expression
    doc["nodes"] = records
    return json.dumps(doc, indent=2) + "\n"
