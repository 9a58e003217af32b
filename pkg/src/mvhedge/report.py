"""Report assembly and rendering (table, CSV, structured JSON).

Node rows are always emitted in canonical (time, id) order and floats
are rendered with shortest round-trip repr, so identical inputs produce
byte-identical output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class Check:
    name: str
    value: float
    tolerance: float | None
    passed: bool
    detail: str = ""


@dataclass
class Report:
    command: str
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def _cell(self, value) -> str:
        if value is None:
            return ""
        if isinstance(value, float):
            return repr(value)
        return str(value)

    def to_structured(self) -> str:
        doc = {
            "command": self.command,
            "columns": self.columns,
            "rows": self.rows,
            "summary": self.summary,
            "checks": [{"name": c.name, "value": c.value,
                        "tolerance": c.tolerance, "passed": c.passed,
                        "detail": c.detail} for c in self.checks],
            "warnings": self.warnings,
            "passed": self.passed,
        }
        return json.dumps(doc, indent=2) + "\n"

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(self._cell(row.get(c)) for c in self.columns))
        for key, value in self.summary.items():
            lines.append(f"# {key}={self._cell(value)}")
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            lines.append(f"# check {c.name}={self._cell(c.value)} [{status}]")
        for w in self.warnings:
            lines.append(f"# warning {w}")
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        cells = [[self._cell(row.get(c)) for c in self.columns]
                 for row in self.rows]
        widths = [max([len(c)] + [len(r[i]) for r in cells])
                  for i, c in enumerate(self.columns)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(self.columns, widths))]
        lines.append("  ".join("-" * w for w in widths))
        for r in cells:
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
        if self.summary:
            lines.append("")
            for key, value in self.summary.items():
                lines.append(f"{key}: {self._cell(value)}")
        if self.checks:
            lines.append("")
            for c in self.checks:
                status = "pass" if c.passed else "FAIL"
                tol = f" (tolerance {c.tolerance!r})" if c.tolerance is not None else ""
                detail = f" {c.detail}" if c.detail else ""
                lines.append(f"[{status}] {c.name} = {self._cell(c.value)}{tol}{detail}")
        for w in self.warnings:
            lines.append(f"warning: {w}")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "structured":
            return self.to_structured()
        if fmt == "csv":
            return self.to_csv()
        if fmt == "table":
            return self.to_table()
        raise ValueError(f"unknown format {fmt!r}")
