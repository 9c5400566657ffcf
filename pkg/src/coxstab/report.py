"""Uniform check reports: per-item verdicts with replayable failure witnesses."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

SCHEMA_VERSION = 1

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"


@dataclass
class CheckItem:
    name: str
    status: str
    detail: str = ""
    witness: dict | None = None

    def as_dict(self):
        d = {"name": self.name, "status": self.status}
        if self.detail:
            d["detail"] = self.detail
        if self.witness is not None:
            d["witness"] = self.witness
        return d


@dataclass
class Report:
    command: str
    config: dict = field(default_factory=dict)
    items: list[CheckItem] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def add(self, name, ok, detail="", witness=None):
        status = PASS if ok else FAIL
        self.items.append(CheckItem(name, status, detail, witness))
        return ok

    def skip(self, name, detail=""):
        self.items.append(CheckItem(name, SKIPPED, detail))

    @property
    def passed(self):
        return all(item.status != FAIL for item in self.items)

    @property
    def failures(self):
        return [item for item in self.items if item.status == FAIL]

    def as_dict(self):
        # Timing is deliberately kept out: report bytes must be reproducible.
        return {
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "config": self.config,
            "passed": self.passed,
            "items": [item.as_dict() for item in self.items],
            "data": self.data,
        }

    def to_json(self, indent=2):
        return json.dumps(self.as_dict(), indent=indent, sort_keys=False)

    def text_lines(self):
        lines = [f"[{self.command}] {'PASS' if self.passed else 'FAIL'}"]
        width = max((len(i.name) for i in self.items), default=0)
        for item in self.items:
            line = f"  {item.name.ljust(width)}  {item.status}"
            if item.detail:
                line += f"  ({item.detail})"
            lines.append(line)
        return lines
