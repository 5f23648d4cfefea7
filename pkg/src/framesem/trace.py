"""Deterministic processing traces: the package's one observability surface."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class TraceEvent:
    stage: str
    inputs: str
    decision: str
    rejected: list = field(default_factory=list)  # (alternative, reason)
    cited: list = field(default_factory=list)  # sense ids, concepts, facets, shapes

    def as_dict(self):
        return {
            "stage": self.stage,
            "inputs": self.inputs,
            "decision": self.decision,
            "rejected": [{"alternative": a, "reason": r} for a, r in self.rejected],
            "cited": list(self.cited),
        }


class Trace:
    """Ordered event log; rendering is byte-stable across runs."""

    def __init__(self, enabled=True):
        self.enabled = enabled
        self.events = []

    def add(self, stage, inputs, decision, rejected=(), cited=()):
        if self.enabled:
            self.events.append(
                TraceEvent(stage, inputs, decision, list(rejected), list(cited))
            )

    def render_text(self):
        lines = []
        for ev in self.events:
            lines.append(f"[{ev.stage}] {ev.inputs} => {ev.decision}")
            for alt, reason in ev.rejected:
                lines.append(f"  rejected: {alt} ({reason})")
            if ev.cited:
                lines.append(f"  cited: {', '.join(ev.cited)}")
        return "\n".join(lines) + ("\n" if lines else "")

    def render_jsonl(self):
        return "".join(json.dumps(ev.as_dict(), sort_keys=True) + "\n" for ev in self.events)


NULL_TRACE = Trace(enabled=False)
