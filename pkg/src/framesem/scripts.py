"""Complex-event scripts: ordered, coreference-bound subevents with
preconditions and effects, stored in the frame file format."""

from __future__ import annotations

from dataclasses import dataclass, field

from .kr import AnchorRef, ConceptRef, Facet, Frame, KBError, parse_kb, serialize_kb

FIRM = "firm"
UNCERTAIN = "uncertain"  # bare-"and" pairs await confirmation
EITHER = "either"  # confirmed order-insensitive


@dataclass
class ScriptFrame:
    name: str
    is_a: str | None
    agent: AnchorRef | None
    theme: AnchorRef | None
    parts: list  # ordered AnchorRefs
    optional: set = field(default_factory=set)
    caused_by: AnchorRef | None = None
    effect: AnchorRef | None = None
    pair_certainty: dict = field(default_factory=dict)  # (a, b) -> FIRM|UNCERTAIN|EITHER
    frames: dict = field(default_factory=dict)  # AnchorRef -> Frame

    def mandatory_parts(self):
        return [p for p in self.parts if p not in self.optional]

    def adjacent_pairs(self):
        return list(zip(self.parts, self.parts[1:]))

    def certainty(self, a, b):
        return self.pair_certainty.get((a, b), FIRM)

    def frame(self, ref) -> Frame:
        return self.frames[ref]

    def well_formed_issues(self, ontology=None):
        issues = []
        if not self.parts:
            issues.append(f"{self.name}: no subevents")
        for p in self.parts:
            if p not in self.frames:
                issues.append(f"{self.name}: subevent {p} has no frame")
        if self.is_a is None:
            issues.append(f"{self.name}: no parent concept")
        elif ontology is not None and self.is_a not in ontology:
            issues.append(f"{self.name}: parent {self.is_a} not in ontology")
        if ontology is not None:
            for ref, frame in self.frames.items():
                if ref.concept not in ontology and ref in self.parts:
                    issues.append(f"{self.name}: subevent concept {ref.concept} unknown")
        return issues

    # -- text format ---------------------------------------------------------

    def to_frames(self):
        top = Frame(ConceptRef(self.name), kind="script")
        if self.is_a:
            top.add("IS-A", Facet.VALUE, [ConceptRef(self.is_a)])
        if self.agent:
            top.add("AGENT", Facet.VALUE, [self.agent])
        if self.theme:
            top.add("THEME", Facet.VALUE, [self.theme])
        if self.caused_by:
            top.add("CAUSED-BY", Facet.VALUE, [self.caused_by])
        if self.effect:
            top.add("EFFECT", Facet.VALUE, [self.effect])
        top.add("HAS-EVENT-AS-PART", Facet.VALUE, list(self.parts))
        if self.optional:
            top.add("OPTIONAL-PART", Facet.VALUE, sorted(self.optional))
        for (a, b), certainty in sorted(self.pair_certainty.items(), key=lambda kv: str(kv[0])):
            if certainty == UNCERTAIN:
                top.add("ORDER-UNCERTAIN", Facet.VALUE, [a, b])
            elif certainty == EITHER:
                top.add("ORDER-EITHER", Facet.VALUE, [a, b])
        out = [top]
        for ref, frame in self.frames.items():
            out.append(frame)
        return out

    def serialize(self):
        return serialize_kb(self.to_frames())

    @classmethod
    def from_frames(cls, frames):
        top = None
        rest = []
        for f in frames:
            if f.kind == "script":
                if top is not None:
                    raise KBError("one script block per script document")
                top = f
            else:
                rest.append(f)
        if top is None:
            raise KBError("no script block found")
        parts = [f for f in top.fillers("HAS-EVENT-AS-PART") if isinstance(f, AnchorRef)]
        optional = {f for f in top.fillers("OPTIONAL-PART") if isinstance(f, AnchorRef)}
        pair_certainty = {}
        for slot in top.slots:
            if slot.prop in ("ORDER-UNCERTAIN", "ORDER-EITHER") and len(slot.fillers) == 2:
                a, b = slot.fillers
                pair_certainty[(a, b)] = UNCERTAIN if slot.prop == "ORDER-UNCERTAIN" else EITHER
        is_a = top.filler("IS-A")
        script = cls(
            name=top.head.name,
            is_a=is_a.name if isinstance(is_a, ConceptRef) else None,
            agent=top.filler("AGENT"),
            theme=top.filler("THEME"),
            parts=parts,
            optional=optional,
            caused_by=top.filler("CAUSED-BY"),
            effect=top.filler("EFFECT"),
            pair_certainty=pair_certainty,
            frames={f.head: f for f in rest if isinstance(f.head, AnchorRef)},
        )
        return script

    @classmethod
    def from_text(cls, text):
        return cls.from_frames(parse_kb(text))


def load_script_documents(frames):
    """Split a mixed frame list into scripts: each script block owns the
    instance blocks that follow it up to the next script block."""
    scripts = {}
    current = None
    bucket = []
    for f in frames:
        if f.kind == "script":
            if current is not None:
                scripts[current[0]] = ScriptFrame.from_frames([current[1]] + bucket)
            current = (f.head.name, f)
            bucket = []
        elif f.kind == "instance" and current is not None:
            bucket.append(f)
    if current is not None:
        scripts[current[0]] = ScriptFrame.from_frames([current[1]] + bucket)
    return scripts


@dataclass
class Plan:
    script: str
    steps: list  # AnchorRefs in execution order
    provenance: str  # stencil | copied | default

    def describe(self):
        steps = " ".join(str(s) for s in self.steps)
        return f"plan for {self.script} [{self.provenance}]: {steps}"


def default_traversal(script: ScriptFrame) -> Plan:
    return Plan(script.name, list(script.mandatory_parts()), "default")


def validate_path(script: ScriptFrame, path) -> list:
    """A path must cover all mandatory parts, use only known parts, and
    respect every firm adjacent ordering."""
    issues = []
    known = set(script.parts)
    for ref in path:
        if ref not in known:
            issues.append(f"{ref} is not a branch of {script.name}")
    for ref in script.mandatory_parts():
        if ref not in path:
            issues.append(f"path omits mandatory step {ref}")
    position = {ref: i for i, ref in enumerate(path)}
    for a, b in script.adjacent_pairs():
        if script.certainty(a, b) == FIRM and a in position and b in position:
            if position[a] > position[b]:
                issues.append(f"path reverses firm order {a} < {b}")
    return issues
