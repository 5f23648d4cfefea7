"""Frame knowledge-representation language: values, frames, file format.

Everything else in the package (ontology concepts, lexicon senses, meaning
representations, episodic memory, scripts, generation shapes) is carried by
the same frame structure and the same line-oriented text format defined here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum


class KBError(Exception):
    """Raised for malformed KB text or inconsistent frame stores."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


# ---------------------------------------------------------------------------
# Filler values


@dataclass(frozen=True, order=True)
class ConceptRef:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, order=True)
class InstanceRef:
    """A local instance index, e.g. TIGER-1. Renumberable in comparisons."""

    concept: str
    index: int

    def __str__(self):
        return f"{self.concept}-{self.index}"


@dataclass(frozen=True, order=True)
class AnchorRef:
    """A store- or script-scoped index, e.g. HUMAN-#17. Compared exactly."""

    concept: str
    index: int

    def __str__(self):
        return f"{self.concept}-#{self.index}"


@dataclass(frozen=True, order=True)
class Literal:
    """Verbatim text: names (Tony), values (blue), numbers (.8), dates."""

    text: str

    def __str__(self):
        return self.text


@dataclass(frozen=True, order=True)
class RelationalExpr:
    """Comparator plus routine name or literal, e.g. `< find-anchor-time`."""

    op: str
    arg: str

    def __str__(self):
        return f"{self.op} {self.arg}"


@dataclass(frozen=True, order=True)
class Variable:
    """$varN, used in lexicon syntactic patterns."""

    n: int

    def __str__(self):
        return f"$var{self.n}"


@dataclass(frozen=True, order=True)
class MeaningOf:
    """^$varN or ^$varN.PROP: the meaning of a pattern variable."""

    n: int
    path: str | None = None

    def __str__(self):
        base = f"^$var{self.n}"
        return f"{base}.{self.path}" if self.path else base


Filler = ConceptRef | InstanceRef | AnchorRef | Literal | RelationalExpr | Variable | MeaningOf

COMPARATORS = ("<=", ">=", "<", ">", "=")


class Facet(Enum):
    VALUE = "value"
    DEFAULT = "default"
    SEM = "sem"
    RELAXABLE_TO = "relaxable-to"

    @property
    def strength(self):
        return _FACET_STRENGTH[self]

    def __str__(self):
        return self.value


# Strict total order, strongest first.
_FACET_STRENGTH = {
    Facet.VALUE: 4,
    Facet.DEFAULT: 3,
    Facet.SEM: 2,
    Facet.RELAXABLE_TO: 1,
}

FACET_NAMES = {f.value: f for f in Facet}

# Properties canonicalized to lowercase instead of uppercase; mirrors the
# source renderings where bookkeeping slots are set lowercase.
RESERVED_LOWER = {
    "episodic-mem",
    "lex-map",
    "def",
    "ex",
    "syn-class",
    "sem-shape",
    "after-use",
    "before-event",
    "at-time",
}


def canonical_property(name: str) -> str:
    low = name.lower()
    if low in RESERVED_LOWER:
        return low
    return name.upper()


@dataclass(frozen=True)
class Slot:
    prop: str
    facet: Facet
    fillers: tuple

    def __post_init__(self):
        if not self.fillers:
            raise KBError(f"slot {self.prop} has no fillers")


@dataclass
class Frame:
    """A named head plus ordered (property, facet, fillers) slots."""

    head: Filler
    slots: list = field(default_factory=list)
    kind: str = "concept"

    def add(self, prop, facet, fillers):
        self.slots.append(Slot(canonical_property(prop), facet, tuple(fillers)))

    def fillers(self, prop, facet=None):
        """All fillers for prop, merged across repeated lines, order kept."""
        prop = canonical_property(prop)
        out = []
        for slot in self.slots:
            if slot.prop == prop and (facet is None or slot.facet == facet):
                out.extend(slot.fillers)
        return out

    def filler(self, prop, facet=None):
        vals = self.fillers(prop, facet)
        return vals[0] if vals else None

    def has(self, prop):
        return bool(self.fillers(prop))

    def properties(self):
        seen = []
        for slot in self.slots:
            if slot.prop not in seen:
                seen.append(slot.prop)
        return seen

    def without(self, props):
        """Copy minus the named properties (for modulo-slot comparisons)."""
        props = {canonical_property(p) for p in props}
        out = Frame(self.head, [s for s in self.slots if s.prop not in props], self.kind)
        return out

    def __eq__(self, other):
        return (
            isinstance(other, Frame)
            and self.head == other.head
            and self.kind == other.kind
            and self.slots == other.slots
        )


# ---------------------------------------------------------------------------
# Lexing

BLOCK_KINDS = ("concept", "instance", "sense", "shape", "script")

_CONCEPT_RE = re.compile(r"^[A-Z][A-Z0-9]*(-[A-Z0-9]+)*$")
_ANCHOR_RE = re.compile(r"^([A-Za-z][A-Za-z0-9-]*?)-?#(\d+)$")
_INSTANCE_RE = re.compile(r"^([A-Z][A-Z0-9-]*?)-(\d+)$")
_VAR_RE = re.compile(r"^\$var(\d+)$")
_MEANING_RE = re.compile(r"^\^\$var(\d+)(?:\.([A-Za-z-]+))?$")


def is_concept_token(tok: str) -> bool:
    return bool(_CONCEPT_RE.match(tok)) and any(c.isalpha() for c in tok)


def parse_filler_token(tok: str) -> Filler:
    m = _MEANING_RE.match(tok)
    if m:
        path = canonical_property(m.group(2)) if m.group(2) else None
        return MeaningOf(int(m.group(1)), path)
    m = _VAR_RE.match(tok)
    if m:
        return Variable(int(m.group(1)))
    m = _ANCHOR_RE.match(tok)
    if m:
        return AnchorRef(m.group(1).upper(), int(m.group(2)))
    m = _INSTANCE_RE.match(tok)
    if m:
        return InstanceRef(m.group(1), int(m.group(2)))
    if is_concept_token(tok):
        return ConceptRef(tok)
    return Literal(tok)


def parse_fillers(tokens, line=None):
    """Token list -> fillers; comparators absorb the following token."""
    out = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok in COMPARATORS:
            if i + 1 >= len(tokens):
                raise KBError(f"comparator {tok} lacks an argument", line)
            out.append(RelationalExpr(tok, tokens[i + 1]))
            i += 2
        else:
            out.append(parse_filler_token(tok))
            i += 1
    if not out:
        raise KBError("expected at least one filler", line)
    return out


def render_filler(f: Filler) -> str:
    return str(f)


@dataclass
class RawLine:
    indent: int
    tokens: list
    lineno: int


@dataclass
class RawBlock:
    kind: str
    name: str
    lines: list
    lineno: int


def _strip_comment(text: str) -> str:
    pos = text.find(";")
    return text if pos < 0 else text[:pos]


def split_blocks(text: str):
    """Split a KB document into raw blocks; shared by all format readers."""
    blocks = []
    current = None
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = _strip_comment(raw).rstrip()
        if not line.strip():
            continue
        stripped = line.lstrip(" ")
        n_spaces = len(line) - len(stripped)
        if n_spaces % 2 != 0:
            raise KBError("indentation must be a multiple of two spaces", lineno)
        indent = n_spaces // 2
        tokens = [t for t in (tok.strip(",") for tok in stripped.split()) if t]
        if not tokens:
            continue
        if indent == 0:
            if len(tokens) != 2:
                raise KBError("block header must be `kind name`", lineno)
            kind, name = tokens
            if kind not in BLOCK_KINDS:
                raise KBError(f"unknown block kind {kind!r}", lineno)
            current = RawBlock(kind, name, [], lineno)
            blocks.append(current)
        else:
            if current is None:
                raise KBError("indented line outside any block", lineno)
            current.lines.append(RawLine(indent, tokens, lineno))
    names = set()
    for b in blocks:
        key = (b.kind, b.name.lower())
        if key in names:
            raise KBError(f"duplicate block {b.kind} {b.name}", b.lineno)
        names.add(key)
    return blocks


def _parse_head(kind: str, name: str, lineno: int) -> Filler:
    if kind in ("concept", "script"):
        if not is_concept_token(name.upper()):
            raise KBError(f"bad {kind} name {name!r}", lineno)
        return ConceptRef(name.upper())
    if kind == "instance":
        filler = parse_filler_token(name)
        if not isinstance(filler, (InstanceRef, AnchorRef)):
            raise KBError(f"bad instance name {name!r}", lineno)
        return filler
    return Literal(name)  # sense/shape ids stay verbatim


def frame_from_block(block: RawBlock) -> Frame:
    """Build a flat Frame from a concept/instance/script block."""
    frame = Frame(_parse_head(block.kind, block.name, block.lineno), kind=block.kind)
    prev_prop = None
    for line in block.lines:
        if line.indent != 1:
            raise KBError(f"{block.kind} blocks are flat", line.lineno)
        tokens = list(line.tokens)
        optional = False
        if tokens[0].startswith("(") and tokens[-1].endswith(")"):
            tokens[0] = tokens[0][1:]
            tokens[-1] = tokens[-1][:-1]
            optional = True
        head_tok = tokens[0]
        if block.kind == "concept":
            if head_tok.lower() in FACET_NAMES:
                # facet-first continuation line: property carries over
                if prev_prop is None:
                    raise KBError("facet line before any property", line.lineno)
                prop, facet, rest = prev_prop, FACET_NAMES[head_tok.lower()], tokens[1:]
            else:
                if len(tokens) < 2:
                    raise KBError("expected `property facet filler`", line.lineno)
                if tokens[1].lower() not in FACET_NAMES:
                    raise KBError(f"unknown facet {tokens[1]!r}", line.lineno)
                prop, facet, rest = head_tok, FACET_NAMES[tokens[1].lower()], tokens[2:]
        else:
            prop = head_tok
            if len(tokens) > 1 and tokens[1].lower() in FACET_NAMES:
                facet, rest = FACET_NAMES[tokens[1].lower()], tokens[2:]
            else:
                facet, rest = Facet.VALUE, tokens[1:]
        fillers = parse_fillers(rest, line.lineno)
        frame.slots.append(Slot(canonical_property(prop), facet, tuple(fillers)))
        if optional:
            # optionality is a pattern-language notion; flat frames reject it
            raise KBError("optional lines are only valid in sense/shape blocks", line.lineno)
        prev_prop = canonical_property(prop)
    return frame


def parse_kb(text: str):
    """Parse a document of flat blocks (concept/instance/script) to Frames.

    Sense and shape blocks use nested sub-formats owned by the lexicon and
    shape-registry readers; this parser rejects them so callers dispatch.
    """
    frames = []
    for block in split_blocks(text):
        if block.kind in ("sense", "shape"):
            raise KBError(
                f"{block.kind} blocks must be read by the {block.kind} reader", block.lineno
            )
        frames.append(frame_from_block(block))
    return frames


def serialize_frame(frame: Frame) -> str:
    name = str(frame.head)
    out = [f"{frame.kind} {name}"]
    prev_prop = None
    for slot in frame.slots:
        fillers = " ".join(render_filler(f) for f in slot.fillers)
        if frame.kind == "concept":
            if slot.prop == prev_prop:
                out.append(f"  {slot.facet} {fillers}")
            else:
                out.append(f"  {slot.prop} {slot.facet} {fillers}")
        else:
            if slot.facet is Facet.VALUE:
                out.append(f"  {slot.prop} {fillers}")
            else:
                out.append(f"  {slot.prop} {slot.facet} {fillers}")
        prev_prop = slot.prop
    return "\n".join(out) + "\n"


def serialize_kb(frames) -> str:
    return "\n".join(serialize_frame(f) for f in frames)


# ---------------------------------------------------------------------------
# Structural equality modulo local instance indices


def _frame_skeleton(frame: Frame):
    """Shape with local instance indices blanked, for candidate pairing."""

    def blank(f):
        if isinstance(f, InstanceRef):
            return ("inst", f.concept)
        return ("lit", str(f))

    return (
        frame.kind,
        blank(frame.head),
        tuple(
            (s.prop, s.facet.value, tuple(blank(f) for f in s.fillers)) for s in frame.slots
        ),
    )


def _apply_mapping_ok(a: Frame, b: Frame, mapping):
    """Extend mapping so a == b under it; return new mapping or None."""

    def unify(x, y, m):
        if isinstance(x, InstanceRef) and isinstance(y, InstanceRef):
            if x.concept != y.concept:
                return None
            key = (x.concept, x.index)
            if key in m:
                return m if m[key] == y.index else None
            if y.index in {v for (c, _), v in m.items() if c == x.concept}:
                return None  # keep it a bijection per concept
            m = dict(m)
            m[key] = y.index
            return m
        return m if x == y else None

    m = unify(a.head, b.head, mapping)
    if m is None or a.kind != b.kind or len(a.slots) != len(b.slots):
        return None
    for sa, sb in zip(a.slots, b.slots):
        if sa.prop != sb.prop or sa.facet != sb.facet or len(sa.fillers) != len(sb.fillers):
            return None
        for fa, fb in zip(sa.fillers, sb.fillers):
            m = unify(fa, fb, m)
            if m is None:
                return None
    return m


def _sorted_slots(frame: Frame) -> Frame:
    # slot order is presentation detail; comparison canonicalizes it (the
    # sort is stable, so multi-filler accumulation lines keep their order)
    out = Frame(frame.head, sorted(frame.slots, key=lambda s: (s.prop, s.facet.value)), frame.kind)
    return out


def frames_equal_modulo_indices(a, b, ignore_properties=()):
    """True iff a bijection on local instance indices makes the frame sets
    structurally identical. Anchors (#-indexed) must match exactly.

    Returns (verdict, mapping) where mapping is {(concept, index_a): index_b}.
    """
    a = [_sorted_slots(f.without(ignore_properties)) for f in a]
    b = [_sorted_slots(f.without(ignore_properties)) for f in b]
    if len(a) != len(b):
        return False, None

    def search(remaining_a, remaining_b, mapping):
        if not remaining_a:
            return mapping
        fa = remaining_a[0]
        skel = _frame_skeleton(fa)
        for i, fb in enumerate(remaining_b):
            if _frame_skeleton(fb) != skel:
                continue
            m2 = _apply_mapping_ok(fa, fb, mapping)
            if m2 is None:
                continue
            result = search(remaining_a[1:], remaining_b[:i] + remaining_b[i + 1 :], m2)
            if result is not None:
                return result
        return None

    mapping = search(list(a), list(b), {})
    if mapping is None:
        return False, None
    return True, mapping
