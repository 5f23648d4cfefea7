"""Construction-semantics lexicon: senses pair syntactic patterns with
ontologically grounded semantic templates."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .kr import (
    ConceptRef,
    KBError,
    MeaningOf,
    RawBlock,
    Variable,
    canonical_property,
    parse_fillers,
    split_blocks,
)

PATTERN_ROLES = {
    "subject",
    "v",
    "directobject",
    "indirectobject",
    "xcomp",
    "part",
    "pp",
    "prep",
    "obj",
    "det",
    "n",
    "aux",
    "wh-focus",
    "by-agent",
    "marker",
    "predicative",
}

_ID_RE = re.compile(r"^([a-z][a-z-]*?)-(v|n|adj|adv|prep|interrogpro)(\d+)$")


VERB_FORMS = {"base", "finite", "pastpart", "prespart"}


@dataclass(frozen=True)
class Constituent:
    role: str
    binding: object = None  # Variable | str literal | None
    optional: bool = False
    children: tuple = ()
    form: str | None = None  # verb-form requirement on the bound node

    def render(self, depth=0):
        pad = "  " * depth
        bind = "" if self.binding is None else f" {self.binding}"
        if self.form:
            bind += f" {self.form}"
        body = f"{self.role}{bind}"
        if self.optional:
            body = f"({body})"
        lines = [pad + body]
        for child in self.children:
            lines.extend(child.render(depth + 1))
        return lines


@dataclass(frozen=True)
class TemplateLine:
    prop: str
    fillers: tuple
    optional: bool = False


@dataclass(frozen=True)
class TemplateFrame:
    head: object  # ConceptRef | MeaningOf
    lines: tuple = ()


@dataclass(frozen=True)
class LexSense:
    id: str
    lemma: str
    pos: str
    number: int
    definition: str = ""
    example: str = ""
    syn_class: str = ""
    sem_shape: str = ""
    pattern: tuple = ()
    template: tuple = ()

    @property
    def head_concept(self):
        for frame in self.template:
            if isinstance(frame.head, ConceptRef):
                return frame.head.name
        return None

    def variables(self):
        out = []

        def walk(cons):
            for c in cons:
                if isinstance(c.binding, Variable):
                    out.append((c.binding.n, c))
                walk(c.children)

        walk(self.pattern)
        return out

    def anchor_literals(self):
        """Literal word bindings usable to anchor matching at a foreign head."""
        lits = []

        def walk(cons):
            for c in cons:
                if isinstance(c.binding, str) and c.role in ("wh-focus", "marker"):
                    lits.append(c.binding)
                walk(c.children)

        walk(self.pattern)
        return lits


def parse_sense_id(sense_id: str):
    m = _ID_RE.match(sense_id)
    if not m:
        raise KBError(f"sense id {sense_id!r} is not lemma-pos-number shaped")
    raw_lemma, pos, num = m.groups()
    return raw_lemma.replace("-", " "), pos, int(num)


def _parse_constituents(lines, start, depth):
    """Parse constituent lines at `depth`, recursing into deeper children."""
    out = []
    i = start
    while i < len(lines):
        line = lines[i]
        if line.indent < depth:
            break
        if line.indent > depth:
            raise KBError("unexpected indent in syn-struc", line.lineno)
        tokens = list(line.tokens)
        optional = False
        if tokens[0].startswith("(") and tokens[-1].endswith(")"):
            tokens[0] = tokens[0][1:]
            tokens[-1] = tokens[-1][:-1]
            tokens = [t for t in tokens if t]
            optional = True
        role = tokens[0]
        if role not in PATTERN_ROLES:
            raise KBError(f"unknown pattern role {role!r}", line.lineno)
        binding = None
        form = None
        rest = tokens[1:]
        if rest and rest[-1] in VERB_FORMS and len(rest) > 1:
            form = rest[-1]
            rest = rest[:-1]
        if rest:
            filler = parse_fillers(rest, line.lineno)
            if len(filler) != 1:
                raise KBError("constituent takes one binding", line.lineno)
            f = filler[0]
            binding = f if isinstance(f, Variable) else str(f)
        children, i = _parse_constituents(lines, i + 1, depth + 1)
        out.append(Constituent(role, binding, optional, tuple(children), form))
    return out, i


def _parse_template(lines, start, depth):
    frames = []
    i = start
    while i < len(lines):
        line = lines[i]
        if line.indent < depth:
            break
        if line.indent != depth:
            raise KBError("template frame head expected", line.lineno)
        head = parse_fillers(line.tokens, line.lineno)
        if len(head) != 1 or not isinstance(head[0], (ConceptRef, MeaningOf)):
            raise KBError("template frame head must be a concept or ^$var", line.lineno)
        i += 1
        tlines = []
        while i < len(lines) and lines[i].indent == depth + 1:
            tokens = list(lines[i].tokens)
            optional = False
            if tokens[0].startswith("(") and tokens[-1].endswith(")"):
                tokens[0] = tokens[0][1:]
                tokens[-1] = tokens[-1][:-1]
                tokens = [t for t in tokens if t]
                optional = True
            prop = canonical_property(tokens[0])
            fillers = parse_fillers(tokens[1:], lines[i].lineno)
            tlines.append(TemplateLine(prop, tuple(fillers), optional))
            i += 1
        frames.append(TemplateFrame(head[0], tuple(tlines)))
    return frames, i


def sense_from_block(block: RawBlock) -> LexSense:
    lemma, pos, number = parse_sense_id(block.name)
    fields = {"def": "", "ex": "", "syn-class": "", "sem-shape": ""}
    pattern = ()
    template = ()
    i = 0
    lines = block.lines
    while i < len(lines):
        line = lines[i]
        if line.indent != 1:
            raise KBError("sense fields sit at one indent level", line.lineno)
        key = line.tokens[0].lower()
        if key in fields:
            fields[key] = " ".join(line.tokens[1:])
            i += 1
        elif key == "syn-struc":
            pattern, i = _parse_constituents(lines, i + 1, 2)
            pattern = tuple(pattern)
        elif key == "sem-struc":
            template, i = _parse_template(lines, i + 1, 2)
            template = tuple(template)
        else:
            raise KBError(f"unknown sense field {key!r}", line.lineno)
    return LexSense(
        id=block.name,
        lemma=lemma,
        pos=pos,
        number=number,
        definition=fields["def"],
        example=fields["ex"],
        syn_class=fields["syn-class"],
        sem_shape=fields["sem-shape"],
        pattern=tuple(pattern),
        template=tuple(template),
    )


def serialize_sense(sense: LexSense) -> str:
    out = [f"sense {sense.id}"]
    if sense.definition:
        out.append(f"  def {sense.definition}")
    if sense.example:
        out.append(f"  ex {sense.example}")
    if sense.syn_class:
        out.append(f"  syn-class {sense.syn_class}")
    if sense.sem_shape:
        out.append(f"  sem-shape {sense.sem_shape}")
    if sense.pattern:
        out.append("  syn-struc")
        for c in sense.pattern:
            out.extend(c.render(2))
    if sense.template:
        out.append("  sem-struc")
        for frame in sense.template:
            out.append(f"    {frame.head}")
            for line in frame.lines:
                fillers = " ".join(str(f) for f in line.fillers)
                text = f"      {line.prop} {fillers}"
                if line.optional:
                    text = f"      ({line.prop} {fillers})"
                out.append(text)
    return "\n".join(out) + "\n"


class Lexicon:
    def __init__(self, senses):
        self.senses = {}
        for s in senses:
            if s.id in self.senses:
                raise KBError(f"duplicate sense {s.id}")
            self.senses[s.id] = s
        self._by_lemma_pos = {}
        for s in self.senses.values():
            self._by_lemma_pos.setdefault((s.lemma, s.pos), []).append(s)
        for bucket in self._by_lemma_pos.values():
            bucket.sort(key=lambda s: s.number)

    @classmethod
    def from_text(cls, text):
        senses = []
        for block in split_blocks(text):
            if block.kind != "sense":
                raise KBError(f"lexicon files hold sense blocks, got {block.kind}", block.lineno)
            senses.append(sense_from_block(block))
        return cls(senses)

    def serialize(self):
        return "\n".join(serialize_sense(s) for s in self.senses.values())

    def __iter__(self):
        return iter(self.senses.values())

    def __len__(self):
        return len(self.senses)

    def get(self, sense_id):
        return self.senses.get(sense_id)

    def lookup(self, lemma, pos):
        """All senses for lemma+pos in numeric order; [] for unknown words."""
        return list(self._by_lemma_pos.get((lemma.lower(), pos), []))

    def add_sense(self, sense: LexSense):
        """Install a sense learned on the fly (single-writer discipline is
        the caller's: the owning agent serializes lexicon growth)."""
        if sense.id in self.senses:
            raise KBError(f"duplicate sense {sense.id}")
        self.senses[sense.id] = sense
        bucket = self._by_lemma_pos.setdefault((sense.lemma, sense.pos), [])
        bucket.append(sense)
        bucket.sort(key=lambda s: s.number)

    def next_sense_id(self, lemma, pos):
        taken = {s.number for s in self.lookup(lemma, pos)}
        n = 1
        while n in taken:
            n += 1
        return f"{lemma.replace(' ', '-')}-{pos}{n}"

    def senses_by_syn_class(self, syn_class):
        return [s for s in self.senses.values() if s.syn_class == syn_class]

    def anchored_senses(self):
        """Senses that can match at a head other than their own lemma."""
        return [s for s in self.senses.values() if s.anchor_literals()]

    def senses_for_concept(self, concept, pos=None):
        order = {sid: i for i, sid in enumerate(self.senses)}
        out = [
            s
            for s in self.senses.values()
            if s.head_concept == concept and (pos is None or s.pos == pos)
        ]
        out.sort(key=lambda s: (len(s.pattern) == 0, s.pos, s.number, order[s.id]))
        return out

    # morph vocabulary hooks
    @property
    def verb_lemmas(self):
        return {s.lemma for s in self.senses.values() if s.pos == "v" and " " not in s.lemma}

    @property
    def noun_lemmas(self):
        return {s.lemma for s in self.senses.values() if s.pos == "n"}

    @property
    def adj_lemmas(self):
        return {s.lemma for s in self.senses.values() if s.pos == "adj"}

    @property
    def multiwords(self):
        return sorted({s.lemma for s in self.senses.values() if " " in s.lemma})

    def validate_sense(self, sense: LexSense, ontology=None):
        """Zone-alignment issues as data: unbound variables, missing or
        misplaced $var0, unknown concepts, malformed MODALITY frames."""
        issues = []
        declared = {}
        for n, cons in sense.variables():
            if n in declared:
                issues.append(f"{sense.id}: ${'var'}{n} bound twice in syn-struc")
            declared[n] = cons
        if sense.pattern:
            zero = declared.get(0)
            if zero is None:
                issues.append(f"{sense.id}: no constituent binds $var0")
            elif zero.role != "v":
                issues.append(f"{sense.id}: $var0 must sit on the head (role v)")
        used = set()
        for frame in sense.template:
            if isinstance(frame.head, MeaningOf):
                used.add(frame.head.n)
            for line in frame.lines:
                for f in line.fillers:
                    if isinstance(f, MeaningOf):
                        used.add(f.n)
            if isinstance(frame.head, ConceptRef) and frame.head.name == "MODALITY":
                props = {l.prop for l in frame.lines}
                if not {"SCOPE", "ATTRIBUTED-TO"} <= props:
                    issues.append(f"{sense.id}: MODALITY frame lacks SCOPE or ATTRIBUTED-TO")
                for line in frame.lines:
                    if line.prop == "VALUE":
                        try:
                            v = float(str(line.fillers[0]))
                        except ValueError:
                            v = -1
                        if not 0 <= v <= 1:
                            issues.append(f"{sense.id}: MODALITY VALUE outside [0,1]")
        for n in sorted(used - set(declared)):
            issues.append(f"{sense.id}: sem-struc references ^$var{n} with no $var{n}")
        if ontology is not None:
            for frame in sense.template:
                refs = []
                if isinstance(frame.head, ConceptRef):
                    refs.append(frame.head.name)
                for line in frame.lines:
                    refs.extend(f.name for f in line.fillers if isinstance(f, ConceptRef))
                for name in refs:
                    if name not in ontology:
                        issues.append(f"{sense.id}: unknown concept {name}")
        return issues

    def lint(self, ontology=None):
        issues = []
        for sense in self.senses.values():
            issues.extend(self.validate_sense(sense, ontology))
        # senses sharing a sem-shape label must share head-concept arity
        shapes = {}
        for sense in self.senses.values():
            if not sense.sem_shape or not sense.template:
                continue
            head = sense.template[0]
            arity = tuple(sorted(l.prop for l in head.lines if any(isinstance(f, MeaningOf) for f in l.fillers)))
            shapes.setdefault(sense.sem_shape, {}).setdefault(arity, []).append(sense.id)
        for label, arities in shapes.items():
            if len(arities) > 1:
                detail = "; ".join(f"{a}: {', '.join(ids)}" for a, ids in sorted(arities.items()))
                issues.append(f"sem-shape {label} used with differing role arity ({detail})")
        return issues
