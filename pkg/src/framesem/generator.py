"""Surface realization: registered shapes of meaning are matched against a
meaning representation (wrapper fit) and the first fit's recipe renders the
sentence over the lexicon, with inflection from the stored patterns."""

from __future__ import annotations

from dataclasses import dataclass

from . import morph
from .kr import (
    AnchorRef,
    InstanceRef,
    KBError,
    MeaningOf,
    RelationalExpr,
    Variable,
    parse_fillers,
    split_blocks,
)
from .semantics import MeaningRep
from .trace import NULL_TRACE


class GenerationError(KBError):
    pass


class NoShapeFits(GenerationError):
    def __init__(self, reasons):
        detail = "; ".join(f"{name}: {reason}" for name, reason in reasons)
        super().__init__(f"no shape fits ({detail})")
        self.reasons = reasons


@dataclass(frozen=True)
class PatternSlot:
    prop: str | None  # None for typed wildcards
    prop_type: str | None
    prop_var: str | None
    value: object  # Variable | Literal | ConceptRef
    optional: bool = False


@dataclass(frozen=True)
class PatternFrame:
    var: int
    concept: str
    slots: tuple


@dataclass(frozen=True)
class Constraint:
    kind: str  # not-equal
    left: int
    right: int
    reason: str


@dataclass(frozen=True)
class ShapeOfMeaning:
    name: str
    recipe: str
    frames: tuple
    constraints: tuple = ()

    @property
    def specificity(self):
        return sum(len(f.slots) for f in self.frames)


def _parse_pattern_frames(lines, start, depth):
    frames = []
    i = start
    while i < len(lines):
        line = lines[i]
        if line.indent < depth:
            break
        if line.indent != depth:
            raise KBError("pattern frame head expected", line.lineno)
        tokens = line.tokens
        if len(tokens) != 2 or not tokens[0].startswith("$var"):
            raise KBError("pattern frame heads read `$varN CONCEPT`", line.lineno)
        var = int(tokens[0][4:])
        concept = tokens[1].upper()
        i += 1
        slots = []
        while i < len(lines) and lines[i].indent == depth + 1:
            stoks = list(lines[i].tokens)
            optional = False
            if stoks[0].startswith("(") and stoks[-1].endswith(")"):
                stoks[0] = stoks[0][1:]
                stoks[-1] = stoks[-1][:-1]
                optional = True
            if stoks[0].startswith("?"):
                prop_var, prop_type, value_tok = stoks[0][1:], stoks[1].upper(), stoks[2]
                prop = None
            else:
                prop, prop_type, prop_var = stoks[0].upper(), None, None
                value_tok = stoks[1]
            value = parse_fillers([value_tok], lines[i].lineno)[0]
            slots.append(PatternSlot(prop, prop_type, prop_var, value, optional))
            i += 1
        frames.append(PatternFrame(var, concept, tuple(slots)))
    return frames, i


def shape_from_block(block):
    recipe = None
    frames = ()
    constraints = []
    i = 0
    lines = block.lines
    while i < len(lines):
        line = lines[i]
        key = line.tokens[0]
        if key == "recipe":
            recipe = line.tokens[1]
            i += 1
        elif key == "pattern":
            parsed, i = _parse_pattern_frames(lines, i + 1, 2)
            frames = tuple(parsed)
        elif key == "constraints":
            i += 1
            while i < len(lines) and lines[i].indent == 2:
                kind, left, right, reason = lines[i].tokens
                constraints.append(
                    Constraint(kind, int(left[4:]), int(right[4:]), reason)
                )
                i += 1
        else:
            raise KBError(f"unknown shape field {key!r}", line.lineno)
    if recipe is None or not frames:
        raise KBError(f"shape {block.name} needs a recipe and a pattern", block.lineno)
    return ShapeOfMeaning(block.name, recipe, frames, tuple(constraints))


class ShapeRegistry:
    def __init__(self, shapes):
        self.shapes = list(shapes)

    @classmethod
    def from_text(cls, text):
        shapes = []
        for block in split_blocks(text):
            if block.kind != "shape":
                raise KBError(f"shape files hold shape blocks, got {block.kind}")
            shapes.append(shape_from_block(block))
        return cls(shapes)

    def ordered(self):
        """Descending specificity; registration order breaks ties."""
        indexed = list(enumerate(self.shapes))
        indexed.sort(key=lambda pair: (-pair[1].specificity, pair[0]))
        return [s for _, s in indexed]


@dataclass
class Mismatch:
    reason: str


def _is_a(ontology, concept, ancestor):
    if ancestor == "ALL":
        return True
    if concept not in ontology or ancestor not in ontology:
        return False
    return ontology.is_a(concept, ancestor)


def _anchor_identity(mr, ref):
    frame = mr.frames.get(ref)
    if frame is not None:
        linked = frame.filler("episodic-mem")
        if linked is not None:
            return linked
    return ref


def wrapper_fit(shape: ShapeOfMeaning, mr: MeaningRep, ontology):
    """Bindings iff the MR's frames unify with the shape pattern under all
    constraints; a Mismatch with the first failure reason otherwise."""
    if not mr.frames:
        return Mismatch("no-head")

    def match_frame(pframe, ref, bindings):
        frame = mr.frames.get(ref)
        if frame is None:
            return None
        if not _is_a(ontology, ref.concept, pframe.concept):
            return None
        bindings = dict(bindings)
        prior = bindings.get(pframe.var)
        if prior is not None and prior != ref:
            return None
        if prior is None and any(
            v == ref for k, v in bindings.items() if isinstance(k, int)
        ):
            return None  # distinct pattern frames bind distinct MR frames
        bindings[pframe.var] = ref
        for slot in pframe.slots:
            matched = False
            for fslot in frame.slots:
                if slot.prop is not None:
                    if fslot.prop != slot.prop:
                        continue
                elif not _is_a(ontology, fslot.prop, slot.prop_type):
                    continue
                filler = fslot.fillers[0]
                if isinstance(slot.value, Variable):
                    current = bindings.get(slot.value.n)
                    if current is not None and current != filler:
                        continue
                    bindings[slot.value.n] = filler
                elif filler != slot.value:
                    continue
                if slot.prop_var is not None:
                    bindings[f"?{slot.prop_var}"] = fslot.prop
                matched = True
                break
            if not matched and not slot.optional:
                return None
        return bindings

    def search(frames, bindings):
        if not frames:
            return bindings
        pframe = frames[0]
        bound = bindings.get(pframe.var)
        candidates = [bound] if bound is not None else list(mr.frames)
        for ref in candidates:
            if not isinstance(ref, (InstanceRef, AnchorRef)):
                continue
            nxt = match_frame(pframe, ref, bindings)
            if nxt is None:
                continue
            result = search(frames[1:], nxt)
            if result is not None:
                return result
        return None

    head_bindings = match_frame(shape.frames[0], mr.head, {})
    if head_bindings is None:
        return Mismatch(f"head does not fit {shape.frames[0].concept}")
    bindings = search(list(shape.frames[1:]), head_bindings)
    if bindings is None:
        return Mismatch("pattern frames do not unify")
    for constraint in shape.constraints:
        left = bindings.get(constraint.left)
        right = bindings.get(constraint.right)
        if constraint.kind == "not-equal":
            if (
                left is not None
                and right is not None
                and _anchor_identity(mr, left) == _anchor_identity(mr, right)
            ):
                return Mismatch(constraint.reason)
    return bindings


# ---------------------------------------------------------------------------
# Realization helpers


class Realizer:
    def __init__(self, mr: MeaningRep, lexicon, ontology, memory=None):
        self.mr = mr
        self.lexicon = lexicon
        self.ontology = ontology
        self.memory = memory
        self.mentioned = set()

    # -- lexical selection ----------------------------------------------------

    def noun_sense(self, frame):
        concept = frame.head.concept
        best = None
        best_key = None
        for sense in self.lexicon.senses_for_concept(concept, pos="n"):
            tmpl_lines = sense.template[0].lines
            satisfied = 0
            ok = True
            for line in tmpl_lines:
                hit = any(
                    s.prop == line.prop and s.fillers == line.fillers for s in frame.slots
                )
                if hit:
                    satisfied += 1
                else:
                    ok = False
            key = (-satisfied, 0 if ok else 1, sense.number)
            if best is None or key < best_key:
                best, best_key = sense, key
        return best

    def verb_sense(self, concept):
        senses = [
            s
            for s in self.lexicon.senses_for_concept(concept, pos="v")
            if s.pattern
        ]
        senses.sort(key=lambda s: (len(s.pattern), s.number))
        if not senses:
            raise GenerationError(f"no verb sense realizes {concept}")
        return senses[0]

    def adjective_for(self, attr_concept, value):
        for sense in self.lexicon.senses_for_concept(attr_concept, pos="adj"):
            line = sense.template[0].lines[0]
            if line.prop == "RANGE" and line.fillers[0] == value:
                return sense.lemma
        raise GenerationError(f"no adjective realizes {attr_concept} {value}")

    def attribute_slots(self, frame):
        out = []
        for slot in frame.slots:
            if slot.prop in self.ontology and _is_a(self.ontology, slot.prop, "ATTRIBUTE"):
                out.append(slot)
        return out

    # -- features ---------------------------------------------------------------

    def is_self(self, frame):
        if self.memory is None or self.memory.self_anchor is None:
            return False
        ident = _anchor_identity(self.mr, frame.head)
        return ident == self.memory.self_anchor

    def is_addressee(self, frame):
        return (
            frame.head.concept == "HUMAN-OR-AGENT"
            and frame.filler("HAS-NAME") is None
        )

    def subject_features(self, frame):
        if self.is_self(frame):
            return {"person": 1, "number": "sg"}
        if str(frame.filler("NUMBER") or "") == "plural":
            return {"person": 3, "number": "pl"}
        return {"person": 3, "number": "sg"}

    def finite_form(self, frame, feats):
        time = frame.filler("TIME")
        past = isinstance(time, RelationalExpr) and time.op == "<"
        if past:
            return "pastpl" if feats.get("number") == "pl" else "past"
        if feats.get("person") == 1:
            return "pres1sg"
        if feats.get("number") == "pl":
            return "prespl"
        return "pres3sg"

    # -- NPs ----------------------------------------------------------------------

    def np(self, ref, case="obj", exclude_attr=None):
        frame = self.mr.frames.get(ref)
        if frame is None:
            raise GenerationError(f"no frame for {ref}")
        if ref in self.mentioned:
            return "it"
        self.mentioned.add(ref)
        if self.is_self(frame):
            return "I" if case == "subj" else "me"
        name = frame.filler("HAS-NAME")
        if name is not None:
            return str(name)
        sense = self.noun_sense(frame)
        if sense is None:
            return "it"  # selectional placeholders surface as pronouns
        noun = sense.lemma
        plural = str(frame.filler("NUMBER") or "") == "plural"
        if plural:
            noun = morph.noun_plural(noun)
        adjectives = []
        for slot in self.attribute_slots(frame):
            if exclude_attr is not None and slot is exclude_attr:
                continue
            adjectives.append(self.adjective_for(slot.prop, slot.fillers[0]))
        core = " ".join(adjectives + [noun])
        related = frame.filler("RELATED-TO")
        if isinstance(related, (InstanceRef, AnchorRef)):
            return f"{self.possessive(related)} {core}"
        anchored = isinstance(ref, AnchorRef) or frame.has("episodic-mem")
        status = str(frame.filler("DISCOURSE-STATUS") or "")
        if status == "new":  # an introduced referent stays indefinite
            if plural:
                return core
            return f"{morph.indefinite_article(core)} {core}"
        if anchored or status == "given":
            return f"the {core}"
        if plural:
            return core
        return f"{morph.indefinite_article(core)} {core}"

    def possessive(self, owner_ref):
        frame = self.mr.frames.get(owner_ref)
        name = str(frame.filler("HAS-NAME")) if frame is not None else ""
        gender = morph.NAMES.get(name.lower(), (None, "unknown"))[1]
        return {"m": "his", "f": "her"}.get(gender, "their")

    # -- clauses --------------------------------------------------------------------

    def copular_clause(self, ref, tense="auto", matrix_past=False):
        """Realize an attribute carrier as `NP be ADJ`."""
        frame = self.mr.frames[ref]
        if _is_a(self.ontology, ref.concept, "ATTRIBUTE"):
            # attribute-headed: DOMAIN is the subject, RANGE the value
            domain = frame.filler("DOMAIN")
            value = frame.filler("RANGE")
            if isinstance(domain, (InstanceRef, AnchorRef)):
                subject_text = self.np(domain, "subj")
                feats = self.subject_features(self.mr.frames[domain])
            else:
                sense = self.noun_sense(frame)
                if sense is None:
                    raise GenerationError(f"no noun realizes {ref.concept}")
                subject_text = f"the {sense.lemma}"
                feats = {"person": 3, "number": "sg"}
            adjective = self.adjective_for(ref.concept, value)
        else:
            attrs = self.attribute_slots(frame)
            if not attrs:
                raise GenerationError(f"{ref} carries no attribute to predicate")
            asserted = attrs[-1]
            subject_text = self.np(ref, "subj", exclude_attr=asserted)
            feats = self.subject_features(frame)
            adjective = self.adjective_for(asserted.prop, asserted.fillers[0])
        if tense == "auto":
            form = self.finite_form(frame, feats)
            if matrix_past:
                form = "pastpl" if feats.get("number") == "pl" else "past"
        else:
            form = tense
        be = morph.verb_form("be", form)
        return f"{subject_text} {be} {adjective}"

    def event_clause(self, ref, mode="finite", include_subject=True):
        """Realize an event frame through its verb sense's stored pattern."""
        frame = self.mr.frames[ref]
        sense = self.verb_sense(ref.concept)
        role_of_var = {}
        for line in sense.template[0].lines:
            for f in line.fillers:
                if isinstance(f, MeaningOf) and f.path is None:
                    role_of_var[f.n] = line.prop
        subject_var = next(
            (
                c.binding.n
                for c in sense.pattern
                if c.role == "subject" and isinstance(c.binding, Variable)
            ),
            None,
        )
        subject_ref = frame.filler(role_of_var.get(subject_var, "AGENT"))
        feats = (
            self.subject_features(self.mr.frames[subject_ref])
            if isinstance(subject_ref, (InstanceRef, AnchorRef))
            and subject_ref in self.mr.frames
            else {"person": 3, "number": "sg"}
        )
        words = []
        for cons in sense.pattern:
            if cons.role == "subject":
                if mode == "finite" and include_subject and subject_ref is not None:
                    words.append(self.np(subject_ref, "subj"))
            elif cons.role == "v":
                words.append(self.verb_words(frame, feats, mode))
            elif cons.role in ("directobject", "indirectobject"):
                var = cons.binding.n if isinstance(cons.binding, Variable) else None
                role = role_of_var.get(var)
                filler = frame.filler(role) if role else None
                if isinstance(filler, (InstanceRef, AnchorRef)):
                    words.append(self.np(filler))
                elif cons.optional:
                    continue
                elif filler is not None:
                    words.append(str(filler))
            elif cons.role == "part":
                words.append(str(cons.binding))
            elif cons.role == "pp":
                prep = next(c for c in cons.children if c.role == "prep")
                obj = next(c for c in cons.children if c.role == "obj")
                if isinstance(obj.binding, Variable):
                    role = role_of_var.get(obj.binding.n)
                    filler = frame.filler(role) if role else None
                    if filler is None:
                        if cons.optional:
                            continue
                        raise GenerationError(f"{sense.id}: unfilled {role}")
                    words.append(f"{prep.binding} {self.np(filler)}")
                elif obj.binding is not None:
                    words.append(f"{prep.binding} {obj.binding}")
                else:
                    literal_noun = next(
                        (c.binding for c in obj.children if c.role == "n"), None
                    )
                    det = next((c.binding for c in obj.children if c.role == "det"), None)
                    piece = " ".join(str(x) for x in (det, literal_noun) if x)
                    words.append(f"{prep.binding} {piece}")
        text = " ".join(w for w in words if w)
        text += self.adjuncts_text(frame, feats)
        return text

    def verb_words(self, frame, feats, mode):
        lemma = self.verb_sense(frame.head.concept).lemma
        if mode == "imperative" or mode == "infinitive":
            return morph.verb_form(lemma, "base")
        if mode == "gerund":
            return morph.verb_form(lemma, "prespart")
        progressive = str(frame.filler("ASPECT") or "") == "progressive"
        form = self.finite_form(frame, feats)
        if progressive:
            return f"{morph.verb_form('be', form)} {morph.verb_form(lemma, 'prespart')}"
        return morph.verb_form(lemma, form)

    def adjuncts_text(self, frame, feats):
        out = ""
        before = frame.filler("BEFORE")
        if isinstance(before, (InstanceRef, AnchorRef)):
            out += f" before {self.event_clause(before, mode='gerund', include_subject=False)}"
        until = frame.filler("UNTIL")
        if isinstance(until, (InstanceRef, AnchorRef)):
            out += f" until {self.copular_clause(until)}"
        conj = frame.filler("AND")
        if isinstance(conj, (InstanceRef, AnchorRef)):
            out += f" and {self.event_clause(conj, mode='finite', include_subject=False)}"
        return out

    def modal_clause(self, modality_ref, same_agent):
        frame = self.mr.frames[modality_ref]
        scope = frame.filler("SCOPE")
        attributed = frame.filler("ATTRIBUTED-TO")
        mtype = str(frame.filler("TYPE") or "")
        lemma = {"volitive": "want", "obligative": "need"}.get(mtype)
        if lemma is None:
            raise GenerationError(f"no modal verb for {mtype}")
        subj_frame = self.mr.frames.get(attributed)
        feats = self.subject_features(subj_frame) if subj_frame is not None else {}
        subject_text = self.np(attributed, "subj")
        verb = morph.verb_form(lemma, self.finite_form(frame, feats))
        scope_frame = self.mr.frames[scope]
        inner = self.event_clause(scope, mode="infinitive", include_subject=False)
        if same_agent:
            return f"{subject_text} {verb} to {inner}"
        agent = scope_frame.filler("AGENT")
        agent_text = self.np(agent)
        return f"{subject_text} {verb} {agent_text} to {inner}"


# ---------------------------------------------------------------------------
# Recipes


def _sentence(text):
    text = text.strip()
    return text[0].upper() + text[1:] + "."


def recipe_copular_attribute(mr, bindings, realizer):
    return _sentence(realizer.copular_clause(bindings[1]))


def recipe_attribute_copular(mr, bindings, realizer):
    return _sentence(realizer.copular_clause(bindings[1]))


def recipe_fact_clause(mr, bindings, realizer):
    event = bindings[1]
    attr = bindings[2]
    frame = mr.frames[event]
    time = frame.filler("TIME")
    past = isinstance(time, RelationalExpr) and time.op == "<"
    inner = realizer.copular_clause(attr, matrix_past=past)
    verb_sense = realizer.verb_sense(event.concept)
    verb = morph.verb_form(verb_sense.lemma, "past" if past else "pres3sg")
    experiencer = frame.filler("EXPERIENCER")
    obj = realizer.np(experiencer)
    return _sentence(f"The fact that {inner} {verb} {obj}")


def recipe_modal_other_agent(mr, bindings, realizer):
    return _sentence(realizer.modal_clause(bindings[1], same_agent=False))


def recipe_wh_theme_question(mr, bindings, realizer):
    event = bindings[3]
    frame = mr.frames[event]
    time = frame.filler("TIME")
    past = isinstance(time, RelationalExpr) and time.op == "<"
    verb_sense = realizer.verb_sense(event.concept)
    agent = frame.filler("AGENT")
    beneficiary = frame.filler("BENEFICIARY")
    if isinstance(agent, (InstanceRef, AnchorRef)):
        aux = "did" if past else "does"
        parts = [f"What {aux}", realizer.np(agent, "subj"), verb_sense.lemma]
        if isinstance(beneficiary, (InstanceRef, AnchorRef)):
            parts.append(realizer.np(beneficiary))
        return " ".join(parts) + "?"
    be = "was" if past else "is"
    parts = [f"What {be}"]
    if isinstance(beneficiary, (InstanceRef, AnchorRef)):
        parts.append(realizer.np(beneficiary, "subj"))
    parts.append(morph.verb_form(verb_sense.lemma, "pastpart"))
    return " ".join(parts) + "?"


def recipe_general_declarative(mr, bindings, realizer):
    head = bindings[1]
    frame = mr.frames[head]
    if head.concept == "MODALITY":
        return _sentence(realizer.modal_clause(head, same_agent=True))
    if head.concept in realizer.ontology and realizer.ontology.is_a(head.concept, "EVENT"):
        agent = frame.filler("AGENT")
        imperative = False
        if isinstance(agent, (InstanceRef, AnchorRef)) and agent in mr.frames:
            imperative = realizer.is_addressee(mr.frames[agent])
        if imperative:
            return _sentence(
                realizer.event_clause(head, mode="imperative", include_subject=False)
            )
        return _sentence(realizer.event_clause(head, mode="finite"))
    raise GenerationError("unsupported-head")


RECIPES = {
    "copular-attribute": recipe_copular_attribute,
    "attribute-copular": recipe_attribute_copular,
    "fact-clause": recipe_fact_clause,
    "modal-other-agent": recipe_modal_other_agent,
    "wh-theme-question": recipe_wh_theme_question,
    "general-declarative": recipe_general_declarative,
}


def apply_wrapper(shape: ShapeOfMeaning, mr, bindings, lexicon, ontology, memory=None):
    recipe = RECIPES.get(shape.recipe)
    if recipe is None:
        raise GenerationError(f"shape {shape.name} names unknown recipe {shape.recipe}")
    realizer = Realizer(mr, lexicon, ontology, memory)
    return recipe(mr, bindings, realizer)


def generate(mr: MeaningRep, registry, lexicon, ontology, memory=None, trace=NULL_TRACE):
    """Shapes are tried in descending specificity; the first fit is realized.
    Every mismatch reason is recorded in the trace."""
    reasons = []
    for shape in registry.ordered():
        fit = wrapper_fit(shape, mr, ontology)
        if isinstance(fit, Mismatch):
            reasons.append((shape.name, fit.reason))
            trace.add("generate", shape.name, f"mismatch: {fit.reason}")
            continue
        try:
            sentence = apply_wrapper(shape, mr, fit, lexicon, ontology, memory)
        except GenerationError as err:
            reasons.append((shape.name, str(err)))
            trace.add("generate", shape.name, f"recipe failed: {err}")
            continue
        trace.add("generate", shape.name, f"realized: {sentence}", cited=[shape.recipe])
        return sentence
    raise NoShapeFits(reasons)
