"""Learning ontological scripts from canonical instruction text: detect the
target, assemble ordered coreference-bound subevents, flag lacunae, clarify
with the teacher, and describe the result back."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import morph
from .kr import (
    AnchorRef,
    ConceptRef,
    Facet,
    Frame,
    InstanceRef,
    KBError,
    MeaningOf,
    Slot,
    Variable,
    parse_kb,
)
from .lexicon import Constituent, LexSense, TemplateFrame, TemplateLine
from .parser import ParseFailure
from .scripts import EITHER, FIRM, UNCERTAIN, ScriptFrame
from .semantics import AnalysisRejected, MeaningRep, analyze
from .trace import NULL_TRACE

ORDINALS = ("first", "then", "next", "finally")
EITHER_SUFFIX = re.compile(r"\s*,?\s*in either order\s*([.?!])\s*$", re.IGNORECASE)
_ORDINAL_RE = re.compile(r"^\s*(first|then|next|finally)\s*,?\s+", re.IGNORECASE)

MODULES = ("analyze", "detect", "clarify", "lacunae", "describe-back", "persist")

PARTICIPANT_ROLES = ("AGENT", "THEME", "BENEFICIARY", "SOURCE", "DESTINATION")


@dataclass
class Lacuna:
    kind: str  # missing-parent | ambiguous-order | unknown-term
    locus: object
    candidates: tuple = ()


@dataclass
class ReferentAmbiguity:
    pronoun: str
    candidates: tuple  # (display name, ref) pairs


@dataclass
class LearningTarget:
    head_concept: str
    head_ref: object
    theme_ref: object
    mr: MeaningRep
    prerequisite_ref: object = None


@dataclass
class LearningTrace:
    status: dict = field(default_factory=lambda: {m: "pending" for m in MODULES})
    difficulty: dict = field(default_factory=lambda: {m: "n/a" for m in MODULES})

    def mark(self, module, status):
        self.status[module] = status

    def render(self):
        lines = []
        for m in MODULES:
            lines.append(f"{m}: {self.status[m]} ({self.difficulty[m]})")
        return "\n".join(lines) + "\n"


@dataclass
class LearnResult:
    script: ScriptFrame | None
    learned: bool
    trace: LearningTrace
    questions: list  # (question, answer-or-None)
    open_lacunae: list
    describe_back: str | None = None


class ScriptedTeacher:
    """Answers drawn from a scenario file, in order; None when exhausted."""

    def __init__(self, answers):
        self.answers = list(answers)
        self.asked = []

    def ask(self, question):
        answer = self.answers.pop(0) if self.answers else None
        self.asked.append((question, answer))
        return answer


@dataclass
class Scenario:
    title: str
    text: str
    answers: list
    expected_lacunae: list
    difficulty: dict

    @classmethod
    def from_text(cls, text):
        frames = parse_kb(text)
        meta = next(
            (f for f in frames if f.kind == "instance" and f.head.concept == "SCENARIO"), None
        )
        if meta is None:
            raise KBError("scenario files need a SCENARIO instance block")
        sentences = []
        answers = []
        expected = []
        difficulty = {}
        title = str(meta.filler("TITLE") or "scenario")
        for slot in meta.slots:
            joined = " ".join(str(f) for f in slot.fillers)
            if slot.prop == "TEXT":
                sentences.append(joined)
            elif slot.prop == "ANSWER":
                answers.append(joined)
            elif slot.prop == "EXPECT-LACUNA":
                expected.append(joined)
            elif slot.prop == "DIFFICULTY":
                module, grade = joined.split()
                difficulty[module] = grade
        return cls(title, " ".join(sentences), answers, expected, difficulty)


# ---------------------------------------------------------------------------
# Segmentation: ordinal markers and the either-order marker are discourse
# devices, stripped before parsing.


@dataclass
class Segment:
    text: str
    ordinal: str | None
    either_order: bool


def segment_instructions(text):
    tokens = morph.tokenize(text)
    sentences = morph.split_sentences(tokens)
    segments = []
    for sent in sentences:
        raw = _detokenize(sent)
        either = bool(EITHER_SUFFIX.search(raw))
        raw = EITHER_SUFFIX.sub(r"\1", raw)
        m = _ORDINAL_RE.match(raw)
        ordinal = None
        if m:
            ordinal = m.group(1).lower()
            raw = raw[m.end() :]
            if raw and raw[0].islower():
                raw = raw[0].upper() + raw[1:]
        segments.append(Segment(raw, ordinal, either))
    return segments


def _detokenize(tokens):
    out = ""
    for t in tokens:
        surface = t.surface
        if surface in ".?!," or surface.startswith("'"):
            out += surface
        else:
            out += (" " if out else "") + surface
    return out


# ---------------------------------------------------------------------------
# Detection


def detect_learnable(mrs):
    """The target complex event when the canonical cue frame is present."""
    for mr in mrs:
        head = mr.frames[mr.head]
        if mr.head.concept == "TEACH-PROCEDURE":
            theme = head.filler("THEME")
            if theme is None:
                continue
            event_frame = mr.frames.get(theme)
            return LearningTarget(
                head_concept=theme.concept,
                head_ref=theme,
                theme_ref=event_frame.filler("THEME") if event_frame else None,
                mr=mr,
            )
        if mr.head.concept == "REQUIRE-EVENT":
            target = head.filler("THEME")
            prereq = head.filler("PREREQUISITE")
            if target is None:
                continue
            event_frame = mr.frames.get(target)
            return LearningTarget(
                head_concept=target.concept,
                head_ref=target,
                theme_ref=event_frame.filler("THEME") if event_frame else None,
                mr=mr,
                prerequisite_ref=prereq,
            )
    return None


# ---------------------------------------------------------------------------
# Assembly


class _Workspace:
    """Script-scoped anchors with participant coreference binding."""

    def __init__(self, ontology):
        self.ontology = ontology
        self.counters = {}
        self.frames = {}
        self.participants = []  # (anchor, concept, name) most recent last
        self.agent_anchor = None

    def mint(self, concept):
        n = self.counters.get(concept, 0) + 1
        self.counters[concept] = n
        ref = AnchorRef(concept, n)
        self.frames[ref] = Frame(ref, kind="instance")
        return ref

    def agent(self):
        if self.agent_anchor is None:
            self.agent_anchor = self.mint("HUMAN-OR-AGENT")
        return self.agent_anchor

    def _compatible(self, a, b):
        if a == b:
            return True
        if a in self.ontology and b in self.ontology:
            return self.ontology.is_a(a, b) or self.ontology.is_a(b, a)
        return False

    def bind_participant(self, mr, ref, role, last_theme=None):
        """Name identity, repeated definite NP, or pronoun agreement; type
        alone never merges."""
        frame = mr.frames[ref]
        meta = mr.meta.get(ref, {})
        name = frame.filler("HAS-NAME")
        status = str(frame.filler("DISCOURSE-STATUS") or "")
        if meta.get("addressee") or (ref.concept == "HUMAN-OR-AGENT" and name is None):
            return self.agent()
        if name is not None:
            for anchor, _, anchor_name in self.participants:
                if anchor_name == str(name):
                    return anchor
            anchor = self.mint(ref.concept)
            self.frames[anchor].add("HAS-NAME", Facet.VALUE, [name])
            self.participants.append((anchor, ref.concept, str(name)))
            return anchor
        if meta.get("pronoun"):
            candidates = []
            if last_theme is not None:
                candidates.append(last_theme)
            for anchor, concept, _ in reversed(self.participants):
                if anchor not in candidates and self._compatible(concept, ref.concept):
                    candidates.append(anchor)
            if not candidates:
                raise KBError(f"unresolvable pronoun {meta['pronoun']}")
            return candidates[0]
        if status == "given":
            for anchor, concept, _ in reversed(self.participants):
                if self._compatible(concept, ref.concept):
                    if self.ontology_is_more_specific(ref.concept, concept):
                        self._retype(anchor, ref.concept)
                    return anchor
        anchor = self.mint(ref.concept)
        for slot in frame.slots:
            if slot.prop in ("DISCOURSE-STATUS", "lex-map", "episodic-mem"):
                continue
            fillers = [f for f in slot.fillers if not isinstance(f, InstanceRef)]
            if fillers:
                self.frames[anchor].slots.append(Slot(slot.prop, slot.facet, tuple(fillers)))
        self.participants.append((anchor, ref.concept, None))
        return anchor

    def ontology_is_more_specific(self, a, b):
        return (
            a != b and a in self.ontology and b in self.ontology and self.ontology.is_a(a, b)
        )

    def _retype(self, anchor, concept):
        # keep the most specific concept seen for a merged participant
        index = next(i for i, (a, _, _) in enumerate(self.participants) if a == anchor)
        a, _, name = self.participants[index]
        self.participants[index] = (a, concept, name)

    def reify_condition(self, mr, ref):
        """Attribute carriers become ATTRIBUTE frames (DOMAIN, RANGE)."""
        frame = mr.frames[ref]
        if ref.concept in self.ontology and self.ontology.is_a(ref.concept, "ATTRIBUTE"):
            anchor = self.mint(ref.concept)
            for slot in frame.slots:
                if slot.prop in ("lex-map", "episodic-mem", "DISCOURSE-STATUS"):
                    continue
                fillers = []
                for f in slot.fillers:
                    if isinstance(f, InstanceRef):
                        fillers.append(self.bind_participant(mr, f, slot.prop))
                    else:
                        fillers.append(f)
                self.frames[anchor].slots.append(Slot(slot.prop, slot.facet, tuple(fillers)))
            return anchor
        attr_slots = [
            s
            for s in frame.slots
            if s.prop in self.ontology and self.ontology.is_a(s.prop, "ATTRIBUTE")
        ]
        if not attr_slots:
            return None
        asserted = attr_slots[-1]
        carrier = self.bind_participant(mr, ref, "DOMAIN")
        anchor = self.mint(asserted.prop)
        self.frames[anchor].add("DOMAIN", Facet.VALUE, [carrier])
        self.frames[anchor].add("RANGE", Facet.VALUE, list(asserted.fillers))
        return anchor


def _step_events(mr):
    """Subevent instances of one step MR, unwrapping modality and splitting
    coordination, in textual order."""
    head = mr.head
    frame = mr.frames[head]
    if head.concept == "MODALITY":
        scope = frame.filler("SCOPE")
        if scope is None:
            return []
        head = scope
        frame = mr.frames[head]
    events = [head]
    nxt = frame.filler("AND")
    while isinstance(nxt, InstanceRef):
        events.append(nxt)
        nxt = mr.frames[nxt].filler("AND")
    return events


def assemble_script(target: LearningTarget, steps, ontology, trace=NULL_TRACE):
    """steps: (Segment, MeaningRep) pairs for the non-cue sentences."""
    ws = _Workspace(ontology)
    lacunae = []
    name_theme = None
    agent = ws.agent()
    theme_anchor = None
    if target.theme_ref is not None:
        theme_anchor = ws.bind_participant(target.mr, target.theme_ref, "THEME")
        name_theme = target.theme_ref.concept
    caused_by = None
    effect = None
    parts = []
    pair_certainty = {}
    last_theme = None
    prev_last = None
    prev_ordinal_pending = None

    def add_event(mr, ref, sentence_pairing):
        nonlocal last_theme
        frame = mr.frames[ref]
        anchor = ws.mint(ref.concept)
        ws.frames[anchor].add("AGENT", Facet.VALUE, [agent])
        for slot in frame.slots:
            if slot.prop in ("lex-map", "episodic-mem", "AGENT", "AND", "TIME", "ASPECT"):
                continue
            fillers = []
            for f in slot.fillers:
                if isinstance(f, InstanceRef):
                    if slot.prop == "UNTIL":
                        condition = ws.reify_condition(mr, f)
                        if condition is not None:
                            fillers.append(condition)
                        continue
                    fillers.append(ws.bind_participant(mr, f, slot.prop, last_theme))
                else:
                    fillers.append(f)
            if fillers:
                ws.frames[anchor].slots.append(Slot(slot.prop, slot.facet, tuple(fillers)))
        theme = ws.frames[anchor].filler("THEME")
        if isinstance(theme, AnchorRef):
            last_theme = theme
        parts.append(anchor)
        return anchor

    if target.prerequisite_ref is not None:
        add_event(target.mr, target.prerequisite_ref, None)

    for segment, mr in steps:
        head_frame = mr.frames[mr.head]
        # an elaboration of the target event contributes conditions, not steps
        if mr.head.concept == target.head_concept:
            cb = head_frame.filler("CAUSED-BY")
            if isinstance(cb, InstanceRef):
                caused_by = ws.reify_condition(mr, cb)
            continue
        events = _step_events(mr)
        if not events:
            continue
        first_new = None
        for i, ref in enumerate(events):
            anchor = add_event(mr, ref, segment)
            if first_new is None:
                first_new = anchor
            if i > 0:
                pair = (parts[-2], parts[-1])
                if segment.either_order:
                    pair_certainty[pair] = EITHER
                else:
                    pair_certainty[pair] = UNCERTAIN
                    lacunae.append(Lacuna("ambiguous-order", pair))
        if prev_last is not None and first_new is not None:
            pair_certainty.setdefault((prev_last, first_new), FIRM)
        prev_last = parts[-1] if parts else None

    for anchor in parts:
        until = ws.frames[anchor].filler("UNTIL")
        if isinstance(until, AnchorRef):
            effect = until

    if not parts:
        raise KBError("no subevents recovered from the instruction text")

    script_name = target.head_concept
    if theme_anchor is not None:
        script_name = f"{target.head_concept}-{theme_anchor.concept}"
    is_a = None
    if target.head_concept in ontology:
        parent = ontology.parents(target.head_concept)
        is_a = parent[0] if parent else None
    script = ScriptFrame(
        name=script_name,
        is_a=is_a,
        agent=agent,
        theme=theme_anchor,
        parts=parts,
        caused_by=caused_by,
        effect=effect,
        pair_certainty=pair_certainty,
        frames=ws.frames,
    )
    if is_a is None:
        lacunae.append(Lacuna("missing-parent", script_name))
    trace.add(
        "lacunae",
        script_name,
        f"{len(lacunae)} lacuna(e)" if lacunae else "none",
        cited=[l.kind for l in lacunae],
    )
    return script, lacunae


# ---------------------------------------------------------------------------
# Clarification


def clarify(issue, realizer_factory=None, target=None):
    """Short disjunctive question for exactly two candidates; otherwise a
    paraphrase-and-confirm question."""
    if isinstance(issue, ReferentAmbiguity):
        if len(issue.candidates) == 2:
            a, b = issue.candidates
            return f"{a[0]} or {b[0]}?"
        options = ", ".join(name for name, _ in issue.candidates)
        return f"Which do you mean: {options}?"
    if issue.kind == "ambiguous-order":
        a, b = issue.locus
        da = _short_step(issue, a) if realizer_factory is None else realizer_factory(a)
        db = _short_step(issue, b) if realizer_factory is None else realizer_factory(b)
        return f"Should I {da} before {_gerundize(db)}, or in either order?"
    if issue.kind == "missing-parent":
        if target is not None:
            return f"What kind of event is {target}?"
        return f"What kind of event is {issue.locus}?"
    if issue.kind == "unknown-term":
        return f"I do not know the word {str(issue.locus)!r}. What kind of event is it?"
    raise KBError(f"cannot clarify {issue!r}")


def _short_step(issue, anchor):
    return str(anchor).lower()


def _gerundize(vp):
    words = vp.split()
    words[0] = morph.verb_form(words[0], "prespart")
    return " ".join(words)


def resolve_lacuna(script: ScriptFrame, lacuna: Lacuna, answer, ontology=None):
    """missing-parent installs IS-A; ambiguous-order sets pair certainty."""
    text = str(answer).strip()
    if lacuna.kind == "missing-parent":
        concept = text.upper().replace(" ", "-")
        if ontology is not None and concept not in ontology:
            raise KBError(f"answer {text!r} is not a known concept")
        script.is_a = concept
        return script
    if lacuna.kind == "ambiguous-order":
        low = text.lower()
        if "either" in low:
            script.pair_certainty[lacuna.locus] = EITHER
        elif "that order" in low or low in ("yes", "in order", "in that order"):
            script.pair_certainty[lacuna.locus] = FIRM
        else:
            raise KBError(f"answer {text!r} does not settle an ordering")
        return script
    raise KBError(f"answer incompatible with lacuna kind {lacuna.kind}")


def learn_sense_skeleton(word, answer_concept, sentence_text, lexicon, ontology):
    """New word senses on the fly: syn-class from the parse shape, template
    seeded from the answer's concept."""
    concept = str(answer_concept).upper().replace(" ", "-")
    if concept not in ontology:
        raise KBError(f"answer {answer_concept!r} is not a known concept")
    sense_id = lexicon.next_sense_id(word.lower(), "v")
    pattern = (
        Constituent("subject", Variable(1)),
        Constituent("v", Variable(0)),
        Constituent("directobject", Variable(2)),
    )
    template = (
        TemplateFrame(
            ConceptRef(concept),
            (
                TemplateLine("AGENT", (MeaningOf(1),)),
                TemplateLine("THEME", (MeaningOf(2),)),
            ),
        ),
    )
    sense = LexSense(
        id=sense_id,
        lemma=word.lower(),
        pos="v",
        number=int(sense_id.rsplit("v", 1)[1]),
        definition=f"learned on the fly from {sentence_text!r}",
        syn_class="v-trans",
        sem_shape="EVENT(AGENT,THEME)",
        pattern=pattern,
        template=template,
    )
    lexicon.add_sense(sense)
    return sense


# ---------------------------------------------------------------------------
# The full pipeline


MAX_QUESTIONS = 5


def learn(
    text,
    teacher,
    lexicon,
    ontology,
    registry=None,
    memory=None,
    difficulty=None,
    trace=NULL_TRACE,
):
    """analyze -> detect -> assemble -> clarify/resolve (bounded) -> optional
    describe-back; the result records each module's status."""
    ltrace = LearningTrace()
    if difficulty:
        ltrace.difficulty.update(difficulty)
    questions = []
    open_lacunae = []

    def ask(lacuna, question):
        if len(questions) >= MAX_QUESTIONS:
            return None
        answer = teacher.ask(question)
        questions.append((question, answer))
        trace.add("clarify", question, answer if answer is not None else "(no answer)")
        return answer

    segments = segment_instructions(text)
    analyzed = []
    for segment in segments:
        while True:
            try:
                readings = analyze(segment.text, lexicon, ontology, memory=None, trace=trace)
                analyzed.append((segment, readings[0]))
                break
            except ParseFailure as err:
                word = err.token.surface.lower() if err.token is not None else None
                if word is None:
                    ltrace.mark("analyze", "done")
                    return LearnResult(None, False, ltrace, questions, [str(err)])
                lacuna = Lacuna("unknown-term", word)
                answer = ask(lacuna, clarify(lacuna))
                if answer is None:
                    open_lacunae.append(lacuna)
                    ltrace.mark("analyze", "done")
                    ltrace.mark("clarify", "done")
                    return LearnResult(None, False, ltrace, questions, open_lacunae)
                try:
                    learn_sense_skeleton(word, answer, segment.text, lexicon, ontology)
                except KBError:
                    open_lacunae.append(lacuna)
                    ltrace.mark("analyze", "done")
                    ltrace.mark("clarify", "done")
                    return LearnResult(None, False, ltrace, questions, open_lacunae)
                trace.add("learn-word", word, f"new sense mapped to {answer}")
            except AnalysisRejected as err:
                ltrace.mark("analyze", "done")
                return LearnResult(None, False, ltrace, questions, [str(err)])
    ltrace.mark("analyze", "done")

    target = detect_learnable([mr for _, mr in analyzed])
    ltrace.mark("detect", "done")
    trace.add(
        "detect",
        segments[0].text if segments else "",
        f"target {target.head_concept}" if target else "no canonical cue",
    )
    if target is None:
        ltrace.mark("clarify", "skipped")
        ltrace.mark("lacunae", "skipped")
        ltrace.mark("describe-back", "skipped")
        ltrace.mark("persist", "skipped")
        return LearnResult(None, False, ltrace, questions, ["no canonical cue detected"])

    steps = [(seg, mr) for seg, mr in analyzed if mr is not target.mr]
    script, lacunae = assemble_script(target, steps, ontology, trace)
    ltrace.mark("lacunae", "done")

    asked_any = False
    for lacuna in lacunae:
        question = None
        if lacuna.kind == "ambiguous-order":
            a, b = lacuna.locus
            da = _step_phrase(script, a, lexicon, ontology)
            db = _step_phrase(script, b, lexicon, ontology)
            question = f"Should I {da} before {_gerundize(db)}, or in either order?"
        elif lacuna.kind == "missing-parent":
            question = clarify(lacuna, target=_target_phrase(target, lexicon))
        else:
            question = clarify(lacuna)
        answer = ask(lacuna, question)
        asked_any = True
        if answer is None:
            open_lacunae.append(lacuna)
            continue
        try:
            resolve_lacuna(script, lacuna, answer, ontology)
        except KBError:
            open_lacunae.append(lacuna)
    ltrace.mark("clarify", "done" if asked_any else "skipped")

    mandatory_open = [l for l in open_lacunae if l.kind in ("missing-parent", "unknown-term")]
    if mandatory_open:
        ltrace.mark("describe-back", "skipped")
        ltrace.mark("persist", "skipped")
        return LearnResult(script, False, ltrace, questions, open_lacunae)

    description = None
    if registry is not None:
        description = describe_back(script, lexicon, ontology, registry)
        ltrace.mark("describe-back", "done")
    else:
        ltrace.mark("describe-back", "skipped")

    base = script.name
    suffix = 2
    while script.name in ontology:  # collisions pick up numeric suffixes
        script.name = f"{base}-{suffix}"
        suffix += 1
    persist_script(script, ontology)
    ltrace.mark("persist", "done")
    trace.add("persist", script.name, f"installed under {script.is_a}")
    return LearnResult(script, True, ltrace, questions, open_lacunae, description)


def _target_phrase(target: LearningTarget, lexicon):
    verb_senses = lexicon.senses_for_concept(target.head_concept, pos="v")
    verb = verb_senses[0].lemma if verb_senses else target.head_concept.lower()
    phrase = morph.verb_form(verb, "prespart")
    if target.theme_ref is not None:
        frame = target.mr.frames.get(target.theme_ref)
        noun_senses = lexicon.senses_for_concept(target.theme_ref.concept, pos="n")
        if noun_senses:
            noun = noun_senses[0].lemma
            if str(frame.filler("NUMBER") or "") == "plural":
                noun = morph.noun_plural(noun)
            phrase += f" {noun}"
    return phrase


def _step_phrase(script: ScriptFrame, anchor, lexicon, ontology):
    """Short verb + theme rendering of one subevent, for questions."""
    from .generator import Realizer

    adapter = MeaningRep(frames=dict(script.frames), head=anchor)
    realizer = Realizer(adapter, lexicon, ontology)
    sense = realizer.verb_sense(anchor.concept)
    words = [sense.lemma]
    theme = script.frames[anchor].filler("THEME")
    if isinstance(theme, AnchorRef):
        words.append(realizer.np(theme))
    return " ".join(words)


def persist_script(script: ScriptFrame, ontology):
    frame = Frame(ConceptRef(script.name), kind="concept")
    frame.add("IS-A", Facet.VALUE, [ConceptRef(script.is_a)])
    ontology.install(frame)


# ---------------------------------------------------------------------------
# Describing back


def describe_back(script: ScriptFrame, lexicon, ontology, registry, memory=None):
    """Enumerated steps a teacher can check, parseable for re-learning."""
    from .generator import Realizer

    name_verb = script.name
    if script.theme is not None and script.name.endswith("-" + script.theme.concept):
        name_verb = script.name[: -len(script.theme.concept) - 1]
    verb_senses = lexicon.senses_for_concept(name_verb, pos="v")
    verb = verb_senses[0].lemma if verb_senses else name_verb.lower()

    adapter = MeaningRep(frames=dict(script.frames), head=script.parts[0])

    def fresh_realizer():
        return Realizer(adapter, lexicon, ontology, memory)

    theme_np_indef = None
    theme_np_def = None
    if script.theme is not None:
        theme_frame = script.frames[script.theme]
        sense = fresh_realizer().noun_sense(theme_frame)
        noun = sense.lemma if sense else script.theme.concept.lower()
        if str(theme_frame.filler("NUMBER") or "") == "plural":
            noun = morph.noun_plural(noun)
            theme_np_indef = noun
        else:
            theme_np_indef = f"{morph.indefinite_article(noun)} {noun}"
        theme_np_def = f"the {noun}"

    sentences = []
    cue = f"Here's how you {verb}"
    if theme_np_indef:
        cue += f" {theme_np_indef}"
    sentences.append(cue + ".")

    if script.caused_by is not None:
        condition = fresh_realizer().copular_clause(script.caused_by)
        because = f"You {verb}"
        if theme_np_def:
            because += f" {theme_np_def}"
        sentences.append(f"{because} because {condition}.")

    def step_sentence(anchor):
        realizer = fresh_realizer()
        return realizer.event_clause(anchor, mode="imperative", include_subject=False)

    if len(script.parts) == 1:
        body = step_sentence(script.parts[0])
        prefix = f"You {verb}"
        if theme_np_def:
            prefix += f" {theme_np_def}"
        return " ".join(sentences) + f" {prefix} as follows: {_cap(body)}."

    i = 0
    step_lines = []
    while i < len(script.parts):
        group = [script.parts[i]]
        while i + 1 < len(script.parts):
            pair = (script.parts[i], script.parts[i + 1])
            if script.certainty(*pair) in (EITHER, UNCERTAIN):
                group.append(script.parts[i + 1])
                i += 1
            else:
                break
        body = " and ".join(step_sentence(p) for p in group)
        pairwise = [
            script.certainty(a, b) for a, b in zip(group, group[1:])
        ]
        suffix = ", in either order" if any(c == EITHER for c in pairwise) else ""
        if not step_lines:
            marker = "First, "
        elif i + 1 >= len(script.parts):
            marker = "Finally, "
        else:
            marker = "Then "
        step_lines.append(f"{marker}{body}{suffix}.")
        i += 1
    sentences.extend(step_lines)
    return " ".join(sentences)


def _cap(text):
    return text[0].upper() + text[1:] if text else text
