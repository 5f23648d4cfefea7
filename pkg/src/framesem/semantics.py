"""Composition of meaning representations from candidate bindings, with
ontological scoring, modality scoping, time/aspect, and intra-sentence
coreference."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from . import morph
from .kr import (
    ConceptRef,
    Facet,
    Frame,
    InstanceRef,
    KBError,
    Literal,
    MeaningOf,
    RelationalExpr,
    Slot,
    canonical_property,
)
from .matcher import CandidateBinding, clause_heads, enumerate_candidates
from .ontology import ConceptStore, Verdict
from .parser import parse
from .trace import NULL_TRACE

CASE_ROLES = (
    "AGENT",
    "THEME",
    "BENEFICIARY",
    "EXPERIENCER",
    "SOURCE",
    "DESTINATION",
    "INSTRUMENT",
    "LOCATION",
    "CAUSED-BY",
)

PREP_RELATIONS = {"before": "BEFORE", "until": "UNTIL", "because": "CAUSED-BY", "after": "AFTER"}

ANCHOR_TIME_ROUTINE = "find-anchor-time"

# procedural-semantics registry; analysis stores calls unevaluated and other
# modules evaluate on demand
ROUTINES = {}


def routine(name):
    def register(fn):
        ROUTINES[name] = fn
        return fn

    return register


@routine(ANCHOR_TIME_ROUTINE)
def find_anchor_time(context=None):
    """Symbolic speech-time anchor; evaluation stays on demand."""
    return Literal("speech-time")


class CompositionError(KBError):
    pass


class AnalysisRejected(KBError):
    def __init__(self, message, diagnosis=None, unknown_words=()):
        super().__init__(message)
        self.diagnosis = diagnosis
        self.unknown_words = tuple(unknown_words)


@dataclass
class AnalysisScore:
    verdicts: tuple  # ((instance str, role, verdict value), ...)
    aggregate: float
    reject: bool


@dataclass
class CorefRecord:
    kept: InstanceRef
    removed: InstanceRef
    confidence: float


@dataclass
class MeaningRep:
    frames: dict  # InstanceRef -> Frame, insertion ordered, head first
    head: InstanceRef
    selection: tuple = ()  # ((node idx, sense id, chain), ...)
    score: float = 0.0
    transformations: int = 0
    rejected: bool = False
    verdicts: tuple = ()
    precedent: bool = False
    coref: tuple = ()
    meta: dict = field(default_factory=dict)  # instance -> {"pronoun": ..., "untyped": ...}

    def frame(self, ref) -> Frame:
        return self.frames[ref]

    def frame_list(self):
        return list(self.frames.values())

    @property
    def sense_ids(self):
        return tuple(s for _, s, _ in self.selection)

    def instances_of(self, concept):
        return [ref for ref in self.frames if ref.concept == concept]

    def serialize(self):
        from .kr import serialize_kb

        return serialize_kb(self.frame_list())

    def closure_issues(self):
        """Instance fillers without frames; dangling SCOPE/ATTRIBUTED-TO."""
        issues = []
        for ref, frame in self.frames.items():
            for slot in frame.slots:
                for f in slot.fillers:
                    if isinstance(f, InstanceRef) and f not in self.frames:
                        issues.append(f"{ref}: {slot.prop} filler {f} has no frame")
        return issues


def parse_mr_text(text) -> MeaningRep:
    """Read an MR file: instance blocks, proposition head first."""
    from .kr import parse_kb

    frames = [f for f in parse_kb(text) if f.kind == "instance"]
    if not frames:
        raise KBError("no instance blocks in MR text")
    table = {}
    for f in frames:
        table[f.head] = f
    return MeaningRep(frames=table, head=frames[0].head)


class Composer:
    """Instantiates sem-struc templates over one tree + binding selection."""

    def __init__(self, tree, selection, lexicon, ontology, trace=NULL_TRACE):
        self.tree = tree
        self.selection = dict(selection)  # head idx -> CandidateBinding
        self.lexicon = lexicon
        self.ontology = ontology
        self.trace = trace
        self.counters = {}
        self.frames = {}  # InstanceRef -> Frame
        self.meta = {}
        self.node_instance = {}
        self.clause_frames = {}  # head idx -> [InstanceRef] in template order
        self.tense_targets = {}  # head idx -> InstanceRef carrying TIME/ASPECT
        self.pending_control = []  # (frame ref, prop, head idx, kind)
        self.generic_agent = None

    # -- bookkeeping -------------------------------------------------------

    def mint(self, concept) -> InstanceRef:
        n = self.counters.get(concept, 0) + 1
        self.counters[concept] = n
        ref = InstanceRef(concept, n)
        self.frames[ref] = Frame(ref, kind="instance")
        return ref

    def add_slot(self, ref, prop, filler, facet=Facet.VALUE):
        fillers = filler if isinstance(filler, (list, tuple)) else [filler]
        self.frames[ref].slots.append(Slot(canonical_property(prop), facet, tuple(fillers)))

    def has_slot(self, ref, prop):
        return self.frames[ref].has(prop)

    # -- NP meanings ---------------------------------------------------------

    def np_meaning(self, idx) -> InstanceRef:
        if idx in self.node_instance:
            return self.node_instance[idx]
        node = self.tree.node(idx)
        a = node.analysis
        if a.pos == "v":
            ref = self.clause_instance(idx)
            self.node_instance[idx] = ref
            return ref
        if a.pos == "name":
            concept, _ = morph.NAMES[a.lemma.lower()]
            ref = self.mint(concept)
            self.add_slot(ref, "HAS-NAME", Literal(a.lemma))
        elif a.pos == "pron":
            person, _, gender, concept = morph.PRONOUNS[a.lemma.lower()]
            if concept is None:
                ref = self.mint("OBJECT")
                self.meta.setdefault(ref, {})["untyped"] = True
            else:
                ref = self.mint(concept)
            self.meta.setdefault(ref, {})["pronoun"] = a.lemma.lower()
            self.meta[ref]["gender"] = gender
            self.meta[ref]["person"] = person
            if person == 3:
                self.add_slot(ref, "DISCOURSE-STATUS", Literal("given"))
        elif a.pos == "wh":
            ref = self.mint("OBJECT")
            self.meta.setdefault(ref, {})["untyped"] = True
            self.meta[ref]["wh"] = True
        elif a.pos in ("n", "unknown"):
            senses = self.lexicon.lookup(a.lemma, "n")
            if not senses:
                raise CompositionError(f"no noun sense for {a.lemma!r}")
            sense = senses[0]
            head_frame = sense.template[0]
            ref = self.mint(head_frame.head.name)
            for line in head_frame.lines:
                self.add_slot(ref, line.prop, list(line.fillers))
            det = self.tree.dependent(idx, "det")
            if a.number == "pl":
                self.add_slot(ref, "NUMBER", Literal("plural"))
            for _, adj in self.tree.dependents(idx, "mod"):
                attr_concept, attr_value = self.adjective_meaning(adj)
                self.add_slot(ref, attr_concept, attr_value)
            status = None
            if det is not None:
                det_node = self.tree.node(det)
                if det_node.pos == "det":
                    status = "given" if det_node.lemma == "the" else "new"
                elif det_node.pos == "poss":
                    status = "given"
                    self.meta.setdefault(ref, {})["possessive"] = det
            else:
                status = "new"  # bare NPs introduce referents
            if status:
                self.add_slot(ref, "DISCOURSE-STATUS", Literal(status))
        else:
            raise CompositionError(f"cannot build a meaning for {a.lemma!r} ({a.pos})")
        self.node_instance[idx] = ref
        return ref

    def adjective_meaning(self, idx):
        node = self.tree.node(idx)
        senses = self.lexicon.lookup(node.lemma, "adj")
        if not senses:
            raise CompositionError(f"no adjective sense for {node.lemma!r}")
        frame = senses[0].template[0]
        value = frame.lines[0].fillers[0]
        return frame.head.name, value

    # -- clause instantiation ------------------------------------------------

    def clause_instance(self, head) -> InstanceRef:
        if head in self.clause_frames:
            return self.clause_frames[head][0]
        binding = self.selection.get(head)
        if binding is None:
            raise CompositionError(f"no binding selected at head {head}")
        sense = self.lexicon.get(binding.sense_id)
        refs = []
        self.clause_frames[head] = refs  # placeholder filled in order
        controlled = dict(binding.controlled)
        var0_ref = None

        def meaning_of(n):
            nonlocal var0_ref
            node_idx = binding.var(n)
            if node_idx is None:
                return None
            if node_idx == head:
                if head in self.node_instance:
                    return self.node_instance[head]
                # the construction consumed its own verb: its meaning is the
                # bare event of the verb's primary verbal sense
                verb_senses = self.lexicon.lookup(self.tree.node(head).lemma, "v")
                with_concept = [s for s in verb_senses if s.head_concept]
                if not with_concept:
                    raise CompositionError(
                        f"no event sense for {self.tree.node(head).lemma!r}"
                    )
                vs = with_concept[0]
                ref = self.mint(vs.head_concept)
                self.add_slot(ref, "lex-map", Literal(vs.id))
                self.node_instance[head] = ref
                refs.append(ref)
                var0_ref = ref
                return ref
            return self.np_meaning(node_idx)

        first = None
        for tframe in sense.template:
            if isinstance(tframe.head, ConceptRef):
                ref = self.mint(tframe.head.name)
                self.add_slot(ref, "lex-map", Literal(sense.id))
                refs.append(ref)
            else:
                ref = meaning_of(tframe.head.n)
                if ref is None:
                    continue
            if first is None:
                first = ref
            for line in tframe.lines:
                if line.prop == "ATTR":
                    adj_filler = line.fillers[0]
                    adj_node = binding.var(adj_filler.n)
                    if adj_node is None:
                        raise CompositionError(f"{sense.id}: unbound predicative")
                    attr_concept, value = self.adjective_meaning(adj_node)
                    if ref.concept == attr_concept:
                        self.add_slot(ref, "RANGE", value)
                    else:
                        self.add_slot(ref, attr_concept, value)
                    continue
                fillers = []
                skip = False
                for f in line.fillers:
                    if isinstance(f, MeaningOf):
                        if f.path is not None:
                            target = meaning_of(f.n)
                            if target is None:
                                skip = True
                                break
                            fillers.append(self.path_meaning(target, f.path))
                        elif binding.var(f.n) is not None:
                            fillers.append(meaning_of(f.n))
                        elif f.n in controlled:
                            self.pending_control.append(
                                (ref, line.prop, head, controlled[f.n])
                            )
                            skip = True
                            break
                        elif line.optional:
                            skip = True
                            break
                        else:
                            raise CompositionError(
                                f"{sense.id}: unresolved variable $var{f.n}"
                            )
                    else:
                        fillers.append(f)
                if not skip and fillers:
                    self.add_slot(ref, line.prop, fillers)
        if first is None:
            raise CompositionError(f"{sense.id}: template produced no frames")
        self.tense_targets[head] = var0_ref or first
        # wh movement carries a request-for-information wrapper along
        if binding.wh_var is not None:
            wh_node = binding.var(binding.wh_var)
            target = self.np_meaning(wh_node) if wh_node is not None else None
            wrap = self.mint("REQUEST-INFO-WHAT-THEME")
            self.add_slot(wrap, "lex-map", Literal(sense.id))
            if target is not None:
                self.add_slot(wrap, "THEME", target)
            if first in refs:
                refs.remove(first)
            refs.insert(0, first)
            refs.insert(0, wrap)
            first = wrap
        if not refs:
            refs.append(first)
        elif refs[0] != first:
            if first in refs:
                refs.remove(first)
            refs.insert(0, first)
        return refs[0]

    def path_meaning(self, ref, prop):
        """^$varN.PROP: the PROP filler of the frame, minted when absent."""
        existing = self.frames[ref].filler(prop)
        if existing is not None:
            return existing
        placeholder = self.mint("OBJECT")
        self.meta.setdefault(placeholder, {})["untyped"] = True
        self.add_slot(ref, prop, placeholder)
        return placeholder

    # -- passes ---------------------------------------------------------------

    def event_frame_of(self, head) -> InstanceRef | None:
        for ref in self.clause_frames.get(head, []):
            try:
                if self.ontology.is_a(ref.concept, "EVENT"):
                    return ref
            except KBError:
                return ref  # concepts not yet in the ontology still carry events
        refs = self.clause_frames.get(head, [])
        return refs[0] if refs else None

    def agent_of_clause(self, head):
        for ref in self.clause_frames.get(head, []):
            filler = self.frames[ref].filler("AGENT") or self.frames[ref].filler(
                "ATTRIBUTED-TO"
            )
            if isinstance(filler, InstanceRef):
                return filler
        return None

    def governing_controller(self, head):
        node = head
        while True:
            link = self.tree.head_of(node)
            if link is None:
                for h, label, d in self.tree.edges:
                    if label == "conj" and d == node:
                        link = (h, "conj")
                        break
            if link is None:
                return None
            parent, _ = link
            if parent in self.clause_frames:
                agent = self.agent_of_clause(parent)
                if agent is not None:
                    return agent
            node = parent

    def resolve_control(self):
        for ref, prop, head, kind in self.pending_control:
            if self.has_slot(ref, prop):
                continue  # an explicit template line already routed control
            controller = self.governing_controller(head)
            if controller is None:
                if self.generic_agent is None:
                    self.generic_agent = self.mint("HUMAN-OR-AGENT")
                    self.meta.setdefault(self.generic_agent, {})["addressee"] = True
                controller = self.generic_agent
            self.add_slot(ref, prop, controller)

    def resolve_possessives(self):
        for ref, info in list(self.meta.items()):
            if "possessive" not in info:
                continue
            det_idx = info["possessive"]
            owner = None
            noun_idx = self.tree.head_of(det_idx)[0]
            controller = self.governing_controller(noun_idx)
            if controller is not None and controller != ref:
                owner = controller
            if owner is None:
                gender = self.tree.node(det_idx).analysis.gender
                owner = self.mint("HUMAN")
                self.meta.setdefault(owner, {})["gender"] = gender
            self.add_slot(ref, "RELATED-TO", owner)

    def tense_aspect(self):
        for head in self.clause_frames:
            node = self.tree.node(head)
            aux = self.tree.dependent(head, "aux")
            tense = node.analysis.tense
            if aux is not None:
                tense = self.tree.node(aux).analysis.tense or tense
            target = self.tense_targets.get(head) or self.clause_frames[head][0]
            if tense == "past" and not self.has_slot(target, "TIME"):
                self.add_slot(target, "TIME", RelationalExpr("<", ANCHOR_TIME_ROUTINE))
            if (
                aux is not None
                and self.tree.node(aux).lemma == "be"
                and node.analysis.participle == "present"
                and not self.has_slot(target, "ASPECT")
            ):
                self.add_slot(target, "ASPECT", Literal("progressive"))

    def adjuncts(self):
        for head in list(self.clause_frames):
            event = self.event_frame_of(head)
            if event is None:
                continue
            for _, prep_idx in self.tree.dependents(head, "pp"):
                prep = self.tree.node(prep_idx).lemma
                prop = PREP_RELATIONS.get(prep)
                if prop is None:
                    self.trace.add(
                        "compose", f"pp {prep}", "skipped adjunct without relation", cited=[]
                    )
                    continue
                obj_idx = self.tree.dependent(prep_idx, "obj")
                if obj_idx is None:
                    continue
                filler = self.np_meaning(obj_idx)
                self.add_slot(event, prop, filler)

    def coordination(self):
        for h, label, d in self.tree.edges:
            if label != "conj":
                continue
            if h in self.clause_frames and d in self.clause_frames:
                first = self.event_frame_of(h)
                second = self.event_frame_of(d)
                if first is not None and second is not None:
                    self.add_slot(first, "AND", second)


def _order_frames(composer, head_ref):
    ordered = {}
    if head_ref in composer.frames:
        ordered[head_ref] = composer.frames[head_ref]
    for ref, frame in composer.frames.items():
        if ref not in ordered:
            ordered[ref] = frame
    return ordered


def compose_mr(tree, selection, lexicon, ontology, trace=NULL_TRACE) -> MeaningRep:
    """Instantiate templates for one binding per clause head and run the
    control/possessive/tense/adjunct/coordination passes."""
    composer = Composer(tree, selection, lexicon, ontology, trace)
    root_head = tree.root
    for head in sorted(composer.selection):
        composer.clause_instance(head)
    composer.resolve_control()
    composer.resolve_possessives()
    composer.tense_aspect()
    composer.adjuncts()
    composer.coordination()
    head_ref = composer.clause_frames[root_head][0]
    mr = MeaningRep(
        frames=_order_frames(composer, head_ref),
        head=head_ref,
        selection=tuple(
            (h, b.sense_id, b.chain) for h, b in sorted(composer.selection.items())
        ),
        transformations=sum(len(b.chain) for b in composer.selection.values()),
        meta=composer.meta,
    )
    mr.meta["_node_instance"] = dict(composer.node_instance)
    return mr


# ---------------------------------------------------------------------------
# Scoring


def score_mr(mr: MeaningRep, ontology: ConceptStore) -> AnalysisScore:
    """Grade every case-role slot against the ontology; any violation on a
    non-relaxable role rejects the reading."""
    verdicts = []
    aggregate = 0.0
    reject = False
    for ref, frame in mr.frames.items():
        if ref.concept not in ontology:
            continue
        eff = ontology.effective_frame(ref.concept)
        constrained = {s.prop for s in eff.slots}
        for slot in frame.slots:
            if slot.prop not in CASE_ROLES or slot.prop not in constrained:
                continue
            for filler in slot.fillers:
                if not isinstance(filler, InstanceRef):
                    continue
                if mr.meta.get(filler, {}).get("untyped"):
                    continue  # pronouns constrain by selectional fit instead
                if filler.concept not in ontology:
                    continue  # concepts still to be learned cannot be graded
                cv = ontology.check_filler(ref.concept, slot.prop, filler.concept)
                verdicts.append((str(ref), slot.prop, cv.verdict.value))
                if cv.verdict is Verdict.VIOLATION:
                    reject = True
                else:
                    aggregate += cv.weight
    return AnalysisScore(tuple(verdicts), aggregate, reject)


def score_binding(binding: CandidateBinding, tree, lexicon, ontology) -> AnalysisScore:
    """Score one candidate binding in isolation (single-clause view)."""
    from .matcher import match_sense

    selection = {binding.var(0): binding}
    for head in clause_heads(tree):
        if head not in selection:
            cands = [
                c
                for s in lexicon.lookup(tree.node(head).lemma, "v")
                for c in match_sense(s, tree, head)
            ]
            if cands:
                selection[head] = cands[0]
    mr = compose_mr(tree, selection, lexicon, ontology)
    return score_mr(mr, ontology)


# ---------------------------------------------------------------------------
# Intra-sentence coreference (coordinated direct objects)


def _features_of(tree, idx):
    a = tree.node(idx).analysis
    return {"number": a.number or "sg", "person": a.person or 3, "gender": a.gender}


def _agree(fa, fb):
    for key in ("number", "person"):
        if fa.get(key) and fb.get(key) and fa[key] != fb[key]:
            return False
    ga, gb = fa.get("gender", "unknown"), fb.get("gender", "unknown")
    return ga == "unknown" or gb == "unknown" or ga == gb


def _replace_ref(mr: MeaningRep, old, new):
    for frame in mr.frames.values():
        for i, slot in enumerate(frame.slots):
            if old in slot.fillers:
                frame.slots[i] = Slot(
                    slot.prop, slot.facet, tuple(new if f == old else f for f in slot.fillers)
                )
    mr.frames.pop(old, None)


def resolve_coordinated_objects(tree, mr: MeaningRep, composer_nodes=None, trace=NULL_TRACE):
    """Merge direct objects of coordinated VPs when their agreement features
    match; confidence is higher when the first object is a pronoun."""
    if composer_nodes is None:
        composer_nodes = mr.meta.get("_node_instance", {})
    records = []
    for h, label, d in tree.edges:
        if label != "conj":
            continue
        obj1 = tree.dependent(h, "directobject")
        obj2 = tree.dependent(d, "directobject")
        if obj1 is None or obj2 is None:
            continue
        f1, f2 = _features_of(tree, obj1), _features_of(tree, obj2)
        ref1 = composer_nodes.get(obj1)
        ref2 = composer_nodes.get(obj2)
        if ref1 is None or ref2 is None or ref1 == ref2:
            continue
        if not _agree(f1, f2):
            trace.add(
                "coref",
                f"{tree.node(obj1).lemma} ~ {tree.node(obj2).lemma}",
                "no merge: agreement mismatch",
            )
            continue
        if tree.node(obj2).pos != "pron":
            continue  # the anaphor in this constellation is the second object
        pron_first = tree.node(obj1).pos == "pron"
        confidence = 0.95 if pron_first else 0.9
        _replace_ref(mr, ref2, ref1)
        records.append(CorefRecord(kept=ref1, removed=ref2, confidence=confidence))
        trace.add(
            "coref",
            f"{tree.node(obj1).lemma} ~ {tree.node(obj2).lemma}",
            f"merged ({confidence:.2f})",
        )
    mr.coref = tuple(records)
    return mr


def retype_untyped(mr: MeaningRep, ontology: ConceptStore):
    """Give pronoun/wh placeholders a concept from selectional fit: the most
    specific constraint among the roles each placeholder fills."""
    for ref in [r for r in mr.frames if mr.meta.get(r, {}).get("untyped")]:
        constraints = []
        for host, frame in mr.frames.items():
            if host.concept not in ontology:
                continue
            eff = ontology.effective_frame(host.concept)
            for slot in frame.slots:
                if ref not in slot.fillers or slot.prop not in CASE_ROLES:
                    continue
                for eslot in eff.slots:
                    if eslot.prop == slot.prop and eslot.facet in (Facet.SEM, Facet.DEFAULT):
                        constraints.extend(
                            f.name for f in eslot.fillers if isinstance(f, ConceptRef)
                        )
        chosen = None
        for c in constraints:
            if chosen is None or ontology.is_a(c, chosen):
                chosen = c
        if chosen and chosen != ref.concept:
            # renumber into the chosen concept's namespace
            taken = {r.index for r in mr.frames if r.concept == chosen}
            idx = 1
            while idx in taken:
                idx += 1
            new = InstanceRef(chosen, idx)
            old_frame = mr.frames[ref]
            new_frame = Frame(new, old_frame.slots, kind="instance")
            items = [(new, new_frame) if k == ref else (k, v) for k, v in mr.frames.items()]
            mr.frames = dict(items)
            mr.meta[new] = mr.meta.pop(ref)
            _replace_ref_only(mr, ref, new)
            if mr.head == ref:
                mr.head = new
    return mr


def _replace_ref_only(mr, old, new):
    for frame in mr.frames.values():
        for i, slot in enumerate(frame.slots):
            if old in slot.fillers:
                frame.slots[i] = Slot(
                    slot.prop, slot.facet, tuple(new if f == old else f for f in slot.fillers)
                )


# ---------------------------------------------------------------------------
# Normalized MR shape (precedent lookup key)


def normalized_shape(mr: MeaningRep) -> str:
    """Head concept plus sorted role -> filler-concept pairs, names retained,
    indices dropped."""
    head_frame = mr.frames[mr.head]
    pairs = []
    for slot in head_frame.slots:
        for f in slot.fillers:
            if isinstance(f, InstanceRef):
                target = mr.frames.get(f)
                name = target.filler("HAS-NAME") if target is not None else None
                key = f"{f.concept}:{name}" if name else f.concept
                pairs.append(f"{slot.prop}={key}")
            elif isinstance(f, ConceptRef):
                pairs.append(f"{slot.prop}={f.name}")
            elif isinstance(f, Literal) and slot.prop not in ("lex-map",):
                pairs.append(f"{slot.prop}={f.text}")
    return mr.head.concept + "|" + ",".join(sorted(pairs))


# ---------------------------------------------------------------------------
# The analysis pipeline


def analyze(
    text,
    lexicon,
    ontology,
    memory=None,
    trace=NULL_TRACE,
    max_selections=64,
):
    """parse -> enumerate candidates -> compose -> score -> rank.

    Returns ranked MeaningReps; a stored precedent, when the episodic store
    holds one for a reading's normalized shape, ranks that reading first.
    """
    trees = parse(text, lexicon)
    trace.add("parse", text, f"{len(trees)} tree(s)")
    readings = []
    rejected = []
    failures = []
    unknown_words = []
    for tree_rank, tree in enumerate(trees):
        lattice = enumerate_candidates(tree, lexicon)
        anchored_pool = lexicon.anchored_senses()
        for head in lattice.heads():
            node = tree.node(head)
            cands = lattice.candidates[head]
            tried = lexicon.lookup(node.lemma, "v")
            tried += [s for s in anchored_pool if s not in tried]
            matched_ids = {c.sense_id for c in cands}
            rejected_senses = [
                (s.id, "syn-struc does not fit the tree, directly or transformed")
                for s in tried
                if s.id not in matched_ids
            ]
            trace.add(
                "match",
                f"head {node.lemma}",
                f"{len(cands)} candidate(s)",
                rejected=rejected_senses,
                cited=[c.sense_id for c in cands],
            )
        if lattice.unknown:
            for idx in lattice.unknown:
                failures.append(f"unknown word {tree.node(idx).lemma!r}")
                unknown_words.append(tree.node(idx).lemma)
            continue
        if any(not lattice.candidates[h] for h in lattice.heads()):
            bare = [tree.node(h).lemma for h in lattice.heads() if not lattice.candidates[h]]
            failures.append(f"no sense matches head(s) {', '.join(bare)}")
            continue
        heads = lattice.heads()
        combos = list(product(*(lattice.candidates[h] for h in heads)))[:max_selections]
        for combo in combos:
            selection = dict(zip(heads, combo))
            try:
                composer_mr = compose_mr(tree, selection, lexicon, ontology, trace)
            except CompositionError as err:
                failures.append(str(err))
                continue
            composer_mr.meta["_tree_rank"] = tree_rank
            resolve_coordinated_objects(tree, composer_mr, _node_map(composer_mr), trace)
            retype_untyped(composer_mr, ontology)
            score = score_mr(composer_mr, ontology)
            composer_mr.score = score.aggregate
            composer_mr.verdicts = score.verdicts
            composer_mr.rejected = score.reject
            if score.reject:
                rejected.append(composer_mr)
                trace.add(
                    "score",
                    "+".join(composer_mr.sense_ids),
                    "rejected: selectional violation",
                    rejected=[
                        (f"{ref}.{role}", verdict)
                        for ref, role, verdict in score.verdicts
                        if verdict == "violation"
                    ],
                )
            else:
                readings.append(composer_mr)
                trace.add(
                    "score",
                    "+".join(composer_mr.sense_ids),
                    f"aggregate {score.aggregate:g}",
                    cited=[f"{r}.{p}:{v}" for r, p, v in score.verdicts],
                )
    if not readings:
        diagnosis = rejected[0] if rejected else None
        detail = failures[0] if failures else "all candidate readings rejected"
        raise AnalysisRejected(detail, diagnosis, unknown_words)
    # consult the precedent index before committing to score order
    precedent_hit = None
    if memory is not None:
        for mr in readings:
            key = normalized_shape(mr)
            stored = memory.recall_precedent(key)
            if stored is not None and tuple(stored.get("senses", ())) == mr.sense_ids:
                mr.precedent = True
                precedent_hit = mr
                trace.add("precedent", key, f"reusing stored interpretation {mr.sense_ids}")
                break
            if stored is None and memory.near_miss(key):
                trace.add("precedent", key, "near-miss precedent ignored (exact match only)")

    def rank_key(mr):
        return (
            0 if mr.precedent else 1,
            -mr.score,
            mr.transformations,
            mr.sense_ids,
            mr.meta.get("_tree_rank", 0),
            mr.serialize(),
        )

    readings.sort(key=rank_key)
    trace.add(
        "rank",
        f"{len(readings)} reading(s)",
        " > ".join("+".join(mr.sense_ids) for mr in readings),
    )
    return readings


def _node_map(mr: MeaningRep):
    return mr.meta.get("_node_instance", {})
