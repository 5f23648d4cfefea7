"""Pattern matching of lexicon senses against parse trees, directly or via
chained transformations that rewrite the stored pattern and re-route its
variable bindings."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .kr import Variable
from .lexicon import Constituent, LexSense, Lexicon
from .parsetree import ParseTree

# fixed chain order: argument-structure rewrites before movement
TRANSFORMATIONS = (
    "passive",
    "controlled-infinitive",
    "prep-gerund",
    "vp-coordination-gap",
    "wh-object-fronting",
)
MAX_CHAIN = 2

# edges a pattern must account for; pp/aux/mod/conj may remain as adjuncts
CORE_LABELS = {
    "subject",
    "directobject",
    "indirectobject",
    "xcomp",
    "predicative",
    "part",
    "wh-focus",
    "by-agent",
    "marker",
}


class Inapplicable(Exception):
    pass


@dataclass(frozen=True)
class RewrittenPattern:
    constituents: tuple
    controlled: tuple = ()  # ((var, transformation-name), ...)
    wh_var: int | None = None
    requires_conj_target: bool = False


@dataclass(frozen=True)
class CandidateBinding:
    sense_id: str
    chain: tuple
    varmap: tuple  # sorted ((var, node_idx), ...)
    controlled: tuple = ()
    wh_var: int | None = None

    def var(self, n):
        for k, v in self.varmap:
            if k == n:
                return v
        return None

    @property
    def transformations(self):
        return len(self.chain)


def _find(constituents, role, var_required=True):
    for c in constituents:
        if c.role == role and (not var_required or isinstance(c.binding, Variable)):
            return c
    return None


def apply_transformation(name: str, pattern: RewrittenPattern) -> RewrittenPattern:
    """Pure rewrite of a pattern; raises Inapplicable when preconditions fail."""
    cons = list(pattern.constituents)
    head = _find(cons, "v", var_required=False)
    if head is None:
        raise Inapplicable(name)

    if name == "passive":
        subject = _find(cons, "subject")
        promoted = _find(cons, "indirectobject") or _find(cons, "directobject")
        if subject is None or promoted is None or head.form not in (None, "finite"):
            raise Inapplicable(name)
        out = []
        for c in cons:
            if c is subject:
                continue
            if c is promoted:
                out.append(Constituent("subject", c.binding))
            elif c is head:
                out.append(replace(c, form="pastpart"))
            else:
                out.append(c)
        out.append(Constituent("aux", "be"))
        out.append(Constituent("by-agent", subject.binding, optional=True))
        return replace(pattern, constituents=tuple(out))

    if name == "controlled-infinitive":
        subject = _find(cons, "subject")
        if subject is None or head.form not in (None, "finite"):
            raise Inapplicable(name)
        out = [replace(c, form="base") if c is head else c for c in cons if c is not subject]
        controlled = pattern.controlled + ((subject.binding.n, name),)
        return replace(pattern, constituents=tuple(out), controlled=controlled)

    if name == "prep-gerund":
        subject = _find(cons, "subject")
        if subject is None or head.form not in (None, "finite"):
            raise Inapplicable(name)
        out = [replace(c, form="prespart") if c is head else c for c in cons if c is not subject]
        controlled = pattern.controlled + ((subject.binding.n, name),)
        return replace(pattern, constituents=tuple(out), controlled=controlled)

    if name == "vp-coordination-gap":
        subject = _find(cons, "subject")
        if subject is None:
            raise Inapplicable(name)
        out = [c for c in cons if c is not subject]
        controlled = pattern.controlled + ((subject.binding.n, name),)
        return replace(
            pattern, constituents=tuple(out), controlled=controlled, requires_conj_target=True
        )

    if name == "wh-object-fronting":
        dobj = _find(cons, "directobject")
        if dobj is None or pattern.wh_var is not None:
            raise Inapplicable(name)
        out = []
        for c in cons:
            if c is dobj:
                out.append(Constituent("wh-focus", c.binding))
            else:
                out.append(c)
        if _find(cons, "aux", var_required=False) is None:
            out.append(Constituent("aux", None))
        return replace(pattern, constituents=tuple(out), wh_var=dobj.binding.n)

    raise Inapplicable(name)


def transformation_chains():
    """All chains of length <= 2 in the fixed canonical order, no repeats."""
    chains = [()]
    for i, t in enumerate(TRANSFORMATIONS):
        chains.append((t,))
        for u in TRANSFORMATIONS[i + 1 :]:
            chains.append((t, u))
    return chains


def _form_ok(analysis, form):
    if form is None:
        return True
    if form == "pastpart":
        return analysis.participle == "past"
    if form == "prespart":
        return analysis.participle == "present"
    if form == "base":
        return analysis.tense is None and analysis.participle == "none"
    if form == "finite":
        return analysis.tense is not None
    return False


def _lemma_matches(node, word):
    return node.lemma.lower() == word.lower()


def _match_nested_obj(tree, obj_node, spec, bindings):
    """Check an obj constituent's det/n children against the NP head node."""
    for child in spec.children:
        if child.role == "det":
            det = tree.dependent(obj_node, "det")
            if det is None or not _lemma_matches(tree.node(det), str(child.binding)):
                return None
        elif child.role == "n":
            if not _lemma_matches(tree.node(obj_node), str(child.binding)):
                return None
        else:
            return None
    return bindings


def _match_constituents(tree, head, constituents, used, bindings):
    """Backtracking match; yields completed (bindings, used-edge-deps)."""
    if not constituents:
        yield bindings, used
        return
    spec = constituents[0]
    rest = constituents[1:]

    if spec.role == "v":
        node = tree.node(head)
        if _form_ok(node.analysis, spec.form):
            if isinstance(spec.binding, Variable):
                yield from _match_constituents(
                    tree, head, rest, used, {**bindings, spec.binding.n: head}
                )
            else:
                yield from _match_constituents(tree, head, rest, used, bindings)
        elif spec.optional:
            yield from _match_constituents(tree, head, rest, used, bindings)
        return

    candidates = [d for label, d in tree.dependents(head, spec.role) if d not in used]
    matched_any = False
    for dep in candidates:
        dep_node = tree.node(dep)
        if spec.form is not None and not _form_ok(dep_node.analysis, spec.form):
            continue
        new_bindings = None
        if spec.role == "pp":
            # pp edges target the preposition; children give prep word + obj
            prep_spec = next((c for c in spec.children if c.role == "prep"), None)
            obj_spec = next((c for c in spec.children if c.role == "obj"), None)
            if prep_spec is None or not _lemma_matches(dep_node, str(prep_spec.binding)):
                continue
            obj_node = tree.dependent(dep, "obj")
            if obj_node is None or obj_spec is None:
                continue
            if isinstance(obj_spec.binding, Variable):
                if obj_node in bindings.values():
                    continue
                new_bindings = {**bindings, obj_spec.binding.n: obj_node}
            elif obj_spec.binding is not None:
                if not _lemma_matches(tree.node(obj_node), str(obj_spec.binding)):
                    continue
                new_bindings = dict(bindings)
            else:
                new_bindings = _match_nested_obj(tree, obj_node, obj_spec, dict(bindings))
                if new_bindings is None:
                    continue
        elif isinstance(spec.binding, Variable):
            if dep in bindings.values():
                continue
            new_bindings = {**bindings, spec.binding.n: dep}
        elif spec.binding is not None:
            if not _lemma_matches(dep_node, str(spec.binding)):
                continue
            new_bindings = dict(bindings)
        else:
            new_bindings = dict(bindings)
        matched_any = True
        yield from _match_constituents(tree, head, rest, used | {dep}, new_bindings)
    if not matched_any and spec.optional:
        yield from _match_constituents(tree, head, rest, used, bindings)


def match_pattern(tree: ParseTree, head: int, pattern: RewrittenPattern):
    """All consistent variable assignments of pattern at head."""
    if pattern.requires_conj_target:
        is_target = any(label == "conj" and d == head for _, label, d in tree.edges)
        if not is_target:
            return []
    results = []
    for bindings, used in _match_constituents(tree, head, list(pattern.constituents), set(), {}):
        # every core dependent of the head must be consumed by the pattern
        core = [
            d
            for h, label, d in tree.edges
            if h == head and label in CORE_LABELS
        ]
        if any(d not in used for d in core):
            continue
        results.append(bindings)
    # dedupe assignments
    uniq = []
    seen = set()
    for b in results:
        key = tuple(sorted(b.items()))
        if key not in seen:
            seen.add(key)
            uniq.append(b)
    return uniq


def base_pattern(sense: LexSense) -> RewrittenPattern:
    return RewrittenPattern(tuple(sense.pattern))


def match_sense(sense: LexSense, tree: ParseTree, head: int):
    """All bindings of sense at head achievable with <= MAX_CHAIN chained
    transformations; direct matches come first."""
    head_node = tree.node(head)
    anchored = False
    if sense.lemma != head_node.lemma.lower():
        lits = [l.lower() for l in sense.anchor_literals()]
        deps = [tree.node(d).lemma.lower() for _, d in tree.dependents(head)]
        if not lits or not any(l in deps for l in lits):
            return []
        anchored = True
    out = []
    for chain in transformation_chains():
        if anchored and chain:
            continue  # stored constructions match as stored
        pattern = base_pattern(sense)
        try:
            for t in chain:
                pattern = apply_transformation(t, pattern)
        except Inapplicable:
            continue
        for bindings in match_pattern(tree, head, pattern):
            out.append(
                CandidateBinding(
                    sense_id=sense.id,
                    chain=chain,
                    varmap=tuple(sorted(bindings.items())),
                    controlled=pattern.controlled,
                    wh_var=pattern.wh_var,
                )
            )
    # direct first, then shorter chains, stable and deduped
    seen = set()
    uniq = []
    for cand in sorted(out, key=lambda c: (len(c.chain), c.chain, c.varmap)):
        key = (cand.chain, cand.varmap)
        if key not in seen:
            seen.add(key)
            uniq.append(cand)
    return uniq


@dataclass
class MatchLattice:
    candidates: dict  # head idx -> [CandidateBinding]
    unknown: list  # node idxs with no senses

    def heads(self):
        return sorted(self.candidates)


def clause_heads(tree: ParseTree):
    aux_targets = {d for _, label, d in tree.edges if label == "aux"}
    return sorted(i for i, n in tree.nodes.items() if n.pos == "v" and i not in aux_targets)


def enumerate_candidates(tree: ParseTree, lexicon: Lexicon) -> MatchLattice:
    """Candidate lattice over all clause heads."""
    candidates = {}
    unknown = []
    anchored_pool = lexicon.anchored_senses()
    for head in clause_heads(tree):
        node = tree.node(head)
        senses = lexicon.lookup(node.lemma, "v")
        pool = senses + [s for s in anchored_pool if s not in senses]
        found = []
        for sense in pool:
            found.extend(match_sense(sense, tree, head))
        if node.analysis.unknown and not found:
            unknown.append(head)
        candidates[head] = found
    return MatchLattice(candidates, unknown)
