"""Concept store: inheritance hierarchy, effective frames, facet grading."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .kr import ConceptRef, Facet, Frame, KBError, Literal, Slot


class UnknownConceptError(KBError):
    pass


class UnknownPropertyError(KBError):
    pass


class Verdict(Enum):
    MATCHES_VALUE = "matches-value"
    MATCHES_DEFAULT = "matches-default"
    MATCHES_SEM = "matches-sem"
    MATCHES_RELAXABLE = "matches-relaxable"
    VIOLATION = "violation"

    def __str__(self):
        return self.value


_FACET_VERDICT = {
    Facet.VALUE: Verdict.MATCHES_VALUE,
    Facet.DEFAULT: Verdict.MATCHES_DEFAULT,
    Facet.SEM: Verdict.MATCHES_SEM,
    Facet.RELAXABLE_TO: Verdict.MATCHES_RELAXABLE,
}


@dataclass
class ConstraintVerdict:
    verdict: Verdict
    slot: Slot | None  # the facet line that matched, None on violation

    @property
    def weight(self):
        # artifact constants; the source material grades facets ordinally only
        return {
            Verdict.MATCHES_VALUE: 2.0,
            Verdict.MATCHES_DEFAULT: 2.0,
            Verdict.MATCHES_SEM: 1.0,
            Verdict.MATCHES_RELAXABLE: 0.5,
            Verdict.VIOLATION: 0.0,
        }[self.verdict]


class ConceptStore:
    """Immutable-after-load map of concept frames with IS-A reasoning."""

    def __init__(self, frames):
        self._frames = {}
        for f in frames:
            if f.kind != "concept":
                continue
            name = f.head.name
            if name in self._frames:
                raise KBError(f"duplicate concept {name}")
            self._frames[name] = f
        self._parents = {}
        for name, f in self._frames.items():
            parents = []
            for filler in f.fillers("IS-A"):
                if not isinstance(filler, ConceptRef):
                    raise KBError(f"{name}: IS-A filler must be a concept, got {filler}")
                if filler.name not in self._frames:
                    raise UnknownConceptError(f"{name}: IS-A target {filler.name} not in store")
                parents.append(filler.name)
            self._parents[name] = parents
        self._check_acyclic()
        self._effective_cache = {}

    def _check_acyclic(self):
        done, stack = set(), set()

        def visit(n):
            if n in done:
                return
            if n in stack:
                raise KBError(f"IS-A cycle through {n}")
            stack.add(n)
            for p in self._parents[n]:
                visit(p)
            stack.discard(n)
            done.add(n)

        for n in self._frames:
            visit(n)

    # -- lookups ------------------------------------------------------------

    def canonical(self, name) -> str:
        key = str(name).upper()
        if key not in self._frames:
            raise UnknownConceptError(f"unknown concept {name}")
        return key

    def __contains__(self, name):
        return str(name).upper() in self._frames

    def __iter__(self):
        return iter(self._frames)

    def __len__(self):
        return len(self._frames)

    def frame(self, name) -> Frame:
        return self._frames[self.canonical(name)]

    def parents(self, name):
        return list(self._parents[self.canonical(name)])

    def is_a(self, concept, ancestor) -> bool:
        """Reflexive transitive reachability over IS-A edges."""
        start = self.canonical(concept)
        target = self.canonical(ancestor)
        seen = set()
        queue = [start]
        while queue:
            n = queue.pop()
            if n == target:
                return True
            if n in seen:
                continue
            seen.add(n)
            queue.extend(self._parents[n])
        return False

    def ancestry(self, name):
        """Ancestors by (distance, parent-order), nearest first, no self."""
        start = self.canonical(name)
        order = []
        seen = {start}
        layer = [start]
        while layer:
            nxt = []
            for n in layer:
                for p in self._parents[n]:
                    if p not in seen:
                        seen.add(p)
                        order.append(p)
                        nxt.append(p)
            layer = nxt
        return order

    def nearest_common_ancestor(self, names):
        """Nearest concept (by max distance over members) above all names."""
        names = [self.canonical(n) for n in names]
        if not names:
            return None
        candidate_sets = []
        for n in names:
            candidate_sets.append([n] + self.ancestry(n))
        common = set(candidate_sets[0])
        for s in candidate_sets[1:]:
            common &= set(s)
        if not common:
            return None
        # rank by position in the first member's ancestry (nearest wins)
        for c in candidate_sets[0]:
            if c in common:
                return c
        return None

    # -- effective frames and constraint grading -----------------------------

    def effective_frame(self, name) -> Frame:
        """Local slots plus inherited ones; a local (property, facet) pair
        overrides the ancestor's, nearer ancestors override farther ones."""
        key = self.canonical(name)
        if key in self._effective_cache:
            return self._effective_cache[key]
        out = Frame(ConceptRef(key), kind="concept")
        seen_pairs = set()
        for source in [key] + self.ancestry(key):
            new_pairs = set()
            for slot in self._frames[source].slots:
                if slot.prop == "IS-A" and source != key:
                    continue
                pair = (slot.prop, slot.facet)
                if source != key and pair in seen_pairs:
                    continue
                out.slots.append(slot)
                new_pairs.add(pair)
            seen_pairs |= new_pairs
        self._effective_cache[key] = out
        return out

    def check_filler(self, concept, prop, candidate) -> ConstraintVerdict:
        """Grade a candidate filler by the strongest facet it satisfies.

        Concepts match via is-a; literals by exact equality; no facet -> violation.
        """
        frame = self.effective_frame(concept)
        prop_slots = [s for s in frame.slots if s.prop == str(prop).upper()]
        if not prop_slots:
            raise UnknownPropertyError(f"{concept} has no property {prop}")
        prop_slots.sort(key=lambda s: -s.facet.strength)
        for slot in prop_slots:
            for filler in slot.fillers:
                if isinstance(filler, ConceptRef) and isinstance(candidate, (ConceptRef, str)):
                    cand = candidate.name if isinstance(candidate, ConceptRef) else candidate
                    if cand.upper() in self and self.is_a(cand, filler.name):
                        return ConstraintVerdict(_FACET_VERDICT[slot.facet], slot)
                elif isinstance(filler, Literal) and isinstance(candidate, Literal):
                    if filler.text == candidate.text:
                        return ConstraintVerdict(_FACET_VERDICT[slot.facet], slot)
        return ConstraintVerdict(Verdict.VIOLATION, None)

    def install(self, frame: Frame):
        """Admit a learned concept; the single writer is the learning loop."""
        name = frame.head.name
        if name in self._frames:
            raise KBError(f"concept {name} already exists")
        parents = []
        for filler in frame.fillers("IS-A"):
            if filler.name not in self._frames:
                raise UnknownConceptError(f"{name}: IS-A target {filler.name} not in store")
            parents.append(filler.name)
        self._frames[name] = frame
        self._parents[name] = parents
        self._effective_cache.clear()

    def lint(self):
        """KB style issues that are data, not errors."""
        issues = []
        for name, f in sorted(self._frames.items()):
            for slot in f.slots:
                if slot.facet is Facet.VALUE and slot.prop != "IS-A":
                    issues.append(
                        f"{name}: `value` facet on {slot.prop} (reserved for definitional slots)"
                    )
        return issues
