"""Episodic memory: anchors, interpretation precedents, habit consolidation,
collaborator preference stencils, and plan reuse.

Single-writer, multi-reader: all mutation funnels through one lock; readers
see consistent snapshots because frames are replaced, never edited in place.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from .kr import (
    AnchorRef,
    ConceptRef,
    Facet,
    Frame,
    InstanceRef,
    KBError,
    Literal,
    Slot,
    parse_kb,
    serialize_kb,
)
from .scripts import Plan, ScriptFrame, default_traversal, validate_path
from .trace import NULL_TRACE

TRIGGER_RELATIONS = ("after-use", "before-event", "at-time")

_BOOKKEEPING = ("PRECEDENT", "PREFERENCE", "PLAN", "HABIT")


@dataclass
class HabitRecord:
    agent: AnchorRef
    event_concept: str
    theme_concept: str
    trigger: str
    support: tuple  # anchors of the supporting instances
    frequency: str  # always | observed-so-far

    def to_frame(self, index):
        f = Frame(InstanceRef("HABIT", index), kind="instance")
        f.add("AGENT", Facet.VALUE, [self.agent])
        f.add("EVENT", Facet.VALUE, [ConceptRef(self.event_concept)])
        f.add("THEME", Facet.VALUE, [ConceptRef(self.theme_concept)])
        f.add("TRIGGER", Facet.VALUE, [Literal(self.trigger)])
        f.add("SUPPORT", Facet.VALUE, list(self.support))
        f.add("FREQUENCY", Facet.VALUE, [Literal(self.frequency)])
        return f


class EpisodicStore:
    def __init__(self):
        self._lock = threading.Lock()
        self.frames = {}  # AnchorRef -> Frame
        self.salience = []  # most recent first
        self.counters = {}
        self.precedents = {}  # key -> {"senses", "count", "last_used"}
        self.preferences = {}  # (collaborator AnchorRef, script) -> path tuple
        self.plans = []  # dicts: script, steps, outcome, requires
        self.self_anchor = None
        self._tick = 0

    # -- loading / saving -----------------------------------------------------

    @classmethod
    def from_text(cls, text):
        store = cls()
        for frame in parse_kb(text):
            if frame.kind != "instance" or not isinstance(frame.head, AnchorRef):
                raise KBError("memory files hold #-indexed instance blocks")
            store._ingest(frame)
        return store

    def _ingest(self, frame):
        ref = frame.head
        if ref.concept == "PRECEDENT":
            key = str(frame.filler("KEY"))
            self.precedents[key] = {
                "senses": tuple(str(f) for f in frame.fillers("SENSES")),
                "count": int(str(frame.filler("COUNT") or "1")),
                "last_used": int(str(frame.filler("LAST-USED") or "0")),
            }
            return
        if ref.concept == "PREFERENCE":
            who = frame.filler("COLLABORATOR")
            script = frame.filler("SCRIPT")
            path = tuple(f for f in frame.fillers("PATH") if isinstance(f, AnchorRef))
            self.preferences[(who, script.name)] = path
            return
        if ref.concept == "PLAN":
            self.plans.append(
                {
                    "script": frame.filler("SCRIPT").name,
                    "steps": [f for f in frame.fillers("STEPS") if isinstance(f, AnchorRef)],
                    "outcome": str(frame.filler("OUTCOME") or "success"),
                    "requires": [
                        f.name for f in frame.fillers("REQUIRES") if isinstance(f, ConceptRef)
                    ],
                }
            )
            return
        self.frames[ref] = frame
        self.counters[ref.concept] = max(self.counters.get(ref.concept, 0), ref.index)
        if frame.filler("SELF") is not None:
            self.self_anchor = ref
        self.salience.append(ref)

    def serialize(self):
        out = list(self.frames.values())
        idx = 0
        for key, rec in sorted(self.precedents.items()):
            idx += 1
            f = Frame(AnchorRef("PRECEDENT", idx), kind="instance")
            f.add("KEY", Facet.VALUE, [Literal(key)])
            f.add("SENSES", Facet.VALUE, [Literal(s) for s in rec["senses"]])
            f.add("COUNT", Facet.VALUE, [Literal(str(rec["count"]))])
            f.add("LAST-USED", Facet.VALUE, [Literal(str(rec["last_used"]))])
            out.append(f)
        idx = 0
        for (who, script), path in sorted(self.preferences.items(), key=lambda kv: str(kv[0])):
            idx += 1
            f = Frame(AnchorRef("PREFERENCE", idx), kind="instance")
            f.add("COLLABORATOR", Facet.VALUE, [who])
            f.add("SCRIPT", Facet.VALUE, [ConceptRef(script)])
            f.add("PATH", Facet.VALUE, list(path))
            out.append(f)
        for i, plan in enumerate(self.plans, start=1):
            f = Frame(AnchorRef("PLAN", i), kind="instance")
            f.add("SCRIPT", Facet.VALUE, [ConceptRef(plan["script"])])
            f.add("STEPS", Facet.VALUE, list(plan["steps"]))
            f.add("OUTCOME", Facet.VALUE, [Literal(plan["outcome"])])
            if plan["requires"]:
                f.add("REQUIRES", Facet.VALUE, [ConceptRef(c) for c in plan["requires"]])
            out.append(f)
        return serialize_kb(out)

    # -- anchors ----------------------------------------------------------------

    def mint(self, concept) -> AnchorRef:
        with self._lock:
            n = self.counters.get(concept, 0) + 1
            self.counters[concept] = n
            ref = AnchorRef(concept, n)
            self.frames[ref] = Frame(ref, kind="instance")
            self.salience.insert(0, ref)
            return ref

    def add_anchor_frame(self, frame: Frame):
        with self._lock:
            ref = frame.head
            self.frames[ref] = frame
            self.counters[ref.concept] = max(self.counters.get(ref.concept, 0), ref.index)
            self.salience.insert(0, ref)
            return ref

    def touch(self, ref):
        with self._lock:
            if ref in self.salience:
                self.salience.remove(ref)
            self.salience.insert(0, ref)

    def find_by_name(self, name, concept, ontology):
        for ref in self.salience:
            frame = self.frames[ref]
            has_name = frame.filler("HAS-NAME")
            if has_name is not None and str(has_name) == name:
                if concept not in ontology or ref.concept not in ontology:
                    return ref
                if ontology.is_a(ref.concept, concept) or ontology.is_a(concept, ref.concept):
                    return ref
        return None

    def salient(self, concept, ontology):
        """Most recently mentioned anchor type-compatible with concept."""
        for ref in self.salience:
            if ref.concept in _BOOKKEEPING:
                continue
            if concept in ontology and ref.concept in ontology:
                if ontology.is_a(ref.concept, concept):
                    return ref
            elif ref.concept == concept:
                return ref
        return None

    def anchor(self, mr, ontology, trace=NULL_TRACE):
        """Resolve every MR instance to an episodic anchor, minting fresh
        anchors for new referents. Idempotent for already-anchored frames."""
        for ref, frame in mr.frames.items():
            if frame.has("episodic-mem"):
                continue
            meta = mr.meta.get(ref, {})
            anchor = None
            how = ""
            pronoun = meta.get("pronoun")
            name = frame.filler("HAS-NAME")
            status = frame.filler("DISCOURSE-STATUS")
            if pronoun in ("i", "me"):
                if self.self_anchor is None:
                    self_ref = self.mint("HUMAN")
                    self.frames[self_ref].add("SELF", Facet.VALUE, [Literal("yes")])
                    self.self_anchor = self_ref
                anchor = self.self_anchor
                how = "self"
            elif name is not None:
                anchor = self.find_by_name(str(name), ref.concept, ontology)
                how = "by name"
                if anchor is None:
                    anchor = self.mint(ref.concept)
                    self.frames[anchor].add("HAS-NAME", Facet.VALUE, [name])
                    how = "fresh (named)"
            elif str(status) == "given":
                anchor = self.salient(ref.concept, ontology)
                how = "salient"
                if anchor is None:
                    anchor = self.mint(ref.concept)
                    how = "fresh (no salient match)"
            else:
                anchor = self.mint(ref.concept)
                how = "fresh"
                self._copy_episode(frame, anchor, mr)
            frame.add("episodic-mem", Facet.VALUE, [anchor])
            self.touch(anchor)
            trace.add("anchor", str(ref), f"{anchor} ({how})")
        return mr

    def _copy_episode(self, frame, anchor, mr):
        """Record the episode content, fillers replaced by their anchors."""
        stored = self.frames[anchor]
        for slot in frame.slots:
            if slot.prop in ("lex-map", "episodic-mem"):
                continue
            fillers = []
            for f in slot.fillers:
                if isinstance(f, InstanceRef):
                    target = mr.frames.get(f)
                    linked = target.filler("episodic-mem") if target is not None else None
                    if linked is None:
                        fillers = None
                        break
                    fillers.append(linked)
                else:
                    fillers.append(f)
            if fillers:
                stored.slots.append(Slot(slot.prop, slot.facet, tuple(fillers)))

    # -- precedents --------------------------------------------------------------

    def record_precedent(self, key, senses, trace=NULL_TRACE):
        with self._lock:
            self._tick += 1
            rec = self.precedents.get(key)
            if rec is None:
                self.precedents[key] = {
                    "senses": tuple(senses),
                    "count": 1,
                    "last_used": self._tick,
                }
            else:
                rec["senses"] = tuple(senses)
                rec["count"] += 1
                rec["last_used"] = self._tick
        trace.add("precedent", key, f"recorded {tuple(senses)}")
        return self.precedents[key]

    def recall_precedent(self, key):
        rec = self.precedents.get(key)
        if rec is not None:
            self._tick += 1
            rec["last_used"] = self._tick
        return rec

    def near_miss(self, key):
        head = key.split("|", 1)[0]
        return any(k.split("|", 1)[0] == head for k in self.precedents)

    def clear_precedents(self):
        with self._lock:
            self.precedents.clear()

    # -- habit consolidation -------------------------------------------------------

    def identify_habit(self, ontology, min_count=3):
        """Groups of event instances with a shared (agent, concept, trigger)
        whose THEMEs share a proper ancestor consolidate into habits."""
        groups = {}
        for ref in self.frames:
            frame = self.frames[ref]
            if ref.concept in _BOOKKEEPING or ref.concept not in ontology:
                continue
            if not ontology.is_a(ref.concept, "EVENT"):
                continue
            trigger = next((t for t in TRIGGER_RELATIONS if frame.has(t)), None)
            if trigger is None:
                continue
            agent = frame.filler("AGENT")
            theme = frame.filler("THEME")
            if not isinstance(agent, AnchorRef) or not isinstance(theme, AnchorRef):
                continue
            groups.setdefault((agent, ref.concept, trigger), []).append((ref, theme))
        habits = []
        for (agent, concept, trigger), members in sorted(
            groups.items(), key=lambda kv: (str(kv[0][0]), kv[0][1], kv[0][2])
        ):
            if len(members) < min_count:
                continue
            theme_concepts = [theme.concept for _, theme in members]
            lca = ontology.nearest_common_ancestor(theme_concepts)
            if lca is None or lca == "ALL":
                continue
            # always, unless some same-shaped event lacks the trigger
            counterexample = any(
                r.concept == concept
                and self.frames[r].filler("AGENT") == agent
                and not self.frames[r].has(trigger)
                for r in self.frames
            )
            habits.append(
                HabitRecord(
                    agent=agent,
                    event_concept=concept,
                    theme_concept=lca,
                    trigger=trigger,
                    support=tuple(r for r, _ in members),
                    frequency="observed-so-far" if counterexample else "always",
                )
            )
        return habits

    # -- preference stencils and plan reuse -------------------------------------------

    def record_preference(self, collaborator: AnchorRef, script: ScriptFrame, path):
        issues = validate_path(script, list(path))
        if issues:
            raise KBError(f"invalid path: {'; '.join(issues)}")
        with self._lock:
            self.preferences[(collaborator, script.name)] = tuple(path)

    def plan_with_preference(self, collaborator, script: ScriptFrame, context=()) -> Plan:
        path = self.preferences.get((collaborator, script.name))
        if path is not None:
            issues = validate_path(script, list(path))
            if issues:
                raise KBError(f"stored stencil invalid: {'; '.join(issues)}")
            return Plan(script.name, list(path), "stencil")
        return self.instantiate_plan(script, context)

    def record_plan(self, script_name, steps, outcome="success", requires=()):
        with self._lock:
            self.plans.append(
                {
                    "script": script_name,
                    "steps": list(steps),
                    "outcome": outcome,
                    "requires": list(requires),
                }
            )

    def instantiate_plan(self, script: ScriptFrame, context=()) -> Plan:
        """Copy the last plan that worked unless infeasible; otherwise build
        a fresh default traversal."""
        available = set(context)
        history = [p for p in self.plans if p["script"] == script.name]
        if history:
            last = history[-1]
            if last["outcome"] == "success" and set(last["requires"]) <= available:
                return Plan(script.name, list(last["steps"]), "copied")
        return default_traversal(script)
