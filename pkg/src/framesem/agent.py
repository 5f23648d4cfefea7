"""The agent facade: loads the knowledge substrate, owns the episodic store,
and exposes the analysis/generation/learning/memory operations with traces."""

from __future__ import annotations

import threading
from importlib import resources
from pathlib import Path

from . import morph
from .generator import ShapeRegistry, generate
from .kr import KBError, split_blocks
from .learner import Scenario, ScriptedTeacher, describe_back, learn
from .lexicon import Lexicon, sense_from_block
from .memory import EpisodicStore
from .ontology import ConceptStore
from .scripts import load_script_documents
from .semantics import MeaningRep, analyze, normalized_shape, parse_mr_text
from .trace import Trace


def bundled_kb_dir() -> Path:
    return Path(resources.files("framesem")) / "kb"


class Agent:
    def __init__(self, kb_dir=None, memory_path=None):
        self.kb_dir = Path(kb_dir) if kb_dir else bundled_kb_dir()
        if not self.kb_dir.is_dir():
            raise KBError(f"KB directory {self.kb_dir} does not exist")
        self._lock = threading.RLock()
        concept_frames = []
        senses = []
        shape_blocks = []
        script_frames = []
        from .generator import shape_from_block
        from .kr import frame_from_block

        for path in sorted(self.kb_dir.glob("*.kb")):
            if path.name == "memory.kb":
                continue  # episodic memory loads through memory_path
            for block in split_blocks(path.read_text()):
                if block.kind == "concept":
                    concept_frames.append(frame_from_block(block))
                elif block.kind == "sense":
                    senses.append(sense_from_block(block))
                elif block.kind == "shape":
                    shape_blocks.append(block)
                elif block.kind in ("script", "instance"):
                    script_frames.append(frame_from_block(block))
        if not concept_frames:
            raise KBError(f"no concept blocks found under {self.kb_dir}")
        self.ontology = ConceptStore(concept_frames)
        self.lexicon = Lexicon(senses)
        self.shapes = ShapeRegistry([shape_from_block(b) for b in shape_blocks])
        self.scripts = load_script_documents(script_frames)

        if memory_path is None:
            default = self.kb_dir / "memory.kb"
            memory_path = default if default.exists() else None
        if memory_path is not None:
            self.memory = EpisodicStore.from_text(Path(memory_path).read_text())
        else:
            self.memory = EpisodicStore()

    # -- language -----------------------------------------------------------

    def analyze(self, text, explain=False):
        trace = Trace(enabled=explain)
        with self._lock:
            tokens = morph.tokenize(text, self.lexicon.multiwords)
            trace.add("tokenize", text, f"{len(tokens)} token(s)")
            n_analyses = sum(len(morph.analyze(t, self.lexicon)) for t in tokens)
            trace.add("morph", f"{len(tokens)} token(s)", f"{n_analyses} analyses")
            readings = analyze(
                text, self.lexicon, self.ontology, memory=self.memory, trace=trace
            )
            self.memory.anchor(readings[0], self.ontology, trace)
        return readings, trace

    def generate(self, mr: MeaningRep, explain=False):
        trace = Trace(enabled=explain)
        sentence = generate(
            mr, self.shapes, self.lexicon, self.ontology, self.memory, trace
        )
        return sentence, trace

    def generate_text(self, mr_text, explain=False):
        return self.generate(parse_mr_text(mr_text), explain)

    # -- learning -------------------------------------------------------------

    def learn_scenario(self, scenario: Scenario, explain=False):
        trace = Trace(enabled=explain)
        teacher = ScriptedTeacher(scenario.answers)
        with self._lock:
            result = learn(
                scenario.text,
                teacher,
                self.lexicon,
                self.ontology,
                registry=self.shapes,
                memory=self.memory,
                difficulty=scenario.difficulty,
                trace=trace,
            )
            if result.learned:
                self.scripts[result.script.name] = result.script
        return result, trace

    def learn_text(self, text, answers=(), explain=False):
        scenario = Scenario("adhoc", text, list(answers), [], {})
        return self.learn_scenario(scenario, explain)

    # -- memory ----------------------------------------------------------------

    def consolidate(self, min_count=3):
        with self._lock:
            return self.memory.identify_habit(self.ontology, min_count=min_count)

    def record_precedent(self, text, reading_index=0):
        with self._lock:
            readings, _ = self.analyze(text)
            if reading_index >= len(readings):
                raise KBError(f"no reading {reading_index} for {text!r}")
            chosen = readings[reading_index]
            key = normalized_shape(chosen)
            self.memory.record_precedent(key, chosen.sense_ids)
        return key, chosen

    def plan(self, script_name, collaborator=None, context=()):
        script = self.scripts.get(script_name.upper())
        if script is None:
            raise KBError(f"unknown script {script_name}")
        with self._lock:
            if collaborator is not None:
                anchor = self.memory.find_by_name(collaborator, "HUMAN", self.ontology)
                if anchor is None:
                    raise KBError(f"no memory anchor for collaborator {collaborator!r}")
                return self.memory.plan_with_preference(anchor, script, context)
            return self.memory.instantiate_plan(script, context)

    def describe_script(self, script_name):
        script = self.scripts.get(script_name.upper())
        if script is None:
            raise KBError(f"unknown script {script_name}")
        return describe_back(script, self.lexicon, self.ontology, self.shapes, self.memory)

    # -- validation ---------------------------------------------------------------

    def validate(self):
        issues = []
        issues.extend(self.ontology.lint())
        issues.extend(self.lexicon.lint(self.ontology))
        for name, script in sorted(self.scripts.items()):
            issues.extend(script.well_formed_issues(self.ontology))
        for ref, frame in self.memory.frames.items():
            if ref.concept not in self.ontology and ref.concept not in (
                "PRECEDENT",
                "PREFERENCE",
                "PLAN",
            ):
                issues.append(f"memory anchor {ref} has no ontology concept")
        return issues
