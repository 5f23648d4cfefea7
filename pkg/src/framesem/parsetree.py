"""Labeled dependency trees over tokens, with a bit-exact text format."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .kr import KBError
from .morph import MorphAnalysis, Token

EDGE_LABELS = {
    "subject",
    "directobject",
    "indirectobject",
    "xcomp",
    "part",
    "pp",
    "obj",
    "det",
    "mod",
    "aux",
    "conj",
    "wh-focus",
    "by-agent",
    "marker",
    "predicative",
}


@dataclass
class ParseNode:
    idx: int
    analysis: MorphAnalysis
    token: Token | None = None

    @property
    def lemma(self):
        return self.analysis.lemma

    @property
    def pos(self):
        return self.analysis.pos


@dataclass
class ParseTree:
    nodes: dict
    edges: list  # (head_idx, label, dep_idx), sorted
    root: int
    text: str = ""

    def __post_init__(self):
        self.edges = sorted(self.edges)
        self._deps = {}
        self._head = {}
        for h, label, d in self.edges:
            if label not in EDGE_LABELS:
                raise KBError(f"unknown edge label {label!r}")
            self._deps.setdefault(h, []).append((label, d))
            if label != "conj":
                if d in self._head:
                    raise KBError(f"node {d} has two heads")
                self._head[d] = (h, label)

    def dependents(self, head_idx, label=None):
        out = []
        for lab, d in self._deps.get(head_idx, []):
            if label is None or lab == label:
                out.append((lab, d))
        return out

    def dependent(self, head_idx, label):
        deps = self.dependents(head_idx, label)
        return deps[0][1] if deps else None

    def head_of(self, idx):
        return self._head.get(idx)

    def node(self, idx) -> ParseNode:
        return self.nodes[idx]

    @property
    def interrogative(self):
        return any(label == "wh-focus" for _, label, _ in self.edges)

    @property
    def imperative(self):
        root = self.nodes[self.root]
        return (
            root.pos == "v"
            and self.dependent(self.root, "subject") is None
            and not self.interrogative
        )

    def signature(self):
        """Hashable identity: analyses plus edge set plus root."""
        nodes = tuple(
            (i, n.analysis.lemma, n.analysis.pos, n.analysis.tense, n.analysis.participle)
            for i, n in sorted(self.nodes.items())
        )
        return (nodes, tuple(self.edges), self.root)


# ---------------------------------------------------------------------------
# Text format: (node id lemma pos feat*) and (edge head label dep) lines
# wrapped in (tree ...). Write-then-read is the identity.

_FEAT_KEYS = ("tense", "participle", "number", "person", "gender", "unknown")


def _feats_of(a: MorphAnalysis):
    out = []
    if a.tense:
        out.append(f"tense={a.tense}")
    if a.participle != "none":
        out.append(f"participle={a.participle}")
    if a.number:
        out.append(f"number={a.number}")
    if a.person:
        out.append(f"person={a.person}")
    if a.gender != "unknown":
        out.append(f"gender={a.gender}")
    if a.unknown:
        out.append("unknown=yes")
    return out


def write_tree(tree: ParseTree) -> str:
    lines = ["(tree"]
    for idx in sorted(tree.nodes):
        n = tree.nodes[idx]
        feats = " ".join(_feats_of(n.analysis))
        feats = f" {feats}" if feats else ""
        lemma = n.lemma.replace(" ", "_")
        lines.append(f"  (node {idx} {lemma} {n.pos}{feats})")
    for h, label, d in tree.edges:
        lines.append(f"  (edge {h} {label} {d})")
    lines.append(")")
    return "\n".join(lines) + "\n"


_LINE_RE = re.compile(r"^\((node|edge)\s+(.*)\)$")


def read_tree(text: str) -> ParseTree:
    """Parse the serialized form; root is the node with no incoming edge."""
    stripped = text.strip()
    if not stripped.startswith("(tree") or not stripped.endswith(")"):
        raise KBError("tree text must be wrapped in (tree ...)")
    body = stripped[len("(tree") : -1].strip()
    nodes = {}
    edges = []
    for raw in body.splitlines():
        line = raw.strip()
        if not line:
            continue
        m = _LINE_RE.match(line)
        if not m:
            raise KBError(f"malformed tree line: {line!r}")
        kind, rest = m.groups()
        parts = rest.split()
        if kind == "node":
            idx = int(parts[0])
            lemma = parts[1].replace("_", " ")
            pos = parts[2]
            feats = {}
            for item in parts[3:]:
                k, _, v = item.partition("=")
                feats[k] = v
            analysis = MorphAnalysis(
                lemma=lemma,
                pos=pos,
                tense=feats.get("tense"),
                participle=feats.get("participle", "none"),
                number=feats.get("number"),
                person=int(feats["person"]) if "person" in feats else None,
                gender=feats.get("gender", "unknown"),
                unknown=feats.get("unknown") == "yes",
            )
            nodes[idx] = ParseNode(idx, analysis)
        else:
            h, label, d = parts
            edges.append((int(h), label, int(d)))
    targets = {d for _, _, d in edges}
    roots = [i for i in nodes if i not in targets]
    if len(roots) != 1:
        raise KBError(f"tree must have exactly one root, found {len(roots)}")
    return ParseTree(nodes, edges, roots[0])
