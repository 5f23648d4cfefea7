"""Chart parser for the controlled English fragment.

The grammar is a small hand-written CFG with head marking, edge labels and
feature predicates. Coverage is the contract: declaratives over transitive,
intransitive-phrasal, ditransitive, particle and PP-complement verbs,
copulas with predicative adjectives, adjectival modification, passives with
optional by-phrases, wh-object questions, to-infinitive complements,
prepositional gerunds, VP coordination, the here's-how cue clause, proper
names, pronouns, and definite/indefinite NPs.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from . import morph
from .kr import KBError
from .morph import MorphAnalysis
from .parsetree import ParseNode, ParseTree, write_tree

BARE_NOUNS = {"dinner"}  # mass nouns usable without a determiner
CLAUSE_PREPS = {"until", "because", "after"}  # license finite-clause objects
ABSORB = "__absorb__"  # child contributes no edge (to-infinitive marker, and)


class ParseFailure(KBError):
    def __init__(self, message, token=None):
        super().__init__(message)
        self.token = token


@dataclass(frozen=True)
class Item:
    cat: str
    start: int
    end: int
    head: int  # token index of the lexical head
    feats: tuple  # sorted (key, value) pairs
    edges: tuple  # accumulated (head, label, dep)
    analyses: tuple  # ((idx, MorphAnalysis), ...) for covered lexical heads

    def feat(self, key, default=None):
        for k, v in self.feats:
            if k == key:
                return v
        return default


def _feats(**kw):
    return tuple(sorted((k, v) for k, v in kw.items() if v is not None))


def verb_form_of(a: MorphAnalysis) -> str:
    if a.participle == "present":
        return "prespart"
    if a.participle == "past":
        return "pastpart"
    if a.tense == "past":
        return "past"
    if a.tense == "present":
        if a.person == 3 and a.number == "sg":
            return "pres3sg"
        if a.person == 1 and a.number == "sg":
            return "pres1sg"
        return "prespl"
    return "base"


def _lexical_items(i, token, analyses):
    items = []

    def add(cat, analysis, **feats):
        items.append(
            Item(cat, i, i + 1, i, _feats(**feats), (), ((i, analysis),))
        )

    for a in analyses:
        if a.pos == "v":
            add("V", a, form=verb_form_of(a), lemma=a.lemma)
        elif a.pos == "n":
            add("N", a, number=a.number or "sg", lemma=a.lemma)
        elif a.pos == "adj":
            add("ADJ", a, lemma=a.lemma)
        elif a.pos == "name":
            add("NAME", a, number="sg", person="3", gender=a.gender)
        elif a.pos == "pron":
            add("PRON", a, number=a.number, person=str(a.person), gender=a.gender)
        elif a.pos == "poss":
            add("POSS", a, gender=a.gender)
        elif a.pos == "det":
            add("DET", a, definite="def" if a.lemma == "the" else "indef")
        elif a.pos == "prep":
            add("P", a, lemma=a.lemma)
            if a.lemma == "to":
                add("TO", a)
        elif a.pos == "part":
            add("PART", a, lemma=a.lemma)
            # up/down/out/back double as prepositions in patterns like
            # "look up to"; the PART reading is the one the grammar uses
        elif a.pos == "conj":
            add("CONJ", a)
        elif a.pos == "wh":
            add("WH", a)
        elif a.pos == "marker":
            add("MARKER", a, lemma=a.lemma)
        elif a.pos == "unknown":
            # expand unknown words to open-class candidates; the shape of
            # the surface suggests inflection (see module docstring)
            surface = a.lemma.lower()
            base = MorphAnalysis(surface, "v", unknown=True)
            add("V", base, form="base", lemma=surface, unknown="yes")
            if surface.endswith("ed") and len(surface) > 3:
                for stem in {surface[:-2], surface[:-1]}:
                    past = MorphAnalysis(stem, "v", tense="past", unknown=True)
                    add("V", past, form="past", lemma=stem, unknown="yes")
            if surface.endswith("s") and len(surface) > 2:
                v3 = MorphAnalysis(
                    surface[:-1], "v", tense="present", number="sg", person=3, unknown=True
                )
                add("V", v3, form="pres3sg", lemma=surface[:-1], unknown="yes")
                npl = MorphAnalysis(surface[:-1], "n", number="pl", person=3, unknown=True)
                add("N", npl, number="pl", lemma=surface[:-1], unknown="yes")
            nsg = MorphAnalysis(surface, "n", number="sg", person=3, unknown=True)
            add("N", nsg, number="sg", lemma=surface, unknown="yes")
            adj = MorphAnalysis(surface, "adj", unknown=True)
            add("ADJ", adj, lemma=surface, unknown="yes")
    return items


# -- rule machinery -----------------------------------------------------------


@dataclass(frozen=True)
class Rule:
    name: str
    lhs: str
    rhs: tuple
    head: int
    labels: tuple  # edge label per non-head child (None at head position)
    check: object = None  # predicate over child items
    feats: object = None  # feature builder (children) -> dict


def _np_feats(children, head_item, definite):
    return {
        "number": head_item.feat("number", "sg"),
        "person": head_item.feat("person", "3"),
        "gender": head_item.feat("gender"),
        "definite": definite,
        "lemma": head_item.feat("lemma"),
    }


def _not_be_have(ch):
    return ch[0].feat("lemma") not in ("be", "have", "do")


def _is_be(item):
    return item.feat("lemma") == "be"


def _finite_agree(np, vp):
    form = vp.feat("form")
    person = np.feat("person")
    number = np.feat("number")
    if form in ("past", "pastpl"):
        return True
    if form == "pres3sg":
        return person == "3" and number == "sg"
    if form == "pres1sg":
        return person == "1"
    if form == "prespl":
        return person == "2" or number == "pl"
    if form == "base":
        return person in ("1", "2") or number == "pl"
    return False


def _gerund(vp):
    return vp.feat("form") == "prespart" and not vp.feat("aux")


RULES = [
    # noun phrases
    Rule("np-det-n", "NP", ("DET", "N"), 1, ("det", None),
         feats=lambda ch: _np_feats(ch, ch[1], ch[0].feat("definite"))),
    Rule("np-det-adj-n", "NP", ("DET", "ADJ", "N"), 2, ("det", "mod", None),
         feats=lambda ch: _np_feats(ch, ch[2], ch[0].feat("definite"))),
    Rule("np-poss-n", "NP", ("POSS", "N"), 1, ("det", None),
         feats=lambda ch: _np_feats(ch, ch[1], "poss")),
    Rule("np-name", "NP", ("NAME",), 0, (None,),
         feats=lambda ch: _np_feats(ch, ch[0], "name")),
    Rule("np-pron", "NP", ("PRON",), 0, (None,),
         feats=lambda ch: _np_feats(ch, ch[0], "pron")),
    Rule("np-bare", "NP", ("N",), 0, (None,),
         check=lambda ch: ch[0].feat("number") == "pl" or ch[0].feat("lemma") in BARE_NOUNS,
         feats=lambda ch: _np_feats(ch, ch[0], "bare")),
    Rule("np-gerund", "NP", ("VP",), 0, (None,),
         check=lambda ch: _gerund(ch[0]),
         feats=lambda ch: {"number": "sg", "person": "3", "definite": "gerund"}),
    # verb phrases
    Rule("vp-trans", "VP", ("V", "NP"), 0, (None, "directobject"), check=_not_be_have,
         feats=lambda ch: {"form": ch[0].feat("form"), "lemma": ch[0].feat("lemma")}),
    Rule("vp-ditrans", "VP", ("V", "NP", "NP"), 0, (None, "indirectobject", "directobject"),
         check=_not_be_have,
         feats=lambda ch: {"form": ch[0].feat("form"), "lemma": ch[0].feat("lemma")}),
    Rule("vp-part", "VP", ("V", "NP", "PART"), 0, (None, "directobject", "part"),
         check=_not_be_have,
         feats=lambda ch: {"form": ch[0].feat("form"), "lemma": ch[0].feat("lemma")}),
    Rule("vp-part-pp", "VP", ("V", "PART", "PP"), 0, (None, "part", "pp"), check=_not_be_have,
         feats=lambda ch: {"form": ch[0].feat("form"), "lemma": ch[0].feat("lemma")}),
    Rule("vp-trans-pp", "VP", ("V", "NP", "PP"), 0, (None, "directobject", "pp"),
         check=lambda ch: _not_be_have(ch) and not (
             ch[2].feat("by") and ch[0].feat("form") != "pastpart"),
         feats=lambda ch: {"form": ch[0].feat("form"), "lemma": ch[0].feat("lemma")}),
    Rule("vp-pp", "VP", ("V", "PP"), 0, (None, "pp"),
         check=lambda ch: _not_be_have(ch) and not (
             ch[1].feat("by") and ch[0].feat("form") != "pastpart"),
         feats=lambda ch: {"form": ch[0].feat("form"), "lemma": ch[0].feat("lemma")}),
    Rule("vp-xcomp", "VP", ("V", "TO", "VP"), 0, (None, ABSORB, "xcomp"),
         check=lambda ch: ch[0].feat("lemma") not in ("be", "do")
         and ch[2].feat("form") == "base" and not ch[2].feat("aux"),
         feats=lambda ch: {"form": ch[0].feat("form"), "lemma": ch[0].feat("lemma")}),
    Rule("vp-copular", "VP", ("V", "ADJ"), 0, (None, "predicative"),
         check=lambda ch: _is_be(ch[0]),
         feats=lambda ch: {"form": ch[0].feat("form"), "lemma": "be"}),
    Rule("vp-progressive", "VP", ("V", "VP"), 1, ("aux", None),
         check=lambda ch: _is_be(ch[0]) and ch[1].feat("form") == "prespart"
         and not ch[1].feat("aux"),
         feats=lambda ch: {"form": ch[0].feat("form"), "aux": "be",
                           "aspect": "progressive", "lemma": ch[1].feat("lemma")}),
    Rule("vp-passive", "VP", ("V", "VP"), 1, ("aux", None),
         check=lambda ch: _is_be(ch[0]) and ch[1].feat("form") == "pastpart"
         and not ch[1].feat("aux"),
         feats=lambda ch: {"form": ch[0].feat("form"), "aux": "be",
                           "passive": "yes", "lemma": ch[1].feat("lemma")}),
    Rule("vp-adjunct", "VP", ("VP", "PP"), 0, (None, "pp"),
         check=lambda ch: not ch[1].feat("by"),
         feats=lambda ch: dict(ch[0].feats)),
    Rule("vp-coord", "VP", ("VP", "CONJ", "VP"), 0, (None, ABSORB, None),
         check=lambda ch: ch[0].feat("form") == ch[2].feat("form")
         and not ch[0].feat("aux") and not ch[2].feat("aux"),
         feats=lambda ch: dict(ch[0].feats)),
    # prepositional phrases
    Rule("pp-np", "PP", ("P", "NP"), 0, (None, "obj"),
         feats=lambda ch: {"lemma": ch[0].feat("lemma"),
                           "by": "yes" if ch[0].feat("lemma") == "by" else None}),
    Rule("pp-gerund", "PP", ("P", "VP"), 0, (None, "obj"),
         check=lambda ch: ch[0].feat("lemma") != "by" and _gerund(ch[1]),
         feats=lambda ch: {"lemma": ch[0].feat("lemma")}),
    Rule("pp-clause", "PP", ("P", "S"), 0, (None, "obj"),
         check=lambda ch: ch[0].feat("lemma") in CLAUSE_PREPS,
         feats=lambda ch: {"lemma": ch[0].feat("lemma")}),
    # clauses
    Rule("s-decl", "S", ("NP", "VP"), 1, ("subject", None),
         check=lambda ch: _finite_agree(ch[0], ch[1]),
         feats=lambda ch: dict(ch[1].feats)),
    Rule("s-imperative", "S", ("VP",), 0, (None,),
         check=lambda ch: ch[0].feat("form") == "base" and not ch[0].feat("aux")
         and not ch[0].feat("unknown_head"),
         feats=lambda ch: {"imperative": "yes", "form": "base"}),
    Rule("s-wh-passive", "S", ("WH", "V", "NP", "V"), 3,
         ("wh-focus", "aux", "subject", None),
         check=lambda ch: _is_be(ch[1]) and ch[1].feat("form") in ("past", "pres3sg")
         and ch[3].feat("form") == "pastpart",
         feats=lambda ch: {"interrogative": "yes", "passive": "yes",
                           "form": ch[1].feat("form")}),
    Rule("s-wh-passive-by", "S", ("WH", "V", "NP", "V", "PP"), 3,
         ("wh-focus", "aux", "subject", None, "by-agent"),
         check=lambda ch: _is_be(ch[1]) and ch[3].feat("form") == "pastpart"
         and ch[4].feat("by"),
         feats=lambda ch: {"interrogative": "yes", "passive": "yes",
                           "form": ch[1].feat("form")}),
    Rule("s-wh-active", "S", ("WH", "V", "NP", "V"), 3,
         ("wh-focus", "aux", "subject", None),
         check=lambda ch: ch[1].feat("lemma") == "do" and ch[3].feat("form") == "base",
         feats=lambda ch: {"interrogative": "yes", "form": ch[1].feat("form")}),
    Rule("s-wh-active-iobj", "S", ("WH", "V", "NP", "V", "NP"), 3,
         ("wh-focus", "aux", "subject", None, "indirectobject"),
         check=lambda ch: ch[1].feat("lemma") == "do" and ch[3].feat("form") == "base",
         feats=lambda ch: {"interrogative": "yes", "form": ch[1].feat("form")}),
    Rule("s-cue", "S", ("MARKER", "V", "MARKER", "S"), 1,
         ("marker", None, "marker", "xcomp"),
         check=lambda ch: ch[0].feat("lemma") == "here" and _is_be(ch[1])
         and ch[2].feat("lemma") == "how" and not ch[3].feat("imperative"),
         feats=lambda ch: {"form": ch[1].feat("form"), "cue": "yes"}),
]

_RULES_BY_LHS = {}
for _r in RULES:
    _RULES_BY_LHS.setdefault(_r.lhs, []).append(_r)


def apply_rule(rule: Rule, children) -> Item | None:
    """One grammar-rule application: feature check, edge building, by-phrase
    collapse. Shared by the parser and by exhaustive test enumerations."""
    if rule.check and not rule.check(children):
        return None
    head_item = children[rule.head]
    edges = []
    analyses = []
    for child in children:
        edges.extend(child.edges)
        analyses.extend(child.analyses)
    for pos, child in enumerate(children):
        if pos == rule.head:
            continue
        label = rule.labels[pos]
        if label == ABSORB:
            analyses = [a for a in analyses if a[0] != child.head]
            continue
        if label is None:  # coordination sibling
            edges.append((head_item.head, "conj", child.head))
            continue
        if label == "pp" and child.feat("by") and head_item.feat("form") == "pastpart":
            label = "by-agent"
        if label == "by-agent":
            # the by-phrase marks the agent; link its NP directly
            obj = next(
                (d for h, lab, d in child.edges if h == child.head and lab == "obj"),
                None,
            )
            if obj is None:
                return None
            edges = [e for e in edges if e != (child.head, "obj", obj)]
            analyses = [a for a in analyses if a[0] != child.head]
            edges.append((head_item.head, "by-agent", obj))
            continue
        edges.append((head_item.head, label, child.head))
    feats = rule.feats(children) if rule.feats else {}
    feats = {k: v for k, v in feats.items() if v is not None}
    if rule.lhs == "VP" and children[rule.head].cat == "V":
        if children[rule.head].feat("unknown") == "yes":
            feats["unknown_head"] = "yes"
    if rule.lhs == "VP" and children[rule.head].cat == "VP":
        if children[rule.head].feat("unknown_head"):
            feats["unknown_head"] = "yes"
    start = min(c.start for c in children)
    end = max(c.end for c in children)
    return Item(
        rule.lhs,
        start,
        end,
        head_item.head,
        _feats(**feats),
        tuple(sorted(set(edges))),
        tuple(sorted(set(analyses))),
    )


class _Chart:
    def __init__(self, tokens, analyses_per_token):
        self.tokens = tokens
        self.n = len(tokens)
        self.lexical = {}
        for i, (tok, analyses) in enumerate(zip(tokens, analyses_per_token)):
            for item in _lexical_items(i, tok, analyses):
                self.lexical.setdefault((item.cat, i), []).append(item)
        self.memo = {}

    def parse(self, cat, i, j):
        key = (cat, i, j)
        if key in self.memo:
            return self.memo[key]
        self.memo[key] = []  # block runaway recursion; filled below
        results = []
        if j == i + 1:
            results.extend(self.lexical.get((cat, i), []))
        for rule in _RULES_BY_LHS.get(cat, []):
            k = len(rule.rhs)
            if k == 1:
                for child in self.parse(rule.rhs[0], i, j):
                    self._apply(rule, (child,), results)
            else:
                for splits in self._splits(i, j, k):
                    children_lists = [
                        self.parse(sym, a, b)
                        for sym, (a, b) in zip(rule.rhs, splits)
                    ]
                    if any(not c for c in children_lists):
                        continue
                    for children in product(*children_lists):
                        self._apply(rule, children, results)
        # dedupe identical items
        seen = set()
        uniq = []
        for item in results:
            sig = (item.cat, item.feats, item.edges, item.head, item.analyses)
            if sig not in seen:
                seen.add(sig)
                uniq.append(item)
        self.memo[key] = uniq
        return uniq

    def _splits(self, i, j, k):
        def rec(start, parts_left):
            if parts_left == 1:
                yield [(start, j)]
                return
            for mid in range(start + 1, j - parts_left + 2):
                for rest in rec(mid, parts_left - 1):
                    yield [(start, mid)] + rest

        return rec(i, k)

    def _apply(self, rule, children, results):
        item = apply_rule(rule, children)
        if item is not None:
            results.append(item)


def _item_to_tree(item, tokens, text):
    nodes = {}
    for idx, analysis in item.analyses:
        nodes[idx] = ParseNode(idx, analysis, tokens[idx])
    return ParseTree(nodes, list(item.edges), item.head, text)


def _attachment_rank(tree: ParseTree):
    """Lower (deeper) PP attachment is preferred; deterministic tie-break."""
    depth = {tree.root: 0}
    frontier = [tree.root]
    while frontier:
        nxt = []
        for h in frontier:
            for _, d in tree.dependents(h):
                if d not in depth:
                    depth[d] = depth[h] + 1
                    nxt.append(d)
        frontier = nxt
    pp_depth = sum(depth.get(h, 0) for h, label, _ in tree.edges if label == "pp")
    return (-pp_depth, write_tree(tree))


def parse(text, lexicon):
    """All trees of one sentence licensed by the controlled grammar, ranked
    by the fixed attachment-preference order (PP-low first)."""
    tokens = morph.tokenize(text, lexicon.multiwords)
    sentences = morph.split_sentences(tokens)
    if len(sentences) != 1:
        raise ParseFailure("parse expects exactly one sentence")
    return parse_tokens(sentences[0], lexicon, text)


def parse_tokens(sentence_tokens, lexicon, text=""):
    terminator = None
    tokens = []
    for t in sentence_tokens:
        if t.surface in morph.SENT_END:
            terminator = t.surface
        elif t.surface == ",":
            continue
        else:
            tokens.append(t)
    if not tokens:
        return []
    analyses = [morph.analyze(t, lexicon) for t in tokens]
    chart = _Chart(tokens, analyses)
    items = chart.parse("S", 0, len(tokens))
    want_question = terminator == "?"
    trees = []
    seen = set()
    for item in items:
        tree = _item_to_tree(item, tokens, text)
        if tree.interrogative != want_question:
            continue
        sig = tree.signature()
        if sig not in seen:
            seen.add(sig)
            trees.append(tree)
    if not trees:
        raise ParseFailure(*_diagnose(chart, tokens))
    trees.sort(key=_attachment_rank)
    return trees


def _diagnose(chart, tokens):
    """Name the first token the grammar could not work into a parse."""
    # an imperative headed by an unknown word is the classic failure
    full = chart.memo.get(("VP", 0, len(tokens)), [])
    for item in full:
        if item.feat("unknown_head") and item.feat("form") == "base":
            idx = item.head
            return (
                f"cannot parse: unknown word {tokens[idx].surface!r}",
                tokens[idx],
            )
    reach = 1
    for j in range(len(tokens), 0, -1):
        if any(chart.memo.get((cat, 0, j)) for cat in ("S", "VP", "NP", "PP")):
            reach = j
            break
    idx = min(reach, len(tokens) - 1)
    return (f"cannot parse at token {tokens[idx].surface!r}", tokens[idx])
