"""Tokenization and morphological analysis/generation for the fragment.

Analysis combines an irregular-form table with regular -s/-ed/-ing rules;
generation inverts the same tables so both directions stay in sync.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

SENT_END = ".?!"
VOWELS = "aeiou"

# name -> (concept, gender); the fragment resolves gender from this closed
# table and from pronouns, never by guessing
NAMES = {
    "tony": ("HUMAN", "m"),
    "john": ("HUMAN", "m"),
    "sam": ("HUMAN", "m"),
    "harry": ("HUMAN", "m"),
    "lou": ("HUMAN", "m"),
    "phil": ("HUMAN", "m"),
    "hal": ("HUMAN", "m"),
    "mary": ("HUMAN", "f"),
    "patty": ("HUMAN", "f"),
    "spot": ("DOG", "n"),
}

# surface -> (person, number, gender, concept-or-None)
PRONOUNS = {
    "i": (1, "sg", "unknown", "HUMAN"),
    "me": (1, "sg", "unknown", "HUMAN"),
    "you": (2, "sg", "unknown", "HUMAN"),
    "he": (3, "sg", "m", "HUMAN"),
    "she": (3, "sg", "f", "HUMAN"),
    "it": (3, "sg", "n", None),
}

POSSESSIVES = {"his": "m", "her": "f", "my": "unknown", "its": "n"}

DETERMINERS = {"the": "def", "a": "indef", "an": "indef"}

PREPOSITIONS = {"to", "of", "on", "in", "from", "into", "with", "by", "before", "until", "because", "after", "at"}
PARTICLES = {"up", "down", "out", "back"}
CONJUNCTIONS = {"and"}
WH_WORDS = {"what"}
MARKER_WORDS = {"here", "how"}

# irregular verb paradigms: lemma -> {form: surface}
_IRREGULAR = {
    "be": {
        "pres1sg": "am",
        "pres3sg": "is",
        "prespl": "are",
        "past": "was",
        "pastpl": "were",
        "pastpart": "been",
        "prespart": "being",
    },
    "do": {"pres3sg": "does", "past": "did", "pastpart": "done", "prespart": "doing"},
    "have": {"pres3sg": "has", "past": "had", "pastpart": "had", "prespart": "having"},
    "give": {"past": "gave", "pastpart": "given"},
    "go": {"pres3sg": "goes", "past": "went", "pastpart": "gone"},
    "put": {"past": "put", "pastpart": "put", "prespart": "putting"},
    "feed": {"past": "fed", "pastpart": "fed"},
    "grind": {"past": "ground", "pastpart": "ground"},
    "open": {"past": "opened", "pastpart": "opened", "prespart": "opening"},
}

_CLITICS = {"'s": "be"}

_SURFACE_TO_IRREGULAR = {}
for _lemma, _forms in _IRREGULAR.items():
    for _form, _surf in _forms.items():
        _SURFACE_TO_IRREGULAR.setdefault(_surf, []).append((_lemma, _form))


@dataclass(frozen=True)
class Token:
    surface: str
    start: int
    end: int
    sent_index: int

    @property
    def lower(self):
        return self.surface.lower()


@dataclass(frozen=True)
class MorphAnalysis:
    lemma: str
    pos: str  # v | n | adj | name | pron | poss | det | prep | part | conj | wh | marker | punct | unknown
    tense: str | None = None  # past | present
    participle: str = "none"  # past | present | none
    number: str | None = None  # sg | pl
    person: int | None = None
    gender: str = "unknown"
    unknown: bool = False

    def brief(self):
        bits = [self.lemma, self.pos]
        if self.tense:
            bits.append(self.tense)
        if self.participle != "none":
            bits.append(f"{self.participle}part")
        if self.number:
            bits.append(self.number)
        return "/".join(bits)


_WORD_RE = re.compile(r"[A-Za-z]+(?:'[a-z]+)?|[0-9.]+|[.,?!]")


def tokenize(text: str, multiwords=()):
    """Whitespace/punctuation split with sentence boundaries at .?! and
    clitic detachment; known collocations merge into one token."""
    raw = []
    sent = 0
    for m in _WORD_RE.finditer(text):
        piece = m.group(0)
        start = m.start()
        if "'" in piece and piece.lower() not in _CLITICS:
            stem, _, clitic = piece.partition("'")
            raw.append(Token(stem, start, start + len(stem), sent))
            raw.append(Token("'" + clitic, start + len(stem), m.end(), sent))
        else:
            raw.append(Token(piece, start, m.end(), sent))
        if piece in SENT_END:
            sent += 1

    merged = []
    table = {tuple(mw.split()) for mw in multiwords}
    max_len = max((len(t) for t in table), default=1)
    i = 0
    while i < len(raw):
        span = 1
        for n in range(min(max_len, len(raw) - i), 1, -1):  # longest match wins
            if tuple(t.lower for t in raw[i : i + n]) in table:
                span = n
                break
        if span > 1:
            first, last = raw[i], raw[i + span - 1]
            surface = " ".join(t.surface for t in raw[i : i + span])
            merged.append(Token(surface, first.start, last.end, first.sent_index))
        else:
            merged.append(raw[i])
        i += span
    return merged


def split_sentences(tokens):
    out = []
    current = []
    for t in tokens:
        current.append(t)
        if t.surface in SENT_END:
            out.append(current)
            current = []
    if current:
        out.append(current)
    return out


def _dedouble(stem):
    if len(stem) >= 2 and stem[-1] == stem[-2] and stem[-1] not in VOWELS:
        return stem[:-1]
    return None


def _verb_candidates(surface):
    """(lemma, feature dict) candidates from regular suffix rules."""
    out = []
    w = surface
    if w.endswith("ing") and len(w) > 4:
        stems = [w[:-3], w[:-3] + "e"]
        if _dedouble(w[:-3]):
            stems.append(_dedouble(w[:-3]))
        for s in stems:
            out.append((s, {"participle": "present"}))
    if w.endswith("ed") and len(w) > 3:
        stems = [w[:-2], w[:-1]]
        if _dedouble(w[:-2]):
            stems.append(_dedouble(w[:-2]))
        for s in stems:
            out.append((s, {"tense": "past"}))
            out.append((s, {"participle": "past"}))
    if w.endswith("es") and len(w) > 3:
        out.append((w[:-2], {"tense": "present", "number": "sg", "person": 3}))
    if w.endswith("s") and not w.endswith("ss") and len(w) > 2:
        out.append((w[:-1], {"tense": "present", "number": "sg", "person": 3}))
    return out


def _noun_candidates(surface):
    out = [(surface, {"number": "sg"})]
    if surface.endswith("es") and len(surface) > 3:
        out.append((surface[:-2], {"number": "pl"}))
    if surface.endswith("s") and not surface.endswith("ss") and len(surface) > 2:
        out.append((surface[:-1], {"number": "pl"}))
    return out


def analyze(token: Token, vocab):
    """All morphological analyses of one token.

    `vocab` supplies the open-class lemma inventories (verb_lemmas,
    noun_lemmas, adj_lemmas sets). Unknown words yield a single analysis
    with lemma=surface, flagged unknown.
    """
    surface = token.surface
    low = token.lower
    out = []

    if surface in SENT_END or surface == ",":
        return [MorphAnalysis(surface, "punct")]
    if low in _CLITICS:
        return [MorphAnalysis("be", "v", tense="present", number="sg", person=3)]
    if low in DETERMINERS:
        return [MorphAnalysis(low, "det")]
    if low in POSSESSIVES:
        return [MorphAnalysis(low, "poss", gender=POSSESSIVES[low])]
    if low in PRONOUNS:
        person, number, gender, _ = PRONOUNS[low]
        return [MorphAnalysis(low, "pron", number=number, person=person, gender=gender)]
    if low in WH_WORDS:
        return [MorphAnalysis(low, "wh")]
    if low in MARKER_WORDS:
        return [MorphAnalysis(low, "marker")]
    if surface[0].isupper() and low in NAMES:
        _, gender = NAMES[low]
        return [MorphAnalysis(surface, "name", number="sg", person=3, gender=gender)]

    # irregular verb forms win over regular rules for their surfaces
    for lemma, form in _SURFACE_TO_IRREGULAR.get(low, []):
        if lemma in vocab.verb_lemmas or lemma in ("be", "do", "have"):
            feats = {
                "pres1sg": {"tense": "present", "number": "sg", "person": 1},
                "pres3sg": {"tense": "present", "number": "sg", "person": 3},
                "prespl": {"tense": "present", "number": "pl"},
                "past": {"tense": "past"},
                "pastpl": {"tense": "past", "number": "pl"},
                "pastpart": {"participle": "past"},
                "prespart": {"participle": "present"},
            }[form]
            out.append(MorphAnalysis(lemma, "v", **feats))

    if low in vocab.verb_lemmas:
        out.append(MorphAnalysis(low, "v"))  # base / non-3sg present
    for lemma, feats in _verb_candidates(low):
        if lemma not in vocab.verb_lemmas:
            continue
        # regular candidates must agree with the generator, so irregular
        # paradigms (gave, fed, ...) never pick up spurious regular twins
        form = (
            "prespart"
            if feats.get("participle") == "present"
            else "pastpart"
            if feats.get("participle") == "past"
            else "pres3sg"
            if feats.get("person") == 3
            else "past"
        )
        if verb_form(lemma, form) == low:
            out.append(MorphAnalysis(lemma, "v", **feats))
    for lemma, feats in _noun_candidates(low):
        if lemma in vocab.noun_lemmas:
            out.append(MorphAnalysis(lemma, "n", **feats, person=3))
    if low in vocab.adj_lemmas:
        out.append(MorphAnalysis(low, "adj"))
    if low in PARTICLES:
        out.append(MorphAnalysis(low, "part"))
    if low in PREPOSITIONS:
        out.append(MorphAnalysis(low, "prep"))
    if low in CONJUNCTIONS:
        out.append(MorphAnalysis(low, "conj"))

    if not out:
        return [MorphAnalysis(surface, "unknown", unknown=True)]

    # drop duplicates, keep first occurrence
    seen = set()
    uniq = []
    for a in out:
        key = (a.lemma, a.pos, a.tense, a.participle, a.number, a.person)
        if key not in seen:
            seen.add(key)
            uniq.append(a)
    return uniq


# ---------------------------------------------------------------------------
# Generation


def _double_final(stem):
    if (
        len(stem) >= 3
        and stem[-1] not in VOWELS + "wxy"
        and stem[-2] in VOWELS
        and stem[-3] not in VOWELS
    ):
        return stem + stem[-1]
    return None


def verb_form(lemma: str, form: str) -> str:
    """Inflect a verb: base | pres1sg | pres3sg | prespl | past | pastpl |
    pastpart | prespart."""
    lemma = lemma.lower()
    irr = _IRREGULAR.get(lemma, {})
    if form == "base":
        return lemma
    if form in irr:
        return irr[form]
    if form == "pastpl":
        form = "past"
        if form in irr:
            return irr[form]
    if form in ("pres1sg", "prespl"):
        return lemma
    if form == "pres3sg":
        if lemma.endswith(("s", "x", "z", "ch", "sh")):
            return lemma + "es"
        return lemma + "s"
    if form in ("past", "pastpart"):
        if lemma.endswith("e"):
            return lemma + "d"
        doubled = _double_final(lemma)
        return (doubled or lemma) + "ed"
    if form == "prespart":
        stem = lemma[:-1] if lemma.endswith("e") and not lemma.endswith(("ee", "oe", "ye")) else lemma
        doubled = _double_final(stem) if stem == lemma else None
        return (doubled or stem) + "ing"
    raise ValueError(f"unknown verb form {form!r}")


def noun_plural(lemma: str) -> str:
    if lemma.endswith(("s", "x", "z", "ch", "sh")):
        return lemma + "es"
    return lemma + "s"


def indefinite_article(noun: str) -> str:
    return "an" if noun[0].lower() in "aeiou" else "a"
