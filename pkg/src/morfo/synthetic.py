"""Template-grammar Greek corpus with gold fine tags, UPOS, morphology and entities.

The generator stands in for a licensed newspaper corpus. Fine tags start with
a two-letter POS code (``No`` noun, ``Vb`` verb, ...) followed by feature
codes, e.g. ``NoFeSgGe`` is a feminine singular genitive noun. The bundled
tag map (``data/tag_map.json``) covers every tag the grammar emits.
"""

from __future__ import annotations

import json
import math
from functools import lru_cache
from importlib import resources

import numpy as np

from morfo.corpus import Corpus, Sentence, TagMap, Token, tag_map_from_dict
from morfo.features import fnv1a_64
from morfo.vectors import VectorTable, char_ngrams

GENDERS = {"Ma": "Masc", "Fe": "Fem", "Ne": "Neut"}
NUMBERS = {"Sg": "Sing", "Pl": "Plur"}
CASES = {"Nm": "Nom", "Ge": "Gen", "Ac": "Acc"}
TENSES = {"Pr": "Pres", "Pa": "Past"}

NOMINAL_PREFIX = {"NOUN": "No", "PROPN": "Np", "ADJ": "Aj", "DET": "At", "PRON": "Pn", "ADP": "As"}
SLOTS = [(n, c) for n in NUMBERS for c in CASES]  # Sg Nm, Sg Ge, Sg Ac, Pl Nm, Pl Ge, Pl Ac

PARADIGMS = {
    "os": ("ος", "ου", "ο", "οι", "ων", "ους"),
    "os'": ("ός", "ού", "ό", "οί", "ών", "ούς"),
    "as": ("ας", "α", "α", "ες", "ων", "ες"),
    "a": ("α", "ας", "α", "ες", "ων", "ες"),
    "h'": ("ή", "ής", "ή", "ές", "ών", "ές"),
    "o": ("ο", "ου", "ο", "α", "ων", "α"),
    "o'": ("ό", "ού", "ό", "ά", "ών", "ά"),
    "i'": ("ί", "ιού", "ί", "ιά", "ιών", "ιά"),
    "h": ("η", "ης", "η", "ες", "ων", "ες"),
}
ADJ_PARADIGMS = {"os": ("os", "h", "o"), "os'": ("os'", "h'", "o'")}

NOUNS = [
    ("δρόμ", "os", "Ma"), ("φίλ", "os", "Ma"), ("κόσμ", "os", "Ma"), ("νόμ", "os", "Ma"),
    ("στόχ", "os", "Ma"), ("χρόν", "os", "Ma"), ("υπουργ", "os'", "Ma"), ("λα", "os'", "Ma"),
    ("σταθμ", "os'", "Ma"), ("ουραν", "os'", "Ma"), ("αγών", "as", "Ma"), ("χειμών", "as", "Ma"),
    ("αιών", "as", "Ma"), ("εφημερίδ", "a", "Fe"), ("ελπίδ", "a", "Fe"), ("ομάδ", "a", "Fe"),
    ("εβδομάδ", "a", "Fe"), ("πατρίδ", "a", "Fe"), ("φων", "h'", "Fe"), ("αρχ", "h'", "Fe"),
    ("ζω", "h'", "Fe"), ("τιμ", "h'", "Fe"), ("ψυχ", "h'", "Fe"), ("βιβλί", "o", "Ne"),
    ("σχολεί", "o", "Ne"), ("γραφεί", "o", "Ne"), ("μουσεί", "o", "Ne"), ("νοσοκομεί", "o", "Ne"),
    ("ποσοστ", "o'", "Ne"), ("νερ", "o'", "Ne"), ("μωρ", "o'", "Ne"), ("παιδ", "i'", "Ne"),
    ("κλειδ", "i'", "Ne"), ("νησ", "i'", "Ne"), ("χαρτ", "i'", "Ne"),
]
ADJECTIVES = [
    ("μεγάλ", "os"), ("σημαντικ", "os'"), ("ελληνικ", "os'"), ("μικρ", "os'"),
    ("δημοτικ", "os'"), ("οικονομικ", "os'"),
]
# present stem, past 3sg, past 3pl, past 1sg
VERBS = [
    ("γράφ", "έγραψε", "έγραψαν", "έγραψα"),
    ("διαβάζ", "διάβασε", "διάβασαν", "διάβασα"),
    ("ανακοινών", "ανακοίνωσε", "ανακοίνωσαν", "ανακοίνωσα"),
    ("στηρίζ", "στήριξε", "στήριξαν", "στήριξα"),
    ("αλλάζ", "άλλαξε", "άλλαξαν", "άλλαξα"),
    ("χάν", "έχασε", "έχασαν", "έχασα"),
    ("κερδίζ", "κέρδισε", "κέρδισαν", "κέρδισα"),
    ("οργανών", "οργάνωσε", "οργάνωσαν", "οργάνωσα"),
    ("ετοιμάζ", "ετοίμασε", "ετοίμασαν", "ετοίμασα"),
    ("παρουσιάζ", "παρουσίασε", "παρουσίασαν", "παρουσίασα"),
    ("δημοσιεύ", "δημοσίευσε", "δημοσίευσαν", "δημοσίευσα"),
    ("κλείν", "έκλεισε", "έκλεισαν", "έκλεισα"),
]
PRESENT_ENDINGS = {("1", "Sg"): "ω", ("2", "Sg"): "εις", ("3", "Sg"): "ει",
                   ("1", "Pl"): "ουμε", ("2", "Pl"): "ετε", ("3", "Pl"): "ουν"}

ARTICLES = {
    "Ma": ("ο", "του", "τον", "οι", "των", "τους"),
    "Fe": ("η", "της", "την", "οι", "των", "τις"),
    "Ne": ("το", "του", "το", "τα", "των", "τα"),
}
FUSED_ADP = {"Ma": {"Sg": "στον", "Pl": "στους"}, "Fe": {"Sg": "στην", "Pl": "στις"},
             "Ne": {"Sg": "στο", "Pl": "στα"}}
CLASS_PREFIX_FIXED = {
    "ADV": "AdBa", "CCONJ": "CjCo", "SCONJ": "CsSb", "NUM": "NmCd", "PUNCT": "PuPu",
    "SYM": "SySy", "INTJ": "IjIj", "X": "RgFw", "ADP": "AsPp",
}

# entity parts: ("infl", upos, gender, (nom, gen, acc)) follows the head case;
# ("fixed", upos, gender, case, form) never changes
ENTITIES = {
    "PERSON": [
        ("Ma", [("infl", "PROPN", "Ma", ("Γιάννης", "Γιάννη", "Γιάννη")),
                ("infl", "PROPN", "Ma", ("Παπαδόπουλος", "Παπαδόπουλου", "Παπαδόπουλο"))]),
        ("Ma", [("infl", "PROPN", "Ma", ("Νίκος", "Νίκου", "Νίκο")),
                ("infl", "PROPN", "Ma", ("Γεωργίου", "Γεωργίου", "Γεωργίου"))]),
        ("Ma", [("infl", "PROPN", "Ma", ("Κώστας", "Κώστα", "Κώστα"))]),
        ("Fe", [("infl", "PROPN", "Fe", ("Μαρία", "Μαρίας", "Μαρία")),
                ("infl", "PROPN", "Fe", ("Παπαδοπούλου", "Παπαδοπούλου", "Παπαδοπούλου"))]),
        ("Fe", [("infl", "PROPN", "Fe", ("Ελένη", "Ελένης", "Ελένη")),
                ("infl", "PROPN", "Fe", ("Οικονόμου", "Οικονόμου", "Οικονόμου"))]),
    ],
    "LOC": [
        ("Fe", [("infl", "PROPN", "Fe", ("Αθήνα", "Αθήνας", "Αθήνα"))]),
        ("Fe", [("infl", "PROPN", "Fe", ("Θεσσαλονίκη", "Θεσσαλονίκης", "Θεσσαλονίκη"))]),
        ("Fe", [("infl", "PROPN", "Fe", ("Ελλάδα", "Ελλάδας", "Ελλάδα"))]),
        ("Fe", [("infl", "PROPN", "Fe", ("Κρήτη", "Κρήτης", "Κρήτη"))]),
        ("Ma", [("infl", "PROPN", "Ma", ("Πειραιάς", "Πειραιά", "Πειραιά"))]),
        ("Fe", [("infl", "ADJ", "Fe", ("Νέα", "Νέας", "Νέα")),
                ("infl", "PROPN", "Fe", ("Υόρκη", "Υόρκης", "Υόρκη"))]),
    ],
    "ORG": [
        ("Ma", [("infl", "NOUN", "Ma", ("Δήμος", "Δήμου", "Δήμο")),
                ("fixed", "PROPN", "Fe", "Ge", "Θεσσαλονίκης")]),
        ("Fe", [("infl", "ADJ", "Fe", ("Ευρωπαϊκή", "Ευρωπαϊκής", "Ευρωπαϊκή")),
                ("infl", "NOUN", "Fe", ("Ένωση", "Ένωσης", "Ένωση"))]),
        ("Ne", [("infl", "NOUN", "Ne", ("Πανεπιστήμιο", "Πανεπιστημίου", "Πανεπιστήμιο")),
                ("fixed", "PROPN", "Fe", "Ge", "Μακεδονίας")]),
        ("Ma", [("infl", "PROPN", "Ma", ("Ολυμπιακός", "Ολυμπιακού", "Ολυμπιακό"))]),
        ("Fe", [("infl", "PROPN", "Fe", ("Βουλή", "Βουλής", "Βουλή"))]),
    ],
    "FAC": [
        ("Ma", [("infl", "ADJ", "Ma", ("Λευκός", "Λευκού", "Λευκό")),
                ("infl", "PROPN", "Ma", ("Πύργος", "Πύργου", "Πύργο"))]),
        ("Fe", [("infl", "PROPN", "Fe", ("Ακρόπολη", "Ακρόπολης", "Ακρόπολη"))]),
        ("Ne", [("infl", "NOUN", "Ne", ("Αεροδρόμιο", "Αεροδρομίου", "Αεροδρόμιο")),
                ("fixed", "PROPN", "Fe", "Nm", "Μακεδονία")]),
        ("Ne", [("infl", "NOUN", "Ne", ("Μέγαρο", "Μεγάρου", "Μέγαρο")),
                ("fixed", "NOUN", "Fe", "Ge", "Μουσικής")]),
    ],
}
ADVERBS = ["σήμερα", "χθες", "αύριο", "τελικά"]
PLAIN_ADP = ["από", "για", "με"]


def nominal_tag(upos, gender, number, case):
    morph = {"Gender": GENDERS[gender], "Number": NUMBERS[number], "Case": CASES[case]}
    if upos == "ADJ":
        morph["Degree"] = "Pos"
    return NOMINAL_PREFIX[upos] + gender + number + case, morph


def verb_tag(tense, person, number):
    morph = {"Tense": TENSES[tense], "Person": person, "Number": NUMBERS[number],
             "Mood": "Ind", "Voice": "Act"}
    return f"Vb{tense}{person}{number}", morph


def pron_tag(person, number, case, gender=None):
    morph = {"Person": person, "Number": NUMBERS[number], "Case": CASES[case]}
    if gender:
        morph["Gender"] = GENDERS[gender]
    return f"Pn{gender or 'Xx'}{person}{number}{case}", morph


def build_tag_map_dict() -> dict:
    """Every fine tag the grammar can emit, plus the full nominal/verbal grid."""
    raw = {}
    for upos in NOMINAL_PREFIX:
        if upos == "PRON":
            continue
        for g in GENDERS:
            for n in NUMBERS:
                for c in CASES:
                    tag, morph = nominal_tag(upos, g, n, c)
                    raw[tag] = {"pos": upos, "morph": morph}
    for g in [None, *GENDERS]:
        for p in ("1", "2", "3"):
            for n in NUMBERS:
                for c in CASES:
                    tag, morph = pron_tag(p, n, c, g)
                    raw[tag] = {"pos": "PRON", "morph": morph}
    for t in TENSES:
        for p in ("1", "2", "3"):
            for n in NUMBERS:
                tag, morph = verb_tag(t, p, n)
                raw[tag] = {"pos": "VERB", "morph": morph}
    for upos, tag in CLASS_PREFIX_FIXED.items():
        raw[tag] = {"pos": upos, "morph": {"Degree": "Pos"} if upos == "ADV" else {}}
    raw["PtFu"] = {"pos": "PART", "morph": {}}
    raw["PtNg"] = {"pos": "PART", "morph": {}}
    return dict(sorted(raw.items()))


@lru_cache(maxsize=1)
def bundled_tag_map() -> TagMap:
    text = resources.files("morfo").joinpath("data/tag_map.json").read_text(encoding="utf-8")
    return tag_map_from_dict(json.loads(text))


def bundled_tag_map_path():
    return resources.files("morfo").joinpath("data/tag_map.json")


# -- lexicon ---------------------------------------------------------------------

def lemma_keys() -> list[str]:
    """Identifiers of the open-class lemmas eligible for OOV reservation."""
    return ([f"N:{stem}" for stem, _, _ in NOUNS] + [f"A:{stem}" for stem, _ in ADJECTIVES]
            + [f"V:{v[0]}" for v in VERBS])


def reserved_lemmas(seed: int) -> set[str]:
    keys = lemma_keys()
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x0F0F]))
    n = round(0.2 * len(keys))
    return {keys[i] for i in rng.choice(len(keys), size=n, replace=False)}


def _noun_forms(stem, paradigm):
    return [stem + e for e in PARADIGMS[paradigm]]


def lemma_tagged_forms(key: str) -> list[tuple[str, str]]:
    """``(form, fine_tag)`` for every inflected form of an open-class lemma."""
    kind, stem = key.split(":", 1)
    if kind == "N":
        paradigm, gender = next((p, g) for s, p, g in NOUNS if s == stem)
        return [(stem + e, nominal_tag("NOUN", gender, n, c)[0])
                for e, (n, c) in zip(PARADIGMS[paradigm], SLOTS)]
    if kind == "A":
        paradigm = next(p for s, p in ADJECTIVES if s == stem)
        return [(stem + e, nominal_tag("ADJ", g, n, c)[0])
                for g, gp in zip(GENDERS, ADJ_PARADIGMS[paradigm])
                for e, (n, c) in zip(PARADIGMS[gp], SLOTS)]
    verb = next(v for v in VERBS if v[0] == stem)
    out = [(stem + e, verb_tag("Pr", p, n)[0]) for (p, n), e in PRESENT_ENDINGS.items()]
    out += [(verb[1], verb_tag("Pa", "3", "Sg")[0]), (verb[2], verb_tag("Pa", "3", "Pl")[0]),
            (verb[3], verb_tag("Pa", "1", "Sg")[0]), (verb[1] + "ς", verb_tag("Pa", "2", "Sg")[0])]
    return out


def lemma_forms(key: str) -> list[str]:
    return [form for form, _ in lemma_tagged_forms(key)]


def closed_class_forms() -> list[str]:
    forms = [f for arts in ARTICLES.values() for f in arts]
    forms += [f for d in FUSED_ADP.values() for f in d.values()]
    forms += ADVERBS + PLAIN_ADP + ["και", "ότι", "θα", "δεν", "εγώ", "εσύ", "αυτός", "αυτή",
                                    "αύξηση", "μέσω", "μπράβο"]
    for entities in ENTITIES.values():
        for _, parts in entities:
            for part in parts:
                forms.extend(part[3] if part[0] == "infl" else [part[4]])
    return forms


# -- generation ------------------------------------------------------------------

class _Grammar:
    def __init__(self, rng, allowed: set[str]):
        self.rng = rng
        self.nouns = [n for n in NOUNS if f"N:{n[0]}" in allowed]
        self.adjs = [a for a in ADJECTIVES if f"A:{a[0]}" in allowed]
        self.verbs = [v for v in VERBS if f"V:{v[0]}" in allowed]

    def pick(self, seq):
        return seq[int(self.rng.integers(len(seq)))]

    def chance(self, p):
        return self.rng.random() < p

    @staticmethod
    def tok(form, tag, upos, morph, entity="O"):
        return Token(form, tag, upos, morph, entity)

    def article(self, gender, number, case):
        form = ARTICLES[gender][SLOTS.index((number, case))]
        tag, morph = nominal_tag("DET", gender, number, case)
        return self.tok(form, tag, "DET", morph)

    def common_np(self, case, number=None, article=True):
        stem, paradigm, gender = self.pick(self.nouns)
        number = number or ("Sg" if self.chance(0.65) else "Pl")
        slot = SLOTS.index((number, case))
        out = [self.article(gender, number, case)] if article else []
        if self.adjs and self.chance(0.3):
            astem, apar = self.pick(self.adjs)
            gpar = ADJ_PARADIGMS[apar][list(GENDERS).index(gender)]
            tag, morph = nominal_tag("ADJ", gender, number, case)
            out.append(self.tok(astem + PARADIGMS[gpar][slot], tag, "ADJ", morph))
        tag, morph = nominal_tag("NOUN", gender, number, case)
        out.append(self.tok(stem + PARADIGMS[paradigm][slot], tag, "NOUN", morph))
        return out, gender, number

    def entity(self, cls, case):
        gender, parts = self.pick(ENTITIES[cls])
        ci = list(CASES).index(case)
        toks = []
        for part in parts:
            if part[0] == "infl":
                _, upos, g, forms = part
                form, c = forms[ci], case
            else:
                _, upos, g, c, form = part
            tag, morph = nominal_tag(upos, g, "Sg", c)
            toks.append([form, tag, upos, morph])
        n = len(toks)
        labels = [f"U-{cls}"] if n == 1 else [f"B-{cls}"] + [f"I-{cls}"] * (n - 2) + [f"L-{cls}"]
        return [self.tok(f, t, u, m, lab) for (f, t, u, m), lab in zip(toks, labels)], gender

    def np(self, case, entity_p=0.35, classes=("PERSON", "ORG", "LOC", "FAC")):
        if self.chance(entity_p):
            toks, gender = self.entity(self.pick(classes), case)
            return [self.article(gender, "Sg", case)] + toks, gender, "Sg"
        return self.common_np(case)

    def verb(self, person, number, tense=None, stem=None):
        v = self.pick(self.verbs) if stem is None else stem
        tense = tense or ("Pr" if self.chance(0.5) else "Pa")
        if tense == "Pr":
            form = v[0] + PRESENT_ENDINGS[(person, number)]
        elif person == "1":
            form = v[3]
        elif person == "2":
            form = v[1] + "ς"
        else:
            form = v[1] if number == "Sg" else v[2]
        tag, morph = verb_tag(tense, person, number)
        return self.tok(form, tag, "VERB", morph)

    def fixed(self, form, upos):
        tag = CLASS_PREFIX_FIXED[upos]
        return self.tok(form, tag, upos, {"Degree": "Pos"} if upos == "ADV" else {})

    def punct(self, form="."):
        return self.fixed(form, "PUNCT")

    def pp(self):
        if self.chance(0.5):
            if self.chance(0.6):
                toks, gender = self.entity(self.pick(("LOC", "FAC", "ORG")), "Ac")
                number = "Sg"
            else:
                toks, gender, number = self.common_np("Ac", article=False)
            tag, morph = nominal_tag("ADP", gender, number, "Ac")
            return [self.tok(FUSED_ADP[gender][number], tag, "ADP", morph)] + toks
        return [self.fixed(self.pick(PLAIN_ADP), "ADP")] + self.np("Ac")[0]

    def genitive(self):
        if self.chance(0.5):
            toks, gender = self.entity(self.pick(("LOC", "ORG", "PERSON")), "Ge")
            return [self.article(gender, "Sg", "Ge")] + toks
        toks, gender, number = self.common_np("Ge")
        return toks

    def clause(self):
        subj, _, number = self.np("Nm")
        return subj, number

    def sentence(self) -> list[Token]:
        kind = int(self.rng.integers(10))
        if kind == 0:
            subj, n = self.clause()
            out = subj + [self.verb("3", n)] + self.np("Ac")[0]
            if self.chance(0.6):
                out += self.pp()
        elif kind == 1:
            out = []
            if self.chance(0.5):
                out += [self.fixed(self.pick(ADVERBS), "ADV"), self.punct(",")]
            subj, n = self.clause()
            out += subj + [self.tok("δεν", "PtNg", "PART", {}), self.verb("3", n)] + self.np("Ac")[0]
        elif kind == 2:
            subj, n = self.clause()
            subj2, n2 = self.clause()
            out = (subj + [self.verb("3", n), self.fixed("ότι", "SCONJ")] + subj2
                   + [self.tok("θα", "PtFu", "PART", {}), self.verb("3", n2, "Pr")] + self.np("Ac")[0])
        elif kind == 3:
            subj, n = self.clause()
            out = (subj + [self.verb("3", n)] + self.np("Ac")[0] + [self.fixed("και", "CCONJ")]
                   + self.np("Ac")[0])
        elif kind == 4:
            subj, n = self.clause()
            out = subj + [self.verb("3", n)] + self.common_np("Ac")[0] + self.genitive()
        elif kind == 5:
            subj, n = self.clause()
            tag, morph = pron_tag("3", "Sg", "Ac", "Ne")
            out = subj + [self.tok("το", tag, "PRON", morph), self.verb("3", n)]
            if self.chance(0.5):
                out += [self.fixed(self.pick(ADVERBS), "ADV")]
        elif kind == 6:
            subj, n = self.clause()
            tag, morph = nominal_tag("NOUN", "Fe", "Sg", "Ac")
            number = str(int(self.rng.integers(2, 60)))
            out = subj + [self.verb("3", n), self.tok("αύξηση", tag, "NOUN", morph),
                          self.fixed(number, "NUM"), self.fixed("%", "SYM")]
        elif kind == 7:
            subj, n = self.clause()
            out = ([self.fixed("μπράβο", "INTJ"), self.punct(",")] + subj
                   + [self.verb("3", n)] + self.np("Ac")[0])
            out += [self.punct("!")]
            return out
        elif kind == 8:
            subj, n = self.clause()
            out = (subj + [self.verb("3", n)] + self.np("Ac")[0]
                   + [self.fixed("μέσω", "ADP"), self.fixed("internet", "X")])
        else:
            person = "1" if self.chance(0.5) else "2"
            tag, morph = pron_tag(person, "Sg", "Nm")
            pron = "εγώ" if person == "1" else "εσύ"
            out = [self.tok(pron, tag, "PRON", morph), self.verb(person, "Sg")] + self.np("Ac")[0]
            if self.chance(0.4):
                out += [self.article("Ne", "Sg", "Ac"), self.fixed(str(int(self.rng.integers(1990, 2021))), "NUM")]
        return out + [self.punct(".")]


def _capitalize(tok: Token) -> Token:
    form = tok.form[0].upper() + tok.form[1:]
    return Token(form, tok.fine_tag, tok.upos, tok.morph, tok.entity)


def generate_synthetic_corpus(n_sentences: int, seed: int, oov_split: bool = False) -> Corpus:
    """Deterministic corpus of ``n_sentences`` templated sentences.

    With ``oov_split`` the lemmas of :func:`reserved_lemmas` only occur in the
    last 30% of the sentences.
    """
    if n_sentences < 1:
        raise ValueError("n_sentences must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xC0]))
    every = set(lemma_keys())
    reserved = reserved_lemmas(seed) if oov_split else set()
    head = _Grammar(rng, every - reserved)
    tail = _Grammar(rng, every)
    cut = math.ceil(0.7 * n_sentences) if oov_split else n_sentences
    sentences = []
    for i in range(n_sentences):
        toks = (head if i < cut else tail).sentence()
        toks[0] = _capitalize(toks[0])
        sentences.append(Sentence(tuple(toks)))
    return Corpus(tuple(sentences), name=f"synthetic-{seed}")


# -- pretrained vectors --------------------------------------------------------------

def _ngram_vector(gram: str, dim: int, seed: int) -> np.ndarray:
    key = fnv1a_64(seed.to_bytes(8, "little") + gram.encode("utf-8"))
    return np.random.default_rng(key).normal(size=dim)


def synthetic_vectors(seed: int, dim: int = 32, include_reserved: bool = False) -> VectorTable:
    """Word vectors for the lowercase lexicon.

    Each open-class form mixes a component shared by all forms with the same
    fine tag (the syntactic signal distributional training picks up) with a
    component built from its character n-grams and a word-specific residue.
    Forms of :func:`reserved_lemmas` are left out so they are OOV.
    """
    keys = lemma_keys()
    if not include_reserved:
        reserved = reserved_lemmas(seed)
        keys = [k for k in keys if k not in reserved]
    tags: dict[str, list[str]] = {}
    for key in keys:
        for form, tag in lemma_tagged_forms(key):
            tags.setdefault(form.lower(), []).append(tag)
    for form in closed_class_forms():
        tags.setdefault(form.lower(), [])

    def unit(v):
        return v / np.linalg.norm(v)

    entries = {}
    for word, word_tags in tags.items():
        grams = char_ngrams(word, 3, 6)
        vec = unit(np.mean([_ngram_vector(g, dim, seed) for g in grams], axis=0))
        if word_tags:
            vec = 0.5 * vec + unit(np.mean([_ngram_vector(f"#{t}", dim, seed) for t in word_tags], axis=0))
        entries[word] = vec + 0.25 * _ngram_vector(f"<<{word}>>", dim, seed) / math.sqrt(dim)
    return VectorTable(dim, entries)
