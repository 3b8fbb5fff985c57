"""Annotated corpora, the fine-tag map, and deterministic splitting.

Corpora are stored as UTF-8 TSV, one token per line::

    FORM <tab> FINE_TAG <tab> UPOS <tab> ENTITY [<tab> MORPH]

with a blank line after every sentence and ``_`` marking an absent value.
MORPH is ``Key=Value|Key=Value``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from morfo.errors import DataError

UPOS_TAGS = (
    "ADJ", "ADP", "ADV", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
)
ENTITY_CLASSES = ("LOC", "ORG", "PERSON", "FAC")
MORPH_KEYS = frozenset(
    ["Gender", "Number", "Case", "Tense", "Person", "Mood", "Voice", "Degree", "Aspect"]
)

_ENTITY_RE = re.compile(r"^(?:O|[BILU]-(?:LOC|ORG|PERSON|FAC))$")
ABSENT = "_"


def _morph_tuple(morph) -> tuple[tuple[str, str], ...]:
    if not morph:
        return ()
    items = morph.items() if isinstance(morph, dict) else morph
    return tuple(sorted((str(k), str(v)) for k, v in items))


@dataclass(frozen=True)
class Token:
    form: str
    fine_tag: str | None = None
    upos: str | None = None
    morph: tuple[tuple[str, str], ...] = ()
    entity: str = "O"

    def __post_init__(self):
        object.__setattr__(self, "morph", _morph_tuple(self.morph))
        if not self.form or any(c in self.form for c in "\t\n\r"):
            raise DataError(f"invalid token form {self.form!r}")
        if self.upos is not None and self.upos not in UPOS_TAGS:
            raise DataError(f"unknown POS code {self.upos}")
        if not _ENTITY_RE.match(self.entity):
            raise DataError(f"invalid entity label {self.entity!r}")

    @property
    def morph_dict(self) -> dict[str, str]:
        return dict(self.morph)


def bilou_violation(labels) -> int | None:
    """Index of the first label that breaks BILOU well-formedness, or None.

    A sequence that ends inside an open span reports ``len(labels)``.
    """
    open_cls = None
    for i, lab in enumerate(labels):
        prefix, _, cls = lab.partition("-")
        if open_cls is None:
            if prefix == "B":
                open_cls = cls
            elif prefix in ("I", "L"):
                return i
        else:
            if prefix not in ("I", "L") or cls != open_cls:
                return i
            if prefix == "L":
                open_cls = None
    return len(labels) if open_cls is not None else None


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        bad = bilou_violation(self.entities)
        if bad is not None:
            raise DataError(f"invalid BILOU sequence at token {bad}")

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    @property
    def entities(self) -> list[str]:
        return [t.entity for t in self.tokens]


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[Sentence, ...]
    name: str = field(default="corpus", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def tokens(self):
        for sent in self.sentences:
            yield from sent.tokens

    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)

    def vocabulary(self) -> set[str]:
        return {t.form for t in self.tokens()}


def parse_corpus_tsv(path, name: str | None = None) -> Corpus:
    path = Path(path)
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not valid UTF-8 ({exc.reason} at byte {exc.start})") from exc

    sentences = []
    current: list[Token] = []

    def flush():
        if current:
            try:
                sentences.append(Sentence(tuple(current)))
            except DataError as exc:
                raise DataError(f"sentence {len(sentences)}: {exc}") from exc
            current.clear()

    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            flush()
            continue
        cols = line.split("\t")
        if len(cols) not in (4, 5):
            raise DataError(f"line {lineno}: expected 4 or 5 columns")
        form, fine, upos, entity = cols[:4]
        morph = ()
        if len(cols) == 5 and cols[4] != ABSENT:
            try:
                morph = tuple(kv.split("=", 1) for kv in cols[4].split("|"))
                morph = tuple((k, v) for k, v in morph)
            except ValueError:
                raise DataError(f"line {lineno}: malformed MORPH column {cols[4]!r}") from None
        try:
            current.append(Token(
                form=form,
                fine_tag=None if fine == ABSENT else fine,
                upos=None if upos == ABSENT else upos,
                morph=morph,
                entity="O" if entity == ABSENT else entity,
            ))
        except DataError as exc:
            raise DataError(f"line {lineno}: {exc}") from exc
    flush()
    return Corpus(tuple(sentences), name=name or path.stem)


def format_token(tok: Token) -> str:
    cols = [tok.form, tok.fine_tag or ABSENT, tok.upos or ABSENT, tok.entity]
    if tok.morph:
        cols.append("|".join(f"{k}={v}" for k, v in tok.morph))
    return "\t".join(cols)


def write_corpus_tsv(corpus: Corpus, path) -> None:
    for i, sent in enumerate(corpus.sentences):
        bad = bilou_violation(sent.entities)
        if bad is not None:
            raise DataError(f"sentence {i}: invalid BILOU sequence at token {bad}")
    lines = []
    for sent in corpus.sentences:
        lines.extend(format_token(t) for t in sent.tokens)
        lines.append("")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


@dataclass(frozen=True)
class TagMap:
    entries: dict

    def __len__(self):
        return len(self.entries)

    def __contains__(self, fine_tag):
        return fine_tag in self.entries


def _reject_duplicates(pairs):
    seen = {}
    for key, value in pairs:
        if key in seen:
            raise DataError(f"duplicate fine tag {key}")
        seen[key] = value
    return seen


def tag_map_from_dict(raw: dict) -> TagMap:
    entries = {}
    prefix_pos = {}
    for fine, spec in raw.items():
        if not isinstance(spec, dict) or "pos" not in spec:
            raise DataError(f"entry {fine!r} needs a 'pos' field")
        pos = spec["pos"]
        if pos not in UPOS_TAGS:
            raise DataError(f"unknown POS code {pos}; valid codes: {', '.join(UPOS_TAGS)}")
        morph = spec.get("morph") or {}
        unknown = set(morph) - MORPH_KEYS
        if unknown:
            raise DataError(f"entry {fine!r}: unknown morph keys {sorted(unknown)}")
        prefix = fine[:2]
        if prefix_pos.setdefault(prefix, pos) != pos:
            raise DataError(f"prefix '{prefix}' maps to two POS codes")
        entries[fine] = (pos, _morph_tuple(morph))
    return TagMap(entries)


def load_tag_map(path) -> TagMap:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"), object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise DataError(f"{path}: expected a JSON object")
    return tag_map_from_dict(raw)


def lookup_tag(tag_map: TagMap, fine_tag: str):
    """Return ``(upos, morph)`` for ``fine_tag`` or None when unmapped."""
    return tag_map.entries.get(fine_tag)


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.7
    test_frac: float = 0.2
    dev_frac: float = 0.1
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_frac, self.test_frac, self.dev_frac)
        if any(f <= 0 for f in fracs) or abs(sum(fracs) - 1.0) > 1e-9:
            raise DataError(f"split fractions must be positive and sum to 1, got {fracs}")


def fisher_yates(n: int, rng: np.random.Generator) -> list[int]:
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        order[i], order[j] = order[j], order[i]
    return order


def split_corpus(corpus: Corpus, spec: SplitSpec):
    n = len(corpus)
    if n < 3:
        raise DataError(f"need at least 3 sentences to split, got {n}")
    order = fisher_yates(n, np.random.default_rng(spec.seed))
    n_train = math.floor(spec.train_frac * n)
    n_test = math.floor(spec.test_frac * n)
    sents = [corpus.sentences[i] for i in order]
    return (
        Corpus(tuple(sents[:n_train]), name=f"{corpus.name}.train"),
        Corpus(tuple(sents[n_train:n_train + n_test]), name=f"{corpus.name}.test"),
        Corpus(tuple(sents[n_train + n_test:]), name=f"{corpus.name}.dev"),
    )


def strip_entities(corpus: Corpus) -> Corpus:
    return Corpus(
        tuple(Sentence(tuple(_replace_entity(t, "O") for t in s)) for s in corpus),
        name=corpus.name,
    )


def _replace_entity(tok: Token, entity: str) -> Token:
    return Token(tok.form, tok.fine_tag, tok.upos, tok.morph, entity)


def with_entities(sentence: Sentence, labels) -> Sentence:
    return Sentence(tuple(_replace_entity(t, lab) for t, lab in zip(sentence.tokens, labels)))


def corpus_stats(corpus: Corpus) -> dict:
    from collections import Counter

    upos = Counter(t.upos or ABSENT for t in corpus.tokens())
    ents = Counter(t.entity.partition("-")[2] for t in corpus.tokens() if t.entity != "O")
    return {
        "name": corpus.name,
        "sentences": len(corpus),
        "tokens": corpus.n_tokens(),
        "types": len(corpus.vocabulary()),
        "fine_tags": len({t.fine_tag for t in corpus.tokens() if t.fine_tag}),
        "upos": dict(sorted(upos.items())),
        "entity_tokens": dict(sorted(ents.items())),
    }
