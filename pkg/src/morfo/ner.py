"""Entity recognition: BILOU codec, keyword lists, distant supervision, training, scoring."""

from __future__ import annotations

import copy
import unicodedata
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from morfo.corpus import ENTITY_CLASSES, Corpus, Sentence, with_entities
from morfo.errors import DataError
from morfo.metrics import macro, per_class_prf, prf_dict
from morfo.network import ModelConfig, PipelineModel
from morfo.training import fit, predict_prepared

NON_ENTITY = "NonEntity"
CLASS_PRIORITY = ("PERSON", "ORG", "LOC", "FAC")
MAX_KEYWORD_TOKENS = 10


# -- BILOU -----------------------------------------------------------------------

def bilou_encode(spans, length: int) -> list[str]:
    labels = ["O"] * length
    for start, end, cls in sorted(spans):
        if not 0 <= start < end <= length:
            raise DataError(f"span ({start}, {end}) outside [0, {length})")
        for i in range(start, end):
            if labels[i] != "O":
                raise DataError(f"overlap at {i}")
        if end - start == 1:
            labels[start] = f"U-{cls}"
        else:
            labels[start] = f"B-{cls}"
            for i in range(start + 1, end - 1):
                labels[i] = f"I-{cls}"
            labels[end - 1] = f"L-{cls}"
    return labels


def bilou_decode(labels) -> list[tuple[int, int, str]]:
    """Spans from a label sequence, repairing malformed runs.

    An I or L with no open B of its class becomes a unit span; a B that is
    never closed ends at its last contiguous same-class I (or becomes a unit
    span). Unparseable labels are read as O.
    """
    spans = []
    open_start, open_cls, last = None, None, None

    def close():
        nonlocal open_start, open_cls
        if open_start is not None:
            spans.append((open_start, last + 1, open_cls))
        open_start = open_cls = None

    for i, lab in enumerate(labels):
        prefix, sep, cls = lab.partition("-")
        if not sep or prefix not in "BILU" or len(prefix) != 1 or not cls:
            prefix = "O"
        if prefix == "O":
            close()
        elif prefix == "B":
            close()
            open_start, open_cls, last = i, cls, i
        elif prefix == "I":
            if open_start is not None and cls == open_cls:
                last = i
            else:
                close()
                spans.append((i, i + 1, cls))
        elif prefix == "L":
            if open_start is not None and cls == open_cls:
                last = i
                close()
            else:
                close()
                spans.append((i, i + 1, cls))
        else:
            close()
            spans.append((i, i + 1, cls))
    close()
    return spans


def sentence_spans(sentence: Sentence):
    return bilou_decode(sentence.entities)


# -- keyword lists ---------------------------------------------------------------

@dataclass(frozen=True)
class KeywordRecord:
    tokens: tuple[str, ...]
    entity_class: str
    frequency: int = 1

    def __post_init__(self):
        if not 1 <= len(self.tokens) <= MAX_KEYWORD_TOKENS:
            raise DataError(f"keyword must have 1..{MAX_KEYWORD_TOKENS} tokens")
        if any(not t or any(c.isspace() for c in t) for t in self.tokens):
            raise DataError(f"keyword token contains whitespace: {self.tokens!r}")
        if self.entity_class not in ENTITY_CLASSES:
            raise DataError(f"unknown entity class {self.entity_class}")
        if self.frequency < 1:
            raise DataError("keyword frequency must be positive")

    @property
    def surface(self) -> str:
        return " ".join(self.tokens)


def _sort_key(rec: KeywordRecord):
    return (-len(rec.tokens), rec.surface)


class KeywordList:
    def __init__(self, records):
        records = sorted(records, key=_sort_key)
        seen = set()
        for rec in records:
            if rec.tokens in seen:
                raise DataError(f"duplicate keyword surface {rec.surface!r}")
            seen.add(rec.tokens)
        self.records = records
        self.lookup = {rec.tokens: rec.entity_class for rec in records}
        self.max_len = max((len(r.tokens) for r in records), default=0)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def is_noise(tokens) -> bool:
    surface = " ".join(tokens)
    chars = [c for c in surface if not c.isspace()]
    return (
        len(tokens) > MAX_KEYWORD_TOKENS
        or len(surface) == 1
        or all(unicodedata.category(c).startswith("P") for c in chars)
        or all(c.isdigit() for c in chars)
    )


def build_keyword_list(corpus: Corpus) -> KeywordList:
    counts = defaultdict(Counter)
    for sent in corpus:
        forms = sent.forms
        for start, end, cls in sentence_spans(sent):
            counts[tuple(forms[start:end])][cls] += 1
    records = []
    for tokens, by_class in counts.items():
        if is_noise(tokens):
            continue
        cls = max(by_class, key=lambda c: (by_class[c], -CLASS_PRIORITY.index(c)))
        records.append(KeywordRecord(tokens, cls, sum(by_class.values())))
    return KeywordList(records)


def write_keyword_list(kl: KeywordList, path) -> None:
    lines = [f"{r.surface}\t{r.entity_class}\t{r.frequency}" for r in kl]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def read_keyword_list(path) -> KeywordList:
    records = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise DataError(f"line {lineno}: expected 3 columns")
        try:
            freq = int(cols[2])
        except ValueError:
            raise DataError(f"line {lineno}: frequency is not an integer") from None
        try:
            records.append(KeywordRecord(tuple(cols[0].split(" ")), cols[1], freq))
        except DataError as exc:
            raise DataError(f"line {lineno}: {exc}") from exc
    return KeywordList(records)


def project_keywords(tokens, kl: KeywordList) -> list[tuple[int, int, str]]:
    """Leftmost-longest greedy, case-sensitive matching of keyword surfaces."""
    tokens = list(tokens)
    spans = []
    i = 0
    while i < len(tokens):
        for size in range(min(kl.max_len, len(tokens) - i), 0, -1):
            cls = kl.lookup.get(tuple(tokens[i:i + size]))
            if cls is not None:
                spans.append((i, i + size, cls))
                i += size
                break
        else:
            i += 1
    return spans


def annotate_corpus(corpus: Corpus, kl: KeywordList) -> Corpus:
    """Replace entity labels with keyword projections (a silver corpus)."""
    out = []
    for sent in corpus:
        labels = bilou_encode(project_keywords(sent.forms, kl), len(sent))
        out.append(with_entities(sent, labels))
    return Corpus(tuple(out), name=f"{corpus.name}.silver")


# -- training and inference ------------------------------------------------------

def _pos_sequence(sentence, pos_source, pos_tagger):
    if pos_source == "gold":
        pos = [t.upos for t in sentence]
        if any(p is None for p in pos):
            raise DataError("gold POS feature requested but a token has no UPOS")
        return pos
    if pos_source == "model":
        if pos_tagger is None:
            raise DataError("pos_source=model needs a POS tagger model")
        from morfo.tagger import tag

        return tag(pos_tagger, sentence)
    raise DataError(f"unknown pos source {pos_source!r}")


def _pos_for(model, sentences, pos_tagger):
    if not model.config.use_pos:
        return [None] * len(sentences)
    src = model.extra.get("pos_source", "gold")
    if src == "model" and pos_tagger is not None:
        from morfo.tagger import tag_corpus

        return tag_corpus(pos_tagger, sentences)
    return [_pos_sequence(s, src, pos_tagger) for s in sentences]


def train_ner(train: Corpus, dev: Corpus, config: ModelConfig, pretrained=None,
              use_pos_feature: bool = False, pos_source: str = "gold", pos_tagger=None) -> PipelineModel:
    if len(dev) == 0:
        raise DataError("empty dev set")
    labels = sorted({lab for s in train for lab in s.entities} | {"O"})
    if labels == ["O"]:
        raise DataError("training corpus carries no BILOU entity labels")
    config = copy.deepcopy(config)
    config.use_pos = use_pos_feature
    model = PipelineModel(config, labels, pretrained,
                          extra={"task": "ner", "pos_source": pos_source if use_pos_feature else None})
    index = model.tag_index
    train_pos = _pos_for(model, train.sentences, pos_tagger)
    dev_pos = _pos_for(model, dev.sentences, pos_tagger)

    def items(corpus, pos):
        return [(s.forms, p, np.array([index.get(lab, -1) for lab in s.entities], dtype=np.int64))
                for s, p in zip(corpus, pos)]

    model.history = fit(model, items(train, train_pos), items(dev, dev_pos))
    return model


def recognize_corpus(model: PipelineModel, sentences, pos_tagger=None) -> list[list[str]]:
    """Repaired BILOU labels for every sentence."""
    sentences = list(sentences)
    pos = _pos_for(model, sentences, pos_tagger)
    prepared = [model.prepare(s.forms, p) for s, p in zip(sentences, pos)]
    out = []
    for sent, probs in zip(sentences, predict_prepared(model, prepared)):
        raw = [model.tag_inventory[i] for i in probs.argmax(axis=-1)]
        out.append(bilou_encode(bilou_decode(raw), len(sent)))
    return out


def recognize(model: PipelineModel, sentence, pos_tagger=None) -> list[tuple[int, int, str]]:
    return bilou_decode(recognize_corpus(model, [sentence], pos_tagger)[0])


# -- evaluation ------------------------------------------------------------------

@dataclass
class NerEvalReport:
    per_class: dict
    macro_f1: float
    span_precision: float
    span_recall: float
    span_f1: float
    n_tokens: int

    def to_dict(self) -> dict:
        return {
            "per_class": prf_dict(self.per_class),
            "macro_f1": self.macro_f1,
            "span": {"precision": self.span_precision, "recall": self.span_recall, "f1": self.span_f1},
            "n_tokens": self.n_tokens,
        }


def token_class(label: str) -> str:
    return NON_ENTITY if label == "O" else label.partition("-")[2]


def score_entities(gold_seqs, pred_seqs) -> NerEvalReport:
    gold_tok, pred_tok = [], []
    n_gold_spans = n_pred_spans = n_match = 0
    for gold, pred in zip(gold_seqs, pred_seqs):
        gold_tok.extend(token_class(lab) for lab in gold)
        pred_tok.extend(token_class(lab) for lab in bilou_encode(bilou_decode(pred), len(pred)))
        gs, ps = set(bilou_decode(gold)), set(bilou_decode(pred))
        n_gold_spans += len(gs)
        n_pred_spans += len(ps)
        n_match += len(gs & ps)
    if not gold_tok:
        raise DataError("empty test set")
    per_class = per_class_prf(gold_tok, pred_tok, classes=(NON_ENTITY,))
    sp = n_match / n_pred_spans if n_pred_spans else 0.0
    sr = n_match / n_gold_spans if n_gold_spans else 0.0
    return NerEvalReport(
        per_class=per_class,
        macro_f1=macro(per_class)[2],
        span_precision=sp,
        span_recall=sr,
        span_f1=2 * sp * sr / (sp + sr) if sp + sr else 0.0,
        n_tokens=len(gold_tok),
    )


def evaluate_ner(model: PipelineModel, test: Corpus, pos_tagger=None) -> NerEvalReport:
    if test.n_tokens() == 0:
        raise DataError("empty test set")
    pred = recognize_corpus(model, test.sentences, pos_tagger)
    return score_entities([s.entities for s in test], pred)
