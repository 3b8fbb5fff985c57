"""POS tagging with either full morphological super tags or bare UPOS codes."""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from morfo.corpus import Corpus, TagMap, lookup_tag
from morfo.errors import DataError
from morfo.metrics import macro, per_class_prf, prf_dict, weighted
from morfo.network import ModelConfig, PipelineModel
from morfo.training import fit, predict_prepared

MODES = ("supertag", "upos")


def gold_tags(sentence, mode: str, tag_map: TagMap | None = None) -> list[str]:
    tags = []
    for tok in sentence:
        if mode == "supertag":
            if tok.fine_tag is None:
                raise DataError(f"token {tok.form!r} has no fine tag")
            tags.append(tok.fine_tag)
        elif mode == "upos":
            if tok.fine_tag is not None and tag_map is not None:
                entry = lookup_tag(tag_map, tok.fine_tag)
                if entry is None:
                    raise DataError(f"fine tag {tok.fine_tag!r} is not in the tag map")
                tags.append(entry[0])
            elif tok.upos is not None:
                tags.append(tok.upos)
            else:
                raise DataError(f"token {tok.form!r} has no derivable UPOS")
        else:
            raise DataError(f"unknown tagger mode {mode!r}")
    return tags


def train_tagger(train: Corpus, dev: Corpus, config: ModelConfig, pretrained=None,
                 tag_map: TagMap | None = None, mode: str = "supertag") -> PipelineModel:
    if mode == "upos" and tag_map is None:
        raise DataError("upos mode needs a tag map")
    if len(dev) == 0:
        raise DataError("empty dev set")
    train_tags = [gold_tags(s, mode, tag_map) for s in train]
    inventory = sorted({t for tags in train_tags for t in tags})
    if not inventory:
        raise DataError("empty tag inventory")
    config = copy.deepcopy(config)
    config.use_pos = False
    model = PipelineModel(config, inventory, pretrained, extra={"task": "tagger", "mode": mode})
    index = model.tag_index

    def encode(tags):
        # dev tags unseen in train cannot be scored as correct; -1 never matches argmax
        return np.array([index.get(t, -1) for t in tags], dtype=np.int64)

    train_items = [(s.forms, None, encode(t)) for s, t in zip(train, train_tags)]
    dev_items = [(s.forms, None, encode(gold_tags(s, mode, tag_map))) for s in dev]
    model.history = fit(model, train_items, dev_items)
    return model


def tag_corpus(model: PipelineModel, sentences) -> list[list[str]]:
    prepared = [model.prepare(s.forms if hasattr(s, "forms") else list(s)) for s in sentences]
    return [[model.tag_inventory[i] for i in probs.argmax(axis=-1)]
            for probs in predict_prepared(model, prepared)]


def tag(model: PipelineModel, sentence) -> list[str]:
    """Argmax tag per token; ties resolve to the lowest inventory index."""
    return tag_corpus(model, [sentence])[0]


@dataclass
class TagEvalReport:
    per_class: dict
    macro: tuple[float, float, float]
    weighted: tuple[float, float, float]
    micro_accuracy: float
    n_tokens: int
    oov_accuracy: float
    n_oov: int

    def to_dict(self) -> dict:
        return {
            "per_class": prf_dict(self.per_class),
            "macro": dict(zip(("precision", "recall", "f1"), self.macro)),
            "weighted": dict(zip(("precision", "recall", "f1"), self.weighted)),
            "micro_accuracy": self.micro_accuracy,
            "n_tokens": self.n_tokens,
            "oov_accuracy": self.oov_accuracy,
            "n_oov": self.n_oov,
        }


def score_tags(gold: list[str], pred: list[str], oov_mask=None) -> TagEvalReport:
    if not gold:
        raise DataError("empty test set")
    per_class = per_class_prf(gold, pred)
    correct = [g == p for g, p in zip(gold, pred)]
    oov_mask = oov_mask or [False] * len(gold)
    oov = [c for c, o in zip(correct, oov_mask) if o]
    return TagEvalReport(
        per_class=per_class,
        macro=macro(per_class),
        weighted=weighted(per_class),
        micro_accuracy=sum(correct) / len(gold),
        n_tokens=len(gold),
        oov_accuracy=sum(oov) / len(oov) if oov else 1.0,
        n_oov=len(oov),
    )


def evaluate_tagger(model: PipelineModel, test: Corpus, train_vocab=frozenset()) -> TagEvalReport:
    if test.n_tokens() == 0:
        raise DataError("empty test set")
    mode = model.extra.get("mode", "supertag")
    gold = [t for s in test for t in gold_tags(s, mode)]
    pred = [t for tags in tag_corpus(model, test.sentences) for t in tags]
    oov = [tok.form not in train_vocab for tok in test.tokens()]
    return score_tags(gold, pred, oov)
