"""Out-of-vocabulary stress sets: verb-suffix swaps and vowel substitutions."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from morfo.corpus import Corpus, Sentence, Token, fisher_yates
from morfo.errors import ConfigError

log = logging.getLogger(__name__)

# vowels grouped so a replacement keeps case and accent
VOWEL_CLASSES = ("αεηιουω", "άέήίόύώ", "ΑΕΗΙΟΥΩ", "ΆΈΉΊΌΎΏ")
DEFAULT_SWAPS = (("ει", "ι"), ("ουν", "ουνε"), ("ω", "ο"), ("εις", "ις"))


@dataclass(frozen=True)
class PerturbSpec:
    rate: float = 0.2
    seed: int = 0
    vowel_classes: tuple[str, ...] = VOWEL_CLASSES
    verb_suffix_swaps: tuple[tuple[str, str], ...] = DEFAULT_SWAPS

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ConfigError(f"perturbation rate {self.rate} outside [0, 1]")
        for old, new in self.verb_suffix_swaps:
            if old == new or not old:
                raise ConfigError(f"invalid suffix swap {old!r} -> {new!r}")


def _vowel_class(ch, classes):
    for group in classes:
        if ch in group:
            return group
    return None


def swap_suffix(form: str, swaps) -> str | None:
    for old, new in swaps:
        if form.endswith(old):
            return form[: len(form) - len(old)] + new
    return None


def substitute_vowel(form: str, rng, classes=VOWEL_CLASSES) -> str | None:
    positions = [i for i, ch in enumerate(form) if _vowel_class(ch, classes)]
    if not positions:
        return None
    i = positions[int(rng.integers(len(positions)))]
    group = _vowel_class(form[i], classes)
    choices = [v for v in group if v != form[i]]
    return form[:i] + choices[int(rng.integers(len(choices)))] + form[i + 1:]


def perturb_token(tok: Token, spec: PerturbSpec, rng) -> str | None:
    if tok.upos == "VERB":
        new = swap_suffix(tok.form, spec.verb_suffix_swaps)
        if new is not None:
            return new
    return substitute_vowel(tok.form, rng, spec.vowel_classes)


def perturb_corpus(corpus: Corpus, spec: PerturbSpec) -> Corpus:
    """Corrupt exactly ``floor(rate * N)`` of the N alphabetic tokens; labels untouched."""
    rng = np.random.default_rng(spec.seed)
    positions = [(si, ti) for si, sent in enumerate(corpus) for ti, tok in enumerate(sent)
                 if tok.form.isalpha()]
    target = math.floor(spec.rate * len(positions))
    new_forms = {}
    for k in fisher_yates(len(positions), rng):
        if len(new_forms) == target:
            break
        si, ti = positions[k]
        form = perturb_token(corpus.sentences[si].tokens[ti], spec, rng)
        if form is not None and form != corpus.sentences[si].tokens[ti].form:
            new_forms[si, ti] = form
    if len(new_forms) < target:
        log.warning("only %d of %d requested tokens could be perturbed", len(new_forms), target)
    sentences = []
    for si, sent in enumerate(corpus):
        toks = tuple(
            Token(new_forms[si, ti], t.fine_tag, t.upos, t.morph, t.entity) if (si, ti) in new_forms else t
            for ti, t in enumerate(sent)
        )
        sentences.append(Sentence(toks))
    return Corpus(tuple(sentences), name=f"{corpus.name}.perturbed")
