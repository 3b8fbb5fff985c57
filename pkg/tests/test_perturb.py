import pytest

from conftest import make_corpus, make_sentence
from morfo.errors import ConfigError
from morfo.perturb import PerturbSpec, perturb_corpus, perturb_token
from morfo.corpus import Token
from morfo.synthetic import generate_synthetic_corpus

import numpy as np


def _diff(a, b):
    return sum(x.form != y.form for x, y in zip(a.tokens(), b.tokens()))


def test_rate_zero_identity():
    c = generate_synthetic_corpus(20, 1)
    assert perturb_corpus(c, PerturbSpec(rate=0.0)).sentences == c.sentences


def test_exact_count_small():
    forms = ["ο", "σκύλος", "τρέχει", "στο", "πάρκο", "και", "η", "γάτα", "κοιμάται", "ήσυχα", ".", "5"]
    c = make_corpus(make_sentence(forms, upos=["X"] * len(forms)))
    out = perturb_corpus(c, PerturbSpec(rate=0.2, seed=3))
    assert _diff(c, out) == 2
    assert out.sentences[0].tokens[10].form == "." and out.sentences[0].tokens[11].form == "5"


def test_verb_suffix_swap():
    spec = PerturbSpec()
    rng = np.random.default_rng(0)
    assert perturb_token(Token("τρέχει", upos="VERB"), spec, rng) == "τρέχι"
    assert perturb_token(Token("τρέχουν", upos="VERB"), spec, rng) == "τρέχουνε"
    # non-verbs always get a vowel substitution of the same case/accent class
    new = perturb_token(Token("Αθήνα", upos="PROPN"), spec, rng)
    assert new != "Αθήνα" and len(new) == 5


def test_labels_preserved_and_deterministic():
    c = generate_synthetic_corpus(100, 2)
    spec = PerturbSpec(rate=0.2, seed=11)
    a, b = perturb_corpus(c, spec), perturb_corpus(c, spec)
    assert a == b
    n_alpha = sum(t.form.isalpha() for t in c.tokens())
    assert _diff(c, a) == int(0.2 * n_alpha)
    for x, y in zip(c.tokens(), a.tokens()):
        assert (x.fine_tag, x.upos, x.morph, x.entity) == (y.fine_tag, y.upos, y.morph, y.entity)


def test_shortfall_warns(caplog):
    c = make_corpus(make_sentence(["xyz", "κκκ"], upos=["X", "X"]))
    out = perturb_corpus(c, PerturbSpec(rate=1.0))
    assert _diff(c, out) == 0
    assert "could be perturbed" in caplog.text


def test_invalid_rate():
    with pytest.raises(ConfigError):
        PerturbSpec(rate=1.5)
    with pytest.raises(ConfigError):
        PerturbSpec(verb_suffix_swaps=(("ει", "ει"),))
