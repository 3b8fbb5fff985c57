import numpy as np
import pytest

from conftest import make_corpus, make_sentence
from morfo.corpus import TagMap, tag_map_from_dict
from morfo.errors import DataError
from morfo.network import ModelConfig, save_model, model_bytes
from morfo.synthetic import bundled_tag_map, generate_synthetic_corpus
from morfo.tagger import evaluate_tagger, gold_tags, score_tags, tag, tag_corpus, train_tagger

TINY = dict(width=16, depth=1, attn_window=1, norm_rows=200, norm_dim=8, affix_rows=50, affix_dim=4)


def test_score_hand_case():
    r = score_tags(["A", "A", "B"], ["A", "B", "B"])
    pa, ra, fa, sa = r.per_class["A"]
    pb, rb, fb, sb = r.per_class["B"]
    assert (pa, ra, sa) == (1.0, 0.5, 2) and abs(fa - 2 / 3) < 1e-12
    assert (pb, rb, sb) == (0.5, 1.0, 1) and abs(fb - 2 / 3) < 1e-12
    assert abs(r.macro[2] - 2 / 3) < 1e-12
    assert abs(r.micro_accuracy - 2 / 3) < 1e-12


def test_score_perfect_and_empty():
    r = score_tags(["A", "B", "C"], ["A", "B", "C"])
    assert r.macro == (1.0, 1.0, 1.0) and r.micro_accuracy == 1.0 and r.oov_accuracy == 1.0
    with pytest.raises(DataError, match="empty test set"):
        score_tags([], [])


def test_score_unknown_gold_class_and_oov():
    r = score_tags(["A", "Z", "A", "A"], ["A", "A", "B", "A"], [False, True, True, False])
    assert r.per_class["Z"] == (0.0, 0.0, 0.0, 1)
    assert r.per_class["B"][3] == 0
    # B has no support, so the macro runs over A and Z only
    assert abs(r.macro[2] - (r.per_class["A"][2] + 0.0) / 2) < 1e-12
    assert r.oov_accuracy == 0.0 and r.n_oov == 2


def test_gold_tags_modes():
    tm = tag_map_from_dict({"NoFe": {"pos": "NOUN"}, "VbPr": {"pos": "VERB"}})
    s = make_sentence(["γάτα", "τρέχει"], ["NoFe", "VbPr"], ["NOUN", "VERB"])
    assert gold_tags(s, "supertag") == ["NoFe", "VbPr"]
    assert gold_tags(s, "upos", tm) == ["NOUN", "VERB"]
    with pytest.raises(DataError):
        gold_tags(make_sentence(["x"], ["QqQq"], ["X"]), "upos", tm)
    with pytest.raises(DataError):
        gold_tags(make_sentence(["x"]), "supertag")


def test_overfit_single_sentence():
    s = make_sentence(["ο", "σκύλος", "τρέχει", "γρήγορα"], ["At", "No", "At", "No"])
    c = make_corpus(s)
    model = train_tagger(c, c, ModelConfig(**TINY, epochs=200), mode="supertag")
    assert tag(model, s) == ["At", "No", "At", "No"]
    assert evaluate_tagger(model, c, c.vocabulary()).micro_accuracy == 1.0


def test_tagger_shapes_and_determinism():
    c = generate_synthetic_corpus(30, seed=4)
    train, dev = make_corpus(*c.sentences[:24]), make_corpus(*c.sentences[24:])
    cfg = ModelConfig(**TINY, epochs=3, seed=5)
    a = train_tagger(train, dev, cfg, mode="upos", tag_map=bundled_tag_map())
    b = train_tagger(train, dev, cfg, mode="upos", tag_map=bundled_tag_map())
    assert len(a.tag_inventory) <= 16
    assert model_bytes(a) == model_bytes(b)
    out = tag_corpus(a, dev.sentences)
    assert [len(t) for t in out] == [len(s) for s in dev]
    assert out == tag_corpus(a, dev.sentences)
    assert len(a.history) == 3
    before = model_bytes(a)
    evaluate_tagger(a, dev, train.vocabulary())
    assert model_bytes(a) == before


def test_tagger_errors():
    c = make_corpus(make_sentence(["α"], ["At"]))
    with pytest.raises(DataError):
        train_tagger(c, make_corpus(), ModelConfig(**TINY, epochs=1))
    with pytest.raises(DataError):
        train_tagger(c, c, ModelConfig(**TINY, epochs=1), mode="upos")
