import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_corpus, make_sentence
from morfo.corpus import bilou_violation
from morfo.errors import DataError
from morfo.ner import (
    KeywordList,
    KeywordRecord,
    annotate_corpus,
    bilou_decode,
    bilou_encode,
    build_keyword_list,
    evaluate_ner,
    project_keywords,
    read_keyword_list,
    recognize,
    score_entities,
    train_ner,
    write_keyword_list,
)
from morfo.network import ModelConfig

CLASSES = ["LOC", "ORG", "PERSON", "FAC"]
TINY = dict(width=16, depth=1, attn_window=1, norm_rows=200, norm_dim=8, affix_rows=50, affix_dim=4)


def test_encode_examples():
    assert bilou_encode([(1, 3, "ORG")], 4) == ["O", "B-ORG", "L-ORG", "O"]
    assert bilou_encode([(0, 1, "LOC")], 1) == ["U-LOC"]
    assert bilou_encode([(0, 4, "FAC")], 4) == ["B-FAC", "I-FAC", "I-FAC", "L-FAC"]
    with pytest.raises(DataError, match="overlap at 1"):
        bilou_encode([(0, 2, "X"), (1, 3, "Y")], 4)


def test_decode_examples():
    assert bilou_decode(["O", "B-ORG", "L-ORG", "O"]) == [(1, 3, "ORG")]
    assert bilou_decode(["I-LOC"]) == [(0, 1, "LOC")]
    assert bilou_decode(["B-LOC", "I-LOC", "O"]) == [(0, 2, "LOC")]
    assert bilou_decode(["B-LOC", "L-ORG"]) == [(0, 1, "LOC"), (1, 2, "ORG")]
    assert bilou_decode(["garbage", "U-FAC"]) == [(1, 2, "FAC")]


def random_spans(rng, n):
    spans, i = [], 0
    while i < n:
        if rng.random() < 0.4:
            end = min(n, i + rng.randint(1, 4))
            spans.append((i, end, rng.choice(CLASSES)))
            i = end
        else:
            i += 1
    return spans


def test_round_trip_random():
    rng = random.Random(0)
    for _ in range(2000):
        n = rng.randint(0, 12)
        spans = random_spans(rng, n)
        assert bilou_decode(bilou_encode(spans, n)) == spans


_label = st.sampled_from(["O"] + [f"{p}-{c}" for p in "BILU" for c in CLASSES] + ["X-LOC", "B-", "junk"])


@settings(max_examples=300, deadline=None)
@given(st.lists(_label, max_size=12))
def test_decode_always_valid(labels):
    spans = bilou_decode(labels)
    relabeled = bilou_encode(spans, len(labels))
    assert bilou_violation(relabeled) is None
    assert bilou_decode(relabeled) == spans


def test_keyword_record_validation():
    with pytest.raises(DataError):
        KeywordRecord(("a b",), "LOC")
    with pytest.raises(DataError):
        KeywordRecord(tuple("abcdefghijk"), "LOC")
    with pytest.raises(DataError):
        KeywordRecord(("x",), "MISC")
    with pytest.raises(DataError):
        KeywordList([KeywordRecord(("x",), "LOC"), KeywordRecord(("x",), "ORG")])


def test_build_keyword_list():
    s = make_sentence(["Αθήνα", "."], entities=["U-LOC", "O"])
    kl = build_keyword_list(make_corpus(s, s, s))
    assert [(r.tokens, r.entity_class, r.frequency) for r in kl] == [(("Αθήνα",), "LOC", 3)]

    org = make_sentence(["Δήμος", "Χ"], entities=["B-ORG", "L-ORG"])
    loc = make_sentence(["Δήμος", "Χ"], entities=["B-LOC", "L-LOC"])
    kl = build_keyword_list(make_corpus(org, loc, org))
    assert [(r.entity_class, r.frequency) for r in kl] == [("ORG", 3)]

    tie = build_keyword_list(make_corpus(make_sentence(["Ζέα"], entities=["U-FAC"]),
                                         make_sentence(["Ζέα"], entities=["U-PERSON"])))
    assert tie.records[0].entity_class == "PERSON"

    noise = make_sentence([".", "1999", "Κ", "Άρης"], entities=["U-LOC", "U-ORG", "U-PERSON", "U-PERSON"])
    assert [r.surface for r in build_keyword_list(make_corpus(noise))] == ["Άρης"]


def test_keyword_list_order_and_io(tmp_path):
    kl = KeywordList([KeywordRecord(("β",), "LOC"), KeywordRecord(("α", "β"), "ORG", 2),
                      KeywordRecord(("α",), "FAC")])
    assert [r.surface for r in kl] == ["α β", "α", "β"]
    p = tmp_path / "kw.tsv"
    write_keyword_list(kl, p)
    assert p.read_text(encoding="utf-8") == "α β\tORG\t2\nα\tFAC\t1\nβ\tLOC\t1\n"
    assert list(read_keyword_list(p)) == list(kl)
    p.write_text("α\tLOC\n", encoding="utf-8")
    with pytest.raises(DataError, match="line 1"):
        read_keyword_list(p)


def test_projection_examples():
    kl = KeywordList([KeywordRecord(("Δήμος", "Θεσσαλονίκης"), "ORG"), KeywordRecord(("Θεσσαλονίκης",), "LOC")])
    assert project_keywords(["Ο", "Δήμος", "Θεσσαλονίκης"], kl) == [(1, 3, "ORG")]
    assert project_keywords(["καμία", "αντιστοιχία"], kl) == []
    assert project_keywords(["θεσσαλονίκης"], kl) == []


def oracle_projection(tokens, records):
    """Enumerate every match, then repeatedly keep the leftmost (longest on ties)."""
    matches = [(i, i + len(r.tokens), r.entity_class) for r in records
               for i in range(len(tokens) - len(r.tokens) + 1)
               if tuple(tokens[i:i + len(r.tokens)]) == r.tokens]
    chosen, pos = [], 0
    while True:
        live = [m for m in matches if m[0] >= pos]
        if not live:
            return chosen
        best = min(live, key=lambda m: (m[0], -(m[1] - m[0])))
        chosen.append(best)
        pos = best[1]


def random_projection_instance(rng):
    vocab = ["α", "β", "γ", "δ", "Α", "ε"]
    seen, records = set(), []
    for _ in range(rng.randint(0, 8)):
        toks = tuple(rng.choice(vocab) for _ in range(rng.randint(1, 4)))
        if toks not in seen:
            seen.add(toks)
            records.append(KeywordRecord(toks, rng.choice(CLASSES)))
    sentence = [rng.choice(vocab) for _ in range(rng.randint(0, 15))]
    return sentence, records


def test_projection_matches_oracle():
    rng = random.Random(1)
    for _ in range(1000):
        sentence, records = random_projection_instance(rng)
        kl = KeywordList(records)
        got = project_keywords(sentence, kl)
        assert got == oracle_projection(sentence, records)
        assert all(a[1] <= b[0] for a, b in zip(got, got[1:]))


def test_annotate_corpus():
    kl = KeywordList([KeywordRecord(("Νέα", "Υόρκη"), "LOC")])
    c = make_corpus(make_sentence(["Στη", "Νέα", "Υόρκη"], entities=["O", "O", "U-ORG"]))
    assert annotate_corpus(c, kl).sentences[0].entities == ["O", "B-LOC", "L-LOC"]


def test_score_hand_case():
    r = score_entities([["O", "U-LOC", "O", "B-ORG", "L-ORG", "O"]],
                       [["O", "U-LOC", "O", "O", "L-ORG", "O"]])
    assert r.per_class["LOC"][2] == 1.0
    p, rec, f, _ = r.per_class["ORG"]
    assert (p, rec) == (1.0, 0.5) and abs(f - 2 / 3) < 1e-12
    p, rec, f, _ = r.per_class["NonEntity"]
    assert (p, rec) == (0.75, 1.0) and abs(f - 6 / 7) < 1e-12
    assert abs(r.macro_f1 - (1 + 2 / 3 + 6 / 7) / 3) < 1e-12


def test_score_all_outside_and_perfect():
    r = score_entities([["O", "O"]], [["O", "O"]])
    assert r.per_class["NonEntity"][2] == 1.0 and r.macro_f1 == 1.0
    assert "LOC" not in r.per_class or r.per_class["LOC"][3] == 0
    gold = [["B-PERSON", "L-PERSON", "U-FAC", "O"]]
    r = score_entities(gold, gold)
    assert r.macro_f1 == 1.0 and r.span_f1 == 1.0
    with pytest.raises(DataError):
        score_entities([], [])


def test_overfit_single_span():
    s = make_sentence(["Ο", "Δήμος", "Θεσσαλονίκης", "ανακοίνωσε"], entities=["O", "B-ORG", "L-ORG", "O"])
    c = make_corpus(s)
    model = train_ner(c, c, ModelConfig(**TINY, epochs=150))
    assert recognize(model, s) == [(1, 3, "ORG")]
    assert evaluate_ner(model, c).macro_f1 == 1.0
    assert set(model.tag_inventory) <= {"O"} | {f"{p}-{k}" for p in "BILU" for k in CLASSES}


def test_train_ner_errors():
    c = make_corpus(make_sentence(["α", "β"]))
    with pytest.raises(DataError):
        train_ner(c, c, ModelConfig(**TINY, epochs=1))
    s = make_corpus(make_sentence(["α"], entities=["U-LOC"]))
    with pytest.raises(DataError):
        train_ner(s, s, ModelConfig(**TINY, epochs=1), use_pos_feature=True)
