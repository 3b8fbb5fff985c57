import pytest

from morfo.corpus import Corpus, Sentence, Token


def make_sentence(forms, fine=None, upos=None, entities=None):
    n = len(forms)
    fine = fine or [None] * n
    upos = upos or [None] * n
    entities = entities or ["O"] * n
    return Sentence(tuple(Token(f, t, u, (), e) for f, t, u, e in zip(forms, fine, upos, entities)))


def make_corpus(*sentences, name="toy"):
    return Corpus(tuple(sentences), name=name)


@pytest.fixture
def toy_corpus():
    return make_corpus(
        make_sentence(["Ο", "Νίκος", "τρέχει"], ["AtDfMaSgNm", "NpMaSgNm", "VbPr3Sg"],
                      ["DET", "PROPN", "VERB"], ["O", "U-PERSON", "O"]),
        make_sentence(["Στη", "Νέα", "Υόρκη", "."], ["AsPpPaFeSgAc", "NpFeSgAc", "NpFeSgAc", "PuPu"],
                      ["ADP", "PROPN", "PROPN", "PUNCT"], ["O", "B-LOC", "L-LOC", "O"]),
    )


# criterion number -> (title, passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:>2}. {title}: {detail}")
