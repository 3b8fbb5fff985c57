import json

import pytest

from morfo.cli import run

TINY = {"width": 16, "depth": 1, "attn_window": 1, "norm_rows": 200, "norm_dim": 8,
        "affix_rows": 50, "affix_dim": 4, "epochs": 2}


@pytest.fixture
def workdir(tmp_path):
    assert run(["corpus", "synth", "--n", "40", "--seed", "3", "--out", str(tmp_path / "c.tsv"),
                "--vectors-out", str(tmp_path / "c.vec"), "--dim", "8",
                "--tag-map-out", str(tmp_path / "tm.json")]) == 0
    assert run(["corpus", "split", "--in", str(tmp_path / "c.tsv"), "--seed", "42",
                "--train", "0.7", "--test", "0.2", "--dev", "0.1"]) == 0
    (tmp_path / "cfg.json").write_text(json.dumps(TINY))
    return tmp_path


def test_split_outputs(workdir):
    for part, n in (("train", 28), ("test", 8), ("dev", 4)):
        text = (workdir / f"c.{part}.tsv").read_text(encoding="utf-8")
        assert text.count("\n\n") == n


def test_usage_errors(capsys):
    assert run(["frobnicate"]) == 1
    assert "usage" in capsys.readouterr().err
    assert run(["tagger", "train"]) == 1
    assert run([]) == 1


def test_data_errors(tmp_path, capsys):
    bad = tmp_path / "bad.tsv"
    bad.write_text("a\tb\n", encoding="utf-8")
    assert run(["corpus", "stats", "--in", str(bad)]) == 2
    assert "line 1" in capsys.readouterr().err
    assert run(["corpus", "stats", "--in", str(tmp_path / "missing.tsv")]) == 2


def test_config_errors(workdir):
    (workdir / "bad.json").write_text('{"widht": 3}')
    args = ["tagger", "train", "--config", str(workdir / "bad.json"), "--train", str(workdir / "c.train.tsv"),
            "--dev", str(workdir / "c.dev.tsv"), "--out", str(workdir / "m.bin")]
    assert run(args) == 1
    assert run(["perturb", "--in", str(workdir / "c.tsv"), "--rate", "2", "--out", str(workdir / "p.tsv")]) == 1


def test_tagger_train_eval_tag(workdir, capsys):
    w = workdir
    assert run(["tagger", "train", "--config", str(w / "cfg.json"), "--train", str(w / "c.train.tsv"),
                "--dev", str(w / "c.dev.tsv"), "--vectors", str(w / "c.vec"), "--seed", "1",
                "--out", str(w / "m.bin"), "--report", str(w / "train.json")]) == 0
    report = json.loads((w / "train.json").read_text())
    assert report["mode"] == "supertag" and len(report["history"]) == 2
    assert (w / "train.curve.png").stat().st_size > 0
    assert run(["tagger", "eval", "--model", str(w / "m.bin"), "--test", str(w / "c.test.tsv"),
                "--train-vocab", str(w / "c.train.tsv"), "--report", str(w / "eval.json")]) == 0
    ev = json.loads((w / "eval.json").read_text())
    assert {"per_class", "macro", "micro_accuracy", "oov_accuracy", "n_tokens"} <= set(ev)
    assert (w / "eval.f1.png").exists()
    assert "accuracy" in capsys.readouterr().out
    (w / "raw.txt").write_text("Ο Νίκος τρέχει .\n", encoding="utf-8")
    assert run(["tagger", "tag", "--model", str(w / "m.bin"), "--in", str(w / "raw.txt"),
                "--out", str(w / "tagged.tsv")]) == 0
    assert len((w / "tagged.tsv").read_text(encoding="utf-8").strip().splitlines()) == 4


def test_upos_mode_and_runconfig_paths(workdir):
    w = workdir
    cfg = dict(TINY, train=str(w / "c.train.tsv"), dev=str(w / "c.dev.tsv"), mode="upos",
               tag_map=str(w / "tm.json"), model_out=str(w / "u.bin"), report=str(w / "u.json"))
    (w / "run.json").write_text(json.dumps(cfg))
    assert run(["tagger", "train", "--config", str(w / "run.json"), "--no-figures"]) == 0
    assert json.loads((w / "u.json").read_text())["tag_inventory_size"] <= 16
    assert not (w / "u.curve.png").exists()


def test_ner_pipeline(workdir):
    w = workdir
    assert run(["ner", "build-keywords", "--in", str(w / "c.train.tsv"), "--out", str(w / "kw.tsv")]) == 0
    assert run(["ner", "annotate", "--keywords", str(w / "kw.tsv"), "--in", str(w / "c.train.tsv"),
                "--out", str(w / "silver.tsv")]) == 0
    for flag in ([], ["--use-pos-feature"]):
        name = "pos" if flag else "plain"
        assert run(["ner", "train", "--config", str(w / "cfg.json"), "--train", str(w / "silver.tsv"),
                    "--dev", str(w / "c.dev.tsv"), "--out", str(w / f"{name}.bin"),
                    "--report", str(w / f"{name}.json"), *flag]) == 0
        assert run(["ner", "eval", "--model", str(w / f"{name}.bin"), "--test", str(w / "c.test.tsv"),
                    "--report", str(w / f"{name}-eval.json")]) == 0
        assert "NonEntity" in json.loads((w / f"{name}-eval.json").read_text())["per_class"]


def test_vectors_commands(workdir):
    w = workdir
    assert run(["vectors", "induce", "--vectors", str(w / "c.vec"), "--buckets", "997",
                "--out", str(w / "sub.bin")]) == 0
    for mode in ("oov-only", "all"):
        assert run(["vectors", "backfill", "--vectors", str(w / "c.vec"), "--mode", mode,
                    "--corpus", str(w / "c.tsv"), "--subword", str(w / "sub.bin"),
                    "--out", str(w / f"{mode}.vec"), "--report", str(w / f"{mode}.json")]) == 0
        assert json.loads((w / f"{mode}.json").read_text())["mode"] == mode
    assert run(["vectors", "backfill", "--vectors", str(w / "c.vec"), "--subword", str(w / "c.vec"),
                "--out", str(w / "x.vec")]) == 2


def test_perturb_and_gradcheck(workdir, capsys):
    assert run(["perturb", "--in", str(workdir / "c.test.tsv"), "--seed", "1",
                "--out", str(workdir / "p.tsv")]) == 0
    assert run(["gradcheck", "--report", str(workdir / "g.json")]) == 0
    assert json.loads((workdir / "g.json").read_text())["max_rel_error"] < 1e-4
    assert run(["gradcheck", "--threshold", "0"]) == 3
