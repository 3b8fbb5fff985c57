"""Command-line entry point: ``morfo <group> <command> [options]``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, fields
from pathlib import Path

from morfo.corpus import (
    SplitSpec,
    corpus_stats,
    load_tag_map,
    parse_corpus_tsv,
    split_corpus,
    write_corpus_tsv,
    Corpus,
    Sentence,
    Token,
)
from morfo.errors import ConfigError, DataError, MorfoError, NumericError
from morfo.network import ModelConfig, gradient_check, load_model, save_model

log = logging.getLogger("morfo")

RUN_KEYS = {
    "train": None, "dev": None, "vectors": None, "tag_map": None, "model_out": None,
    "report": None, "mode": "supertag", "use_pos_feature": False, "pos_source": "gold",
    "pos_model": None,
}


class UsageError(MorfoError):
    exit_code = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


# -- helpers -------------------------------------------------------------------

def load_run_config(path) -> tuple[ModelConfig, dict]:
    """Split a RunConfig JSON into model hyperparameters and run options."""
    run = dict(RUN_KEYS)
    model_keys = {}
    if path:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        known = {f.name for f in fields(ModelConfig)}
        unknown = set(raw) - known - set(RUN_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        model_keys = {k: v for k, v in raw.items() if k in known}
        run.update({k: v for k, v in raw.items() if k in RUN_KEYS})
    return ModelConfig.from_dict(model_keys), run


def write_report(report: dict, path) -> None:
    text = json.dumps(report, ensure_ascii=False, sort_keys=True, indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")


def _pick(cli_value, run, key):
    return cli_value if cli_value is not None else run.get(key)


def _require(value, flag):
    if value is None:
        raise UsageError(f"missing required option {flag}")
    return value


def _load_vectors(path):
    if not path:
        return None
    from morfo.vectors import load_vec_text

    return load_vec_text(path)


def _figures(args, report_path, history=None, per_class=None, title=""):
    if not report_path or args.no_figures:
        return
    from morfo.plotting import figure_path, plot_per_class_f1, plot_training_curve

    if history:
        plot_training_curve(history, figure_path(report_path, "curve"), title)
    if per_class:
        plot_per_class_f1(per_class, figure_path(report_path, "f1"), title)


# -- corpus ------------------------------------------------------------------------

def cmd_corpus_split(args):
    corpus = parse_corpus_tsv(args.input)
    parts = split_corpus(corpus, SplitSpec(args.train, args.test, args.dev, args.seed))
    out_dir = Path(args.out_dir) if args.out_dir else Path(args.input).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    for name, part in zip(("train", "test", "dev"), parts):
        path = out_dir / f"{stem}.{name}.tsv"
        write_corpus_tsv(part, path)
        print(f"{name}: {len(part)} sentences -> {path}")


def cmd_corpus_synth(args):
    from morfo.synthetic import bundled_tag_map_path, generate_synthetic_corpus, synthetic_vectors
    from morfo.vectors import save_vec_text

    corpus = generate_synthetic_corpus(args.n, args.seed, args.oov_split)
    write_corpus_tsv(corpus, args.out)
    print(f"wrote {len(corpus)} sentences, {corpus.n_tokens()} tokens -> {args.out}")
    if args.vectors_out:
        table = synthetic_vectors(args.seed, args.dim)
        save_vec_text(table, args.vectors_out)
        print(f"wrote {len(table)} vectors of dim {table.dim} -> {args.vectors_out}")
    if args.tag_map_out:
        Path(args.tag_map_out).write_text(bundled_tag_map_path().read_text(encoding="utf-8"), encoding="utf-8")
        print(f"wrote tag map -> {args.tag_map_out}")


def cmd_corpus_stats(args):
    stats = corpus_stats(parse_corpus_tsv(args.input))
    if args.report:
        write_report(stats, args.report)
    for key in ("sentences", "tokens", "types", "fine_tags"):
        print(f"{key:>10}: {stats[key]}")
    print(f"{'upos':>10}: " + ", ".join(f"{k}={v}" for k, v in stats["upos"].items()))
    print(f"{'entities':>10}: " + ", ".join(f"{k}={v}" for k, v in stats["entity_tokens"].items()))


# -- tagger ------------------------------------------------------------------------

def _apply_overrides(config: ModelConfig, args):
    if args.seed is not None:
        config.seed = args.seed
    if getattr(args, "epochs", None) is not None:
        config.epochs = args.epochs
    ModelConfig.__post_init__(config)
    return config


def cmd_tagger_train(args):
    from morfo.tagger import evaluate_tagger, train_tagger

    config, run = load_run_config(args.config)
    config = _apply_overrides(config, args)
    train = parse_corpus_tsv(_require(_pick(args.train, run, "train"), "--train"))
    dev = parse_corpus_tsv(_require(_pick(args.dev, run, "dev"), "--dev"))
    mode = _pick(args.mode, run, "mode")
    tag_map_path = _pick(args.tag_map, run, "tag_map")
    tag_map = load_tag_map(tag_map_path) if tag_map_path else None
    if mode == "upos" and tag_map is None:
        from morfo.synthetic import bundled_tag_map

        tag_map = bundled_tag_map()
    pretrained = _load_vectors(_pick(args.vectors, run, "vectors"))
    out = _require(_pick(args.out, run, "model_out"), "--out")
    report_path = _pick(args.report, run, "report")

    model = train_tagger(train, dev, config, pretrained, tag_map, mode)
    save_model(model, out)
    train_eval = evaluate_tagger(model, train, train.vocabulary())
    dev_eval = evaluate_tagger(model, dev, train.vocabulary())
    report = {
        "command": "tagger train",
        "mode": mode,
        "config": asdict(model.config),
        "tag_inventory_size": len(model.tag_inventory),
        "history": model.history,
        "train": train_eval.to_dict(),
        "dev": dev_eval.to_dict(),
    }
    if report_path:
        write_report(report, report_path)
    _figures(args, report_path, history=model.history, title=f"tagger ({mode})")
    print(f"mode {mode}, {len(model.tag_inventory)} tags, {config.epochs} epochs -> {out}")
    print(f"train accuracy {train_eval.micro_accuracy:.4f}  dev accuracy {dev_eval.micro_accuracy:.4f}"
          f"  dev macro F1 {dev_eval.macro[2]:.4f}")


def cmd_tagger_eval(args):
    from morfo.tagger import evaluate_tagger

    model = load_model(args.model)
    test = parse_corpus_tsv(args.test)
    vocab = parse_corpus_tsv(args.train_vocab).vocabulary() if args.train_vocab else set()
    result = evaluate_tagger(model, test, vocab)
    report = {"command": "tagger eval", "mode": model.extra.get("mode"), "test": str(args.test),
              **result.to_dict()}
    if args.report:
        write_report(report, args.report)
    _figures(args, args.report, per_class=report["per_class"], title=f"tagger eval: {Path(args.test).name}")
    p, r, f = result.macro
    print(f"tokens {result.n_tokens}  accuracy {result.micro_accuracy:.4f}")
    print(f"macro P {p:.4f}  R {r:.4f}  F1 {f:.4f}")
    print(f"oov accuracy {result.oov_accuracy:.4f} over {result.n_oov} tokens")


def cmd_tagger_tag(args):
    from morfo.tagger import tag_corpus

    model = load_model(args.model)
    corpus = _read_text_or_tsv(args.input)
    mode = model.extra.get("mode", "supertag")
    predicted = tag_corpus(model, corpus.sentences)
    out = []
    for sent, tags in zip(corpus, predicted):
        toks = []
        for tok, t in zip(sent, tags):
            if mode == "supertag":
                toks.append(Token(tok.form, t, tok.upos, tok.morph, tok.entity))
            else:
                toks.append(Token(tok.form, tok.fine_tag, t, tok.morph, tok.entity))
        out.append(Sentence(tuple(toks)))
    write_corpus_tsv(Corpus(tuple(out)), args.out)
    print(f"tagged {len(out)} sentences -> {args.out}")


def _read_text_or_tsv(path) -> Corpus:
    """Corpus TSV, or plain text with one whitespace-tokenized sentence per line."""
    text = Path(path).read_text(encoding="utf-8")
    if "\t" in text:
        return parse_corpus_tsv(path)
    sentences = [Sentence(tuple(Token(w) for w in line.split())) for line in text.splitlines() if line.strip()]
    return Corpus(tuple(sentences), name=Path(path).stem)


# -- ner -------------------------------------------------------------------------------

def cmd_ner_build_keywords(args):
    from morfo.ner import build_keyword_list, write_keyword_list

    kl = build_keyword_list(parse_corpus_tsv(args.input))
    write_keyword_list(kl, args.out)
    print(f"{len(kl)} keyword records -> {args.out}")


def cmd_ner_annotate(args):
    from morfo.corpus import strip_entities
    from morfo.ner import annotate_corpus, read_keyword_list

    kl = read_keyword_list(args.keywords)
    corpus = strip_entities(_read_text_or_tsv(args.input))
    silver = annotate_corpus(corpus, kl)
    write_corpus_tsv(silver, args.out)
    n = sum(1 for t in silver.tokens() if t.entity != "O")
    print(f"annotated {len(silver)} sentences, {n} entity tokens -> {args.out}")


def cmd_ner_train(args):
    from morfo.ner import evaluate_ner, train_ner

    config, run = load_run_config(args.config)
    config = _apply_overrides(config, args)
    train = parse_corpus_tsv(_require(_pick(args.train, run, "train"), "--train"))
    dev = parse_corpus_tsv(_require(_pick(args.dev, run, "dev"), "--dev"))
    use_pos = args.use_pos_feature or bool(run.get("use_pos_feature"))
    pos_source = _pick(args.pos_source, run, "pos_source")
    pos_model_path = _pick(args.pos_model, run, "pos_model")
    pos_tagger = load_model(pos_model_path) if pos_model_path else None
    pretrained = _load_vectors(_pick(args.vectors, run, "vectors"))
    out = _require(_pick(args.out, run, "model_out"), "--out")
    report_path = _pick(args.report, run, "report")

    model = train_ner(train, dev, config, pretrained, use_pos, pos_source, pos_tagger)
    save_model(model, out)
    dev_eval = evaluate_ner(model, dev, pos_tagger)
    report = {
        "command": "ner train",
        "use_pos_feature": use_pos,
        "pos_source": pos_source if use_pos else None,
        "config": asdict(model.config),
        "labels": model.tag_inventory,
        "history": model.history,
        "dev": dev_eval.to_dict(),
    }
    if report_path:
        write_report(report, report_path)
    _figures(args, report_path, history=model.history, title="entity recognizer")
    print(f"{len(model.tag_inventory)} labels, {config.epochs} epochs, pos feature {use_pos} -> {out}")
    print(f"dev macro F1 {dev_eval.macro_f1:.4f}  span F1 {dev_eval.span_f1:.4f}")


def cmd_ner_eval(args):
    from morfo.ner import evaluate_ner

    model = load_model(args.model)
    pos_tagger = load_model(args.pos_model) if args.pos_model else None
    result = evaluate_ner(model, parse_corpus_tsv(args.test), pos_tagger)
    report = {"command": "ner eval", "test": str(args.test), **result.to_dict()}
    if args.report:
        write_report(report, args.report)
    _figures(args, args.report, per_class=report["per_class"], title=f"ner eval: {Path(args.test).name}")
    for cls, (p, r, f, s) in result.per_class.items():
        print(f"{cls:>10}  P {p:.3f}  R {r:.3f}  F1 {f:.3f}  support {s}")
    print(f"macro F1 {result.macro_f1:.4f}  span F1 {result.span_f1:.4f}")


# -- vectors -------------------------------------------------------------------------

def cmd_vectors_induce(args):
    from morfo.vectors import induce_subword_table, load_vec_text, save_subword_table

    sub = induce_subword_table(load_vec_text(args.vectors), args.buckets, args.seed)
    save_subword_table(sub, args.out)
    print(f"{int((sub.counts > 0).sum())} of {sub.bucket_count} buckets populated -> {args.out}")


def cmd_vectors_backfill(args):
    from morfo.vectors import backfill_table, load_subword_table, load_vec_text, save_vec_text

    table = load_vec_text(args.vectors)
    words = []
    for path in args.corpus or []:
        words.extend(t.form.lower() for t in parse_corpus_tsv(path).tokens())
    if args.words:
        words.extend(w for w in Path(args.words).read_text(encoding="utf-8").split())
    oov = [w for w in dict.fromkeys(words) if w not in table]
    sub = load_subword_table(args.subword) if args.subword else None
    if sub is not None and sub.dim != table.dim:
        raise DataError(f"subword table dim {sub.dim} differs from vector dim {table.dim}")
    out = backfill_table(table, oov, args.mode, args.buckets, args.seed, sub)
    save_vec_text(out, args.out)
    covered = [w for w in oov if w in out]
    report = {"command": "vectors backfill", "mode": args.mode, "input_size": len(table),
              "output_size": len(out), "oov_words": len(oov), "oov_covered": len(covered)}
    if args.report:
        write_report(report, args.report)
    print(f"mode {args.mode}: {len(oov)} OOV words, {len(covered)} synthesized; "
          f"{len(table)} -> {len(out)} vectors -> {args.out}")


# -- perturb / gradcheck ---------------------------------------------------------------

def cmd_perturb(args):
    from morfo.perturb import PerturbSpec, perturb_corpus

    corpus = parse_corpus_tsv(args.input)
    out = perturb_corpus(corpus, PerturbSpec(rate=args.rate, seed=args.seed))
    write_corpus_tsv(out, args.out)
    changed = sum(a.form != b.form for a, b in zip(corpus.tokens(), out.tokens()))
    print(f"perturbed {changed} tokens -> {args.out}")


def cmd_gradcheck(args):
    config = ModelConfig(width=args.width, depth=args.depth, window=args.window,
                         attn_window=args.attn_window, n_tags=args.n_tags, seed=args.seed)
    result = gradient_check(config, args.seed)
    report = {"command": "gradcheck", "max_rel_error": result.max_rel_error,
              "worst_parameter": result.worst_parameter, "n_checked": result.n_checked,
              "threshold": args.threshold}
    if args.report:
        write_report(report, args.report)
    ok = result.max_rel_error < args.threshold
    print(f"max relative error {result.max_rel_error:.3e} at {result.worst_parameter} "
          f"({result.n_checked} entries) {'OK' if ok else 'FAIL'}")
    if not ok:
        raise NumericError(f"gradient check exceeded {args.threshold}")


# -- parser ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="morfo", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default="WARNING")
    groups = parser.add_subparsers(dest="group", metavar="{corpus,tagger,ner,vectors,perturb,gradcheck}",
                                   parser_class=_Parser)
    groups.required = True

    def common_report(p, figures=True):
        p.add_argument("--report", help="write a JSON report here")
        if figures:
            p.add_argument("--no-figures", action="store_true", help="skip PNG figures next to the report")

    corpus = groups.add_parser("corpus", help="corpus utilities").add_subparsers(dest="cmd", parser_class=_Parser)
    corpus.required = True
    p = corpus.add_parser("split", help="seeded 70/20/10 sentence split")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train", type=float, default=0.7)
    p.add_argument("--test", type=float, default=0.2)
    p.add_argument("--dev", type=float, default=0.1)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_corpus_split)
    p = corpus.add_parser("synth", help="generate the synthetic Greek corpus")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oov-split", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--vectors-out")
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--tag-map-out")
    p.set_defaults(func=cmd_corpus_synth)
    p = corpus.add_parser("stats", help="token, tag and entity counts")
    p.add_argument("--in", dest="input", required=True)
    common_report(p, figures=False)
    p.set_defaults(func=cmd_corpus_stats)

    tagger = groups.add_parser("tagger", help="POS tagger").add_subparsers(dest="cmd", parser_class=_Parser)
    tagger.required = True
    p = tagger.add_parser("train")
    p.add_argument("--config", help="RunConfig JSON (model hyperparameters plus paths)")
    p.add_argument("--train")
    p.add_argument("--dev")
    p.add_argument("--mode", choices=("supertag", "upos"))
    p.add_argument("--vectors", help="pretrained vectors in .vec text format")
    p.add_argument("--tag-map")
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--out")
    common_report(p)
    p.set_defaults(func=cmd_tagger_train)
    p = tagger.add_parser("eval")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--train-vocab", help="training corpus TSV defining the in-vocabulary forms")
    common_report(p)
    p.set_defaults(func=cmd_tagger_eval)
    p = tagger.add_parser("tag")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tagger_tag)

    ner = groups.add_parser("ner", help="entity recognizer").add_subparsers(dest="cmd", parser_class=_Parser)
    ner.required = True
    p = ner.add_parser("build-keywords")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ner_build_keywords)
    p = ner.add_parser("annotate")
    p.add_argument("--keywords", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ner_annotate)
    p = ner.add_parser("train")
    p.add_argument("--config")
    p.add_argument("--train")
    p.add_argument("--dev")
    p.add_argument("--vectors")
    p.add_argument("--use-pos-feature", action="store_true")
    p.add_argument("--pos-source", choices=("gold", "model"))
    p.add_argument("--pos-model", help="tagger model supplying POS when --pos-source model")
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--out")
    common_report(p)
    p.set_defaults(func=cmd_ner_train)
    p = ner.add_parser("eval")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--pos-model")
    common_report(p)
    p.set_defaults(func=cmd_ner_eval)

    vectors = groups.add_parser("vectors", help="pretrained vectors").add_subparsers(dest="cmd", parser_class=_Parser)
    vectors.required = True
    p = vectors.add_parser("induce", help="build the subword bucket table")
    p.add_argument("--vectors", required=True)
    p.add_argument("--buckets", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_vectors_induce)
    p = vectors.add_parser("backfill", help="synthesize vectors for OOV words")
    p.add_argument("--vectors", required=True)
    p.add_argument("--mode", choices=("oov-only", "all"), default="oov-only")
    p.add_argument("--corpus", action="append", help="corpus TSV whose forms are checked (repeatable)")
    p.add_argument("--words", help="whitespace-separated word list")
    p.add_argument("--subword", help="precomputed subword table from 'vectors induce'")
    p.add_argument("--buckets", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    common_report(p, figures=False)
    p.set_defaults(func=cmd_vectors_backfill)

    p = groups.add_parser("perturb", help="OOV stress copy of a corpus")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--rate", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_perturb)

    p = groups.add_parser("gradcheck", help="finite-difference gradient check")
    p.add_argument("--width", type=int, default=8)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--window", type=int, default=1)
    p.add_argument("--attn-window", type=int, default=2)
    p.add_argument("--n-tags", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=1e-4)
    common_report(p, figures=False)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                            format="%(levelname)s %(name)s: %(message)s")
        args.func(args)
    except MorfoError as exc:
        print(f"morfo: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"morfo: {exc}", file=sys.stderr)
        return DataError.exit_code
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
