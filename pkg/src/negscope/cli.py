"""``negscope`` command line.

Exit codes: 0 success, 1 usage error, 2 data or resource error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from negscope import __version__, data_path
from negscope.classify import Classifier, ModelFormatError, TrainConfig, TrainingError, dumps_model
from negscope.corpus import (
    LabeledCorpus,
    ResourceError,
    Review,
    corpus_stats,
    load_corpus,
    load_negation_config,
    load_preprocess_options,
    load_sentiment_lexicon,
    load_stopwords,
    parse_config_sections,
)
from negscope.evaluate import Resources, compare_grid, cross_validate, fit, stratified_folds, tag_corpus
from negscope.features import write_vocabulary
from negscope.negation import PolicyKind, ScopePolicy, apply_policy, render_tagged
from negscope.preprocess import preprocess_review

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fold_count(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid fold count {value!r}") from None
    if n < 2:
        raise argparse.ArgumentTypeError(f"fold count must be >= 2, got {n}")
    return n


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_resources(args) -> tuple[Resources, dict]:
    """Resolve resource paths from ``--config`` and the per-file overrides."""
    config_path = Path(args.config or data_path("negation.cfg"))
    settings: dict[str, str] = {}
    _, sections = parse_config_sections(config_path)
    for name, _, lines in sections:
        if name == "resources":
            for lineno, line in lines:
                key, sep, value = (s.strip() for s in line.partition("="))
                if not sep:
                    raise ResourceError(f"expected `key = value`, got {line!r}", config_path, lineno)
                settings[key] = value

    def resolve(flag: Optional[str], key: str) -> Optional[Path]:
        if flag:
            return Path(flag)
        if key in settings:
            return (config_path.parent / settings[key]).resolve()
        return None

    options = load_preprocess_options(config_path)
    config = load_negation_config(config_path, options)
    lexicon_path = resolve(args.lexicon, "lexicon")
    if lexicon_path is None:
        raise ResourceError("no sentiment lexicon: pass --lexicon or set it under [resources]", config_path)
    stop_path = resolve(args.stopwords, "stopwords")
    lexicon = load_sentiment_lexicon(lexicon_path, options)
    stopwords = load_stopwords(stop_path, options) if stop_path else frozenset()
    inputs = {
        "config": {"path": str(config_path), "sha256": _digest(config_path)},
        "lexicon": {"path": str(lexicon_path), "sha256": _digest(lexicon_path)},
    }
    if stop_path:
        inputs["stopwords"] = {"path": str(stop_path), "sha256": _digest(stop_path)}
    return Resources(lexicon, config, stopwords, options), inputs


def _load_corpus(args):
    corpus = load_corpus(args.corpus, args.format)
    return corpus, {"path": str(args.corpus), "sha256": _digest(args.corpus)}


def _manifest(args, inputs: dict, **extra) -> dict:
    return {
        "tool_version": __version__,
        "command": args.command,
        "seed": args.seed,
        **extra,
        "inputs": inputs,
    }


def _train_config(args, classifier) -> TrainConfig:
    return TrainConfig(
        classifier=classifier,
        k_neighbors=args.k_neighbors,
        epochs=args.epochs,
        svm_c=args.svm_c,
        nb_alpha=args.nb_alpha,
        logreg_learning_rate=args.learning_rate,
        logreg_l2=args.l2,
        seed=args.seed,
    )


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_stats(args) -> int:
    resources, _ = load_resources(args)
    corpus, _ = _load_corpus(args)
    stats = corpus_stats(corpus, resources.config, resources.options)
    if args.json:
        print(json.dumps(stats.to_dict(), indent=2))
        return 0

    def share(v):
        return "n/a" if v is None else f"{v:.4f}"

    print(f"reviews:              {stats.total_reviews}")
    print(f"with negation terms:  {stats.reviews_with_trigger}")
    print(f"prevalence:           {stats.prevalence:.4f}")
    print(f"negative share:       {share(stats.negative_share)}")
    print(f"positive share:       {share(stats.positive_share)}")
    return 0


def cmd_tag(args) -> int:
    if args.command == "explain":
        args.explain = True
        args.policy = "rules"
    resources, _ = load_resources(args)
    if args.text is not None:
        corpus = LabeledCorpus((Review("text", args.text),))
    elif args.corpus:
        corpus, _ = _load_corpus(args)
    else:
        raise UsageError("give a corpus path or --text")
    policy = ScopePolicy.parse(args.policy, resources.config.window_length)
    records = []
    lines = []
    for review in corpus:
        tokenized = preprocess_review(review, resources.options)
        tagged, trace = apply_policy(tokenized, policy, resources.config, resources.lexicon)
        rendered = render_tagged(tagged)
        if args.json:
            record = {"id": review.id, "tokens": rendered.split(" ") if rendered else []}
            if args.explain and trace is not None:
                record["triggers"] = [r.to_dict() for r in trace.records]
            records.append(json.dumps(record, ensure_ascii=False))
            continue
        if args.explain and trace is not None:
            lines.append(f"# {review.id}")
            lines.extend(r.describe() for r in trace.records)
        lines.append(f"{review.id}\t{rendered}" if args.text is None else rendered)
    body = records if args.json else lines
    _emit("".join(l + "\n" for l in body), args.out)
    return 0


def cmd_train(args) -> int:
    classifier = Classifier(args.classifier)
    if classifier is Classifier.KNN:
        raise TrainingError(
            "KNN models are not serialized standalone; use `negscope evaluate --classifier knn` "
            "(or export the training matrix)"
        )
    if not args.out:
        raise UsageError("--out is required for train")
    resources, inputs = load_resources(args)
    corpus, corpus_input = _load_corpus(args)
    inputs["corpus"] = corpus_input
    policy = ScopePolicy.parse(args.policy, resources.config.window_length)
    config = _train_config(args, classifier)
    tagged = tag_corpus(corpus, policy, resources)
    model, vocab, _ = fit(tagged, config)
    manifest = _manifest(args, inputs, policy=policy.kind.value, classifier=classifier.value, train=config.to_dict())
    Path(args.out).write_text(dumps_model(model, manifest), encoding="utf-8")
    write_vocabulary(vocab, args.out + ".vocab")
    print(f"wrote {args.out} ({len(vocab)} features) and {args.out}.vocab")
    return 0


def _fmt(v) -> str:
    return "n/a" if v is None else f"{v:.3f}"


def cmd_evaluate(args) -> int:
    resources, inputs = load_resources(args)
    corpus, inputs["corpus"] = _load_corpus(args)
    policy = ScopePolicy.parse(args.policy, resources.config.window_length)
    classifier = Classifier(args.classifier)
    config = _train_config(args, classifier)
    plan = stratified_folds(corpus, args.folds, args.seed, stratify=not args.no_stratify)
    result = cross_validate(corpus, policy, config, resources, plan)
    if args.json:
        payload = {
            "policy": policy.kind.value,
            "classifier": classifier.value,
            **result.to_dict(),
            "manifest": _manifest(args, inputs, policy=policy.kind.value, classifier=classifier.value,
                                  folds=args.folds, stratified=not args.no_stratify, train=config.to_dict()),
        }
        print(json.dumps(payload, ensure_ascii=False, indent=2))
        return 0
    m = result.metrics
    print(f"policy={policy.kind.value} classifier={classifier.value} folds={args.folds} seed={args.seed}")
    print(f"accuracy  {_fmt(m.accuracy)}")
    print(f"precision {_fmt(m.precision)}")
    print(f"recall    {_fmt(m.recall)}")
    print(f"(pooled over folds: tp={result.confusion.tp} tn={result.confusion.tn} "
          f"fp={result.confusion.fp} fn={result.confusion.fn})")
    print()
    print(f"{'fold':>4} {'features':>9} {'tp':>4} {'tn':>4} {'fp':>4} {'fn':>4} {'accuracy':>9} {'precision':>10} {'recall':>7}")
    for f in result.folds:
        fm = f.metrics
        c = f.confusion
        print(f"{f.fold:>4} {f.n_features:>9} {c.tp:>4} {c.tn:>4} {c.fp:>4} {c.fn:>4} "
              f"{_fmt(fm.accuracy):>9} {_fmt(fm.precision):>10} {_fmt(fm.recall):>7}")
    return 0


def cmd_compare(args) -> int:
    resources, inputs = load_resources(args)
    corpus, inputs["corpus"] = _load_corpus(args)
    window = resources.config.window_length
    policies = [ScopePolicy.parse(p, window) for p in args.policies.split(",")]
    classifiers = [Classifier(c) for c in args.classifiers.split(",")]
    base = _train_config(args, Classifier.SVM)
    manifest = _manifest(args, inputs, folds=args.folds, stratified=not args.no_stratify)
    report = compare_grid(
        corpus, policies, classifiers, resources,
        seed=args.seed, n_folds=args.folds, stratify=not args.no_stratify,
        base_config=base, manifest=manifest,
    )
    table, blob = report.to_table(), report.to_json()
    prefix = Path(args.out)
    prefix.with_name(prefix.name + ".json").write_text(blob, encoding="utf-8")
    prefix.with_name(prefix.name + ".txt").write_text(table, encoding="utf-8")
    sys.stdout.write(blob if args.json else table)
    return 0


def cmd_generate(args) -> int:
    from negscope.corpus import save_corpus
    from negscope.synthetic import generate_planted_corpus

    planted = generate_planted_corpus(args.n, args.negated_fraction, args.seed)
    if args.out:
        save_corpus(planted.corpus, args.out, args.format)
    else:
        for r in planted.corpus:
            print(f"{r.id}\t{r.text}\t{r.label.value}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="negation config file (also names lexicon / stop words)")
    common.add_argument("--lexicon", help="sentiment lexicon, overrides the config")
    common.add_argument("--stopwords", help="stop-word list, overrides the config")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--format", choices=("tsv", "jsonl"), default="tsv", help="corpus file format")

    train_opts = _Parser(add_help=False)
    train_opts.add_argument("--k-neighbors", type=int, default=50)
    train_opts.add_argument("--epochs", type=int, default=100)
    train_opts.add_argument("--svm-c", type=float, default=1.0)
    train_opts.add_argument("--nb-alpha", type=float, default=1.0)
    train_opts.add_argument("--learning-rate", type=float, default=0.1)
    train_opts.add_argument("--l2", type=float, default=1e-3)

    policies = [k.value for k in PolicyKind]
    classifiers = [c.value for c in Classifier]

    parser = _Parser(prog="negscope", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"negscope {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("stats", parents=[common], help="share of reviews containing negation terms")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_stats)

    for name, helptext in (("tag", "tag negated tokens with _!"), ("explain", "alias for tag --explain --policy rules")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("corpus", nargs="?")
        p.add_argument("--text", help="tag a single review given on the command line")
        p.add_argument("--out", help="write here instead of stdout")
        if name == "tag":
            p.add_argument("--policy", choices=policies, default="rules")
            p.add_argument("--explain", action="store_true", help="print the rule trace per trigger")
        p.set_defaults(func=cmd_tag)

    p = sub.add_parser("train", parents=[common, train_opts], help="train on the full corpus and save the model")
    p.add_argument("corpus")
    p.add_argument("--policy", choices=policies, default="rules")
    p.add_argument("--classifier", choices=classifiers, default="svm")
    p.add_argument("--out", help="model path; the vocabulary goes to <out>.vocab")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common, train_opts], help="k-fold cross-validation of one setting")
    p.add_argument("corpus")
    p.add_argument("--policy", choices=policies, default="rules")
    p.add_argument("--classifier", choices=classifiers, default="svm")
    p.add_argument("--folds", type=_fold_count, default=10)
    p.add_argument("--no-stratify", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", parents=[common, train_opts], help="all policies x all classifiers")
    p.add_argument("corpus")
    p.add_argument("--policies", default=",".join(policies))
    p.add_argument("--classifiers", default=",".join(classifiers))
    p.add_argument("--folds", type=_fold_count, default=10)
    p.add_argument("--no-stratify", action="store_true")
    p.add_argument("--out", default="comparison", help="report prefix: writes <out>.json and <out>.txt")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("generate", parents=[common], help="write a planted-negation synthetic corpus")
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--negated-fraction", type=float, default=0.25)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"negscope: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceError, TrainingError, ModelFormatError, ValueError, OSError) as exc:
        print(f"negscope: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
