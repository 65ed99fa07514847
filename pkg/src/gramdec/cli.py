"""Command-line surface: thin adapters from flags and files to the library.

Exit codes: 0 success, 1 usage error, 2 data error. With --json, errors go
to stderr as {"error": ...}. A JSON config file may supply defaults for any
flag; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .decoder import DecodeConfig, HttpScorer, decode, train_ngram
from .earley import check_string, init_state
from .errors import GramdecError
from .grammar import parse_grammar, reduce, serialize_grammar
from .induction import (
    induce_lispress_grammar,
    induce_mtop_grammar,
    load_signatures,
    parse_mtop,
    type_check,
)
from .lispress import parse_sexp
from .prompting import ContextMode, PromptExample, bm25_scores, build_prompt, render_input
from .splits import (
    MetricReport,
    aggregate_low,
    evaluate,
    load_dataset_jsonl,
    make_splits,
)
from .sql import load_base_sql_grammar, load_schema_json, specialize_sql_grammar
from .tokens import allowed_tokens, build_trie, dense_mask, load_vocab_jsonl


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_grammar(path: str | None):
    if path is None:
        return reduce(load_base_sql_grammar())
    return reduce(parse_grammar(_read(path)))


def _emit(args, payload: dict, plain: str):
    if args.json:
        print(json.dumps(payload))
    else:
        print(plain)


# ---------------------------------------------------------------------------
# Subcommand handlers


def _cmd_check(args):
    g = _load_grammar(args.grammar)
    verdict, offset = check_string(g, args.input)
    if verdict == "accepted":
        _emit(args, {"verdict": "accepted"}, "accepted")
        return 0
    if verdict == "rejected":
        _emit(
            args,
            {"verdict": "rejected", "offset": offset},
            f"rejected at offset {offset}",
        )
    else:
        _emit(
            args,
            {"verdict": "incomplete", "offset": offset},
            f"incomplete: viable prefix but not a member (consumed {offset})",
        )
    return 2


def _cmd_allowed_chars(args):
    g = _load_grammar(args.grammar)
    state, consumed = init_state(g).advance_string(args.prefix)
    if state is None:
        _emit(
            args,
            {"error": f"prefix rejected at offset {consumed}"},
            f"prefix rejected at offset {consumed}",
        )
        return 2
    mask = state.allowed_next_chars()
    payload = {
        "chars": sorted(mask.positive),
        "negated_classes": [sorted(n) for n in mask.negated_classes],
        "complete": state.is_complete(),
    }
    _emit(args, payload, json.dumps(payload))
    return 0


def _cmd_allowed_tokens(args):
    g = _load_grammar(args.grammar)
    vocab = load_vocab_jsonl(_read(args.vocab))
    trie = build_trie(vocab)
    state, consumed = init_state(g).advance_string(args.prefix)
    if state is None:
        _emit(
            args,
            {"error": f"prefix rejected at offset {consumed}"},
            f"prefix rejected at offset {consumed}",
        )
        return 2
    ids = sorted(allowed_tokens(state, trie))
    payload = {"tokens": ids}
    if args.dense:
        payload["mask"] = dense_mask(ids, vocab.size)
    _emit(args, payload, json.dumps(payload))
    return 0


def _cmd_induce_grammar(args):
    dataset = load_dataset_jsonl(_read(args.dataset))
    if not dataset:
        raise GramdecError("empty dataset")
    if args.format == "lispress":
        if not args.signatures:
            raise UsageError("--signatures is required for lispress induction")
        sigs = load_signatures(_read(args.signatures))
        typed = [type_check(parse_sexp(ex.gold), sigs) for ex in dataset]
        grammar = induce_lispress_grammar(typed, sigs, root_type=args.root_type)
    else:
        trees = [parse_mtop(ex.gold) for ex in dataset]
        grammar = induce_mtop_grammar(trees)
    text = serialize_grammar(grammar)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        _emit(
            args,
            {"out": args.out, "productions": len(grammar.productions)},
            f"wrote {args.out} ({len(grammar.productions)} productions)",
        )
    else:
        sys.stdout.write(text)
    return 0


def _cmd_specialize_sql(args):
    base = _load_grammar(args.grammar) if args.grammar else load_base_sql_grammar()
    schema = load_schema_json(_read(args.schema))
    g = specialize_sql_grammar(base, schema)
    text = serialize_grammar(g)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        _emit(
            args,
            {"out": args.out, "productions": len(g.productions)},
            f"wrote {args.out} ({len(g.productions)} productions)",
        )
    else:
        sys.stdout.write(text)
    return 0


def _cmd_decode(args):
    vocab = load_vocab_jsonl(_read(args.vocab))
    grammar = _load_grammar(args.grammar) if args.grammar else None
    constrained = True if args.constrained is None else args.constrained
    cfg = DecodeConfig(
        beam_size=args.beam,
        max_tokens=args.max_tokens,
        constrained=constrained,
    )
    if args.scorer == "http":
        if not args.url:
            raise UsageError("--url is required for the http scorer")
        scorer = HttpScorer(args.url)
    else:
        if not args.ngram_corpus:
            raise UsageError("--ngram-corpus is required for the ngram scorer")
        corpus = [
            json.loads(line)
            for line in _read(args.ngram_corpus).splitlines()
            if line.strip()
        ]
        scorer = train_ngram(corpus, args.ngram_order, vocab_size=vocab.size)
    results = decode(scorer, grammar, vocab, cfg, conditioning=args.input or "")
    payload = [{"text": r.text, "logprob": r.logprob} for r in results]
    out_text = json.dumps(payload, indent=None)
    if args.out:
        Path(args.out).write_text(out_text + "\n", encoding="utf-8")
    print(out_text)
    return 0


def _cmd_make_splits(args):
    dataset = load_dataset_jsonl(_read(args.dataset))
    spec = make_splits(
        dataset,
        has_public_test=not args.no_public_test,
        seed=args.seed,
        disjoint_low=not args.overlapping_low,
    )
    manifest = spec.to_manifest()
    if args.out:
        Path(args.out).write_text(manifest, encoding="utf-8")
        _emit(args, {"out": args.out}, f"wrote {args.out}")
    else:
        sys.stdout.write(manifest)
    return 0


def _cmd_build_prompt(args):
    dataset = load_dataset_jsonl(_read(args.dataset))
    mode = ContextMode(args.context_mode, with_values=args.db_values)
    pool = [render_input(ex, mode) for ex in dataset]
    target = args.target
    scores = bm25_scores(target, pool)
    examples = [
        PromptExample(uc=pool[i], p=dataset[i].gold, relevance=scores[i])
        for i in range(len(dataset))
    ]
    prompt = build_prompt(
        examples,
        target,
        order=args.order,
        budget=args.budget,
        max_examples=args.max_examples,
        seed=args.seed,
    )
    if args.emit_json:
        print(json.dumps({"prompt": prompt.text, "n_examples": prompt.n_examples}))
    else:
        print(prompt.text)
    return 0


def _cmd_evaluate(args):
    if args.aggregate:
        reports = []
        for path in args.aggregate:
            data = json.loads(_read(path))
            reports.append(
                MetricReport(
                    data["metric"],
                    data["accuracy"],
                    data["n"],
                    [(i, c) for i, c in data["correct"]],
                    data.get("parse_failures", 0),
                )
            )
        mean, std = aggregate_low(reports)
        print(json.dumps({"mean": mean, "stddev": std}))
        return 0
    gold = load_dataset_jsonl(_read(args.dataset))
    predictions = []
    for line in _read(args.predictions).splitlines():
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        predictions.append((str(rec["id"]), rec["prediction"]))
    report = evaluate(predictions, gold, args.metric)
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(
        json.dumps(
            {
                "metric": report.metric,
                "accuracy": report.accuracy,
                "n": report.n,
                "parse_failures": report.parse_failures,
            }
        )
    )
    return 0


# ---------------------------------------------------------------------------
# Parser wiring


def _build_parser() -> _Parser:
    parser = _Parser(prog="gramdec", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--config", help="JSON file with default flag values")

    p = sub.add_parser("check", help="test string membership in a grammar")
    common(p)
    p.add_argument("--grammar", required=True)
    p.add_argument("--input", required=True)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("allowed-chars", help="legal next characters for a prefix")
    common(p)
    p.add_argument("--grammar", required=True)
    p.add_argument("--prefix", default="")
    p.set_defaults(func=_cmd_allowed_chars)

    p = sub.add_parser("allowed-tokens", help="legal next token ids for a prefix")
    common(p)
    p.add_argument("--grammar", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--prefix", default="")
    p.add_argument("--dense", action="store_true", help="also emit a dense mask")
    p.set_defaults(func=_cmd_allowed_tokens)

    p = sub.add_parser("induce-grammar", help="induce a CFG from training data")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--format", choices=["lispress", "mtop"], required=True)
    p.add_argument("--signatures", help="signature JSONL (lispress only)")
    p.add_argument("--root-type", help="override the root type (lispress only)")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_induce_grammar)

    p = sub.add_parser("specialize-sql", help="apply schema constraints to SQL grammar")
    common(p)
    p.add_argument("--grammar", help="base grammar (default: shipped SQL subset)")
    p.add_argument("--schema", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_specialize_sql)

    p = sub.add_parser("decode", help="constrained beam search")
    common(p)
    p.add_argument("--grammar")
    p.add_argument("--vocab", required=True)
    p.add_argument("--scorer", choices=["ngram", "http"], default="ngram")
    p.add_argument("--url", help="scorer endpoint (http scorer)")
    p.add_argument("--ngram-corpus", help="JSONL of token-id lists (ngram scorer)")
    p.add_argument("--ngram-order", type=int, default=2)
    p.add_argument("--beam", type=int, default=5)
    p.add_argument("--max-tokens", type=int, default=128)
    p.add_argument("--constrained", dest="constrained", action="store_true", default=None)
    p.add_argument("--unconstrained", dest="constrained", action="store_false")
    p.add_argument("--input", help="conditioning string")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("make-splits", help="emit the benchmark split manifest")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-public-test", action="store_true")
    p.add_argument("--overlapping-low", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_make_splits)

    p = sub.add_parser("build-prompt", help="BM25 retrieval + few-shot prompt")
    common(p)
    p.add_argument("--dataset", required=True, help="training pool JSONL")
    p.add_argument("--target", required=True, help="rendered target input")
    p.add_argument("--context-mode", default="none")
    p.add_argument("--db-values", action="store_true")
    p.add_argument(
        "--order", choices=["random", "best_first", "best_last"], default="best_last"
    )
    p.add_argument("--budget", type=int, default=1500)
    p.add_argument("--max-examples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--emit-json", action="store_true")
    p.set_defaults(func=_cmd_build_prompt)

    p = sub.add_parser("evaluate", help="score predictions against gold")
    common(p)
    p.add_argument("--predictions")
    p.add_argument("--dataset")
    p.add_argument("--metric", default="exact")
    p.add_argument(
        "--aggregate",
        nargs=3,
        metavar="REPORT",
        help="three report JSON files to aggregate instead",
    )
    p.add_argument("--out")
    p.set_defaults(func=_cmd_evaluate)

    return parser


def _apply_config(args):
    if not getattr(args, "config", None):
        return
    data = json.loads(_read(args.config))
    if not isinstance(data, dict):
        raise GramdecError("config file must hold a JSON object")
    for key, value in data.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) in (None, False):
            setattr(args, attr, value)


def main(argv=None) -> int:
    parser = _build_parser()
    args = None
    try:
        args = parser.parse_args(argv)
        _apply_config(args)
        if getattr(args, "predictions", "ok") is None and not getattr(
            args, "aggregate", None
        ):
            raise UsageError("evaluate needs --predictions/--dataset or --aggregate")
        return args.func(args)
    except UsageError as exc:
        _fail(args, str(exc))
        return 1
    except (GramdecError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        _fail(args, str(exc))
        return 2


def _fail(args, message: str):
    if args is not None and getattr(args, "json", False):
        print(json.dumps({"error": message}), file=sys.stderr)
    else:
        print(f"error: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
