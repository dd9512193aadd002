"""Command-line surface: reproducible runs over corpora and single files.

Exit codes: 0 clean, 1 diagnostics found, 2 usage error, 3 unanalyzable
input. Every command that writes a corpus or report writes a
`<output>.manifest.json` sidecar recording the command, config, seed and
inputs; rerunning with the same inputs reproduces outputs byte for byte
(wall time excluded).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import typegate
from typegate import corpus as corpus_mod
from typegate import detect, label, metrics, mutate
from typegate.errors import (
    LexError,
    NoSiteError,
    ParseError,
    SchemaError,
    TypegateError,
    UnsupportedSyntax,
)
from typegate.source import parse_function, tokenize
from typegate.typecheck import CheckConfig, check, parse_stub_set

EXIT_CLEAN = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_UNANALYZABLE = 3


def _env_seed() -> int | None:
    raw = os.environ.get("TYPEGATE_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        return None


def _write_text_atomic(path: Path, payload: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_manifest(output: Path, command: str, args: argparse.Namespace,
                    inputs: list[str], started: float) -> None:
    config = {
        key: value
        for key, value in sorted(vars(args).items())
        if key != "func" and isinstance(value, (str, int, float, bool, list, type(None)))
    }
    manifest = {
        "command": command,
        "config": config,
        "seed": getattr(args, "seed", None),
        "inputs": inputs,
        "outputs": [str(output)],
        "tool_version": typegate.__version__,
        "wall_time_s": round(time.monotonic() - started, 3),
    }
    _write_text_atomic(Path(str(output) + ".manifest.json"),
                       json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _parallel_map(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _check_config(args: argparse.Namespace) -> CheckConfig:
    stubs = None
    if getattr(args, "stubs", None):
        stubs = parse_stub_set(Path(args.stubs).read_text(encoding="utf-8"))
    return CheckConfig(use_annotations=args.annotations, ambient_stubs=stubs)


# -- commands ---------------------------------------------------------------------


def cmd_check(args: argparse.Namespace) -> int:
    path = Path(args.file)
    if not path.is_file():
        print(f"error: no such file: {path}", file=sys.stderr)
        return EXIT_USAGE
    source = path.read_text(encoding="utf-8")
    try:
        tree = parse_function(tokenize(source))
    except (LexError, ParseError, UnsupportedSyntax) as exc:
        print(f"{path}: unanalyzable: {exc}", file=sys.stderr)
        return EXIT_UNANALYZABLE
    diagnostics = check(tree, _check_config(args))
    if args.format == "json":
        payload = [
            {
                "category": d.category.value,
                "line": d.span.line,
                "column": d.span.column,
                "message": d.message,
            }
            for d in diagnostics
        ]
        print(json.dumps(payload, indent=2))
    else:
        for d in diagnostics:
            print(f"{path}:{d.span.line}:{d.span.column}: {d.category.value}: {d.message}")
    return EXIT_FINDINGS if diagnostics else EXIT_CLEAN


def cmd_inject(args: argparse.Namespace) -> int:
    started = time.monotonic()
    seed = args.seed if args.seed is not None else (_env_seed() or 0)
    args.seed = seed  # manifests record the effective seed
    corpus = corpus_mod.read_jsonl(args.corpus_in)
    rng_gate = mutate.misuse_rng  # per-sample decision stream

    def transform(sample: corpus_mod.ProgramSample) -> corpus_mod.ProgramSample:
        if sample.is_buggy:
            return sample
        gate = rng_gate(seed, f"rate:{sample.id}").random()
        if gate >= args.rate:
            return sample
        try:
            return mutate.inject_misuse(sample, seed)
        except (NoSiteError, LexError, ParseError, UnsupportedSyntax):
            return sample

    samples = _parallel_map(transform, corpus.samples, args.jobs)
    out = corpus_mod.Corpus(
        samples=samples,
        header=corpus_mod.CorpusHeader(name=Path(args.corpus_out).stem, seed=seed,
                                       parents=(str(args.corpus_in),)),
    )
    corpus_mod.write_jsonl(out, args.corpus_out)
    _write_manifest(Path(args.corpus_out), "inject", args, [str(args.corpus_in)], started)
    injected = sum(1 for s in samples if s.is_buggy) - sum(1 for s in corpus.samples if s.is_buggy)
    print(f"injected {injected} bugs into {len(samples)} samples -> {args.corpus_out}")
    return EXIT_CLEAN


def cmd_label(args: argparse.Namespace) -> int:
    started = time.monotonic()
    corpus = corpus_mod.read_jsonl(args.corpus)
    config = CheckConfig(use_annotations=args.annotations)

    def relabel(sample: corpus_mod.ProgramSample) -> corpus_mod.ProgramSample:
        if not sample.is_buggy:
            return sample
        return label.apply_labels(sample, label.label_sample(sample, config))

    samples = _parallel_map(relabel, corpus.samples, args.jobs)
    out_path = Path(args.out or args.corpus)
    out = corpus_mod.Corpus(samples=samples, header=corpus.header)
    corpus_mod.write_jsonl(out, out_path)
    _write_manifest(out_path, "label", args, [str(args.corpus)], started)
    histogram = corpus_mod.category_histogram(out)
    buggy = [s for s in samples if s.is_buggy]
    flagged = sum(1 for s in buggy if s.type_related)
    print(f"type-related: {flagged}/{len(buggy)} buggy samples")
    for category, count in sorted(histogram.items(), key=lambda kv: (-kv[1], kv[0])):
        print(f"  {category}: {count}")
    return EXIT_CLEAN


def _build_detector(
    spec: str, config: CheckConfig, clients: list[detect.ExternalDetector]
) -> tuple[str, detect.Detector]:
    kind, _, option = spec.partition(":")
    if kind == "typecheck":
        return spec, lambda s: detect.typecheck_detector(s, config)
    if kind == "heuristic":
        threshold = float(option) if option else 0.5
        return spec, lambda s: detect.heuristic_detector(s, threshold)
    if kind == "external":
        if not option:
            raise ValueError("external detector spec needs a command: external:CMD")
        client = detect.ExternalDetector(option.split())
        client.start()
        clients.append(client)
        return spec, client.detect
    raise ValueError(f"unknown detector spec {spec!r}")


def cmd_eval(args: argparse.Namespace) -> int:
    started = time.monotonic()
    corpus = corpus_mod.read_jsonl(args.corpus)
    config = CheckConfig(use_annotations=args.annotations)
    betas = tuple(args.beta)
    rows: list[str] = []
    corpus_name = Path(args.corpus).stem

    clients: list[detect.ExternalDetector] = []
    try:
        specs = [_build_detector(spec, config, clients) for spec in args.detector]
        settings: list[tuple[str, detect.Detector]] = list(specs)
        if args.cascade:
            tc = lambda s: detect.typecheck_detector(s, config)
            for name, fn in specs:
                if not name.startswith("typecheck"):
                    settings.append((f"cascade({name})", detect.cascade(tc, fn)))

        for name, fn in settings:
            jobs = 1 if "external" in name else args.jobs
            outcome_list = _parallel_map(fn, corpus.samples, jobs)
            outcomes = {s.id: o for s, o in zip(corpus.samples, outcome_list)}
            report = metrics.evaluate(outcomes, corpus, betas=betas, match=args.match)
            rows.append(metrics.report_csv_row(name, corpus_name, report))
    finally:
        for client in clients:
            client.close()

    csv_text = metrics.report_csv_header(betas) + "\n" + "\n".join(rows) + "\n"
    if args.out:
        _write_text_atomic(Path(args.out), csv_text)
        _write_manifest(Path(args.out), "eval", args, [str(args.corpus)], started)
    print(csv_text, end="")
    return EXIT_CLEAN


def cmd_filter_train(args: argparse.Namespace) -> int:
    started = time.monotonic()
    seed = args.seed if args.seed is not None else (_env_seed() or 0)
    corpus = corpus_mod.read_jsonl(args.corpus)
    filtered = corpus_mod.filter_train(corpus, seed)
    corpus_mod.write_jsonl(filtered, args.out)
    args.seed = seed
    _write_manifest(Path(args.out), "filter-train", args, [str(args.corpus)], started)
    print(f"filtered corpus written to {args.out} (seed {seed})")
    return EXIT_CLEAN


def cmd_dedup(args: argparse.Namespace) -> int:
    started = time.monotonic()
    eval_corpus = corpus_mod.read_jsonl(args.eval_corpus)
    train_corpus = corpus_mod.read_jsonl(args.train_corpus)
    result = corpus_mod.dedup(eval_corpus, train_corpus)
    corpus_mod.write_jsonl(result.kept, args.out)
    _write_manifest(Path(args.out), "dedup", args,
                    [str(args.eval_corpus), str(args.train_corpus)], started)
    for label_name in (corpus_mod.LABEL_CORRECT, corpus_mod.LABEL_BUGGY):
        fraction = result.removed_fraction(label_name)
        shown = "n/a" if fraction is None else f"{fraction * 100:.2f}%"
        print(f"removed {label_name}: {shown}")
    print(f"kept {len(result.kept)} of {len(eval_corpus)} samples -> {args.out}")
    return EXIT_CLEAN


def cmd_fbeta(args: argparse.Namespace) -> int:
    started = time.monotonic()
    pairs: list[tuple[str, float, float]] = []
    with open(args.pairs, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("label,"):
                continue
            cells = line.split(",")
            if len(cells) != 3:
                print(f"error: {args.pairs}:{line_number}: expected label,precision,recall",
                      file=sys.stderr)
                return EXIT_USAGE
            pairs.append((cells[0], float(cells[1]), float(cells[2])))
    grid = sorted(float(b) for b in args.grid)
    rows = metrics.fbeta_curve(pairs, grid)
    lines = ["label,beta,score"]
    lines.extend(
        f"{label_},{beta:g},{'undef' if score is None else f'{score:.2f}'}"
        for label_, beta, score in rows
    )
    csv_text = "\n".join(lines) + "\n"
    if args.out:
        _write_text_atomic(Path(args.out), csv_text)
        _write_manifest(Path(args.out), "fbeta", args, [str(args.pairs)], started)
    print(csv_text, end="")
    return EXIT_CLEAN


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="typegate",
        description="Variable-misuse tooling: checking, injection, labeling, evaluation.",
    )
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="parallel sample fan-out (default: logical cores)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="type-check one source file")
    p.add_argument("file")
    p.add_argument("--annotations", action="store_true")
    p.add_argument("--stubs", default=None, help="companion stub file")
    p.add_argument("--format", choices=("human", "json"), default="human")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("inject", help="inject misuse bugs into correct samples")
    p.add_argument("corpus_in")
    p.add_argument("corpus_out")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--rate", type=float, default=0.5, help="fraction of correct samples to mutate")
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("label", help="label buggy samples via dual-phase checking")
    p.add_argument("corpus")
    p.add_argument("--annotations", action="store_true")
    p.add_argument("--out", default=None, help="output path (default: rewrite in place)")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("eval", help="evaluate detectors over a corpus")
    p.add_argument("corpus")
    p.add_argument("--detector", action="append", required=True,
                   help="typecheck | heuristic[:threshold] | external:CMD (repeatable)")
    p.add_argument("--cascade", action="store_true",
                   help="also evaluate type-checker-first cascades")
    p.add_argument("--match", choices=(metrics.MATCH_LINE, metrics.MATCH_TOKEN),
                   default=metrics.MATCH_LINE)
    p.add_argument("--beta", type=float, action="append", default=None,
                   help="F-beta values (repeatable; default 1 and 1.5)")
    p.add_argument("--annotations", action="store_true")
    p.add_argument("--out", default=None, help="report CSV path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("filter-train", help="replace type-related bugs by oversampling others")
    p.add_argument("corpus")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_filter_train)

    p = sub.add_parser("dedup", help="drop eval samples colliding with training metadata")
    p.add_argument("eval_corpus")
    p.add_argument("train_corpus")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("fbeta", help="F-beta curves for precision/recall pairs")
    p.add_argument("--pairs", required=True, help="CSV of label,precision,recall")
    p.add_argument("--grid", required=True, nargs="+", help="beta grid values")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fbeta)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "beta", None) is None and args.command == "eval":
        args.beta = [1.0, 1.5]
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TypegateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FINDINGS


if __name__ == "__main__":
    sys.exit(main())
