"""Command-line entry point: extract, generate, evaluate, inspect, capacity.

Exit codes are a stable contract: 0 success, 2 domain failure (bad inputs,
empty results, exhausted budgets), 3 environment failure (missing compiler
or objcopy). Commands that produce output directories refuse to overwrite
existing content unless --force is given, and every producing run drops a
`run.json` echoing its effective configuration.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

from . import corpus as corpus_mod
from . import evaluator as evaluator_mod
from . import generator as generator_mod
from . import recipes as recipes_mod
from . import slicer as slicer_mod
from .errors import GenerationExhausted, HelixError, ToolchainError
from .metrics import METRIC_NAMES, builtin_metrics
from .metrics.lzjd import DEFAULT_K
from .metrics.tlsh import DEFAULT_DMAX
from .model import render_labels


def _default_jobs() -> int:
    return os.cpu_count() or 1


def _write_run_config(out_dir: Path, subcommand: str, options: dict) -> None:
    doc = {
        "subcommand": subcommand,
        "options": options,
        "env": {
            "HELIX_CC": os.environ.get("HELIX_CC"),
            "HELIX_OBJCOPY": os.environ.get("HELIX_OBJCOPY"),
        },
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n"
    )


def _guard_out_dir(out_dir: Path, force: bool) -> None:
    if out_dir.exists() and any(out_dir.iterdir()):
        if not force:
            raise HelixError(
                f"output directory {out_dir} is not empty (use --force)"
            )


def cmd_extract(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    _guard_out_dir(out_dir, args.force)
    toolchain = slicer_mod.ToolchainConfig.from_env(
        slicing_strategy=args.strategy, timeout_s=args.timeout
    )
    toolchain.check_available()

    loaded = [recipes_mod.load_recipe(Path(p)) for p in args.recipes]
    names = [r.name for r in loaded]
    if len(set(names)) != len(names):
        raise HelixError("duplicate library names across recipes")

    _write_run_config(out_dir, "extract", {
        "recipes": [str(p) for p in args.recipes],
        "out": str(out_dir),
        "strategy": args.strategy,
        "jobs": args.jobs,
        "timeout": args.timeout,
        "force": args.force,
    })

    extracted = 0
    with tempfile.TemporaryDirectory(prefix="helix-extract-") as scratch:
        scratch_dir = Path(scratch)
        for recipe in loaded:
            try:
                lib = recipes_mod.realize_recipe(
                    recipe, toolchain, scratch_dir / recipe.name
                )
                result = slicer_mod.extract_components(
                    lib, out_dir=scratch_dir / recipe.name, jobs=args.jobs
                )
            except ToolchainError:
                raise
            except HelixError as exc:
                print(f"library {recipe.name}: skipped ({exc})",
                      file=sys.stderr)
                continue
            corpus_mod.write_library(out_dir, recipe.name, recipe.version,
                                     result)
            print(f"library {recipe.name}: {len(result.components)} "
                  f"components, {len(result.discarded)} discarded")
            extracted += 1
    if extracted == 0:
        raise HelixError("no components extracted from any recipe")
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    _guard_out_dir(out_dir, args.force)
    toolchain = slicer_mod.ToolchainConfig.from_env(
        slicing_strategy=args.strategy, timeout_s=args.timeout
    )
    config = generator_mod.GeneratorConfig(
        n=args.n, p=args.p, count=args.count, seed=args.seed,
        max_attempts=args.max_attempts,
    )
    loaded = corpus_mod.load_corpus(Path(args.corpus))

    _write_run_config(out_dir, "generate", {
        "corpus": str(args.corpus),
        "n": args.n, "p": args.p, "count": args.count, "seed": args.seed,
        "max_attempts": config.attempts_budget,
        "out": str(out_dir),
        "strategy": args.strategy,
        "jobs": args.jobs,
        "timeout": args.timeout,
        "force": args.force,
    })

    started = time.monotonic()
    try:
        manifest = generator_mod.generate(
            loaded, config, out_dir, toolchain=toolchain, jobs=args.jobs
        )
    except GenerationExhausted as exc:
        print(f"generation exhausted: {exc}", file=sys.stderr)
        print(f"partial manifest kept at {out_dir / 'manifest.json'}",
              file=sys.stderr)
        return 2
    elapsed = time.monotonic() - started
    print(f"samples: {len(manifest.samples)}")
    print(f"discarded: {manifest.discarded_count}")
    print(f"elapsed: {elapsed:.1f}s")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    dataset_dir = Path(args.dataset)
    manifest = generator_mod.read_manifest(dataset_dir / "manifest.json")

    requested = [name.strip() for name in args.metrics.split(",") if name.strip()]
    unknown = sorted(set(requested) - set(METRIC_NAMES))
    if unknown:
        raise HelixError(
            f"unknown metrics: {', '.join(unknown)} "
            f"(valid: {', '.join(METRIC_NAMES)})"
        )
    if not requested:
        raise HelixError("no metrics requested")
    available = {
        m.name: m
        for m in builtin_metrics(tlsh_dmax=args.tlsh_dmax, lzjd_k=args.lzjd_k)
    }
    metrics = [available[name] for name in requested]

    externals = []
    for spec in args.external or []:
        name, sep, file_part = spec.partition("=")
        if not sep or not name or not file_part:
            raise HelixError(f"bad --external value {spec!r}, want name=file")
        externals.append((name, Path(file_part)))

    report_path = Path(args.report) if args.report else dataset_dir / "report.json"
    if report_path.exists() and not args.force:
        raise HelixError(f"report {report_path} exists (use --force)")

    table = evaluator_mod.score_pairs(manifest, metrics)
    for name, file_path in externals:
        table = evaluator_mod.import_external_scores(table, name, file_path)

    report = evaluator_mod.build_report(
        table, manifest, bins=args.bins,
        params={"tlsh_dmax": args.tlsh_dmax, "lzjd_k": args.lzjd_k},
    )
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(evaluator_mod.report_json(report))
    _write_run_config(report_path.parent, "evaluate", {
        "dataset": str(dataset_dir),
        "metrics": requested,
        "external": [f"{n}={p}" for n, p in externals],
        "report": str(report_path),
        "bins": args.bins,
        "tlsh_dmax": args.tlsh_dmax,
        "lzjd_k": args.lzjd_k,
        "force": args.force,
    })
    sys.stdout.write(evaluator_mod.report_table(report))
    return 0


def _inspect_library(lib: corpus_mod.CorpusLibrary) -> None:
    print(f"library {lib.name} (version {lib.version}): "
          f"{len(lib.components)} components")
    for comp in lib.components:
        print(f"  component {comp.id}: {len(comp.labels)} labels")
        for rendered in render_labels(comp.labels):
            print(f"    {rendered}")


def cmd_inspect(args: argparse.Namespace) -> int:
    path = Path(args.path)
    manifest_path = (
        path if path.name == "manifest.json" else path / "manifest.json"
    )
    if manifest_path.is_file():
        manifest = generator_mod.read_manifest(manifest_path)
        cfg = manifest.config
        print(f"dataset: {len(manifest.samples)} samples, "
              f"{manifest.discarded_count} discarded "
              f"(n={cfg.n}, p={cfg.p}, seed={cfg.seed})")
        print(f"corpus: {manifest.corpus_fingerprint}")
        for sample in manifest.samples:
            print(f"  sample {sample.id}: {len(sample.labels)} labels, "
                  f"components {', '.join(sample.component_ids)}")
        return 0
    if (path / "library.json").is_file():
        _inspect_library(corpus_mod._load_library(path))
        return 0
    if path.is_dir() and any(
        (child / "library.json").is_file() for child in path.iterdir()
    ):
        loaded = corpus_mod.load_corpus(path)
        print(f"corpus {loaded.fingerprint()}")
        for lib in loaded.libraries:
            _inspect_library(lib)
        return 0
    raise HelixError(f"unrecognized path contents: {path}")


def cmd_capacity(args: argparse.Namespace) -> int:
    log10v = generator_mod.capacity_lower_bound(args.libraries, args.n)
    if log10v < 7:
        print(math.comb(args.libraries, args.n))
    else:
        exponent = math.floor(log10v)
        mantissa = 10 ** (log10v - exponent)
        print(f"≈ {mantissa:.2f}e{exponent}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="helixkit",
        description="Extract labeled components from C static libraries, "
                    "recombine them into binaries with known ground-truth "
                    "similarity, and benchmark similarity metrics.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_extract = sub.add_parser(
        "extract", help="slice libraries into labeled components"
    )
    p_extract.add_argument("--recipes", nargs="+", required=True,
                           metavar="TOML", help="recipe files")
    p_extract.add_argument("--out", required=True, help="corpus directory")
    p_extract.add_argument("--strategy", choices=("gc_sections", "lto"),
                           default="gc_sections")
    p_extract.add_argument("--jobs", type=int, default=_default_jobs())
    p_extract.add_argument("--timeout", type=int, default=60,
                           help="per-build timeout in seconds")
    p_extract.add_argument("--force", action="store_true")
    p_extract.set_defaults(func=cmd_extract)

    p_gen = sub.add_parser("generate", help="build a labeled sample dataset")
    p_gen.add_argument("--corpus", required=True)
    p_gen.add_argument("-n", type=int, required=True,
                       help="components per sample")
    p_gen.add_argument("-p", type=float, required=True,
                       help="similarity-control parameter in [0,1]")
    p_gen.add_argument("--count", type=int, required=True)
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--max-attempts", type=int, default=None)
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--strategy", choices=("gc_sections", "lto"),
                       default="gc_sections")
    p_gen.add_argument("--jobs", type=int, default=_default_jobs())
    p_gen.add_argument("--timeout", type=int, default=60)
    p_gen.add_argument("--force", action="store_true")
    p_gen.set_defaults(func=cmd_generate)

    p_eval = sub.add_parser("evaluate", help="score sample pairs and report MAE")
    p_eval.add_argument("--dataset", required=True)
    p_eval.add_argument("--metrics", default=",".join(METRIC_NAMES))
    p_eval.add_argument("--external", action="append", metavar="NAME=FILE",
                        help="merge external pair scores (CSV)")
    p_eval.add_argument("--report", default=None,
                        help="report path (default <dataset>/report.json)")
    p_eval.add_argument("--bins", type=int, default=10)
    p_eval.add_argument("--tlsh-dmax", type=int, default=DEFAULT_DMAX)
    p_eval.add_argument("--lzjd-k", type=int, default=DEFAULT_K)
    p_eval.add_argument("--force", action="store_true")
    p_eval.set_defaults(func=cmd_evaluate)

    p_inspect = sub.add_parser("inspect", help="describe a corpus or dataset")
    p_inspect.add_argument("path")
    p_inspect.set_defaults(func=cmd_inspect)

    p_cap = sub.add_parser(
        "capacity", help="lower bound on distinct samples: C(libraries, n)"
    )
    p_cap.add_argument("libraries", type=int)
    p_cap.add_argument("n", type=int)
    p_cap.set_defaults(func=cmd_capacity)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ToolchainError as exc:
        print(f"environment error: {exc}", file=sys.stderr)
        return 3
    except HelixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
