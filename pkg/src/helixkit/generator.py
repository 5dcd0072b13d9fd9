"""Dataset generation: library-stratified semi-random sample selection.

Each sample combines n components from n distinct libraries. A sample's
successor re-draws r ~ uniform{0..floor(n*p)} of its positions, so p tunes
how similar neighboring samples are: p = 0 repeats one selection forever,
p = 1 allows full replacement. Candidates that fail to build are discarded
and the chain continues; the chain itself is a pure function of the RNG
stream, so selection never depends on toolchain behavior or timing.
"""
from __future__ import annotations

import json
import math
import os
import random
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

from .corpus import Corpus
from .errors import GenerationExhausted, HelixError, ToolchainError
from .model import (
    Blueprint,
    ComponentSpec,
    DEFAULT_BLUEPRINT,
    SampleRecord,
    ground_truth_similarity,
    label_union,
    parse_labels,
    render_blueprint,
    render_labels,
)
from .slicer import ToolchainConfig

RNG_ALGORITHM = "mt19937"


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs of the selection procedure.

    n: components per sample; p: similarity-control parameter in [0, 1];
    count: samples wanted; seed: RNG seed; max_attempts: candidate budget
    (defaults to 4x count, leaving room for build failures).
    """

    n: int
    p: float
    count: int
    seed: int
    max_attempts: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise HelixError("n must be a positive integer")
        if not 0.0 <= self.p <= 1.0:
            raise HelixError("p must lie in [0, 1]")
        if self.count < 1:
            raise HelixError("count must be a positive integer")
        if not 0 <= self.seed < 2 ** 64:
            raise HelixError("seed must be a 64-bit unsigned integer")
        if self.max_attempts is not None and self.max_attempts < 1:
            raise HelixError("max_attempts must be a positive integer")

    @property
    def attempts_budget(self) -> int:
        return self.max_attempts if self.max_attempts is not None else 4 * self.count


@dataclass(frozen=True)
class DatasetManifest:
    config: GeneratorConfig
    corpus_fingerprint: str
    samples: tuple[SampleRecord, ...]
    discarded_count: int
    root: Path | None = None  # directory binary/log paths resolve against

    def resolve_artifact(self, sample: SampleRecord) -> Path:
        if self.root is None:
            raise HelixError("manifest has no on-disk root")
        return Path(self.root) / sample.artifact_path


def _check_corpus_size(corpus: Corpus, n: int) -> None:
    if n > len(corpus.libraries):
        raise HelixError(
            f"corpus too small: {len(corpus.libraries)} libraries, need {n}"
        )
    for lib in corpus.libraries:
        if not lib.components:
            raise HelixError(f"library {lib.name} has no components")


def select_initial(
    corpus: Corpus, config: GeneratorConfig, rng: random.Random
) -> list[ComponentSpec]:
    """Draw n distinct libraries, then one component uniformly from each."""
    _check_corpus_size(corpus, config.n)
    chosen_libs = rng.sample(corpus.library_names, config.n)
    return [rng.choice(corpus.library(name).components) for name in chosen_libs]


def mutate_selection(
    current: Sequence[ComponentSpec],
    corpus: Corpus,
    config: GeneratorConfig,
    rng: random.Random,
) -> list[ComponentSpec]:
    """Replace r ~ uniform{0..floor(n*p)} positions of the selection.

    Each replacement re-draws a library first (it may repeat the replaced
    one but must stay distinct from the n-1 retained libraries), then a
    component of that library.
    """
    n = config.n
    if len(current) != n:
        raise HelixError("selection length does not match config.n")
    result = list(current)
    upper = math.floor(n * config.p)
    r = rng.randint(0, upper) if upper > 0 else 0
    if r == 0:
        return result
    positions = rng.sample(range(n), r)
    for pos in positions:
        retained = {c.library_id for i, c in enumerate(result) if i != pos}
        eligible = [name for name in corpus.library_names if name not in retained]
        lib_name = rng.choice(eligible)
        result[pos] = rng.choice(corpus.library(lib_name).components)
    return result


def selection_chain(
    corpus: Corpus, config: GeneratorConfig
) -> Iterator[list[ComponentSpec]]:
    """Infinite stream of candidate selections, fixed by (seed, corpus, n, p)."""
    rng = random.Random(config.seed)
    current = select_initial(corpus, config, rng)
    yield current
    while True:
        current = mutate_selection(current, corpus, config, rng)
        yield current


@dataclass(frozen=True)
class _BuildOutcome:
    chain_index: int
    components: tuple[ComponentSpec, ...]
    ok: bool
    log: str
    artifact: bytes = b""


def _build_candidate(
    chain_index: int,
    components: Sequence[ComponentSpec],
    corpus: Corpus,
    blueprint: Blueprint,
    toolchain: ToolchainConfig,
) -> _BuildOutcome:
    with tempfile.TemporaryDirectory(prefix="helix-sample-") as tmp:
        proj = Path(tmp) / "proj"
        render_blueprint(blueprint, list(components), corpus.archive_paths(), proj)
        env = dict(os.environ)
        env["CC"] = toolchain.compiler_cmd
        env["CFLAGS"] = " ".join(toolchain.compile_flags())
        env["LDFLAGS"] = " ".join(toolchain.link_flags())
        try:
            proc = subprocess.run(
                ["sh", "build.sh"],
                cwd=proj, env=env, capture_output=True, text=True,
                timeout=toolchain.timeout_s,
            )
        except FileNotFoundError:
            raise ToolchainError("shell `sh` not found") from None
        except subprocess.TimeoutExpired:
            return _BuildOutcome(chain_index, tuple(components), False,
                                 f"build timed out after {toolchain.timeout_s}s")
        log = (proc.stdout or "") + (proc.stderr or "")
        artifact = proj / blueprint.artifact_name
        if proc.returncode != 0:
            return _BuildOutcome(
                chain_index, tuple(components), False,
                log or f"build exited with status {proc.returncode}",
            )
        if not artifact.is_file() or artifact.stat().st_size == 0:
            return _BuildOutcome(
                chain_index, tuple(components), False,
                log + f"\nbuild produced no {blueprint.artifact_name}",
            )
        return _BuildOutcome(chain_index, tuple(components), True, log,
                             artifact.read_bytes())


def generate(
    corpus: Corpus,
    config: GeneratorConfig,
    out_dir: Path,
    blueprint: Blueprint = DEFAULT_BLUEPRINT,
    toolchain: ToolchainConfig | None = None,
    jobs: int = 1,
) -> DatasetManifest:
    """Walk the selection chain, building candidates until `count` succeed.

    Builds run concurrently in bounded waves; accounting walks outcomes in
    chain order, so the manifest is independent of scheduling. Discards are
    counted only up to the chain position of the final accepted sample,
    keeping `discarded_count` independent of the wave width. On budget
    exhaustion the partial manifest is written out and the error carries it.
    """
    if toolchain is None:
        toolchain = ToolchainConfig.from_env()
    toolchain.check_available()
    _check_corpus_size(corpus, config.n)

    out_dir = Path(out_dir)
    bin_dir = out_dir / "bin"
    log_dir = out_dir / "logs"
    bin_dir.mkdir(parents=True, exist_ok=True)
    log_dir.mkdir(parents=True, exist_ok=True)

    chain = selection_chain(corpus, config)
    budget = config.attempts_budget
    jobs = max(1, jobs)

    samples: list[SampleRecord] = []
    discarded = 0
    attempted = 0
    done = False
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        while attempted < budget and not done:
            wave_size = min(jobs, budget - attempted)
            wave = [
                (attempted + i, next(chain)) for i in range(wave_size)
            ]
            attempted += wave_size
            outcomes = list(pool.map(
                lambda item: _build_candidate(
                    item[0], item[1], corpus, blueprint, toolchain
                ),
                wave,
            ))
            for outcome in outcomes:  # chain order within the wave
                if len(samples) >= config.count:
                    done = True
                    break
                if not outcome.ok:
                    discarded += 1
                    (log_dir / f"discarded-{outcome.chain_index:05d}.txt"
                     ).write_text(outcome.log)
                    continue
                sample_id = f"s{len(samples):04d}"
                rel_bin = f"bin/{sample_id}"
                rel_log = f"logs/{sample_id}.txt"
                bin_path = out_dir / rel_bin
                bin_path.write_bytes(outcome.artifact)
                bin_path.chmod(0o755)
                (out_dir / rel_log).write_text(outcome.log)
                samples.append(SampleRecord(
                    id=sample_id,
                    component_ids=tuple(c.id for c in outcome.components),
                    labels=label_union(list(outcome.components)),
                    artifact_path=rel_bin,
                    build_status="ok",
                    build_log=rel_log,
                ))
            if len(samples) >= config.count:
                done = True

    manifest = DatasetManifest(
        config=config,
        corpus_fingerprint=corpus.fingerprint(),
        samples=tuple(samples),
        discarded_count=discarded,
        root=out_dir,
    )
    write_manifest(manifest, out_dir / "manifest.json")
    if len(samples) < config.count:
        exc = GenerationExhausted(
            f"built {len(samples)}/{config.count} samples in "
            f"{attempted} attempts (budget {budget})"
        )
        exc.manifest = manifest
        raise exc
    return manifest


def manifest_document(manifest: DatasetManifest) -> dict:
    """The manifest as a plain JSON-ready document (the on-disk schema)."""
    cfg = manifest.config
    return {
        "config": {
            "n": cfg.n,
            "p": cfg.p,
            "count": cfg.count,
            "seed": cfg.seed,
            "max_attempts": cfg.attempts_budget,
            "rng_algorithm": RNG_ALGORITHM,
        },
        "corpus_fingerprint": manifest.corpus_fingerprint,
        "discarded_count": manifest.discarded_count,
        "samples": [
            {
                "id": s.id,
                "components": list(s.component_ids),
                "labels": render_labels(s.labels),
                "binary": s.artifact_path,
                "build_log": s.build_log,
            }
            for s in manifest.samples
        ],
    }


def write_manifest(manifest: DatasetManifest, path: Path) -> None:
    doc = manifest_document(manifest)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_manifest(path: Path) -> DatasetManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, ValueError) as exc:
        raise HelixError(f"unreadable manifest {path}: {exc}") from exc
    try:
        cfg_doc = doc["config"]
        config = GeneratorConfig(
            n=cfg_doc["n"],
            p=cfg_doc["p"],
            count=cfg_doc["count"],
            seed=cfg_doc["seed"],
            max_attempts=cfg_doc.get("max_attempts"),
        )
        samples = tuple(
            SampleRecord(
                id=s["id"],
                component_ids=tuple(s["components"]),
                labels=parse_labels(s["labels"]),
                artifact_path=s["binary"],
                build_status="ok",
                build_log=s.get("build_log", ""),
            )
            for s in doc["samples"]
        )
        return DatasetManifest(
            config=config,
            corpus_fingerprint=doc["corpus_fingerprint"],
            samples=samples,
            discarded_count=doc["discarded_count"],
            root=path.parent,
        )
    except (KeyError, TypeError) as exc:
        raise HelixError(f"malformed manifest {path}: {exc}") from exc


def ground_truth_matrix(
    manifest: DatasetManifest,
) -> list[tuple[str, str, float]]:
    """All unordered sample pairs with their label Jaccard similarity."""
    if not manifest.samples:
        raise HelixError("manifest has no samples")
    ordered = sorted(manifest.samples, key=lambda s: s.id)
    pairs = []
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            pairs.append((a.id, b.id,
                          ground_truth_similarity(a.labels, b.labels)))
    return pairs


def capacity_lower_bound(library_count: int, n: int) -> float:
    """log10 of C(library_count, n), via log-gamma so huge corpora are safe."""
    if library_count < 0 or n < 0:
        raise HelixError("counts must be non-negative")
    if n > library_count:
        raise HelixError("n exceeds library count")
    log_e = (
        math.lgamma(library_count + 1)
        - math.lgamma(n + 1)
        - math.lgamma(library_count - n + 1)
    )
    return log_e / math.log(10)
