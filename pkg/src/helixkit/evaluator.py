"""Pairwise scoring of generated samples against ground truth.

Every unordered sample pair gets a ground-truth similarity (label Jaccard)
and one score per metric; a metric whose preconditions fail on a pair is
recorded as an error cell, never silently coerced to a number. Mean
absolute error aggregates only over scored cells, with error counts
reported alongside.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import HelixError, MetricInputError
from .generator import DatasetManifest, ground_truth_matrix, manifest_document
from .metrics import PairMetric
from .model import ground_truth_similarity

ERROR_CELL = "error"


@dataclass(frozen=True)
class PairRow:
    id_a: str
    id_b: str
    ground_truth: float
    scores: dict  # metric name -> float in [0,1] or ERROR_CELL

    def __post_init__(self):
        if not self.id_a < self.id_b:
            raise HelixError(
                f"pair ids out of order: {self.id_a!r} vs {self.id_b!r}"
            )


@dataclass(frozen=True)
class PairScoreTable:
    rows: tuple[PairRow, ...]

    def __post_init__(self):
        seen = set()
        for row in self.rows:
            key = (row.id_a, row.id_b)
            if key in seen:
                raise HelixError(f"duplicate pair {key}")
            seen.add(key)

    def metric_names(self) -> list[str]:
        names: dict[str, None] = {}
        for row in self.rows:
            for name in row.scores:
                names.setdefault(name)
        return list(names)


def dataset_fingerprint(manifest: DatasetManifest) -> str:
    """Content hash of the manifest document (config, corpus, samples)."""
    doc = manifest_document(manifest)
    return "sha256:" + hashlib.sha256(
        json.dumps(doc, sort_keys=True).encode()
    ).hexdigest()


def score_pairs(
    manifest: DatasetManifest,
    metrics: list[PairMetric],
) -> PairScoreTable:
    """Digest every sample once per metric, then score all unordered pairs.

    A digest failure (metric precondition) poisons that sample's cells for
    that metric only; a missing binary file is a dataset error and fatal.
    """
    if not manifest.samples:
        raise HelixError("manifest has no samples")
    names = [m.name for m in metrics]
    if len(set(names)) != len(names):
        raise HelixError("duplicate metric names")

    ordered = sorted(manifest.samples, key=lambda s: s.id)
    contents: dict[str, bytes] = {}
    for sample in ordered:
        path = manifest.resolve_artifact(sample)
        if not path.is_file():
            raise HelixError(f"missing binary for sample {sample.id}: {path}")
        contents[sample.id] = path.read_bytes()

    digests: dict[str, dict[str, object]] = {m.name: {} for m in metrics}
    failures: dict[str, set[str]] = {m.name: set() for m in metrics}
    for metric in metrics:
        for sample in ordered:
            try:
                digests[metric.name][sample.id] = metric.digest(
                    contents[sample.id]
                )
            except MetricInputError:
                failures[metric.name].add(sample.id)

    rows = []
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            scores: dict = {}
            for metric in metrics:
                name = metric.name
                if a.id in failures[name] or b.id in failures[name]:
                    scores[name] = ERROR_CELL
                    continue
                try:
                    value = metric.score(digests[name][a.id],
                                         digests[name][b.id])
                except MetricInputError:
                    scores[name] = ERROR_CELL
                    continue
                if not 0.0 <= value <= 1.0:
                    raise HelixError(
                        f"metric {name} produced {value}, outside [0,1]"
                    )
                scores[name] = value
            rows.append(PairRow(
                id_a=a.id,
                id_b=b.id,
                ground_truth=ground_truth_similarity(a.labels, b.labels),
                scores=scores,
            ))
    return PairScoreTable(tuple(rows))


def mean_absolute_error(table: PairScoreTable, metric_name: str) -> float:
    total = 0.0
    scored = 0
    for row in table.rows:
        value = row.scores.get(metric_name, ERROR_CELL)
        if value == ERROR_CELL:
            continue
        total += abs(value - row.ground_truth)
        scored += 1
    if scored == 0:
        raise HelixError(f"metric {metric_name} scored no pairs")
    return total / scored


def error_count(table: PairScoreTable, metric_name: str) -> int:
    return sum(
        1 for row in table.rows
        if row.scores.get(metric_name, ERROR_CELL) == ERROR_CELL
    )


def _bin_index(value: float, bins: int) -> int:
    # Lower-inclusive bins; the last bin also includes 1.0.
    return min(int(value * bins), bins - 1)


def ground_truth_histogram(
    manifest: DatasetManifest, bins: int = 10
) -> list[tuple[float, float, int]]:
    """Equal-width histogram of pairwise ground-truth similarity."""
    if bins < 1:
        raise HelixError("bins must be at least 1")
    counts = [0] * bins
    for _, _, value in ground_truth_matrix(manifest):
        counts[_bin_index(value, bins)] += 1
    return [
        (i / bins, (i + 1) / bins, counts[i])
        for i in range(bins)
    ]


def import_external_scores(
    table: PairScoreTable, metric_name: str, score_file: Path
) -> PairScoreTable:
    """Merge a CSV of externally computed pair scores as a new column.

    Pairs absent from the file become error cells; malformed rows are
    rejected with their line number so large files stay debuggable.
    """
    path = Path(score_file)
    known_pairs = {(row.id_a, row.id_b) for row in table.rows}
    known_ids = {i for pair in known_pairs for i in pair}
    imported: dict[tuple[str, str], float] = {}

    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise HelixError(f"{path}: empty score file") from None
        if [h.strip() for h in header] != ["id_a", "id_b", "score"]:
            raise HelixError(f"{path}: header must be `id_a,id_b,score`")
        for lineno, fields in enumerate(reader, start=2):
            if not fields:
                continue
            if len(fields) != 3:
                raise HelixError(f"{path}:{lineno}: expected 3 fields")
            raw_a, raw_b, raw_score = (f.strip() for f in fields)
            for sample_id in (raw_a, raw_b):
                if sample_id not in known_ids:
                    raise HelixError(
                        f"{path}:{lineno}: unknown sample id {sample_id!r}"
                    )
            key = (raw_a, raw_b) if raw_a < raw_b else (raw_b, raw_a)
            if key not in known_pairs:
                raise HelixError(f"{path}:{lineno}: pair not in dataset")
            try:
                value = float(raw_score)
            except ValueError:
                raise HelixError(
                    f"{path}:{lineno}: score {raw_score!r} is not a number"
                ) from None
            if not 0.0 <= value <= 1.0:
                raise HelixError(
                    f"{path}:{lineno}: score {value} outside [0,1]"
                )
            if key in imported:
                raise HelixError(f"{path}:{lineno}: duplicate pair {key}")
            imported[key] = value

    rows = []
    for row in table.rows:
        scores = dict(row.scores)
        scores[metric_name] = imported.get((row.id_a, row.id_b), ERROR_CELL)
        rows.append(PairRow(row.id_a, row.id_b, row.ground_truth, scores))
    return PairScoreTable(tuple(rows))


@dataclass(frozen=True)
class EvaluationReport:
    mae: dict                 # metric -> mean absolute error
    errors: dict              # metric -> error cell count
    histogram: list           # (bin_low, bin_high, count)
    pair_count: int
    dataset_fingerprint: str
    params: dict = field(default_factory=dict)


def build_report(
    table: PairScoreTable,
    manifest: DatasetManifest,
    bins: int = 10,
    params: dict | None = None,
) -> EvaluationReport:
    mae = {}
    errors = {}
    for name in table.metric_names():
        errors[name] = error_count(table, name)
        if errors[name] < len(table.rows):
            mae[name] = mean_absolute_error(table, name)
    return EvaluationReport(
        mae=mae,
        errors=errors,
        histogram=ground_truth_histogram(manifest, bins),
        pair_count=len(table.rows),
        dataset_fingerprint=dataset_fingerprint(manifest),
        params=dict(params or {}),
    )


def report_json(report: EvaluationReport) -> str:
    doc = {
        "mae": report.mae,
        "errors": report.errors,
        "histogram": [
            {"low": low, "high": high, "count": count}
            for low, high, count in report.histogram
        ],
        "pair_count": report.pair_count,
        "dataset_fingerprint": report.dataset_fingerprint,
        "params": report.params,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def report_table(report: EvaluationReport) -> str:
    """Aligned text table, best (lowest MAE) metric first."""
    ranked = sorted(report.mae.items(), key=lambda item: item[1])
    unranked = sorted(set(report.errors) - set(report.mae))
    width = max([len("metric")] + [len(n) for n in report.errors]) + 2
    lines = [f"{'metric':<{width}}{'mae':>10}{'errors':>10}"]
    for name, value in ranked:
        lines.append(f"{name:<{width}}{value:>10.4f}{report.errors[name]:>10}")
    for name in unranked:
        lines.append(f"{name:<{width}}{'n/a':>10}{report.errors[name]:>10}")
    lines.append(f"pairs: {report.pair_count}")
    return "\n".join(lines) + "\n"
