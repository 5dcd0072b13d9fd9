"""Byte-level similarity metrics, all scoring into [0,1].

Every metric is exposed behind the same two-step interface: `digest(data)`
precomputes whatever the metric needs per input (cacheable per sample), and
`score(da, db)` compares two digests. Metrics raise MetricInputError when
their preconditions fail; callers decide whether that is fatal (the
evaluator records it as an error cell instead of inventing a number).
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import MetricInputError
from .ctph import CtphDigest, ctph_digest, ctph_similarity
from .lzjd import (
    DEFAULT_K,
    LzjdSketch,
    hashed_lz_set,
    lz_set,
    lzjd_similarity,
    lzjd_sketch,
)
from .tlsh import DEFAULT_DMAX, TlshDigest, tlsh_digest, tlsh_distance, tlsh_similarity

__all__ = [
    "CtphDigest", "ctph_digest", "ctph_similarity",
    "TlshDigest", "tlsh_digest", "tlsh_distance", "tlsh_similarity",
    "LzjdSketch", "lz_set", "hashed_lz_set", "lzjd_sketch", "lzjd_similarity",
    "DEFAULT_DMAX", "DEFAULT_K",
    "MetricScore", "PairMetric",
    "CtphMetric", "TlshMetric", "LzjdMetric", "NaiveMetric",
    "builtin_metrics", "METRIC_NAMES",
]


@dataclass(frozen=True)
class MetricScore:
    metric_name: str
    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise MetricInputError(
                f"{self.metric_name} produced {self.value}, outside [0,1]"
            )


class PairMetric:
    """Digest-then-compare adapter shared by all metrics."""

    name: str = "abstract"

    def digest(self, data: bytes):
        raise NotImplementedError

    def score(self, digest_a, digest_b) -> float:
        raise NotImplementedError

    def compare_bytes(self, a: bytes, b: bytes) -> MetricScore:
        return MetricScore(self.name, self.score(self.digest(a), self.digest(b)))


class CtphMetric(PairMetric):
    name = "ctph"

    def digest(self, data: bytes) -> CtphDigest:
        return ctph_digest(data)

    def score(self, digest_a: CtphDigest, digest_b: CtphDigest) -> float:
        return ctph_similarity(digest_a, digest_b)


class TlshMetric(PairMetric):
    name = "tlsh"

    def __init__(self, d_max: int = DEFAULT_DMAX):
        if d_max <= 0:
            raise MetricInputError("d_max must be positive")
        self.d_max = d_max

    def digest(self, data: bytes) -> TlshDigest:
        return tlsh_digest(data)

    def score(self, digest_a: TlshDigest, digest_b: TlshDigest) -> float:
        return tlsh_similarity(digest_a, digest_b, d_max=self.d_max)


class LzjdMetric(PairMetric):
    name = "lzjd"

    def __init__(self, k: int = DEFAULT_K):
        if k < 1:
            raise MetricInputError("sketch size k must be positive")
        self.k = k

    def digest(self, data: bytes) -> LzjdSketch:
        return lzjd_sketch(data, k=self.k)

    def score(self, digest_a: LzjdSketch, digest_b: LzjdSketch) -> float:
        return lzjd_similarity(digest_a, digest_b)


class NaiveMetric(PairMetric):
    """Constant baseline: every pair scores 0.5, no preconditions."""

    name = "naive"

    def digest(self, data: bytes) -> None:
        return None

    def score(self, digest_a, digest_b) -> float:
        return 0.5


METRIC_NAMES = ("ctph", "tlsh", "lzjd", "naive")


def builtin_metrics(tlsh_dmax: int = DEFAULT_DMAX,
                    lzjd_k: int = DEFAULT_K) -> list[PairMetric]:
    return [CtphMetric(), TlshMetric(d_max=tlsh_dmax),
            LzjdMetric(k=lzjd_k), NaiveMetric()]
