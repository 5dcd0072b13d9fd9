"""Lempel-Ziv Jaccard similarity with bottom-k sketches.

The LZ78-style parse of a byte string yields a set of substrings; two
strings are compared by the Jaccard index of those sets. Exact sets grow
with input size, so each set is hashed and summarized by its k smallest
hash values; Jaccard is then estimated from the merged bottom-k sketch.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import MetricInputError

DEFAULT_K = 1024
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def lz_set(data: bytes) -> set[bytes]:
    """LZ78-style dictionary: grow the current substring until it is new,
    add it, restart after it; a trailing already-seen remainder is dropped."""
    if not data:
        raise MetricInputError("empty input")
    entries: set[bytes] = set()
    start = 0
    end = 1
    while end <= len(data):
        piece = data[start:end]
        if piece in entries:
            end += 1
            continue
        entries.add(piece)
        start = end
        end = start + 1
    return entries


def _entry_hash(data: bytes) -> int:
    """FNV-1a accumulation finished with a full 64-bit avalanche.

    Plain FNV-1a maps 1- and 2-byte inputs into narrow bands of the hash
    space (too few multiplications to wrap the modulus), which skews any
    bottom-k sample toward short entries. The xor-shift-multiply finalizer
    (the murmur3/splitmix64 mixer) spreads those bands uniformly.
    """
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    h ^= h >> 33
    h = (h * 0xFF51AFD7ED558CCD) & _MASK64
    h ^= h >> 33
    h = (h * 0xC4CEB9FE1A85EC53) & _MASK64
    h ^= h >> 33
    return h


def hashed_lz_set(data: bytes) -> set[int]:
    return {_entry_hash(entry) for entry in lz_set(data)}


@dataclass(frozen=True)
class LzjdSketch:
    k: int
    min_hashes: tuple[int, ...]  # bottom-k of the hashed LZ set, ascending

    def __post_init__(self):
        if self.k < 1:
            raise MetricInputError("sketch size k must be positive")
        if len(self.min_hashes) > self.k:
            raise MetricInputError("sketch holds more than k hashes")
        if any(b <= a for a, b in zip(self.min_hashes, self.min_hashes[1:])):
            raise MetricInputError("sketch hashes must be strictly increasing")
        if any(not 0 <= h <= _MASK64 for h in self.min_hashes):
            raise MetricInputError("sketch hash outside 64-bit range")

    def serialize(self) -> str:
        return f"{self.k}:" + ",".join(f"{h:016x}" for h in self.min_hashes)

    @classmethod
    def parse(cls, text: str) -> "LzjdSketch":
        head, sep, rest = text.partition(":")
        if not sep or not head.isdigit():
            raise MetricInputError(f"bad lzjd sketch: {text!r}")
        try:
            hashes = tuple(int(part, 16) for part in rest.split(",") if part)
        except ValueError as exc:
            raise MetricInputError(f"bad lzjd sketch: {exc}") from exc
        return cls(int(head), hashes)


def lzjd_sketch(data: bytes, k: int = DEFAULT_K) -> LzjdSketch:
    if k < 1:
        raise MetricInputError("sketch size k must be positive")
    hashes = sorted(hashed_lz_set(data))
    return LzjdSketch(k, tuple(hashes[:k]))


def lzjd_similarity(a: LzjdSketch, b: LzjdSketch) -> float:
    """Bottom-k estimate of the Jaccard index of the two hashed LZ sets.

    The k smallest values of the union are a uniform sample of it; the
    fraction of that sample present in both sets estimates the true index.
    Exact when both sets fit inside one sketch.
    """
    if a.k != b.k:
        raise MetricInputError(f"sketch size mismatch: {a.k} vs {b.k}")
    set_a = set(a.min_hashes)
    set_b = set(b.min_hashes)
    merged = sorted(set_a | set_b)
    if not merged:
        raise MetricInputError("empty sketches")
    sample = merged[:min(a.k, len(merged))]
    hits = sum(1 for h in sample if h in set_a and h in set_b)
    return hits / len(sample)
