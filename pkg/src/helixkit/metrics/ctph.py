"""Context-triggered piecewise hashing.

A rolling hash over a 7-byte window picks chunk boundaries whenever its
value hits a block-size-dependent trigger; each chunk contributes one
character (a 6-bit piecewise hash) to the signature. Two signatures are
compared by weighted edit distance. Digests carry a second signature at
twice the block size so inputs of moderately different lengths stay
comparable.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import MetricInputError

ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/"
_WINDOW = 7
MIN_BLOCK = 3
MAX_SIG = 64  # sig1 cap; sig2 is capped at half
_FNV_INIT = 0x28021967
_FNV_PRIME = 0x01000193
_MASK32 = 0xFFFFFFFF
_GUARD_LEN = 7  # minimum common substring for a nonzero score


@dataclass(frozen=True)
class CtphDigest:
    block_size: int
    sig1: str
    sig2: str

    def __post_init__(self):
        if self.block_size < MIN_BLOCK or self.block_size % 3 != 0:
            raise MetricInputError(f"bad block size: {self.block_size}")
        q = self.block_size // 3
        if q & (q - 1):
            raise MetricInputError(f"bad block size: {self.block_size}")
        for sig in (self.sig1, self.sig2):
            if any(ch not in ALPHABET for ch in sig):
                raise MetricInputError("signature character outside alphabet")
        if len(self.sig1) > MAX_SIG or len(self.sig2) > MAX_SIG // 2:
            raise MetricInputError("signature too long")

    def serialize(self) -> str:
        return f"{self.block_size}:{self.sig1}:{self.sig2}"

    @classmethod
    def parse(cls, text: str) -> "CtphDigest":
        parts = text.split(":")
        if len(parts) != 3 or not parts[0].isdigit():
            raise MetricInputError(f"bad ctph digest: {text!r}")
        return cls(int(parts[0]), parts[1], parts[2])


def _signatures(data: bytes, block_size: int) -> tuple[str, str]:
    """One pass producing the signature at block_size and at 2x block_size."""
    window = [0] * _WINDOW
    h1 = h2 = h3 = 0
    p1 = p2 = _FNV_INIT
    pending1 = pending2 = 0  # bytes folded in since the last emitted char
    sig1: list[str] = []
    sig2: list[str] = []
    double = block_size * 2

    for i, c in enumerate(data):
        h2 -= h1
        h2 += _WINDOW * c
        h1 += c
        h1 -= window[i % _WINDOW]
        window[i % _WINDOW] = c
        h3 = ((h3 << 5) & _MASK32) ^ c
        roll = (h1 + h2 + h3) & _MASK32

        p1 = ((p1 * _FNV_PRIME) & _MASK32) ^ c
        p2 = ((p2 * _FNV_PRIME) & _MASK32) ^ c
        pending1 += 1
        pending2 += 1

        if roll % block_size == block_size - 1 and len(sig1) < MAX_SIG - 1:
            sig1.append(ALPHABET[p1 % 64])
            p1 = _FNV_INIT
            pending1 = 0
        if roll % double == double - 1 and len(sig2) < MAX_SIG // 2 - 1:
            sig2.append(ALPHABET[p2 % 64])
            p2 = _FNV_INIT
            pending2 = 0

    if pending1:
        sig1.append(ALPHABET[p1 % 64])
    if pending2:
        sig2.append(ALPHABET[p2 % 64])
    return "".join(sig1), "".join(sig2)


def ctph_digest(data: bytes) -> CtphDigest:
    if not data:
        raise MetricInputError("empty input")
    block_size = MIN_BLOCK
    while block_size * MAX_SIG < len(data):
        block_size *= 2
    sig1, sig2 = _signatures(data, block_size)
    # A too-short signature means the trigger fired rarely; retry with a
    # finer block size for more chunks.
    while block_size > MIN_BLOCK and len(sig1) < MAX_SIG // 2:
        block_size //= 2
        sig1, sig2 = _signatures(data, block_size)
    return CtphDigest(block_size, sig1, sig2)


def _squeeze(sig: str) -> str:
    """Cap character runs at 3: long runs carry little information and
    would otherwise dominate the edit distance."""
    out: list[str] = []
    run = 0
    prev = ""
    for ch in sig:
        run = run + 1 if ch == prev else 1
        prev = ch
        if run <= 3:
            out.append(ch)
    return "".join(out)


def _has_common_substring(s1: str, s2: str) -> bool:
    if len(s1) < _GUARD_LEN or len(s2) < _GUARD_LEN:
        return False
    grams = {s1[i:i + _GUARD_LEN] for i in range(len(s1) - _GUARD_LEN + 1)}
    return any(s2[i:i + _GUARD_LEN] in grams
               for i in range(len(s2) - _GUARD_LEN + 1))


def _edit_distance(s1: str, s2: str) -> int:
    """Weighted edit distance: insert/delete cost 1, substitution cost 2."""
    if len(s1) < len(s2):
        s1, s2 = s2, s1
    prev = list(range(len(s2) + 1))
    for i, c1 in enumerate(s1, start=1):
        cur = [i]
        for j, c2 in enumerate(s2, start=1):
            cur.append(min(
                prev[j] + 1,
                cur[j - 1] + 1,
                prev[j - 1] + (0 if c1 == c2 else 2),
            ))
        prev = cur
    return prev[-1]


def _score_strings(s1: str, s2: str) -> float:
    s1 = _squeeze(s1)
    s2 = _squeeze(s2)
    if not _has_common_substring(s1, s2):
        return 0.0
    d = _edit_distance(s1, s2)
    return max(0.0, 1.0 - d / (len(s1) + len(s2)))


def ctph_similarity(a: CtphDigest, b: CtphDigest) -> float:
    """Compare digests; block sizes must be equal or off by exactly 2x,
    anything else scores 0.0 (nothing to align)."""
    if a == b:
        return 1.0
    if a.block_size == b.block_size:
        return max(_score_strings(a.sig1, b.sig1),
                   _score_strings(a.sig2, b.sig2))
    if a.block_size == 2 * b.block_size:
        return _score_strings(a.sig1, b.sig2)
    if b.block_size == 2 * a.block_size:
        return _score_strings(a.sig2, b.sig1)
    return 0.0
