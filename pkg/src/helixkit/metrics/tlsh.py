"""Locality-sensitive hash over a 5-byte sliding window.

Every window position feeds six byte-triplets (newest byte plus two of the
four older ones, each selection with its own salt) through a Pearson-style
permutation hash into 128 buckets. The bucket histogram is quantized at its
quartiles into a 128-digit, 2-bit body; a small header (checksum, log
length, quartile ratios) catches gross size/shape differences. Distance is
a weighted digit difference, mapped to a similarity via a linear clamp.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import MetricInputError

_WINDOW = 5
_BUCKETS = 128
MIN_INPUT = 50
DEFAULT_DMAX = 300

# Fixed 256-entry permutation (Fisher-Yates, seed 0x544c5348) embedded as a
# literal so digests cannot drift with the runtime's RNG internals.
_PERM = (
      6, 228,  69,  42, 232, 193, 163, 143, 121,  31,  63,  94,  76,  73, 206, 168,
    216, 145, 142, 158, 213,  49,  45, 112,  48, 200,  36,   2,  56, 196, 134, 166,
     51, 175, 203, 115, 153,  14,  96,  44, 219,  79, 236, 110, 192, 109, 173, 154,
     78,  81,  59,  22,   1, 209, 231, 240, 178,   4, 133,  87,  52, 197, 205, 207,
     75,  90, 104,  27,  70, 222, 159, 116, 174,  23, 208,  33, 130,  88,   3, 157,
    198, 118,  99,  74, 132, 165,  80,  29, 189,  28,  46,  25, 162,  97, 150, 120,
     17,  60,  32,  89, 164,  66, 217, 122,  43,  34, 239, 123,  61,  53,  57,  24,
    248, 201,  55, 177, 152,  77,  91,  98,  58,  41, 139, 181, 226, 215, 224, 184,
    140, 252, 227, 167, 218, 183,  54,   9, 103,  18, 229, 225, 210, 135,  84, 172,
     39, 221,  16, 148, 169,  62, 127,  68,  10, 188, 255, 234, 101, 124,  64,  35,
    238, 237, 180,  11,  92, 128, 212,  67, 100, 247, 244, 235, 106, 179,  47, 129,
    170, 253,  12, 182,  93, 190,  50, 171, 144, 156, 249,  37, 191, 195, 119,  95,
      7, 149, 125, 230, 223,  19, 160, 108, 185, 254, 102,  85, 105,  40, 126, 194,
    107,   8, 137,  38, 136, 246,  21, 155, 114, 199, 186, 245, 202, 138, 250,  20,
     26,  15, 187, 243, 131, 111, 176,  30, 211, 151,  86,   0,  71, 241, 251, 204,
    141,  72, 146, 242, 113,  65, 214,  13, 220, 147,   5, 117,  83, 233, 161,  82,
)

# (salt, older-byte offsets) for the six triplets taken at each position:
# the newest byte pairs with two of the four preceding ones.
_TRIPLETS = (
    (2, 1, 2),
    (3, 1, 3),
    (5, 2, 3),
    (7, 1, 4),
    (11, 2, 4),
    (13, 3, 4),
)


def _pearson(salt: int, a: int, b: int, c: int) -> int:
    h = _PERM[salt]
    h = _PERM[h ^ a]
    h = _PERM[h ^ b]
    h = _PERM[h ^ c]
    return h


@dataclass(frozen=True)
class TlshDigest:
    checksum: int           # 1 byte
    log_length: int         # 1 byte
    q1_ratio: int           # 4 bits
    q2_ratio: int           # 4 bits
    body: tuple[int, ...]   # 128 two-bit digits, bucket 0 first

    def __post_init__(self):
        if not 0 <= self.checksum <= 255 or not 0 <= self.log_length <= 255:
            raise MetricInputError("tlsh header byte out of range")
        if not 0 <= self.q1_ratio <= 15 or not 0 <= self.q2_ratio <= 15:
            raise MetricInputError("tlsh quartile ratio out of range")
        if len(self.body) != _BUCKETS or any(d not in (0, 1, 2, 3)
                                             for d in self.body):
            raise MetricInputError("tlsh body must be 128 two-bit digits")

    def serialize(self) -> str:
        packed = bytearray()
        for i in range(0, _BUCKETS, 4):
            byte = 0
            for d in self.body[i:i + 4]:
                byte = (byte << 2) | d
            packed.append(byte)
        header = bytes([self.checksum, self.log_length,
                        (self.q1_ratio << 4) | self.q2_ratio])
        return (header + bytes(packed)).hex()

    @classmethod
    def parse(cls, text: str) -> "TlshDigest":
        if len(text) != 70:
            raise MetricInputError(f"tlsh digest must be 70 hex chars, got {len(text)}")
        try:
            raw = bytes.fromhex(text)
        except ValueError as exc:
            raise MetricInputError(f"bad tlsh digest: {exc}") from exc
        digits = []
        for byte in raw[3:]:
            digits.extend(((byte >> 6) & 3, (byte >> 4) & 3,
                           (byte >> 2) & 3, byte & 3))
        return cls(
            checksum=raw[0],
            log_length=raw[1],
            q1_ratio=raw[2] >> 4,
            q2_ratio=raw[2] & 0x0F,
            body=tuple(digits),
        )


def tlsh_digest(data: bytes) -> TlshDigest:
    n = len(data)
    if n < MIN_INPUT:
        raise MetricInputError(
            f"tlsh not defined: need at least {MIN_INPUT} bytes, got {n}"
        )
    buckets = [0] * _BUCKETS
    checksum = 0
    perm = _PERM  # hot loop: the six _pearson chains are inlined
    for i in range(_WINDOW - 1, n):
        w4 = data[i]
        w3 = data[i - 1]
        w2 = data[i - 2]
        w1 = data[i - 3]
        w0 = data[i - 4]
        checksum = perm[perm[perm[perm[0] ^ w4] ^ w3] ^ checksum]
        buckets[perm[perm[perm[perm[2] ^ w4] ^ w3] ^ w2] & 127] += 1
        buckets[perm[perm[perm[perm[3] ^ w4] ^ w3] ^ w1] & 127] += 1
        buckets[perm[perm[perm[perm[5] ^ w4] ^ w2] ^ w1] & 127] += 1
        buckets[perm[perm[perm[perm[7] ^ w4] ^ w3] ^ w0] & 127] += 1
        buckets[perm[perm[perm[perm[11] ^ w4] ^ w2] ^ w0] & 127] += 1
        buckets[perm[perm[perm[perm[13] ^ w4] ^ w1] ^ w0] & 127] += 1

    ordered = sorted(buckets)
    q1, q2, q3 = ordered[31], ordered[63], ordered[95]
    if q3 == 0:
        raise MetricInputError("tlsh not defined: degenerate bucket histogram")

    log_length = min(255, int(math.log(n) / math.log(1.5)))
    q1_ratio = (q1 * 100 // q3) % 16
    q2_ratio = (q2 * 100 // q3) % 16
    body = tuple(
        3 if c > q3 else 2 if c > q2 else 1 if c > q1 else 0
        for c in buckets
    )
    return TlshDigest(checksum, log_length, q1_ratio, q2_ratio, body)


def _mod_diff(a: int, b: int, radix: int) -> int:
    d = abs(a - b) % radix
    return min(d, radix - d)


def tlsh_distance(a: TlshDigest, b: TlshDigest) -> int:
    """Header penalties plus per-bucket digit differences.

    Header fields are circular quantities; a difference of more than one
    step is weighted 12x because it implies a gross size/shape change. In
    the body an opposite-extreme digit pair (difference 3) costs 6.
    """
    dist = 0
    if a.checksum != b.checksum:
        dist += 1
    ld = _mod_diff(a.log_length, b.log_length, 256)
    dist += ld if ld <= 1 else ld * 12
    for qa, qb in ((a.q1_ratio, b.q1_ratio), (a.q2_ratio, b.q2_ratio)):
        qd = _mod_diff(qa, qb, 16)
        dist += qd if qd <= 1 else qd * 12
    for da, db in zip(a.body, b.body):
        diff = abs(da - db)
        dist += 6 if diff == 3 else diff
    return dist


def tlsh_similarity(a: TlshDigest, b: TlshDigest,
                    d_max: int = DEFAULT_DMAX) -> float:
    """Normalize distance into [0,1]: 0 distance is 1.0, d_max and beyond 0.0."""
    if d_max <= 0:
        raise MetricInputError("d_max must be positive")
    return max(0.0, min(1.0, 1.0 - tlsh_distance(a, b) / d_max))
