"""Sobol low-discrepancy sampling, digital scrambling, and seed derivation.

All randomness in the package flows through :func:`derive_seed`, a keyed
64-bit hash, so that every task (instance construction, problem
generation, optimizer runs, scramble seeds) gets an independent,
order-free, reproducible stream.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError

_BITS = 32
_SCALE = float(1 << _BITS)

MAX_DIMENSION = 16

# Joe-Kuo direction-number initialisation (new-joe-kuo-6) for dimensions
# 2..16; dimension 1 is the van der Corput sequence.  Rows: (s, a, m_1..m_s).
_JOE_KUO: tuple[tuple[int, int, tuple[int, ...]], ...] = (
    (1, 0, (1,)),
    (2, 1, (1, 3)),
    (3, 1, (1, 3, 1)),
    (3, 2, (1, 1, 1)),
    (4, 1, (1, 1, 3, 3)),
    (4, 4, (1, 3, 5, 13)),
    (5, 2, (1, 1, 5, 5, 17)),
    (5, 4, (1, 1, 5, 5, 5)),
    (5, 7, (1, 1, 7, 11, 19)),
    (5, 11, (1, 1, 5, 1, 1)),
    (5, 13, (1, 1, 1, 3, 11)),
    (5, 14, (1, 3, 5, 5, 31)),
    (6, 1, (1, 3, 3, 9, 7, 49)),
    (6, 13, (1, 1, 1, 15, 21, 21)),
    (6, 16, (1, 3, 1, 13, 27, 49)),
)


def derive_seed(master_seed: int, *parts) -> int:
    """Derive a 64-bit task seed from a master seed and a tag tuple.

    Hash-based, so seeds are independent of the order in which tasks are
    scheduled.  `parts` may mix ints and strings.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(repr((int(master_seed),) + tuple(parts)).encode())
    return int.from_bytes(h.digest(), "little")


def _direction_numbers(d: int) -> np.ndarray:
    """Direction numbers V[j, k] for dimensions j < d, bits k = 0.._BITS-1."""
    if not 1 <= d <= MAX_DIMENSION:
        raise DomainError(f"dimension {d} outside supported range 1..{MAX_DIMENSION}")
    V = np.zeros((d, _BITS), dtype=np.uint64)
    # dimension 1: van der Corput
    for k in range(_BITS):
        V[0, k] = 1 << (_BITS - 1 - k)
    for j in range(1, d):
        s, a, m = _JOE_KUO[j - 1]
        v = [0] * _BITS
        for k in range(min(s, _BITS)):
            v[k] = m[k] << (_BITS - 1 - k)
        for k in range(s, _BITS):
            v[k] = v[k - s] ^ (v[k - s] >> s)
            for i in range(1, s):
                if (a >> (s - 1 - i)) & 1:
                    v[k] ^= v[k - i]
        V[j] = v
    return V


def raw_sobol(n: int, d: int, skip: int = 1) -> np.ndarray:
    """First `n` Sobol points in [0,1)^d after dropping `skip` leading points.

    Gray-code ordering; integer arithmetic only, so the output is
    platform-independent.  `skip=0` exposes the underlying digital net
    (the sequence then starts at the all-zeros point).
    """
    if n < 1:
        raise DomainError("need at least one point")
    total = n + skip
    if total > (1 << _BITS):
        raise DomainError("sample size exceeds generator period")
    V = _direction_numbers(d)
    # c[i] = 1 + number of trailing ones of i, the direction index used
    # to step from point i to point i+1 in Gray-code order.
    idx = np.arange(total - 1, dtype=np.uint64)
    low_zero = (~idx) & (idx + 1)
    c = np.log2(low_zero.astype(np.float64)).astype(np.int64)
    steps = V[:, c].T  # (total-1, d)
    pts = np.zeros((total, d), dtype=np.uint64)
    pts[1:] = np.bitwise_xor.accumulate(steps, axis=0)
    return pts[skip:].astype(np.float64) / _SCALE


@dataclass(frozen=True)
class SampleDesign:
    """A Sobol sampling request: `n` points in the box [lo, hi]^d.

    `scramble_seed == 0` means the plain (unscrambled) sequence; any other
    value selects a deterministic XOR digital shift.
    """

    n: int
    d: int
    lo: float | np.ndarray = 0.0
    hi: float | np.ndarray = 1.0
    scramble_seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("design needs n >= 1")
        lo = np.broadcast_to(np.asarray(self.lo, dtype=float), (self.d,))
        hi = np.broadcast_to(np.asarray(self.hi, dtype=float), (self.d,))
        if not np.all(lo < hi):
            raise DomainError("design needs lo < hi elementwise")

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.broadcast_to(np.asarray(self.lo, dtype=float), (self.d,)).copy()
        hi = np.broadcast_to(np.asarray(self.hi, dtype=float), (self.d,)).copy()
        return lo, hi


def sobol_points(design: SampleDesign) -> np.ndarray:
    """Generate the design's points, mapped affinely into [lo, hi].

    The all-zeros first point of the raw sequence is skipped.  A nonzero
    scramble seed applies a per-dimension XOR digital shift before the
    affine map; the shift preserves the base-2 net structure.
    """
    u = raw_sobol(design.n, design.d, skip=1)
    if design.scramble_seed != 0:
        rng = np.random.default_rng(design.scramble_seed)
        shift = rng.integers(0, 1 << _BITS, size=design.d, dtype=np.uint64)
        ints = (u * _SCALE).astype(np.uint64)
        u = np.bitwise_xor(ints, shift).astype(np.float64) / _SCALE
    lo, hi = design.bounds()
    return lo + u * (hi - lo)


def repeat_designs(base: SampleDesign, repetitions: int = 5, seed: int = 0) -> list[SampleDesign]:
    """Clone a design `repetitions` times with distinct scramble seeds.

    Seeds derive deterministically from `seed`; used for the repeated,
    averaged feature samplings.
    """
    if repetitions < 1:
        raise DomainError("repetitions must be >= 1")
    designs = []
    for r in range(repetitions):
        s = derive_seed(seed, "scramble", r) or 1
        designs.append(replace(base, scramble_seed=s))
    return designs
