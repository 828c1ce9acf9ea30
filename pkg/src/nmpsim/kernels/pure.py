"""Pure-Python probe-sampling kernel.

This is the reference implementation of the hot loop: evaluating a
path's piecewise-constant delay schedule at many probe times, with an
optional seeded Gaussian jitter term clamped at zero.

Jitter draws come from a counter-based generator so the value at time
``t`` is a pure function of ``(seed, stream, t)``: a SplitMix64 chain
over the seed, the per-path stream id and the bit pattern of ``t``,
then one Box-Muller transform. The compiled backend in ``_native.pyx``
implements exactly the same arithmetic; both must produce bit-identical
output (see ``tests/test_kernels.py``).
"""

from __future__ import annotations

import math
import struct
from bisect import bisect_right
from typing import Sequence

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2POW53 = 2.0 ** -53


def _splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
    return x ^ (x >> 31)


def _float_bits(value: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", value))[0]


def gaussian_at(seed: int, stream: int, t_ms: float) -> float:
    """Standard normal draw keyed by (seed, stream, time)."""
    k0 = ((seed & _MASK64) * _GOLDEN) & _MASK64
    h = _splitmix64(k0 ^ (stream & _MASK64))
    h = _splitmix64(h ^ _float_bits(t_ms))
    a = _splitmix64(h)
    b = _splitmix64(a)
    u1 = ((a >> 11) + 1) * _INV_2POW53  # in (0, 1], keeps log finite
    u2 = (b >> 11) * _INV_2POW53  # in [0, 1)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def _check_schedule(seg_starts: Sequence[float], seg_values: Sequence[float]) -> None:
    if len(seg_starts) == 0 or len(seg_starts) != len(seg_values):
        raise ValueError("schedule must be non-empty with matching starts/values")
    if seg_starts[0] != 0.0:
        raise ValueError("first schedule segment must start at 0")


def sweep_delays(
    seg_starts: Sequence[float],
    seg_values: Sequence[float],
    times: Sequence[float],
    jitter_std_ms: float,
    seed: int,
    stream: int,
) -> list[float]:
    """Measured one-way delay at each probe time.

    ``seg_starts`` must be strictly increasing and begin at 0; the value
    in force at time ``t`` is the one of the last segment starting at or
    before ``t``. With ``jitter_std_ms`` > 0 a seeded Gaussian term is
    added and the result clamped at zero.
    """
    _check_schedule(seg_starts, seg_values)
    out = []
    for t in times:
        if t < 0:
            raise ValueError(f"probe time must be >= 0, got {t}")
        base = seg_values[bisect_right(seg_starts, t) - 1]
        if jitter_std_ms > 0.0:
            value = base + jitter_std_ms * gaussian_at(seed, stream, t)
            out.append(value if value > 0.0 else 0.0)
        else:
            out.append(base)
    return out
