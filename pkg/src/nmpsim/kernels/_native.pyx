# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``nmpsim.kernels.pure``.

Same counter-based jitter generator and schedule lookup, written with C
types. Must stay bit-identical to the pure backend: both use IEEE
double arithmetic in the same operation order and the same libm calls.
Do not enable -ffast-math or FMA contraction when building.
"""

from array import array

from libc.math cimport cos, log, sqrt
from libc.stdint cimport uint64_t
from libc.string cimport memcpy

cdef double TWO_PI = 6.283185307179586476925286766559
cdef double INV_2POW53 = 1.0 / 9007199254740992.0
cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15UL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9UL
cdef uint64_t MIX2 = 0x94D049BB133111EBUL


cdef inline uint64_t _splitmix64(uint64_t x) nogil:
    x = x + GOLDEN
    x = (x ^ (x >> 30)) * MIX1
    x = (x ^ (x >> 27)) * MIX2
    return x ^ (x >> 31)


cdef inline uint64_t _float_bits(double value) nogil:
    cdef uint64_t bits
    memcpy(&bits, &value, 8)
    return bits


cdef inline double _gaussian_at(uint64_t seed, uint64_t stream, double t_ms) nogil:
    cdef uint64_t k0 = seed * GOLDEN
    cdef uint64_t h = _splitmix64(k0 ^ stream)
    cdef uint64_t a, b
    cdef double u1, u2
    h = _splitmix64(h ^ _float_bits(t_ms))
    a = _splitmix64(h)
    b = _splitmix64(a)
    u1 = <double>((a >> 11) + 1) * INV_2POW53
    u2 = <double>(b >> 11) * INV_2POW53
    return sqrt(-2.0 * log(u1)) * cos(TWO_PI * u2)


cdef inline Py_ssize_t _segment_index(const double[::1] starts, double t) nogil:
    # bisect_right(starts, t) - 1 over a strictly increasing array
    cdef Py_ssize_t lo = 0
    cdef Py_ssize_t hi = starts.shape[0]
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) // 2
        if t < starts[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo - 1


def gaussian_at(seed, stream, double t_ms):
    """Standard normal draw keyed by (seed, stream, time)."""
    cdef uint64_t s = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t st = <uint64_t>(stream & 0xFFFFFFFFFFFFFFFF)
    return _gaussian_at(s, st, t_ms)


def sweep_delays(seg_starts, seg_values, times, double jitter_std_ms, seed, stream):
    """Measured one-way delay at each probe time (compiled backend)."""
    if len(seg_starts) == 0 or len(seg_starts) != len(seg_values):
        raise ValueError("schedule must be non-empty with matching starts/values")
    starts_arr = array("d", seg_starts)
    values_arr = array("d", seg_values)
    times_arr = array("d", times)
    cdef double[::1] starts = starts_arr
    cdef double[::1] values = values_arr
    cdef double[::1] ts = times_arr
    if starts[0] != 0.0:
        raise ValueError("first schedule segment must start at 0")

    cdef uint64_t s = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t st = <uint64_t>(stream & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t n = ts.shape[0]
    cdef Py_ssize_t i
    cdef double t, value
    out_arr = array("d", bytes(8 * n)) if n else array("d")
    cdef double[::1] out = out_arr

    for i in range(n):
        t = ts[i]
        if t < 0:
            raise ValueError(f"probe time must be >= 0, got {t}")
        value = values[_segment_index(starts, t)]
        if jitter_std_ms > 0.0:
            value = value + jitter_std_ms * _gaussian_at(s, st, t)
            if value < 0.0:
                value = 0.0
        out[i] = value
    return out_arr.tolist()
