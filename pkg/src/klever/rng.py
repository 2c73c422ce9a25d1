"""Counter-based splittable random streams for reproducible parallel runs.

Every simulated path gets its own stream, derived deterministically from
``(master_seed, path_index)`` with a 64-bit SplitMix64 mixing function.
Because no generator state is shared between paths, ensemble results are
independent of scheduling, worker count, and path completion order. The
derivation below is part of the output-format contract (see
docs/formats.md) and is mirrored exactly by the compiled engine kernel.

Stream derivation::

    state_0 = mix64(master_seed XOR mix64((path_index + 1) * GOLDEN))
    next(): state += GOLDEN (mod 2^64); output mix64(state)

where GOLDEN = 0x9E3779B97F4A7C15 and mix64 is the SplitMix64 finalizer.
Uniforms take the top 53 bits: u = (output >> 11) * 2^-53, giving
u in [0, 1). Exponentials use inversion: -log1p(-u) / rate.
"""

from __future__ import annotations

import math

GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1
_INV_2_53 = 2.0 ** -53


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a bijective 64-bit avalanche mix."""
    z &= _MASK
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK
    z ^= z >> 31
    return z


def stream_state(master_seed: int, path_index: int) -> int:
    """Initial SplitMix64 state for path `path_index` under `master_seed`."""
    return mix64((master_seed & _MASK) ^ mix64(((path_index + 1) * GOLDEN) & _MASK))


class SplitMix64:
    """Minimal SplitMix64 stream with uniform and exponential draws."""

    __slots__ = ("state",)

    def __init__(self, state: int):
        self.state = state & _MASK

    @classmethod
    def for_path(cls, master_seed: int, path_index: int) -> "SplitMix64":
        return cls(stream_state(master_seed, path_index))

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & _MASK
        return mix64(self.state)

    def uniform(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * _INV_2_53

    def exponential(self, rate: float) -> float:
        """Exponential(rate) waiting time via inversion; rate > 0."""
        return -math.log1p(-self.uniform()) / rate
