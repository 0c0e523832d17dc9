"""Deterministic randomness built on the splitmix64 mixing function.

Every random decision in the pipeline (BPE training-line sampling, epoch
shuffling, per-stage seed derivation) flows through this module so that runs
are reproducible bit-for-bit and the scheme can be re-implemented
independently from its published constants:

    mix64(x) = finalizer of splitmix64 applied to (x + 0x9E3779B97F4A7C15)

with the finalizer

    z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

all arithmetic mod 2**64.  Labels are folded in byte by byte:
derive_seed(root, label) chains mix64 over root and the UTF-8 bytes of label.
"""

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """splitmix64 output function for the state ``x + GOLDEN``."""
    z = (x + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(root: int, label: str) -> int:
    """Derive an independent 64-bit seed for a named stream.

    Distinct labels give unrelated streams for the same root, so each
    pipeline stage can be reproduced in isolation.
    """
    h = root & MASK64
    for b in label.encode("utf-8"):
        h = mix64(h ^ b)
    return h


def line_key(stream_seed: int, index: int) -> int:
    """Sampling key of line ``index`` within a seeded stream.

    Taking the k smallest keys draws a uniform k-subset without replacement.
    """
    return mix64(stream_seed ^ mix64(index))


class SplitMix64(object):
    """Sequential splitmix64 generator for shuffles."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = MASK64 + 1 - ((MASK64 + 1) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]
