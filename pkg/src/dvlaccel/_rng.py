"""Version-stable random streams.

Every random draw in the package goes through :class:`Stream`, which reads
raw 64-bit words from a PCG64 bit generator and converts them to doubles
itself. The PCG64 word sequence for a given seed is fixed by its published
algorithm, so golden files survive NumPy upgrades even if the
distribution samplers inside ``numpy.random.Generator`` change.

Conversions:

* uniform in [0, 1): top 53 bits of a word times 2**-53
* standard normal: Box-Muller on two uniforms, using both outputs
"""

from __future__ import annotations

import numpy as np

_TWO_POW_M53 = 2.0**-53


def _seed_sequence(seed: int, *tags: int) -> np.random.SeedSequence:
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.SeedSequence([int(seed), *[int(t) for t in tags]])


class Stream:
    """Deterministic source of uniforms and Gaussians for one seed/tag path."""

    def __init__(self, seed: int, *tags: int) -> None:
        self._bits = np.random.PCG64(_seed_sequence(seed, *tags))

    def _words(self, n: int) -> np.ndarray:
        return np.asarray(self._bits.random_raw(n), dtype=np.uint64)

    def uniform(self, n: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        u = (self._words(n) >> np.uint64(11)).astype(np.float64) * _TWO_POW_M53
        return low + (high - low) * u

    def normal(self, n: int) -> np.ndarray:
        m = (n + 1) // 2
        u1 = 1.0 - self.uniform(m)  # (0, 1], keeps log finite
        u2 = self.uniform(m)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.empty(2 * m)
        z[0::2] = r * np.cos(theta)
        z[1::2] = r * np.sin(theta)
        return z[:n]

    def permutation(self, n: int) -> np.ndarray:
        # stable argsort of random keys; ties are astronomically unlikely and
        # still resolved deterministically by index
        return np.argsort(self.uniform(n), kind="stable")
