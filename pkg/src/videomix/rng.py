"""Counter-based deterministic random streams.

Every draw is a pure function of (seed, epoch, batch, sample, draw index), so
any stream can be replayed from scratch and per-item streams are independent
of the order they are consumed in. This is what makes batch augmentation
reproducible under any parallelism degree.

The construction is the splitmix64 finalizer: the path components are folded
into a 64-bit key with distinct odd multipliers, and draw ``i`` hashes
``key + GOLDEN*(i+1)``. Uniforms use the top 53 bits offset by half a step,
so they lie strictly inside (0, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
# Distinct fold multipliers for epoch / batch / sample (wyhash constants).
_FOLD_EPOCH = 0xA0761D6478BD642F
_FOLD_BATCH = 0xE7037ED1A0B428DB
_FOLD_SAMPLE = 0x8EBC6AF09C88C6E3

# Reserved sample index for batch-level draws (prob gate, permutations).
BATCH_LANE = -1

_U53_STEP = 2.0 ** -53


def _mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _stream_key(seed: int, epoch: int, batch: int, sample: int) -> int:
    key = _mix64(seed & _MASK)
    key = _mix64(key ^ ((_FOLD_EPOCH * ((epoch + 1) & _MASK)) & _MASK))
    key = _mix64(key ^ ((_FOLD_BATCH * ((batch + 1) & _MASK)) & _MASK))
    key = _mix64(key ^ ((_FOLD_SAMPLE * ((sample + 1) & _MASK)) & _MASK))
    return key


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@dataclass
class RngStream:
    """A deterministic uniform stream addressed by (seed, epoch, batch, sample).

    The draw counter advances as values are consumed; a freshly constructed
    stream with the same path replays the identical sequence. Streams are
    cheap values: derive one per work item with :meth:`spawn` instead of
    sharing an instance across tasks.
    """

    seed: int
    epoch: int = 0
    batch: int = 0
    sample: int = 0
    draw: int = 0
    _key: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self._key = _stream_key(self.seed, self.epoch, self.batch, self.sample)

    @property
    def path(self) -> tuple[int, int, int, int]:
        """(epoch, batch, sample, draw) address of the next value."""
        return (self.epoch, self.batch, self.sample, self.draw)

    def spawn(self, *, epoch: int | None = None, batch: int | None = None,
              sample: int | None = None) -> "RngStream":
        """Derive an independent stream with some path components replaced."""
        return RngStream(
            seed=self.seed,
            epoch=self.epoch if epoch is None else epoch,
            batch=self.batch if batch is None else batch,
            sample=self.sample if sample is None else sample,
        )

    def _bits(self, index: int) -> int:
        return _mix64((self._key + _GOLDEN * (index + 1)) & _MASK)

    def uniform(self) -> float:
        """Next uniform in the open interval (0, 1)."""
        bits = self._bits(self.draw)
        self.draw += 1
        return ((bits >> 11) + 0.5) * _U53_STEP

    def uniforms(self, n: int) -> np.ndarray:
        """Vectorized :meth:`uniform`; identical values, one advance of n."""
        if n < 0:
            raise ValueError(f"n must be >= 0, got {n}")
        idx = np.arange(self.draw + 1, self.draw + n + 1, dtype=np.uint64)
        keyed = np.uint64(self._key) + np.uint64(_GOLDEN) * idx
        bits = _mix64_array(keyed)
        self.draw += n
        return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * _U53_STEP

    def randint_below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError(f"randint_below needs n >= 1, got {n}")
        return min(int(self.uniform() * n), n - 1)

    def permutation(self, n: int) -> list[int]:
        """Uniform random permutation of range(n) (Fisher-Yates)."""
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.randint_below(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return perm

    def normal(self) -> float:
        """Standard normal via Box-Muller (consumes two uniforms)."""
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
