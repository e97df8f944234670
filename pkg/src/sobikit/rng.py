"""Portable seeded pseudo-random generator.

Synthetic datasets must be reproducible bit for bit from a seed, independent
of any library RNG, so the generator is pinned here as part of the package
contract:

* state seeding: one round of SplitMix64 over the user seed
  (``z += 0x9E3779B97F4A7C15; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9;
  z = (z ^ z>>27) * 0x94D049BB133111EB; z ^= z>>31``, all mod 2**64),
  falling back to ``0x9E3779B97F4A7C15`` if the result is zero;
* recurrence: xorshift64* (``s ^= s>>12; s ^= s<<25; s ^= s>>27``,
  output ``s * 0x2545F4914F6CDD1D``, all mod 2**64);
* ``uniform()``: top 53 bits of the output scaled by 2**-53, giving
  a double in [0, 1);
* ``normal()``: Box-Muller on two uniforms (the cosine branch first,
  the sine branch cached for the next call).

Substreams derived via ``stream(seed, k)`` hash ``k`` into the seed with an
extra SplitMix64 round so rows of a synthetic dataset do not interact.
"""

import math

_MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_TWO53 = float(1 << 53)


def _splitmix64(z):
    z = (z + _SPLITMIX_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class Xorshift64Star:
    """Deterministic 64-bit xorshift* generator with a documented recurrence."""

    def __init__(self, seed):
        state = _splitmix64(int(seed) & _MASK64)
        self._state = state if state != 0 else _SPLITMIX_GAMMA
        self._cached_normal = None

    def next_u64(self):
        s = self._state
        s ^= s >> 12
        s = (s ^ (s << 25)) & _MASK64
        s ^= s >> 27
        self._state = s
        return (s * 0x2545F4914F6CDD1D) & _MASK64

    def uniform(self):
        """Double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) / _TWO53

    def uniform_range(self, low, high):
        return low + (high - low) * self.uniform()

    def randint(self, n):
        """Integer in [0, n)."""
        return int(self.uniform() * n)

    def normal(self):
        """Standard normal deviate via Box-Muller."""
        if self._cached_normal is not None:
            value = self._cached_normal
            self._cached_normal = None
            return value
        u1 = self.uniform()
        while u1 <= 0.0:
            u1 = self.uniform()
        u2 = self.uniform()
        radius = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        self._cached_normal = radius * math.sin(theta)
        return radius * math.cos(theta)

    def shuffle(self, items):
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(i + 1)
            items[i], items[j] = items[j], items[i]


def stream(seed, k):
    """Independent substream ``k`` of the generator seeded with ``seed``."""
    return Xorshift64Star(_splitmix64((int(seed) & _MASK64) + (int(k) & _MASK64)))
