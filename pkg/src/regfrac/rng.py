"""xoshiro256** seeded through splitmix64.

Both generators are fixed by their public reference constants, so any
implementation reproduces the same draw sequence from the same 64-bit seed.
Uniform reals use the top 53 bits: (x >> 11) * 2^-53.
"""

import numpy as np

MASK = (1 << 64) - 1
DEFAULT_SEED = 42


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK


def splitmix64(state):
    """One splitmix64 step: returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return state, z ^ (z >> 31)


class Xoshiro256:
    def __init__(self, seed=DEFAULT_SEED, state=None):
        if state is not None:
            if len(state) != 4 or not any(state):
                raise ValueError("state must be four 64-bit words, not all zero")
            self.s = [int(x) & MASK for x in state]
            return
        sm = int(seed) & MASK
        words = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            words.append(out)
        self.s = words

    def next_u64(self):
        s = self.s
        result = (_rotl((s[1] * 5) & MASK, 7) * 9) & MASK
        t = (s[1] << 17) & MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self):
        """Uniform draw in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low, high, size):
        return np.array([low + (high - low) * self.random() for _ in range(size)])
