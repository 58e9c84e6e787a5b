"""Portable seeded generator.

xorshift64* (Vigna 2016: shifts 12/25/27, multiplier 0x2545F4914F6CDD1D) with
its state initialised from the seed by one round of splitmix64. Everything
is integer arithmetic mod 2**64, so any language reproduces the stream.
"""

MASK64 = (1 << 64) - 1
_MULT = 0x2545F4914F6CDD1D


def splitmix64(state):
    """One splitmix64 step: returns ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed=0):
        _, s = splitmix64(int(seed) & MASK64)
        self.state = s or 0x9E3779B97F4A7C15  # all-zero state is a fixed point

    @classmethod
    def from_state(cls, state):
        g = cls.__new__(cls)
        if state == 0:
            raise ValueError("xorshift state must be non-zero")
        g.state = state & MASK64
        return g

    def next_u64(self):
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * _MULT) & MASK64

    def random(self):
        """Uniform float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, n):
        """Uniform integer in ``[0, n)`` by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n
