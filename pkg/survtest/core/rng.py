"""
Reproducible random streams: xoshiro256** seeded through splitmix64.

Replication i of a simulation with master seed s draws from

    Xoshiro256StarStar.from_seed(SplitMix64.mix(s + (i + 1) · GOLDEN_GAMMA))

where `from_seed` fills the 256-bit state with four consecutive splitmix64
outputs. Both algorithms are the published reference versions by Blackman and
Vigna, so streams replicate across implementations.
"""

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
ALGORITHM = "xoshiro256**/splitmix64"


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class SplitMix64:
    """splitmix64 generator; also used as a 64-bit mixing function."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    @staticmethod
    def mix(z: int) -> int:
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
        return z ^ (z >> 31)

    def next(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return self.mix(self.state)


class Xoshiro256StarStar:
    """xoshiro256** 1.0 with a 256-bit state."""

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, s0: int, s1: int, s2: int, s3: int):
        if not (s0 or s1 or s2 or s3):
            raise ValueError("xoshiro256** state must not be all zero")
        self.s0, self.s1, self.s2, self.s3 = s0, s1, s2, s3

    @classmethod
    def from_seed(cls, seed: int) -> "Xoshiro256StarStar":
        seeder = SplitMix64(seed)
        return cls(seeder.next(), seeder.next(), seeder.next(), seeder.next())

    def next(self) -> int:
        s0, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s0, self.s1, self.s2, self.s3 = s0, s1, s2, s3
        return result

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next() >> 11) * (1.0 / (1 << 53))


def stream_seed(master_seed: int, index: int) -> int:
    """64-bit seed of stream `index` derived from the master seed."""
    return SplitMix64.mix((master_seed + (index + 1) * GOLDEN_GAMMA) & MASK64)


def replication_stream(master_seed: int, index: int) -> Xoshiro256StarStar:
    """Independent generator for replication `index`."""
    return Xoshiro256StarStar.from_seed(stream_seed(master_seed, index))
