"""Independent reference implementations used to check the package.

Everything here is written from first principles and must not import
from p4flowgen, so that agreement between package and oracle means
something.
"""


def splitmix64_stream(seed: int):
    """Yield the splitmix64 output sequence for a seed.

    Written as a generator with % 2**64 arithmetic, deliberately unlike
    the package's masked in-place implementation.
    """
    gamma = 0x9E3779B97F4A7C15
    mul1 = 0xBF58476D1CE4E5B9
    mul2 = 0x94D049BB133111EB
    x = seed % 2**64
    while True:
        x = (x + gamma) % 2**64
        z = x
        z = ((z ^ (z >> 30)) * mul1) % 2**64
        z = ((z ^ (z >> 27)) * mul2) % 2**64
        yield z ^ (z >> 31)


def guess_reference(secret: int, guess: int) -> bytes:
    """Three-way comparator for the number-guessing responder."""
    if guess == secret:
        return b"OK"
    if secret > guess:
        return b"GT"
    return b"LT"


def rfc1071_naive(data: bytes) -> int:
    """One's-complement 16-bit word sum, carry folded after every word."""
    if len(data) % 2:
        data = bytes(data) + b"\x00"
    acc = 0
    for i in range(0, len(data), 2):
        acc += (data[i] << 8) | data[i + 1]
        acc = (acc & 0xFFFF) + (acc >> 16)
    return acc ^ 0xFFFF
