"""Binary-reflected Gray codes with bit 0 printed leftmost.

Codeword ``g`` is stored as a tuple of bits ``(g_0, g_1, ..., g_{eta-1})``;
bit ``b`` is carried by qubit ``b`` when the code labels basis states.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["GrayCode", "brgc", "reflected_recursive", "truncate", "binary_order"]

MAX_BITS = 20


def _flipped_bit(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    diff = [k for k, (x, y) in enumerate(zip(a, b)) if x != y]
    if len(diff) != 1:
        raise ValueError(f"codewords {a} and {b} differ in {len(diff)} bits")
    return diff[0]


@dataclass(frozen=True)
class GrayCode:
    """Ordered codewords and the bit flipped at each step.

    ``transitions[a]`` is the bit flipped going from ``codewords[a]`` to
    ``codewords[a + 1]``. For a full (cyclic) code the last entry closes the
    cycle back to ``codewords[0]``; a truncated prefix of ``n`` codewords
    carries ``n - 1`` transitions.
    """

    bit_count: int
    codewords: tuple[tuple[int, ...], ...]
    transitions: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.codewords)

    @property
    def is_full(self) -> bool:
        return len(self.codewords) == 1 << self.bit_count

    def strings(self) -> list[str]:
        return ["".join(map(str, g)) for g in self.codewords]

    def as_integers(self) -> list[int]:
        """Codewords read with bit 0 as the least significant bit."""
        return [sum(bit << k for k, bit in enumerate(g)) for g in self.codewords]


def brgc(bit_count: int) -> GrayCode:
    """Binary-reflected Gray code on ``bit_count`` bits.

    Built iteratively: the previous code with a trailing 0, followed by the
    previous code in reverse order with a trailing 1.

    >>> brgc(3).strings()
    ['000', '100', '110', '010', '011', '111', '101', '001']
    >>> brgc(3).transitions
    (0, 1, 0, 2, 0, 1, 0, 2)
    """
    if not 1 <= bit_count <= MAX_BITS:
        raise ValueError(f"bit_count must be in [1, {MAX_BITS}], got {bit_count}")
    words: list[tuple[int, ...]] = [(0,), (1,)]
    for _ in range(1, bit_count):
        words = [w + (0,) for w in words] + [w + (1,) for w in reversed(words)]
    n = len(words)
    transitions = tuple(_flipped_bit(words[a], words[(a + 1) % n]) for a in range(n))
    return GrayCode(bit_count, tuple(words), transitions)


def reflected_recursive(bit_count: int) -> list[tuple[int, ...]]:
    """Codewords from the recursive rule G_k = (G_{k-1}·0, reflect(G_{k-1})·1).

    ``reflect`` lists the codewords of the smaller code last-to-first.
    Reversing the bits inside each codeword instead is not a Gray code
    (k=2 would give 00, 10, 01, 11). Kept separate from :func:`brgc` so the
    two constructions can be checked against each other.
    """
    if bit_count == 1:
        return [(0,), (1,)]
    prev = reflected_recursive(bit_count - 1)
    return [g + (0,) for g in prev] + [g + (1,) for g in prev[::-1]]


def truncate(code: GrayCode, n: int) -> GrayCode:
    """First ``n`` codewords of ``code`` and the ``n - 1`` transitions between them."""
    if not 1 <= n <= len(code.codewords):
        raise ValueError(f"n must be in [1, {len(code.codewords)}], got {n}")
    if n == len(code.codewords):
        return code
    return GrayCode(code.bit_count, code.codewords[:n], code.transitions[: n - 1])


def binary_order(bit_count: int) -> list[tuple[int, ...]]:
    """Codewords in increasing binary value, bit 0 least significant."""
    return [tuple((i >> k) & 1 for k in range(bit_count)) for i in range(1 << bit_count)]
