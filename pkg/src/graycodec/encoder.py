"""Tridiagonal Hamiltonians and their one-hot, Gray-code and binary qubit encodings."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .graycode import binary_order, brgc, truncate
from .pauli import PauliSum, projector_expand, transition_expand

__all__ = [
    "ENCODINGS",
    "HBAR_OMEGA",
    "V0",
    "TridiagonalHamiltonian",
    "basis_index",
    "codewords",
    "deuteron_hamiltonian",
    "encode",
    "encode_binary",
    "encode_gray",
    "encode_one_hot",
    "qubits_for",
]

#: Oscillator energy and contact strength of the leading-order deuteron model (MeV).
HBAR_OMEGA = 7.0
V0 = -5.68658111

ENCODINGS = ("onehot", "gray", "binary")


@dataclass(frozen=True)
class TridiagonalHamiltonian:
    """Real symmetric tridiagonal matrix; ``offdiagonal[n] = <n+1|H|n>`` (MeV)."""

    diagonal: tuple[float, ...]
    offdiagonal: tuple[float, ...]
    hbar_omega: Optional[float] = None
    v0: Optional[float] = None

    def __post_init__(self) -> None:
        if len(self.diagonal) < 1:
            raise ValueError("need at least one state")
        if len(self.offdiagonal) != len(self.diagonal) - 1:
            raise ValueError("offdiagonal must have N - 1 entries")

    @property
    def size(self) -> int:
        return len(self.diagonal)

    def matrix(self) -> np.ndarray:
        n = self.size
        mat = np.diag(np.asarray(self.diagonal, dtype=float))
        off = np.asarray(self.offdiagonal, dtype=float)
        mat[np.arange(1, n), np.arange(n - 1)] = off
        mat[np.arange(n - 1), np.arange(1, n)] = off
        return mat

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix())

    def ground_energy(self) -> float:
        return float(self.eigenvalues()[0])


def deuteron_hamiltonian(n_states: int, hbar_omega: float = HBAR_OMEGA, v0: float = V0) -> TridiagonalHamiltonian:
    """Deuteron Hamiltonian truncated to oscillator states ``n < n_states``.

    Kinetic term: diagonal ``(hw/2)(2n + 3/2)``, off-diagonal
    ``-(hw/2) sqrt((n+1)(n+3/2))``; the contact potential adds ``v0`` to ``n = 0``.
    """
    if n_states < 1:
        raise ValueError("n_states must be >= 1")
    half = hbar_omega / 2.0
    diag = [half * (2 * n + 1.5) for n in range(n_states)]
    diag[0] += v0
    off = [-half * math.sqrt((n + 1) * (n + 1.5)) for n in range(n_states - 1)]
    return TridiagonalHamiltonian(tuple(diag), tuple(off), hbar_omega, v0)


def qubits_for(encoding: str, n_states: int) -> int:
    if encoding == "onehot":
        return n_states
    if encoding in ("gray", "binary"):
        return max(1, math.ceil(math.log2(n_states)))
    raise ValueError(f"unknown encoding {encoding!r}")


def codewords(encoding: str, n_states: int) -> list[tuple[int, ...]]:
    """Bitstring (qubit 0 first) representing each oscillator state ``n < n_states``."""
    q = qubits_for(encoding, n_states)
    if encoding == "onehot":
        return [tuple(int(k == n) for k in range(q)) for n in range(n_states)]
    if encoding == "gray":
        return list(truncate(brgc(q), n_states).codewords)
    return binary_order(q)[:n_states]


def basis_index(bits: Sequence[int]) -> int:
    """Statevector index of a bitstring, qubit 0 most significant."""
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def encode_one_hot(h: TridiagonalHamiltonian) -> PauliSum:
    """``1/2 sum d_n (1 - Z_n) + 1/2 sum o_n (X_n X_{n+1} + Y_n Y_{n+1})`` on N qubits."""
    n = h.size
    acc: dict[tuple[int, int], float] = {}

    def add(key: tuple[int, int], value: float) -> None:
        acc[key] = acc.get(key, 0.0) + value

    for k, d in enumerate(h.diagonal):
        add((0, 0), 0.5 * d)
        add((0, 1 << k), -0.5 * d)
    for k, o in enumerate(h.offdiagonal):
        pair = (1 << k) | (1 << (k + 1))
        add((pair, 0), 0.5 * o)
        add((pair, pair), 0.5 * o)
    return PauliSum.from_coefficients(n, acc)


def _number_pattern(word: Sequence[int]) -> list[str]:
    return [f"P{b}" for b in word]


def _encode_ordered(h: TridiagonalHamiltonian, words: Sequence[Sequence[int]], ladder: str) -> PauliSum:
    q = len(words[0])
    total = PauliSum(q)
    for d, word in zip(h.diagonal, words):
        total = total + d * projector_expand(_number_pattern(word))
    for a, o in enumerate(h.offdiagonal):
        lower, upper = words[a], words[a + 1]
        if ladder == "exact":
            op = transition_expand(upper, lower)
        elif ladder == "x_string":
            op = projector_expand(["X" if x != y else f"P{x}" for x, y in zip(lower, upper)])
        else:
            raise ValueError(f"unknown ladder mode {ladder!r}")
        total = total + o * op
    return total


def encode_gray(h: TridiagonalHamiltonian) -> PauliSum:
    """Gray-code encoding on ``ceil(log2 N)`` qubits.

    State ``n`` maps to codeword ``g_n`` of the binary-reflected code. Each
    ``|n><n|`` becomes a product of projectors and each ``|n+1><n| + h.c.``
    a single X on the flipped bit dressed by projectors on the others. For
    ``N`` below a power of two the unused codewords carry no terms.
    """
    if h.size < 2:
        raise ValueError("the Gray encoding needs at least two states")
    words = codewords("gray", h.size)
    return _encode_ordered(h, words, "x_string")


def encode_binary(h: TridiagonalHamiltonian, ladder: str = "exact") -> PauliSum:
    """Encoding with states in increasing binary order (qubit 0 least significant).

    ``ladder="exact"`` expands ``|n+1><n| + h.c.`` faithfully, which produces
    XX...X and YY...Y mixtures when several bits flip. ``ladder="x_string"``
    keeps only a bare X on every flipped bit, as in the tabulated two-qubit
    example; it changes the spectrum whenever more than one bit flips.
    """
    if h.size < 2:
        raise ValueError("the binary encoding needs at least two states")
    return _encode_ordered(h, codewords("binary", h.size), ladder)


def encode(h: TridiagonalHamiltonian, encoding: str) -> PauliSum:
    if encoding == "onehot":
        return encode_one_hot(h)
    if encoding == "gray":
        return encode_gray(h)
    if encoding == "binary":
        return encode_binary(h)
    raise ValueError(f"unknown encoding {encoding!r}; expected one of {ENCODINGS}")
