"""Pauli strings stored as x/z bitmasks, real-weighted Pauli sums, and
qubit-wise commuting measurement groups.

Qubit ``k`` is bit ``k`` of both masks and the ``k``-th character of a label
(labels are written qubit-0-leftmost, e.g. ``"ZXI"``). Dense matrices use the
big-endian convention: qubit 0 is the most significant bit of a basis index,
so ``to_matrix`` equals the Kronecker product ``Q_0 ⊗ Q_1 ⊗ ...``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "CommutingGroup",
    "PauliSum",
    "PauliTerm",
    "measurement_rotation_count",
    "multiply_paulis",
    "partition_commuting",
    "pauli_covariance_spectrum",
    "projector_expand",
    "to_matrix",
    "transition_expand",
]

#: Terms whose coefficient magnitude falls below this are dropped on simplification.
COEFF_TOL = 1e-12
#: Largest register handled by the dense helpers.
MAX_DENSE_QUBITS = 12

_CHAR_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_CHAR = {bits: char for char, bits in _CHAR_TO_BITS.items()}


def _popcount(value: int) -> int:
    return bin(value).count("1")


def multiply_paulis(x1: int, z1: int, x2: int, z2: int) -> tuple[complex, int, int]:
    """Product of two Pauli strings as ``(phase, x, z)``.

    A string with masks ``(x, z)`` is ``i^{|x&z|} X^x Z^z``, which makes Y the
    qubits where both bits are set.
    """
    x3, z3 = x1 ^ x2, z1 ^ z2
    power = (
        _popcount(x1 & z1) + _popcount(x2 & z2) + 2 * _popcount(z1 & x2) - _popcount(x3 & z3)
    ) % 4
    return (1, 1j, -1, -1j)[power], x3, z3


@dataclass(frozen=True)
class PauliTerm:
    """A single Pauli string with a real coefficient."""

    x_mask: int
    z_mask: int
    coefficient: float = 1.0

    @property
    def support(self) -> int:
        return self.x_mask | self.z_mask

    @property
    def weight(self) -> int:
        return _popcount(self.support)

    @property
    def key(self) -> tuple[int, int]:
        return self.x_mask, self.z_mask

    def factor(self, qubit: int) -> str:
        """Single-qubit Pauli ('I', 'X', 'Y' or 'Z') acting on ``qubit``."""
        return _BITS_TO_CHAR[((self.x_mask >> qubit) & 1, (self.z_mask >> qubit) & 1)]

    def label(self, qubit_count: int) -> str:
        return "".join(self.factor(k) for k in range(qubit_count))

    @classmethod
    def from_label(cls, label: str, coefficient: float = 1.0) -> PauliTerm:
        x = z = 0
        for k, char in enumerate(label.upper()):
            try:
                xb, zb = _CHAR_TO_BITS[char]
            except KeyError:
                raise ValueError(f"invalid Pauli character {char!r} in {label!r}") from None
            x |= xb << k
            z |= zb << k
        return cls(x, z, float(coefficient))

    def qubitwise_commutes(self, other: PauliTerm) -> bool:
        """True when on every qubit the factors are equal or one is identity."""
        both = self.support & other.support
        return (self.x_mask & both) == (other.x_mask & both) and (self.z_mask & both) == (
            other.z_mask & both
        )

    def commutes(self, other: PauliTerm) -> bool:
        return (_popcount(self.x_mask & other.z_mask) + _popcount(self.z_mask & other.x_mask)) % 2 == 0


@dataclass(frozen=True)
class PauliSum:
    """Real linear combination of Pauli strings on ``qubit_count`` qubits.

    The identity is held separately in ``identity_coefficient``; ``terms``
    never contains the all-identity string and never repeats a mask pair.
    """

    qubit_count: int
    terms: tuple[PauliTerm, ...] = ()
    identity_coefficient: float = 0.0

    def __post_init__(self) -> None:
        if self.qubit_count < 1:
            raise ValueError("qubit_count must be >= 1")
        seen = set()
        limit = 1 << self.qubit_count
        for term in self.terms:
            if term.key == (0, 0):
                raise ValueError("identity must be stored in identity_coefficient")
            if term.key in seen:
                raise ValueError(f"duplicate term {term.label(self.qubit_count)}")
            if term.x_mask >= limit or term.z_mask >= limit:
                raise ValueError("term acts outside the register")
            seen.add(term.key)

    @classmethod
    def from_coefficients(
        cls, qubit_count: int, coefficients: Mapping[tuple[int, int], complex], tol: float = COEFF_TOL
    ) -> PauliSum:
        """Build a simplified sum from ``{(x_mask, z_mask): coefficient}``.

        Coefficients must be real up to ``tol``; entries below ``tol`` are dropped.
        """
        identity = 0.0
        terms = []
        for (x, z), value in coefficients.items():
            value = complex(value)
            if abs(value.imag) > tol:
                raise ValueError(f"non-real coefficient {value} on term {(x, z)}")
            if abs(value.real) < tol:
                continue
            if (x, z) == (0, 0):
                identity = value.real
            else:
                terms.append(PauliTerm(x, z, value.real))
        return cls(qubit_count, tuple(terms), identity)

    @classmethod
    def from_labels(cls, pairs: Iterable[tuple[str, float]]) -> PauliSum:
        pairs = list(pairs)
        if not pairs:
            raise ValueError("cannot infer qubit count from an empty term list")
        qubit_count = len(pairs[0][0])
        acc: dict[tuple[int, int], complex] = {}
        for label, coeff in pairs:
            if len(label) != qubit_count:
                raise ValueError("all labels must have the same length")
            term = PauliTerm.from_label(label)
            acc[term.key] = acc.get(term.key, 0.0) + coeff
        return cls.from_coefficients(qubit_count, acc)

    def as_dict(self) -> dict[tuple[int, int], float]:
        out = {(0, 0): self.identity_coefficient} if self.identity_coefficient else {}
        out.update({t.key: t.coefficient for t in self.terms})
        return out

    def to_labels(self) -> list[tuple[str, float]]:
        """``(label, coefficient)`` pairs, identity first when present."""
        pairs = []
        if self.identity_coefficient:
            pairs.append(("I" * self.qubit_count, self.identity_coefficient))
        pairs.extend((t.label(self.qubit_count), t.coefficient) for t in self.terms)
        return pairs

    def to_json(self) -> str:
        return json.dumps([[label, coeff] for label, coeff in self.to_labels()])

    @classmethod
    def from_json(cls, text: str) -> PauliSum:
        return cls.from_labels((label, float(coeff)) for label, coeff in json.loads(text))

    def coefficient(self, label: str) -> float:
        """Coefficient of the string ``label``; zero when absent."""
        term = PauliTerm.from_label(label)
        if term.key == (0, 0):
            return self.identity_coefficient
        for t in self.terms:
            if t.key == term.key:
                return t.coefficient
        return 0.0

    @property
    def term_count(self) -> int:
        """Number of Pauli strings including the identity (if nonzero)."""
        return len(self.terms) + (1 if self.identity_coefficient else 0)

    @property
    def max_weight(self) -> int:
        return max((t.weight for t in self.terms), default=0)

    def __add__(self, other: PauliSum) -> PauliSum:
        if other.qubit_count != self.qubit_count:
            raise ValueError("qubit counts differ")
        acc: dict[tuple[int, int], complex] = dict(self.as_dict())
        for key, value in other.as_dict().items():
            acc[key] = acc.get(key, 0.0) + value
        return PauliSum.from_coefficients(self.qubit_count, acc)

    def __mul__(self, scalar: float) -> PauliSum:
        return PauliSum.from_coefficients(
            self.qubit_count, {k: v * scalar for k, v in self.as_dict().items()}
        )

    __rmul__ = __mul__

    def __str__(self) -> str:
        return " ".join(f"{c:+.6f}*{label}" for label, c in self.to_labels())


def projector_expand(pattern: Sequence[str]) -> PauliSum:
    """Expand a tensor product of single-qubit factors into Pauli strings.

    ``pattern[k]`` is one of ``"P0"`` (|0><0|), ``"P1"`` (|1><1|), ``"X"`` or
    ``"I"`` and acts on qubit ``k``.
    """
    if not pattern:
        raise ValueError("pattern must cover at least one qubit")
    acc = {(0, 0): 1.0}
    for k, factor in enumerate(pattern):
        bit = 1 << k
        if factor == "I":
            continue
        if factor == "X":
            acc = {(x | bit, z): c for (x, z), c in acc.items()}
        elif factor in ("P0", "P1"):
            sign = 1.0 if factor == "P0" else -1.0
            nxt: dict[tuple[int, int], float] = {}
            for (x, z), c in acc.items():
                nxt[(x, z)] = nxt.get((x, z), 0.0) + 0.5 * c
                nxt[(x, z | bit)] = nxt.get((x, z | bit), 0.0) + 0.5 * sign * c
            acc = nxt
        else:
            raise ValueError(f"unknown factor {factor!r}")
    return PauliSum.from_coefficients(len(pattern), acc)


# |a><b| for single bits, as {(x, z): coefficient}
_OUTER = {
    (0, 0): {(0, 0): 0.5, (0, 1): 0.5},
    (1, 1): {(0, 0): 0.5, (0, 1): -0.5},
    (0, 1): {(1, 0): 0.5, (1, 1): 0.5j},
    (1, 0): {(1, 0): 0.5, (1, 1): -0.5j},
}


def transition_expand(ket: Sequence[int], bra: Sequence[int]) -> PauliSum:
    """Pauli expansion of ``|ket><bra| + |bra><ket|`` for bitstrings over the same qubits.

    When ``ket == bra`` this is twice the projector onto that basis state.
    """
    if len(ket) != len(bra) or not ket:
        raise ValueError("ket and bra must be non-empty and of equal length")
    acc: dict[tuple[int, int], complex] = {(0, 0): 1.0}
    for k, pair in enumerate(zip(ket, bra)):
        nxt: dict[tuple[int, int], complex] = {}
        for (x, z), c in acc.items():
            for (xb, zb), v in _OUTER[(int(pair[0]), int(pair[1]))].items():
                key = (x | (xb << k), z | (zb << k))
                nxt[key] = nxt.get(key, 0.0) + c * v
        acc = nxt
    # adding the Hermitian conjugate doubles the real part and cancels the imaginary part,
    # since every Pauli string is Hermitian
    return PauliSum.from_coefficients(len(ket), {k: 2.0 * v.real for k, v in acc.items()})


def _reverse_bits(mask: int, qubit_count: int) -> int:
    out = 0
    for k in range(qubit_count):
        if (mask >> k) & 1:
            out |= 1 << (qubit_count - 1 - k)
    return out


def _term_action(x_mask: int, z_mask: int, qubit_count: int) -> tuple[np.ndarray, np.ndarray]:
    """For a Pauli string P return ``(rows, phases)`` with ``P[rows[c], c] = phases[c]``."""
    x = _reverse_bits(x_mask, qubit_count)
    z = _reverse_bits(z_mask, qubit_count)
    cols = np.arange(1 << qubit_count)
    parity = np.zeros(cols.shape, dtype=np.int64)
    bits = cols & z
    while np.any(bits):
        parity ^= bits & 1
        bits = bits >> 1
    phase = (1j) ** _popcount(x_mask & z_mask) * (1 - 2 * parity)
    return cols ^ x, phase.astype(complex)


def term_matrix(term: PauliTerm, qubit_count: int) -> np.ndarray:
    """Dense matrix of a single Pauli string (coefficient excluded)."""
    dim = 1 << qubit_count
    rows, phase = _term_action(term.x_mask, term.z_mask, qubit_count)
    mat = np.zeros((dim, dim), dtype=complex)
    mat[rows, np.arange(dim)] = phase
    return mat


def to_matrix(pauli_sum: PauliSum, max_qubits: int = MAX_DENSE_QUBITS) -> np.ndarray:
    """Dense Hermitian matrix ``sum_i q_i Q_i`` (big-endian, qubit 0 most significant)."""
    q = pauli_sum.qubit_count
    if q > max_qubits:
        raise ValueError(f"{q} qubits exceeds the dense cap of {max_qubits}")
    dim = 1 << q
    mat = pauli_sum.identity_coefficient * np.eye(dim, dtype=complex)
    cols = np.arange(dim)
    for term in pauli_sum.terms:
        rows, phase = _term_action(term.x_mask, term.z_mask, q)
        mat[rows, cols] += term.coefficient * phase
    return mat


@dataclass(frozen=True)
class CommutingGroup:
    """Qubit-wise commuting terms sharing one measurement basis.

    ``measurement_basis[k]`` is ``"X"``, ``"Y"`` or ``"Z"``; qubits on which
    every term acts trivially are tagged ``"Z"``.
    """

    terms: tuple[PauliTerm, ...]
    measurement_basis: tuple[str, ...]

    def __post_init__(self) -> None:
        for a in self.terms:
            for b in self.terms:
                if not a.qubitwise_commutes(b):
                    raise ValueError("terms in a group must commute qubit-wise")
        for t in self.terms:
            for k, basis in enumerate(self.measurement_basis):
                f = t.factor(k)
                if f != "I" and f != basis:
                    raise ValueError(f"term factor {f} on qubit {k} disagrees with basis {basis}")

    @property
    def rotated_qubits(self) -> tuple[int, ...]:
        return tuple(k for k, b in enumerate(self.measurement_basis) if b != "Z")


def _basis_of(terms: Sequence[PauliTerm], qubit_count: int) -> tuple[str, ...]:
    basis = ["Z"] * qubit_count
    for t in terms:
        for k in range(qubit_count):
            f = t.factor(k)
            if f != "I":
                basis[k] = f
    return tuple(basis)


def partition_commuting(pauli_sum: PauliSum) -> list[CommutingGroup]:
    """Greedy first-fit grouping into qubit-wise commuting sets.

    Terms are visited by descending weight; among equal weights, terms with
    fewer off-diagonal factors go first so diagonal strings seed the Z group.
    The identity is not placed in any group.
    """
    order = sorted(
        range(len(pauli_sum.terms)),
        key=lambda i: (-pauli_sum.terms[i].weight, _popcount(pauli_sum.terms[i].x_mask), i),
    )
    buckets: list[list[PauliTerm]] = []
    for i in order:
        term = pauli_sum.terms[i]
        for bucket in buckets:
            if all(term.qubitwise_commutes(other) for other in bucket):
                bucket.append(term)
                break
        else:
            buckets.append([term])
    q = pauli_sum.qubit_count
    return [CommutingGroup(tuple(b), _basis_of(b, q)) for b in buckets]


def measurement_rotation_count(groups: Iterable[CommutingGroup]) -> int:
    """Single-qubit basis-change gates needed to measure every group.

    An X-tagged qubit needs one H; a Y-tagged qubit needs S† followed by H,
    counted as two.
    """
    cost = {"Z": 0, "X": 1, "Y": 2}
    return sum(cost[b] for g in groups for b in g.measurement_basis)


def _as_density(state, dim: int) -> np.ndarray:
    data = state.as_density() if hasattr(state, "as_density") else np.asarray(state, dtype=complex)
    if data.ndim == 1:
        data = np.outer(data, data.conj())
    if data.shape != (dim, dim):
        raise ValueError(f"state dimension {data.shape[0]} does not match operator dimension {dim}")
    return data


def pauli_covariance_spectrum(pauli_sum: PauliSum, state, weighted: bool = False) -> list[float]:
    """Eigenvalues (descending) of the covariance matrix of the non-identity terms.

    ``C_ij = Re<(Q_i Q_j + Q_j Q_i)/2> - <Q_i><Q_j>``. With ``weighted`` the
    operators are scaled by their coefficients, so the trace becomes the
    energy variance contributed by independent term estimates.
    """
    q = pauli_sum.qubit_count
    rho = _as_density(state, 1 << q)
    terms = pauli_sum.terms
    n = len(terms)
    if n == 0:
        return []
    mats = [term_matrix(t, q) for t in terms]
    means = np.array([np.real(np.trace(rho @ m)) for m in mats])
    cov = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            sym = 0.5 * (mats[i] @ mats[j] + mats[j] @ mats[i])
            cov[i, j] = cov[j, i] = np.real(np.trace(rho @ sym)) - means[i] * means[j]
    if weighted:
        w = np.array([t.coefficient for t in terms])
        cov = cov * np.outer(w, w)
    vals = np.linalg.eigvalsh(cov)[::-1]
    return [float(v) for v in vals]
