"""Dense statevector / density-matrix simulation, noise, sampling,
grouped expectation estimation, tomography and trace distance.

Basis index convention: qubit 0 is the most significant bit, so the
bitstring ``"b0 b1 ... b_{q-1}"`` printed qubit-0-leftmost reads as the
binary index.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

import networkx as nx
import numpy as np

from .circuit import Circuit, Gate, append_measurement_rotations
from .pauli import PauliSum, _term_action, partition_commuting, CommutingGroup

__all__ = [
    "EnergyEstimate",
    "MeasurementPlan",
    "NoiseModel",
    "QuantumState",
    "ShotCounts",
    "circuit_unitary",
    "default_noise_path",
    "estimate_energy",
    "expectation_exact",
    "expectation_sampled",
    "find_layout",
    "interaction_pairs",
    "load_default_noise",
    "make_rng",
    "make_runner",
    "run_density",
    "run_statevector",
    "sample_counts",
    "tomography",
    "trace_distance",
]

RngLike = Union[np.random.Generator, int, Sequence[int], None]

_SQ2 = 1.0 / math.sqrt(2.0)
_FIXED = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "Sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex).reshape(2, 2, 2, 2),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex).reshape(2, 2, 2, 2),
}


def make_rng(seed: RngLike) -> np.random.Generator:
    """PCG64 generator; sequences of ints are hashed through ``SeedSequence``."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        return np.random.default_rng()
    if isinstance(seed, (int, np.integer)):
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(s) for s in seed])))


def gate_matrix(gate: Gate) -> np.ndarray:
    """``2x2`` matrix, or ``(2,2,2,2)`` tensor indexed ``[out0, out1, in0, in1]``."""
    if gate.name == "RY":
        c, s = math.cos(gate.angle / 2), math.sin(gate.angle / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if gate.name == "RZ":
        ph = np.exp(-0.5j * gate.angle)
        return np.array([[ph, 0], [0, ph.conjugate()]], dtype=complex)
    return _FIXED[gate.name]


@dataclass
class QuantumState:
    """Statevector (1-D) or density matrix (2-D) over ``2^q`` basis states."""

    data: np.ndarray

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=complex)
        dim = self.data.shape[0]
        if dim < 2 or dim & (dim - 1):
            raise ValueError("dimension must be a power of two >= 2")
        if self.data.ndim == 2 and self.data.shape != (dim, dim):
            raise ValueError("density matrix must be square")
        if self.data.ndim not in (1, 2):
            raise ValueError("state must be a vector or a matrix")

    @classmethod
    def zero(cls, qubit_count: int, density: bool = False) -> QuantumState:
        vec = np.zeros(1 << qubit_count, dtype=complex)
        vec[0] = 1.0
        return cls(np.outer(vec, vec) if density else vec)

    @classmethod
    def maximally_mixed(cls, qubit_count: int) -> QuantumState:
        dim = 1 << qubit_count
        return cls(np.eye(dim, dtype=complex) / dim)

    @property
    def is_density(self) -> bool:
        return self.data.ndim == 2

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def qubit_count(self) -> int:
        return self.dim.bit_length() - 1

    def as_density(self) -> np.ndarray:
        if self.is_density:
            return self.data
        return np.outer(self.data, self.data.conj())

    def probabilities(self) -> np.ndarray:
        p = np.real(np.diag(self.data)) if self.is_density else np.abs(self.data) ** 2
        p = np.clip(p, 0.0, None)
        return p / p.sum()

    def check(self, tol: float = 1e-9) -> None:
        """Raise if the state violates normalization, hermiticity or positivity."""
        if not self.is_density:
            norm = np.linalg.norm(self.data)
            if abs(norm - 1) > tol:
                raise ValueError(f"statevector norm {norm}")
            return
        rho = self.data
        if np.max(np.abs(rho - rho.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > tol:
            raise ValueError(f"trace {np.trace(rho).real}")
        if np.linalg.eigvalsh(rho).min() < -tol:
            raise ValueError("density matrix is not positive semidefinite")


# -- gate application on tensors with optional trailing batch axes ------------------


def _apply_1q(tensor: np.ndarray, u: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(u, tensor, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def _apply_2q(tensor: np.ndarray, u: np.ndarray, a: int, b: int) -> np.ndarray:
    out = np.tensordot(u, tensor, axes=([2, 3], [a, b]))
    return np.moveaxis(out, [0, 1], [a, b])


def _apply_gate(tensor: np.ndarray, gate: Gate, offset: int = 0, conj: bool = False) -> np.ndarray:
    u = gate_matrix(gate)
    if conj:
        u = u.conj()
    if len(gate.qubits) == 1:
        return _apply_1q(tensor, u, gate.qubits[0] + offset)
    return _apply_2q(tensor, u, gate.qubits[0] + offset, gate.qubits[1] + offset)


#: Registers up to this size use dense embedded gate matrices.
DENSE_GATE_QUBITS = 6

_ROTATION_GENERATOR = {
    "RY": np.array([[0, -1], [1, 0]], dtype=complex),  # -i Y
    "RZ": np.array([[-1j, 0], [0, 1j]], dtype=complex),  # -i Z
}


@functools.lru_cache(maxsize=4096)
def _embedded(name: str, qubits: tuple[int, ...], q: int) -> np.ndarray:
    """Full-register matrix of a fixed gate, or of ``-i P`` for a rotation about ``P``."""
    local = _ROTATION_GENERATOR.get(name)
    if local is None:
        local = _FIXED[name]
    if len(qubits) == 1:
        k = qubits[0]
        return np.kron(np.kron(np.eye(1 << k), local), np.eye(1 << (q - k - 1)))
    dim = 1 << q
    u = np.eye(dim, dtype=complex).reshape((2,) * q + (dim,))
    u = _apply_2q(u, local, *qubits)
    return u.reshape(dim, dim)


def _dense_gate(gate: Gate, q: int) -> np.ndarray:
    mat = _embedded(gate.name, gate.qubits, q)
    if gate.angle is None:
        return mat
    half = gate.angle / 2
    return math.cos(half) * np.eye(1 << q) + math.sin(half) * mat


def _mix_dense(rho: np.ndarray, qubits: Sequence[int], q: int) -> np.ndarray:
    """``Tr_S(rho) ⊗ I_S / 2^|S|`` on a ``2^q x 2^q`` matrix via diagonal slices."""
    t = rho.reshape((2,) * (2 * q))
    full = slice(None)
    picks = []
    for bits in itertools.product((0, 1), repeat=len(qubits)):
        index = [full] * (2 * q)
        for k, bit in zip(qubits, bits):
            index[k] = index[k + q] = bit
        picks.append(tuple(index))
    reduced = sum(t[ix] for ix in picks) / len(picks)
    out = np.zeros_like(t)
    for ix in picks:
        out[ix] = reduced
    return out.reshape(rho.shape)


def run_statevector(circuit: Circuit, initial: Optional[QuantumState] = None) -> QuantumState:
    """Apply ``circuit`` gate by gate to ``initial`` (default ``|0...0>``)."""
    q = circuit.qubit_count
    if initial is None:
        initial = QuantumState.zero(q)
    if initial.is_density:
        raise ValueError("run_statevector needs a statevector; use run_density")
    if initial.dim != 1 << q:
        raise ValueError(f"state has dimension {initial.dim}, circuit acts on {q} qubits")
    if q <= DENSE_GATE_QUBITS:
        psi = initial.data
        for g in circuit.gates:
            psi = _dense_gate(g, q) @ psi
        return QuantumState(psi)
    psi = initial.data.reshape((2,) * q)
    for g in circuit.gates:
        psi = _apply_gate(psi, g)
    return QuantumState(psi.reshape(-1))


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    q = circuit.qubit_count
    dim = 1 << q
    if q <= DENSE_GATE_QUBITS:
        u = np.eye(dim, dtype=complex)
        for g in circuit.gates:
            u = _dense_gate(g, q) @ u
        return u
    u = np.eye(dim, dtype=complex).reshape((2,) * q + (dim,))
    for g in circuit.gates:
        u = _apply_gate(u, g)
    return u.reshape(dim, dim)


# -- noise -----------------------------------------------------------------------------


def _flip_matrix(p01: float, p10: float) -> np.ndarray:
    """Row-stochastic confusion ``M[true, measured]``."""
    return np.array([[1 - p01, p01], [p10, 1 - p10]])


@dataclass
class NoiseModel:
    """Depolarizing gate errors and readout confusion on a register.

    A gate on qubits ``S`` is followed by ``rho -> (1 - p) rho + p Tr_S(rho) ⊗ I_S / 2^|S|``
    with ``p`` from ``single_qubit`` or ``two_qubit``. ``readout[k]`` is a
    row-stochastic ``2x2`` matrix ``P(measured | true)``. When ``coupling``
    is set, two-qubit gates on other pairs are rejected.
    """

    single_qubit: dict[int, float] = field(default_factory=dict)
    two_qubit: dict[tuple[int, int], float] = field(default_factory=dict)
    readout: dict[int, np.ndarray] = field(default_factory=dict)
    coupling: Optional[frozenset[tuple[int, int]]] = None
    default_single_qubit: float = 0.0
    default_two_qubit: float = 0.0
    name: str = ""

    def __post_init__(self) -> None:
        self.two_qubit = {tuple(sorted(k)): float(v) for k, v in self.two_qubit.items()}
        if self.coupling is not None:
            self.coupling = frozenset(tuple(sorted(e)) for e in self.coupling)
        for p in [*self.single_qubit.values(), *self.two_qubit.values(), self.default_single_qubit, self.default_two_qubit]:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"error probability {p} outside [0, 1]")
        for k, m in list(self.readout.items()):
            m = np.asarray(m, dtype=float)
            if m.shape != (2, 2) or np.any(m < 0) or not np.allclose(m.sum(axis=1), 1.0):
                raise ValueError(f"readout matrix for qubit {k} must be 2x2 row-stochastic")
            self.readout[k] = m

    @classmethod
    def uniform(
        cls,
        qubit_count: int,
        single_qubit: float = 0.0,
        two_qubit: float = 0.0,
        readout: float = 0.0,
        coupling: Optional[Iterable[tuple[int, int]]] = None,
    ) -> NoiseModel:
        return cls(
            single_qubit={k: single_qubit for k in range(qubit_count)},
            readout={k: _flip_matrix(readout, readout) for k in range(qubit_count)},
            coupling=None if coupling is None else frozenset(coupling),
            default_two_qubit=two_qubit,
            default_single_qubit=single_qubit,
        )

    @classmethod
    def from_dict(cls, cfg: Mapping) -> NoiseModel:
        """Parse ``{"nodes": [{"id", "single_qubit_error", "readout_error"}], "edges": [{"qubits", "two_qubit_error"}]}``.

        ``readout_error`` is either a symmetric flip probability or a pair
        ``[P(1|0), P(0|1)]``.
        """
        known = {"name", "description", "nodes", "edges", "enforce_coupling"}
        unknown = set(cfg) - known
        if unknown:
            raise ValueError(f"unknown noise-config keys: {sorted(unknown)}")
        if not cfg.get("nodes"):
            raise ValueError("noise config needs a non-empty 'nodes' list")
        single, readout = {}, {}
        for node in cfg.get("nodes", []):
            k = int(node["id"])
            single[k] = float(node.get("single_qubit_error", 0.0))
            ro = node.get("readout_error", 0.0)
            p01, p10 = (ro, ro) if isinstance(ro, (int, float)) else ro
            readout[k] = _flip_matrix(float(p01), float(p10))
        two, edges = {}, []
        for edge in cfg.get("edges", []):
            a, b = (int(x) for x in edge["qubits"])
            two[(a, b)] = float(edge.get("two_qubit_error", 0.0))
            edges.append((a, b))
        coupling = frozenset(edges) if cfg.get("enforce_coupling", True) and edges else None
        return cls(single, two, readout, coupling, name=str(cfg.get("name", "")))

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> NoiseModel:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def remap(self, layout: Sequence[int]) -> NoiseModel:
        """Noise seen by logical qubit ``l`` placed on physical qubit ``layout[l]``."""
        missing = [p for p in layout if p not in self.single_qubit]
        if missing:
            raise ValueError(f"layout uses qubits {missing} absent from the noise config")
        index = {p: l for l, p in enumerate(layout)}
        two = {
            (index[a], index[b]): p for (a, b), p in self.two_qubit.items() if a in index and b in index
        }
        coupling = None
        if self.coupling is not None:
            coupling = frozenset((index[a], index[b]) for a, b in self.coupling if a in index and b in index)
        return NoiseModel(
            single_qubit={l: self.single_qubit.get(p, self.default_single_qubit) for l, p in enumerate(layout)},
            two_qubit=two,
            readout={l: self.readout[p] for l, p in enumerate(layout) if p in self.readout},
            coupling=coupling,
            default_single_qubit=self.default_single_qubit,
            default_two_qubit=self.default_two_qubit,
            name=self.name,
        )

    def scaled(self, gate_factor: float = 1.0, readout_factor: float = 1.0) -> NoiseModel:
        """Copy with gate error probabilities and readout flips multiplied."""
        def scale_ro(m: np.ndarray) -> np.ndarray:
            return _flip_matrix(min(1.0, m[0, 1] * readout_factor), min(1.0, m[1, 0] * readout_factor))

        return NoiseModel(
            single_qubit={k: min(1.0, v * gate_factor) for k, v in self.single_qubit.items()},
            two_qubit={k: min(1.0, v * gate_factor) for k, v in self.two_qubit.items()},
            readout={k: scale_ro(m) for k, m in self.readout.items()},
            coupling=self.coupling,
            default_single_qubit=min(1.0, self.default_single_qubit * gate_factor),
            default_two_qubit=min(1.0, self.default_two_qubit * gate_factor),
            name=self.name,
        )

    def gate_error(self, gate: Gate) -> float:
        if len(gate.qubits) == 1:
            return self.single_qubit.get(gate.qubits[0], self.default_single_qubit)
        pair = tuple(sorted(gate.qubits))
        if self.coupling is not None and pair not in self.coupling:
            raise ValueError(f"two-qubit gate on uncoupled qubits {gate.qubits}")
        return self.two_qubit.get(pair, self.default_two_qubit)

    def confusion(self, qubit: int) -> np.ndarray:
        return self.readout.get(qubit, np.eye(2))

    def readout_matrix(self, qubit_count: int) -> np.ndarray:
        """``C[measured, true]`` over the whole register, qubit 0 most significant."""
        cache = self.__dict__.setdefault("_readout_cache", {})
        if qubit_count not in cache:
            mat = np.ones((1, 1))
            for k in range(qubit_count):
                mat = np.kron(mat, self.confusion(k).T)
            cache[qubit_count] = mat
        return cache[qubit_count]

    def has_readout_error(self) -> bool:
        return any(not np.allclose(m, np.eye(2)) for m in self.readout.values())


def default_noise_path() -> Path:
    """Path of the shipped illustrative noise configuration."""
    return Path(str(resources.files("graycodec") / "data" / "illustrative_noise.json"))


def load_default_noise() -> NoiseModel:
    return NoiseModel.from_file(default_noise_path())


def interaction_pairs(circuits: Iterable[Circuit]) -> set[tuple[int, int]]:
    return {tuple(sorted(g.qubits)) for c in circuits for g in c.gates if len(g.qubits) == 2}


def find_layout(noise: NoiseModel, qubit_count: int, pairs: Iterable[tuple[int, int]]) -> tuple[int, ...]:
    """Physical qubit for each logical qubit so every interacting pair is coupled.

    Among valid placements the one with the lowest summed gate and readout
    error wins; ties go to the lexicographically smallest layout. Without a
    coupling graph the identity layout is returned.
    """
    if noise.coupling is None:
        return tuple(range(qubit_count))
    phys = nx.Graph()
    phys.add_nodes_from(sorted(set(noise.single_qubit) | set(noise.readout) | {k for e in noise.coupling for k in e}))
    phys.add_edges_from(sorted(noise.coupling))
    logical = nx.Graph()
    logical.add_nodes_from(range(qubit_count))
    logical.add_edges_from(sorted(pairs))

    def cost(layout: tuple[int, ...]) -> float:
        total = sum(noise.single_qubit.get(p, noise.default_single_qubit) for p in layout)
        total += sum(1.0 - noise.confusion(p).trace() / 2.0 for p in layout)
        total += sum(noise.two_qubit.get(tuple(sorted((layout[a], layout[b]))), noise.default_two_qubit) for a, b in logical.edges)
        return total

    matcher = nx.algorithms.isomorphism.GraphMatcher(phys, logical)
    candidates = []
    for mapping in matcher.subgraph_monomorphisms_iter():
        inverse = {l: p for p, l in mapping.items()}
        candidates.append(tuple(inverse[l] for l in range(qubit_count)))
    if not candidates:
        raise ValueError(f"no placement of {qubit_count} logical qubits respects the coupling graph")
    return min(candidates, key=lambda lay: (round(cost(lay), 12), lay))


def _mix(rho: np.ndarray, qubits: Sequence[int], q: int) -> np.ndarray:
    """``Tr_S(rho) ⊗ I_S / 2^|S|`` for a density tensor of shape ``(2,)*2q``."""
    d = 1 << len(qubits)
    others = [k for k in range(q) if k not in qubits]
    perm = [*others, *[k + q for k in others], *qubits, *[k + q for k in qubits]]
    t = np.transpose(rho, perm)
    n_other = len(others)
    t = t.reshape((2,) * (2 * n_other) + (d, d))
    reduced = np.trace(t, axis1=-2, axis2=-1)
    mixed = np.multiply.outer(reduced, np.eye(d) / d).reshape((2,) * (2 * n_other) + (2,) * (2 * len(qubits)))
    # mixed axes are (others_row, others_col, S_row..., S_col...) in S order; undo perm
    return np.transpose(mixed, np.argsort(perm))


def _noisy_step(rho: np.ndarray, gate: Gate, p: float, q: int) -> np.ndarray:
    rho = _apply_gate(rho, gate)
    rho = _apply_gate(rho, gate, offset=q, conj=True)
    if p > 0.0:
        rho = (1.0 - p) * rho + p * _mix(rho, gate.qubits, q)
    return rho


def run_density(
    circuit: Circuit,
    noise: Optional[NoiseModel] = None,
    initial: Optional[QuantumState] = None,
    check: bool = False,
) -> QuantumState:
    """Evolve a density matrix, depolarizing each gate's support after the gate.

    Readout error is not applied here; see :func:`sample_counts`. With
    ``check`` the state is validated after every gate.
    """
    q = circuit.qubit_count
    if initial is None:
        initial = QuantumState.zero(q, density=True)
    if initial.dim != 1 << q:
        raise ValueError(f"state has dimension {initial.dim}, circuit acts on {q} qubits")
    dim = 1 << q
    if q <= DENSE_GATE_QUBITS:
        rho = initial.as_density()
        for g in circuit.gates:
            u = _dense_gate(g, q)
            rho = u @ rho @ u.conj().T
            p = noise.gate_error(g) if noise is not None else 0.0
            if p > 0.0:
                rho = (1.0 - p) * rho + p * _mix_dense(rho, g.qubits, q)
            if check:
                QuantumState(rho).check()
        return QuantumState(rho)
    rho = initial.as_density().reshape((2,) * (2 * q))
    for g in circuit.gates:
        p = noise.gate_error(g) if noise is not None else 0.0
        rho = _noisy_step(rho, g, p, q)
        if check:
            QuantumState(rho.reshape(dim, dim)).check()
    return QuantumState(rho.reshape(dim, dim))


def _simulate(circuit: Circuit, noise: Optional[NoiseModel], initial: Optional[QuantumState] = None) -> QuantumState:
    if noise is None and (initial is None or not initial.is_density):
        return run_statevector(circuit, initial)
    return run_density(circuit, noise, initial)


# -- sampling -------------------------------------------------------------------------


@dataclass(frozen=True)
class ShotCounts:
    """Outcome histogram keyed by qubit-0-leftmost bitstrings."""

    counts: dict[str, int]
    shots: int

    def __post_init__(self) -> None:
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to shots")

    @property
    def qubit_count(self) -> int:
        return len(next(iter(self.counts)))

    def frequencies(self) -> np.ndarray:
        q = self.qubit_count
        vec = np.zeros(1 << q)
        for bits, n in self.counts.items():
            vec[int(bits, 2)] = n
        return vec / self.shots

    def to_json(self) -> str:
        return json.dumps({"shots": self.shots, "counts": dict(sorted(self.counts.items()))}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> ShotCounts:
        data = json.loads(text)
        return cls({k: int(v) for k, v in data["counts"].items()}, int(data["shots"]))


def apply_readout(probs: np.ndarray, noise: Optional[NoiseModel]) -> np.ndarray:
    """Push ideal outcome probabilities through each qubit's confusion matrix."""
    if noise is None:
        return probs
    q = probs.size.bit_length() - 1
    if q <= DENSE_GATE_QUBITS:
        return noise.readout_matrix(q) @ probs
    t = probs.reshape((2,) * q)
    for k in range(q):
        m = noise.confusion(k)
        if not np.allclose(m, np.eye(2)):
            t = _apply_1q(t, m.T, k)
    return t.reshape(-1)


def counts_from_probabilities(probs: np.ndarray, shots: int, rng: RngLike) -> ShotCounts:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    q = probs.size.bit_length() - 1
    p = np.clip(probs, 0.0, None)
    draws = make_rng(rng).multinomial(shots, p / p.sum())
    return ShotCounts({format(i, f"0{q}b"): int(n) for i, n in enumerate(draws) if n}, shots)


def sample_counts(state: QuantumState, shots: int, noise: Optional[NoiseModel] = None, rng: RngLike = None) -> ShotCounts:
    """Multinomial draw from Born probabilities, after readout confusion when ``noise`` is given."""
    return counts_from_probabilities(apply_readout(state.probabilities(), noise), shots, rng)


# -- expectation values --------------------------------------------------------------------


def expectation_exact(h: PauliSum, state: QuantumState) -> float:
    q = h.qubit_count
    if state.dim != 1 << q:
        raise ValueError(f"state dimension {state.dim} does not match {q}-qubit operator")
    total = h.identity_coefficient
    data = state.data
    cols = np.arange(state.dim)
    for t in h.terms:
        rows, phase = _term_action(t.x_mask, t.z_mask, q)
        if state.is_density:
            # Tr(rho P) = sum_c P[rows[c], c] * rho[c, rows[c]]
            val = np.sum(phase * data[cols, rows])
        else:
            val = np.vdot(data[rows], phase * data)
        total += t.coefficient * float(np.real(val))
    return float(total)


def _parity_signs(mask_be: int, dim: int) -> np.ndarray:
    """(-1)^{popcount(index & mask)} over all basis indices."""
    idx = np.arange(dim) & mask_be
    parity = np.zeros(dim, dtype=np.int64)
    while np.any(idx):
        parity ^= idx & 1
        idx = idx >> 1
    return 1.0 - 2.0 * parity


def _support_be(term, q: int) -> int:
    s = term.support
    return sum(1 << (q - 1 - k) for k in range(q) if (s >> k) & 1)


def group_observable(group: CommutingGroup, q: int) -> np.ndarray:
    """Value of ``sum_j c_j Q_j`` on each outcome after the group's basis rotation."""
    dim = 1 << q
    out = np.zeros(dim)
    for t in group.terms:
        out += t.coefficient * _parity_signs(_support_be(t, q), dim)
    return out


@dataclass(frozen=True)
class EnergyEstimate:
    value: float
    variance: float
    shots_used: int
    group_values: tuple[float, ...]


@dataclass
class MeasurementPlan:
    """Precompiled basis-change stage for each commuting group.

    Noiseless plans hold each group's rotation unitary; noisy plans hold the
    linear map from a vectorized density matrix to the outcome
    probabilities after the noisy rotation gates (readout excluded).
    """

    groups: tuple[CommutingGroup, ...]
    observables: tuple[np.ndarray, ...]
    maps: tuple[Optional[np.ndarray], ...]
    noise: Optional[NoiseModel]

    @classmethod
    def compile(
        cls, h: PauliSum, noise: Optional[NoiseModel] = None, groups: Optional[Sequence[CommutingGroup]] = None
    ) -> MeasurementPlan:
        q = h.qubit_count
        dim = 1 << q
        groups = tuple(partition_commuting(h) if groups is None else groups)
        maps = []
        for g in groups:
            rot = append_measurement_rotations(Circuit(q), g)
            if not rot.gates:
                maps.append(None)
            elif noise is None:
                maps.append(circuit_unitary(rot))
            else:
                cols = np.empty((dim, dim * dim), dtype=complex)
                for j in range(dim * dim):
                    basis = np.zeros(dim * dim, dtype=complex)
                    basis[j] = 1.0
                    out = run_density(rot, noise, _RawDensity(basis.reshape(dim, dim)))
                    cols[:, j] = np.diag(out.data)
                maps.append(cols)
        return cls(groups, tuple(group_observable(g, q) for g in groups), tuple(maps), noise)

    def probabilities(self, state: QuantumState) -> list[np.ndarray]:
        """Ideal outcome probabilities per group (before readout error)."""
        out = []
        for m in self.maps:
            if m is None:
                p = state.probabilities()
            elif self.noise is None:
                if state.is_density:
                    p = np.real(np.einsum("ij,jk,ik->i", m, state.data, m.conj()))
                else:
                    p = np.abs(m @ state.data) ** 2
            else:
                p = np.real(m @ state.as_density().ravel())
            p = np.clip(p, 0.0, None)
            out.append(p / p.sum())
        return out


class _RawDensity(QuantumState):
    """Unnormalized operator pushed through a channel; skips state checks."""

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=complex)


def estimate_energy(
    h: PauliSum,
    prep: Circuit,
    shots_per_group: Optional[int],
    noise: Optional[NoiseModel] = None,
    mitigator: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    rng: RngLike = None,
    groups: Optional[Sequence[CommutingGroup]] = None,
    prepared: Optional[QuantumState] = None,
    plan: Optional[MeasurementPlan] = None,
) -> EnergyEstimate:
    """Energy estimated from one measurement circuit per commuting group.

    Each group's outcomes are drawn with ``shots_per_group`` shots, passed
    through ``mitigator`` (frequency vector to corrected probabilities) when
    given, and turned into ``sum_j c_j <Q_j>``. ``variance`` is the
    estimator variance from the per-group sample variances.
    ``shots_per_group=None`` uses exact outcome probabilities, readout error
    included, with zero variance. ``prepared`` and ``plan`` let callers
    reuse a simulated state and a compiled measurement stage.
    """
    if plan is None:
        plan = MeasurementPlan.compile(h, noise, groups)
    if not plan.groups:
        return EnergyEstimate(h.identity_coefficient, 0.0, 0, ())
    gen = make_rng(rng)
    state = prepared if prepared is not None else _simulate(prep, noise)
    values, variance = [], 0.0
    for probs, obs in zip(plan.probabilities(state), plan.observables):
        freq = apply_readout(probs, noise)
        if shots_per_group is not None:
            freq = counts_from_probabilities(freq, shots_per_group, gen).frequencies()
        if mitigator is not None:
            freq = mitigator(freq)
        mean = float(freq @ obs)
        values.append(mean)
        if shots_per_group is not None:
            variance += max(float(freq @ obs**2) - mean**2, 0.0) / shots_per_group
    used = 0 if shots_per_group is None else shots_per_group * len(plan.groups)
    return EnergyEstimate(h.identity_coefficient + sum(values), variance, used, tuple(values))


def expectation_sampled(
    h: PauliSum,
    prep: Circuit,
    shots_per_group: Optional[int],
    noise: Optional[NoiseModel] = None,
    mitigator: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    rng: RngLike = None,
) -> float:
    return estimate_energy(h, prep, shots_per_group, noise, mitigator, rng).value


# -- tomography ----------------------------------------------------------------------------

_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _setting_circuit(setting: str) -> Circuit:
    gates = []
    for k, b in enumerate(setting):
        if b == "X":
            gates.append(Gate("H", (k,)))
        elif b == "Y":
            gates += [Gate("Sdg", (k,)), Gate("H", (k,))]
    return Circuit(len(setting), tuple(gates))


def make_runner(
    prep: Circuit, noise: Optional[NoiseModel] = None, rng: RngLike = None
) -> Callable[[Circuit, int], ShotCounts]:
    """Runner for :func:`tomography`: simulates ``prep`` once, then each rotation."""
    gen = make_rng(rng)
    state = _simulate(prep, noise)

    def run(rotation: Circuit, shots: int) -> ShotCounts:
        final = _simulate(rotation, noise, state) if rotation.gates else state
        return counts_from_probabilities(apply_readout(final.probabilities(), noise), shots, gen)

    return run


def tomography(
    runner: Callable[[Circuit, int], ShotCounts],
    qubit_count: int,
    shots: int,
    mitigator: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> QuantumState:
    """Linear-inversion state tomography over the ``3^q`` Pauli measurement settings.

    Every non-identity Pauli expectation is averaged over all settings that
    agree with it on its support. The estimate is made physical by clipping
    negative eigenvalues and renormalizing the trace.
    """
    q = qubit_count
    if not 1 <= q <= 4:
        raise ValueError("tomography supports 1 to 4 qubits")
    dim = 1 << q
    settings = ["".join(s) for s in itertools.product("XYZ", repeat=q)]
    freqs = {}
    for s in settings:
        counts = runner(_setting_circuit(s), shots)
        freqs[s] = mitigator(counts.frequencies()) if mitigator is not None else counts.frequencies()
    rho = np.eye(dim, dtype=complex) / dim
    for label in itertools.product("IXYZ", repeat=q):
        if all(c == "I" for c in label):
            continue
        support = sum(1 << (q - 1 - k) for k, c in enumerate(label) if c != "I")
        signs = _parity_signs(support, dim)
        matching = [s for s in settings if all(c == "I" or c == b for c, b in zip(label, s))]
        value = float(np.mean([freqs[s] @ signs for s in matching]))
        op = _PAULI_1Q[label[0]]
        for c in label[1:]:
            op = np.kron(op, _PAULI_1Q[c])
        rho += value * op / dim
    vals, vecs = np.linalg.eigh(rho)
    vals = np.clip(vals, 0.0, None)
    vals /= vals.sum()
    return QuantumState((vecs * vals) @ vecs.conj().T)


def trace_distance(rho: QuantumState | np.ndarray, sigma: QuantumState | np.ndarray) -> float:
    """``1/2 Tr|rho - sigma|``."""
    a = rho.as_density() if isinstance(rho, QuantumState) else np.asarray(rho)
    b = sigma.as_density() if isinstance(sigma, QuantumState) else np.asarray(sigma)
    if a.ndim == 1:
        a = np.outer(a, a.conj())
    if b.ndim == 1:
        b = np.outer(b, b.conj())
    if a.shape != b.shape:
        raise ValueError("states have different dimensions")
    diff = a - b
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))
