"""Trotterized time evolution, the exact-evolution oracle, uniform initial
states and the Trotter-sweep experiment.

Units: hbar = 1 with energies in MeV, so times are in 1/MeV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .circuit import Circuit, Gate, ResourceReport, count_resources, onehot_ansatz
from .encoder import TridiagonalHamiltonian, deuteron_hamiltonian, encode, qubits_for
from .pauli import MAX_DENSE_QUBITS, PauliSum, PauliTerm, partition_commuting, to_matrix
from .sim import (
    NoiseModel,
    QuantumState,
    RngLike,
    _simulate,
    apply_readout,
    make_rng,
    make_runner,
    tomography,
    trace_distance,
)

__all__ = [
    "STEP_GRID",
    "SweepRecord",
    "TrotterPlan",
    "exact_evolution",
    "exact_unitary",
    "group_major_order",
    "paired_group_order",
    "pauli_exponential",
    "prepare_uniform",
    "trotter_circuit",
    "trotter_resources",
    "trotter_sweep",
]

#: Trotter numbers used for sweeps between 1 and 100.
STEP_GRID = (1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 30, 50, 75, 100)


@dataclass(frozen=True)
class TrotterPlan:
    """``U(t) ~ (prod_j exp(-i q_j Q_j t / T))^T`` with the product taken in ``order``.

    ``order`` lists indices into ``hamiltonian.terms``; defaults to
    :func:`paired_group_order`.
    """

    hamiltonian: PauliSum
    time: float
    steps: int
    order: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ValueError("Trotter number must be >= 1")
        if not self.order:
            object.__setattr__(self, "order", paired_group_order(self.hamiltonian))
        if sorted(self.order) != list(range(len(self.hamiltonian.terms))):
            raise ValueError("order must be a permutation of the Hamiltonian's terms")

    @property
    def step_size(self) -> float:
        return self.time / self.steps


def group_major_order(h: PauliSum) -> tuple[int, ...]:
    """Term indices group by group, the all-Z group first."""
    index = {t.key: k for k, t in enumerate(h.terms)}
    groups = sorted(partition_commuting(h), key=lambda g: bool(g.rotated_qubits))
    return tuple(index[t.key] for g in groups for t in g.terms)


def paired_group_order(h: PauliSum) -> tuple[int, ...]:
    """Group-major order with same-support hopping pairs fused and layered.

    Off-diagonal terms sharing support and X mask (``XX`` and ``YY`` on one
    pair) are kept adjacent: they commute, so their exponentials compose to
    an exact excitation-preserving rotation, whereas splitting them across
    groups lets one-hot states leak. The fused pairs are then laid out in
    brick-wall layers of disjoint support, all taking the place of the first
    pair. Terms without a partner keep their group-major position.
    """
    terms = h.terms
    base = group_major_order(h)
    blocks: dict[tuple[int, int], list[int]] = {}
    for k in base:
        t = terms[k]
        if t.x_mask:
            blocks.setdefault((t.x_mask, t.support), []).append(k)
    pairs = [b for b in blocks.values() if len(b) > 1]
    layers: list[list[list[int]]] = []
    for block in pairs:
        support = terms[block[0]].support
        for layer in layers:
            if all(terms[b[0]].support & support == 0 for b in layer):
                layer.append(block)
                break
        else:
            layers.append([block])
    paired = [k for layer in layers for b in layer for k in b]
    in_pair = set(paired)
    first = next((k for k in base if k in in_pair), None)
    out: list[int] = []
    for k in base:
        if k not in in_pair:
            out.append(k)
        elif k == first:
            out.extend(paired)
    return tuple(out)


def pauli_exponential(term: PauliTerm, angle: float, qubit_count: int) -> list[Gate]:
    """Gates for ``exp(-i angle * coefficient * Q)`` with ``Q`` the term's Pauli string.

    Each X or Y factor is rotated to Z, parities are collected on the
    highest support qubit by a CNOT chain, an RZ applies the phase, and
    everything before the RZ is undone in reverse.
    """
    support = [k for k in range(qubit_count) if (term.support >> k) & 1]
    if not support:
        return []
    pre: list[Gate] = []
    for k in support:
        f = term.factor(k)
        if f == "X":
            pre.append(Gate("H", (k,)))
        elif f == "Y":
            pre += [Gate("Sdg", (k,)), Gate("H", (k,))]
    ladder = [Gate("CNOT", (a, b)) for a, b in zip(support[:-1], support[1:])]
    post: list[Gate] = []
    for g in reversed(pre):
        post.append(Gate("S", g.qubits) if g.name == "Sdg" else g)
    rz = Gate("RZ", (support[-1],), 2.0 * term.coefficient * angle)
    return pre + ladder + [rz] + ladder[::-1] + post


def trotter_circuit(plan: TrotterPlan) -> Circuit:
    """First-order Trotter circuit; the identity term's global phase is dropped."""
    h = plan.hamiltonian
    q = h.qubit_count
    one_step: list[Gate] = []
    for k in plan.order:
        one_step += pauli_exponential(h.terms[k], plan.step_size, q)
    return Circuit(q, tuple(one_step) * plan.steps)


def _dense(h: Union[TridiagonalHamiltonian, PauliSum], drop_identity: bool) -> np.ndarray:
    if isinstance(h, TridiagonalHamiltonian):
        if h.size > 1 << MAX_DENSE_QUBITS:
            raise ValueError(f"dense dimension capped at 2^{MAX_DENSE_QUBITS}")
        return h.matrix()
    mat = to_matrix(h)
    if drop_identity:
        mat = mat - h.identity_coefficient * np.eye(mat.shape[0])
    return mat


def exact_unitary(h: Union[TridiagonalHamiltonian, PauliSum], t: float, drop_identity: bool = False) -> np.ndarray:
    """``exp(-i H t)`` by eigendecomposition.

    ``drop_identity`` removes the identity term of a PauliSum so the result
    is phase-aligned with :func:`trotter_circuit`.
    """
    vals, vecs = np.linalg.eigh(_dense(h, drop_identity))
    return (vecs * np.exp(-1j * vals * t)) @ vecs.conj().T


def exact_evolution(
    h: Union[TridiagonalHamiltonian, PauliSum], t: float, psi0: Union[QuantumState, np.ndarray]
) -> QuantumState:
    """Apply ``exp(-i H t)`` to a statevector or density matrix."""
    state = psi0 if isinstance(psi0, QuantumState) else QuantumState(np.asarray(psi0))
    u = exact_unitary(h, t)
    if u.shape[0] != state.dim:
        raise ValueError(f"state dimension {state.dim} does not match Hamiltonian dimension {u.shape[0]}")
    if state.is_density:
        return QuantumState(u @ state.data @ u.conj().T)
    return QuantumState(u @ state.data)


def prepare_uniform(encoding: str, n_states: int) -> Circuit:
    """Equal superposition of the encoding's basis states.

    ``gray``: H on every qubit, so all ``2^eta`` computational states
    (exactly the N codewords when N is a power of two). ``onehot``: the
    cascade ansatz with ``cos theta_i = 1/sqrt(N - i + 1)``, giving
    amplitude ``1/sqrt(N)`` on each single-excitation state.
    """
    if encoding == "gray":
        eta = qubits_for("gray", n_states)
        return Circuit(eta, tuple(Gate("H", (k,)) for k in range(eta)))
    if encoding == "onehot":
        thetas = [math.acos(1.0 / math.sqrt(n_states - i + 1)) for i in range(1, n_states)]
        return onehot_ansatz(n_states, thetas)
    raise ValueError(f"prepare_uniform supports 'gray' and 'onehot', got {encoding!r}")


@dataclass(frozen=True)
class SweepRecord:
    steps: int
    probabilities: tuple[float, ...]
    trace_distance: float
    cnot_count: int
    depth: int
    density: Optional[np.ndarray] = None


def trotter_sweep(
    h: PauliSum,
    prep: Circuit,
    t: float,
    steps: Sequence[int] = STEP_GRID,
    noise: Optional[NoiseModel] = None,
    shots: Optional[int] = None,
    rng: RngLike = 0,
    keep_density: bool = False,
    mitigator: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> list[SweepRecord]:
    """Run ``prep`` followed by the Trotter circuit for each Trotter number.

    With ``shots=None`` the simulated state is used directly: probabilities
    are exact and the trace distance is taken against the simulated density
    matrix. With ``shots`` the probabilities are sampled frequencies and the
    density matrix comes from tomography with ``shots`` per setting, with
    ``mitigator`` applied to every frequency vector. The reference is always
    ``exp(-i H t)`` applied to the ideal ``prep`` state.
    """
    steps = list(steps)
    if steps != sorted(steps):
        raise ValueError("steps must be ascending")
    gen = make_rng(rng)
    q = h.qubit_count
    psi0 = _simulate(prep, None)
    rho_exact = exact_evolution(h, t, psi0)
    records = []
    for n in steps:
        evo = trotter_circuit(TrotterPlan(h, t, n))
        full = prep + evo
        res = count_resources(evo)
        if shots is None:
            state = _simulate(full, noise)
            probs = apply_readout(state.probabilities(), noise)
            if mitigator is not None:
                probs = mitigator(probs)
        else:
            runner = make_runner(full, noise, gen)
            probs = runner(Circuit(q), shots).frequencies()
            if mitigator is not None:
                probs = mitigator(probs)
            state = tomography(runner, q, shots, mitigator)
        records.append(
            SweepRecord(
                steps=n,
                probabilities=tuple(float(p) for p in probs),
                trace_distance=trace_distance(state, rho_exact),
                cnot_count=res.two_qubit_gates,
                depth=res.depth,
                density=state.as_density() if keep_density else None,
            )
        )
    return records


def trotter_resources(encoding: str, n_states: int, steps: int, t: float = 1.0) -> ResourceReport:
    """Gate counts and depth of the deuteron Trotter circuit (no state preparation)."""
    h = encode(deuteron_hamiltonian(n_states), encoding)
    return count_resources(trotter_circuit(TrotterPlan(h, t, steps)))
