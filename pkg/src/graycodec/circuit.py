"""Gate-level circuit IR, ansatz builders, measurement rotations, resource
counting, CNOT folding and SWAP routing on a coupling graph.

Angle convention: ``RY(phi) = exp(-i phi Y / 2)`` and ``RZ(phi) = exp(-i phi Z / 2)``.
Ansatz parameters ``theta`` enter as ``phi = 2 theta`` so amplitudes read
``cos(theta)`` / ``sin(theta)`` directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

import networkx as nx

from .pauli import CommutingGroup

__all__ = [
    "Circuit",
    "Gate",
    "ResourceReport",
    "RoutedCircuit",
    "ansatz_resources",
    "append_measurement_rotations",
    "count_resources",
    "fold_cnots",
    "gray_ansatz",
    "gray_parameter_count",
    "onehot_ansatz",
    "route",
    "table3_formula",
]

SINGLE_QUBIT = {"RY", "RZ", "H", "S", "Sdg", "X"}
TWO_QUBIT = {"CNOT", "SWAP"}
PARAMETRIC = {"RY", "RZ"}
MEASURE_TAG = "measure"


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    angle: Optional[float] = None
    tag: str = ""

    def __post_init__(self) -> None:
        if self.name in SINGLE_QUBIT:
            arity = 1
        elif self.name in TWO_QUBIT:
            arity = 2
        else:
            raise ValueError(f"unknown gate {self.name!r}")
        if len(self.qubits) != arity:
            raise ValueError(f"{self.name} acts on {arity} qubit(s), got {self.qubits}")
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"{self.name} needs two distinct qubits")
        if (self.angle is None) == (self.name in PARAMETRIC):
            raise ValueError(f"{self.name}: angle must be given exactly for RY/RZ")

    def to_text(self) -> str:
        parts = [self.name, *(f"q{q}" for q in self.qubits)]
        if self.angle is not None:
            parts.append(repr(float(self.angle)))
        if self.tag:
            parts.append(f"[{self.tag}]")
        return " ".join(parts)

    @classmethod
    def from_text(cls, line: str) -> Gate:
        tokens = line.split()
        tag = ""
        if tokens and tokens[-1].startswith("["):
            tag = tokens.pop()[1:-1]
        name, rest = tokens[0], tokens[1:]
        qubits = tuple(int(t[1:]) for t in rest if t.startswith("q"))
        numbers = [float(t) for t in rest if not t.startswith("q")]
        return cls(name, qubits, numbers[0] if numbers else None, tag)


@dataclass(frozen=True)
class Circuit:
    qubit_count: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self) -> None:
        for g in self.gates:
            if any(not 0 <= q < self.qubit_count for q in g.qubits):
                raise ValueError(f"gate {g.to_text()} outside a {self.qubit_count}-qubit register")

    def extended(self, gates: Iterable[Gate]) -> Circuit:
        return Circuit(self.qubit_count, self.gates + tuple(gates))

    def __add__(self, other: Circuit) -> Circuit:
        if other.qubit_count != self.qubit_count:
            raise ValueError("qubit counts differ")
        return self.extended(other.gates)

    def __len__(self) -> int:
        return len(self.gates)

    def count(self, name: str) -> int:
        return sum(1 for g in self.gates if g.name == name)

    def depth(self) -> int:
        """Longest path under as-soon-as-possible scheduling."""
        level = [0] * self.qubit_count
        for g in self.gates:
            t = max(level[q] for q in g.qubits) + 1
            for q in g.qubits:
                level[q] = t
        return max(level, default=0)

    def to_text(self) -> str:
        lines = [f"QUBITS {self.qubit_count}"] + [g.to_text() for g in self.gates]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Circuit:
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not lines or not lines[0].startswith("QUBITS"):
            raise ValueError("circuit text must start with 'QUBITS <n>'")
        return cls(int(lines[0].split()[1]), tuple(Gate.from_text(ln) for ln in lines[1:]))


@dataclass(frozen=True)
class ResourceReport:
    single_qubit_gates: int = 0
    two_qubit_gates: int = 0
    depth: int = 0
    basis_rotations: int = 0

    @property
    def total_gates(self) -> int:
        return self.single_qubit_gates + self.two_qubit_gates + self.basis_rotations


def count_resources(circuit: Circuit) -> ResourceReport:
    """Gate tallies and depth. Gates tagged as measurement rotations are
    counted under ``basis_rotations`` only, and excluded from ``depth``."""
    body = Circuit(circuit.qubit_count, tuple(g for g in circuit.gates if g.tag != MEASURE_TAG))
    rotations = len(circuit.gates) - len(body.gates)
    return ResourceReport(
        single_qubit_gates=sum(1 for g in body.gates if len(g.qubits) == 1),
        two_qubit_gates=sum(1 for g in body.gates if len(g.qubits) == 2),
        depth=body.depth(),
        basis_rotations=rotations,
    )


def gray_parameter_count(eta: int) -> int:
    return (1 << eta) - 1


def gray_ansatz(eta: int, thetas: Sequence[float]) -> Circuit:
    """Hardware-efficient real ansatz on ``eta`` qubits with ``2^eta - 1`` parameters.

    A first layer puts RY on every qubit. Later layers are entangling rings
    ``CNOT(k -> k+1 mod eta)`` for ``k = 0, 1, ...`` followed by an RY on each
    ring target, so every RY after the first layer is paired with one CNOT.
    The last ring is cut short once all parameters are placed.
    """
    if eta < 1:
        raise ValueError("eta must be >= 1")
    n_params = gray_parameter_count(eta)
    if len(thetas) != n_params:
        raise ValueError(f"gray ansatz on {eta} qubits needs {n_params} angles, got {len(thetas)}")
    angles = iter(2.0 * float(t) for t in thetas)
    gates = [Gate("RY", (k,), next(angles)) for k in range(eta)]
    remaining = n_params - eta
    while remaining:
        size = min(eta, remaining)
        targets = []
        for k in range(size):
            target = (k + 1) % eta
            gates.append(Gate("CNOT", (k, target)))
            targets.append(target)
        gates.extend(Gate("RY", (t,), next(angles)) for t in targets)
        remaining -= size
    return Circuit(eta, tuple(gates))


def onehot_ansatz(n_states: int, thetas: Sequence[float]) -> Circuit:
    """Cascade ansatz over the ``n_states`` one-hot basis states.

    Amplitudes are ``cos t1`` on state N-1, ``sin t1 cos t2`` on N-2, ...,
    ``sin t1 ... sin t_{N-1}`` on state 0 (state ``n`` is qubit ``n`` set).
    Each step moves amplitude one qubit down with a controlled RY, expanded
    as RY, CNOT, RY, CNOT, then a CNOT clears the control. The first
    controlled RY is a plain RY because its control is always |1>.
    """
    if n_states < 2:
        raise ValueError("one-hot ansatz needs at least two states")
    if len(thetas) != n_states - 1:
        raise ValueError(f"one-hot ansatz on {n_states} states needs {n_states - 1} angles, got {len(thetas)}")
    last = n_states - 1
    gates = [Gate("X", (last,)), Gate("RY", (last - 1,), 2.0 * float(thetas[0])), Gate("CNOT", (last - 1, last))]
    for i in range(2, n_states):
        control, target = n_states - i, n_states - i - 1
        half = float(thetas[i - 1])
        gates += [
            Gate("RY", (target,), half),
            Gate("CNOT", (control, target)),
            Gate("RY", (target,), -half),
            Gate("CNOT", (control, target)),
            Gate("CNOT", (target, control)),
        ]
    return Circuit(n_states, tuple(gates))


def append_measurement_rotations(circuit: Circuit, group: CommutingGroup) -> Circuit:
    """Append H on X-tagged qubits and S† then H on Y-tagged qubits."""
    if len(group.measurement_basis) != circuit.qubit_count:
        raise ValueError("group basis does not match the circuit register")
    extra = []
    for k, basis in enumerate(group.measurement_basis):
        if basis == "X":
            extra.append(Gate("H", (k,), tag=MEASURE_TAG))
        elif basis == "Y":
            extra += [Gate("Sdg", (k,), tag=MEASURE_TAG), Gate("H", (k,), tag=MEASURE_TAG)]
    return circuit.extended(extra)


def fold_cnots(circuit: Circuit, n: int) -> Circuit:
    """Replace every CNOT by ``2n + 1`` consecutive copies."""
    if n < 0:
        raise ValueError("fold count must be >= 0")
    gates = []
    for g in circuit.gates:
        gates.extend([g] * (2 * n + 1) if g.name == "CNOT" else [g])
    return Circuit(circuit.qubit_count, tuple(gates))


@dataclass(frozen=True)
class RoutedCircuit:
    """A circuit on physical qubits plus where each logical qubit starts and ends."""

    circuit: Circuit
    initial_layout: tuple[int, ...]
    final_layout: tuple[int, ...]

    @property
    def swap_count(self) -> int:
        return sum(1 for g in self.circuit.gates if g.tag == "swap") // 3


def _swap_gates(a: int, b: int) -> list[Gate]:
    return [Gate("CNOT", (a, b), tag="swap"), Gate("CNOT", (b, a), tag="swap"), Gate("CNOT", (a, b), tag="swap")]


def route(
    circuit: Circuit,
    coupling: Iterable[tuple[int, int]],
    layout: Optional[Sequence[int] | Mapping[int, int]] = None,
) -> RoutedCircuit:
    """Map logical qubits onto a coupling graph, inserting SWAPs where needed.

    For a two-qubit gate on uncoupled physical qubits, the first operand is
    swapped along a shortest path until it neighbours the second. Each SWAP
    is emitted as three CNOTs. ``layout[l]`` is the physical qubit initially
    holding logical qubit ``l`` (identity by default).
    """
    graph = nx.Graph()
    graph.add_edges_from(coupling)
    if layout is None:
        layout = list(range(circuit.qubit_count))
    elif isinstance(layout, Mapping):
        layout = [layout[k] for k in range(circuit.qubit_count)]
    layout = list(layout)
    if len(layout) != circuit.qubit_count or len(set(layout)) != len(layout):
        raise ValueError("layout must map every logical qubit to a distinct physical qubit")
    missing = [p for p in layout if p not in graph]
    if missing:
        raise ValueError(f"physical qubits {missing} are not in the coupling graph")
    size = max(graph.nodes) + 1
    log_to_phys = list(layout)
    phys_to_log = {p: l for l, p in enumerate(layout)}
    out: list[Gate] = []
    for g in circuit.gates:
        if len(g.qubits) == 1:
            out.append(replace(g, qubits=(log_to_phys[g.qubits[0]],)))
            continue
        a, b = (log_to_phys[q] for q in g.qubits)
        if not graph.has_edge(a, b):
            try:
                path = nx.shortest_path(graph, a, b)
            except nx.NetworkXNoPath:
                raise ValueError(f"physical qubits {a} and {b} are disconnected") from None
            for u, v in zip(path[:-2], path[1:-1]):
                out.extend(_swap_gates(u, v))
                lu, lv = phys_to_log.pop(u, None), phys_to_log.pop(v, None)
                if lu is not None:
                    phys_to_log[v] = lu
                    log_to_phys[lu] = v
                if lv is not None:
                    phys_to_log[u] = lv
                    log_to_phys[lv] = u
            a, b = (log_to_phys[q] for q in g.qubits)
        if g.name == "SWAP":
            out.extend(_swap_gates(a, b))
        else:
            out.append(replace(g, qubits=(a, b)))
    return RoutedCircuit(Circuit(size, tuple(out)), tuple(layout), tuple(log_to_phys))


def ansatz_resources(encoding: str, n_states: int) -> ResourceReport:
    """Gates needed for one energy evaluation, summed over the measurement circuits.

    Every commuting group gets its own copy of the ansatz, so gate counts
    are the per-circuit counts times the number of groups. Rotations are
    the basis-change gates over all groups; depth is that of one ansatz.
    """
    from .encoder import deuteron_hamiltonian, encode, qubits_for
    from .pauli import measurement_rotation_count, partition_commuting

    groups = partition_commuting(encode(deuteron_hamiltonian(n_states), encoding))
    if encoding == "onehot":
        body = onehot_ansatz(n_states, [0.1] * (n_states - 1))
    else:
        eta = qubits_for(encoding, n_states)
        body = gray_ansatz(eta, [0.1] * gray_parameter_count(eta))
    one = count_resources(body)
    return ResourceReport(
        single_qubit_gates=len(groups) * one.single_qubit_gates,
        two_qubit_gates=len(groups) * one.two_qubit_gates,
        depth=one.depth,
        basis_rotations=measurement_rotation_count(groups),
    )


def table3_formula(encoding: str, n_states: int) -> ResourceReport:
    """Closed-form ansatz resources; ``gray`` takes ``eta = ceil(log2 N)``."""
    if encoding == "onehot":
        n = n_states
        return ResourceReport(3 * (2 * n - 2), 3 * (3 * n - 5), 4 * n - 6, 3 * n)
    if encoding == "gray":
        eta = max(1, math.ceil(math.log2(n_states)))
        m = (1 << eta) - 1
        depth = math.ceil(m / eta) * (eta + 1) - 2 * eta + m % eta
        return ResourceReport((eta + 1) * m, (eta + 1) * (m - eta), depth, eta)
    raise ValueError(f"closed forms exist for 'onehot' and 'gray', got {encoding!r}")
