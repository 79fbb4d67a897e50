from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graycodec.circuit import (
    Circuit,
    Gate,
    ResourceReport,
    ansatz_resources,
    append_measurement_rotations,
    count_resources,
    fold_cnots,
    gray_ansatz,
    onehot_ansatz,
    route,
    table3_formula,
)
from graycodec.encoder import basis_index, deuteron_hamiltonian, encode
from graycodec.pauli import partition_commuting, term_matrix
from graycodec.sim import QuantumState, circuit_unitary, run_statevector

angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)


def amplitudes(circuit):
    return run_statevector(circuit).data


def amp(psi, bits):
    return psi[basis_index(bits)]


def eq20(t1, t2, t3):
    return {
        (0, 0): math.cos(t1) * math.cos(t2 + t3),
        (1, 0): math.sin(t1) * math.sin(t2 - t3),
        (1, 1): math.sin(t1) * math.cos(t2 - t3),
        (0, 1): math.cos(t1) * math.sin(t2 + t3),
    }


def eq18(t1, t2, t3):
    return {
        (0, 0, 0, 1): math.cos(t1),
        (0, 0, 1, 0): math.sin(t1) * math.cos(t2),
        (0, 1, 0, 0): math.sin(t1) * math.sin(t2) * math.cos(t3),
        (1, 0, 0, 0): math.sin(t1) * math.sin(t2) * math.sin(t3),
    }


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("CNOT", (1, 1))
    with pytest.raises(ValueError):
        Gate("RY", (0,))
    with pytest.raises(ValueError):
        Gate("H", (0,), 0.3)
    with pytest.raises(ValueError):
        Gate("CZ", (0, 1))
    with pytest.raises(ValueError):
        Circuit(2, (Gate("H", (2,)),))


def test_text_round_trip():
    c = gray_ansatz(3, [0.1 * k for k in range(7)]).extended([Gate("Sdg", (0,)), Gate("SWAP", (1, 2))])
    text = c.to_text()
    assert "RY q0 0.0" in text and "CNOT q0 q1" in text
    assert Circuit.from_text(text) == c


def test_gray_ansatz_zero_angles():
    psi = amplitudes(gray_ansatz(2, [0, 0, 0]))
    np.testing.assert_allclose(psi, [1, 0, 0, 0], atol=1e-15)


def test_gray_ansatz_first_angle_quarter_turn():
    psi = amplitudes(gray_ansatz(2, [math.pi / 2, 0, 0]))
    assert amp(psi, (1, 1)) == pytest.approx(1.0)
    assert np.sum(np.abs(psi) ** 2) == pytest.approx(1.0)


def test_gray_ansatz_eta2_structure():
    c = gray_ansatz(2, [0.1, 0.2, 0.3])
    assert [(g.name, g.qubits) for g in c.gates] == [("RY", (0,)), ("RY", (1,)), ("CNOT", (0, 1)), ("RY", (1,))]
    assert [g.angle for g in c.gates if g.angle is not None] == pytest.approx([0.2, 0.4, 0.6])


@settings(max_examples=200)
@given(angles, angles, angles)
def test_gray_ansatz_matches_closed_form(t1, t2, t3):
    psi = amplitudes(gray_ansatz(2, [t1, t2, t3]))
    for bits, expected in eq20(t1, t2, t3).items():
        assert amp(psi, bits) == pytest.approx(expected, abs=1e-10)


@settings(max_examples=30)
@given(st.integers(1, 5).flatmap(lambda e: st.tuples(st.just(e), st.lists(angles, min_size=(1 << e) - 1, max_size=(1 << e) - 1))))
def test_gray_ansatz_is_real(args):
    eta, thetas = args
    assert np.max(np.abs(amplitudes(gray_ansatz(eta, thetas)).imag)) < 1e-12


def test_onehot_ansatz_zero_angles():
    psi = amplitudes(onehot_ansatz(4, [0, 0, 0]))
    assert amp(psi, (0, 0, 0, 1)) == pytest.approx(1.0)


def test_onehot_ansatz_all_quarter_turns():
    psi = amplitudes(onehot_ansatz(4, [math.pi / 2] * 3))
    assert amp(psi, (1, 0, 0, 0)) == pytest.approx(1.0)


@settings(max_examples=200)
@given(angles, angles, angles)
def test_onehot_ansatz_matches_closed_form(t1, t2, t3):
    psi = amplitudes(onehot_ansatz(4, [t1, t2, t3]))
    for bits, expected in eq18(t1, t2, t3).items():
        assert amp(psi, bits) == pytest.approx(expected, abs=1e-10)


@settings(max_examples=40)
@given(st.integers(2, 7).flatmap(lambda n: st.tuples(st.just(n), st.lists(angles, min_size=n - 1, max_size=n - 1))))
def test_onehot_ansatz_has_no_leakage(args):
    n, thetas = args
    psi = amplitudes(onehot_ansatz(n, thetas))
    allowed = [1 << (n - 1 - k) for k in range(n)]
    mask = np.ones(psi.size, bool)
    mask[allowed] = False
    assert np.sum(np.abs(psi[mask]) ** 2) < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4, 8, 16])
def test_onehot_ansatz_resources(n):
    r = count_resources(onehot_ansatz(n, [0.3] * (n - 1)))
    assert (r.single_qubit_gates, r.two_qubit_gates, r.depth) == (2 * n - 2, 3 * n - 5, 4 * n - 6)


def test_onehot_n4_resources_example():
    r = count_resources(onehot_ansatz(4, [0.1] * 3))
    assert (r.two_qubit_gates, r.single_qubit_gates, r.depth) == (7, 6, 10)


@pytest.mark.parametrize("eta", [1, 2, 3, 4, 5])
def test_gray_ansatz_counts(eta):
    m = (1 << eta) - 1
    r = count_resources(gray_ansatz(eta, [0.2] * m))
    assert (r.single_qubit_gates, r.two_qubit_gates) == (m, m - eta)


def test_gray_resource_examples():
    r2 = count_resources(gray_ansatz(2, [0.1] * 3))
    assert (r2.single_qubit_gates, r2.two_qubit_gates, r2.depth) == (3, 1, 3)
    r3 = count_resources(gray_ansatz(3, [0.1] * 7))
    assert (r3.single_qubit_gates, r3.two_qubit_gates, r3.depth) == (7, 4, 7)


@pytest.mark.parametrize("eta", [2, 3, 4, 5, 6])
def test_gray_depth_matches_closed_form_from_two_qubits(eta):
    m = (1 << eta) - 1
    formula = math.ceil(m / eta) * (eta + 1) - 2 * eta + m % eta
    assert count_resources(gray_ansatz(eta, [0.1] * m)).depth == formula


def test_gray_depth_one_qubit_is_one():
    # closed form gives 0 here; a single RY has depth 1
    assert count_resources(gray_ansatz(1, [0.1])).depth == 1
    assert table3_formula("gray", 2).depth == 0


def test_wrong_parameter_counts():
    with pytest.raises(ValueError):
        gray_ansatz(2, [0.1, 0.2])
    with pytest.raises(ValueError):
        onehot_ansatz(4, [0.1])


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_total_gate_formulas(n):
    eta = max(1, math.ceil(math.log2(n)))
    assert ansatz_resources("onehot", n).total_gates == 18 * n - 21
    assert ansatz_resources("gray", n).total_gates == 2 * (eta + 1) * ((1 << eta) - 1) - eta**2


@pytest.mark.parametrize("encoding", ["onehot", "gray"])
@pytest.mark.parametrize("n", [4, 8, 16])
def test_built_resources_equal_table(encoding, n):
    assert ansatz_resources(encoding, n) == table3_formula(encoding, n)


def test_measurement_rotations():
    h8 = encode(deuteron_hamiltonian(8), "gray")
    sx1 = next(g for g in partition_commuting(h8) if g.measurement_basis == ("Z", "X", "Z"))
    extra = append_measurement_rotations(Circuit(3), sx1).gates
    assert [(g.name, g.qubits) for g in extra] == [("H", (1,))]
    sz = next(g for g in partition_commuting(h8) if not g.rotated_qubits)
    base = gray_ansatz(3, [0.1] * 7)
    assert append_measurement_rotations(base, sz) == base
    h4 = encode(deuteron_hamiltonian(4), "onehot")
    yy = next(g for g in partition_commuting(h4) if g.measurement_basis[0] == "Y")
    gates = append_measurement_rotations(Circuit(4), yy).gates
    assert [(g.name, g.qubits) for g in gates] == [(n, (k,)) for k in range(4) for n in ("Sdg", "H")]


def test_rotated_group_diagonalizes_its_terms():
    h = encode(deuteron_hamiltonian(4), "onehot")
    for g in partition_commuting(h):
        u = circuit_unitary(append_measurement_rotations(Circuit(4), g))
        for t in g.terms:
            d = u @ term_matrix(t, 4) @ u.conj().T
            np.testing.assert_allclose(d, np.diag(np.diag(d)), atol=1e-12)


def test_fold_cnots():
    c = onehot_ansatz(4, [0.3, 0.4, 0.5])
    assert fold_cnots(c, 0) == c
    f = fold_cnots(c, 1)
    assert f.count("CNOT") == 3 * c.count("CNOT")
    assert count_resources(f).single_qubit_gates == count_resources(c).single_qubit_gates
    with pytest.raises(ValueError):
        fold_cnots(c, -1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_folding_preserves_state(n):
    c = gray_ansatz(3, [0.3 * k for k in range(7)])
    overlap = np.vdot(amplitudes(c), amplitudes(fold_cnots(c, n)))
    assert abs(overlap) == pytest.approx(1.0, abs=1e-12)


def test_count_resources_empty():
    assert count_resources(Circuit(3)) == ResourceReport()


def place(psi, layout, size):
    """Statevector with logical qubit l on physical qubit layout[l]."""
    t = psi.reshape((2,) * size)
    inverse = [layout.index(p) for p in range(size)]
    return np.transpose(t, inverse).reshape(-1)


def assert_routed_equivalent(circuit, coupling, layout=None, seed=0):
    routed = route(circuit, coupling, layout)
    size = routed.circuit.qubit_count
    assert size == circuit.qubit_count
    for a, b in (g.qubits for g in routed.circuit.gates if len(g.qubits) == 2):
        assert (a, b) in coupling or (b, a) in coupling
    rng = np.random.default_rng(seed)
    for _ in range(3):
        psi = rng.normal(size=1 << size) + 1j * rng.normal(size=1 << size)
        psi /= np.linalg.norm(psi)
        want = place(run_statevector(circuit, QuantumState(psi)).data, list(routed.final_layout), size)
        got = run_statevector(routed.circuit, QuantumState(place(psi, list(routed.initial_layout), size))).data
        np.testing.assert_allclose(got, want, atol=1e-12)
    return routed


def test_route_on_line_inserts_one_swap():
    c = Circuit(3, (Gate("CNOT", (0, 2)),))
    routed = assert_routed_equivalent(c, [(0, 1), (1, 2)])
    assert routed.swap_count == 1
    assert routed.circuit.count("CNOT") == 4


def test_route_on_loop_needs_no_swap():
    c = Circuit(3, (Gate("CNOT", (0, 2)),))
    routed = route(c, [(0, 1), (1, 2), (2, 0)])
    assert routed.swap_count == 0
    assert routed.circuit == c


def test_route_conforming_circuit_unchanged():
    c = gray_ansatz(2, [0.1, 0.2, 0.3])
    assert route(c, [(0, 1)]).circuit == c


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["CNOT", "RY", "H", "SWAP"]), st.permutations(range(4))), max_size=12))
def test_route_equivalence_on_line(ops):
    gates = []
    for name, perm in ops:
        if name == "RY":
            gates.append(Gate("RY", (perm[0],), 0.7))
        elif name == "H":
            gates.append(Gate("H", (perm[0],)))
        else:
            gates.append(Gate(name, (perm[0], perm[1])))
    assert_routed_equivalent(Circuit(4, tuple(gates)), [(0, 1), (1, 2), (2, 3)])


def test_route_with_layout_and_disconnected_graph():
    c = Circuit(2, (Gate("CNOT", (0, 1)),))
    routed = route(c, [(0, 1), (1, 2), (3, 4)], layout=[2, 0])
    assert routed.initial_layout == (2, 0)
    with pytest.raises(ValueError):
        route(c, [(0, 1), (2, 3)], layout=[0, 3])
