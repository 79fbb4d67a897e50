from __future__ import annotations

import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graycodec.encoder import deuteron_hamiltonian, encode, encode_binary
from graycodec.pauli import (
    PauliSum,
    PauliTerm,
    measurement_rotation_count,
    multiply_paulis,
    partition_commuting,
    pauli_covariance_spectrum,
    projector_expand,
    term_matrix,
    to_matrix,
)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
P0 = np.diag([1.0, 0.0])
P1 = np.diag([0.0, 1.0])
FACTORS = {"I": I2, "X": X, "P0": P0, "P1": P1}
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def kron_all(mats):
    out = np.eye(1)
    for m in mats:
        out = np.kron(out, m)
    return out


labels = st.integers(1, 4).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n))


def test_projector_p1():
    s = projector_expand(["P1"])
    assert s.identity_coefficient == 0.5
    assert s.coefficient("Z") == -0.5
    assert s.term_count == 2


def test_projector_identity():
    s = projector_expand(["I"])
    assert s.identity_coefficient == 1.0
    assert s.terms == ()


def test_projector_p0_x():
    s = projector_expand(["P0", "X"])
    assert dict(s.to_labels()) == {"IX": 0.5, "ZX": 0.5}


def test_projector_expand_matches_tensor_product_exhaustively():
    for n in range(1, 5):
        for pattern in itertools.product(FACTORS, repeat=n):
            s = projector_expand(list(pattern))
            np.testing.assert_allclose(to_matrix(s), kron_all(FACTORS[f] for f in pattern), atol=1e-15)


def test_projector_coefficients_are_powers_of_half():
    for pattern in itertools.product(FACTORS, repeat=3):
        for _, c in projector_expand(list(pattern)).to_labels():
            k = -np.log2(abs(c))
            assert k == round(k)


def test_to_matrix_single_terms():
    np.testing.assert_array_equal(to_matrix(PauliSum.from_labels([("Z", 1.0)])), np.diag([1, -1]))
    np.testing.assert_array_equal(to_matrix(PauliSum.from_labels([("X", 1.0)])), [[0, 1], [1, 0]])


@given(labels, st.floats(-5, 5, allow_nan=False))
def test_term_matrix_is_qubit0_leftmost_kron(label, coeff):
    # the coefficient is deliberately not applied
    t = PauliTerm.from_label(label, coeff)
    np.testing.assert_allclose(term_matrix(t, len(label)), kron_all(PAULI[c] for c in label), atol=1e-12)


@given(labels, labels)
def test_multiply_paulis_matches_matrices(a, b):
    n = max(len(a), len(b))
    a, b = a.ljust(n, "I"), b.ljust(n, "I")
    ta, tb = PauliTerm.from_label(a), PauliTerm.from_label(b)
    phase, x, z = multiply_paulis(ta.x_mask, ta.z_mask, tb.x_mask, tb.z_mask)
    prod = term_matrix(ta, n) @ term_matrix(tb, n)
    np.testing.assert_allclose(prod, phase * term_matrix(PauliTerm(x, z), n), atol=1e-12)


@given(labels, labels)
def test_commutes_matches_matrices(a, b):
    n = max(len(a), len(b))
    a, b = a.ljust(n, "I"), b.ljust(n, "I")
    ta, tb = PauliTerm.from_label(a), PauliTerm.from_label(b)
    ma, mb = term_matrix(ta, n), term_matrix(tb, n)
    assert ta.commutes(tb) == np.allclose(ma @ mb, mb @ ma)


@given(labels)
def test_weight_bounded_by_qubits(label):
    t = PauliTerm.from_label(label)
    assert t.weight == sum(c != "I" for c in label) <= len(label)
    assert t.label(len(label)) == label


def test_gray_h4_matrix_spectrum_matches_tridiagonal():
    h = deuteron_hamiltonian(4)
    np.testing.assert_allclose(np.linalg.eigvalsh(to_matrix(encode(h, "gray"))), h.eigenvalues(), atol=1e-10)


def test_pauli_sum_rejects_duplicates_and_identity_term():
    with pytest.raises(ValueError):
        PauliSum(1, (PauliTerm(0, 1), PauliTerm(0, 1)))
    with pytest.raises(ValueError):
        PauliSum(1, (PauliTerm(0, 0),))


def test_tiny_coefficients_dropped():
    s = PauliSum.from_labels([("Z", 1e-13), ("X", 1.0)])
    assert [lbl for lbl, _ in s.to_labels()] == ["X"]


def test_json_round_trip():
    s = encode(deuteron_hamiltonian(8), "gray")
    text = s.to_json()
    assert isinstance(json.loads(text), list)
    back = PauliSum.from_json(text)
    assert back.to_labels() == s.to_labels()


def _assert_qubitwise(groups, q):
    for g in groups:
        for a, b in itertools.combinations(g.terms, 2):
            for k in range(q):
                fa, fb = a.factor(k), b.factor(k)
                assert fa == fb or "I" in (fa, fb)
        for t in g.terms:
            for k in range(q):
                assert t.factor(k) in ("I", g.measurement_basis[k])


@pytest.mark.parametrize("encoding", ["onehot", "gray", "binary"])
@pytest.mark.parametrize("n", [2, 3, 4, 8])
def test_partition_covers_every_term_once(encoding, n):
    h = encode(deuteron_hamiltonian(n), encoding)
    groups = partition_commuting(h)
    seen = [t.key for g in groups for t in g.terms]
    assert sorted(seen) == sorted(t.key for t in h.terms)
    _assert_qubitwise(groups, h.qubit_count)


def test_onehot_h4_groups():
    groups = partition_commuting(encode(deuteron_hamiltonian(4), "onehot"))
    bases = sorted("".join(g.measurement_basis) for g in groups)
    assert bases == ["XXXX", "YYYY", "ZZZZ"]
    xx = next(g for g in groups if g.measurement_basis[0] == "X")
    assert sorted(t.label(4) for t in xx.terms) == ["IIXX", "IXXI", "XXII"]


def test_gray_h8_groups_one_x_each():
    groups = partition_commuting(encode(deuteron_hamiltonian(8), "gray"))
    bases = sorted("".join(g.measurement_basis) for g in groups)
    assert bases == ["XZZ", "ZXZ", "ZZX", "ZZZ"]
    assert all(len(g.rotated_qubits) <= 1 for g in groups)


def test_binary_h4_groups():
    groups = partition_commuting(encode_binary(deuteron_hamiltonian(4), "x_string"))
    assert sorted("".join(g.measurement_basis) for g in groups) == ["XX", "XZ", "ZZ"]


def test_rotation_counts():
    gray8 = partition_commuting(encode(deuteron_hamiltonian(8), "gray"))
    assert measurement_rotation_count(gray8) == 3
    onehot4 = partition_commuting(encode(deuteron_hamiltonian(4), "onehot"))
    assert measurement_rotation_count(onehot4) == 12


@pytest.mark.parametrize("qubits", [2, 3, 4])
def test_binary_rotation_count_is_triangular_in_qubits(qubits):
    h = encode_binary(deuteron_hamiltonian(1 << qubits), "x_string")
    assert measurement_rotation_count(partition_commuting(h)) == qubits * (qubits + 1) // 2


def test_covariance_spectrum_trivial_cases():
    zero = np.array([1.0, 0.0])
    assert pauli_covariance_spectrum(PauliSum.from_labels([("Z", 1.0)]), zero) == pytest.approx([0.0])
    spec = pauli_covariance_spectrum(PauliSum.from_labels([("Z", 1.0), ("X", 1.0)]), zero)
    assert spec == pytest.approx([1.0, 0.0])


def test_covariance_spectrum_gray_fewer_significant_components():
    h = deuteron_hamiltonian(4)
    counts = {}
    for enc in ("gray", "onehot"):
        hq = encode(h, enc)
        vals, vecs = np.linalg.eigh(to_matrix(hq))
        spec = np.array(pauli_covariance_spectrum(hq, vecs[:, 0]))
        counts[enc] = int(np.sum(spec > 1e-6 * spec[0]))
    assert counts["gray"] < counts["onehot"]


@settings(max_examples=30)
@given(st.lists(st.tuples(st.text("IXYZ", min_size=3, max_size=3), st.floats(-3, 3, allow_nan=False)), min_size=1, max_size=6))
def test_to_matrix_is_hermitian(pairs):
    s = PauliSum.from_labels(pairs)
    m = to_matrix(s)
    np.testing.assert_allclose(m, m.conj().T, atol=1e-12)
