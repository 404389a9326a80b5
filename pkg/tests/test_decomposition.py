import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mqite.decomposition import (DecompositionError, Gate, block_count, build_unitary, decompose_check,
                                 decompose_rotation, expand_u2, gate_count, phase_distance, r_elementary_matrix,
                                 r_gate_matrix, rotation_cost)
from mqite.pauli import PauliError, parse_pauli
from oracles import I2, Z, equal_up_to_phase, rotation


def unitary_distance(A, B):
    return equal_up_to_phase(A.ravel(), B.ravel())


def test_r_is_unitary():
    R = r_gate_matrix()
    assert np.max(np.abs(R @ R.conj().T - np.eye(4))) < 1e-12


def test_r_collapses_three_qubit_rotation():
    R3 = np.kron(r_gate_matrix(), I2)
    a = 0.37
    assert np.allclose(R3 @ rotation("XXX", a) @ R3.conj().T, rotation("IXX", a), atol=1e-12)


def test_r_elementary_circuit_differs_from_r_by_z_quarter_turns():
    # the u3 pair, CNOT, u3 pair circuit is R followed by exp(i pi/4 Z) x exp(-i pi/4 Z)
    D = np.kron(np.diag(np.exp(1j * math.pi / 4 * np.diag(Z))), np.diag(np.exp(-1j * math.pi / 4 * np.diag(Z))))
    circ = r_elementary_matrix()
    assert unitary_distance(circ, D @ r_gate_matrix()) < 1e-10
    assert unitary_distance(circ, r_gate_matrix()) > 0.1


def test_single_qubit_rotation():
    g = decompose_rotation(parse_pauli("X"), 0.3)
    assert gate_count(g) == (1, 0)
    assert unitary_distance(build_unitary(g, 1), rotation("X", 0.3)) < 1e-12


def test_zz_example():
    g = decompose_rotation(parse_pauli("ZZ"), 0.3)
    assert unitary_distance(build_unitary(g, 2), rotation("ZZ", 0.3)) < 1e-10
    assert gate_count(g)[1] == 1


def test_identity_rejected():
    with pytest.raises((DecompositionError, PauliError)):
        decompose_rotation(parse_pauli("III"), 0.1)


def test_weight_six_bound():
    rng = np.random.default_rng(5)
    lab = "".join(rng.choice(list("XYZ"), 6))
    g = decompose_rotation(parse_pauli(lab), 0.8)
    assert unitary_distance(build_unitary(g, 6), rotation(lab, 0.8)) < 1e-9
    assert gate_count(g)[1] <= 2 * 6
    assert block_count(g) <= 2 * 6


@settings(max_examples=60, deadline=None)
@given(st.text("IXYZ", min_size=1, max_size=6).filter(lambda s: set(s) != {"I"}), st.floats(-3.2, 3.2))
def test_rotation_oracle(lab, alpha):
    g = decompose_rotation(parse_pauli(lab), alpha)
    assert all(len(x.qubits) <= 2 for x in g)
    assert unitary_distance(build_unitary(g, len(lab)), rotation(lab, alpha)) < 1e-9
    # U2 expansion keeps the unitary and only uses u and cx
    ex = expand_u2(g)
    assert {x.name for x in ex} <= {"u", "cx"}
    assert unitary_distance(build_unitary(ex, len(lab)), rotation(lab, alpha)) < 1e-9


def test_two_qubit_count_is_ladder_count():
    counts = []
    for m in range(1, 7):
        p = parse_pauli("X" * m)
        g = decompose_rotation(p, 0.2)
        expected = 0 if m == 1 else 2 * (m - 2) + 1
        assert gate_count(g)[1] == expected
        counts.append(expected)
    assert counts == sorted(counts)


@pytest.mark.parametrize("lab", ["X", "Z", "Y", "XZ", "IYIZX", "ZZZZ", "XIIIIY", "YYYYYYY"])
def test_rotation_cost_matches_gate_lists(lab):
    p = parse_pauli(lab)
    g = decompose_rotation(p, 0.4)
    cost = rotation_cost(p)
    assert (cost["gates_1q"], cost["gates_2q"]) == gate_count(g)
    assert cost["blocks"] == block_count(g)
    assert (cost["expanded_1q"], cost["expanded_2q"]) == gate_count(expand_u2(g))


def test_gate_count_empty_and_build_unitary_examples():
    assert gate_count([]) == (0, 0)
    assert np.allclose(build_unitary([], 3), np.eye(8))
    cx = build_unitary([Gate("cx", (0, 1))], 2)
    perm = np.eye(4)[:, [0, 1, 3, 2]]
    assert np.allclose(cx, perm)
    with pytest.raises(DecompositionError):
        build_unitary([], 9)


def test_phase_distance():
    A = rotation("XY", 0.2)
    assert phase_distance(A, np.exp(1.1j) * A) < 1e-12


def test_decompose_check_small():
    rows = decompose_check(n_max=3, n_strings=5, n_random=(4,), rng=np.random.default_rng(1))
    assert sum(r["strings"] for r in rows) == 3 + 15 + 63 + 5
    assert max(r["max_deviation"] for r in rows) < 1e-9
