import math

import numpy as np
import pytest

from mqite.measurement import (ComponentTable, Component, MeasurementError, amplitudes_from_shots, build_table,
                               choose_j_ref, component_vector, delta_star, estimate_amplitudes,
                               estimate_phase_parts, phase_circuit_state, phase_probability, relative_phase,
                               select_dominant, t_gate)
from mqite.pauli import apply_to_basis, parse_pauli
from mqite.simulator import Circuit, Prep, apply_pauli_rotation, make_rng
from oracles import basis


def random_circuit(n, depth, seed, prep="zero"):
    rng = np.random.default_rng(seed)
    layers = []
    while len(layers) < depth:
        lab = "".join(rng.choice(list("IXYZ"), n))
        if set(lab) != {"I"}:
            layers.append((float(rng.uniform(-1, 1)), parse_pauli(lab)))
    return Circuit(n, Prep.parse(prep), layers)


def test_amplitude_examples():
    U = Circuit(3)
    assert estimate_amplitudes(U, parse_pauli("XII"), 100, 2, "exact") == {0b100: 1.0}
    assert estimate_amplitudes(U, parse_pauli("ZII"), 100, 2, "exact") == {0: 1.0}
    shots = estimate_amplitudes(U, parse_pauli("XII"), 100, 2, "shot", make_rng(0))
    assert shots == {0b100: 1.0}
    with pytest.raises(MeasurementError):
        estimate_amplitudes(U, parse_pauli("XII"), 100, 2, "shot")


def test_select_dominant():
    assert select_dominant({5: 0.9, 2: 0.1}, 10) == [5, 2]
    amps = {j: 1.0 / (j + 1) for j in range(1, 151)}
    top = select_dominant(amps, 100)
    assert top == list(range(1, 101))
    assert select_dominant({3: 0.5, 1: 0.5, 2: 0.5}, 10) == [1, 2, 3]
    # j = 0 counts against the cap but is never returned
    assert select_dominant({0: 0.9, 4: 0.3, 2: 0.2}, 2) == [4]
    with pytest.raises(MeasurementError):
        select_dominant({1: 1.0}, 0)


def test_choose_j_ref():
    assert choose_j_ref({0b001}, 3) == 0b010
    assert choose_j_ref({0b001, 0b010}, 3) == 0b011
    assert choose_j_ref(set(range(1, 8)) - {6}, 3) == 6
    with pytest.raises(MeasurementError):
        choose_j_ref(set(range(8)), 3)


def test_t_gate():
    y, P = t_gate(0b00, 0b01, 2)
    assert y == pytest.approx(math.pi / 4) and P.label == "IX"
    assert t_gate(0b01, 0b10, 2)[1].label == "XX"
    out = apply_pauli_rotation(basis(2, 1), P := t_gate(0b01, 0b10, 2)[1], math.pi / 4)
    assert np.allclose(out, (basis(2, 1) + 1j * basis(2, 2)) / math.sqrt(2))
    with pytest.raises(MeasurementError):
        t_gate(3, 3, 2)


def test_delta_star():
    t = ComponentTable([Component(1, 0.9, 0.9, 0), Component(2, 0.3, 0.3, 0)], 2, 10, None, "exact")
    assert delta_star(t) == pytest.approx(0.6)
    t = ComponentTable([Component(1, 1.0, 1.0, 0)], 2, 10, None, "exact")
    assert delta_star(t) == 1.0
    assert delta_star(ComponentTable([], 2, 10, None, "exact")) == 1.0


@pytest.mark.parametrize("q, j, want", [("XII", 0b100, (1.0, 0.0)), ("YII", 0b100, (0.0, 1.0))])
def test_phase_parts_known(q, j, want):
    U = Circuit(3)
    eps = 3
    gamma = 10.0 ** -eps
    re, im = estimate_phase_parts(U, parse_pauli(q), j, 0b001, gamma, eps, "exact", 1.0)
    assert abs(re - want[0]) <= 10 * gamma and abs(im - want[1]) <= 10 * gamma
    re, im = estimate_phase_parts(U, parse_pauli(q), j, 0b001, gamma, eps, "exact", 1.0, full_circuit=True)
    assert abs(re - want[0]) <= 10 * gamma and abs(im - want[1]) <= 10 * gamma


def test_fast_path_matches_full_circuit():
    U = random_circuit(4, 3, 1, "basis:1")
    Q = parse_pauli("XYZI")
    v = component_vector(U, Q)
    j_ref = choose_j_ref(np.flatnonzero(np.abs(v) > 1e-12), 4)
    for j in range(16):
        if j == j_ref:
            continue
        for part in ("real", "imag"):
            state = phase_circuit_state(U, Q, j, j_ref, 0.01, part)
            assert abs(state) @ abs(state) == pytest.approx(1.0)
            assert abs(state[j_ref]) ** 2 == pytest.approx(phase_probability(v, j, j_ref, 0.01, part), abs=1e-14)


@pytest.mark.parametrize("eps", [2, 3, 4])
def test_inversion_recovers_statevector(eps):
    # shallow circuit so some bitstring stays empty for the reference
    U = random_circuit(4, 3, eps)
    Q = parse_pauli("XZYX")
    v = component_vector(U, Q)
    gamma = 10.0 ** -eps
    j_ref = choose_j_ref(np.flatnonzero(np.abs(v) > 1e-14), 4)
    for j in range(16):
        amp = abs(v[j])
        if amp < 10 * gamma or j == j_ref:
            continue
        re, im = estimate_phase_parts(None, None, j, j_ref, gamma, None, "exact", amp, v=v)
        assert abs(re - v[j].real) <= 10 * gamma
        assert abs(im - v[j].imag) <= 10 * gamma


def test_relative_phase():
    v = np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2)
    assert relative_phase(v, 1, 2) == pytest.approx(0.0, abs=1e-12)
    v = np.array([0, 1, 1j, 0], dtype=complex) / math.sqrt(2)
    assert relative_phase(v, 1, 2) == pytest.approx(-math.pi / 2, abs=1e-6)
    with pytest.raises(MeasurementError):
        relative_phase(np.array([1, 0, 0, 0], dtype=complex), 0, 3)


def test_relative_phase_random():
    rng = np.random.default_rng(4)
    for _ in range(10):
        v = rng.normal(size=8) + 1j * rng.normal(size=8)
        v /= np.linalg.norm(v)
        j1, j2 = rng.choice(8, 2, replace=False)
        d = np.angle(v[j1]) - np.angle(v[j2])
        got = relative_phase(v, int(j1), int(j2))
        assert math.sin(got) == pytest.approx(math.sin(d), abs=1e-9)


def test_build_table_exact_invariants():
    U = random_circuit(5, 4, 7)
    Q = parse_pauli("XZIYX")
    v = component_vector(U, Q)
    eps = 3
    t = build_table(v, 5, eps, 6, "exact")
    amps = [c.amp for c in t.entries]
    assert len(t) <= 6
    assert [(-c.amp, c.j) for c in t.entries] == sorted((-c.amp, c.j) for c in t.entries)
    assert min(amps) >= 10.0 ** -eps / 2
    assert abs(v[t.j_ref]) < 1e-12
    assert t.inconsistent == 0
    for c in t.entries:
        assert abs(c.re ** 2 + c.im ** 2 - c.amp ** 2) <= 10.0 ** (-eps + 1)
        assert abs(c.re - v[c.j].real) <= 10 * 10.0 ** -eps
    assert t.c0 == round(v[0].real, eps)


def test_build_table_statevector_method_agrees():
    U = random_circuit(4, 3, 8)
    Q = parse_pauli("ZXXY")
    v = component_vector(U, Q)
    a = build_table(v, 4, 4, 16, "exact")
    b = build_table(v, 4, 4, 16, "exact", phase_method="statevector")
    for x, y in zip(a.entries, b.entries):
        assert x.j == y.j
        assert abs(x.re - y.re) <= 1e-3 and abs(x.im - y.im) <= 1e-3


def test_hybrid_and_shot_modes_are_seeded():
    U = random_circuit(4, 10, 9)
    v = component_vector(U, parse_pauli("XXYZ"))
    for mode in ("hybrid", "shot"):
        a = build_table(v, 4, 2, 16, mode, chi=500, rng=make_rng(3))
        b = build_table(v, 4, 2, 16, mode, chi=500, rng=make_rng(3))
        assert a == b
        assert set(c.j for c in a.entries) <= set(np.flatnonzero(np.abs(v) > 0))
    with pytest.raises(MeasurementError):
        build_table(v, 4, 2, 16, "shot")
    with pytest.raises(MeasurementError):
        build_table(v, 4, 2, 16, "bogus")


def test_shot_amplitudes_counts():
    v = np.array([0.6, 0, 0, 0.8], dtype=complex)
    amps, counts = amplitudes_from_shots(v, 1000, None, make_rng(1))
    assert sum(counts.values()) == 1000
    assert amps[0] == pytest.approx(math.sqrt(counts[0] / 1000))


def test_shot_phase_circuits_with_budget():
    U = Circuit(2)
    Q = parse_pauli("YI")
    v = component_vector(U, Q)
    t = build_table(v, 2, 2, 4, "shot", chi=10000, rng=make_rng(5), phase_shots=10 ** 8)
    (c,) = t.entries
    assert c.j == 0b10 and abs(c.im - 1.0) < 0.05 and abs(c.re) < 0.05
