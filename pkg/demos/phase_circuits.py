"""
Reading real and imaginary parts with an ancilla
================================================

Sampling gives |c_j| only.  The phase comes from interfering c_j with a small
known amplitude sin(gamma) placed on an empty bitstring j_ref; the
probability of (ancilla 0, register j_ref) is linear in Re c_j or Im c_j.
Here we build the full (n+1)-qubit circuit for a random 4-qubit U and compare
the recovered parts with the statevector.
"""
import numpy as np

from mqite.measurement import choose_j_ref, component_vector, estimate_phase_parts, relative_phase
from mqite.pauli import parse_pauli
from mqite.simulator import Circuit

rng = np.random.default_rng(1)
layers = [(float(rng.uniform(-1, 1)), parse_pauli(lab)) for lab in ["XYII", "IZXI", "YIIZ"]]
U = Circuit(4, layers=layers)
Q = parse_pauli("XZYI")
v = component_vector(U, Q)
j_ref = choose_j_ref(np.flatnonzero(np.abs(v) > 1e-12), 4)
print(f"j_ref = {j_ref:04b}")

for eps in (2, 3):
    gamma = 10.0 ** -eps
    print(f"\neps = {eps}, gamma = {gamma}")
    print("   j      exact c_j              ancilla (re, im)")
    for j in np.flatnonzero(np.abs(v) > 10 * gamma):
        re, im = estimate_phase_parts(U, Q, int(j), j_ref, gamma, eps, "exact", abs(v[j]), full_circuit=True)
        print(f"  {j:04b}  {v[j].real:+.5f}{v[j].imag:+.5f}i     ({re:+.{eps}f}, {im:+.{eps}f})")

# the two-component method only yields sin of the phase difference
j1, j2 = [int(j) for j in np.flatnonzero(np.abs(v) > 0.1)[:2]]
d = np.angle(v[j1]) - np.angle(v[j2])
print(f"\nsin(theta_{j1} - theta_{j2}): relative_phase {np.sin(relative_phase(v, j1, j2)):+.6f}, exact {np.sin(d):+.6f}")
