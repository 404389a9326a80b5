"""
Multi-qubit Pauli rotations from one- and two-qubit gates
=========================================================

exp(i alpha P) for a weight-m string: basis changes map each factor to X,
a ladder of R gates folds the support down to two qubits, a two-qubit XX
rotation does the work, and the ladder is undone.  Two-qubit gates grow as
2(m - 2) + 1.
"""
import numpy as np

from mqite.decomposition import (block_count, build_unitary, decompose_rotation, expand_u2, gate_count,
                                 phase_distance, r_elementary_matrix, r_gate_matrix, rotation_matrix)
from mqite.pauli import parse_pauli

R = r_gate_matrix()
print("R =")
print(np.round(R, 3))
print(f"u3-CNOT-u3 circuit vs R, up to phase: {phase_distance(r_elementary_matrix(), R):.3f}")

print("\nlabel      1q  2q  blocks  deviation")
for lab in ["X", "ZZ", "XIY", "YYZX", "ZIXIY", "XYZXYZ", "YYYYYYYY"]:
    p = parse_pauli(lab)
    g = decompose_rotation(p, 0.7)
    dev = phase_distance(build_unitary(g, p.n), rotation_matrix(p, 0.7))
    g1, g2 = gate_count(g)
    print(f"{lab:9s} {g1:3d} {g2:3d} {block_count(g):5d}    {dev:.1e}")

g = expand_u2(decompose_rotation(parse_pauli("XYZ"), 0.7))
print("\nXYZ with the core expanded into CNOTs:")
for gate in g:
    print(f"  {gate.name:2s} {gate.qubits}  " + " ".join(f"{x:+.3f}" for x in gate.params))
