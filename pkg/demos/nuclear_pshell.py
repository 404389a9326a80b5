"""
Two neutrons in the p shell
===========================

84 Pauli strings on 6 qubits.  Qubits 0-1 hold the p1/2 orbitals
(m = +1/2, -1/2) and qubits 2-5 the p3/2 orbitals (m = +3/2 ... -3/2).
The Hamiltonian conserves particle number and total M, so a two-bit starting
configuration fixes the sector the evolution stays in.
"""
from mqite import MQITEConfig, run_mqite
from mqite.ite import exact_ground, reachable_sector
from mqite.pauli import bits
from mqite.problems import nuclear_pshell, occupation_prep, total_m
from mqite.simulator import Prep

h, presets = nuclear_pshell()
print(f"{len(h)} terms on {h.n} qubits")

for name, occ in sorted(presets.items()):
    prep = Prep.parse(occupation_prep(occ))
    sector = reachable_sector(h, prep.mask(h.n))
    gs = exact_ground(h, sector)
    print(f"\n{name}: start |{bits(prep.mask(h.n), 6)}>, M = {total_m(prep.mask(h.n)):+.0f}, "
          f"sector dim {len(sector)}, exact E = {gs.energy:.4f} MeV")
    rec = run_mqite(h, MQITEConfig(delta=0.05, T=2.0, epsilon=3, eta_cap=36, mode="exact",
                                   prep=str(prep)))
    for s in rec.sweeps[::8]:
        print(f"  tau {s.tau:4.2f}  E {s.energy:8.4f}  rel_err {s.rel_error:7.4f}  eta {s.eta}")
    print(f"  final E {rec.final_energy:.4f}  largest eta {rec.eta_max}")
