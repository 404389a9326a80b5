import numpy as np
import pytest

from mqite.ite import exact_ground, reachable_sector
from mqite.pauli import HamiltonianFormatError
from mqite.problems import (ProblemError, ProblemSpec, build_problem, load_hamiltonian, maxcut,
                            maxcut_brute_force, nuclear_manifest, nuclear_pshell, random_klocal, save_hamiltonian,
                            tfim, tfim_free_fermion, total_m, validation_hamiltonian, write_edges_csv)
from mqite.simulator import Prep


def degrees(n, edges):
    d = np.zeros(n, dtype=int)
    for a, b, _ in edges:
        d[a] += 1
        d[b] += 1
    return d


def test_maxcut_k4():
    edges, h, _ = maxcut(4, 3, 1.0, seed=2)
    assert sorted((a, b) for a, b, _ in edges) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert len(h) == 6


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_maxcut_ten_nodes(seed):
    edges, h, _ = maxcut(10, 3, 1.0, seed)
    assert len(edges) == 15
    assert set(degrees(10, edges)) == {3}
    assert all(0 <= w <= 1 for _, _, w in edges)
    assert h.all_commute()
    assert all(set(p.label) <= {"I", "X"} and p.weight == 2 for p in h.paulis)


def test_maxcut_errors():
    with pytest.raises(ProblemError):
        maxcut(5, 3)
    with pytest.raises(ProblemError):
        maxcut(3, 3)


@pytest.mark.parametrize("n, seed", [(6, 0), (8, 3), (10, 0)])
def test_maxcut_brute_force_matches_exact(n, seed):
    edges, h, _ = maxcut(n, 3, 1.0, seed)
    assert exact_ground(h).energy == pytest.approx(maxcut_brute_force(n, edges), abs=1e-10)


def test_maxcut_deterministic():
    a = maxcut(10, 3, 1.0, 7)
    b = maxcut(10, 3, 1.0, 7)
    assert a[0] == b[0] and a[1].terms == b[1].terms


def test_tfim_small_cases():
    h = tfim(2, 1.0, 0.0)
    assert [(w, p.label) for w, p in h.terms] == [(-1.0, "ZZ")]
    assert exact_ground(h).energy == pytest.approx(-1.0)
    g = exact_ground(tfim(3, 1.0, 0.0))
    assert g.degeneracy == 2
    h = tfim(10)
    assert len(h) == 19
    assert [p.label for p in h.paulis][:2] == ["ZZIIIIIIII", "IZZIIIIIII"]
    with pytest.raises(ProblemError):
        tfim(1)


@pytest.mark.parametrize("n, hx", [(4, 1.0), (6, 0.5), (8, 1.0), (10, 1.0)])
def test_tfim_free_fermion(n, hx):
    assert exact_ground(tfim(n, 1.0, hx)).energy == pytest.approx(tfim_free_fermion(n, 1.0, hx), abs=1e-9)


def test_validation_instance():
    h = validation_hamiltonian()
    assert h.n == 6 and len(h) == 6
    assert all(p.weight == 3 and set(p.label) <= set("IXY") for p in h.paulis)
    assert all(0 < w <= 1 for w in h.weights)
    assert round(exact_ground(h).energy, 3) == -3.118


def test_random_klocal():
    h = random_klocal(5, 5, 4, "XY", seed=1)
    assert all("I" not in p.label for p in h.paulis)
    d = random_klocal(4, 1, 4, "Z", seed=2)
    m = d.matrix()
    assert np.allclose(m, np.diag(np.diag(m)))
    h = random_klocal(6, 3, 6, "XY", seed=3)
    assert h.n == 6 and len(h) == 6 and len({p.label for p in h.paulis}) == 6
    assert all(p.weight == 3 for p in h.paulis) and all(0 < w <= 1 for w in h.weights)
    assert random_klocal(6, 3, 6, "XY", seed=3).terms == h.terms
    with pytest.raises(ProblemError):
        random_klocal(2, 1, 10, "X")
    with pytest.raises(ProblemError):
        random_klocal(3, 1, 1, "Q")


def test_nuclear_table():
    h, presets = nuclear_pshell()
    assert h.n == 6 and len(h) == 84
    man = nuclear_manifest()["pshell_two_neutron.txt"]
    assert man["terms"] == 84 and man["shortfall"] == 0
    rows = {(round(w, 6), p.label) for w, p in h.terms}
    for w, lab in [(-0.446591, "YXYZZX"), (0.446591, "YYXZZX"), (-0.18861, "YZXYXI"),
                   (0.108894, "IXXYZY"), (-0.435575, "IXZZXZ"), (0.213531, "IIYYYY"), (-0.213531, "IIXYYX")]:
        assert (w, lab) in rows
    assert np.allclose(h.matrix(), h.matrix().conj().T)


def test_nuclear_presets_land_in_their_sectors():
    h, presets = nuclear_pshell()
    for name, want in [("M0", 0.0), ("M2", 2.0)]:
        mask = Prep("basis", presets[name]).mask(6)
        assert total_m(mask) == want
        sector = reachable_sector(h, mask)
        assert {total_m(int(j)) for j in sector} == {want}
        assert {bin(int(j)).count("1") for j in sector} == {2}


def test_hamiltonian_files(tmp_path):
    h = validation_hamiltonian()
    save_hamiltonian(h, tmp_path / "h.txt")
    assert load_hamiltonian(tmp_path / "h.txt").terms == h.terms
    (tmp_path / "empty.txt").write_text("# nothing\n")
    with pytest.raises(HamiltonianFormatError):
        load_hamiltonian(tmp_path / "empty.txt")
    edges, _, _ = maxcut(4, 3)
    write_edges_csv(edges, tmp_path / "e.csv")
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "t,q,weight" and len(lines) == 7


def test_problem_specs():
    p = build_problem(ProblemSpec.from_dict({"kind": "maxcut", "n": 6, "params": {"seed": 1}}))
    assert p.edges and p.prep == "zero"
    p = build_problem(ProblemSpec.from_dict({"kind": "nuclear-pshell", "params": {"preset": "M2"}}))
    assert p.prep == "basis:2,3"
    with pytest.raises(ProblemError):
        ProblemSpec.from_dict({"kind": "maxcut", "n": 6, "params": {"degree": 3}})
    with pytest.raises(ProblemError):
        ProblemSpec.from_dict({"kind": "lattice"})
    with pytest.raises(ProblemError):
        ProblemSpec.from_dict({"kind": "tfim", "n": 4, "extra": 1})
    spec = ProblemSpec("tfim", 4, {"h_x": 0.5})
    assert ProblemSpec.from_dict(spec.to_dict()) == spec
