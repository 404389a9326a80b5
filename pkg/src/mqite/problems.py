"""Benchmark Hamiltonians: Max-Cut, TFIM, the 6-qubit validation instance, random k-local
strings and the two-neutron p-shell table."""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .pauli import Hamiltonian, PauliString, parse_hamiltonian
from .simulator import make_rng

MAX_REJECTIONS = 1000

VALIDATION_TERMS = [(0.961, "XXYIII"), (0.853, "YIYIIY"), (0.137, "YIXYII"),
                    (0.980, "XIIIXY"), (0.712, "YIIIYX"), (0.962, "XIYYII")]

# occupied qubits (0-based) for the two-neutron starting configurations
NUCLEAR_PRESETS = {"M0": (2, 5), "M2": (2, 3)}
# m_j of the single-particle state on each qubit: p1/2 (+1/2, -1/2), p3/2 (+3/2, +1/2, -1/2, -3/2)
NUCLEAR_ORBITAL_M = (0.5, -0.5, 1.5, 0.5, -0.5, -1.5)


class ProblemError(ValueError):
    pass


# -- Max-Cut --------------------------------------------------------------

def random_regular_graph(n: int, k: int, rng: np.random.Generator) -> list[tuple[int, int]] | None:
    """One pairing attempt of the configuration model; None if it produced a loop or multi-edge."""
    stubs = np.repeat(np.arange(n), k)
    rng.shuffle(stubs)
    edges = set()
    for a, b in stubs.reshape(-1, 2):
        a, b = int(min(a, b)), int(max(a, b))
        if a == b or (a, b) in edges:
            return None
        edges.add((a, b))
    return sorted(edges)


def maxcut(n: int, k: int = 3, J: float = 1.0, seed: int = 0) -> tuple[list[tuple[int, int, float]], Hamiltonian, int]:
    """Random k-regular weighted graph and ``H = sum J_tq X_t X_q``.

    Returns ``(edges, H, subseed)``; ``subseed`` counts internal reseeds after
    the rejection cap, so the instance is reproducible from ``(seed, subseed)``.
    """
    if k >= n or k < 1:
        raise ProblemError(f"need 1 <= k < n, got k={k}, n={n}")
    if (n * k) % 2:
        raise ProblemError(f"n*k must be even for a {k}-regular graph on {n} vertices")
    subseed = 0
    while True:
        rng = make_rng([seed, subseed])
        for _ in range(MAX_REJECTIONS):
            edges = random_regular_graph(n, k, rng)
            if edges is not None:
                break
        else:
            subseed += 1
            continue
        break
    weights = rng.uniform(0.0, J, size=len(edges))
    wedges = [(a, b, float(w)) for (a, b), w in zip(edges, weights)]
    terms = []
    for a, b, w in wedges:
        terms.append((w, PauliString(n, (1 << (n - 1 - a)) | (1 << (n - 1 - b)), 0)))
    return wedges, Hamiltonian(n, tuple(terms)), subseed


def maxcut_brute_force(n: int, edges: list[tuple[int, int, float]]) -> float:
    """min over spins s in {-1, 1}^n of sum J_tq s_t s_q."""
    s = 1 - 2 * ((np.arange(1 << n)[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1)
    cost = np.zeros(1 << n)
    for a, b, w in edges:
        cost += w * s[:, a] * s[:, b]
    return float(cost.min())


# -- TFIM -----------------------------------------------------------------

def tfim(n: int, J: float = 1.0, h_x: float = 1.0) -> Hamiltonian:
    """Open chain ``-J sum Z_t Z_t+1 + h_x sum X_t``; ZZ terms first, then X terms."""
    if n < 2:
        raise ProblemError("TFIM needs at least two sites")
    terms = []
    for t in range(n - 1):
        terms.append((-J, PauliString(n, 0, (1 << (n - 1 - t)) | (1 << (n - 2 - t)))))
    if h_x:
        for t in range(n):
            terms.append((h_x, PauliString(n, 1 << (n - 1 - t), 0)))
    return Hamiltonian(n, tuple(terms))


def tfim_free_fermion(n: int, J: float = 1.0, h_x: float = 1.0) -> float:
    """Ground energy of the open TFIM chain from its Majorana quadratic form."""
    A = np.zeros((2 * n, 2 * n))
    for t in range(n):
        A[2 * t, 2 * t + 1] = -2 * h_x
    for t in range(n - 1):
        A[2 * t + 1, 2 * t + 2] = 2 * J
    A = A - A.T
    ev = np.linalg.eigvalsh(1j * A)
    return float(-0.5 * ev[ev > 0].sum())


# -- fixed and random instances ------------------------------------------

def validation_hamiltonian() -> Hamiltonian:
    return Hamiltonian.from_labels(VALIDATION_TERMS)


def random_klocal(n: int, k: int, n_terms: int, op_set: str = "XY", seed: int = 0) -> Hamiltonian:
    """``n_terms`` distinct strings with exactly ``k`` factors from ``op_set``; weights in (0, 1]."""
    if not 1 <= k <= n:
        raise ProblemError(f"need 1 <= k <= n, got k={k}, n={n}")
    if not op_set or set(op_set) - set("XYZ"):
        raise ProblemError(f"op_set must be drawn from XYZ, got {op_set!r}")
    rng = make_rng(seed)
    seen, terms = set(), []
    attempts = 0
    while len(terms) < n_terms:
        attempts += 1
        if attempts > MAX_REJECTIONS * max(1, n_terms):
            raise ProblemError("could not draw enough distinct strings")
        pos = rng.choice(n, size=k, replace=False)
        chars = ["I"] * n
        for q in pos:
            chars[int(q)] = op_set[int(rng.integers(len(op_set)))]
        label = "".join(chars)
        if label in seen:
            continue
        seen.add(label)
        terms.append((float(1.0 - rng.random()), label))
    return Hamiltonian.from_labels(terms)


# -- nuclear p-shell ------------------------------------------------------

def _data_path(name: str):
    return resources.files("mqite").joinpath("data", name)


def nuclear_manifest() -> dict:
    return json.loads(_data_path("manifest.json").read_text())


def nuclear_pshell(verify: bool = True) -> tuple[Hamiltonian, dict[str, tuple[int, int]]]:
    """The 84-term two-neutron Hamiltonian and its occupation presets."""
    raw = _data_path("pshell_two_neutron.txt").read_bytes()
    if verify:
        man = nuclear_manifest()["pshell_two_neutron.txt"]
        digest = hashlib.sha256(raw).hexdigest()
        if digest != man["sha256"]:
            raise ProblemError(f"checksum mismatch for bundled p-shell data: {digest}")
    h = parse_hamiltonian(raw.decode())
    return h, dict(NUCLEAR_PRESETS)


def occupation_prep(qubits) -> str:
    return "basis:" + ",".join(str(int(q)) for q in qubits)


def total_m(bits: int, n: int = 6) -> float:
    """Sum of single-particle m over occupied qubits (qubit 0 is the MSB)."""
    return sum(NUCLEAR_ORBITAL_M[q] for q in range(n) if bits >> (n - 1 - q) & 1)


# -- files ----------------------------------------------------------------

def load_hamiltonian(path) -> Hamiltonian:
    return parse_hamiltonian(Path(path).read_text())


def save_hamiltonian(h: Hamiltonian, path) -> None:
    Path(path).write_text(h.to_text())


def write_edges_csv(edges, path) -> None:
    lines = ["t,q,weight"] + [f"{a},{b},{w!r}" for a, b, w in edges]
    Path(path).write_text("\n".join(lines) + "\n")


# -- problem specs --------------------------------------------------------

_KIND_PARAMS = {
    "maxcut": {"k", "J", "seed"},
    "tfim": {"J", "h_x"},
    "validation": set(),
    "random-klocal": {"k", "n_terms", "op_set", "seed"},
    "file": {"path"},
    "nuclear-pshell": {"occupied", "preset"},
}


@dataclass
class ProblemSpec:
    kind: str
    n: int | None = None
    params: dict = field(default_factory=dict)
    prep: str | None = None

    def validate(self) -> "ProblemSpec":
        if self.kind not in _KIND_PARAMS:
            raise ProblemError(f"unknown problem kind {self.kind!r}; expected one of {sorted(_KIND_PARAMS)}")
        unknown = sorted(set(self.params) - _KIND_PARAMS[self.kind])
        if unknown:
            raise ProblemError(f"unknown parameters for {self.kind}: {', '.join(unknown)}")
        if self.kind in ("maxcut", "tfim", "random-klocal") and not self.n:
            raise ProblemError(f"{self.kind} needs n")
        return self

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemSpec":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ProblemError(f"unknown problem keys: {', '.join(unknown)}")
        if "kind" not in d:
            raise ProblemError("problem needs a 'kind'")
        return cls(**d).validate()

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class Problem:
    spec: ProblemSpec
    hamiltonian: Hamiltonian
    prep: str
    edges: list | None = None
    info: dict = field(default_factory=dict)


def build_problem(spec: ProblemSpec) -> Problem:
    spec.validate()
    p = spec.params
    if spec.kind == "maxcut":
        edges, h, sub = maxcut(spec.n, p.get("k", 3), p.get("J", 1.0), p.get("seed", 0))
        return Problem(spec, h, spec.prep or "zero", edges, {"subseed": sub})
    if spec.kind == "tfim":
        return Problem(spec, tfim(spec.n, p.get("J", 1.0), p.get("h_x", 1.0)), spec.prep or "zero")
    if spec.kind == "validation":
        return Problem(spec, validation_hamiltonian(), spec.prep or "zero")
    if spec.kind == "random-klocal":
        h = random_klocal(spec.n, p.get("k", 3), p.get("n_terms", spec.n), p.get("op_set", "XY"), p.get("seed", 0))
        return Problem(spec, h, spec.prep or "zero")
    if spec.kind == "file":
        if "path" not in p:
            raise ProblemError("file problems need params.path")
        return Problem(spec, load_hamiltonian(p["path"]), spec.prep or "zero")
    h, presets = nuclear_pshell()
    if "occupied" in p:
        occ = tuple(p["occupied"])
    else:
        name = p.get("preset", "M0")
        if name not in presets:
            raise ProblemError(f"unknown nuclear preset {name!r}; expected one of {sorted(presets)}")
        occ = presets[name]
    prep = spec.prep or occupation_prep(occ)
    return Problem(spec, h, prep, info={"occupied": list(occ)})
