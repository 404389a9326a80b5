"""
Dense statevector engine.

States are plain complex numpy arrays of length ``2**n``; index ``j`` is the
computational basis state whose binary expansion (MSB = qubit 0) is ``j``.
Pauli rotations are applied from the Pauli action on basis states (an
index permutation and a phase vector), never by building matrices.
"""
from __future__ import annotations

import functools
import math
import struct
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .pauli import Hamiltonian, PauliString, basis_coefficients

MAX_QUBITS = 24
_CACHE_MAX_QUBITS = 14


class SimulatorError(ValueError):
    pass


@dataclass(frozen=True)
class Prep:
    """Initial-state preparation applied as the outermost unitary of a circuit.

    ``kind`` is one of ``zero``, ``basis`` (X on each qubit in ``qubits``),
    ``ghz+`` or ``ghz-`` (``(|0...0> +- |1...1>)/sqrt 2``).
    """

    kind: str = "zero"
    qubits: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("zero", "basis", "ghz+", "ghz-"):
            raise SimulatorError(f"unknown prep kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(sorted(set(int(q) for q in self.qubits))))
        if self.kind != "basis" and self.qubits:
            raise SimulatorError(f"prep {self.kind!r} takes no qubit list")

    @classmethod
    def parse(cls, spec: "str | Prep | dict | None") -> "Prep":
        """Accept ``"zero"``, ``"ghz+"``, ``"basis:2,5"`` or a dict."""
        if spec is None:
            return cls()
        if isinstance(spec, Prep):
            return spec
        if isinstance(spec, dict):
            return cls(spec.get("kind", "zero"), tuple(spec.get("qubits", ())))
        if spec.startswith("basis:"):
            body = spec.split(":", 1)[1]
            return cls("basis", tuple(int(q) for q in body.split(",") if q.strip()))
        return cls(spec)

    def mask(self, n: int) -> int:
        m = 0
        for q in self.qubits:
            if not 0 <= q < n:
                raise SimulatorError(f"prep qubit {q} out of range for {n} qubits")
            m |= 1 << (n - 1 - q)
        return m

    def to_dict(self) -> dict:
        return {"kind": self.kind, "qubits": list(self.qubits)}

    def __str__(self) -> str:
        return f"basis:{','.join(map(str, self.qubits))}" if self.kind == "basis" else self.kind


@dataclass
class Circuit:
    """``U = prep . L_last ... L_first``: layers in application order, prep applied last.

    Each layer is ``(y, P)`` standing for ``exp(i y P)``.  The prep sits on the
    far left of the operator product so that the computational-basis
    reference state of the evolution is always ``|0...0>``.
    """

    n: int
    prep: Prep = field(default_factory=Prep)
    layers: list[tuple[float, PauliString]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.layers)

    def copy(self) -> "Circuit":
        return Circuit(self.n, self.prep, list(self.layers))

    def tail(self, count: int) -> "Circuit":
        """Circuit made of the ``count`` earliest-added layers (the list suffix)."""
        return Circuit(self.n, self.prep, self.layers[len(self.layers) - count:] if count else [])

    def to_dict(self) -> dict:
        return {"n": self.n, "prep": self.prep.to_dict(),
                "layers": [[y, p.label] for y, p in self.layers]}

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        from .pauli import parse_pauli
        return cls(d["n"], Prep.parse(d.get("prep")), [(float(y), parse_pauli(lab)) for y, lab in d["layers"]])


def _check_n(n: int):
    if not 1 <= n <= MAX_QUBITS:
        raise SimulatorError(f"qubit count {n} outside 1..{MAX_QUBITS}")


def num_qubits(state: np.ndarray) -> int:
    n = int(state.shape[0]).bit_length() - 1
    if state.ndim != 1 or (1 << n) != state.shape[0]:
        raise SimulatorError(f"state length {state.shape} is not a power of two")
    return n


def _check_size(state: np.ndarray, n: int):
    if state.shape[0] != (1 << n):
        raise SimulatorError(f"size mismatch: state has {state.shape[0]} amplitudes, operator acts on {n} qubits")


@functools.lru_cache(maxsize=4096)
def _action(n: int, x: int, z: int, phase: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << n, dtype=np.int64)
    perm = idx ^ x
    # (P psi)[m] = c(m ^ x) psi[m ^ x]
    coef = basis_coefficients(PauliString(n, x, z, phase), perm)
    perm.setflags(write=False)
    coef.setflags(write=False)
    return perm, coef


def pauli_action(p: PauliString) -> tuple[np.ndarray, np.ndarray]:
    """``(perm, coef)`` with ``(P psi) = coef * psi[perm]``."""
    if p.n <= _CACHE_MAX_QUBITS:
        return _action(p.n, p.x, p.z, p.phase)
    return _action.__wrapped__(p.n, p.x, p.z, p.phase)


def apply_pauli(state: np.ndarray, p: PauliString) -> np.ndarray:
    """Return ``P psi`` as a new array."""
    _check_size(state, p.n)
    perm, coef = pauli_action(p)
    return coef * state[perm]


def init_state(n: int, prep: Prep | str | None = None) -> np.ndarray:
    _check_n(n)
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    return apply_prep(psi, Prep.parse(prep), n)


def apply_prep(state: np.ndarray, prep: Prep, n: int, dagger: bool = False) -> np.ndarray:
    """Apply the preparation unitary (or its inverse) to an arbitrary state."""
    _check_size(state, n)
    if prep.kind == "zero":
        return state
    if prep.kind == "basis":
        return state[np.arange(1 << n) ^ prep.mask(n)]
    # GHZ: H on qubit 0 (preceded by X for the minus sign), then CNOT 0 -> k
    top = 1 << (n - 1)
    rest = top - 1
    idx = np.arange(1 << n)
    fanout = np.where(idx & top, idx ^ rest, idx)  # CNOT cascade is an involutive permutation
    s = 1 / math.sqrt(2)
    if not dagger:
        if prep.kind == "ghz-":
            state = state[idx ^ top]
        a, b = state[:top].copy(), state[top:].copy()
        state = np.concatenate([s * (a + b), s * (a - b)])
        return state[fanout]
    state = state[fanout]
    a, b = state[:top].copy(), state[top:].copy()
    state = np.concatenate([s * (a + b), s * (a - b)])
    if prep.kind == "ghz-":
        state = state[idx ^ top]
    return state


def apply_pauli_rotation(state: np.ndarray, p: PauliString, y: float) -> np.ndarray:
    """``psi <- exp(i y P) psi = cos(y) psi + i sin(y) P psi``, in place."""
    _check_size(state, p.n)
    if not p.is_hermitian:
        raise SimulatorError(f"rotation generator {p} is not Hermitian")
    perm, coef = pauli_action(p)
    kick = (1j * math.sin(y)) * coef * state[perm]
    state *= math.cos(y)
    state += kick
    return state


def apply_circuit(state: np.ndarray, c: Circuit, dagger: bool = False) -> np.ndarray:
    """Apply ``U`` (or ``U^dagger``) to ``state`` in place where possible."""
    _check_size(state, c.n)
    if not dagger:
        for y, p in c.layers:
            apply_pauli_rotation(state, p, y)
        out = apply_prep(state, c.prep, c.n)
    else:
        out = apply_prep(state, c.prep, c.n, dagger=True)
        if out is not state:
            out = np.ascontiguousarray(out, dtype=complex)
        for y, p in reversed(c.layers):
            apply_pauli_rotation(out, p, -y)
    if out is not state:
        state[:] = out
    return state


def run_circuit(c: Circuit) -> np.ndarray:
    """``U|0...0>`` for a circuit."""
    psi = np.zeros(1 << c.n, dtype=complex)
    psi[0] = 1.0
    return apply_circuit(psi, c)


def prep_unitary(n: int, prep: Prep) -> np.ndarray:
    dim = 1 << n
    cols = [apply_prep(np.eye(dim, dtype=complex)[:, k].copy(), prep, n) for k in range(dim)]
    return np.array(cols).T


def expectation(state: np.ndarray, h: Hamiltonian) -> float:
    _check_size(state, h.n)
    total = h.constant * np.vdot(state, state)
    for w, p in h.terms:
        total += w * np.vdot(state, apply_pauli(state, p))
    if abs(total.imag) > 1e-10 * max(1.0, abs(total.real)):
        raise SimulatorError(f"expectation has imaginary part {total.imag:.3e}")
    return float(total.real)


def inner(a: np.ndarray, b: np.ndarray) -> complex:
    """``<a|b>``."""
    if a.shape != b.shape:
        raise SimulatorError(f"size mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return abs(inner(a, b)) ** 2


def sample(state: np.ndarray, shots: int, rng: np.random.Generator) -> dict[int, int]:
    """Draw ``shots`` computational-basis outcomes; returns ``{index: count}``."""
    if shots < 1:
        raise SimulatorError("shot count must be positive")
    probs = np.abs(state) ** 2
    norm = probs.sum()
    if abs(norm - 1) > 1e-6:
        raise SimulatorError(f"state is not normalised (norm^2 = {norm:.8f})")
    counts = rng.multinomial(shots, probs / norm)
    nz = np.flatnonzero(counts)
    return {int(j): int(counts[j]) for j in nz}


def make_rng(seed: int | None) -> np.random.Generator:
    """Counter-based generator so every run is replayable from its seed."""
    return np.random.Generator(np.random.Philox(seed))


def dump_state(state: np.ndarray, path) -> None:
    """Debug dump: uint32 n, then little-endian interleaved (re, im) doubles."""
    n = num_qubits(state)
    with open(path, "wb") as f:
        f.write(struct.pack("<I", n))
        f.write(np.ascontiguousarray(state, dtype="<c16").tobytes())


def load_state(path) -> np.ndarray:
    with open(path, "rb") as f:
        (n,) = struct.unpack("<I", f.read(4))
        data = np.frombuffer(f.read(), dtype="<c16")
    if data.shape[0] != 1 << n:
        raise SimulatorError("truncated state dump")
    return data.astype(complex)


def circuit_from_layers(n: int, layers: Iterable[tuple[float, PauliString]], prep: Prep | None = None) -> Circuit:
    return Circuit(n, prep or Prep(), list(layers))
