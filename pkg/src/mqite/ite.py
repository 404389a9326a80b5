"""Exact trotterized imaginary-time evolution and dense diagonalization references."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .pauli import Hamiltonian, PauliString
from .simulator import Prep, apply_pauli, expectation, init_state

MAX_EXACT_QUBITS = 12


class NumericalError(RuntimeError):
    pass


def sweep_count(delta: float, T: float) -> int:
    """Number of full sweeps over the Hamiltonian so that tau = sweeps * delta reaches T."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    if T < 0:
        raise ValueError("T must be non-negative")
    return int(round(T / delta))


def apply_imaginary_term(state: np.ndarray, q: PauliString, dk: float) -> np.ndarray:
    """``psi <- exp(-dk Q) psi / norm`` using ``Q^2 = 1``."""
    if not math.isfinite(dk):
        raise NumericalError(f"non-finite time step {dk}")
    out = math.cosh(dk) * state - math.sinh(dk) * apply_pauli(state, q)
    norm = np.linalg.norm(out)
    if norm < 1e-12:
        raise NumericalError(f"state annihilated by exp(-{dk} {q})")
    return out / norm


@dataclass
class ITETrajectory:
    taus: list[float] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)
    states: list[np.ndarray] = field(default_factory=list)
    term_steps: list[int] = field(default_factory=list)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_energy(self) -> float:
        return self.energies[-1]


def ite_sweep(state: np.ndarray, h: Hamiltonian, delta: float, second_order: bool = False) -> np.ndarray:
    if not second_order:
        for w, p in h.terms:
            state = apply_imaginary_term(state, p, delta * w)
        return state
    for w, p in h.terms:
        state = apply_imaginary_term(state, p, 0.5 * delta * w)
    for w, p in reversed(h.terms):
        state = apply_imaginary_term(state, p, 0.5 * delta * w)
    return state


def run_ite(h: Hamiltonian, delta: float, T: float, prep: Prep | str | None = None,
            second_order: bool = False, keep_states: bool = True) -> ITETrajectory:
    """Trotterized ITE; one record per sweep, starting with the initial state at tau = 0."""
    sweeps = sweep_count(delta, T)
    psi = init_state(h.n, prep)
    traj = ITETrajectory()

    def record(s):
        traj.taus.append(round(s * delta, 12))
        traj.energies.append(expectation(psi, h))
        traj.term_steps.append(s * len(h))
        if keep_states or s == sweeps:
            traj.states.append(psi.copy())

    record(0)
    for s in range(1, sweeps + 1):
        psi = ite_sweep(psi, h, delta, second_order)
        record(s)
    return traj


def reachable_sector(h: Hamiltonian, start: int, tol: float = 1e-12) -> np.ndarray:
    """Basis indices connected to ``start`` through nonzero matrix elements of ``H``.

    This is the symmetry sector of ``start`` (for example fixed particle
    number and angular-momentum projection) without naming the symmetry.
    """
    from .pauli import apply_to_basis

    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for j in frontier:
            col: dict[int, complex] = {}
            for w, p in h.terms:
                k, c = apply_to_basis(p, j)
                col[k] = col.get(k, 0) + w * c
            for k, v in col.items():
                if abs(v) > tol and k not in seen:
                    seen.add(k)
                    nxt.append(k)
        frontier = nxt
    return np.array(sorted(seen), dtype=int)


@dataclass
class GroundState:
    energy: float
    gap: float
    vector: np.ndarray
    degeneracy: int
    manifold: np.ndarray  # columns spanning the lowest eigenspace
    sector: np.ndarray | None = None

    def overlap(self, state: np.ndarray) -> float:
        """Projector overlap with the (possibly degenerate) ground manifold."""
        return float(np.sum(np.abs(self.manifold.conj().T @ state) ** 2))


def exact_ground(h: Hamiltonian, sector: Callable[[int], bool] | Iterable[int] | None = None,
                 degeneracy_tol: float = 1e-8) -> GroundState:
    """Lowest eigenpair of ``H``, optionally restricted to a set of basis states.

    ``sector`` is either a predicate on basis indices or an explicit index list.
    Vectors are returned in the full ``2^n`` space.
    """
    if h.n > MAX_EXACT_QUBITS:
        raise ValueError(f"exact diagonalization limited to {MAX_EXACT_QUBITS} qubits, got {h.n}")
    m = h.matrix()
    dim = 1 << h.n
    if sector is None:
        idx = np.arange(dim)
    elif callable(sector):
        idx = np.array([j for j in range(dim) if sector(j)], dtype=int)
    else:
        idx = np.array(sorted(set(int(j) for j in sector)), dtype=int)
    if idx.size == 0:
        raise ValueError("empty sector")
    sub = m[np.ix_(idx, idx)]
    evals, evecs = np.linalg.eigh(sub)
    e0 = float(evals[0])
    deg = int(np.sum(evals < e0 + degeneracy_tol))
    gap = float(evals[deg] - e0) if deg < len(evals) else 0.0
    full = np.zeros((dim, deg), dtype=complex)
    full[idx, :] = evecs[:, :deg]
    return GroundState(e0, gap, full[:, 0].copy(), deg, full, None if sector is None else idx)


def energy_variance(state: np.ndarray, h: Hamiltonian) -> float:
    """<H^2> - <H>^2 via ||H psi||^2."""
    hpsi = h.constant * state
    for w, p in h.terms:
        hpsi = hpsi + w * apply_pauli(state, p)
    e = float(np.vdot(state, hpsi).real)
    return max(float(np.vdot(hpsi, hpsi).real) - e * e, 0.0)
