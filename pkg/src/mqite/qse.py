"""Quantum subspace expansion over saved per-sweep circuits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import Hamiltonian
from .simulator import apply_pauli, run_circuit


class SubspaceError(ValueError):
    pass


@dataclass
class SubspaceProblem:
    C: np.ndarray
    Heff: np.ndarray
    labels: list[float]


def apply_hamiltonian(state: np.ndarray, h: Hamiltonian) -> np.ndarray:
    out = h.constant * state
    for w, p in h.terms:
        out = out + w * apply_pauli(state, p)
    return out


def subspace_from_states(states: list[np.ndarray], h: Hamiltonian, labels=None) -> SubspaceProblem:
    if not states:
        raise SubspaceError("empty subspace")
    S = np.array(states)                      # rows are snapshot states
    HS = np.array([apply_hamiltonian(s, h) for s in states])
    C = S.conj() @ S.T
    Heff = S.conj() @ HS.T
    # symmetrize away round-off
    C = 0.5 * (C + C.conj().T)
    Heff = 0.5 * (Heff + Heff.conj().T)
    return SubspaceProblem(C, Heff, list(labels) if labels is not None else list(range(len(states))))


def snapshot_sweeps(n_sweeps: int, stride: int) -> list[int]:
    """Sweeps 0, stride, 2 stride, ... plus the final sweep."""
    if stride < 1:
        raise SubspaceError("stride must be >= 1")
    picks = list(range(0, n_sweeps, stride))
    if not picks or picks[-1] != n_sweeps - 1:
        picks.append(n_sweeps - 1)
    return picks


def build_subspace(record, h: Hamiltonian, stride: int = 1) -> SubspaceProblem:
    """Replay the saved circuit of every ``stride``-th sweep and fill C and Heff."""
    if not record.sweeps or record.circuit is None:
        raise SubspaceError("record has no saved sweeps")
    picks = snapshot_sweeps(len(record.sweeps), stride)
    states = [run_circuit(record.snapshot(s)) for s in picks]
    return subspace_from_states(states, h, [record.sweeps[s].tau for s in picks])


def solve_gev(p: SubspaceProblem, svd_cut: float = 1e-8) -> tuple[float, np.ndarray, int]:
    """Lowest eigenvalue of ``Heff c = E C c`` on the well-conditioned part of C.

    Returns ``(E, coefficients, rank)``.
    """
    lam, V = np.linalg.eigh(p.C)
    keep = lam >= svd_cut
    if not keep.any():
        raise SubspaceError(f"every overlap eigenvalue is below the cut {svd_cut}")
    X = V[:, keep] / np.sqrt(lam[keep])
    Hred = X.conj().T @ p.Heff @ X
    Hred = 0.5 * (Hred + Hred.conj().T)
    e, U = np.linalg.eigh(Hred)
    return float(e[0]), X @ U[:, 0], int(keep.sum())
