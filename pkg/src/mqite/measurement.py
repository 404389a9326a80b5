"""
Estimating the components ``c_j = <j| U^dag Q U |0>``.

Amplitudes come from sampling (``|c_j| = sqrt(n_j / chi)``) or from rounded
statevector readout.  Real and imaginary parts come from an ancilla circuit
that interferes ``c_j`` with a small reference amplitude ``sin(gamma)`` placed
on an unoccupied bitstring ``j_ref``:

    Ry(2 gamma) on a, X on a, U on r, Q controlled on a=1, U^dag on r,
    P_{0 j_ref} controlled on a=0, then H (imaginary part) or S.H (real part)
    on a, and T_{j_ref j} on r.

The probability of (a=0, r=j_ref) is

    imaginary part:  m = ((sin g - cos g * im)^2 + cos^2 g * re^2) / 4
    real part:       m = ((sin g - cos g * re)^2 + cos^2 g * im^2) / 4

so both parts invert as ``(sin^2 g + cos^2 g |c_j|^2 - 4 m) / sin(2 g)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliString, x_string
from .simulator import Circuit, apply_circuit, apply_pauli, apply_pauli_rotation, run_circuit, sample

log = logging.getLogger(__name__)


class MeasurementError(ValueError):
    pass


@dataclass
class Component:
    j: int
    amp: float
    re: float
    im: float


@dataclass
class ComponentTable:
    """Retained components, sorted by amplitude (descending) then bitstring."""

    entries: list[Component]
    epsilon: int
    eta_cap: int
    chi: int | None
    mode: str
    c0: float = 0.0
    observed: int = 0        # distinct bitstrings seen before the cap
    j_ref: int | None = None
    inconsistent: int = 0    # components failing the re^2 + im^2 ~ amp^2 check

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def amps(self) -> dict[int, float]:
        return {c.j: c.amp for c in self.entries}

    @property
    def gate_components(self) -> list[Component]:
        """Components that become rotations (j = 0 excluded)."""
        return [c for c in self.entries if c.j != 0]

    def delta_star(self) -> float:
        return delta_star(self)


def delta_star(table: ComponentTable) -> float:
    """Largest minus second-largest amplitude; 1 for an empty table."""
    if not table.entries:
        return 1.0
    a1 = table.entries[0].amp
    a2 = table.entries[1].amp if len(table.entries) > 1 else 0.0
    return a1 - a2


def sorted_components(amps: dict[int, float]) -> list[int]:
    return sorted(amps, key=lambda j: (-amps[j], j))


def select_dominant(amps: dict[int, float], eta_cap: int) -> list[int]:
    """Up to ``eta_cap`` largest components (ties by ascending j), then drop j = 0.

    ``j = 0`` counts against the cap but is not returned: it feeds n_k, not a gate.
    """
    if eta_cap < 1:
        raise MeasurementError("eta_cap must be at least 1")
    return [j for j in sorted_components(amps)[:eta_cap] if j != 0]


def amplitudes_from_vector(v: np.ndarray, epsilon: int) -> dict[int, float]:
    """Rounded ``|c_j|``; components that round to zero are dropped."""
    a = np.round(np.abs(v), epsilon)
    nz = np.flatnonzero(a)
    return {int(j): float(a[j]) for j in nz}


def amplitudes_from_shots(v: np.ndarray, chi: int, epsilon: int | None,
                          rng: np.random.Generator) -> tuple[dict[int, float], dict[int, int]]:
    """``|c_j| = sqrt(n_j / chi)`` from ``chi`` samples of ``v``; also returns the counts."""
    counts = sample(v, chi, rng)
    amps = {}
    for j, nj in counts.items():
        a = math.sqrt(nj / chi)
        if epsilon is not None:
            a = round(a, epsilon)
        if a > 0:
            amps[j] = a
    return amps, counts


def component_vector(U: Circuit, Q: PauliString) -> np.ndarray:
    """``U^dag Q U |0>`` by replaying the circuit."""
    psi = run_circuit(U)
    psi = apply_pauli(psi, Q)
    return apply_circuit(psi, U, dagger=True)


def estimate_amplitudes(U: Circuit, Q: PauliString, chi: int, epsilon: int, mode: str,
                        rng: np.random.Generator | None = None) -> dict[int, float]:
    v = component_vector(U, Q)
    if mode == "exact":
        return amplitudes_from_vector(v, epsilon)
    if mode == "shot":
        if rng is None:
            raise MeasurementError("shot mode needs a random generator")
        return amplitudes_from_shots(v, chi, epsilon, rng)[0]
    raise MeasurementError(f"unknown mode {mode!r}")


def choose_j_ref(observed, n: int) -> int:
    """Smallest nonzero bitstring not in ``observed``."""
    obs = set(int(j) for j in observed)
    for j in range(1, 1 << n):
        if j not in obs:
            return j
    raise MeasurementError("every nonzero bitstring is occupied; no phase reference available")


def t_gate(t: int, s: int, n: int) -> tuple[float, PauliString]:
    """``T_ts = exp(i pi/4 P_ts)`` with ``P_ts |t> = |s>``."""
    if t == s:
        raise MeasurementError("T gate needs two distinct bitstrings")
    return math.pi / 4, x_string(t, s, n)


def invert_phase(m: float, amp: float, gamma: float) -> float:
    """Recover one component part from the ancilla probability ``m``."""
    s, c = math.sin(gamma), math.cos(gamma)
    return (s * s + c * c * amp * amp - 4 * m) / math.sin(2 * gamma)


def phase_probability(v: np.ndarray, j: int, j_ref: int, gamma: float, part: str) -> float:
    """Probability of (ancilla 0, register j_ref), evaluated from ``v`` directly."""
    s, c = math.sin(gamma), math.cos(gamma)
    cj, cref = complex(v[j]), complex(v[j_ref])
    if part == "imag":
        amp = (s + c * cref + 1j * c * cj) / 2
    elif part == "real":
        amp = (s + 1j * c * cref - c * cj) / 2
    else:
        raise MeasurementError(f"part must be 'real' or 'imag', got {part!r}")
    return abs(amp) ** 2


def phase_circuit_state(U: Circuit, Q: PauliString, j: int, j_ref: int, gamma: float,
                        part: str) -> np.ndarray:
    """Full (n+1)-qubit statevector of the ancilla circuit; the ancilla is the top bit."""
    n = U.n
    if part not in ("real", "imag"):
        raise MeasurementError(f"part must be 'real' or 'imag', got {part!r}")
    zero = np.zeros(1 << n, dtype=complex)
    zero[0] = 1.0
    # Ry(2 gamma) then X on the ancilla
    a0, a1 = math.sin(gamma) * zero, math.cos(gamma) * zero.copy()
    a0, a1 = apply_circuit(a0, U), apply_circuit(a1, U)
    a1 = apply_pauli(a1, Q)                         # controlled on ancilla = 1
    a0, a1 = apply_circuit(a0, U, dagger=True), apply_circuit(a1, U, dagger=True)
    if j_ref != 0:
        a0 = apply_pauli(a0, x_string(0, j_ref, n))  # controlled on ancilla = 0
    if part == "real":
        a1 = 1j * a1                                # S on the ancilla
    r = 1 / math.sqrt(2)
    a0, a1 = r * (a0 + a1), r * (a0 - a1)           # H on the ancilla
    y, P = t_gate(j_ref, j, n)
    apply_pauli_rotation(a0, P, y)
    apply_pauli_rotation(a1, P, y)
    return np.concatenate([a0, a1])


def estimate_phase_parts(U: Circuit | None, Q: PauliString | None, j: int, j_ref: int, gamma: float,
                         epsilon: int | None, mode: str, amp: float, v: np.ndarray | None = None,
                         rng: np.random.Generator | None = None, shots: int | None = None,
                         m_digits: int | None = None, full_circuit: bool = False) -> tuple[float, float]:
    """``(re, im)`` of ``c_j`` from the two ancilla circuits.

    ``mode='exact'`` reads ``m`` from the circuit statevector (optionally rounded
    to ``m_digits``); ``mode='shot'`` estimates it from ``shots`` samples.
    The results are rounded to ``epsilon`` digits.  ``amp`` must be on the same
    footing as ``m``; an amplitude estimated from separate shots swamps the
    O(gamma) signal.
    """
    if not gamma > 0:
        raise MeasurementError("gamma must be positive")
    if v is None and not full_circuit:
        v = component_vector(U, Q)
    parts = []
    for part in ("real", "imag"):
        if full_circuit:
            state = phase_circuit_state(U, Q, j, j_ref, gamma, part)
            m = abs(state[j_ref]) ** 2
        else:
            m = phase_probability(v, j, j_ref, gamma, part)
        if mode == "shot":
            if rng is None or not shots:
                raise MeasurementError("shot-mode phase estimation needs rng and shots")
            m = rng.binomial(shots, min(max(m, 0.0), 1.0)) / shots
        elif mode != "exact":
            raise MeasurementError(f"unknown mode {mode!r}")
        if m_digits is not None:
            m = round(m, m_digits)
        x = invert_phase(m, amp, gamma)
        parts.append(round(x, epsilon) if epsilon is not None else x)
    return parts[0], parts[1]


def relative_phase(v: np.ndarray, j1: int, j2: int, amps: dict[int, float] | None = None,
                   epsilon: int | None = None) -> float:
    """``theta_1 - theta_2`` on the [-pi/2, pi/2] branch, from ``T_{j1 j2}`` applied to ``v``."""
    n = int(v.shape[0]).bit_length() - 1
    a1 = amps[j1] if amps else abs(v[j1])
    a2 = amps[j2] if amps else abs(v[j2])
    floor = 10.0 ** -epsilon if epsilon is not None else 1e-12
    if 2 * a1 * a2 < floor:
        raise MeasurementError("components too small for the relative-phase method")
    y, P = t_gate(j1, j2, n)
    w = apply_pauli_rotation(v.copy(), P, y)
    m = abs(w[j1]) ** 2
    s = (2 * m - a1 * a1 - a2 * a2) / (2 * a1 * a2)
    return math.asin(min(1.0, max(-1.0, s)))


def build_table(v: np.ndarray, n: int, epsilon: int, eta_cap: int, mode: str = "exact",
                chi: int | None = None, rng: np.random.Generator | None = None,
                phase_method: str = "ancilla", phase_shots: int | None = None,
                m_digits: int | None = None) -> ComponentTable:
    """Component table for one term step from the exact vector ``v = U^dag Q U |0>``.

    Exact mode rounds amplitudes and parts to ``epsilon`` digits.  Hybrid mode
    does the same but keeps only bitstrings observed in ``chi`` samples.  Shot mode
    estimates amplitudes from ``chi`` samples; phases come from the ancilla
    circuits (exact probabilities unless ``phase_shots`` is given) and are
    attached to the sampled magnitudes.
    """
    gamma = 10.0 ** -epsilon
    counts = None
    if mode == "exact":
        amps = amplitudes_from_vector(v, epsilon)
    elif mode == "shot":
        if chi is None or rng is None:
            raise MeasurementError("shot mode needs chi and rng")
        amps, counts = amplitudes_from_shots(v, chi, epsilon, rng)
    elif mode == "hybrid":
        # which bitstrings appear is decided by chi samples; values are read out
        if chi is None or rng is None:
            raise MeasurementError("hybrid mode needs chi and rng")
        seen = sample(v, chi, rng)
        exact = amplitudes_from_vector(v, epsilon)
        amps = {j: exact[j] for j in seen if j in exact}
    else:
        raise MeasurementError(f"unknown mode {mode!r}")

    order = sorted_components(amps)
    kept = order[:eta_cap]
    table = ComponentTable([], epsilon, eta_cap, chi, mode, observed=len(order))

    j_ref = None
    if phase_method == "ancilla":
        support = np.flatnonzero(np.abs(v) > 1e-12)
        try:
            j_ref = choose_j_ref(support, n)
        except MeasurementError:
            j_ref = choose_j_ref(amps, n)
        table.j_ref = j_ref
        if phase_shots is not None and phase_shots < 10 ** (4 * epsilon):
            log.warning("phase_shots=%d is below 10^(4 eps)=%g; parts will be noisy",
                        phase_shots, 10.0 ** (4 * epsilon))

    def parts_for(j: int) -> tuple[float, float]:
        if phase_method == "statevector":
            return round(float(v[j].real), epsilon), round(float(v[j].imag), epsilon)
        if phase_method != "ancilla":
            raise MeasurementError(f"unknown phase method {phase_method!r}")
        if phase_shots is None:
            # probabilities read exactly; amplitude must be the unrounded one
            return estimate_phase_parts(None, None, j, j_ref, gamma, epsilon, "exact",
                                        abs(v[j]), v=v, m_digits=m_digits)
        return estimate_phase_parts(None, None, j, j_ref, gamma, epsilon, "shot",
                                    amps.get(j, abs(v[j])), v=v, rng=rng, shots=phase_shots)

    tol = 10.0 ** (-epsilon + 1)
    for j in kept:
        amp = amps[j]
        re, im = parts_for(j)
        if mode == "shot" and phase_shots is None:
            # attach the measured phase to the sampled magnitude
            norm = math.hypot(re, im)
            if norm > 0:
                re, im = round(amp * re / norm, epsilon), round(amp * im / norm, epsilon)
        if abs(math.hypot(re, im) ** 2 - amp ** 2) > tol:
            table.inconsistent += 1
            log.warning("component %d inconsistent: re^2+im^2=%.4g vs amp^2=%.4g", j,
                        re * re + im * im, amp * amp)
        table.entries.append(Component(j, amp, re, im))

    # c0 is real for Hermitian Q; its sign comes from the real-part readout
    if mode != "shot":
        table.c0 = round(float(v[0].real), epsilon)
    else:
        mag = math.sqrt(counts.get(0, 0) / chi)
        re0 = parts_for(0)[0] if mag > 0 else 0.0
        sign = -1.0 if re0 < 0 or (re0 == 0 and v[0].real < 0) else 1.0
        table.c0 = sign * round(mag, epsilon)
    return table
