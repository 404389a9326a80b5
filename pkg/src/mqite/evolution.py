"""
The MQITE driver.

Each term step measures ``c = U^dag Q U |0>``, turns the dominant components
into rotation angles and right-multiplies the circuit,

    U <- U . prod_j exp(i y_r P^(r)_j) exp(i y_i P^(i)_j),

so every new factor acts on ``|0...0>`` before the existing circuit.  Sweeps
run over the Hamiltonian terms in stored order; the energy is measured after
every sweep.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .decomposition import rotation_cost
from .ite import (GroundState, NumericalError, energy_variance, exact_ground, reachable_sector, run_ite,
                  sweep_count)
from .measurement import ComponentTable, build_table
from .pauli import Hamiltonian, PauliString, apply_to_basis, basis_coefficients, p_imag_for, p_real_for
from .simulator import Circuit, Prep, apply_pauli, expectation, fidelity, make_rng, prep_unitary, run_circuit

log = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ["tau", "energy", "rel_error", "fidelity", "eta", "delta_star", "gates_1q", "gates_2q"]
DENSE_BACKEND_MAX_QUBITS = 8


class ConfigError(ValueError):
    pass


@dataclass
class MQITEConfig:
    delta: float = 0.1
    T: float = 3.0
    epsilon: int = 2
    eta_cap: int = 100
    chi: int = 1000
    mode: str = "exact"               # exact | hybrid | shot
    prep: str = "zero"
    seed: int = 0
    qse_enabled: bool = False
    qse_stride: int = 1
    qse_svd_cut: float = 1e-8
    second_order_trotter: bool = False  # ITE comparison only
    normalization: str = "nk"           # nk | bare
    phase_method: str = "ancilla"       # ancilla | statevector
    phase_shots: int | None = None
    backend: str = "auto"               # auto | dense | replay

    def __post_init__(self):
        if self.mode == "exact-readout":
            self.mode = "exact"

    def validate(self) -> "MQITEConfig":
        errs = []
        if not (isinstance(self.delta, (int, float)) and self.delta > 0):
            errs.append("delta must be positive")
        if not self.T >= 0:
            errs.append("T must be non-negative")
        if not (isinstance(self.epsilon, int) and self.epsilon >= 1):
            errs.append("epsilon must be an integer >= 1")
        if not (isinstance(self.eta_cap, int) and self.eta_cap >= 1):
            errs.append("eta_cap must be an integer >= 1")
        if not (isinstance(self.chi, int) and self.chi >= 1):
            errs.append("chi must be an integer >= 1")
        if self.mode not in ("exact", "hybrid", "shot"):
            errs.append(f"mode must be exact, hybrid or shot, got {self.mode!r}")
        if self.normalization not in ("nk", "bare"):
            errs.append(f"normalization must be 'nk' or 'bare', got {self.normalization!r}")
        if self.phase_method not in ("ancilla", "statevector"):
            errs.append(f"phase_method must be 'ancilla' or 'statevector', got {self.phase_method!r}")
        if self.backend not in ("auto", "dense", "replay"):
            errs.append(f"backend must be auto, dense or replay, got {self.backend!r}")
        if self.qse_stride < 1:
            errs.append("qse_stride must be >= 1")
        try:
            Prep.parse(self.prep)
        except ValueError as exc:
            errs.append(str(exc))
        if errs:
            raise ConfigError("; ".join(errs))
        return self

    @classmethod
    def from_dict(cls, d: dict) -> "MQITEConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError(f"unknown mqite config keys: {', '.join(unknown)}")
        return cls(**d).validate()

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# -- backends -------------------------------------------------------------

class ReplayBackend:
    """Keeps only the layer list; every query replays the circuit."""

    def __init__(self, circuit: Circuit):
        self.circuit = circuit

    def component_vector(self, q: PauliString) -> np.ndarray:
        from .measurement import component_vector
        return component_vector(self.circuit, q)

    def state(self) -> np.ndarray:
        return run_circuit(self.circuit)

    def right_multiply(self, y: float, p: PauliString):
        self.circuit.layers.insert(0, (y, p))


class DenseBackend:
    """Keeps ``W = U^T`` so that ``U -> U exp(i y P)`` is one row-mixing pass."""

    def __init__(self, circuit: Circuit):
        self.circuit = circuit
        n = circuit.n
        self.idx = np.arange(1 << n)
        W = prep_unitary(n, circuit.prep).T.copy()
        for y, p in circuit.layers[::-1]:
            W = self._mix(W, y, p)
        self.W = W

    def _mix(self, W, y, p):
        # row k of U^T is U|k>; U exp(iyP)|k> = cos y U|k> + i sin y c(k) U|k^x>
        coef = basis_coefficients(p, self.idx)
        return math.cos(y) * W + (1j * math.sin(y) * coef)[:, None] * W[self.idx ^ p.x]

    def component_vector(self, q: PauliString) -> np.ndarray:
        psi = self.W[0]
        return self.W.conj() @ apply_pauli(psi, q)

    def state(self) -> np.ndarray:
        return self.W[0].copy()

    def right_multiply(self, y: float, p: PauliString):
        self.W = self._mix(self.W, y, p)
        self.circuit.layers.insert(0, (y, p))


def make_backend(circuit: Circuit, kind: str = "auto"):
    if kind == "auto":
        kind = "dense" if circuit.n <= DENSE_BACKEND_MAX_QUBITS else "replay"
    return DenseBackend(circuit) if kind == "dense" else ReplayBackend(circuit)


# -- one term step --------------------------------------------------------

@dataclass
class TermStats:
    sweep: int
    term: int
    delta_k: float
    c0: float
    n_k: float
    eta: int            # retained components, j = 0 included
    eta_raw: int        # distinct bitstrings measured before the cap
    delta_star: float
    layers: int
    gates_1q: int
    gates_2q: int
    blocks: int
    expanded_1q: int
    expanded_2q: int
    inconsistent: int = 0


@dataclass
class StepResult:
    table: ComponentTable
    params: list[tuple[float, PauliString]]   # in operator-product order
    stats: TermStats
    v: np.ndarray
    circuit: Circuit | None = None   # live circuit, already including ``params``


def step_parameters(table: ComponentTable, dk: float, n: int, normalization: str = "nk"
                    ) -> tuple[list[tuple[float, PauliString]], float]:
    """Rotation angles for one term step and the normalization ``n_k``."""
    nk = math.sqrt(1 - 2 * dk * table.c0 + dk * dk) if normalization == "nk" else 1.0
    if not nk > 0:
        raise NumericalError(f"non-positive normalization n_k^2 = {1 - 2 * dk * table.c0 + dk * dk}")
    params = []
    for c in table.gate_components:
        y_r = dk * c.re / nk
        y_i = -dk * c.im / nk
        if y_r != 0:
            params.append((y_r, p_real_for(c.j, n)))
        if y_i != 0:
            params.append((y_i, p_imag_for(c.j, n)))
    return params, nk


def mqite_term_step(backend, w: float, q: PauliString, cfg: MQITEConfig,
                    rng: np.random.Generator | None, sweep: int = 0, term: int = 0) -> StepResult:
    n = q.n
    dk = cfg.delta * w
    if not abs(dk) < 1:
        raise NumericalError(f"|delta * w| = {abs(dk):.3g} >= 1 at sweep {sweep}, term {term}")
    v = backend.component_vector(q)
    table = build_table(v, n, cfg.epsilon, cfg.eta_cap, cfg.mode, chi=cfg.chi, rng=rng,
                        phase_method=cfg.phase_method, phase_shots=cfg.phase_shots)
    params, nk = step_parameters(table, dk, n, cfg.normalization)
    # product order A_1 B_1 A_2 B_2 ...: right-multiply left to right
    cost = {"gates_1q": 0, "gates_2q": 0, "blocks": 0, "expanded_1q": 0, "expanded_2q": 0}
    for y, p in params:
        backend.right_multiply(y, p)
        for k, val in rotation_cost(p).items():
            cost[k] += val
    stats = TermStats(sweep, term, dk, table.c0, nk, len(table), table.observed, table.delta_star(),
                      len(params), inconsistent=table.inconsistent, **cost)
    return StepResult(table, params, stats, v, backend.circuit)


def cost_function(y: np.ndarray, table: ComponentTable, dk: float, nk: float = 1.0) -> float:
    """``f(y) = || sum_j (i y_r P^(r)_j + i y_i P^(i)_j)|0> + (dk/nk) (c - c0 e_0) ||^2``.

    ``y`` holds ``(y_r, y_i)`` pairs in table order (j = 0 skipped) and ``c``
    the table components.  The step parameters make this stationary.
    """
    comps = table.gate_components
    n_bits = max([c.j for c in comps] + [1]).bit_length()
    resid: dict[int, complex] = {}
    scale = dk / nk
    for c in comps:
        resid[c.j] = resid.get(c.j, 0) + scale * complex(c.re, c.im)
    for k, c in enumerate(comps):
        for angle, p in ((y[2 * k], p_real_for(c.j, n_bits)), (y[2 * k + 1], p_imag_for(c.j, n_bits))):
            jj, coef = apply_to_basis(p, 0)
            resid[jj] = resid.get(jj, 0) + 1j * angle * coef
    return float(sum(abs(r) ** 2 for r in resid.values()))


def cost_function_check(result: StepResult, normalization: str = "nk", h: float = 1e-5) -> float:
    """Max |df/dy| at the computed parameters by central differences."""
    table = result.table
    dk = result.stats.delta_k
    nk = result.stats.n_k if normalization == "nk" else 1.0
    y = []
    for c in table.gate_components:
        y += [dk * c.re / nk, -dk * c.im / nk]
    y = np.array(y, dtype=float)
    if y.size == 0:
        return 0.0
    grad = np.empty_like(y)
    for i in range(y.size):
        e = np.zeros_like(y)
        e[i] = h
        grad[i] = (cost_function(y + e, table, dk, nk) - cost_function(y - e, table, dk, nk)) / (2 * h)
    return float(np.max(np.abs(grad)))


# -- full runs ------------------------------------------------------------

@dataclass
class SweepRecord:
    sweep: int
    tau: float
    energy: float
    rel_error: float
    fidelity: float
    eta: int
    eta_raw: int
    delta_star: float
    gates_1q: int
    gates_2q: int
    blocks: int
    layers: int           # total circuit layers after this sweep
    variance: float


@dataclass
class RunRecord:
    config: dict
    n: int
    n_terms: int
    exact_energy: float
    sweeps: list[SweepRecord] = field(default_factory=list)
    terms: list[TermStats] = field(default_factory=list)
    ite_energies: list[float] = field(default_factory=list)
    circuit: Circuit | None = None
    hamiltonian: str = ""
    wall_time: float = 0.0

    @property
    def taus(self) -> list[float]:
        return [s.tau for s in self.sweeps]

    @property
    def energies(self) -> list[float]:
        return [s.energy for s in self.sweeps]

    @property
    def final_energy(self) -> float:
        return self.sweeps[-1].energy

    @property
    def eta_max(self) -> int:
        return max((t.eta for t in self.terms), default=0)

    def snapshot(self, sweep: int) -> Circuit:
        """Circuit after ``sweep`` full sweeps (sweep 0 is the initial state)."""
        return self.circuit.tail(self.sweeps[sweep].layers)

    def trajectory_rows(self) -> list[dict]:
        return [{"tau": s.tau, "energy": s.energy, "rel_error": s.rel_error, "fidelity": s.fidelity,
                 "eta": s.eta, "delta_star": s.delta_star, "gates_1q": s.gates_1q, "gates_2q": s.gates_2q}
                for s in self.sweeps]

    def trajectory_csv(self) -> str:
        return rows_to_csv(self.trajectory_rows(), TRAJECTORY_COLUMNS)

    def term_csv(self) -> str:
        rows = [dataclasses.asdict(t) for t in self.terms]
        cols = [f.name for f in dataclasses.fields(TermStats)]
        return rows_to_csv(rows, cols)

    def to_dict(self) -> dict:
        return {
            "config": self.config, "n": self.n, "n_terms": self.n_terms, "exact_energy": self.exact_energy,
            "sweeps": [dataclasses.asdict(s) for s in self.sweeps],
            "terms": [dataclasses.asdict(t) for t in self.terms],
            "ite_energies": self.ite_energies,
            "circuit": self.circuit.to_dict() if self.circuit else None,
            "hamiltonian": self.hamiltonian,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(d["config"], d["n"], d["n_terms"], d["exact_energy"],
                   [SweepRecord(**s) for s in d["sweeps"]], [TermStats(**t) for t in d["terms"]],
                   d.get("ite_energies", []), Circuit.from_dict(d["circuit"]) if d.get("circuit") else None,
                   d.get("hamiltonian", ""))


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items() if k in columns})
    return buf.getvalue()


def reference_ground(h: Hamiltonian, prep: Prep) -> GroundState:
    """Exact ground state in the sector the evolution can reach from ``prep``."""
    if prep.kind in ("zero", "basis"):
        return exact_ground(h, reachable_sector(h, prep.mask(h.n)))
    return exact_ground(h)


def run_mqite(h: Hamiltonian, cfg: MQITEConfig, ground: GroundState | float | None = None,
              compare_ite: bool = True, callback: Callable[[StepResult], None] | None = None) -> RunRecord:
    """Full MQITE run with per-sweep observables and the paired ITE trajectory."""
    cfg.validate()
    t0 = time.perf_counter()
    prep = Prep.parse(cfg.prep)
    if ground is None:
        ground = reference_ground(h, prep)
    e_exact = ground.energy if isinstance(ground, GroundState) else float(ground)
    sweeps = sweep_count(cfg.delta, cfg.T)
    ite = run_ite(h, cfg.delta, cfg.T, prep, cfg.second_order_trotter) if compare_ite else None

    circuit = Circuit(h.n, prep, [])
    backend = make_backend(circuit, cfg.backend)
    rng = make_rng(cfg.seed) if cfg.mode != "exact" else None
    rec = RunRecord(cfg.to_dict(), h.n, len(h), e_exact, circuit=circuit, hamiltonian=h.to_text())
    if ite:
        rec.ite_energies = list(ite.energies)

    def observe(s: int, stats: list[TermStats]):
        psi = backend.state()
        e = expectation(psi, h)
        rel = (e - e_exact) / abs(e_exact) if e_exact else e - e_exact
        fid = fidelity(ite.states[s], psi) if ite else float("nan")
        rec.sweeps.append(SweepRecord(
            s, round(s * cfg.delta, 12), e, rel, fid,
            max((t.eta for t in stats), default=0), max((t.eta_raw for t in stats), default=0),
            stats[-1].delta_star if stats else 1.0,
            sum(t.gates_1q for t in stats), sum(t.gates_2q for t in stats), sum(t.blocks for t in stats),
            len(circuit.layers), energy_variance(psi, h)))

    observe(0, [])
    low_chi = False
    for s in range(1, sweeps + 1):
        stats = []
        for k, (w, q) in enumerate(h.terms):
            res = mqite_term_step(backend, w, q, cfg, rng, s, k)
            stats.append(res.stats)
            if cfg.mode == "shot" and cfg.chi < res.stats.eta * 10 ** (2 * cfg.epsilon):
                low_chi = True
            if callback:
                callback(res)
        rec.terms += stats
        observe(s, stats)
        if not math.isfinite(rec.sweeps[-1].energy):
            raise NumericalError(f"non-finite energy after sweep {s}")
    if low_chi:
        log.warning("chi=%d is below eta * 10^(2 eps) for some steps; amplitudes carry fewer than %d digits",
                    cfg.chi, cfg.epsilon)
    rec.wall_time = time.perf_counter() - t0
    return rec


def gate_law_violations(rec: RunRecord, metric: str = "blocks") -> list[TermStats]:
    """Term steps whose added gate count exceeds ``4 * eta * n``."""
    out = []
    for t in rec.terms:
        added = t.blocks if metric == "blocks" else getattr(t, metric)
        if added > 4 * t.eta * rec.n:
            out.append(t)
    return out
