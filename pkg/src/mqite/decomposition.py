"""
Multi-qubit Pauli rotations as one- and two-qubit gates.

``exp(i a P)`` for a weight-m string is built as

    basis changes (O -> X) . R-ladder . U2(a) on the last pair . inverse ladder . inverse basis changes

where ``R = (I + i Z_b)(I - i X_a Z_b) / 2`` satisfies ``R (X_a X_b) R^dag = X_b``
so each R strips one qubit from the support.  Single-qubit gates use the
``u3(theta, phi, lam)`` convention

    [[cos t/2,            -e^{i lam} sin t/2],
     [e^{i phi} sin t/2,  e^{i(phi+lam)} cos t/2]]

Gates are counted here; the MQITE driver never simulates them.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .pauli import PauliString

MAX_DENSE_QUBITS = 8

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_I2 = np.eye(2, dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


class DecompositionError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    """``name`` is ``u`` (params theta, phi, lam), ``cx`` (qubits control, target)
    or ``u2`` (params alpha, meaning exp(i alpha X_a X_b)).

    ``block`` groups gates that belong to the same step of the ladder.
    """

    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    block: int = 0

    @property
    def is_two_qubit(self) -> bool:
        return len(self.qubits) == 2

    def matrix(self) -> np.ndarray:
        if self.name == "u":
            return u3(*self.params)
        if self.name == "cx":
            return _CX.copy()
        if self.name == "u2":
            (a,) = self.params
            return math.cos(a) * np.eye(4, dtype=complex) + 1j * math.sin(a) * np.kron(_X, _X)
        raise DecompositionError(f"unknown gate {self.name!r}")


def u3(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -cmath.exp(1j * lam) * s],
                     [cmath.exp(1j * phi) * s, cmath.exp(1j * (phi + lam)) * c]])


def u3_params(m: np.ndarray) -> tuple[float, float, float]:
    """``(theta, phi, lam)`` with ``u3(...)`` equal to the 2x2 unitary ``m`` up to a global phase."""
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    theta = 2 * math.atan2(abs(c), abs(a))
    if abs(a) <= 1e-12:
        # anti-diagonal: fix lam = 0 and take the global phase from -b
        g = cmath.phase(-b)
        return theta, cmath.phase(c) - g, 0.0
    g = cmath.phase(a)
    if abs(c) <= 1e-12:
        return theta, 0.0, cmath.phase(d) - g
    phi = cmath.phase(c) - g
    lam = cmath.phase(-b) - g
    return theta, phi, lam


def u_dagger(params: tuple[float, float, float]) -> tuple[float, float, float]:
    theta, phi, lam = params
    return -theta, -lam, -phi


def _rz_quarter(sign: int) -> np.ndarray:
    """exp(i sign pi/4 Z)."""
    return np.diag([cmath.exp(1j * sign * math.pi / 4), cmath.exp(-1j * sign * math.pi / 4)])


def r_gate_matrix() -> np.ndarray:
    """(I + i Z_2)(I - i X_1 Z_2) / 2 on two qubits, qubit 1 as the high bit."""
    i4 = np.eye(4, dtype=complex)
    z2 = np.kron(_I2, _Z)
    x1z2 = np.kron(_X, _Z)
    return 0.5 * (i4 + 1j * z2) @ (i4 - 1j * x1z2)


def r_elementary_matrix() -> np.ndarray:
    """The textbook elementary-gate circuit for R (u3 pair, CNOT, u3 pair) as a dense matrix.

    This equals ``(exp(i pi/4 Z) x exp(-i pi/4 Z)) R`` up to a global phase,
    so the expansion used by :func:`expand_r` appends those Z rotations'
    inverses to the trailing u gates.
    """
    first = np.kron(u3(math.pi / 2, -math.pi / 4, 0), u3(math.pi / 2, -math.pi, 0))
    last = np.kron(u3(math.pi / 2, math.pi / 2, -math.pi / 4), u3(math.pi / 2, math.pi / 2, 0))
    return last @ _CX @ first


_R_LEAD = (u3_params(u3(math.pi / 2, -math.pi / 4, 0)), u3_params(u3(math.pi / 2, -math.pi, 0)))
_R_TRAIL = (u3_params(_rz_quarter(-1) @ u3(math.pi / 2, math.pi / 2, -math.pi / 4)),
            u3_params(_rz_quarter(1) @ u3(math.pi / 2, math.pi / 2, 0)))


def expand_r(a: int, b: int, block: int = 0, dagger: bool = False) -> list[Gate]:
    """R on (a, b) as u, u, CX(a -> b), u, u.  ``dagger`` gives R^dag."""
    gates = [Gate("u", (a,), _R_LEAD[0], block), Gate("u", (b,), _R_LEAD[1], block),
             Gate("cx", (a, b), (), block),
             Gate("u", (a,), _R_TRAIL[0], block), Gate("u", (b,), _R_TRAIL[1], block)]
    if not dagger:
        return gates
    out = []
    for g in reversed(gates):
        out.append(Gate("u", g.qubits, u_dagger(g.params), block) if g.name == "u" else g)
    return out


def _basis_change(ch: str) -> np.ndarray | None:
    """B with B O B^dag = X."""
    if ch == "Z":
        return _H
    if ch == "Y":
        return _rz_quarter(1)
    return None


def decompose_rotation(p: PauliString, alpha: float) -> list[Gate]:
    """Gate list for ``exp(i alpha P)``; identity factors are skipped.

    ``P`` may carry a sign (phase 0 or 2); other phases are not Hermitian.
    """
    if p.is_identity:
        raise DecompositionError("cannot decompose a rotation about the identity")
    if p.phase == 2:
        alpha = -alpha
    elif p.phase != 0:
        raise DecompositionError(f"{p} is not Hermitian")
    sup = p.support
    m = len(sup)
    if m == 1:
        q = sup[0]
        ch = p.char(q)
        op = {"X": _X, "Y": np.array([[0, -1j], [1j, 0]]), "Z": _Z}[ch]
        mat = math.cos(alpha) * _I2 + 1j * math.sin(alpha) * op
        return [Gate("u", (q,), u3_params(mat), 0)]

    gates: list[Gate] = []
    block = 0
    changes = [(q, _basis_change(p.char(q))) for q in sup]
    changes = [(q, b) for q, b in changes if b is not None]
    if changes:
        gates += [Gate("u", (q,), u3_params(b), block) for q, b in changes]
        block += 1
    for k in range(m - 2):
        gates += expand_r(sup[k], sup[k + 1], block)
        block += 1
    gates.append(Gate("u2", (sup[m - 2], sup[m - 1]), (alpha,), block))
    block += 1
    for k in reversed(range(m - 2)):
        gates += expand_r(sup[k], sup[k + 1], block, dagger=True)
        block += 1
    if changes:
        gates += [Gate("u", (q,), u3_params(b.conj().T), block) for q, b in changes]
    return gates


def expand_u2(gates: list[Gate]) -> list[Gate]:
    """Replace each U2(alpha) by CX . u(exp(i alpha X_a)) . CX."""
    out = []
    for g in gates:
        if g.name != "u2":
            out.append(g)
            continue
        a, b = g.qubits
        (alpha,) = g.params
        rx = math.cos(alpha) * _I2 + 1j * math.sin(alpha) * _X
        out += [Gate("cx", (a, b), (), g.block), Gate("u", (a,), u3_params(rx), g.block),
                Gate("cx", (a, b), (), g.block)]
    return out


def gate_count(gates: list[Gate]) -> tuple[int, int]:
    """(one-qubit, two-qubit) counts; U2 counts as one two-qubit gate."""
    two = sum(1 for g in gates if g.is_two_qubit)
    return len(gates) - two, two


def block_count(gates: list[Gate]) -> int:
    """Number of ladder steps (basis change, each R, the core, ...)."""
    return len({g.block for g in gates})


def rotation_cost(p: PauliString) -> dict:
    """Gate accounting for one rotation about ``p`` without building matrices."""
    m = p.weight
    if m == 0:
        return {"gates_1q": 0, "gates_2q": 0, "blocks": 0, "expanded_1q": 0, "expanded_2q": 0}
    if m == 1:
        return {"gates_1q": 1, "gates_2q": 0, "blocks": 1, "expanded_1q": 1, "expanded_2q": 0}
    nb = bin(p.z).count("1")  # Z or Y factors need a basis change
    ladder = 2 * (m - 2)
    return {
        "gates_1q": 2 * nb + 4 * ladder,
        "gates_2q": ladder + 1,
        "blocks": (2 if nb else 0) + ladder + 1,
        "expanded_1q": 2 * nb + 4 * ladder + 1,
        "expanded_2q": ladder + 2,
    }


def _apply_gate(psi: np.ndarray, g: Gate) -> np.ndarray:
    mat = g.matrix()
    k = len(g.qubits)
    mat = mat.reshape([2] * (2 * k))
    psi = np.tensordot(mat, psi, axes=(list(range(k, 2 * k)), list(g.qubits)))
    return np.moveaxis(psi, list(range(k)), list(g.qubits))


def build_unitary(gates: list[Gate], n: int) -> np.ndarray:
    """Dense product of the gates in application order (oracle use only)."""
    if n > MAX_DENSE_QUBITS:
        raise DecompositionError(f"build_unitary is limited to {MAX_DENSE_QUBITS} qubits, got {n}")
    dim = 1 << n
    psi = np.eye(dim, dtype=complex).reshape([2] * n + [dim])
    for g in gates:
        if any(q >= n for q in g.qubits):
            raise DecompositionError(f"gate {g} does not fit on {n} qubits")
        psi = _apply_gate(psi, g)
    return psi.reshape(dim, dim)


def rotation_matrix(p: PauliString, alpha: float) -> np.ndarray:
    """Dense ``exp(i alpha P) = cos(alpha) I + i sin(alpha) P``."""
    from .simulator import pauli_action

    dim = 1 << p.n
    perm, coef = pauli_action(p)
    pm = np.zeros((dim, dim), dtype=complex)
    pm[np.arange(dim), perm] = coef
    return math.cos(alpha) * np.eye(dim) + 1j * math.sin(alpha) * pm


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Max-entry deviation between ``a`` and ``b`` after removing the best global phase."""
    t = np.vdot(a, b)
    ph = t / abs(t) if abs(t) > 1e-300 else 1.0
    return float(np.max(np.abs(a * ph - b)))


def check_rotation(p: PauliString, alpha: float) -> float:
    gates = decompose_rotation(p, alpha)
    return phase_distance(build_unitary(gates, p.n), rotation_matrix(p, alpha))


def decompose_check(n_max: int = 5, n_strings: int = 0, n_random: tuple[int, ...] = (),
                    rng: np.random.Generator | None = None) -> list[dict]:
    """Per-weight gate counts and worst oracle deviation.

    Exhaustive over all non-identity strings for ``n <= n_max``, plus
    ``n_strings`` random strings whose sizes are drawn uniformly from ``n_random``.
    """
    import itertools

    rng = rng or np.random.default_rng(0)
    rows: dict[tuple[int, int], dict] = {}

    def record(p):
        alpha = float(rng.uniform(-math.pi, math.pi))
        dev = check_rotation(p, alpha)
        g1, g2 = gate_count(decompose_rotation(p, alpha))
        key = (p.n, p.weight)
        r = rows.setdefault(key, {"n": p.n, "weight": p.weight, "strings": 0, "gates_1q": 0,
                                  "gates_2q": 0, "max_deviation": 0.0})
        r["strings"] += 1
        r["gates_1q"] = max(r["gates_1q"], g1)
        r["gates_2q"] = max(r["gates_2q"], g2)
        r["max_deviation"] = max(r["max_deviation"], dev)

    for n in range(1, n_max + 1):
        for chars in itertools.product("IXYZ", repeat=n):
            if set(chars) == {"I"}:
                continue
            record(PauliString.from_label("".join(chars)))
    for _ in range(n_strings if n_random else 0):
        n = int(rng.choice(n_random))
        while True:
            x, z = (int(v) for v in rng.integers(0, 1 << n, size=2))
            if x | z:
                break
        record(PauliString(n, x, z))
    return [rows[k] for k in sorted(rows)]
