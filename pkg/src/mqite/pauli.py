"""
Pauli strings in symplectic bitmask form, and weighted sums of them.

A Pauli string on ``n`` qubits is stored as two ``n``-bit integers plus a
phase exponent::

    P = i**phase * (i**|x & z|) * X**x Z**z

so that a plain tensor product of {I, X, Y, Z} always has ``phase == 0``
(``Y = i X Z`` on a single qubit).

Qubit ordering: the leftmost character of a label is qubit 0 and is the most
significant bit of a computational-basis index.  With that convention the
masks line up with basis indices directly, so ``P|j> = c |j ^ x>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

_CHARS = "IXYZ"


class PauliError(ValueError):
    """Malformed Pauli label or incompatible operands."""


class HamiltonianFormatError(ValueError):
    """Malformed Hamiltonian text, carries the 1-based line number."""

    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


def _popcount(v: int) -> int:
    return bin(v).count("1")


def _bit(n: int, q: int) -> int:
    return 1 << (n - 1 - q)


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int
    z: int
    phase: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise PauliError("a Pauli string needs at least one qubit")
        full = (1 << self.n) - 1
        if self.x & ~full or self.z & ~full:
            raise PauliError(f"masks do not fit in {self.n} bits")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        return parse_pauli(label)

    @property
    def label(self) -> str:
        return "".join(self.char(q) for q in range(self.n))

    def char(self, q: int) -> str:
        b = _bit(self.n, q)
        return "IXZY"[(1 if self.x & b else 0) + (2 if self.z & b else 0)]

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def support(self) -> list[int]:
        """Qubit positions (ascending) with a non-identity factor."""
        m = self.x | self.z
        return [q for q in range(self.n) if m & _bit(self.n, q)]

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def is_hermitian(self) -> bool:
        return self.phase in (0, 2)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __neg__(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, self.phase + 2)

    def __str__(self) -> str:
        prefix = ("", "i", "-", "-i")[self.phase]
        return prefix + self.label

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"


def parse_pauli(label: str) -> PauliString:
    """Parse a label such as ``"XIZ"`` into a :class:`PauliString`."""
    if not label:
        raise PauliError("empty Pauli label")
    n = len(label)
    x = z = 0
    for q, ch in enumerate(label):
        if ch not in _CHARS:
            raise PauliError(f"invalid character {ch!r} at position {q + 1} in {label!r}")
        b = _bit(n, q)
        if ch in "XY":
            x |= b
        if ch in "ZY":
            z |= b
    return PauliString(n, x, z)


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Operator product ``a @ b`` with the accumulated phase."""
    if a.n != b.n:
        raise PauliError(f"size mismatch: {a.n} vs {b.n} qubits")
    x, z = a.x ^ b.x, a.z ^ b.z
    # (X^x1 Z^z1)(X^x2 Z^z2) = (-1)^{|z1 & x2|} X^x Z^z
    phase = (a.phase + b.phase + _popcount(a.x & a.z) + _popcount(b.x & b.z)
             + 2 * _popcount(a.z & b.x) - _popcount(x & z))
    return PauliString(a.n, x, z, phase)


def commutes(a: PauliString, b: PauliString) -> bool:
    if a.n != b.n:
        raise PauliError(f"size mismatch: {a.n} vs {b.n} qubits")
    return (_popcount(a.x & b.z) + _popcount(a.z & b.x)) % 2 == 0


_I_POW = (1, 1j, -1, -1j)


def apply_to_basis(p: PauliString, j: int) -> tuple[int, complex]:
    """Return ``(j', c)`` with ``P|j> = c|j'>``; ``c`` is a power of i."""
    if j < 0 or j >> p.n:
        raise PauliError(f"basis index {j} does not fit in {p.n} bits")
    k = p.phase + _popcount(p.x & p.z) + 2 * _popcount(j & p.z)
    return j ^ p.x, _I_POW[k % 4]


def basis_coefficients(p: PauliString, indices: np.ndarray | None = None) -> np.ndarray:
    """Vectorised ``c(j)`` of :func:`apply_to_basis` over ``indices`` (default: all)."""
    if indices is None:
        indices = np.arange(1 << p.n, dtype=np.int64)
    parity = np.bitwise_count(indices & p.z) & 1
    base = _I_POW[(p.phase + _popcount(p.x & p.z)) % 4]
    return base * (1 - 2 * parity.astype(np.float64))


def p_imag_for(j: int, n: int) -> PauliString:
    """X on every set bit of ``j``: maps |0...0> to |j>."""
    if j == 0:
        raise PauliError("j = 0 has no generating string (identity is excluded)")
    if j < 0 or j >> n:
        raise PauliError(f"bitstring {j} does not fit in {n} bits")
    return PauliString(n, j, 0)


def p_real_for(j: int, n: int) -> PauliString:
    """Like :func:`p_imag_for` with the lowest-index X turned into Y: |0...0> -> i|j>."""
    p = p_imag_for(j, n)
    # lowest qubit index = most significant set bit
    top = 1 << (j.bit_length() - 1)
    return PauliString(n, p.x, top)


def x_string(t: int, s: int, n: int) -> PauliString:
    """X/I string mapping |t> to |s>."""
    return PauliString(n, t ^ s, 0)


def bits(j: int, n: int) -> str:
    return format(j, f"0{n}b")


def from_bits(s: str) -> int:
    if not s or set(s) - {"0", "1"}:
        raise PauliError(f"not a bitstring: {s!r}")
    return int(s, 2)


@dataclass(frozen=True)
class Hamiltonian:
    """Ordered weighted sum of Pauli strings plus an optional constant offset.

    Term order is preserved; the trotterized sweeps depend on it.
    """

    n: int
    terms: tuple[tuple[float, PauliString], ...]
    constant: float = 0.0
    _matrix_cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        terms = tuple((float(w), p) for w, p in self.terms)
        for w, p in terms:
            if p.n != self.n:
                raise PauliError(f"term {p} has {p.n} qubits, expected {self.n}")
            if p.phase != 0:
                raise PauliError(f"term {p} is not a plain tensor product")
            if p.is_identity:
                raise PauliError("identity terms belong in the constant offset")
            if not math.isfinite(w):
                raise PauliError(f"non-finite weight for {p}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_labels(cls, pairs: Iterable[tuple[float, str]], constant: float = 0.0) -> "Hamiltonian":
        pairs = list(pairs)
        if not pairs:
            raise PauliError("empty Hamiltonian")
        ps = [(w, parse_pauli(lab)) for w, lab in pairs]
        return cls(ps[0][1].n, tuple(ps), constant)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[float, PauliString]]:
        return iter(self.terms)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.terms])

    @property
    def paulis(self) -> list[PauliString]:
        return [p for _, p in self.terms]

    def all_commute(self) -> bool:
        ps = self.paulis
        return all(commutes(a, b) for i, a in enumerate(ps) for b in ps[i + 1:])

    def matrix(self) -> np.ndarray:
        """Dense ``2^n x 2^n`` matrix, built column-wise from the Pauli action."""
        if "dense" not in self._matrix_cache:
            if self.n > 14:
                raise ValueError(f"refusing to build a dense matrix for {self.n} qubits")
            dim = 1 << self.n
            idx = np.arange(dim, dtype=np.int64)
            m = np.zeros((dim, dim), dtype=complex)
            for w, p in self.terms:
                m[idx ^ p.x, idx] += w * basis_coefficients(p, idx)
            m[idx, idx] += self.constant
            self._matrix_cache["dense"] = m
        return self._matrix_cache["dense"]

    def to_text(self) -> str:
        lines = [f"{w!r} {p.label}" for w, p in self.terms]
        if self.constant:
            lines.append(f"{self.constant!r} {'I' * self.n}")
        return "\n".join(lines) + "\n"


def parse_hamiltonian(text: str) -> Hamiltonian:
    """Parse ``weight label`` lines; ``#`` starts a comment, blank lines are skipped.

    An all-identity label adds to the constant offset.
    """
    pairs: list[tuple[float, PauliString]] = []
    constant = 0.0
    n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise HamiltonianFormatError(f"expected 'weight label', got {raw.strip()!r}", lineno)
        try:
            w = float(parts[0])
        except ValueError:
            raise HamiltonianFormatError(f"malformed weight {parts[0]!r}", lineno) from None
        if not math.isfinite(w):
            raise HamiltonianFormatError(f"non-finite weight {parts[0]!r}", lineno)
        try:
            p = parse_pauli(parts[1])
        except PauliError as exc:
            raise HamiltonianFormatError(str(exc), lineno) from None
        if n is None:
            n = p.n
        elif p.n != n:
            raise HamiltonianFormatError(f"label {parts[1]!r} has {p.n} qubits, expected {n}", lineno)
        if p.is_identity:
            constant += w
        else:
            pairs.append((w, p))
    if n is None or not pairs:
        raise HamiltonianFormatError("empty Hamiltonian")
    return Hamiltonian(n, tuple(pairs), constant)


def hamiltonian_from_terms(n: int, terms: Sequence[tuple[float, PauliString]]) -> Hamiltonian:
    if not terms:
        raise PauliError("empty Hamiltonian")
    return Hamiltonian(n, tuple(terms))
