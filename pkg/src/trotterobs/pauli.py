"""Symbolic n-qubit Pauli algebra on symplectic bitmasks.

A Pauli string is stored as a pair of integer masks ``(x, z)``. Bit ``q`` of
``x`` (``z``) says whether qubit ``q`` carries an X (Z) component; a Y is both
bits set. The matrix represented by ``(x, z)`` is

    P(x, z) = i^{|x & z|} X^x Z^z

so that every single-qubit factor is exactly I, X, Y or Z. Qubit 0 is the
rightmost character of a label ("XIZ" has Z on qubit 0, X on qubit 2), and
qubit ``q`` is bit ``q`` of a computational basis index, so ``to_dense``
agrees with ``np.kron`` applied left to right over the label.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

import numpy as np

PRUNE_TOL = 1e-14

_PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)
_CHAR_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_CHAR = {bits: ch for ch, bits in _CHAR_BITS.items()}


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, slots=True)
class PauliString:
    n: int
    x: int
    z: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("qubit count must be non-negative")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError(f"masks exceed {self.n} qubits")

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        x = z = 0
        n = len(label)
        for pos, ch in enumerate(label):
            try:
                xb, zb = _CHAR_BITS[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli character {ch!r} in {label!r}") from None
            q = n - 1 - pos
            x |= xb << q
            z |= zb << q
        return cls(n, x, z)

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(n, 0, 0)

    @property
    def label(self) -> str:
        return "".join(
            _BITS_CHAR[((self.x >> q) & 1, (self.z >> q) & 1)] for q in range(self.n - 1, -1, -1)
        )

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def to_dense(self, sector: np.ndarray | None = None) -> np.ndarray:
        """Dense matrix, optionally restricted to a sector of basis states.

        ``sector`` must be a sorted index set closed under ``b -> b ^ self.x``
        (see :func:`x_sectors`).
        """
        idx = np.arange(1 << self.n, dtype=np.int64) if sector is None else np.asarray(sector)
        out = np.zeros((idx.size, idx.size), dtype=complex)
        _accumulate(out, idx, self, 1.0)
        return out

    def __str__(self) -> str:
        return self.label


def _check_n(a: int, b: int) -> None:
    if a != b:
        raise DimensionError(f"qubit counts differ: {a} != {b}")


def pauli_mul(p: PauliString, q: PauliString) -> tuple[complex, PauliString]:
    """Return ``(phase, r)`` with ``P(p) P(q) = phase * P(r)``.

    With P(x, z) = i^{|x&z|} X^x Z^z and Z^a X^b = (-1)^{|a&b|} X^b Z^a the
    phase exponent (mod 4) is |x1&z1| + |x2&z2| + 2|z1&x2| - |x3&z3|.
    """
    _check_n(p.n, q.n)
    x3 = p.x ^ q.x
    z3 = p.z ^ q.z
    k = _popcount(p.x & p.z) + _popcount(q.x & q.z) + 2 * _popcount(p.z & q.x) - _popcount(x3 & z3)
    return _PHASES[k % 4], PauliString(p.n, x3, z3)


def strings_commute(p: PauliString, q: PauliString) -> bool:
    _check_n(p.n, q.n)
    return (_popcount(p.x & q.z) + _popcount(p.z & q.x)) % 2 == 0


def _accumulate(out: np.ndarray, idx: np.ndarray, p: PauliString, coeff: complex) -> None:
    # column b maps to row b ^ x with sign (-1)^{|b & z|}
    target = idx ^ p.x
    rows = np.searchsorted(idx, target)
    if p.x and not np.array_equal(idx[np.minimum(rows, idx.size - 1)], target):
        raise ValueError(f"sector is not closed under {p.label}")
    signs = 1 - 2 * (np.bitwise_count(idx & p.z).astype(np.int64) & 1)
    out[rows, np.arange(idx.size)] += coeff * _PHASES[_popcount(p.x & p.z) % 4] * signs


class PauliSum:
    """Immutable weighted sum of Pauli strings on ``n`` qubits."""

    __slots__ = ("_n", "_terms")

    def __init__(self, n: int, terms: Mapping[PauliString, complex] | None = None):
        self._n = n
        clean: dict[PauliString, complex] = {}
        for p, c in (terms or {}).items():
            _check_n(n, p.n)
            c = complex(c)
            if abs(c) >= PRUNE_TOL:
                clean[p] = c
        self._terms = clean

    @classmethod
    def _raw(cls, n: int, acc: dict[PauliString, complex]) -> PauliSum:
        out = cls.__new__(cls)
        out._n = n
        out._terms = {p: c for p, c in acc.items() if abs(c) >= PRUNE_TOL}
        return out

    @classmethod
    def from_list(cls, items: Iterable[tuple[complex, str]], n: int | None = None) -> PauliSum:
        acc: dict[PauliString, complex] = {}
        for coeff, label in items:
            p = PauliString.from_label(label)
            if n is None:
                n = p.n
            _check_n(n, p.n)
            acc[p] = acc.get(p, 0.0) + complex(coeff)
        if n is None:
            raise ValueError("qubit count cannot be inferred from an empty list")
        return cls._raw(n, acc)

    @classmethod
    def from_label(cls, label: str, coeff: complex = 1.0) -> PauliSum:
        return cls.from_list([(coeff, label)])

    @classmethod
    def identity(cls, n: int, coeff: complex = 1.0) -> PauliSum:
        return cls(n, {PauliString.identity(n): coeff})

    @property
    def n(self) -> int:
        return self._n

    @property
    def terms(self) -> Mapping[PauliString, complex]:
        return MappingProxyType(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[PauliString, complex]]:
        return iter(self._terms.items())

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_hermitian(self, tol: float = PRUNE_TOL) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def real(self) -> PauliSum:
        return PauliSum._raw(self._n, {p: complex(c.real) for p, c in self._terms.items()})

    def coefficient(self, p: PauliString | str) -> complex:
        if isinstance(p, str):
            p = PauliString.from_label(p)
        return self._terms.get(p, 0.0j)

    def __add__(self, other: PauliSum) -> PauliSum:
        if not isinstance(other, PauliSum):
            return NotImplemented
        _check_n(self._n, other._n)
        acc = dict(self._terms)
        for p, c in other._terms.items():
            acc[p] = acc.get(p, 0.0) + c
        return PauliSum._raw(self._n, acc)

    def __neg__(self) -> PauliSum:
        return PauliSum._raw(self._n, {p: -c for p, c in self._terms.items()})

    def __sub__(self, other: PauliSum) -> PauliSum:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other: PauliSum | complex) -> PauliSum:
        if isinstance(other, PauliSum):
            _check_n(self._n, other._n)
            acc: dict[PauliString, complex] = {}
            for p, a in self._terms.items():
                for q, b in other._terms.items():
                    ph, r = pauli_mul(p, q)
                    acc[r] = acc.get(r, 0.0) + ph * a * b
            return PauliSum._raw(self._n, acc)
        if isinstance(other, (int, float, complex, np.number)):
            s = complex(other)
            return PauliSum._raw(self._n, {p: s * c for p, c in self._terms.items()})
        return NotImplemented

    def __rmul__(self, other: complex) -> PauliSum:
        return self.__mul__(other)

    def __truediv__(self, other: complex) -> PauliSum:
        return self * (1.0 / complex(other))

    def adjoint(self) -> PauliSum:
        return PauliSum._raw(self._n, {p: c.conjugate() for p, c in self._terms.items()})

    def allclose(self, other: PauliSum, atol: float = 1e-12) -> bool:
        _check_n(self._n, other._n)
        keys = set(self._terms) | set(other._terms)
        return all(abs(self.coefficient(k) - other.coefficient(k)) <= atol for k in keys)

    def frobenius_norm(self) -> float:
        """Frobenius norm of the dense operator, sqrt(2^n * sum |c|^2)."""
        return float(np.sqrt((1 << self._n) * sum(abs(c) ** 2 for c in self._terms.values())))

    def x_masks(self) -> set[int]:
        return {p.x for p in self._terms}

    def to_dense(self, sector: np.ndarray | None = None) -> np.ndarray:
        idx = np.arange(1 << self._n, dtype=np.int64) if sector is None else np.asarray(sector)
        out = np.zeros((idx.size, idx.size), dtype=complex)
        for p, c in self._terms.items():
            _accumulate(out, idx, p, c)
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self._n == other._n and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self._n, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        if not self._terms:
            return f"PauliSum(n={self._n}, 0)"
        parts = [f"{_fmt_coeff(c)}*{p.label}" for p, c in self._terms.items()]
        return f"PauliSum(n={self._n}, " + " + ".join(parts) + ")"


def _fmt_coeff(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real)
    return repr(c)


def commutator_sum(a: PauliSum, b: PauliSum) -> PauliSum:
    """[a, b] = ab - ba; anticommuting string pairs contribute 2*phase*a*b."""
    _check_n(a.n, b.n)
    acc: dict[PauliString, complex] = {}
    for p, ca in a:
        for q, cb in b:
            if strings_commute(p, q):
                continue
            ph, r = pauli_mul(p, q)
            acc[r] = acc.get(r, 0.0) + 2.0 * ph * ca * cb
    return PauliSum._raw(a.n, acc)


def x_sectors(n: int, sums: Iterable[PauliSum]) -> list[np.ndarray]:
    """Partition basis states into cosets of the GF(2) span of all X masks.

    Every operator in the algebra generated by ``sums`` maps a coset onto
    itself, so dense work can be done block by block. The result is the
    list of sorted index arrays, ordered by smallest member.
    """
    basis: list[int] = []  # echelon form keyed by leading bit
    for s in sums:
        for v in s.x_masks():
            for b in basis:
                v = min(v, v ^ b)
            if v:
                basis.append(v)
                basis.sort(reverse=True)
    states = np.arange(1 << n, dtype=np.int64)
    reps = states.copy()
    for b in basis:
        reps = np.minimum(reps, reps ^ b)
    order = np.lexsort((states, reps))
    reps_sorted = reps[order]
    cuts = np.flatnonzero(np.diff(reps_sorted)) + 1
    return [np.sort(chunk) for chunk in np.split(states[order], cuts)]
