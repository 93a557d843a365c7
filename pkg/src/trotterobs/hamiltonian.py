"""Hamiltonian models, the text file format, and the stock model builders.

File format (UTF-8, ``#`` starts a comment)::

    n 4
    summand zz
    term 0.5 ZZII
    term -0.25 IIZZ
    summand field
    term 1.0 IIIX

Pauli words are exactly ``n`` characters from ``IXYZ``; the rightmost
character is qubit 0. Observables use the same format with one summand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .pauli import PauliString, PauliSum


class ParseError(ValueError):
    """Malformed Hamiltonian document. ``kind`` names the failure."""

    def __init__(self, kind: str, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.kind = kind
        self.line = line


@dataclass(frozen=True)
class HamiltonianModel:
    """Ordered summands H_j plus the evolution order.

    ``order`` is a 0-based permutation: ``order[0]`` is the summand applied
    first inside every Trotter block.
    """

    n: int
    summands: tuple[PauliSum, ...]
    order: tuple[int, ...] = ()
    labels: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        summands = tuple(self.summands)
        object.__setattr__(self, "summands", summands)
        if not summands:
            raise ValueError("a model needs at least one summand")
        for j, h in enumerate(summands):
            if h.n != self.n:
                raise ValueError(f"summand {j} acts on {h.n} qubits, model has {self.n}")
            if not h.is_hermitian():
                raise ValueError(f"summand {j} is not Hermitian")
        order = tuple(int(i) for i in self.order) or tuple(range(len(summands)))
        if sorted(order) != list(range(len(summands))):
            raise ValueError(f"order {order} is not a permutation of 0..{len(summands) - 1}")
        object.__setattr__(self, "order", order)
        labels = tuple(self.labels) or tuple(f"H{j + 1}" for j in range(len(summands)))
        if len(labels) != len(summands):
            raise ValueError("one label per summand required")
        object.__setattr__(self, "labels", labels)

    @property
    def L(self) -> int:
        return len(self.summands)

    def ordered(self) -> list[PauliSum]:
        return [self.summands[j] for j in self.order]

    def with_order(self, order: Sequence[int]) -> HamiltonianModel:
        return HamiltonianModel(self.n, self.summands, tuple(order), self.labels)

    def total(self) -> PauliSum:
        out = PauliSum(self.n)
        for h in self.summands:
            out = out + h
        return out

    def commuting(self) -> bool:
        from .pauli import commutator_sum

        return all(
            not commutator_sum(a, b)
            for i, a in enumerate(self.summands)
            for b in self.summands[i + 1 :]
        )


def format_order(order: Sequence[int]) -> str:
    """1-based, dash-joined rendering used in CSV output ("2-1-3")."""
    return "-".join(str(i + 1) for i in order)


def parse_order(text: str) -> tuple[int, ...]:
    return tuple(int(tok) - 1 for tok in text.split("-"))


def parse_hamiltonian(text: str) -> HamiltonianModel:
    n: int | None = None
    labels: list[str] = []
    blocks: list[list[tuple[complex, str]]] = []
    block_lines: list[int] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        key = tokens[0]
        if n is None:
            if key != "n" or len(tokens) != 2:
                raise ParseError("header", lineno, "first statement must be 'n <qubits>'")
            try:
                n = int(tokens[1])
            except ValueError:
                raise ParseError("header", lineno, f"bad qubit count {tokens[1]!r}") from None
            if n < 1:
                raise ParseError("header", lineno, "qubit count must be positive")
            continue
        if key == "summand":
            if blocks and not blocks[-1]:
                raise ParseError("empty_summand", block_lines[-1], f"summand {labels[-1]!r} has no terms")
            labels.append(" ".join(tokens[1:]) or f"H{len(labels) + 1}")
            blocks.append([])
            block_lines.append(lineno)
        elif key == "term":
            if not blocks:
                raise ParseError("syntax", lineno, "'term' before any 'summand'")
            if len(tokens) != 3:
                raise ParseError("syntax", lineno, "expected 'term <coeff> <pauli-word>'")
            coeff = _parse_coeff(tokens[1], lineno)
            word = tokens[2]
            bad = sorted(set(word) - set("IXYZ"))
            if bad:
                raise ParseError("bad_character", lineno, f"invalid Pauli character {bad[0]!r} in {word!r}")
            if len(word) != n:
                raise ParseError("word_length", lineno, f"word {word!r} has {len(word)} characters, expected {n}")
            blocks[-1].append((coeff, word))
        elif key == "n":
            raise ParseError("header", lineno, "duplicate 'n' statement")
        else:
            raise ParseError("syntax", lineno, f"unknown statement {key!r}")

    if n is None:
        raise ParseError("header", 1, "missing 'n <qubits>' header")
    if not blocks:
        raise ParseError("empty_summand", 1, "document has no summands")
    if not blocks[-1]:
        raise ParseError("empty_summand", block_lines[-1], f"summand {labels[-1]!r} has no terms")
    summands = tuple(PauliSum.from_list(b, n=n) for b in blocks)
    return HamiltonianModel(n, summands, labels=tuple(labels))


def _parse_coeff(tok: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        pass
    try:
        c = complex(tok)
    except ValueError:
        raise ParseError("bad_number", lineno, f"cannot parse coefficient {tok!r}") from None
    if c.imag != 0:
        raise ParseError("non_hermitian", lineno, f"coefficient {tok!r} is not real")
    return c.real


def parse_observable(text: str) -> PauliSum:
    model = parse_hamiltonian(text)
    if model.L != 1:
        raise ParseError("syntax", 1, f"observable file must have one summand, found {model.L}")
    return model.summands[0]


def serialize_hamiltonian(model: HamiltonianModel) -> str:
    """Inverse of :func:`parse_hamiltonian`. Summands are written in storage order."""
    lines = [f"n {model.n}"]
    for label, h in zip(model.labels, model.summands):
        lines.append(f"summand {label}")
        for p, c in h:
            lines.append(f"term {c.real!r} {p.label}")
    return "\n".join(lines) + "\n"


def serialize_observable(obs: PauliSum, label: str = "O") -> str:
    return serialize_hamiltonian(HamiltonianModel(obs.n, (obs,), labels=(label,)))


def load_hamiltonian(path: str | Path) -> HamiltonianModel:
    return parse_hamiltonian(Path(path).read_text(encoding="utf-8"))


def load_observable(path: str | Path) -> PauliSum:
    return parse_observable(Path(path).read_text(encoding="utf-8"))


# H2 in STO-3G, 4 qubits, one Pauli term per summand.
HYDROGEN_STO3G_TERMS: tuple[tuple[float, str], ...] = (
    (-0.81262, "IIII"),
    (0.17120, "IIIZ"),
    (0.17120, "IIZI"),
    (-0.22279, "IZII"),
    (-0.22279, "ZIII"),
    (0.16862, "IIZZ"),
    (0.12054, "IZIZ"),
    (0.16587, "ZIIZ"),
    (0.16587, "IZZI"),
    (0.12054, "ZIZI"),
    (0.17435, "ZZII"),
    (-0.04532, "YYXX"),
    (0.04532, "XYYX"),
    (0.04532, "YXXY"),
    (-0.04532, "XXYY"),
)


def build_hydrogen_sto3g() -> HamiltonianModel:
    summands = tuple(PauliSum.from_label(w, c) for c, w in HYDROGEN_STO3G_TERMS)
    labels = tuple(w for _, w in HYDROGEN_STO3G_TERMS)
    return HamiltonianModel(4, summands, labels=labels)


def _label(n: int, ops: Mapping[int, str]) -> str:
    chars = ["I"] * n
    for q, ch in ops.items():
        chars[n - 1 - q] = ch
    return "".join(chars)


def heisenberg_fields(n: int, seed: int) -> np.ndarray:
    """Fields h_j in (-1, 1) from PCG64 seeded with ``seed``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    h = rng.uniform(-1.0, 1.0, size=n)
    while np.any(h == -1.0):  # uniform() is half-open
        h[h == -1.0] = rng.uniform(-1.0, 1.0, size=int(np.sum(h == -1.0)))
    return h


def build_heisenberg_xyz(n: int, seed: int, *, periodic: bool = False) -> HamiltonianModel:
    """X-Y-Z grouped Heisenberg chain with random Z fields.

    Summands: sum X_j X_{j+1}, sum Y_j Y_{j+1}, sum Z_j Z_{j+1} + sum h_j Z_j.
    Open boundary unless ``periodic`` (periodic needs n >= 3).
    """
    if n < 2:
        raise ValueError("Heisenberg chain needs n >= 2")
    if periodic and n < 3:
        raise ValueError("periodic chain needs n >= 3")
    bonds = [(j, j + 1) for j in range(n - 1)]
    if periodic:
        bonds.append((n - 1, 0))
    h = heisenberg_fields(n, seed)
    parts = []
    for ch in "XYZ":
        parts.append([(1.0, _label(n, {a: ch, b: ch})) for a, b in bonds])
    parts[2].extend((float(h[j]), _label(n, {j: "Z"})) for j in range(n))
    summands = tuple(PauliSum.from_list(p, n=n) for p in parts)
    return HamiltonianModel(n, summands, labels=("XX", "YY", "ZZ+hZ"))


def build_transverse_ising(
    n: int, couplings: Mapping[tuple[int, int], float], fields: Sequence[float]
) -> HamiltonianModel:
    """Two summands: sum J_ij Z_i Z_j and sum h_j X_j."""
    if n < 1:
        raise ValueError("need n >= 1")
    if len(fields) > n:
        raise IndexError(f"{len(fields)} fields for {n} qubits")
    zz = []
    for (i, j), J in couplings.items():
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise IndexError(f"coupling index ({i}, {j}) out of range for n={n}")
        zz.append((J, _label(n, {i: "Z", j: "Z"})))
    xf = [(hj, _label(n, {j: "X"})) for j, hj in enumerate(fields)]
    return HamiltonianModel(
        n, (PauliSum.from_list(zz, n=n), PauliSum.from_list(xf, n=n)), labels=("ZZ", "X")
    )


def build_observable_z_uniform(n: int) -> PauliSum:
    """(I + 0.1 sum Z_j) / (1 + 0.1 n), spectral norm 1."""
    if n < 1:
        raise ValueError("need n >= 1")
    terms = [(1.0, "I" * n)] + [(0.1, _label(n, {j: "Z"})) for j in range(n)]
    return PauliSum.from_list(terms, n=n) / (1.0 + 0.1 * n)


def single_qubit_observable(n: int, qubit: int, pauli: str = "Z") -> PauliSum:
    return PauliSum.from_label(_label(n, {qubit: pauli}))
