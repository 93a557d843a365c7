"""Exact evolution, Trotter blocks, product formulas and leading BCH terms.

Factor-order convention: inside a block the summand ``order[0]`` acts first,
i.e. it is the rightmost matrix factor. For L = 3 and order (1, 0, 2) the
first-order block is e^{-i tau H_2} e^{-i tau H_0} e^{-i tau H_1}.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .dense import dagger, exp_from_eig, herm_eig, log_unitary_principal
from .hamiltonian import HamiltonianModel
from .pauli import PauliSum, commutator_sum, x_sectors


class UnsupportedOrderError(ValueError):
    pass


def suzuki_p(k: int) -> float:
    """p_k = 1 / (4 - 4^{1/(2k-1)})."""
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * k - 1)))


@dataclass(frozen=True)
class FormulaSpec:
    order: int
    t: float
    r: int

    def __post_init__(self) -> None:
        if not (self.order in (1, 2) or (self.order >= 4 and self.order % 2 == 0)):
            raise UnsupportedOrderError(f"invalid product-formula order {self.order}")
        if not self.t > 0 or not np.isfinite(self.t):
            raise ValueError(f"time must be positive and finite, got {self.t}")
        if int(self.r) != self.r or self.r < 1:
            raise ValueError(f"Trotter number must be a positive integer, got {self.r}")
        object.__setattr__(self, "r", int(self.r))

    @property
    def tau(self) -> float:
        return self.t / self.r

    def with_r(self, r: int) -> FormulaSpec:
        return replace(self, r=r)


def factor_schedule(order: int, perm: Sequence[int], step: float) -> list[tuple[int, float]]:
    """Sequence of (summand, step) factors of one block, first-acting first.

    Consecutive factors of the same summand are merged.
    """
    if order == 1:
        seq = [(j, step) for j in perm]
    elif order == 2:
        half = 0.5 * step
        seq = [(j, half) for j in perm] + [(j, half) for j in reversed(perm)]
    elif order >= 4 and order % 2 == 0:
        p = suzuki_p(order // 2)
        outer = factor_schedule(order - 2, perm, p * step)
        middle = factor_schedule(order - 2, perm, (1.0 - 4.0 * p) * step)
        seq = outer + outer + middle + outer + outer
    else:
        raise UnsupportedOrderError(f"invalid product-formula order {order}")
    merged: list[tuple[int, float]] = []
    for j, s in seq:
        if merged and merged[-1][0] == j:
            merged[-1] = (j, merged[-1][1] + s)
        else:
            merged.append((j, s))
    return merged


class DenseModel:
    """Dense view of a model, split into X-mask sectors.

    Every summand, the extra operators passed in, and anything generated
    from them are block diagonal over the sectors, so all products,
    exponentials and spectral norms can be taken block by block. Summand
    eigendecompositions are computed once; factors e^{-i s H_j} are cached
    per step.
    """

    def __init__(self, model: HamiltonianModel, extra: Iterable[PauliSum] = (), *, split: bool = True):
        self.model = model
        n = model.n
        if split:
            self.sectors = x_sectors(n, [*model.summands, *extra])
        else:
            self.sectors = [np.arange(1 << n, dtype=np.int64)]
        self._eig = [[herm_eig(h.to_dense(sec)) for h in model.summands] for sec in self.sectors]
        self._total_eig: list[tuple[np.ndarray, np.ndarray]] | None = None
        self._factors: dict[tuple[int, int, float], np.ndarray] = {}

    @property
    def dim(self) -> int:
        return 1 << self.model.n

    def dense(self, op: PauliSum) -> list[np.ndarray]:
        return [op.to_dense(sec) for sec in self.sectors]

    def embed(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for sec, b in zip(self.sectors, blocks):
            out[np.ix_(sec, sec)] = b
        return out

    def factor(self, s: int, j: int, step: float) -> np.ndarray:
        key = (s, j, step)
        f = self._factors.get(key)
        if f is None:
            if len(self._factors) > 512:
                self._factors.clear()
            w, q = self._eig[s][j]
            f = exp_from_eig(w, q, -step)
            self._factors[key] = f
        return f

    def block(self, spec: FormulaSpec, order: Sequence[int] | None = None) -> list[np.ndarray]:
        perm = self.model.order if order is None else tuple(order)
        seq = factor_schedule(spec.order, perm, spec.tau)
        out = []
        for s, sec in enumerate(self.sectors):
            m = np.eye(sec.size, dtype=complex)
            for j, step in seq:
                m = self.factor(s, j, step) @ m
            out.append(m)
        return out

    def exact(self, t: float) -> list[np.ndarray]:
        if self._total_eig is None:
            total = self.model.total()
            self._total_eig = [herm_eig(total.to_dense(sec)) for sec in self.sectors]
        return [exp_from_eig(w, q, -t) for w, q in self._total_eig]


def exact_evolution(model: HamiltonianModel, t: float) -> np.ndarray:
    """U = e^{-iHt}."""
    if not np.isfinite(t):
        raise ValueError("time must be finite")
    dm = DenseModel(model, split=False)
    return dm.exact(t)[0]


def trotter_block(model: HamiltonianModel, spec: FormulaSpec) -> np.ndarray:
    """One block S(t/r) in the model's evolution order."""
    return DenseModel(model, split=False).block(spec)[0]


def product_formula(model: HamiltonianModel, spec: FormulaSpec) -> np.ndarray:
    """V = S(t/r)^r."""
    return np.linalg.matrix_power(trotter_block(model, spec), spec.r)


def conjugated_observable_sequence(
    model: HamiltonianModel, spec: FormulaSpec, obs: np.ndarray
) -> list[np.ndarray]:
    """[S^{-k} O S^k for k = 1..r], by repeated conjugation with one block."""
    s = trotter_block(model, spec)
    sd = dagger(s)
    out = []
    cur = np.asarray(obs, dtype=complex)
    for _ in range(spec.r):
        cur = sd @ cur @ s
        cur = 0.5 * (cur + dagger(cur))
        out.append(cur)
    return out


def _suffix_sums(hs: Sequence[PauliSum], n: int) -> list[PauliSum]:
    """R_j = sum_{k > j} hs[k]."""
    out = [PauliSum(n)] * len(hs)
    acc = PauliSum(n)
    for j in range(len(hs) - 1, -1, -1):
        out[j] = acc
        acc = acc + hs[j]
    return out


def pair_commutator_sum(hs: Sequence[PauliSum], n: int) -> PauliSum:
    """sum_{j<k} [H_j, H_k] in the given order."""
    total = PauliSum(n)
    for h, rest in zip(hs, _suffix_sums(hs, n)):
        total = total + commutator_sum(h, rest)
    return total


def pf2_nested_sum(hs: Sequence[PauliSum], n: int) -> PauliSum:
    """sum_{j<k} [H_j + 2 sum_{k'>j} H_k', [H_j, H_k]] in the given order."""
    total = PauliSum(n)
    for h, rest in zip(hs, _suffix_sums(hs, n)):
        total = total + commutator_sum(h + 2.0 * rest, commutator_sum(h, rest))
    return total


def leading_difference(model: HamiltonianModel, spec: FormulaSpec) -> PauliSum:
    """Leading term of H~ - H for PF1 and PF2, as a Hermitian Pauli sum.

    PF1: (i tau / 2) sum_{j<k} [H_j, H_k]
    PF2: -(i tau)^2 / 24 sum_{j<k} [H_j + 2 sum_{k'>j} H_k', [H_j, H_k]]
    with j, k running over the evolution order.
    """
    hs = model.ordered()
    tau = spec.tau
    if spec.order == 1:
        out = (0.5j * tau) * pair_commutator_sum(hs, model.n)
    elif spec.order == 2:
        out = (tau * tau / 24.0) * pf2_nested_sum(hs, model.n)
    else:
        raise UnsupportedOrderError(f"no leading-difference formula for order {spec.order}")
    if not out.is_hermitian(1e-10):
        raise ArithmeticError("leading difference came out non-Hermitian")
    return out.real()


def equivalent_hamiltonian_dense(model: HamiltonianModel, spec: FormulaSpec) -> np.ndarray:
    """H~ with e^{-i (t/r) H~} equal to one block, so S^r = e^{-i t H~}."""
    g = log_unitary_principal(trotter_block(model, spec))
    return -g / spec.tau
