"""Simulated annealing over evolution orders."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bounds import ObservationCost
from .hamiltonian import HamiltonianModel
from .pauli import PauliSum
from .product_formula import FormulaSpec, UnsupportedOrderError


@dataclass(frozen=True)
class AnnealSchedule:
    theta0: float = 10.0
    theta_inf: float = 1.0
    alpha: float = 0.95
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.theta0 > 0 and math.isfinite(self.theta0)):
            raise ValueError("theta0 must be positive and finite")
        if not 0 < self.theta_inf < self.theta0:
            raise ValueError("theta_inf must lie in (0, theta0)")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def iterations(self) -> int:
        return math.ceil(math.log(self.theta_inf / self.theta0) / math.log(self.alpha))

    def temperatures(self) -> list[float]:
        return [self.theta0 * self.alpha**i for i in range(self.iterations)]


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    theta: float
    a: int
    b: int
    accepted: bool
    u: float
    proposed_cost: float
    cost: float  # cost of the current state after the decision
    best_cost: float


@dataclass(frozen=True)
class AnnealTrace:
    entries: tuple[TraceEntry, ...]
    initial_order: tuple[int, ...]
    initial_cost: float
    final_order: tuple[int, ...]
    final_cost: float
    best_order: tuple[int, ...]
    best_cost: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iter", "theta", "a", "b", "accepted", "u", "cost"])
        for e in self.entries:
            w.writerow([e.iteration, fmt(e.theta), e.a + 1, e.b + 1, int(e.accepted), fmt(e.u), fmt(e.cost)])
        return buf.getvalue()


def fmt(x: float) -> str:
    return format(x, ".17g")


def _unrank_pair(k: int, L: int) -> tuple[int, int]:
    a = 0
    while k >= L - 1 - a:
        k -= L - 1 - a
        a += 1
    return a, a + 1 + k


def swap_neighbor(order: Sequence[int], rng: np.random.Generator) -> tuple[tuple[int, ...], tuple[int, int]]:
    """Exchange the entries at one uniformly chosen pair of positions a < b."""
    L = len(order)
    if L < 2:
        raise ValueError("need at least two summands to swap")
    a, b = _unrank_pair(int(rng.integers(L * (L - 1) // 2)), L)
    out = list(order)
    out[a], out[b] = out[b], out[a]
    return tuple(out), (a, b)


def optimize_order(
    model: HamiltonianModel,
    obs: PauliSum,
    spec: FormulaSpec,
    schedule: AnnealSchedule,
    *,
    cost: Callable[[tuple[int, ...]], float] | None = None,
    max_terms: int | None = None,
) -> tuple[tuple[int, ...], AnnealTrace]:
    """Metropolis search over orders, one swap proposal per temperature.

    Starts from the identity order. A uniform draw u is taken every
    iteration; a proposal with cost change d is accepted when d <= 0 or
    u < exp(-d / theta). Returns the best order visited and the trace.
    """
    if spec.order not in (1, 2):
        raise UnsupportedOrderError(f"annealing needs PF1 or PF2, got order {spec.order}")
    if cost is None:
        evaluator = ObservationCost(model, obs, max_terms=max_terms)
        cost = lambda order: evaluator(spec, order)  # noqa: E731
    memo: dict[tuple[int, ...], float] = {}

    def cached(order: tuple[int, ...]) -> float:
        if order not in memo:
            memo[order] = float(cost(order))
        return memo[order]

    rng = np.random.Generator(np.random.PCG64(schedule.seed))
    current = tuple(range(model.L))
    cur_cost = cached(current)
    initial_cost = cur_cost
    best, best_cost = current, cur_cost
    entries = []
    for it, theta in enumerate(schedule.temperatures()):
        proposal, (a, b) = swap_neighbor(current, rng)
        u = float(rng.random())
        new_cost = cached(proposal)
        delta = new_cost - cur_cost
        accepted = delta <= 0 or u < math.exp(-delta / theta)
        if accepted:
            current, cur_cost = proposal, new_cost
            if cur_cost < best_cost:
                best, best_cost = current, cur_cost
        entries.append(TraceEntry(it, theta, a, b, accepted, u, new_cost, cur_cost, best_cost))
    trace = AnnealTrace(tuple(entries), tuple(range(model.L)), initial_cost, current, cur_cost, best, best_cost)
    return best, trace
