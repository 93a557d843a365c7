"""Trotter error metrics and bounds.

Covers the worst-case (Lloyd), commutator and random-input bounds, the
observable-aware cost, the error kernel and its bounds, the principal
observation error with its residual bound, and the Trotter-number search.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, NamedTuple, Sequence

import numpy as np

from .dense import (
    BranchAmbiguityWarning,
    check_density_matrix,
    commutator,
    dagger,
    is_hermitian,
    log_unitary_principal,
    spectral_norm,
    trace_norm,
    unitary_eig,
)
from .hamiltonian import HamiltonianModel, format_order
from .pauli import PauliSum, commutator_sum
from .product_formula import (
    DenseModel,
    FormulaSpec,
    UnsupportedOrderError,
    _suffix_sums,
    leading_difference,
)

MAX_TROTTER = 1 << 24


class Family(str, Enum):
    LLOYD = "lloyd"
    COMMUTATOR = "commutator"
    RANDOM_INPUT = "random_input"
    OBSERVATION = "observation"
    KERNEL_EXACT = "kernel_exact"
    PRINCIPAL_INTEGRAL = "principal_integral"
    EMPIRICAL = "empirical"


@dataclass(frozen=True)
class BoundReport:
    family: Family
    formula_order: int
    r: int
    t: float
    value: float
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        if not (math.isfinite(self.value) and self.value >= 0.0):
            raise ValueError(f"{self.family.value} bound must be finite and non-negative, got {self.value}")


@dataclass(frozen=True)
class ErrorKernel:
    E: np.ndarray
    eigenphase_bound: float


class QuadratureResult(NamedTuple):
    value: float
    converged: bool
    panels: int


class TrotterCapExceeded(RuntimeError):
    pass


def _require_pf12(spec: FormulaSpec) -> None:
    if spec.order not in (1, 2):
        raise UnsupportedOrderError(f"bound only defined for orders 1 and 2, got {spec.order}")


def _norm_inf(op: PauliSum, dm: DenseModel) -> float:
    if not op:
        return 0.0
    return max(spectral_norm(b) for b in dm.dense(op))


# -- worst-case bounds ---------------------------------------------------------


def max_summand_norm(model: HamiltonianModel, dm: DenseModel | None = None) -> float:
    """Lambda = max_j ||H_j||."""
    dm = dm or DenseModel(model)
    return max(
        float(np.max(np.abs(w), initial=0.0)) for per_sector in dm._eig for w, _ in per_sector
    )


def lloyd_value(order: int, t: float, r: int, L: int, lam: float) -> float:
    x = t * L * lam
    if order == 1:
        return x * x / r * math.exp(x / r)
    if order == 2:
        return (2.0 * x) ** 3 / (3.0 * r * r) * math.exp(2.0 * x / r)
    raise UnsupportedOrderError(f"Lloyd bound only defined for orders 1 and 2, got {order}")


def lloyd_bound(spec: FormulaSpec, L: int, lam: float) -> BoundReport:
    return BoundReport(
        Family.LLOYD, spec.order, spec.r, spec.t, lloyd_value(spec.order, spec.t, spec.r, L, lam),
        {"L": L, "Lambda": lam},
    )


def _commutator_terms(model: HamiltonianModel, order: int) -> list[PauliSum]:
    hs = model.ordered()
    rest = _suffix_sums(hs, model.n)
    if order == 1:
        return [commutator_sum(r, h) for h, r in zip(hs, rest)]
    # PF2: nested terms with weights 1/12 and 1/24 kept separate
    outer = [commutator_sum(r, commutator_sum(r, h)) for h, r in zip(hs, rest)]
    inner = [commutator_sum(h, commutator_sum(h, r)) for h, r in zip(hs, rest)]
    return outer + inner


class CommutatorBound:
    """r-independent norms behind the commutator and random-input bounds."""

    def __init__(self, model: HamiltonianModel, order: int, dm: DenseModel | None = None):
        if order not in (1, 2):
            raise UnsupportedOrderError(f"commutator bound only defined for orders 1 and 2, got {order}")
        self.order = order
        self.n = model.n
        dm = dm or DenseModel(model)
        terms = _commutator_terms(model, order)
        L = model.L
        spec_norms = [_norm_inf(c, dm) for c in terms]
        frob_norms = [c.frobenius_norm() for c in terms]
        if order == 1:
            self.spectral = 0.5 * sum(spec_norms)
            self.frobenius = 0.5 * sum(frob_norms)
        else:
            self.spectral = sum(spec_norms[:L]) / 12.0 + sum(spec_norms[L:]) / 24.0
            self.frobenius = sum(frob_norms[:L]) / 12.0 + sum(frob_norms[L:]) / 24.0

    def _scale(self, t: float, r: int) -> float:
        return t * t / r if self.order == 1 else t ** 3 / (r * r)

    def commutator(self, t: float, r: int) -> float:
        return self._scale(t, r) * self.spectral

    def random_input(self, t: float, r: int) -> float:
        return self._scale(t, r) * self.frobenius / (1 << self.n)


def commutator_bound(model: HamiltonianModel, spec: FormulaSpec) -> BoundReport:
    """PF1: t^2/(2r) sum_j ||sum_{k>j} [H_k, H_j]||; PF2: nested-commutator form."""
    cb = CommutatorBound(model, spec.order)
    return BoundReport(
        Family.COMMUTATOR, spec.order, spec.r, spec.t, cb.commutator(spec.t, spec.r),
        {"order": format_order(model.order)},
    )


def random_input_bound(model: HamiltonianModel, spec: FormulaSpec) -> BoundReport:
    """Commutator structure with Frobenius norms and a 1/2^n prefactor."""
    cb = CommutatorBound(model, spec.order)
    return BoundReport(
        Family.RANDOM_INPUT, spec.order, spec.r, spec.t, cb.random_input(spec.t, spec.r),
        {"order": format_order(model.order), "n": model.n},
    )


# -- observation cost ------------------------------------------------------------


def k_grid(r: int, max_terms: int | None) -> tuple[np.ndarray, float]:
    """Indices k used for the sum over k = 1..r and the weight of each.

    Exact when ``max_terms`` is None or r <= max_terms; otherwise one
    midpoint index per stratum of r / max_terms consecutive k.
    """
    if max_terms is None or r <= max_terms:
        return np.arange(1, r + 1, dtype=np.int64), 1.0
    m = np.arange(max_terms, dtype=np.float64)
    ks = np.floor((m + 0.5) * r / max_terms).astype(np.int64) + 1
    return ks, r / max_terms


def _herm_norms(x: np.ndarray) -> np.ndarray:
    """Spectral norms of a stack of Hermitian matrices."""
    d = x.shape[-1]
    if d == 1:
        return np.abs(x[:, 0, 0].real)
    if d == 2:
        # |lambda|_max = |tr|/2 + sqrt(((a - c)/2)^2 + |b|^2)
        a, c = x[:, 0, 0].real, x[:, 1, 1].real
        return 0.5 * np.abs(a + c) + np.hypot(0.5 * (a - c), np.abs(x[:, 0, 1]))
    vals = np.linalg.eigvalsh(x)
    return np.maximum(np.abs(vals[:, 0]), np.abs(vals[:, -1]))


class ObservationCost:
    """L(order) = (t/r) sum_{k=1}^r ||[Hbar, S^{-k} O S^k]||.

    Conjugations S^{-k} O S^k are taken in the eigenbasis of the block,
    where they reduce to elementwise phases, and all work is done per
    X-mask sector. ``max_terms`` caps the number of k evaluated.
    """

    def __init__(self, model: HamiltonianModel, obs: PauliSum, *, max_terms: int | None = None):
        if obs.n != model.n:
            raise ValueError("observable and model act on different qubit counts")
        if not obs.is_hermitian(1e-12):
            raise ValueError("observable must be Hermitian")
        self.model = model
        self.max_terms = max_terms
        self.dm = DenseModel(model, extra=[obs])
        self.obs_blocks = self.dm.dense(obs)

    def norms(self, spec: FormulaSpec, order: Sequence[int] | None = None) -> tuple[np.ndarray, np.ndarray, float]:
        """(ks, ||[Hbar, S^{-k} O S^k]|| for each k, weight)."""
        _require_pf12(spec)
        order = self.model.order if order is None else tuple(order)
        hbar = leading_difference(self.model.with_order(order), spec)
        ks, weight = k_grid(spec.r, self.max_terms)
        out = np.zeros(ks.size)
        if not hbar:
            return ks, out, weight
        blocks = self.dm.block(spec, order)
        for sec, blk, o in zip(self.dm.sectors, blocks, self.obs_blocks):
            c = hbar.to_dense(sec)
            if not c.any():
                continue
            with warnings.catch_warnings():
                # integer powers of the block do not depend on the branch
                warnings.simplefilter("ignore", BranchAmbiguityWarning)
                phases, w = unitary_eig(blk)
            wd = dagger(w)
            o_hat = wd @ o @ w
            c_hat = wd @ c @ w
            dphi = phases[:, None] - phases[None, :]
            d = sec.size
            chunk = max(1, (1 << 21) // (d * d))
            for start in range(0, ks.size, chunk):
                kk = ks[start : start + chunk].astype(np.float64)
                ok = o_hat[None] * np.exp(-1j * kk[:, None, None] * dphi[None])
                x = 1j * (c_hat @ ok - ok @ c_hat)
                nrm = _herm_norms(x)
                np.maximum(out[start : start + chunk], nrm, out=out[start : start + chunk])
        return ks, out, weight

    def __call__(self, spec: FormulaSpec, order: Sequence[int] | None = None) -> float:
        _, norms, weight = self.norms(spec, order)
        return spec.tau * weight * float(np.sum(norms))


def observation_cost(
    model: HamiltonianModel, obs: PauliSum, spec: FormulaSpec, *, max_terms: int | None = None
) -> BoundReport:
    value = ObservationCost(model, obs, max_terms=max_terms)(spec)
    ks, _ = k_grid(spec.r, max_terms)
    return BoundReport(
        Family.OBSERVATION, spec.order, spec.r, spec.t, value,
        {"order": format_order(model.order), "approx": True, "terms": int(ks.size)},
    )


class EmpiricalError:
    """Worst-case observation error ||U^dag O U - V^dag O V|| per sector."""

    def __init__(self, model: HamiltonianModel, obs: PauliSum):
        self.model = model
        self.dm = DenseModel(model, extra=[obs])
        self.obs_blocks = self.dm.dense(obs)
        self._heis: dict[float, list[np.ndarray]] = {}

    def __call__(self, spec: FormulaSpec, order: Sequence[int] | None = None) -> float:
        t = spec.t
        if t not in self._heis:
            us = self.dm.exact(t)
            self._heis = {t: [dagger(u) @ o @ u for u, o in zip(us, self.obs_blocks)]}
        worst = 0.0
        for blk, o, uou in zip(self.dm.block(spec, order), self.obs_blocks, self._heis[t]):
            v = np.linalg.matrix_power(blk, spec.r)
            diff = uou - dagger(v) @ o @ v
            worst = max(worst, spectral_norm(0.5 * (diff + dagger(diff))))
        return worst


# -- error kernel ----------------------------------------------------------------


def error_kernel(u: np.ndarray, v: np.ndarray, t: float) -> ErrorKernel:
    """E with e^{-itE} = U V^dag on the principal branch."""
    g = log_unitary_principal(u @ dagger(v))
    e = -g / t
    return ErrorKernel(e, spectral_norm(e))


def kernel_norm_bound(b: float, t: float) -> float:
    """(1/t) arccos(1 - B^2/2), evaluated as (2/t) arcsin(B/2)."""
    if not 0.0 <= b <= 2.0:
        raise ValueError(f"B must lie in [0, 2], got {b}")
    return 2.0 * math.asin(0.5 * b) / t


def kernel_observation_bound(e: np.ndarray, o: np.ndarray, t: float) -> float:
    return t * spectral_norm(commutator(e, o))


def kernel_random_input_bound(e: np.ndarray, o: np.ndarray, t: float, n: int) -> float:
    return t / (1 << n) * trace_norm(commutator(e, o))


def commutativity_alpha(e: np.ndarray, o: np.ndarray) -> float:
    """||[E/||E||, O/||O||]||, in [0, 2]."""
    ne, no = spectral_norm(e), spectral_norm(o)
    if ne == 0.0 or no == 0.0:
        raise ValueError("commutativity parameter needs non-zero E and O")
    return spectral_norm(commutator(e / ne, o / no))


def observation_error_fixed_state(u: np.ndarray, v: np.ndarray, o: np.ndarray, rho: np.ndarray) -> float:
    check_density_matrix(rho)
    exact = np.trace(o @ u @ rho @ dagger(u))
    approx = np.trace(o @ v @ rho @ dagger(v))
    return float(abs((exact - approx).real))


def observation_error_worst_case(u: np.ndarray, v: np.ndarray, o: np.ndarray) -> float:
    diff = dagger(u) @ o @ u - dagger(v) @ o @ v
    return spectral_norm(0.5 * (diff + dagger(diff)))


# -- principal error -------------------------------------------------------------


def simpson(
    f: Callable[[float], complex], a: float, b: float, *, rtol: float = 1e-8, atol: float = 1e-14,
    max_panels: int = 64,
) -> tuple[complex, bool, int]:
    """Composite Simpson with panel doubling until successive estimates agree.

    Each estimate carries the Richardson correction (S_2n - S_n) / 15, so the
    compared values converge at O(h^6) rather than O(h^4). ``atol`` keeps an
    integral that is zero up to rounding from never converging.
    """
    panels = 2
    vals = [f(x) for x in np.linspace(a, b, panels + 1)]
    h = (b - a) / panels
    plain = h / 3.0 * (vals[0] + 4.0 * vals[1] + vals[2])
    prev = None
    while panels < max_panels:
        panels *= 2
        h = (b - a) / panels
        mids = [f(a + (2 * i + 1) * h) for i in range(panels // 2)]
        merged = [None] * (panels + 1)
        merged[0::2] = vals
        merged[1::2] = mids
        vals = merged
        finer = h / 3.0 * (vals[0] + vals[-1] + 4.0 * sum(vals[1:-1:2]) + 2.0 * sum(vals[2:-1:2]))
        est = finer + (finer - plain) / 15.0
        if prev is not None and abs(est - prev) <= rtol * abs(est) + atol:
            return est, True, panels
        plain, prev = finer, est
    return prev, False, panels


def _eigen_frame(htilde: np.ndarray, *ops: np.ndarray):
    lam, q = np.linalg.eigh(0.5 * (htilde + dagger(htilde)))
    qd = dagger(q)
    return lam[:, None] - lam[None, :], [qd @ op @ q for op in ops]


def principal_observation_error(
    htilde: np.ndarray, hp: np.ndarray, o: np.ndarray, rho: np.ndarray, t: float
) -> QuadratureResult:
    """|int_0^t Tr([e^{-i tau H~} H' e^{i tau H~}, O] e^{-i H~ t} rho e^{i H~ t}) d tau|."""
    check_density_matrix(rho)
    if not (is_hermitian(htilde) and is_hermitian(hp)):
        raise ValueError("H~ and H' must be Hermitian")
    gap, (hp_hat, o_hat, rho_hat) = _eigen_frame(htilde, hp, o, rho)
    rho_t = rho_hat * np.exp(-1j * t * gap)

    def integrand(tau: float) -> complex:
        a = hp_hat * np.exp(-1j * tau * gap)
        return np.einsum("ij,ji->", a @ o_hat - o_hat @ a, rho_t)

    est, ok, panels = simpson(integrand, 0.0, t)
    return QuadratureResult(float(abs(est)), ok, panels)


def principal_bound_integral(htilde: np.ndarray, hp: np.ndarray, o: np.ndarray, t: float) -> QuadratureResult:
    """int_0^t ||[H', e^{i tau H~} O e^{-i tau H~}]|| d tau."""
    gap, (hp_hat, o_hat) = _eigen_frame(htilde, hp, o)

    def integrand(tau: float) -> float:
        a = hp_hat * np.exp(-1j * tau * gap)
        return spectral_norm(a @ o_hat - o_hat @ a)

    est, ok, panels = simpson(integrand, 0.0, t)
    return QuadratureResult(float(est.real if isinstance(est, complex) else est), ok, panels)


def residual_bound(norm_o: float, norm_h: float, norm_hp: float, t: float) -> float:
    """||O|| e^{2t||H||} (e^{2t||H'||} - 1 - 2t||H'||)."""
    if min(norm_o, norm_h, norm_hp) < 0:
        raise ValueError("norms must be non-negative")
    x = 2.0 * t * norm_hp
    return norm_o * math.exp(2.0 * t * norm_h) * (math.expm1(x) - x)


def two_part_M(model: HamiltonianModel, spec: FormulaSpec, *, part: int = 1, full_step: bool = False) -> PauliSum:
    """Closed-form M with [iM, H] = Hbar for a two-summand model under PF1.

    With parts A (applied first) and B, Hbar = (i tau/2)[A, B], solved by
    M = (tau/2) A or M = -(tau/2) B. ``full_step`` returns tau*A or tau*B
    instead; these solve the equation for 2 Hbar and -2 Hbar respectively.
    """
    if model.L != 2:
        raise ValueError(f"two-part shortcut needs exactly two summands, got {model.L}")
    if spec.order != 1:
        raise UnsupportedOrderError("two-part shortcut is derived for PF1")
    a, b = model.ordered()
    if full_step:
        return spec.tau * (a if part == 1 else b)
    return 0.5 * spec.tau * a if part == 1 else -0.5 * spec.tau * b


def two_term_M_bound(o: np.ndarray, rho: np.ndarray, m: np.ndarray) -> float:
    """||O|| ||[rho, M]||_1 + ||[O, M]||."""
    return spectral_norm(o) * trace_norm(commutator(rho, m)) + spectral_norm(commutator(o, m))


# -- Trotter number search -------------------------------------------------------


def trotter_number_search(
    bound_fn: Callable[[int], float], eps: float, *, cap: int = MAX_TROTTER, window: int = 4
) -> int:
    """Smallest r with bound_fn(r') <= eps for every r' in [r, r + window].

    Doubling from r = 1 brackets the first feasible r, bisection narrows it,
    and the ``window`` values above the candidate are re-checked. A failing
    look-ahead means the candidate was an isolated dip, and the search
    restarts above it. Raises TrotterCapExceeded past ``cap``.
    """
    if not eps > 0:
        raise ValueError("tolerance must be positive")
    values: dict[int, float] = {}

    def feasible(r: int) -> bool:
        if r not in values:
            values[r] = float(bound_fn(r))
        return values[r] <= eps  # NaN is infeasible

    lo = 0  # largest r known infeasible
    while True:
        hi = 1 if lo == 0 else min(2 * lo, cap)
        while not feasible(hi):
            if hi >= cap:
                raise TrotterCapExceeded(f"bound stays above {eps} up to r = {cap}")
            lo = hi
            hi = min(2 * hi, cap)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if feasible(mid):
                hi = mid
            else:
                lo = mid
        bad = next((r for r in range(hi + 1, min(hi + window, cap) + 1) if not feasible(r)), None)
        if bad is None:
            assert feasible(hi) and (hi == 1 or not feasible(hi - 1))
            return hi
        lo = bad
