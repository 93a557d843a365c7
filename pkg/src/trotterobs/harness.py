"""Experiment drivers: order annealing on H2, r* comparison on Heisenberg chains,
and the power-law fit of r* against n. All CSV output goes through ``write_csv``.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .anneal import AnnealSchedule, AnnealTrace, fmt, optimize_order
from .bounds import (
    CommutatorBound,
    EmpiricalError,
    Family,
    ObservationCost,
    TrotterCapExceeded,
    lloyd_value,
    max_summand_norm,
    trotter_number_search,
)
from .hamiltonian import (
    HamiltonianModel,
    build_heisenberg_xyz,
    build_hydrogen_sto3g,
    build_observable_z_uniform,
    build_transverse_ising,
    format_order,
    heisenberg_fields,
    load_hamiltonian,
    single_qubit_observable,
)
from .pauli import PauliSum
from .product_formula import DenseModel, FormulaSpec

log = logging.getLogger(__name__)

COMPARE_FAMILIES = (Family.LLOYD, Family.COMMUTATOR, Family.RANDOM_INPUT, Family.OBSERVATION, Family.EMPIRICAL)
MAX_DENSE_QUBITS = 10


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "heisenberg"  # hydrogen | heisenberg | ising | path to a .ham file
    n_min: int = 4
    n_max: int = 8
    t: float | None = None  # None: t = n
    epsilon: float = 1e-3
    formula_order: int = 1
    schedule: AnnealSchedule = field(default_factory=AnnealSchedule)
    trials: int = 1
    seed: int = 0
    out_dir: Path | None = None
    max_terms: int | None = 256

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.n_min > self.n_max:
            raise ValueError("empty n range")
        if self.formula_order not in (1, 2):
            raise ValueError("experiments use PF1 or PF2")

    def time_for(self, n: int) -> float:
        return float(n) if self.t is None else float(self.t)


def hydrogen_config(**overrides) -> ExperimentConfig:
    """Defaults for the H2 order-optimization experiment."""
    base = ExperimentConfig(
        model="hydrogen", n_min=4, n_max=4, t=4.0, epsilon=1e-3, formula_order=1,
        schedule=AnnealSchedule(10.0, 1.0, 0.95, 0), trials=50, seed=0,
    )
    return replace(base, **overrides)


def write_csv(path: Path | None, header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    text = buf.getvalue()
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(text.encode("utf-8"))
    return text


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows and not Path(path).read_text(encoding="utf-8").strip():
        raise ValueError(f"{path} is empty")
    return rows


def build_model(selector: str, n: int, seed: int) -> HamiltonianModel:
    if selector == "hydrogen":
        return build_hydrogen_sto3g()
    if selector == "heisenberg":
        return build_heisenberg_xyz(n, seed)
    if selector == "ising":
        fields = heisenberg_fields(n, seed)
        return build_transverse_ising(n, {(j, j + 1): 1.0 for j in range(n - 1)}, list(fields))
    if not Path(selector).is_file():
        raise ValueError(f"unknown model {selector!r}: not a builtin name or an existing file")
    return load_hamiltonian(selector)


def commutator_r_star(model: HamiltonianModel, spec: FormulaSpec, eps: float, dm: DenseModel | None = None) -> int:
    cb = CommutatorBound(model, spec.order, dm)
    return trotter_number_search(lambda r: cb.commutator(spec.t, r), eps)


# -- annealing -------------------------------------------------------------------


@dataclass(frozen=True)
class AnnealRun:
    r: int
    traces: tuple[AnnealTrace, ...]
    seeds: tuple[int, ...]
    files: dict[str, str]

    @property
    def mean_initial(self) -> float:
        return float(np.mean([tr.initial_cost for tr in self.traces]))

    @property
    def mean_best(self) -> float:
        return float(np.mean([tr.best_cost for tr in self.traces]))


def run_anneal_trials(
    model: HamiltonianModel,
    obs: PauliSum,
    spec: FormulaSpec,
    schedule: AnnealSchedule,
    trials: int,
    *,
    epsilon: float | None = None,
    max_terms: int | None = 256,
    out_dir: Path | None = None,
    prefix: str = "anneal",
) -> AnnealRun:
    """Independent trials with seeds schedule.seed + i, sharing one cost cache."""
    evaluator = ObservationCost(model, obs, max_terms=max_terms)
    memo: dict[tuple[int, ...], float] = {}

    def cost(order: tuple[int, ...]) -> float:
        if order not in memo:
            memo[order] = evaluator(spec, order)
        return memo[order]

    seeds = tuple(schedule.seed + i for i in range(trials))
    traces = tuple(optimize_order(model, obs, spec, replace(schedule, seed=s), cost=cost)[1] for s in seeds)
    eps = "" if epsilon is None else epsilon
    common = [eps, spec.t, spec.r, spec.order]

    mean_rows = [[0, "", float(np.mean([tr.initial_cost for tr in traces])),
                  float(np.mean([tr.initial_cost for tr in traces])), trials, *common]]
    for i, theta in enumerate(schedule.temperatures()):
        mean_rows.append([
            i + 1, theta,
            float(np.mean([tr.entries[i].cost for tr in traces])),
            float(np.mean([tr.entries[i].best_cost for tr in traces])),
            trials, *common,
        ])
    trial_rows = []
    for k, (s, tr) in enumerate(zip(seeds, traces)):
        for e in tr.entries:
            trial_rows.append([
                k, s, e.iteration + 1, e.theta, e.a + 1, e.b + 1, int(e.accepted), e.u,
                e.proposed_cost, e.cost, e.best_cost, *common,
            ])
    summary_rows = [
        [k, s, format_order(tr.initial_order), tr.initial_cost, format_order(tr.best_order), tr.best_cost,
         format_order(tr.final_order), tr.final_cost, *common]
        for k, (s, tr) in enumerate(zip(seeds, traces))
    ]
    tail = ["epsilon", "t", "r", "formula_order"]
    out = (lambda name: out_dir / f"{prefix}_{name}.csv") if out_dir is not None else (lambda name: None)
    files = {
        "mean": write_csv(out("mean"), ["iter", "theta", "mean_cost", "mean_best", "trials", *tail], mean_rows),
        "trials": write_csv(
            out("trials"),
            ["trial", "seed", "iter", "theta", "a", "b", "accepted", "u", "proposed_cost", "cost", "best", *tail],
            trial_rows,
        ),
        "summary": write_csv(
            out("summary"),
            ["trial", "seed", "initial_order", "initial_cost", "best_order", "best_cost", "final_order",
             "final_cost", *tail],
            summary_rows,
        ),
    }
    return AnnealRun(spec.r, traces, seeds, files)


@dataclass(frozen=True)
class HydrogenResult:
    anneal: AnnealRun
    initial_order: tuple[int, ...]
    best_order: tuple[int, ...]
    r_star_initial: int
    r_star_best: int
    files: dict[str, str]


def run_hydrogen_experiment(config: ExperimentConfig | None = None) -> HydrogenResult:
    """Anneal the H2 evolution order against the observation cost with O = Z_0.

    The cost is evaluated at the commutator-bound r* of the default order.
    Also reports r* under the observation bound for the default order and
    the lowest-cost order found over all trials.
    """
    config = config or hydrogen_config()
    model = build_model(config.model, config.n_min, config.seed)
    obs = single_qubit_observable(model.n, 0, "Z")
    t = config.time_for(model.n)
    base = FormulaSpec(config.formula_order, t, 1)
    r = commutator_r_star(model, base, config.epsilon)
    spec = base.with_r(r)
    run = run_anneal_trials(
        model, obs, spec, config.schedule, config.trials,
        epsilon=config.epsilon, max_terms=config.max_terms, out_dir=config.out_dir, prefix="hydrogen",
    )
    best_trace = min(run.traces, key=lambda tr: tr.best_cost)
    initial = tuple(range(model.L))
    oc = ObservationCost(model, obs, max_terms=config.max_terms)
    r_init = trotter_number_search(lambda k: oc(base.with_r(k), initial), config.epsilon)
    r_best = trotter_number_search(lambda k: oc(base.with_r(k), best_trace.best_order), config.epsilon)
    rows = [
        ["initial", format_order(initial), Family.OBSERVATION.value, r_init, config.seed, config.epsilon, t,
         config.formula_order, r],
        ["optimized", format_order(best_trace.best_order), Family.OBSERVATION.value, r_best, config.seed,
         config.epsilon, t, config.formula_order, r],
    ]
    path = None if config.out_dir is None else config.out_dir / "hydrogen_rstar.csv"
    files = dict(run.files)
    files["rstar"] = write_csv(
        path, ["label", "order", "family", "r_star", "seed", "epsilon", "t", "formula_order", "anneal_r"], rows
    )
    return HydrogenResult(run, initial, best_trace.best_order, r_init, r_best, files)


# -- r* comparison ---------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    n: int
    family: Family
    r_star: int | None  # None when the search hit the cap
    order: tuple[int, ...]
    t: float
    anneal_r: int

    @property
    def capped(self) -> bool:
        return self.r_star is None

    def effective(self) -> float:
        return math.inf if self.r_star is None else float(self.r_star)


@dataclass(frozen=True)
class ComparisonResult:
    rows: tuple[ComparisonRow, ...]
    csv: str

    def r_star(self, n: int, family: Family | str) -> float:
        fam = Family(family)
        return next(r.effective() for r in self.rows if r.n == n and r.family is fam)

    def ordering_holds(self, n: int) -> bool:
        chain = [self.r_star(n, f) for f in (Family.EMPIRICAL, Family.OBSERVATION, Family.COMMUTATOR, Family.LLOYD)]
        return all(a <= b for a, b in zip(chain, chain[1:]))


def _search(fn: Callable[[int], float], eps: float) -> int | None:
    try:
        return trotter_number_search(fn, eps)
    except TrotterCapExceeded:
        return None


def compare_one(
    model: HamiltonianModel, obs: PauliSum, config: ExperimentConfig, schedule: AnnealSchedule | None = None
) -> list[ComparisonRow]:
    """Anneal the order for the observation cost, then r* for every family."""
    n = model.n
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"n = {n} exceeds the dense limit of {MAX_DENSE_QUBITS} qubits")
    eps = config.epsilon
    t = config.time_for(n)
    base = FormulaSpec(config.formula_order, t, 1)
    dm = DenseModel(model)
    default_cb = CommutatorBound(model, base.order, dm)
    r_anneal = _search(lambda r: default_cb.commutator(t, r), eps)
    if r_anneal is None:
        raise TrotterCapExceeded(f"commutator r* above cap for n = {n}; cannot fix the annealing r")
    oc = ObservationCost(model, obs, max_terms=config.max_terms)
    if model.L >= 2:
        best, _ = optimize_order(
            model, obs, base.with_r(r_anneal), schedule or config.schedule,
            cost=lambda o: oc(base.with_r(r_anneal), o),
        )
    else:
        best = model.order
    tuned = model.with_order(best)
    cb = CommutatorBound(tuned, base.order, dm)
    lam = max_summand_norm(model, dm)
    emp = EmpiricalError(tuned, obs)
    fns: dict[Family, Callable[[int], float]] = {
        Family.LLOYD: lambda r: lloyd_value(base.order, t, r, model.L, lam),
        Family.COMMUTATOR: lambda r: cb.commutator(t, r),
        Family.RANDOM_INPUT: lambda r: cb.random_input(t, r),
        Family.OBSERVATION: lambda r: oc(base.with_r(r), best),
        Family.EMPIRICAL: lambda r: emp(base.with_r(r)),
    }
    rows = []
    for fam in COMPARE_FAMILIES:
        rows.append(ComparisonRow(n, fam, _search(fns[fam], eps), tuple(best), t, r_anneal))
        log.info("n=%d %s r*=%s", n, fam.value, rows[-1].r_star)
    return rows


def run_heisenberg_comparison(config: ExperimentConfig | None = None, obs_builder=build_observable_z_uniform) -> ComparisonResult:
    """One CSV row per (n, family), written in (n, family) order."""
    config = config or ExperimentConfig()
    rows: list[ComparisonRow] = []
    for n in range(config.n_min, config.n_max + 1):
        model = build_model(config.model, n, config.seed)
        rows.extend(compare_one(model, obs_builder(model.n), config))
    text = write_csv(
        None if config.out_dir is None else config.out_dir / "compare.csv",
        ["n", "family", "r_star", "status", "order", "seed", "epsilon", "t", "formula_order", "approx",
         "anneal_r", "model"],
        [
            [r.n, r.family.value, "" if r.capped else r.r_star, "cap_exceeded" if r.capped else "ok",
             format_order(r.order), config.seed, config.epsilon, r.t, config.formula_order,
             "true" if r.family is Family.OBSERVATION else "false", r.anneal_r, config.model]
            for r in rows
        ],
    )
    return ComparisonResult(tuple(rows), text)


# -- scaling ---------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    intercept: float
    r2: float


def fit_power_law(ns: Sequence[float], rs: Sequence[float]) -> ScalingFit:
    """Least-squares line through (ln n, ln r*)."""
    if len(ns) < 3:
        raise ValueError(f"need at least 3 points for a fit, got {len(ns)}")
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(rs, dtype=float))
    a = np.column_stack([x, np.ones_like(x)])
    (slope, icpt), *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - (slope * x + icpt)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ScalingFit(float(slope), float(icpt), r2)


def scaling_fit(csv_source: str | Path | Sequence[dict[str, str]], family: str) -> ScalingFit:
    rows = read_csv(csv_source) if isinstance(csv_source, (str, Path)) else list(csv_source)
    fam = Family(family).value
    pts = [(float(r["n"]), float(r["r_star"])) for r in rows if r.get("family") == fam and r.get("r_star")]
    return fit_power_law([p[0] for p in pts], [p[1] for p in pts])
