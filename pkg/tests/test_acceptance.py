"""Acceptance criteria, one test each, at the stated tolerances.

Every test prints a single ``criterion N: PASS|FAIL ...`` line. The heavy
experiments (H2 annealing, Heisenberg comparison) run once per module and are
rerun in a second directory for the determinism check.
"""

import math
import time
from math import comb

import numpy as np
import pytest
import scipy.linalg as sl

from oracles import comm, model_dense, nested_left, nested_right, opnorm, random_density, random_hermitian, random_model
from trotterobs.anneal import AnnealSchedule
from trotterobs.bounds import (
    commutator_bound,
    error_kernel,
    kernel_norm_bound,
    kernel_observation_bound,
    lloyd_bound,
    observation_error_worst_case,
    principal_bound_integral,
    principal_observation_error,
    residual_bound,
)
from trotterobs.hamiltonian import build_heisenberg_xyz
from trotterobs.harness import ExperimentConfig, hydrogen_config, run_heisenberg_comparison, run_hydrogen_experiment, scaling_fit
from trotterobs.product_formula import (
    FormulaSpec,
    equivalent_hamiltonian_dense,
    exact_evolution,
    leading_difference,
    product_formula,
)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return emit


def _hydrogen(out_dir):
    return run_hydrogen_experiment(hydrogen_config(out_dir=out_dir))


def _heisenberg(out_dir):
    cfg = ExperimentConfig(model="heisenberg", n_min=4, n_max=8, t=None, epsilon=1e-3, formula_order=1,
                           schedule=AnnealSchedule(10.0, 1.0, 0.95, 0), seed=0, out_dir=out_dir)
    return run_heisenberg_comparison(cfg)


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    out = tmp_path_factory.mktemp("first")
    start = time.perf_counter()
    h2 = _hydrogen(out)
    mid = time.perf_counter()
    heis = _heisenberg(out)
    end = time.perf_counter()
    return {"dir": out, "h2": h2, "heis": heis, "h2_seconds": mid - start, "heis_seconds": end - mid}


def test_criterion_1_order_optimization(runs, report):
    h2 = runs["h2"]
    ratio = h2.anneal.mean_best / h2.anneal.mean_initial
    ok = ratio <= 0.6
    report(1, ok, f"mean best / mean initial = {ratio:.4f} (<= 0.6), r = {h2.anneal.r}, "
                  f"r*(obs) initial {h2.r_star_initial} -> optimized {h2.r_star_best}, "
                  f"{runs['h2_seconds']:.1f} s")
    assert ok


def test_criterion_2_trotter_compression(runs, report):
    res = runs["heis"]
    ratio = res.r_star(8, "observation") / res.r_star(8, "commutator")
    chains = {n: res.ordering_holds(n) for n in range(4, 9)}
    ok = ratio <= 0.75 and all(chains.values())
    capped = sorted({f"n={r.n} {r.family.value}" for r in res.rows if r.capped})
    report(2, ok, f"r*(obs)/r*(comm) at n=8 = {ratio:.4f} (<= 0.75), ordering {chains}, "
                  f"capped rows treated as +inf: {capped}, {runs['heis_seconds']:.1f} s")
    assert ok


def test_criterion_3_scaling(runs, report):
    fit = scaling_fit(list(_dict_rows(runs["heis"].csv)), "observation")
    ok = 2.0 <= fit.exponent <= 3.2 and fit.r2 >= 0.95
    report(3, ok, f"exponent = {fit.exponent:.3f} in [2.0, 3.2], R^2 = {fit.r2:.4f} (>= 0.95)")
    assert ok


def _dict_rows(text):
    lines = text.splitlines()
    header = lines[0].split(",")
    return (dict(zip(header, line.split(","))) for line in lines[1:])


def test_criterion_4_soundness(report):
    rng = np.random.default_rng(2024)
    violations = []
    checked = 0
    for order in (1, 2):
        for i in range(20):
            n, L = int(rng.integers(1, 4)), int(rng.integers(2, 5))
            m = random_model(rng, n, L).with_order(tuple(rng.permutation(L)))
            spec = FormulaSpec(order, float(rng.uniform(0.1, 2.0)), int(rng.integers(1, 17)))
            u, v = exact_evolution(m, spec.t), product_formula(m, spec)
            o = random_hermitian(rng, 2**n)
            measured = opnorm(u - v)
            comm_b = commutator_bound(m, spec).value
            lam = max(opnorm(h) for h in model_dense(m))
            lloyd = lloyd_bound(spec, L, lam).value
            kernel = error_kernel(u, v, spec.t)
            obs_worst = observation_error_worst_case(u, v, o)
            obs_bound = kernel_observation_bound(kernel.E, o, spec.t)
            e_bound = kernel_norm_bound(min(measured, 2.0), spec.t)
            checks = {
                "U-V <= commutator": measured <= comm_b * (1 + 1e-12) + 1e-14,
                "commutator <= lloyd": comm_b <= lloyd * (1 + 1e-12),
                "observation <= t||[E,O]||": obs_worst <= obs_bound * (1 + 1e-9) + 1e-12,
                "||E|| <= kernel norm bound": opnorm(kernel.E) <= e_bound * (1 + 1e-9) + 1e-12,
            }
            checked += len(checks)
            violations += [(order, i, name) for name, ok in checks.items() if not ok]
    ok = not violations
    report(4, ok, f"{checked} checks over 20 models x PF1/PF2, violations: {violations}")
    assert ok


def test_criterion_5_principal_decomposition(report):
    rng = np.random.default_rng(55)
    violations = []
    worst_gap = 0.0
    for i in range(20):
        d = 2 ** int(rng.integers(1, 3))
        t = float(rng.uniform(0.2, 2.0))
        h = random_hermitian(rng, d)
        hp = random_hermitian(rng, d)
        hp *= rng.uniform(0.05, 0.5) / (t * opnorm(hp))
        htilde = h + hp
        o, rho = random_hermitian(rng, d), random_density(rng, d)

        def heisenberg(a):
            return sl.expm(1j * t * a) @ o @ sl.expm(-1j * t * a)

        exact = abs(np.trace((heisenberg(htilde) - heisenberg(h)) @ rho))
        principal = principal_observation_error(htilde, hp, o, rho, t).value
        resid = residual_bound(opnorm(o), max(opnorm(h), opnorm(htilde)), opnorm(hp), t)
        integral = principal_bound_integral(htilde, hp, o, t).value
        worst_gap = max(worst_gap, abs(exact - principal) / resid)
        if abs(exact - principal) > resid + 1e-9:
            violations.append((i, "residual"))
        if principal > integral + 1e-9:
            violations.append((i, "integral"))
    ok = not violations
    report(5, ok, f"20 instances with t||H'|| <= 0.5, violations: {violations}, "
                  f"max |E - E~| / residual = {worst_gap:.3g}")
    assert ok


def test_criterion_6_nested_commutator_identity(report):
    rng = np.random.default_rng(66)
    dev = 0.0
    for n in range(1, 5):
        for _ in range(10):
            h, hp, o = (random_hermitian(rng, 4) for _ in range(3))
            lhs = sum(nested_right(h, comm(hp, nested_right(h, o, n - l)), l - 1) for l in range(1, n + 1))
            rhs = sum(comb(n, l + 1) * nested_right(h, comm(nested_left(h, hp, l), o), n - l - 1) for l in range(n))
            dev = max(dev, opnorm(lhs - rhs))
    ok = dev <= 1e-10
    report("6 (identity)", ok, f"max deviation over n=1..4, 10 triples each = {dev:.3g} (<= 1e-10)")
    assert ok


def _residual_ratio(order):
    m = build_heisenberg_xyz(3, 0)
    h = sum(model_dense(m))
    res = []
    for r in (8, 16):
        spec = FormulaSpec(order, 1.0, r)
        res.append(opnorm(equivalent_hamiltonian_dense(m, spec) - h - leading_difference(m, spec).to_dense()))
    return res[0] / res[1]


@pytest.mark.parametrize("order", [1, 2])
def test_criterion_6_residual_shrink(order, report):
    # the stated target is 2^(order+1); for PF2 the residual after the tau^2
    # term is O(tau^4) because a symmetric block has no odd powers, so the
    # measured ratio is near 16 and this part is expected to fail
    target = 2 ** (order + 1)
    ratio = _residual_ratio(order)
    ok = abs(ratio - target) <= 0.25 * target
    report(f"6 (residual PF{order})", ok,
           f"||H~ - H - Hbar|| ratio r=8 -> 16 = {ratio:.4f}, target {target} +/- 25%")
    assert ok


def test_criterion_7_convergence_order(report):
    m = build_heisenberg_xyz(3, 0)
    u = exact_evolution(m, 1.0)
    ratios = {}
    for order in (1, 2):
        e8, e16 = (opnorm(u - product_formula(m, FormulaSpec(order, 1.0, r))) for r in (8, 16))
        ratios[order] = e8 / e16
    ok = 1.8 < ratios[1] < 2.2 and 3.5 < ratios[2] < 4.5
    report(7, ok, f"PF1 ratio = {ratios[1]:.4f} in (1.8, 2.2), PF2 ratio = {ratios[2]:.4f} in (3.5, 4.5)")
    assert ok


def test_criterion_8_determinism(runs, report, tmp_path):
    _hydrogen(tmp_path)
    _heisenberg(tmp_path)
    first = sorted(p.name for p in runs["dir"].glob("*.csv"))
    second = sorted(p.name for p in tmp_path.glob("*.csv"))
    differing = [name for name in first if (runs["dir"] / name).read_bytes() != (tmp_path / name).read_bytes()]
    ok = first == second and not differing and len(first) >= 5
    report(8, ok, f"{len(first)} CSV files compared byte-for-byte, differing: {differing}")
    assert ok
    assert math.isfinite(runs["h2"].anneal.mean_best)
