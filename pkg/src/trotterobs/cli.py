"""Command-line entry point.

Exit codes: 0 success, 2 input or parse error, 3 numerical failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
from pathlib import Path

import numpy as np

from . import bounds as B
from .anneal import AnnealSchedule, fmt
from .dense import InvalidDensityMatrixError, NotHermitianError
from .hamiltonian import (
    HamiltonianModel,
    ParseError,
    build_hydrogen_sto3g,
    build_observable_z_uniform,
    load_hamiltonian,
    load_observable,
    single_qubit_observable,
)
from .harness import (
    ExperimentConfig,
    commutator_r_star,
    run_anneal_trials,
    run_heisenberg_comparison,
    scaling_fit,
    write_csv,
)
from .pauli import PauliSum
from .plotting import emit_plot
from .product_formula import DenseModel, FormulaSpec, UnsupportedOrderError, equivalent_hamiltonian_dense

EXIT_INPUT, EXIT_NUMERIC, EXIT_IO = 2, 3, 4


class NumericalFailure(RuntimeError):
    pass


def _input(path: str) -> str:
    if not Path(path).is_file():
        raise ValueError(f"no such input file: {path}")
    return path


def _model(arg: str) -> HamiltonianModel:
    if arg == "hydrogen":
        return build_hydrogen_sto3g()
    return load_hamiltonian(_input(arg))


def _observable(arg: str, n: int) -> PauliSum:
    """A file path, a single-qubit spec such as ``Z0``, or ``zuniform``."""
    if Path(arg).exists():
        obs = load_observable(arg)
    elif m := re.fullmatch(r"([XYZ])(\d+)", arg):
        q = int(m.group(2))
        if q >= n:
            raise ValueError(f"qubit {q} out of range for n = {n}")
        obs = single_qubit_observable(n, q, m.group(1))
    elif arg == "zuniform":
        obs = build_observable_z_uniform(n)
    else:
        raise ValueError(f"observable {arg!r} is neither a file, a qubit spec like Z0, nor 'zuniform'")
    if obs.n != n:
        raise ValueError(f"observable acts on {obs.n} qubits, Hamiltonian on {n}")
    return obs


def _rho(path: str, dim: int) -> np.ndarray:
    _input(path)
    rho = np.load(path) if path.endswith(".npy") else np.loadtxt(path, dtype=complex, ndmin=2)
    if rho.shape != (dim, dim):
        raise ValueError(f"density matrix has shape {rho.shape}, expected {(dim, dim)}")
    return rho


def cmd_bounds(args: argparse.Namespace) -> int:
    model = _model(args.hamiltonian)
    obs = _observable(args.observable, model.n)
    spec = FormulaSpec(args.order, args.t, args.r)
    dm = DenseModel(model, extra=[obs], split=False)
    h = dm.dense(model.total())[0]
    o = dm.dense(obs)[0]
    u = dm.exact(spec.t)[0]
    v = np.linalg.matrix_power(dm.block(spec)[0], spec.r)
    htilde = equivalent_hamiltonian_dense(model, spec)
    kernel = B.error_kernel(u, v, spec.t)

    reports = [
        B.lloyd_bound(spec, model.L, B.max_summand_norm(model, dm)),
        B.commutator_bound(model, spec),
        B.random_input_bound(model, spec),
        B.observation_cost(model, obs, spec, max_terms=args.max_terms),
        B.BoundReport(B.Family.KERNEL_EXACT, spec.order, spec.r, spec.t,
                      B.kernel_observation_bound(kernel.E, o, spec.t)),
    ]
    quad = B.principal_bound_integral(htilde, htilde - h, o, spec.t)
    reports.append(B.BoundReport(B.Family.PRINCIPAL_INTEGRAL, spec.order, spec.r, spec.t, quad.value,
                                 {"converged": quad.converged, "panels": quad.panels}))
    if args.rho:
        empirical = B.observation_error_fixed_state(u, v, o, _rho(args.rho, dm.dim))
    else:
        empirical = B.observation_error_worst_case(u, v, o)
    reports.append(B.BoundReport(B.Family.EMPIRICAL, spec.order, spec.r, spec.t, empirical,
                                 {"rho": args.rho or "worst_case"}))
    text = write_csv(None, ["family", "formula_order", "r", "t", "value"],
                     [[rep.family.value, rep.formula_order, rep.r, float(rep.t), rep.value] for rep in reports])
    sys.stdout.write(text)
    if not quad.converged:
        raise NumericalFailure("principal integral quadrature did not converge")
    return 0


def cmd_anneal(args: argparse.Namespace) -> int:
    model = _model(args.hamiltonian)
    obs = _observable(args.observable, model.n)
    base = FormulaSpec(args.order, args.t, 1)
    r = args.r if args.r is not None else commutator_r_star(model, base, args.epsilon)
    schedule = AnnealSchedule(args.theta0, args.theta_inf, args.alpha, args.seed)
    run = run_anneal_trials(model, obs, base.with_r(r), schedule, args.trials,
                            epsilon=None if args.r is not None else args.epsilon,
                            max_terms=args.max_terms, out_dir=Path(args.out))
    print(f"r={r} trials={args.trials} mean_initial={fmt(run.mean_initial)} mean_best={fmt(run.mean_best)}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    config = ExperimentConfig(
        model=args.model, n_min=args.n_min, n_max=args.n_max, t=args.t, epsilon=args.epsilon,
        formula_order=args.order, schedule=AnnealSchedule(args.theta0, args.theta_inf, args.alpha, args.seed),
        seed=args.seed, out_dir=Path(args.out), max_terms=args.max_terms,
    )
    result = run_heisenberg_comparison(config)
    sys.stdout.write(result.csv)
    capped = [f"n={r.n} {r.family.value}" for r in result.rows if r.capped]
    if capped:
        print("r* above cap for: " + ", ".join(capped), file=sys.stderr)
    return 0


def cmd_scaling(args: argparse.Namespace) -> int:
    fit = scaling_fit(_input(args.csv), args.family)
    print(f"exponent={fmt(fit.exponent)} intercept={fmt(fit.intercept)} r2={fmt(fit.r2)}")
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    emit_plot(_input(args.csv), args.kind, args.out)
    return 0


def _max_terms(text: str) -> int | None:
    return None if text in ("all", "0") else int(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trotterobs", description="Observable-aware Trotter error bounds.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--hamiltonian", required=True, help="model file or 'hydrogen'")
        sp.add_argument("--observable", required=True, help="observable file, e.g. Z0, or 'zuniform'")
        sp.add_argument("--t", type=float, required=True)
        sp.add_argument("--order", type=int, choices=(1, 2), default=1)
        sp.add_argument("--max-terms", type=_max_terms, default=256,
                        help="cap on the number of k in the observation cost ('all' for none)")

    sp = sub.add_parser("bounds", help="evaluate every bound family at fixed r")
    common(sp)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--rho", help="density matrix (.npy or text)")
    sp.set_defaults(func=cmd_bounds)

    def schedule_args(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--theta0", type=float, default=10.0)
        sp.add_argument("--theta-inf", type=float, default=1.0)
        sp.add_argument("--alpha", type=float, default=0.95)
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("anneal", help="optimize the evolution order")
    common(sp)
    sp.add_argument("--r", type=int, help="Trotter number (default: commutator r* at --epsilon)")
    sp.add_argument("--epsilon", type=float, default=1e-3)
    schedule_args(sp)
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_anneal)

    sp = sub.add_parser("compare", help="r* for every family against n")
    sp.add_argument("--model", default="heisenberg", help="heisenberg, ising or a model file")
    sp.add_argument("--n-min", type=int, default=4)
    sp.add_argument("--n-max", type=int, default=8)
    sp.add_argument("--t", type=float, help="fixed time (default: t = n)")
    sp.add_argument("--epsilon", type=float, default=1e-3)
    sp.add_argument("--order", type=int, choices=(1, 2), default=1)
    sp.add_argument("--max-terms", type=_max_terms, default=256)
    schedule_args(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("scaling", help="power-law fit of r* against n")
    sp.add_argument("--csv", required=True)
    sp.add_argument("--family", required=True, choices=[f.value for f in B.Family])
    sp.set_defaults(func=cmd_scaling)

    sp = sub.add_parser("plot", help="render a CSV as SVG")
    sp.add_argument("--csv", required=True)
    sp.add_argument("--kind", required=True, choices=("anneal", "compare"))
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_plot)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (B.TrotterCapExceeded, NumericalFailure, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParseError, UnsupportedOrderError, NotHermitianError, InvalidDensityMatrixError, ValueError,
            IndexError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
