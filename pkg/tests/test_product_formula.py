import numpy as np
import pytest

from oracles import block_oracle, kron_label, model_dense, opnorm, random_hermitian, random_model, taylor_expm
from trotterobs.dense import is_unitary
from trotterobs.hamiltonian import HamiltonianModel, build_heisenberg_xyz
from trotterobs.pauli import PauliSum
from trotterobs.product_formula import (
    DenseModel,
    FormulaSpec,
    UnsupportedOrderError,
    conjugated_observable_sequence,
    equivalent_hamiltonian_dense,
    exact_evolution,
    factor_schedule,
    leading_difference,
    product_formula,
    suzuki_p,
    trotter_block,
)


def _xz():
    return HamiltonianModel(1, (PauliSum.from_label("X"), PauliSum.from_label("Z")))


def _commuting(n=2):
    return HamiltonianModel(n, (PauliSum.from_list([(0.4, "ZI"), (-0.3, "IZ")]), PauliSum.from_label("ZZ", 0.9)))


def test_spec_validation():
    with pytest.raises(UnsupportedOrderError):
        FormulaSpec(3, 1.0, 1)
    with pytest.raises(ValueError):
        FormulaSpec(1, 0.0, 1)
    with pytest.raises(ValueError):
        FormulaSpec(1, 1.0, 0)
    assert FormulaSpec(4, 1.0, 2).tau == 0.5
    assert suzuki_p(2) == pytest.approx(1 / (4 - 4 ** (1 / 3)))


def test_exact_evolution():
    m = build_heisenberg_xyz(2, 3)
    np.testing.assert_allclose(exact_evolution(m, 1e-300), np.eye(4), atol=1e-15)
    h = sum(model_dense(m))
    np.testing.assert_allclose(exact_evolution(m, 0.8), taylor_expm(-0.8j * h), atol=1e-11)
    single = HamiltonianModel(2, (m.summands[0],))
    np.testing.assert_allclose(exact_evolution(single, 0.5), trotter_block(single, FormulaSpec(1, 0.5, 1)))


def test_block_factor_order():
    rng = np.random.default_rng(1)
    m = random_model(rng, 2, 3).with_order((1, 0, 2))
    h = model_dense(m)
    tau = 0.3
    ref = taylor_expm(-1j * tau * h[2]) @ taylor_expm(-1j * tau * h[0]) @ taylor_expm(-1j * tau * h[1])
    np.testing.assert_allclose(trotter_block(m, FormulaSpec(1, 0.6, 2)), ref, atol=1e-12)


@pytest.mark.parametrize("order", [1, 2])
def test_block_matches_oracle(order):
    rng = np.random.default_rng(order)
    for _ in range(5):
        m = random_model(rng, 3, 4)
        perm = tuple(rng.permutation(4))
        spec = FormulaSpec(order, 1.3, 3)
        np.testing.assert_allclose(
            trotter_block(m.with_order(perm), spec), block_oracle(m, order, spec.tau, perm), atol=1e-11
        )


def test_pf2_is_pf1_of_palindrome():
    rng = np.random.default_rng(2)
    m = random_model(rng, 2, 3)
    doubled = HamiltonianModel(2, m.summands + m.summands[::-1])
    spec = FormulaSpec(2, 0.8, 1)
    np.testing.assert_allclose(trotter_block(m, spec), trotter_block(doubled, FormulaSpec(1, 0.4, 1)), atol=1e-13)


def test_commuting_summands():
    m = _commuting()
    for order in (1, 2, 4):
        spec = FormulaSpec(order, 0.9, 3)
        np.testing.assert_allclose(trotter_block(m, spec), exact_evolution(m, spec.tau), atol=1e-12)
        np.testing.assert_allclose(product_formula(m, spec), exact_evolution(m, 0.9), atol=1e-10)


def test_suzuki_schedule_structure():
    sched = factor_schedule(4, (0, 1), 1.0)
    assert sum(s for j, s in sched if j == 0) == pytest.approx(1.0)
    assert sum(s for j, s in sched if j == 1) == pytest.approx(1.0)
    assert all(a[0] != b[0] for a, b in zip(sched, sched[1:]))


def test_pf4_converges_faster():
    m = build_heisenberg_xyz(3, 0)
    u = exact_evolution(m, 1.0)
    e = [opnorm(u - product_formula(m, FormulaSpec(4, 1.0, r))) for r in (4, 8)]
    assert 12 < e[0] / e[1] < 20


def test_product_formula_basics():
    rng = np.random.default_rng(4)
    m = random_model(rng, 2, 3)
    spec = FormulaSpec(2, 1.0, 1)
    np.testing.assert_allclose(product_formula(m, spec), trotter_block(m, spec))
    assert is_unitary(product_formula(m, spec.with_r(50)), 1e-9)


def test_pf2_error_quarter_on_doubling():
    m = build_heisenberg_xyz(3, 0)
    u = exact_evolution(m, 1.0)
    e8, e16 = (opnorm(u - product_formula(m, FormulaSpec(2, 1.0, r))) for r in (8, 16))
    assert 3.5 < e8 / e16 < 4.5


def test_conjugated_sequence():
    rng = np.random.default_rng(5)
    m = random_model(rng, 2, 3)
    spec = FormulaSpec(1, 1.0, 6)
    seq = conjugated_observable_sequence(m, spec, np.eye(4))
    assert all(np.allclose(s, np.eye(4)) for s in seq)
    o = random_hermitian(rng, 4)
    s = trotter_block(m, spec)
    for k, got in enumerate(conjugated_observable_sequence(m, spec, o), start=1):
        sk = np.linalg.matrix_power(s, k)
        np.testing.assert_allclose(got, sk.conj().T @ o @ sk, atol=1e-12)
    z = kron_label("ZZ")
    for got in conjugated_observable_sequence(_commuting(), spec, z):
        np.testing.assert_allclose(got, z, atol=1e-12)


def test_leading_difference_examples():
    assert leading_difference(_xz(), FormulaSpec(1, 1.0, 1)) == PauliSum.from_label("Y")
    assert not leading_difference(_commuting(), FormulaSpec(1, 1.0, 1))
    assert not leading_difference(_commuting(), FormulaSpec(2, 1.0, 1))
    with pytest.raises(UnsupportedOrderError):
        leading_difference(_xz(), FormulaSpec(4, 1.0, 1))


def test_leading_difference_reversal_flips_sign_pf1():
    rng = np.random.default_rng(6)
    m = random_model(rng, 2, 2)
    spec = FormulaSpec(1, 0.7, 3)
    assert leading_difference(m.with_order((1, 0)), spec).allclose(-leading_difference(m, spec))


def test_leading_difference_scaling_in_tau():
    rng = np.random.default_rng(7)
    m = random_model(rng, 2, 3)
    for order, power in ((1, 1), (2, 2)):
        a = leading_difference(m, FormulaSpec(order, 1.0, 1))
        b = leading_difference(m, FormulaSpec(order, 1.0, 2))
        assert (a / 2**power).allclose(b)


def _residuals(m, order, rs, t=1.0):
    h = sum(model_dense(m))
    out = []
    for r in rs:
        spec = FormulaSpec(order, t, r)
        hbar = leading_difference(m, spec).to_dense()
        out.append(opnorm(equivalent_hamiltonian_dense(m, spec) - h - hbar))
    return out


def test_equivalent_hamiltonian_basics():
    m = _commuting()
    h = sum(model_dense(m))
    np.testing.assert_allclose(equivalent_hamiltonian_dense(m, FormulaSpec(1, 1.0, 2)), h, atol=1e-9)
    single = HamiltonianModel(2, (m.summands[1],))
    np.testing.assert_allclose(
        equivalent_hamiltonian_dense(single, FormulaSpec(2, 1.0, 4)), model_dense(single)[0], atol=1e-12
    )


def test_pf1_residual_shrinks_one_order_faster():
    rng = np.random.default_rng(8)
    m = random_model(rng, 3, 4)
    res = _residuals(m, 1, (8, 16, 32))
    ratios = [a / b for a, b in zip(res, res[1:])]
    assert 3.0 < ratios[-1] < 5.0


def test_pf2_residual_has_no_odd_term():
    # a symmetric block has only even powers of tau in its exponent, so the
    # residual after the tau^2 term is O(tau^4): doubling r gives about 16x
    rng = np.random.default_rng(9)
    m = random_model(rng, 3, 4)
    res = _residuals(m, 2, (8, 16, 32))
    assert 12.0 < res[-2] / res[-1] < 20.0


def test_sectors_reassemble_full_block():
    m = build_heisenberg_xyz(4, 1)
    spec = FormulaSpec(2, 1.0, 3)
    dm = DenseModel(m)
    assert len(dm.sectors) == 2
    np.testing.assert_allclose(dm.embed(dm.block(spec)), trotter_block(m, spec), atol=1e-13)
    np.testing.assert_allclose(dm.embed(dm.exact(1.0)), exact_evolution(m, 1.0), atol=1e-12)
