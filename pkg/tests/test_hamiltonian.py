from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import kron_label, kron_sum
from trotterobs.dense import spectral_norm
from trotterobs.hamiltonian import (
    HYDROGEN_STO3G_TERMS,
    HamiltonianModel,
    ParseError,
    build_heisenberg_xyz,
    build_hydrogen_sto3g,
    build_observable_z_uniform,
    build_transverse_ising,
    format_order,
    heisenberg_fields,
    load_hamiltonian,
    parse_hamiltonian,
    parse_order,
    serialize_hamiltonian,
)
from trotterobs.pauli import PauliSum, commutator_sum

DATA = Path(__file__).resolve().parents[1] / "src" / "trotterobs" / "data" / "h2_sto3g.ham"


def test_minimal_document():
    m = parse_hamiltonian("n 2\nsummand a\nterm 1.0 XI\n")
    assert (m.n, m.L, m.order, m.labels) == (2, 1, (0,), ("a",))


def test_comments_and_file_order():
    text = "# model\nn 1\nsummand second # trailing\nterm 0.5 Z\nsummand first\nterm -1 X\nterm 2 Y\n"
    m = parse_hamiltonian(text)
    assert m.labels == ("second", "first")
    assert m.summands[1].coefficient("Y") == 2


@pytest.mark.parametrize(
    "text, kind, line",
    [
        ("n 2\nsummand a\nterm 1.0 XQ\n", "bad_character", 3),
        ("n 2\nsummand a\nterm 1.0 XYZ\n", "word_length", 3),
        ("n 1\nsummand a\nterm 1+2j X\n", "non_hermitian", 3),
        ("n 1\nsummand a\nsummand b\nterm 1 X\n", "empty_summand", 2),
        ("n 1\nsummand a\n", "empty_summand", 2),
        ("summand a\n", "header", 1),
        ("n 1\nterm 1 X\n", "syntax", 2),
        ("n 1\nsummand a\nterm abc X\n", "bad_number", 3),
    ],
)
def test_parse_errors_are_distinct(text, kind, line):
    with pytest.raises(ParseError) as info:
        parse_hamiltonian(text)
    assert info.value.kind == kind and info.value.line == line


def test_shipped_hydrogen_file():
    m = load_hamiltonian(DATA)
    assert (m.L, m.n) == (15, 4)
    assert m == build_hydrogen_sto3g()


def test_hydrogen_coefficients():
    m = build_hydrogen_sto3g()
    total = m.total()
    assert total.coefficient("ZZII") == 0.17435  # Z3 Z2
    assert total.coefficient("YYXX") == -0.04532  # Y3 Y2 X1 X0
    assert total.coefficient("IIII") == -0.81262
    assert total.coefficient("IIIZ") == 0.17120  # Z0
    np.testing.assert_allclose(total.to_dense(), kron_sum(HYDROGEN_STO3G_TERMS), atol=1e-15)
    assert all(len(h) == 1 for h in m.summands)


def test_heisenberg_structure():
    m = build_heisenberg_xyz(2, 1)
    assert m.summands[0] == PauliSum.from_label("XX")
    assert m.summands[1] == PauliSum.from_label("YY")
    h = heisenberg_fields(2, 1)
    assert m.summands[2].coefficient("IZ") == h[0] and m.summands[2].coefficient("ZI") == h[1]
    m5 = build_heisenberg_xyz(5, 9)
    assert len(m5.summands[0]) == 4 and len(m5.summands[2]) == 9
    with pytest.raises(ValueError):
        build_heisenberg_xyz(1, 0)


def test_heisenberg_fields_seeded():
    np.testing.assert_array_equal(heisenberg_fields(6, 42), heisenberg_fields(6, 42))
    assert not np.array_equal(heisenberg_fields(6, 42), heisenberg_fields(6, 43))
    assert all(np.all(np.abs(heisenberg_fields(4, s)) < 1) for s in range(1000))


def test_periodic_chain_adds_bond():
    assert len(build_heisenberg_xyz(4, 0, periodic=True).summands[0]) == 4


def test_transverse_ising():
    m = build_transverse_ising(1, {}, [1.0])
    np.testing.assert_allclose(m.total().to_dense(), kron_label("X"))
    J = {(0, 1): 0.7, (1, 2): -0.3}
    h = [0.2, 0.5, -1.0]
    m = build_transverse_ising(3, J, h)
    zz = m.summands[0]
    terms = [PauliSum(3, {p: c}) for p, c in zz]
    assert all(not commutator_sum(a, b) for a in terms for b in terms)
    ref = 0.7 * kron_label("IZZ") - 0.3 * kron_label("ZZI") + 0.2 * kron_label("IIX") + 0.5 * kron_label("IXI") \
        - kron_label("XII")
    np.testing.assert_allclose(m.total().to_dense(), ref, atol=1e-15)
    with pytest.raises(IndexError):
        build_transverse_ising(2, {(0, 2): 1.0}, [])


def test_uniform_observable():
    for n in (1, 3, 5):
        o = build_observable_z_uniform(n)
        assert o.coefficient("I" * n) == pytest.approx(1 / (1 + 0.1 * n))
        assert spectral_norm(o.to_dense()) == pytest.approx(1.0, abs=1e-14)
    assert build_observable_z_uniform(5).coefficient("IIIII") == pytest.approx(1 / 1.5)
    np.testing.assert_allclose(build_observable_z_uniform(1).to_dense(), (np.eye(2) + 0.1 * kron_label("Z")) / 1.1)


def test_model_validation():
    x = PauliSum.from_label("X")
    with pytest.raises(ValueError):
        HamiltonianModel(1, (x, x), (0, 0))
    with pytest.raises(ValueError):
        HamiltonianModel(1, (PauliSum.from_label("X", 1j),))
    assert HamiltonianModel(1, (x, x), (1, 0)).ordered() == [x, x]


def test_order_text_round_trip():
    assert format_order((1, 0, 2)) == "2-1-3"
    assert parse_order("2-1-3") == (1, 0, 2)


@settings(max_examples=50, deadline=None)
@given(
    st.integers(1, 3).flatmap(
        lambda n: st.lists(
            st.lists(st.tuples(st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False).filter(lambda v: abs(v) > 1e-12),
                               st.text(alphabet="IXYZ", min_size=n, max_size=n)), min_size=1, max_size=4),
            min_size=1, max_size=4,
        ).map(lambda parts: (n, parts))
    )
)
def test_serialize_round_trip(data):
    n, parts = data
    summands = tuple(PauliSum.from_list(p, n=n) for p in parts)
    if not all(summands):
        return
    m = HamiltonianModel(n, summands)
    assert parse_hamiltonian(serialize_hamiltonian(m)) == m
