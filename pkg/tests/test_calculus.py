import json

import numpy as np
import pytest
from hypothesis import given, settings

from qrgsquare.calculus import (
    SITES,
    basis_bitensor,
    basis_form,
    bitensor_right_multiply,
    cayley_to_graph,
    constant,
    d0,
    d1,
    dagger,
    graph_d,
    graph_to_cayley,
    left_multiply,
    partial,
    plane_waves,
    right_multiply,
    shift,
    sitefn_from_json,
    sitefn_from_list,
    sitefn_to_json,
    sitefn_to_list,
    square_arrows,
    star0,
    star1,
    tensor,
    wedge,
)
from qrgsquare.scalars import EXACT, FLOAT, exact

from conftest import exact_sitefns, forms, sitefns

one, phi, psi, chi = plane_waves()


def test_site_order_is_binary():
    assert SITES == ("00", "01", "10", "11")


def test_plane_waves_values():
    assert np.array_equal(phi, [1, 1, -1, -1])
    assert np.array_equal(psi, [1, -1, 1, -1])
    assert np.array_equal(chi, [1, -1, -1, 1])
    assert np.array_equal(phi * psi, chi)
    for w in (one, phi, psi, chi):
        assert np.array_equal(w * w, one)
    assert phi.sum() == 0


def test_shift_examples():
    assert np.array_equal(shift(1, phi), -phi)
    assert np.array_equal(shift(2, psi), -psi)
    assert np.array_equal(shift(1, constant(3.5)), constant(3.5))
    # oracle: (R1 f)(i, j) = f(i + 1, j) read off the site labels
    f = np.array([10, 20, 30, 40])
    for x, label in enumerate(SITES):
        i, j = int(label[0]), int(label[1])
        assert shift(1, f)[x] == f[2 * ((i + 1) % 2) + j]
        assert shift(2, f)[x] == f[2 * i + (j + 1) % 2]


def test_shift_rejects_bad_direction():
    with pytest.raises(ValueError):
        shift(3, phi)


def test_shifts_are_commuting_involutions():
    f = np.arange(4.0) + 1j
    assert np.array_equal(shift(1, shift(1, f)), f)
    assert np.array_equal(shift(2, shift(2, f)), f)
    assert np.array_equal(shift(1, shift(2, f)), shift(2, shift(1, f)))


def test_partial_examples():
    assert np.array_equal(partial(1, phi), -2 * phi)
    assert np.array_equal(partial(2, phi), 0 * phi)
    assert np.array_equal(partial(1, psi), 0 * psi)
    assert np.array_equal(partial(2, psi), -2 * psi)
    assert np.array_equal(partial(1, constant(2.0)), constant(0.0))


def test_character_table():
    # d^i is diagonal on the characters with eigenvalues 0 or -2
    table = {1: (0, -2, 0, -2), 2: (0, 0, -2, -2)}
    for i, eigs in table.items():
        for w, lam in zip((one, phi, psi, chi), eigs):
            assert np.array_equal(partial(i, w), lam * w)


@given(sitefns)
def test_partial_squared(f):
    for i in (1, 2):
        assert np.allclose(partial(i, partial(i, f)), -2 * partial(i, f))


def test_d0_examples():
    assert np.array_equal(d0(constant(5.0)), np.zeros((2, 4)))
    assert np.array_equal(d0(phi), np.stack([-2 * phi, 0 * phi]))
    assert np.array_equal(d0(chi), np.stack([-2 * chi, -2 * chi]))


def test_right_multiply_examples():
    e1, e2 = basis_form(1), basis_form(2)
    assert np.array_equal(right_multiply(e1, phi), left_multiply(-phi, e1))
    assert np.array_equal(right_multiply(e2, phi), left_multiply(phi, e2))
    w = np.stack([phi, psi]).astype(complex)
    assert np.array_equal(right_multiply(w, one), w)


def test_wedge_examples():
    e1, e2 = basis_form(1), basis_form(2)
    vol = np.ones(4)
    assert np.array_equal(wedge(e1, e2), vol)
    assert np.array_equal(wedge(e2, e1), -vol)
    assert np.array_equal(wedge(e1, e1), 0 * vol)
    assert np.array_equal(wedge(e2, e2), 0 * vol)
    assert np.array_equal(wedge(left_multiply(phi, e1), e2), phi)


def test_d1_examples():
    for w in (one, phi, psi, chi):
        assert np.array_equal(d1(d0(w)), np.zeros(4))
    e2 = basis_form(2)
    assert np.array_equal(d1(left_multiply(phi, e2)), -2 * phi)
    assert np.array_equal(d1(basis_form(1)), np.zeros(4))
    assert np.array_equal(d1(basis_form(2)), np.zeros(4))


def test_d1_is_graded_leibniz_on_coefficients():
    # d(c e_i) = dc ^ e_i with d e_i = 0
    rng = np.random.default_rng(1)
    for _ in range(10):
        c = rng.normal(size=4) + 1j * rng.normal(size=4)
        for i in (1, 2):
            w = left_multiply(c, basis_form(i))
            assert np.allclose(d1(w), wedge(d0(c), basis_form(i)))


@settings(max_examples=100)
@given(sitefns)
def test_d_squared_float(f):
    assert np.allclose(d1(d0(f)), 0)


@settings(max_examples=100)
@given(exact_sitefns)
def test_d_squared_exact(f):
    assert EXACT.is_zero(d1(d0(f)))


@settings(max_examples=100)
@given(sitefns, sitefns)
def test_leibniz(f, g):
    lhs = d0(f * g)
    rhs = right_multiply(d0(f), g) + left_multiply(f, d0(g))
    assert np.allclose(lhs, rhs)


@settings(max_examples=100)
@given(exact_sitefns, exact_sitefns)
def test_leibniz_exact(f, g):
    lhs = d0(f * g)
    rhs = right_multiply(d0(f), g) + left_multiply(f, d0(g))
    assert EXACT.is_zero(lhs - rhs)


@settings(max_examples=100)
@given(sitefns, forms, sitefns)
def test_bimodule_associativity(f, w, g):
    assert np.allclose(right_multiply(left_multiply(f, w), g),
                       left_multiply(f, right_multiply(w, g)))


@settings(max_examples=100)
@given(forms, sitefns, sitefns)
def test_right_action_is_an_action(w, f, g):
    assert np.allclose(right_multiply(right_multiply(w, f), g), right_multiply(w, f * g))


@settings(max_examples=100)
@given(forms, sitefns)
def test_star_reverses_products(w, f):
    # (w f)* = f* w*
    assert np.allclose(star1(right_multiply(w, f)), left_multiply(star0(f), star1(w)))
    assert np.allclose(star1(left_multiply(f, w)), right_multiply(star1(w), star0(f)))


@settings(max_examples=100)
@given(sitefns)
def test_star_commutes_with_d(f):
    assert np.allclose(d0(star0(f)), star1(d0(f)))


def test_star_of_basis():
    assert np.array_equal(star1(basis_form(1)), -basis_form(1))
    assert np.array_equal(star1(basis_form(2)), -basis_form(2))


@settings(max_examples=100)
@given(forms, forms, sitefns)
def test_wedge_is_balanced(w, v, f):
    # (w f) ^ v = w ^ (f v)
    assert np.allclose(wedge(right_multiply(w, f), v), wedge(w, left_multiply(f, v)))


@settings(max_examples=100)
@given(forms, forms, sitefns)
def test_tensor_bimodule_rules(w, v, f):
    assert np.allclose(tensor(right_multiply(w, f), v), tensor(w, left_multiply(f, v)))
    assert np.allclose(tensor(w, right_multiply(v, f)), bitensor_right_multiply(tensor(w, v), f))


@settings(max_examples=100)
@given(forms, forms)
def test_dagger_on_simple_tensors(w, v):
    assert np.allclose(dagger(tensor(w, v)), tensor(star1(v), star1(w)))


def test_dagger_basis():
    # (phi e1 (x) e2)^dagger = e2* (x) (phi e1)* = e2 (x) (R1 phi) e1 = -phi e2 (x) e1
    t = left_multiply(phi, basis_form(1))
    expected = np.zeros((2, 2, 4), dtype=complex)
    expected[1, 0] = -phi
    assert np.allclose(dagger(tensor(t, basis_form(2))), expected)


# -- general graph calculus oracle ------------------------------------------

def test_square_has_eight_bidirected_arrows():
    arrows = square_arrows()
    assert len(arrows) == 8
    assert all((y, x) in arrows for x, y in arrows)


def test_graph_d_matches_cayley_d():
    rng = np.random.default_rng(2)
    for _ in range(20):
        f = rng.normal(size=4) + 1j * rng.normal(size=4)
        assert np.allclose(graph_to_cayley(graph_d(f)), d0(f))
        assert graph_d(f) == pytest.approx(cayley_to_graph(d0(f)))


def test_graph_e_i_is_sum_of_arrows():
    # e_i = sum over x of omega_{x -> R_i x}
    for i in (1, 2):
        coeffs = {(x, int(shift(i, np.arange(4))[x])): 1.0 for x in range(4)}
        assert np.array_equal(graph_to_cayley(coeffs), basis_form(i))


def test_graph_to_cayley_rejects_non_arrows():
    with pytest.raises(ValueError):
        graph_to_cayley({(0, 3): 1.0})


def test_exact_regime_basis_objects():
    assert basis_form(1, EXACT).dtype == object
    assert EXACT.is_zero(d1(d0(EXACT.array([1, 2, 3, 4]))))
    assert basis_bitensor(1, 2, EXACT)[0, 1, 0] == exact(1)


# -- serialization --------------------------------------------------------

def test_sitefn_json_roundtrip_float():
    f = np.array([1, 2j, -0.5, 3 + 4j])
    data = sitefn_to_list(f)
    assert data[1] == [0.0, 2.0]
    assert np.array_equal(sitefn_from_json(sitefn_to_json(f)), f)


def test_sitefn_json_roundtrip_exact():
    f = EXACT.array([exact("1/3"), exact(2), exact(-1j), exact("5/7") + exact(1j)])
    text = sitefn_to_json(f)
    assert json.loads(text)[0] == ["1/3", "0"]
    back = sitefn_from_json(text, EXACT)
    assert EXACT.close(back, f)


def test_sitefn_json_rejects_wrong_length():
    with pytest.raises(ValueError):
        sitefn_to_list(np.zeros(3))
    with pytest.raises(ValueError):
        sitefn_from_list([[0, 0]] * 5, FLOAT)
