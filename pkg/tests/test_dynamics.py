import math

import numpy as np
import pytest

import lyapcert as lc
from conftest import expanding_zoo


def test_doubling_evaluate():
    d = lc.DoublingMap()
    assert d.evaluate(0.3) == pytest.approx([0.6], abs=1e-15)
    assert d.evaluate(0.75) == pytest.approx([0.5], abs=1e-15)


def test_toral_fixed_point():
    cat = lc.ToralEndomorphism([[2, 1], [1, 1]])
    assert np.array_equal(cat.evaluate([0.0, 0.0]), np.array([0.0, 0.0]))


def test_perturbed_doubling_fixed_point_and_derivative():
    pd = lc.PerturbedDoubling(0.05)
    assert pd.evaluate(0.0) == pytest.approx([0.0], abs=0)
    assert pd.derivative(0.0)[0, 0] == pytest.approx(2.0 + 0.1 * math.pi, abs=1e-15)


def test_doubling_derivative_constant():
    d = lc.DoublingMap()
    for x in (0.0, 0.3, 0.9):
        assert d.derivative(x)[0, 0] == 2.0


def test_toral_derivative_is_matrix():
    a = [[2, 1], [1, 1]]
    cat = lc.ToralEndomorphism(a)
    assert np.array_equal(cat.derivative([0.4, 0.9]), np.array(a, dtype=float))


def test_is_critical():
    d = lc.DoublingMap()
    assert not d.is_critical(0.5, tol=1e-12)
    square = lc.PolynomialMap([0.0, 0.0, 1.0], (0.0, 1.0))
    assert square.is_critical(0.0, tol=1e-12)
    assert not square.is_critical(0.5, tol=1e-12)
    cat = lc.ToralEndomorphism([[2, 1], [1, 1]])
    assert not cat.is_critical([0.2, 0.8], tol=1e-12)


def test_is_critical_rejects_bad_tol():
    with pytest.raises(ValueError):
        lc.DoublingMap().is_critical(0.1, tol=0.0)


def test_orbit_values():
    d = lc.DoublingMap()
    orb = d.orbit(0.1, 3)
    assert orb[:, 0] == pytest.approx([0.1, 0.2, 0.4], abs=1e-15)
    orb2 = d.orbit(1.0 / 3.0, 3)
    assert orb2[:, 0] == pytest.approx([1 / 3, 2 / 3, 1 / 3], abs=1e-12)
    cat = lc.ToralEndomorphism([[2, 1], [1, 1]])
    assert np.array_equal(cat.orbit([0.0, 0.0], 2), np.zeros((2, 2)))


def test_orbit_extension_property():
    rng = np.random.RandomState(3)
    for sys_ in expanding_zoo():
        x = rng.rand(sys_.dim)
        a = sys_.orbit(x, 7)
        b = sys_.orbit(x, 8)
        assert np.array_equal(a, b[:7])
        assert np.array_equal(b[7], sys_.evaluate(a[6]))


def test_torus_reduction_range():
    rng = np.random.RandomState(4)
    for sys_ in expanding_zoo():
        for _ in range(200):
            y = sys_.evaluate(rng.rand(sys_.dim) * 3 - 1)
            assert np.all(y >= 0.0) and np.all(y < 1.0)


def test_dimension_mismatch():
    d = lc.DoublingMap()
    with pytest.raises(lc.DimensionMismatch):
        d.evaluate([0.1, 0.2])
    cat = lc.ToralEndomorphism([[2, 1], [1, 1]])
    with pytest.raises(lc.DimensionMismatch):
        cat.derivative([0.1])


def test_finite_difference_matches_analytic():
    # analytic Jacobians agree with central differences at random points
    rng = np.random.RandomState(20240501)
    for sys_ in expanding_zoo():
        for _ in range(1000):
            if sys_.domain.periodic[0]:
                x = rng.rand(sys_.dim)
            else:
                x = 0.1 + 0.8 * rng.rand(sys_.dim)
            exact = sys_.derivative(x)
            approx = lc.finite_difference_jacobian(sys_, x, step=1e-6)
            scale = np.maximum(1.0, np.abs(exact))
            assert np.all(np.abs(approx - exact) <= 1e-6 * scale)


def test_polynomial_domains():
    torus_poly = lc.PolynomialMap([0.0, 1.0, 1.0], "torus")
    assert torus_poly.evaluate(0.8)[0] == pytest.approx((0.8 + 0.64) % 1.0, abs=1e-15)
    interval_poly = lc.PolynomialMap([0.0, 1.0, 1.0, -1.0], (0.0, 1.0))
    assert interval_poly.evaluate(0.5)[0] == pytest.approx(0.625, abs=1e-15)
    assert interval_poly.derivative(0.0)[0, 0] == 1.0


def test_perturbed_doubling_epsilon_guard():
    with pytest.raises(ValueError):
        lc.PerturbedDoubling(0.2)
    with pytest.raises(ValueError):
        lc.PerturbedDoubling(-0.01)


def test_toral_integer_validation():
    with pytest.raises(ValueError):
        lc.ToralEndomorphism([[1.5, 0], [0, 1]])
    with pytest.raises(ValueError):
        lc.ToralEndomorphism([[1, 2, 3]])


def test_product_requires_one_dim_factors():
    cat = lc.ToralEndomorphism([[2, 1], [1, 1]])
    with pytest.raises(lc.DimensionMismatch):
        lc.ProductMap(lc.DoublingMap(), cat)


def test_make_system_roundtrip():
    for sys_ in expanding_zoo():
        clone = lc.make_system(sys_.spec())
        assert clone.spec() == sys_.spec()
        x = np.full(sys_.dim, 0.37)
        assert np.array_equal(clone.evaluate(x), sys_.evaluate(x))


def test_inverse_branches_invert():
    for sys_ in (lc.DoublingMap(), lc.PerturbedDoubling(0.05), lc.ToralEndomorphism([[3]])):
        for y in (0.0, 0.123, 0.5, 0.987):
            for b in range(sys_.branch_count):
                x = sys_.inverse_branch(y, b)
                assert 0.0 <= x <= 1.0
                fx = sys_.evaluate(x % 1.0)[0]
                assert abs((fx - y + 0.5) % 1.0 - 0.5) < 1e-12
