import numpy as np
import pytest

import ipskernel as ik

ALL_FAMILIES = [
    ik.Quadratic(1.0),
    ik.Quadratic(2.5),
    ik.Bistable(),
    ik.Cosh(),
    ik.MorseLike(D=5.0, a=0.5, r=1.0),
    ik.GaussianWell(A=5.0),
    ik.PolyCos(coeffs=(0.0, 0.0, 0.5, -1.0 / 3.0, 0.25), amplitude=10.0),
    ik.Polynomial(coeffs=(1.0, -2.0, 0.0, 3.0)),
    ik.Zero(),
]

POLY_FAMILIES = [
    ik.Quadratic(2.5),
    ik.Bistable(),
    ik.Polynomial(coeffs=(1.0, -2.0, 0.0, 3.0)),
    ik.Zero(),
]


@pytest.mark.parametrize("pot", ALL_FAMILIES, ids=lambda p: type(p).__name__)
def test_derivatives_match_finite_differences(pot):
    x = np.linspace(-2.3, 2.3, 31)
    eps = 1e-6
    fd1 = (pot.value(x + eps) - pot.value(x - eps)) / (2 * eps)
    fd2 = (pot.derivative(x + eps) - pot.derivative(x - eps)) / (2 * eps)
    np.testing.assert_allclose(pot.derivative(x), fd1, rtol=1e-6, atol=1e-6)
    np.testing.assert_allclose(pot.second_derivative(x), fd2, rtol=1e-6, atol=1e-6)


def test_degree_reporting():
    assert ik.Quadratic(1.0).degree == 2
    assert ik.Bistable().degree == 4
    assert ik.Polynomial(coeffs=(1.0, 0.0, 3.0)).degree == 2
    assert ik.Polynomial(coeffs=(5.0,)).degree == 0
    assert ik.Zero().degree == 0
    for pot in (ik.Cosh(), ik.MorseLike(), ik.GaussianWell(), ik.PolyCos(coeffs=(0.0, 1.0), amplitude=2.0)):
        assert pot.degree is None
        assert pot.derivative_coefficients() is None


@pytest.mark.parametrize("pot", POLY_FAMILIES, ids=lambda p: type(p).__name__)
def test_derivative_coefficients_match_derivative(pot):
    from numpy.polynomial import polynomial as npoly

    x = np.linspace(-3.0, 3.0, 17)
    coeffs = pot.derivative_coefficients()
    np.testing.assert_allclose(npoly.polyval(x, coeffs), pot.derivative(x), atol=1e-12)


def test_morse_like_closed_form():
    pot = ik.MorseLike(D=5.0, a=0.5, r=1.0)
    # at x = r the exponent vanishes and both value and slope are zero
    assert pot.value(1.0) == pytest.approx(0.0, abs=1e-15)
    assert pot.derivative(1.0) == pytest.approx(0.0, abs=1e-15)
    e = np.exp(-0.5 * (4.0 - 1.0))
    assert pot.derivative(2.0) == pytest.approx(4.0 * 5.0 * 0.5 * 2.0 * e * (1.0 - e))


def test_gaussian_well_closed_form():
    pot = ik.GaussianWell(A=5.0)
    assert pot.value(0.0) == pytest.approx(-5.0 / np.sqrt(2 * np.pi))
    assert pot.derivative(0.0) == 0.0
    assert pot.derivative(1.0) == pytest.approx(5.0 / np.sqrt(2 * np.pi) * np.exp(-0.5))


def test_poly_cos_closed_form():
    pot = ik.PolyCos(coeffs=(0.0, 0.0, 0.5, -1.0 / 3.0, 0.25), amplitude=10.0)
    x = np.array([-1.7, 0.3, 2.2])
    np.testing.assert_allclose(
        pot.value(x), x**4 / 4 - x**3 / 3 + x**2 / 2 + 10 * np.cos(x), rtol=1e-14
    )
    np.testing.assert_allclose(
        pot.derivative(x), x**3 - x**2 + x - 10 * np.sin(x), rtol=1e-14
    )


@pytest.mark.parametrize("pot", ALL_FAMILIES, ids=lambda p: type(p).__name__)
def test_dict_round_trip(pot):
    again = ik.potential_from_dict(ik.potential_to_dict(pot))
    assert again == pot


def test_from_dict_rejects_unknown():
    with pytest.raises(ValueError):
        ik.potential_from_dict({"family": "nope"})
    with pytest.raises(ValueError):
        ik.potential_from_dict({"family": "quadratic", "a": 1.0, "extra": 2})
