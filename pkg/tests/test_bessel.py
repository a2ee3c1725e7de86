import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from src.config import get_settings
from src.errors import DomainError
from src.ruin.bessel import bessel_i1, bessel_i1e


def test_known_value():
    assert bessel_i1(2.0) == pytest.approx(1.590636854637329, rel=1e-14)
    assert bessel_i1(0.0) == 0.0


def test_array_input_keeps_shape():
    z = np.array([[0.5, 1.0], [20.0, 40.0]])
    assert bessel_i1(z).shape == (2, 2)
    assert bessel_i1e(z).shape == (2, 2)


@pytest.mark.parametrize("offset", [-0.1, 0.0, 0.1])
def test_continuous_across_the_switch(offset):
    z = get_settings().numerics.bessel_switch + offset
    assert bessel_i1e(z) == pytest.approx(special.i1e(z), rel=1e-14)


@pytest.mark.parametrize("z", [15.0001, 15.13, 17.5, 20.0, 24.999])
def test_relative_accuracy_between_fifteen_and_the_switch(z):
    # an asymptotic form would leave about e^{-2z}, roughly 2e-14 at z = 15
    assert bessel_i1(z) == pytest.approx(special.i1(z), rel=1e-14)


@given(z=st.floats(min_value=0.0, max_value=700.0))
def test_scaled_matches_scipy(z):
    assert float(bessel_i1e(z)) == pytest.approx(float(special.i1e(z)), rel=1e-10, abs=1e-300)


def test_scaled_never_overflows():
    assert np.isfinite(bessel_i1e(1e6))


def test_negative_argument():
    with pytest.raises(DomainError):
        bessel_i1(-1.0)
