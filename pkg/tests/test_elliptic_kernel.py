"""Complete elliptic integrals and the nome"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import special

from modules.elliptic_kernel import complete_E, complete_K, dE_dm, dK_dm, legendre_defect, nome_ratio
from modules.errors import DomainError

M_GRID = np.array([0.0, 1e-8, 0.1, 0.3, 0.5, 0.75, 0.9, 0.99, 1.0 - 1e-9])


def test_matches_scipy():
    assert_allclose(complete_K(M_GRID), special.ellipk(M_GRID), rtol=1e-12)
    assert_allclose(complete_E(M_GRID), special.ellipe(M_GRID), rtol=1e-12)


def test_zero_parameter():
    assert complete_K(0.0) == pytest.approx(math.pi / 2, abs=1e-15)
    assert complete_E(0.0) == pytest.approx(math.pi / 2, abs=1e-15)


def test_E_at_one():
    assert complete_E(1.0) == 1.0


@pytest.mark.parametrize("m", [0.01, 0.2, 0.5, 0.8, 0.999])
def test_legendre_relation(m):
    assert abs(legendre_defect(m)) < 1e-12


def test_scalar_in_scalar_out():
    assert isinstance(complete_K(0.5), float)
    assert isinstance(complete_E(0.5), float)
    assert complete_K(np.array([0.5])).shape == (1,)


def test_nome_at_half():
    assert nome_ratio(0.5) == pytest.approx(math.exp(-math.pi), rel=1e-13)


def test_nome_monotone():
    m = np.linspace(0.05, 0.95, 19)
    assert np.all(np.diff(nome_ratio(m)) > 0.0)


def test_derivatives_against_differences():
    m, h = 0.4, 1e-6
    assert dK_dm(m) == pytest.approx((complete_K(m + h) - complete_K(m - h)) / (2 * h), rel=1e-7)
    assert dE_dm(m) == pytest.approx((complete_E(m + h) - complete_E(m - h)) / (2 * h), rel=1e-7)


@pytest.mark.parametrize("m", [-0.1, 1.0, 1.5, math.nan])
def test_K_domain(m):
    with pytest.raises(DomainError):
        complete_K(m)


def test_E_domain():
    with pytest.raises(DomainError):
        complete_E(1.0 + 1e-12)


@pytest.mark.parametrize("func", [nome_ratio, dK_dm, dE_dm])
def test_open_interval_functions(func):
    for m in (0.0, 1.0):
        with pytest.raises(DomainError):
            func(m)
