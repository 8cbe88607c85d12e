"""Parameter bundle"""

import math

import pytest

from modules.errors import DomainError
from modules.parameters import Params


def test_defaults_are_autonomous():
    params = Params()
    assert params.autonomous
    assert params.p4 == 1.0


def test_mirror_flips_p2_only():
    params = Params(0.1, 0.7, 0.3, 1.0, 4.0)
    mirrored = params.mirrored()
    assert mirrored.p2 == -0.3
    assert mirrored.with_(p2=0.3) == params


def test_mu_and_period():
    params = Params(epsilon=0.04, p4=4.0)
    assert params.mu == pytest.approx(0.2)
    assert params.forcing_period == pytest.approx(math.pi / 2)


def test_rejects_negative_epsilon():
    with pytest.raises(DomainError):
        Params(epsilon=-0.1)


def test_rejects_non_finite():
    with pytest.raises(DomainError):
        Params(p3=math.inf)


def test_period_needs_frequency():
    with pytest.raises(DomainError):
        Params(p4=0.0).forcing_period


def test_as_dict_keys():
    assert list(Params().as_dict()) == ["epsilon", "p1", "p2", "p3", "p4"]
