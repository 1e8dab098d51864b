import math

import mpmath
import numpy as np
import pytest

from ksz import special

GRID = np.concatenate([np.linspace(1e-3, 2, 80), np.linspace(2, 200, 120)])


def test_log_gamma_matches_high_precision():
    for x in GRID:
        assert abs(special.log_gamma(x) - float(mpmath.loggamma(x))) < 1e-10


def test_digamma_matches_high_precision():
    for x in GRID:
        assert abs(special.digamma(x) - float(mpmath.digamma(x))) < 1e-10


def test_known_values():
    assert special.log_gamma(1.5) == pytest.approx(math.log(math.sqrt(math.pi) / 2), abs=1e-12)
    assert special.digamma(1.0) == pytest.approx(-special.EULER_GAMMA, abs=1e-12)
    assert special.digamma(2.0) == pytest.approx(1 - special.EULER_GAMMA, abs=1e-12)
    assert special.EULER_GAMMA == pytest.approx(float(mpmath.euler), abs=1e-16)


def test_digamma_recurrence():
    for x in np.linspace(0.05, 50, 400):
        assert abs(special.digamma(x + 1) - special.digamma(x) - 1 / x) < 1e-10


def test_factorials():
    for n in range(16):
        assert round(math.exp(special.log_gamma(n + 1))) == math.factorial(n)
        assert math.exp(special.log_gamma(n + 1)) == pytest.approx(math.factorial(n), rel=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
def test_nonpositive_rejected(x):
    with pytest.raises(ValueError):
        special.log_gamma(x)
    with pytest.raises(ValueError):
        special.digamma(x)
