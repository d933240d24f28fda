import math

import numpy as np
import pytest

from maxiset.coeffs import level_energies, tail_energy
from maxiset.errors import ConfigError, ShapeError
from maxiset.experiments import embedding_report
from maxiset.signals import besov_extremal, by_name, s0, s1, s1_count, zero


def test_s0_values():
    s = s0(8)
    assert s.alpha00 == 0.0
    assert s.level(0)[0] == 1.0
    assert s.level(4)[0] == 0.25
    assert s.level(2)[0] == pytest.approx(0.3752142272464818, rel=1e-15)
    assert all(np.count_nonzero(lev) == 1 and lev[0] != 0 for lev in s.levels)


def test_s1_counts_use_strict_inequality():
    assert s1_count(0.5, 0) == 1
    assert s1_count(0.5, 1) == 2  # 2^{1/2} = 1.41: k in {0, 1}
    assert s1_count(0.5, 2) == 2  # 2^1 = 2 exactly: k in {0, 1}
    assert s1_count(0.5, 4) == 4
    assert s1_count(0.25, 3) == 4  # 2^{3/1.5} = 4
    for alpha in (0.3, 0.5, 0.8):
        for j in range(20):
            x = 2 ** (j / (1 + 2 * alpha))
            assert s1_count(alpha, j) == sum(1 for k in range(1 << j) if k < x - 1e-12)


def test_s1_values_and_energy():
    s = s1(0.5, 10)
    assert s.level(0)[0] == 1.0
    for j, lev in enumerate(s.levels):
        c = s1_count(0.5, j)
        assert np.all(lev[:c] == 2 ** (-j / 2)) and np.all(lev[c:] == 0)
    e = level_energies(s)
    np.testing.assert_allclose(e, [s1_count(0.5, j) * 2.0**-j for j in range(10)])


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_besov_extremal(alpha):
    s = besov_extremal(alpha, 10)
    assert s.alpha00 == 0.0
    np.testing.assert_allclose(level_energies(s), 2.0 ** (-2 * alpha * np.arange(10)), rtol=1e-12)
    for J in range(11):
        expected = (2 ** (-2 * J * alpha) - 2 ** (-20 * alpha)) / (1 - 2 ** (-2 * alpha))
        assert tail_energy(s, J) == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_by_name_and_errors():
    assert by_name("s0", 5) == s0(5)
    assert by_name("s1:0.3", 5) == s1(0.3, 5)
    assert by_name("besov_extremal:0.8", 5) == besov_extremal(0.8, 5)
    assert by_name("zero", 3) == zero(3)
    with pytest.raises(ConfigError):
        by_name("square", 5)
    with pytest.raises(ConfigError):
        by_name("s1:abc", 5)
    with pytest.raises(ShapeError):
        s0(0)


def test_deterministic():
    assert s1(0.5, 12) == s1(0.5, 12)
    assert hash(s0(12)) == hash(s0(12))


BATTERY = [
    ("s0", "hybrid_A", "bounded"),
    ("s0", "besov2_tail", "diverging"),
    ("s1", "besov2_tail", "bounded"),
    ("s1", "weak_besov", "bounded"),
    ("s1", "hybrid_A", "diverging"),
]
# Over J <= 16 these divergences are too slow (or lie too deep) to show a
# factor 2 over the top half of the range; see the decisions ledger.
SLOW = {(0.3, "s0", "besov2_tail"), (0.3, "s1", "hybrid_A"), (0.8, "s1", "hybrid_A")}


def _battery_cases():
    for alpha in (0.3, 0.5, 0.8):
        for witness, functional, expected in BATTERY:
            marks = []
            if (alpha, witness, functional) in SLOW:
                marks = [pytest.mark.xfail(strict=True, reason="divergence not visible over J <= 16")]
            yield pytest.param(alpha, witness, functional, expected, marks=marks, id=f"{alpha}-{witness}-{functional}")


_REPORTS = {}


def _rows(alpha):
    if alpha not in _REPORTS:
        _REPORTS[alpha] = {(r.witness, r.functional): r.report for r in embedding_report(alpha, 3.0, 16)}
    return _REPORTS[alpha]


@pytest.mark.parametrize("alpha,witness,functional,expected", list(_battery_cases()))
def test_membership_battery(alpha, witness, functional, expected):
    assert _rows(alpha)[(witness, functional)].verdict == expected
