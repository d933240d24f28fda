import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from maxiset.coeffs import (
    IndexSet,
    WaveletCoeffs,
    flat_index,
    l2_norm_sq,
    level_of,
    rearrange_global,
    rearrange_level,
    tail_energies,
    tail_energy,
)
from maxiset.errors import LevelOutOfRangeError, ShapeError

finite = st.floats(-1e3, 1e3, allow_nan=False)


@st.composite
def coeffs(draw, max_depth=6):
    j = draw(st.integers(1, max_depth))
    flat = draw(arrays(np.float64, 1 << j, elements=finite))
    return WaveletCoeffs(flat)


def random_coeffs(rng, j_max):
    return WaveletCoeffs(rng.normal(size=1 << j_max))


def test_levels_have_dyadic_widths():
    c = random_coeffs(np.random.default_rng(0), 5)
    assert [lev.size for lev in c.levels] == [1, 2, 4, 8, 16]
    assert c.j_max == 5


def test_from_levels_roundtrip_and_validation():
    c = WaveletCoeffs.from_levels(0.5, [[1.0], [2.0, 3.0]])
    assert c.alpha00 == 0.5
    np.testing.assert_array_equal(c.level(1), [2.0, 3.0])
    with pytest.raises(ShapeError):
        WaveletCoeffs.from_levels(0.0, [[1.0], [2.0]])
    with pytest.raises(ShapeError):
        WaveletCoeffs(np.zeros(3))
    with pytest.raises(ShapeError):
        WaveletCoeffs(np.array([0.0, np.nan]))


def test_immutable():
    c = WaveletCoeffs.zeros(3)
    with pytest.raises(ValueError):
        c.flat[0] = 1.0


def test_level_out_of_range():
    c = WaveletCoeffs.zeros(3)
    with pytest.raises(LevelOutOfRangeError):
        c.level(3)
    with pytest.raises(LevelOutOfRangeError):
        rearrange_level(c, -1)


def test_flat_index_layout():
    assert flat_index(0, 0) == 1
    assert flat_index(3, 5) == 13
    assert level_of(13) == (3, 5)
    with pytest.raises(LevelOutOfRangeError):
        flat_index(2, 4)


def test_index_set_validation():
    s = IndexSet([(0, 0), (2, 3)])
    assert s.max_level() == 2
    assert sorted(s.to_flat().tolist()) == [1, 7]
    assert IndexSet.from_flat([1, 7]) == s
    with pytest.raises(ShapeError):
        IndexSet([(1, 2)])


def test_l2_norm_examples():
    assert l2_norm_sq(WaveletCoeffs.zeros(4)) == 0.0
    assert l2_norm_sq(WaveletCoeffs.from_levels(1.0, [[1.0]])) == 2.0


def test_l2_norm_matches_direct_sum():
    rng = np.random.default_rng(1)
    a = rng.normal()
    levels = [rng.normal(size=1 << j) for j in range(4)]
    c = WaveletCoeffs.from_levels(a, levels)
    direct = a * a + sum(float(x) ** 2 for lev in levels for x in lev)
    assert l2_norm_sq(c) == pytest.approx(direct, rel=1e-14)


def test_rearrange_examples():
    c = WaveletCoeffs.from_levels(9.0, [[0.1], [-0.5, 0.3]])
    np.testing.assert_array_equal(rearrange_global(c), [0.5, 0.3, 0.1])
    c = WaveletCoeffs.from_levels(0.0, [[0.0], [0.0, 0.0], [0.2, -0.9, 0.9, 0.0]])
    np.testing.assert_array_equal(rearrange_level(c, 2), [0.9, 0.9, 0.2, 0.0])
    np.testing.assert_array_equal(rearrange_global(WaveletCoeffs.zeros(3)), np.zeros(7))


def test_rearrange_matches_sort_oracle():
    rng = np.random.default_rng(2)
    c = random_coeffs(rng, 5)
    expected = sorted((abs(x) for x in c.flat[1:].tolist()), reverse=True)
    np.testing.assert_array_equal(rearrange_global(c), expected)
    expected = sorted((abs(x) for x in c.level(4).tolist()), reverse=True)
    np.testing.assert_array_equal(rearrange_level(c, 4), expected)


def test_tail_energy_examples():
    rng = np.random.default_rng(3)
    c = random_coeffs(rng, 5)
    assert tail_energy(c, 5) == 0.0
    assert tail_energy(c, 0) == pytest.approx(l2_norm_sq(c) - c.alpha00**2, rel=1e-13)
    direct = sum(float(c.level(j)[k]) ** 2 for j in range(2, 5) for k in range(1 << j))
    assert tail_energy(c, 2) == pytest.approx(direct, rel=1e-13)
    with pytest.raises(LevelOutOfRangeError):
        tail_energy(c, 6)


def test_json_roundtrip():
    c = random_coeffs(np.random.default_rng(4), 4)
    d = json.loads(c.to_json())
    assert set(d) == {"alpha00", "levels"}
    assert WaveletCoeffs.from_json(c.to_json()) == c
    with pytest.raises(ShapeError):
        WaveletCoeffs.from_json("{")
    with pytest.raises(ShapeError):
        WaveletCoeffs.from_dict({"levels": []})


@given(coeffs())
def test_rearrangement_is_permutation_of_magnitudes(c):
    r = rearrange_global(c)
    assert np.all(np.diff(r) <= 0)
    np.testing.assert_array_equal(np.sort(r), np.sort(np.abs(c.betas)))


@given(coeffs())
def test_global_rearrangement_merges_levels(c):
    merged = np.sort(np.concatenate([rearrange_level(c, j) for j in range(c.j_max)]))[::-1]
    np.testing.assert_array_equal(rearrange_global(c), merged)


@given(coeffs())
def test_tail_energy_monotone_and_parseval(c):
    tails = tail_energies(c)
    assert np.all(np.diff(tails) <= 1e-9 * max(1.0, tails[0]))
    for J in range(c.j_max + 1):
        assert tails[J] == pytest.approx(tail_energy(c, J), rel=1e-12, abs=1e-9)
    assert l2_norm_sq(c) == pytest.approx(c.alpha00**2 + tail_energy(c, 0), rel=1e-12, abs=1e-9)


@settings(max_examples=50)
@given(coeffs(), st.floats(-10, 10, allow_nan=False))
def test_arithmetic(c, a):
    np.testing.assert_allclose((c * a).flat, c.flat * a)
    np.testing.assert_allclose((c + c - c).flat, c.flat)
    assert hash(c) == hash(WaveletCoeffs(c.flat.copy()))
