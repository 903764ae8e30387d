import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import modwt_direct, relative_error
from wavecast.modwt import (
    HAAR,
    decompose,
    default_level_count,
    equivalent_filter_length,
    imodwt,
    modwt,
    mra,
)


def random_series(length, seed=0):
    return np.random.default_rng(seed).normal(size=length)


def test_haar_filter_conventions():
    assert HAAR.length == 2
    assert abs(HAAR.wavelet_coeffs.sum()) < 1e-15
    assert abs(HAAR.scaling_coeffs.sum() - np.sqrt(2)) < 1e-15


def test_level_count_rule():
    assert default_level_count(2137) == 6
    assert default_level_count(8) == 1
    assert default_level_count(224) == 4
    assert default_level_count(25055) == 9


def test_level_count_too_short():
    with pytest.raises(ValueError):
        default_level_count(7)


def test_modwt_haar_level1_fixture():
    coeffs = modwt([1.0, 2.0, 3.0, 4.0], levels=1)
    np.testing.assert_allclose(coeffs.wavelet[0], [-1.5, 0.5, 0.5, 0.5], atol=1e-14)
    np.testing.assert_allclose(coeffs.scaling, [2.5, 1.5, 2.5, 3.5], atol=1e-14)


def test_modwt_energy_micro_case():
    coeffs = modwt([1.0, 2.0, 3.0, 4.0], levels=1)
    assert np.sum(coeffs.wavelet[0] ** 2) == pytest.approx(3.0, rel=1e-12)
    assert np.sum(coeffs.scaling**2) == pytest.approx(27.0, rel=1e-12)


def test_modwt_constant_series():
    coeffs = modwt(np.full(32, 5.5), levels=3)
    for w in coeffs.wavelet:
        np.testing.assert_allclose(w, 0.0, atol=1e-12)
    np.testing.assert_allclose(coeffs.scaling, 5.5, atol=1e-12)


def test_modwt_rejects_bad_input():
    with pytest.raises(ValueError):
        modwt([1.0, np.nan, 2.0], levels=1)
    with pytest.raises(ValueError):
        modwt(np.ones(16), levels=5)  # equivalent filter longer than series


def test_mra_level1_fixture():
    dec = decompose([1.0, 2.0, 3.0, 4.0], levels=1)
    np.testing.assert_allclose(dec.details[0], [-1.0, 0.0, 0.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(dec.smooth, [2.0, 2.0, 3.0, 3.0], atol=1e-14)
    np.testing.assert_allclose(dec.details[0] + dec.smooth, [1, 2, 3, 4], atol=1e-14)


def test_mra_constant_series():
    y = np.full(64, -3.25)
    dec = decompose(y, levels=2)
    for d in dec.details:
        np.testing.assert_allclose(d, 0.0, atol=1e-12)
    np.testing.assert_allclose(dec.smooth, y, atol=1e-12)


def test_imodwt_zero_details_returns_smooth():
    dec = decompose(random_series(32, 1), levels=2)
    zeroed = type(dec)(
        details=[np.zeros(32), np.zeros(32)],
        smooth=dec.smooth,
        levels=2,
        filter=dec.filter,
        raw=dec.raw,
    )
    np.testing.assert_array_equal(imodwt(zeroed), dec.smooth)


def test_imodwt_length_mismatch():
    dec = decompose(random_series(32, 1), levels=2)
    broken = type(dec)(
        details=[dec.details[0][:16], dec.details[1]],
        smooth=dec.smooth,
        levels=2,
        filter=dec.filter,
        raw=dec.raw,
    )
    with pytest.raises(ValueError):
        imodwt(broken)


def test_round_trip_many_random_series():
    rng = np.random.default_rng(42)
    for trial in range(100):
        n = int(rng.integers(16, 513))
        y = rng.normal(size=n)
        levels = int(rng.integers(1, default_level_count(n) + 1))
        assert relative_error(imodwt(decompose(y, levels=levels)), y) < 1e-8


@given(st.integers(min_value=16, max_value=256), st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_energy_conservation_property(n, seed):
    y = random_series(n, seed)
    coeffs = modwt(y, levels=default_level_count(n))
    energy = sum(np.sum(w**2) for w in coeffs.wavelet) + np.sum(coeffs.scaling**2)
    assert energy == pytest.approx(np.sum(y**2), rel=1e-8)


def test_shift_equivariance():
    rng = np.random.default_rng(3)
    for n in (16, 64, 250):
        y = rng.normal(size=n)
        for k in (1, 7, n // 2):
            base = modwt(y, levels=2)
            shifted = modwt(np.roll(y, k), levels=2)
            for w_base, w_shift in zip(base.wavelet, shifted.wavelet):
                np.testing.assert_allclose(w_shift, np.roll(w_base, k), atol=1e-10)
            np.testing.assert_allclose(shifted.scaling, np.roll(base.scaling, k), atol=1e-10)


def test_linearity():
    rng = np.random.default_rng(9)
    x, y = rng.normal(size=64), rng.normal(size=64)
    a, b = 2.5, -1.25
    combined = modwt(a * x + b * y, levels=3)
    cx, cy = modwt(x, levels=3), modwt(y, levels=3)
    for j in range(3):
        np.testing.assert_allclose(
            combined.wavelet[j], a * cx.wavelet[j] + b * cy.wavelet[j], atol=1e-10
        )
    np.testing.assert_allclose(combined.scaling, a * cx.scaling + b * cy.scaling, atol=1e-10)


def test_pyramid_matches_equivalent_filter_oracle():
    rng = np.random.default_rng(11)
    for n, levels in ((32, 2), (100, 3), (256, 4)):
        y = rng.normal(size=n)
        assert equivalent_filter_length(2, levels) <= n
        coeffs = modwt(y, levels=levels)
        oracle_w, oracle_v = modwt_direct(y, HAAR.scaling_coeffs, HAAR.wavelet_coeffs, levels)
        for j in range(levels):
            np.testing.assert_allclose(coeffs.wavelet[j], oracle_w[j], atol=1e-10)
        np.testing.assert_allclose(coeffs.scaling, oracle_v, atol=1e-10)
