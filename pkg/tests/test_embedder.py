import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from lapmark.core import CapacityError, WatermarkKey
from lapmark.decoder import extract_image
from lapmark.embedder import alpha_for_psnr, chip_signs, embed_coefficients, embed_image, embed_stream
from lapmark.keystream import generate_chips, laplace_samples
from lapmark.metrics import analytic_sum_mse, mse, psnr

finite = st.floats(-1e4, 1e4)


def test_alpha_zero_is_identity(rng):
    x = rng.normal(size=50)
    w = np.where(rng.random(50) < 0.5, -1, 1)
    for b in (0, 1):
        assert np.array_equal(embed_stream(x, b, w, 0.0), x)


def test_direct_substitution():
    assert embed_stream(np.full(5, 100.0), 1, np.ones(5), 0.02) == pytest.approx(np.full(5, 102.0))
    assert embed_stream(np.full(5, 50.0), 0, -np.ones(5), 0.1) == pytest.approx(np.full(5, 55.0))


def test_stream_errors():
    with pytest.raises(ValueError):
        embed_stream(np.ones(3), 1, np.ones(4), 0.1)
    with pytest.raises(ValueError):
        embed_stream(np.ones(3), 2, np.ones(3), 0.1)
    with pytest.raises(ValueError):
        embed_stream(np.ones(3), 1, np.ones(3), 1.0)


@given(arrays(np.float64, 20, elements=finite), st.integers(0, 1), st.floats(0, 0.999))
def test_multiplicative_and_sign_preserving(x, b, alpha):
    w = generate_chips(17, 20)
    y = embed_stream(x, b, w, alpha)
    assert np.all(y[x == 0] == 0)
    assert np.all(np.sign(y) == np.sign(x))


def test_segments_are_independent(rng):
    """Embedding segment by segment, in any order, equals the batched rule."""
    n, nbits = 13, 6
    x = rng.normal(size=n * nbits + 5)
    bits = rng.integers(0, 2, nbits)
    chips = chip_signs(WatermarkKey(9, 0.2, n), nbits)
    batched = embed_coefficients(x, bits, chips, 0.2)
    piecewise = x.copy()
    for k in rng.permutation(nbits):
        piecewise[k * n:(k + 1) * n] = embed_stream(x[k * n:(k + 1) * n], bits[k], chips[k], 0.2)
    assert np.array_equal(batched, piecewise)
    assert np.array_equal(batched[-5:], x[-5:])


def test_analytic_mse():
    n, alpha, scale = 8000, 0.05, 2.5
    x = laplace_samples(123, 400 * n, scale).reshape(400, n)
    w = generate_chips(456, 400 * n).reshape(400, n)
    bits = (generate_chips(789, 400) > 0).astype(int)
    y = embed_coefficients(x.ravel(), bits, w, alpha).reshape(400, n)
    sum_mse = n * mse(x, y)
    assert abs(sum_mse / analytic_sum_mse(alpha, n, scale) - 1) < 0.05


def test_round_trip_recovers_payload(aerial):
    key = WatermarkKey(2024, 0.3, 1000)
    bits = (generate_chips(1, 100) > 0).astype(np.uint8)
    res = embed_image(aerial, bits, key)
    assert res.bits_embedded == 100
    assert res.watermarked.dtype == np.uint8
    assert np.array_equal(extract_image(res.watermarked, key, 100), bits)


@pytest.mark.xfail(
    strict=True,
    reason="8-bit rounding removes most of a sub-pixel watermark at alpha 0.01; see decisions log",
)
def test_round_trip_at_weak_strength(aerial):
    key = WatermarkKey(2024, 0.01, 1000)
    bits = (generate_chips(1, 100) > 0).astype(np.uint8)
    res = embed_image(aerial, bits, key)
    assert np.array_equal(extract_image(res.watermarked, key, 100), bits)


@pytest.mark.parametrize("alpha", [0.01, 0.1])
def test_dwr_matches_strength(aerial, alpha):
    res = embed_image(aerial, np.ones(14, np.uint8), WatermarkKey(5, alpha, 8000))
    assert abs(res.achieved_dwr + 20 * np.log10(alpha)) < 0.3


def test_dwr_independent_of_n(aerial):
    vals = []
    for n in (2000, 10000):
        key = WatermarkKey(5, 0.02, n)
        nb = 16384 * 7 // n
        vals.append(embed_image(aerial, np.ones(nb, np.uint8), key).achieved_dwr)
    assert abs(vals[0] - vals[1]) < 0.2


def test_psnr_reported_on_written_image(aerial):
    res = embed_image(aerial, np.zeros(14, np.uint8), WatermarkKey(5, 0.2, 8000))
    assert res.achieved_psnr == psnr(aerial, res.watermarked)


def test_uncropped_border_passes_through(aerial):
    cover = aerial[:130, :203]
    res = embed_image(cover, np.ones(2, np.uint8), WatermarkKey(5, 0.5, 100))
    assert res.watermarked.shape == cover.shape
    # 130 -> rows 1..128, 203 -> cols 1..200
    assert np.array_equal(res.watermarked[0], cover[0]) and np.array_equal(res.watermarked[129], cover[129])
    assert np.array_equal(res.watermarked[:, 0], cover[:, 0])
    assert np.array_equal(res.watermarked[:, 201:], cover[:, 201:])


def test_capacity_exceeded(aerial):
    with pytest.raises(CapacityError):
        embed_image(aerial, np.ones(15, np.uint8), WatermarkKey(5, 0.1, 8000))


def test_alpha_for_psnr_hits_target(aerial):
    key = WatermarkKey(5, 0.5, 8000)
    alpha = alpha_for_psnr(aerial, key, 14, 40.0)
    res = embed_image(aerial, np.ones(14, np.uint8), key.with_alpha(alpha))
    assert abs(res.achieved_psnr - 40.0) < 0.2
    with pytest.raises(ValueError):
        alpha_for_psnr(aerial, key, 14, 5.0)
