import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from lapmark.metrics import analytic_dwr, ber, dwr, mse, psnr, recovery_rate, report_row, wilson_interval

bits = st.integers(1, 64).flatmap(
    lambda n: st.tuples(arrays(np.uint8, n, elements=st.integers(0, 1)), arrays(np.uint8, n, elements=st.integers(0, 1)))
)


def test_mse_examples():
    a = np.arange(10.0)
    assert mse(a, a) == 0
    assert mse(a + 2, a) == 4
    with pytest.raises(ValueError):
        mse(np.zeros(3), np.zeros(4))


def test_psnr_examples():
    a = np.zeros((4, 4))
    assert psnr(a, a + 1) == pytest.approx(10 * math.log10(65025))
    assert psnr(a, a + 1) == pytest.approx(48.13, abs=0.005)
    assert psnr(a, a) == math.inf


@given(st.floats(0.01, 100), st.floats(0.01, 100))
def test_psnr_decreasing_in_mse(e1, e2):
    a = np.zeros(4)
    p1, p2 = psnr(a, a + math.sqrt(e1)), psnr(a, a + math.sqrt(e2))
    if e1 < e2:
        assert p1 > p2


def test_dwr_examples(rng):
    x = rng.normal(size=1000)
    assert dwr(x, x * 1.1) == pytest.approx(20.0)
    assert analytic_dwr(0.01) == pytest.approx(40.0)
    assert dwr(x, x) == math.inf
    with pytest.raises(ValueError):
        dwr(np.zeros(3), np.ones(3))


def test_ber_examples():
    s = np.array([0, 1, 1, 0, 1, 0, 0, 1])
    assert ber(s, s) == 0
    assert ber(s, 1 - s) == 1
    r = s.copy()
    r[3] ^= 1
    assert ber(s, r) == 0.125
    with pytest.raises(ValueError):
        ber(s, s[:-1])


@given(bits)
def test_ber_symmetric_and_recovery(pair):
    s, r = pair
    assert ber(s, r) == ber(r, s)
    assert recovery_rate(s, r) == 1 - ber(s, r)


def wilson_oracle(k, n, z=1.959963984540054):
    p = k / n
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return centre - half, centre + half


@pytest.mark.parametrize("k,n", [(0, 10), (3, 10), (10, 10), (11, 200000), (5000, 200000)])
def test_wilson_interval(k, n):
    lo, hi = wilson_interval(k, n)
    olo, ohi = wilson_oracle(k, n)
    assert lo == pytest.approx(max(olo, 0.0), abs=1e-12)
    assert hi == pytest.approx(min(ohi, 1.0), abs=1e-12)


def test_report_row_formatting():
    assert report_row("psnr", "img", 0.1, 8000, "", 40.5) == "psnr,img,0.1,8000,,40.5"
