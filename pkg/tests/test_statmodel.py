import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from lapmark.statmodel import (
    SumDensityParams,
    fit_report,
    laplace_cdf,
    laplace_logpdf,
    laplace_pdf,
    log_sum_density,
    mle_scale,
    sum_cdf_grid,
    sum_density,
)

scales = st.floats(0.05, 20.0)


def test_pdf_values():
    assert laplace_pdf(0.0, 1.0) == 0.5
    assert laplace_pdf(-3.0, 1.0) == laplace_pdf(3.0, 1.0)
    assert laplace_logpdf(2.0, 3.0) == pytest.approx(np.log(laplace_pdf(2.0, 3.0)))


@pytest.mark.parametrize("scale", [0.1, 1.0, 7.5])
def test_pdf_quadrature(scale):
    t = np.linspace(-40 * scale, 40 * scale, 400001)
    assert abs(integrate.simpson(laplace_pdf(t, scale), x=t) - 1) < 1e-6


def test_cdf_matches_pdf_integral():
    for t in (-2.0, 0.0, 0.3, 5.0):
        assert laplace_cdf(t, 1.3) == pytest.approx(integrate.quad(laplace_pdf, -np.inf, t, args=(1.3,))[0])


@pytest.mark.parametrize("bad", [0.0, -1.0, np.inf])
def test_nonpositive_scale(bad):
    with pytest.raises(ValueError):
        laplace_pdf(1.0, bad)
    with pytest.raises(ValueError):
        SumDensityParams(1.0, bad)


def test_mle_examples():
    assert mle_scale([1, 3]) == 2.0
    assert mle_scale([-2, 2]) == 2.0
    with pytest.raises(ValueError):
        mle_scale([0, 0, 0])
    with pytest.raises(ValueError):
        mle_scale([])


def test_mle_consistency(rng):
    x = rng.laplace(scale=3.0, size=10**5)
    assert abs(mle_scale(x) - 3.0) < 0.05


@given(
    st.lists(st.floats(-1e3, 1e3, allow_subnormal=False), min_size=1, max_size=50).filter(
        lambda v: max(map(abs, v)) > 1e-100
    ),
    st.floats(1e-3, 1e3),
)
def test_mle_equivariance(x, c):
    assert mle_scale(np.array(x) * c) == pytest.approx(c * mle_scale(x), rel=1e-12)


def test_sum_density_examples():
    assert sum_density(0.0, SumDensityParams(2.0, 1.0)) == pytest.approx(1 / 6)
    assert sum_density(0.0, SumDensityParams(1.0, 1.0)) == pytest.approx(0.25)
    # symmetric in its two scales
    z = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(sum_density(z, SumDensityParams(2.0, 0.5)), sum_density(z, SumDensityParams(0.5, 2.0)))


def quad_pieces(f, breaks):
    """Integral over the real line, split at the kinks of ``f``."""
    pts = [-np.inf, *sorted(set(breaks)), np.inf]
    return sum(integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-11)[0] for lo, hi in zip(pts[:-1], pts[1:]))


def convolution_oracle(z, a, b):
    return quad_pieces(lambda t: laplace_pdf(t, a) * laplace_pdf(z - t, b), [0.0, z])


@pytest.mark.parametrize("a,b", [(2.0, 1.0), (1.0, 1.0), (0.3, 5.0), (1.0, 1.0 + 1e-10)])
def test_sum_density_is_the_convolution(a, b):
    for z in (-3.0, -0.2, 0.0, 0.7, 4.0):
        assert sum_density(z, SumDensityParams(a, b)) == pytest.approx(convolution_oracle(z, a, b), rel=1e-7)


@pytest.mark.parametrize("a,b", [(2.0, 1.0), (1.0, 1.0), (0.3, 5.0), (4.0, 0.01)])
def test_sum_density_normalised(a, b):
    total = quad_pieces(lambda z: sum_density(z, SumDensityParams(a, b)), [0.0])
    assert abs(total - 1) < 1e-6


def test_continuity_across_equal_scales():
    z = np.linspace(-10, 10, 201)
    for a in (0.5, 1.0, 3.0):
        limit = sum_density(z, SumDensityParams(a, a))
        a2 = a * (1 + 1e-7)
        general = (a2 * np.exp(-np.abs(z) / a2) - a * np.exp(-np.abs(z) / a)) / (2 * (a2**2 - a**2))
        assert np.max(np.abs(general - limit)) < 1e-6


@given(st.floats(-1e4, 1e4), scales, scales)
def test_sum_density_nonnegative(z, a, b):
    assert sum_density(z, SumDensityParams(a, b)) >= 0


@given(st.floats(-50, 50), scales, scales)
def test_log_density_consistent(z, a, b):
    f = sum_density(z, SumDensityParams(a, b))
    if f > 1e-250:
        assert log_sum_density(z, a, b) == pytest.approx(np.log(f), rel=1e-9, abs=1e-9)


def test_log_density_survives_underflow():
    val = log_sum_density(1e5, 1.0, 2.0)
    assert np.isfinite(val) and val < -1e4


def test_sum_cdf_matches_quadrature():
    a, b = 1.5, 0.4
    for e in (-2.0, 0.0, 1.0):
        q = integrate.quad(lambda z: sum_density(z, SumDensityParams(a, b)), -np.inf, e)[0]
        assert sum_cdf_grid(a, b, [e])[0] == pytest.approx(q, abs=1e-10)


def test_monte_carlo_histogram(rng):
    a, b = 2.0, 1.0
    z = rng.laplace(scale=a, size=2 * 10**5) + rng.laplace(scale=b, size=2 * 10**5)
    edges = np.quantile(z, np.linspace(0.005, 0.995, 11))
    counts, _ = np.histogram(z, edges)
    expect = np.diff(sum_cdf_grid(a, b, edges)) * z.size
    assert np.max(np.abs(counts / expect - 1)) < 0.02


def test_fit_self(rng):
    assert fit_report(rng.laplace(size=10**5)).ks_laplace < 0.01


def test_fit_misfit(rng):
    assert fit_report(rng.uniform(-1, 1, 10**5)).ks_laplace > 0.05


def test_fit_natural_image(aerial):
    from lapmark.core import DEFAULT_MASK
    from lapmark.transform import forward_block_dct, gather_midband

    rep = fit_report(gather_midband(forward_block_dct(aerial[:512, :512]), DEFAULT_MASK))
    assert rep.ks_laplace < rep.ks_gauss
    assert rep.csv_row("aerial").split(",")[0] == "aerial"


def test_fit_empty():
    with pytest.raises(ValueError):
        fit_report([])
