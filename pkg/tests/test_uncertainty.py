import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from torusqm.algebra import PhaseSpaceParams
from torusqm.states import (
    DegenerateRecurrence,
    MusSpec,
    basis_state,
    gaussian_state,
    mus_state,
    random_state,
    uniform_state,
)
from torusqm.uncertainty import (
    InsufficientPositiveExcess,
    NoCircularMean,
    circular_moments,
    continuum_dispersions,
    fit_power_law,
    gaussian_probe,
    gup_excess,
    gup_scaling_sweep,
    mus_probe,
    predicted_excess,
    unitary_uncertainty,
)

SWEEP = [64, 128, 256, 512, 1024]


def test_unitary_uncertainty_basis_state():
    r = unitary_uncertainty(basis_state(7, 3))
    assert r.disp_u <= 1e-15 and r.cross_sq <= 1e-30 and abs(r.saturation_gap) <= 1e-15


def test_unitary_uncertainty_mus_vs_generic():
    rng = np.random.default_rng(0)
    spec = MusSpec.from_mu(16, 0.4 + 1.1j, 6)
    assert abs(unitary_uncertainty(mus_state(spec)).saturation_gap) <= 1e-10
    assert unitary_uncertainty(random_state(16, rng)).saturation_gap > 1e-6


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 64), st.integers(0, 2**31 - 1))
def test_gap_nonnegative(n, seed):
    assert unitary_uncertainty(random_state(n, np.random.default_rng(seed))).saturation_gap >= -1e-12


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from([4, 8, 16, 100]),
    st.complex_numbers(min_magnitude=0.05, max_magnitude=2.5, allow_nan=False, allow_infinity=False),
    st.integers(0, 99),
)
def test_every_mus_saturates(n, mu, root):
    try:
        s = mus_state(MusSpec.from_mu(n, mu, root % n))
    except DegenerateRecurrence:
        return
    assert abs(unitary_uncertainty(s).saturation_gap) <= 1e-10


def test_circular_moments_oracle():
    # oracle: explicit unwrap by trying every rotation and keeping the tightest
    rng = np.random.default_rng(1)
    n = 40
    p = np.exp(-0.5 * ((np.arange(n) - 3) / 2.5) ** 2) + 0.01 * rng.random(n)
    p /= p.sum()
    best = min(
        (float(p @ (((np.arange(n) - s) % n) - (p @ ((np.arange(n) - s) % n))) ** 2), s) for s in range(n)
    )
    _, var = circular_moments(p)
    assert var == pytest.approx(best[0], rel=1e-12)


def test_circular_moments_uniform_raises():
    with pytest.raises(NoCircularMean):
        circular_moments(np.full(8, 1 / 8))
    with pytest.raises(NoCircularMean):
        continuum_dispersions(uniform_state(8))


def test_dispersions_basis_and_wrap_invariance():
    # a basis state has dq2 = 0 but a flat momentum distribution
    _, var = circular_moments(basis_state(16, 5).probs)
    assert var == 0
    a = gaussian_state(64, 0, 1.0, 0)
    b = gaussian_state(64, 32, 1.0, 0)
    assert abs(continuum_dispersions(a)[0] - continuum_dispersions(b)[0]) <= 1e-12


def test_dispersions_balanced_gaussian_n256():
    dq2, dp2 = continuum_dispersions(gaussian_state(256, 128, math.sqrt(0.5), 0))
    assert abs(dq2 - 0.5) <= 2e-3 and abs(dp2 - 0.5) <= 2e-3


def test_dispersions_physical_units():
    p = PhaseSpaceParams(64)
    s = gaussian_state(p, 20, 1.2, 3)
    _, vj = circular_moments(s.probs)
    _, vk = circular_moments(s.momentum_probs)
    dq2, dp2 = continuum_dispersions(s)
    assert dq2 == pytest.approx(p.beta**2 * vj) and dp2 == pytest.approx(p.alpha**2 * vk)


def test_gup_excess_fields():
    r = gup_excess(gaussian_state(1024, 512, math.sqrt(0.5), 0))
    assert abs(r.product - 0.25) <= 5e-3
    assert r.excess == pytest.approx(r.product - 0.25)
    assert r.predicted_excess == pytest.approx(predicted_excess(PhaseSpaceParams(1024), r.dq2, r.dp2))
    assert r.predicted_excess == pytest.approx(0.25 * (math.pi / 2) * (r.dp2 / 32 + r.dq2 / 1024**1.5))


@pytest.mark.xfail(strict=True, reason="a wrapped Gaussian sits just below 1/4 at N=64; see notes")
def test_gaussian_excess_positive_n64():
    assert gup_excess(gaussian_state(64, 32, math.sqrt(0.5), 0)).excess > 0


@pytest.mark.xfail(strict=True, reason="Gaussian excess is exponentially small, not near the series; see notes")
def test_gaussian_excess_within_factor_two_n256():
    r = gup_excess(gaussian_state(256, 128, math.sqrt(0.5), 0))
    assert 0.5 <= r.excess / r.predicted_excess <= 2


@pytest.mark.xfail(strict=True, reason="MUS probe runs 2.2 to 3.2 times the series; see notes")
def test_mus_probe_excess_within_factor_two_n256():
    r = gup_excess(mus_probe(0.5)(256))
    assert 0.5 <= r.excess / r.predicted_excess <= 2


def test_mus_probe_holds_dp2():
    for n in (64, 300):
        s = mus_probe(0.5)(n)
        assert continuum_dispersions(s)[1] == pytest.approx(0.5, abs=1e-9)
        assert abs(unitary_uncertainty(s).saturation_gap) <= 1e-10


def test_sweep_exponent_and_amplitude_ratio():
    fit = gup_scaling_sweep(SWEEP)
    assert abs(fit.exponent + 0.5) <= 0.15
    assert fit.r_squared > 0.99
    fit2 = gup_scaling_sweep(SWEEP, mus_probe(1.0))
    assert 2 * 0.7 <= fit2.amplitude / fit.amplitude <= 2 * 1.3


def test_sweep_preconditions():
    with pytest.raises(ValueError):
        gup_scaling_sweep([64, 128, 256])
    with pytest.raises(ValueError):
        gup_scaling_sweep([64, 32, 128, 256])
    with pytest.raises(InsufficientPositiveExcess):
        gup_scaling_sweep(SWEEP, gaussian_probe(0.5))


def test_fit_sanity():
    fit = fit_power_law([10, 20, 40, 80], [0.3] * 4)
    assert abs(fit.exponent) <= 1e-12 and fit.amplitude == pytest.approx(0.3)
    fit = fit_power_law([10, 20, 40, 80, 160], [2.0 * n**-0.5 for n in (10, 20, 40, 80, 160)])
    assert fit.exponent == pytest.approx(-0.5) and fit.amplitude == pytest.approx(2.0)


def test_small_beta_ratio():
    for n in (256, 512, 1024):
        s = gaussian_state(n, n / 2, math.sqrt(0.5), 0)
        r = gup_excess(s)
        ratio = r.disp_v / (PhaseSpaceParams(n).beta ** 2 * r.dp2)
        assert 0.9 <= ratio <= 1.0


def test_small_beta_difference_shrinks():
    diffs = []
    for n in (64, 256, 1024):
        r = gup_excess(gaussian_state(n, n / 2, math.sqrt(0.5), 0))
        diffs.append(abs(r.disp_v - PhaseSpaceParams(n).beta ** 2 * r.dp2))
    assert diffs[0] > diffs[1] > diffs[2]


def test_mus_probe_product_decreasing():
    products = [r.product for r in gup_scaling_sweep(SWEEP).reports]
    assert all(b < a for a, b in zip(products, products[1:]))


@pytest.mark.xfail(strict=True, reason="wrapped Gaussians approach 1/4 from below; see notes")
def test_gaussian_product_decreasing():
    products = [gup_excess(gaussian_probe(0.5)(n)).product for n in SWEEP]
    assert all(b <= a + 1e-6 for a, b in zip(products, products[1:]))
    assert products[0] > 0.25
