import math

import numpy as np
import pytest

from hmimo.channel import Scenario, draw
from hmimo.errors import InfeasibleError, SingularityError
from hmimo.geometry import ArrayGeometry
from hmimo.precoding import EffectiveChannel, effective_channel, mrt_precoder, zf_precoder
from hmimo.rates import (
    collect_trial_rates,
    db_to_linear,
    expected_beta_check,
    monte_carlo_se,
    per_stream_sinr,
    theoretical_zf_rate,
    zf_beta,
    zf_beta_determinant,
)
from hmimo.spectral import SpectralVariance

from oracles import beta_by_cofactors, random_complex

DESK = Scenario(ArrayGeometry(10, 10, 1 / 3), ArrayGeometry(4, 4, 1 / 3), users=3)


def uniform_sv(n_s, n_r, n_tx=100, n_rx=16):
    return SpectralVariance(np.full(n_s, 1 / n_s), np.full(n_r, 1 / n_r), n_tx, n_rx)


def test_zf_sinr_closed_form():
    ch = effective_channel(draw(DESK, 0, 0), DESK.tx_basis)
    p = zf_precoder(ch)
    sinr = per_stream_sinr(ch, p, 2.0, 0.5)
    assert sinr.shape == (3, 5)
    g = np.abs(ch.matrix @ p.matrix) ** 2
    assert np.max(g - np.diag(np.diag(g))) < 1e-18
    np.testing.assert_allclose(sinr.ravel(), 2.0 / (15 * 0.5 * p.column_norms_sq), rtol=1e-6)


def test_zero_power_zero_sinr():
    ch = effective_channel(draw(DESK, 0, 0), DESK.tx_basis)
    assert np.all(per_stream_sinr(ch, mrt_precoder(ch), 0.0) == 0)


def test_single_stream_mrt_sinr():
    h = random_complex(np.random.default_rng(4), (1, 9))
    ch = EffectiveChannel(h, np.ones(9, complex), (1,))
    sinr = per_stream_sinr(ch, mrt_precoder(ch), 3.0, 0.7)
    assert sinr[0, 0] == pytest.approx(3.0 * np.sum(np.abs(h) ** 2) / 0.7, rel=1e-12)


def test_beta_single_row():
    h = random_complex(np.random.default_rng(0), (1, 7))
    assert zf_beta(h)[0] == pytest.approx(np.sum(np.abs(h) ** 2), rel=1e-12)


def test_beta_gram_inverse_matches_determinants():
    h = random_complex(np.random.default_rng(1), (3, 5))
    b = zf_beta(h)
    np.testing.assert_allclose(b, beta_by_cofactors(h), rtol=1e-9)
    np.testing.assert_allclose(b, zf_beta_determinant(h), rtol=1e-9)


def test_beta_orthogonal_rows():
    q, _ = np.linalg.qr(random_complex(np.random.default_rng(2), (6, 3)))
    norms = np.array([0.5, 2.0, 3.0])
    h = norms[:, None] * q.T.conj()
    np.testing.assert_allclose(zf_beta(h), norms**2, rtol=1e-12)


def test_beta_singular():
    h = np.zeros((2, 4), complex)
    h[0, 0] = 1
    with pytest.raises(SingularityError):
        zf_beta(h)


def test_theory_boundary_and_uniform_form():
    svs = [uniform_sv(15, 5)] * 3  # n_s = K
    th = theoretical_zf_rate(svs, 10.0)
    assert th.dof == 1
    np.testing.assert_allclose(th.per_stream_rate, np.log2(1 + 10 / 15 * 1 * 1600 / (5 * 15)))
    svs = [uniform_sv(81, 5)] * 3
    th = theoretical_zf_rate(svs, 2.0, noise_var=0.5)
    expect = math.log2(1 + (2.0 / (15 * 0.5)) * (81 - 15 + 1) * 1600 / (5 * 81))
    np.testing.assert_allclose(th.per_stream_rate, expect, rtol=1e-12)
    assert th.per_stream_rate.shape == (3, 5)


def test_theory_per_user_variant():
    svs = [uniform_sv(81, 5)] * 3
    th = theoretical_zf_rate(svs, 2.0, normalization="per-user")
    expect = math.log2(1 + (2.0 / 5) * (81 - 5 + 1) * 1600 / (5 * 81))
    np.testing.assert_allclose(th.per_stream_rate, expect, rtol=1e-12)


def test_theory_monotone():
    base = theoretical_zf_rate([uniform_sv(40, 4)] * 2, 3.0).per_stream_rate[0, 0]
    more_tx = theoretical_zf_rate([uniform_sv(41, 4)] * 2, 3.0).per_stream_rate[0, 0]
    more_users = theoretical_zf_rate([uniform_sv(40, 4)] * 3, 3.0).per_stream_rate[0, 0]
    assert more_tx > base > more_users


def test_theory_infeasible():
    with pytest.raises(InfeasibleError):
        theoretical_zf_rate([uniform_sv(9, 5)] * 2, 1.0)


def test_expected_beta_single_stream_exact():
    sv = SpectralVariance(np.array([0.5, 0.3, 0.2]), np.array([1.0]), 9, 4)
    chk = expected_beta_check([sv], n_trials=4000, seed=3)
    assert chk.closed_form[0] == pytest.approx(np.sum(sv.sigma_matrix[0] ** 2), rel=1e-12)
    # beta is a weighted sum of unit exponentials; sd of the mean is below 1%
    assert chk.relative_deviation[0] < 0.03


def test_expected_beta_nonuniform_is_reported():
    chk = expected_beta_check(DESK.variances, n_trials=200, seed=1)
    assert chk.relative_deviation.shape == (15,)
    assert np.all(np.isfinite(chk.relative_deviation))


def test_zf_sinr_path_matches_beta_path():
    p_u = db_to_linear(5.0)
    for t in range(10):
        r = draw(DESK, 2, t)
        ch = effective_channel(r, DESK.tx_basis)
        via_sinr = np.log2(1 + per_stream_sinr(ch, zf_precoder(ch), p_u).ravel())
        via_beta = np.log2(1 + p_u / 15 * zf_beta(r.stacked_wavenumber))
        np.testing.assert_allclose(via_sinr, via_beta, rtol=1e-6)


def test_se_nondecreasing_in_snr():
    grid = [-10, 0, 10, 20]
    rates = collect_trial_rates(DESK, ["mrt", "zf", "mmse"], grid, 40, seed=5)
    for s, arr in rates.items():
        means = arr.sum(axis=2).mean(axis=0)
        assert np.all(np.diff(means) >= -1e-12), s


def test_doubling_power_never_hurts_zf():
    r = draw(DESK, 0, 1)
    ch = effective_channel(r, DESK.tx_basis)
    p = zf_precoder(ch)
    a = np.log2(1 + per_stream_sinr(ch, p, 1.0))
    b = np.log2(1 + per_stream_sinr(ch, p, 2.0))
    assert np.all(b >= a)


def test_monte_carlo_se_result_fields():
    res = monte_carlo_se(DESK, "zf", [0.0, 10.0], n_trials=30, seed=4)
    assert [r.snr_db for r in res] == [0.0, 10.0]
    for r in res:
        assert r.scheme == "zf" and r.n_trials == 30
        assert r.per_stream_rate.shape == (3, 5)
        assert np.all(r.per_stream_rate >= 0)
        assert r.sum_rate == pytest.approx(r.per_stream_rate.sum(), abs=1e-9)
        assert r.std_error > 0


def test_monte_carlo_se_deterministic_across_workers():
    a = monte_carlo_se(DESK, "mmse", [0.0], n_trials=12, seed=4, workers=1)
    b = monte_carlo_se(DESK, "mmse", [0.0], n_trials=12, seed=4, workers=2)
    assert a[0].sum_rate == b[0].sum_rate
    assert np.array_equal(a[0].per_stream_rate, b[0].per_stream_rate)


def test_infeasible_zf_raises_before_trials():
    sc = Scenario(ArrayGeometry(10, 10, 1 / 6), ArrayGeometry(6, 6, 1 / 6), users=3)
    with pytest.raises(InfeasibleError):
        monte_carlo_se(sc, "zf", [0.0], n_trials=1)
    # MRT has no inverse and stays available
    assert monte_carlo_se(sc, "mrt", [0.0], n_trials=2)[0].sum_rate > 0
