import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hmimo.channel import Scenario, draw
from hmimo.errors import DegenerateChannelError, SingularityError, ValidationError
from hmimo.geometry import ArrayGeometry
from hmimo.precoding import (
    EffectiveChannel,
    effective_channel,
    mmse_precoder,
    mrt_precoder,
    random_phase,
    zf_precoder,
)
from hmimo.rates import zf_beta

from oracles import pinv_columns, random_complex

DESK = Scenario(ArrayGeometry(10, 10, 1 / 3), ArrayGeometry(4, 4, 1 / 3), users=3)


def _raw(h, counts=None):
    k = h.shape[0]
    return EffectiveChannel(h, np.ones(h.shape[1], complex), counts or (k,))


def _angles(a, b):
    # sine of the angle via the residual of b projected on a; arccos loses precision near zero
    a = a / np.linalg.norm(a, axis=0)
    b = b / np.linalg.norm(b, axis=0)
    resid = b - a * np.einsum("ij,ij->j", a.conj(), b)
    return np.arcsin(np.clip(np.linalg.norm(resid, axis=0), 0, 1))


def test_unit_phase_is_identity():
    r = draw(DESK, 1, 0)
    ch = effective_channel(r, DESK.tx_basis)
    np.testing.assert_allclose(ch.matrix, r.stacked_wavenumber @ DESK.tx_basis.harmonic_matrix.conj().T)
    assert ch.stream_counts == (5, 5, 5)


def test_phase_validation():
    r = draw(DESK, 1, 0)
    with pytest.raises(ValidationError):
        effective_channel(r, DESK.tx_basis, np.full(100, 1.1))
    with pytest.raises(ValidationError):
        effective_channel(r, DESK.tx_basis, np.ones(99))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31))
def test_effective_channel_preserves_norm_and_gram(seed):
    r = draw(DESK, seed, 0)
    phi = random_phase(100, np.random.default_rng(seed))
    ch = effective_channel(r, DESK.tx_basis, phi)
    h_a = r.stacked_wavenumber
    assert np.linalg.norm(ch.matrix) == pytest.approx(np.linalg.norm(h_a), abs=1e-9)
    np.testing.assert_allclose(ch.matrix @ ch.matrix.conj().T, h_a @ h_a.conj().T, atol=1e-9)


def test_zf_on_orthonormal_rows():
    q, _ = np.linalg.qr(random_complex(np.random.default_rng(0), (8, 3)))
    h = q.T.conj()  # 3 x 8, orthonormal rows
    v = zf_precoder(_raw(h)).matrix
    np.testing.assert_allclose(v, h.conj().T / np.sqrt(3), atol=1e-12)
    np.testing.assert_allclose(h @ v, np.eye(3) / np.sqrt(3), atol=1e-12)


def test_zf_matches_pseudo_inverse_directions():
    h = random_complex(np.random.default_rng(1), (6, 20))
    p = zf_precoder(_raw(h))
    assert np.max(_angles(p.matrix, pinv_columns(h))) < 1e-8


@pytest.mark.parametrize("seed", range(5))
def test_zf_nulls_and_power(seed):
    ch = effective_channel(draw(DESK, seed, 0), DESK.tx_basis)
    p = zf_precoder(ch)
    g = ch.matrix @ p.matrix
    off = g - np.diag(np.diag(g))
    assert np.max(np.abs(off)) < 1e-10
    np.testing.assert_allclose(np.diag(g), 1 / (np.sqrt(15) * np.sqrt(p.column_norms_sq)), rtol=1e-9)
    assert np.trace(p.matrix @ p.matrix.conj().T).real == pytest.approx(1.0, abs=1e-9)


def test_zf_gain_equals_wavenumber_gram():
    r = draw(DESK, 4, 2)
    phi = random_phase(100, np.random.default_rng(3))
    p = zf_precoder(effective_channel(r, DESK.tx_basis, phi))
    np.testing.assert_allclose(1 / p.column_norms_sq, zf_beta(r.stacked_wavenumber), rtol=1e-9)


def test_zf_scaling():
    h = random_complex(np.random.default_rng(2), (4, 10))
    a, b = zf_precoder(_raw(h)), zf_precoder(_raw(3.0 * h))
    np.testing.assert_allclose(np.sqrt(b.column_norms_sq), np.sqrt(a.column_norms_sq) / 3.0, rtol=1e-10)
    np.testing.assert_allclose(a.matrix, b.matrix, atol=1e-12)


def test_zf_rank_deficient():
    h = random_complex(np.random.default_rng(5), (3, 10))
    h[2] = h[0] + h[1]
    with pytest.raises(SingularityError, match="3x3"):
        zf_precoder(_raw(h))
    with pytest.raises(SingularityError):
        zf_precoder(_raw(random_complex(np.random.default_rng(5), (5, 3))))


def test_single_stream_mrt_equals_zf():
    h = random_complex(np.random.default_rng(6), (1, 12))
    a, b = zf_precoder(_raw(h)).matrix, mrt_precoder(_raw(h)).matrix
    assert abs(abs(np.vdot(a, b)) - 1.0) < 1e-12


def test_mrt_gain_real_positive():
    ch = effective_channel(draw(DESK, 8, 1), DESK.tx_basis)
    p = mrt_precoder(ch)
    d = np.diag(ch.matrix @ p.matrix)
    assert np.all(np.abs(d.imag) < 1e-10) and np.all(d.real > 0)
    assert np.trace(p.matrix @ p.matrix.conj().T).real == pytest.approx(1.0, abs=1e-9)


def test_mrt_zero_row():
    h = random_complex(np.random.default_rng(0), (3, 6))
    h[1] = 0
    with pytest.raises(DegenerateChannelError):
        mrt_precoder(_raw(h))


def test_mmse_limits():
    h = random_complex(np.random.default_rng(7), (6, 16))
    ch = _raw(h)
    hi = mmse_precoder(ch, p_u=1e6, noise_var=1.0)
    lo = mmse_precoder(ch, p_u=1e-6, noise_var=1.0)
    assert np.max(_angles(hi.matrix, zf_precoder(ch).matrix)) < 1e-3
    assert np.max(_angles(lo.matrix, mrt_precoder(ch).matrix)) < 1e-3
    for p in (hi, lo):
        assert np.trace(p.matrix @ p.matrix.conj().T).real == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValidationError):
        mmse_precoder(ch, 0.0)


def test_mmse_works_when_zf_cannot():
    h = random_complex(np.random.default_rng(8), (6, 4))
    p = mmse_precoder(_raw(h), 10.0)
    assert np.trace(p.matrix @ p.matrix.conj().T).real == pytest.approx(1.0, abs=1e-9)


def test_per_user_normalization():
    ch = effective_channel(draw(DESK, 1, 1), DESK.tx_basis)
    p = zf_precoder(ch, normalization="per-user")
    assert np.trace(p.matrix @ p.matrix.conj().T).real == pytest.approx(3.0, abs=1e-9)
    with pytest.raises(ValidationError):
        zf_precoder(ch, normalization="bogus")
