import math

import numpy as np
import pytest

from combnoise.envelope import PhasedEnvelope, make_envelope, raw_envelope
from combnoise.errors import DomainError
from combnoise.ofd import (POLICY_EXTENDED, POLICY_SUPPORT, amplitude_noise_psd,
                           classical_transfer, cw_pair, eta_enhancement,
                           general_phase_estimator_weights, ofd_weights,
                           phase_noise_psd, suppression_ratio, sweep_suppression,
                           fit_loglog_slope)
from combnoise.oracle import ofd_oracle_psd
from combnoise.states import QuantumSpec


def phase_spec(mode, gains):
    return QuantumSpec(mode=mode, orientation="phase", gains=gains)


def test_flattop_phase_weights_concentrate_at_edges():
    env = make_envelope("flattop", 2, 5.0)
    w = ofd_weights(env, POLICY_SUPPORT)
    assert (w.n_lo, w.n_hi) == (-2, 2)
    by_n = dict(zip(w.indices, w.phase_weights))
    for n in (-1, 0, 1):
        assert by_n[n] == 0.0
    assert by_n[2] > 0 and by_n[-2] < 0


def test_phase_weight_antisymmetry():
    env = make_envelope("sech", 3.0, 2.0)
    w = ofd_weights(env)
    by_n = dict(zip(w.indices, w.phase_weights))
    for n in range(1, w.n_hi + 1):
        assert by_n[n] == -by_n[-n]
    assert by_n[0] == 0.0


def test_cw_pair_weights_and_psd():
    flux = 5.0
    env = cw_pair(flux)
    w = ofd_weights(env, POLICY_SUPPORT)
    assert (w.n_lo, w.n_hi) == (-1, 0)
    np.testing.assert_allclose(np.abs(w.phase_weights), 1.0 / math.sqrt(flux),
                               rtol=1e-14)
    psd = phase_noise_psd(env)
    assert psd.value == pytest.approx(1.0 / flux, rel=1e-12)
    assert psd.units == "rad^2/Hz"
    # the extended policy adds the vacuum beating against the outer edges
    ext = phase_noise_psd(env, policy=POLICY_EXTENDED)
    assert ext.value == pytest.approx(2.0 / flux, rel=1e-12)


def test_single_line_has_no_beatnote():
    env = raw_envelope(0, [1.0])
    with pytest.raises(DomainError):
        ofd_weights(env)


def test_suppression_cw_is_unity():
    assert suppression_ratio(cw_pair(42.0)) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("n", [1, 2, 5, 17, 60])
def test_suppression_flattop_closed_form(n):
    env = make_envelope("flattop", n, 1.0)
    assert suppression_ratio(env) == pytest.approx((2 * n + 1) / (8.0 * n * n),
                                                   rel=1e-12)


def test_suppression_below_unity_for_bandwidth_above_one():
    for shape in ("gaussian", "sech", "flattop"):
        for pts in sweep_suppression(shape, np.linspace(1.0, 30.0, 8)):
            _, m_rms, ratio, _ = pts
            if m_rms >= 1.0:
                assert ratio < 1.0


def test_eta_uniform_and_trivial():
    env = make_envelope("gaussian", 4.0, 3.0)
    assert eta_enhancement(env, phase_spec("intra", 1.0)) == 1.0
    for g in (2.0, 10.0, 31.62):
        assert eta_enhancement(env, phase_spec("intra", g)) * g == \
            pytest.approx(1.0, abs=1e-12)
        assert eta_enhancement(env, phase_spec("epr", g)) * g == \
            pytest.approx(1.0, abs=1e-12)


def test_eta_nonuniform_is_weighted_harmonic_mean():
    env = make_envelope("flattop", 3, 1.0)
    gains = {n: float(g) for n, g in zip(range(-3, 4), (2, 3, 4, 5, 6, 7, 8))}
    spec = phase_spec("intra", gains)
    w = ofd_weights(env)
    weights = w.phase_weights ** 2
    expected = sum(wn / gains.get(int(n), 1.0) for wn, n in zip(weights, w.indices)) \
        / weights.sum()
    assert eta_enhancement(env, spec) == pytest.approx(expected, rel=1e-12)
    assert eta_enhancement(env, spec) == pytest.approx(
        ofd_oracle_psd(env, spec) / ofd_oracle_psd(env, QuantumSpec()), rel=1e-12)
    assert 0.0 < eta_enhancement(env, spec) <= 1.0


def test_epr_equals_intra_for_uniform_gain_symmetric_envelope():
    env = make_envelope("sech", 2.0, 1.5)
    g = 12.0
    a = phase_noise_psd(env, phase_spec("intra", g)).value
    b = phase_noise_psd(env, phase_spec("epr", g)).value
    assert a == pytest.approx(b, rel=1e-12)


def test_epr_requires_symmetric_envelope():
    env = raw_envelope(-1, [1.0, 1.0, 0.7])
    with pytest.raises(DomainError):
        phase_noise_psd(env, phase_spec("epr", 2.0))


def test_orientation_preconditions():
    env = make_envelope("gaussian", 2.0, 1.0)
    amp_spec = QuantumSpec(mode="intra", orientation="amplitude", gains=3.0)
    with pytest.raises(DomainError):
        phase_noise_psd(env, amp_spec)
    with pytest.raises(DomainError):
        amplitude_noise_psd(env, phase_spec("intra", 3.0))


def test_amplitude_cw_matches_phase_value():
    env = cw_pair(4.0)
    assert amplitude_noise_psd(env).value == pytest.approx(1.0 / 4.0, rel=1e-12)


def test_amplitude_interior_lines_contribute():
    env = make_envelope("flattop", 2, 1.0)
    w = ofd_weights(env)
    by_n = dict(zip(w.indices, w.amp_weights))
    for n in (-1, 0, 1):
        assert by_n[n] > 0  # unlike the phase weights


def test_amplitude_uniform_squeezing():
    env = make_envelope("gaussian", 3.0, 1.0)
    g = 9.0
    spec = QuantumSpec(mode="intra", orientation="amplitude", gains=g)
    assert amplitude_noise_psd(env, spec).value * g == \
        pytest.approx(amplitude_noise_psd(env).value, rel=1e-12)


def test_general_weights_reduce_to_in_phase():
    env = make_envelope("gaussian", 2.0, 1.0)
    ph = PhasedEnvelope(env, np.zeros(env.n_lines))
    gw = general_phase_estimator_weights(ph)
    w = ofd_weights(env)
    np.testing.assert_array_equal(gw.phase_p, w.phase_weights)
    np.testing.assert_array_equal(gw.amp_q, w.amp_weights)
    np.testing.assert_array_equal(gw.phase_q, np.zeros_like(w.phase_weights))
    assert gw.beat_phase == 0.0


def test_general_weights_global_phase_invariance():
    env = make_envelope("sech", 1.5, 1.0)
    theta = 0.8137
    ph = PhasedEnvelope(env, np.full(env.n_lines, theta))
    gw = general_phase_estimator_weights(ph)
    w = ofd_weights(env)
    # the common phase cancels in the relative beat phases entirely
    assert gw.beat_phase == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(gw.phase_p, w.phase_weights, rtol=0, atol=1e-15)
    np.testing.assert_allclose(gw.phase_q, 0.0, atol=1e-15)


def test_general_weights_linear_ramp_psd_invariant():
    env = make_envelope("gaussian", 2.5, 1.0)
    ramp = 0.3 * np.arange(env.n_min, env.n_max + 1)
    ph = PhasedEnvelope(env, ramp)
    gw = general_phase_estimator_weights(ph)
    assert gw.beat_phase == pytest.approx(0.3, rel=1e-12)
    for spec in (QuantumSpec(),
                 phase_spec("intra", {n: 2.0 + abs(n) for n in range(-40, 41)})):
        flat = ofd_oracle_psd(env, spec)
        ramped = ofd_oracle_psd(ph, spec)
        assert ramped == pytest.approx(flat, rel=1e-12)


def test_classical_transfer_examples():
    env = make_envelope("gaussian", 16.67, 1.0)
    assert classical_transfer(env, 1e5) == pytest.approx(1e-5, rel=1e-12)
    ft = make_envelope("flattop", 50, 1.0)
    assert classical_transfer(ft, 1e5) == pytest.approx(1e-5, rel=1e-12)
    # PSD suppression (transfer squared) is (Omega_r / omega_0)^2
    n0 = env.omega0 / env.omega_rep
    t = classical_transfer(env, n0)
    assert t * t == pytest.approx((env.omega_rep / env.omega0) ** 2, rel=1e-9)
    with pytest.raises(DomainError):
        classical_transfer(env, 0.5)


def test_coherent_reference_noise_matches_classical_transfer():
    # a common reference phase drives every line coherently with amplitude
    # sqrt(2) a_n (1 + n/N0); the oracle with that rank-1 classical
    # covariance must reproduce SQL + S_ref / N0^2
    from combnoise.states import CovarianceModel, build_covariance, \
        quadratic_form_variance

    env = make_envelope("flattop", 4, 2.0)
    n0, s_ref = 1e3, 0.42
    w = ofd_weights(env)
    cov = build_covariance((w.n_lo, w.n_hi), QuantumSpec())
    drive = np.zeros(cov.dim)
    vec = np.zeros(cov.dim)
    for i, n in enumerate(w.indices):
        drive[cov.p_index(int(n))] = math.sqrt(2.0) * env.amp(int(n)) * (1 + n / n0)
        vec[cov.p_index(int(n))] = w.phase_weights[i]
    noisy_cov = CovarianceModel(cov.n_min, cov.n_max,
                                cov.matrix + s_ref * np.outer(drive, drive))
    noisy = quadratic_form_variance(noisy_cov, vec)
    clean = phase_noise_psd(env).value
    assert noisy - clean == pytest.approx(s_ref / n0 ** 2, rel=1e-9)
    assert classical_transfer(env, n0) ** 2 * s_ref == \
        pytest.approx(noisy - clean, rel=1e-9)


def test_band_metadata():
    env = cw_pair(1.0)
    rep = phase_noise_psd(env)
    assert rep.band_hz[0] == 0.0
    assert rep.band_hz[1] == pytest.approx(env.omega_rep / (4 * math.pi))


def test_slope_fit_window():
    targets = np.logspace(1, 2, 25)
    slopes = {}
    for shape in ("gaussian", "sech", "flattop"):
        pts = sweep_suppression(shape, targets)
        slopes[shape] = fit_loglog_slope([p[1] for p in pts], [p[2] for p in pts])
    assert slopes["gaussian"] == pytest.approx(-2.0, abs=0.1)
    assert slopes["sech"] == pytest.approx(-2.0, abs=0.1)
    assert slopes["flattop"] == pytest.approx(-1.0, abs=0.1)


def test_oracle_equivalence_randomized():
    from combnoise.validate import check_ofd_oracle
    result = check_ofd_oracle(200, seed=123)
    assert result.passed, result.detail
