import json
import math
import warnings

import numpy as np
import pytest

from combnoise.dcs import (DcsSetup, SampleResponse, advantage_curve, flattop_setup,
                           localized_absorber, photocurrent_psd, setup_from_json,
                           setup_to_json, sql_psd, transmittance_snr,
                           transmittance_variance, transparent_sample)
from combnoise.envelope import raw_envelope
from combnoise.errors import ContractError, DomainError
from combnoise.oracle import dcs_oracle_psd
from combnoise.states import QuantumSpec

VAC = QuantumSpec(frame="cross")


def amp_spec(mode, frame, gains):
    return QuantumSpec(mode=mode, frame=frame, orientation="amplitude", gains=gains)


def test_localized_absorber():
    sample = localized_absorber((-2, 2), 1, 0.0)
    np.testing.assert_array_equal(sample.kappas, np.ones(5))
    sample = localized_absorber((-2, 2), 1, 10.0)
    assert sample.kappa(1) == pytest.approx(0.1, rel=1e-15)
    assert all(sample.kappa(n) == 1.0 for n in (-2, -1, 0, 2))
    assert localized_absorber((-2, 2), 0, float("inf")).kappa(0) == 0.0
    with pytest.raises(DomainError):
        localized_absorber((-2, 2), 3, 1.0)
    with pytest.raises(DomainError):
        localized_absorber((-2, 2), 0, -1.0)


def test_sample_validation():
    with pytest.raises(DomainError):
        SampleResponse(0, 1, np.array([0.5, 1.2]), np.zeros(2))
    with pytest.raises(DomainError):
        SampleResponse(0, 1, np.ones(3), np.zeros(3))


def test_setup_validation():
    sig = raw_envelope(-1, [1.0, 1.0, 1.0])
    lo = raw_envelope(0, [1.0, 1.0, 1.0])
    with pytest.raises(DomainError):
        DcsSetup(sig, lo, omega_offset=1e3, delta_rep=10.0)
    lo = raw_envelope(-1, np.full(3, 10.0))
    # tone of line -1 would be negative
    with pytest.raises(DomainError):
        DcsSetup(sig, lo, omega_offset=5.0, delta_rep=10.0, strong_lo=False)
    bright_sig = raw_envelope(-1, [2.0, 2.0, 2.0])
    with pytest.warns(UserWarning):
        DcsSetup(bright_sig, lo, omega_offset=1e3, delta_rep=10.0, strong_lo=True)


def test_vacuum_strong_lo_floor_is_kappa_independent():
    setup = flattop_setup(4, 1e-3, 7.0)
    ref = sql_psd(setup).value
    assert ref == pytest.approx(setup.qe ** 2 * setup.lo.total_flux, rel=1e-15)
    for depth in (0.0, 3.0, 30.0, float("inf")):
        sample = localized_absorber(setup.index_range, 2, depth)
        rep = photocurrent_psd(setup, VAC, sample, lo_spec=None)
        assert rep.value == pytest.approx(ref, rel=1e-12)
        assert rep.normalized == pytest.approx(1.0, rel=1e-12)


def test_all_configurations_reduce_to_sql_at_unit_gain():
    setup = flattop_setup(5, 0.3, 30.0)
    trans = transparent_sample(setup.index_range)
    sql_full = setup.qe ** 2 * (setup.signal.total_flux + setup.lo.total_flux)
    configs = [
        (QuantumSpec(frame="self"), QuantumSpec()),
        (QuantumSpec(frame="cross"), QuantumSpec()),
        (amp_spec("epr", "cross", 1.0), QuantumSpec()),
        (amp_spec("intra", "self", 1.0), amp_spec("intra", "self", 1.0)),
    ]
    for spec, lo_spec in configs:
        v = photocurrent_psd(setup, spec, trans, lo_spec=lo_spec).value
        assert v == pytest.approx(sql_full, rel=1e-12)


def test_self_referred_penalty():
    setup = flattop_setup(3, 0.2, 20.0)
    trans = transparent_sample(setup.index_range)
    sql_full = setup.qe ** 2 * (setup.signal.total_flux + setup.lo.total_flux)
    for g in (1.5, 7.0, 31.62):
        spec = amp_spec("intra", "self", g)
        v = photocurrent_psd(setup, spec, trans, lo_spec=spec).value
        assert v == pytest.approx(0.5 * (g + 1 / g) * sql_full, rel=1e-12)
        assert v > sql_full  # squeezing hurts in the self-referred frame


def test_cross_referred_uniform_gain():
    setup = flattop_setup(3, 0.2, 20.0)
    trans = transparent_sample(setup.index_range)
    sql_full = setup.qe ** 2 * (setup.signal.total_flux + setup.lo.total_flux)
    g = 11.0
    spec = amp_spec("intra", "cross", g)
    v = photocurrent_psd(setup, spec, trans, lo_spec=spec).value
    assert v == pytest.approx(sql_full / g, rel=1e-12)


def test_cross_referred_monotone_in_gains():
    rng = np.random.default_rng(5)
    setup = flattop_setup(2, 0.3, 8.0)
    sample = SampleResponse(-2, 2, rng.uniform(0.1, 1.0, 5), np.zeros(5))
    gains = {n: 3.0 for n in range(-2, 3)}
    base = photocurrent_psd(setup, amp_spec("intra", "cross", dict(gains)), sample,
                            lo_spec=amp_spec("intra", "cross", dict(gains))).value
    for n in range(-2, 3):
        for comb in ("signal", "lo"):
            bumped = dict(gains)
            bumped[n] = 9.0
            if comb == "signal":
                v = photocurrent_psd(setup, amp_spec("intra", "cross", bumped), sample,
                                     lo_spec=amp_spec("intra", "cross", dict(gains))).value
            else:
                v = photocurrent_psd(setup, amp_spec("intra", "cross", dict(gains)),
                                     sample,
                                     lo_spec=amp_spec("intra", "cross", bumped)).value
            assert v <= base + 1e-15


def test_epr_pair_psd_matches_published_form():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n_pairs = int(rng.integers(1, 4))
        a_s, a_l = float(rng.uniform(0.05, 1.0)), float(rng.uniform(1.0, 30.0))
        setup = flattop_setup(n_pairs, a_s, a_l)
        n = 2 * n_pairs + 1
        sample = SampleResponse(-n_pairs, n_pairs, rng.uniform(0, 1, n),
                                rng.uniform(-2, 2, n))
        g_s, g_l = float(rng.uniform(1, 40)), float(rng.uniform(1, 40))
        spec = amp_spec("epr", "cross", g_s)
        lo_spec = amp_spec("epr", "cross", g_l)
        got = photocurrent_psd(setup, spec, sample, lo_spec=lo_spec).value

        k0, t0 = sample.kappa(0), sample.theta(0)
        expected = (2 * k0 * a_s ** 2 / (2 * g_l)
                    + 2 * a_l ** 2 * (k0 * (math.cos(t0) ** 2 / (2 * g_s)
                                            + g_s / 2 * math.sin(t0) ** 2)
                                      + (1 - k0) / 2))
        for m in range(1, n_pairs + 1):
            kp, km = sample.kappa(m), sample.kappa(-m)
            tp, tm = sample.theta(m), sample.theta(-m)
            expected += 0.5 * (
                a_s ** 2 * ((kp + km) * (g_l + 1 / g_l)
                            - 2 * math.sqrt(kp * km) * (g_l - 1 / g_l))
                + a_l ** 2 * ((kp + km) * (g_s + 1 / g_s)
                              - 2 * math.sqrt(kp * km) * (g_s - 1 / g_s)
                              * math.cos(tp + tm)
                              + 4 - 2 * (kp + km)))
        assert got == pytest.approx(expected, rel=1e-12)


def test_epr_swap_symmetry():
    rng = np.random.default_rng(3)
    setup = flattop_setup(3, 0.2, 10.0)
    k, th = rng.uniform(0, 1, 7), rng.uniform(-1, 1, 7)
    spec = amp_spec("epr", "cross", {0: 2.0, 1: 5.0, 2: 11.0, 3: 3.0})
    v1 = photocurrent_psd(setup, spec, SampleResponse(-3, 3, k, th), lo_spec=None).value
    v2 = photocurrent_psd(setup, spec,
                          SampleResponse(-3, 3, k[::-1].copy(), th[::-1].copy()),
                          lo_spec=None).value
    assert v1 == pytest.approx(v2, rel=1e-12)


def test_epr_fragile_intra_robust():
    setup = flattop_setup(3, 1e-3, 10.0)
    sample = localized_absorber(setup.index_range, 1, 13.0)  # asymmetric loss
    gains = [1.0, 2.0, 5.0, 15.0, 60.0, 300.0]
    epr_vals = [photocurrent_psd(setup, amp_spec("epr", "cross", g), sample,
                                 lo_spec=None).value for g in gains]
    intra_vals = [photocurrent_psd(setup, amp_spec("intra", "cross", g), sample,
                                   lo_spec=None).value for g in gains]
    assert all(b <= a + 1e-15 for a, b in zip(intra_vals, intra_vals[1:]))
    assert epr_vals[-1] > epr_vals[1]  # anti-squeezing eventually dominates
    assert epr_vals[-1] > intra_vals[-1]


def test_epr_requires_cross_frame_and_symmetry():
    setup = flattop_setup(2, 0.1, 5.0)
    trans = transparent_sample(setup.index_range)
    with pytest.raises(DomainError):
        photocurrent_psd(setup, QuantumSpec(mode="epr", frame="self",
                                            orientation="amplitude", gains=2.0),
                         trans, lo_spec=None)
    sig = raw_envelope(-2, [0.1, 0.1, 0.1, 0.1, 0.2])
    lo = raw_envelope(-2, np.full(5, 5.0))
    asym = DcsSetup(sig, lo, omega_offset=2 * math.pi * 300.0,
                    delta_rep=2 * math.pi * 100.0, strong_lo=False)
    with pytest.raises(DomainError):
        photocurrent_psd(asym, amp_spec("epr", "cross", 2.0),
                         transparent_sample(asym.index_range), lo_spec=None)


def test_sample_range_contract():
    setup = flattop_setup(2, 0.1, 5.0)
    with pytest.raises(ContractError):
        photocurrent_psd(setup, VAC, transparent_sample((-1, 1)), lo_spec=None)


def test_snr_examples():
    setup = flattop_setup(5, 0.3, 30.0)
    trans = transparent_sample(setup.index_range)
    psd = photocurrent_psd(setup, VAC, trans, lo_spec=None)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        snr1 = transmittance_snr(setup, trans, psd, 1, 1.0)
        snr2 = transmittance_snr(setup, trans, psd, 1, 2.0)
    assert snr2 / snr1 == pytest.approx(2.0, rel=1e-14)
    expected = 0.3 ** 2 * 30.0 ** 2 * 1.0 / (2.0 * setup.lo.total_flux)
    assert snr1 == pytest.approx(expected, rel=1e-12)
    # Var(kappa estimate) relation: SNR * Var = kappa^2
    var = transmittance_variance(setup, trans, psd, 1, 1.0)
    assert snr1 * var == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(DomainError):
        transmittance_snr(setup, trans, psd, 1, 0.0)
    with pytest.warns(UserWarning):
        transmittance_snr(setup, trans, psd, 1, 1e-3)


def test_advantage_endpoints():
    g = 31.62
    a_s = math.sqrt(1e-4)
    for strategy in ("intra-cross", "epr"):
        rows = advantage_curve(5, [0.0], g, a_s, 1.0, strategy)
        assert rows[0]["advantage_db"] == pytest.approx(15.0, abs=0.05)
    intra = advantage_curve(5, [float("inf")], g, a_s, 1.0, "intra-cross")
    assert intra[0]["advantage_db"] == pytest.approx(9.2, abs=0.1)
    epr = advantage_curve(5, [float("inf")], g, a_s, 1.0, "epr")
    assert epr[0]["advantage_db"] == pytest.approx(-1.9, abs=0.1)
    with pytest.raises(DomainError):
        advantage_curve(5, [0.0], g, a_s, 1.0, "both")
    with pytest.raises(DomainError):
        advantage_curve(5, [0.0], 0.5, a_s, 1.0, "epr")


def test_advantage_row_schema():
    rows = advantage_curve(2, [0.0, 10.0], 10.0, 0.01, 1.0, "intra-cross")
    assert [r["depth_db"] for r in rows] == [0.0, 10.0]
    assert all(r["ratio"] == 4 for r in rows)
    assert all(r["g_db"] == pytest.approx(10.0) for r in rows)


def test_oracle_equivalence_randomized():
    from combnoise.validate import check_dcs_oracle
    result = check_dcs_oracle(200, seed=77)
    assert result.passed, result.detail


def test_oracle_agrees_on_self_frame_with_phases():
    rng = np.random.default_rng(9)
    setup = flattop_setup(3, 0.4, 9.0)
    sample = SampleResponse(-3, 3, rng.uniform(0, 1, 7), rng.uniform(-3, 3, 7))
    spec = amp_spec("intra", "self", {n: float(rng.uniform(1, 20))
                                      for n in range(-3, 4)})
    lo_spec = amp_spec("intra", "self", {n: float(rng.uniform(1, 20))
                                         for n in range(-3, 4)})
    closed = photocurrent_psd(setup, spec, sample, lo_spec=lo_spec).value
    brute = dcs_oracle_psd(setup, spec, sample, lo_spec)
    assert closed == pytest.approx(brute, rel=1e-12)


def test_setup_json_roundtrip():
    setup = flattop_setup(2, 0.2, 5.0, qe=1.602176634e-19)
    back = setup_from_json(setup_to_json(setup))
    assert back.index_range == setup.index_range
    assert back.qe == setup.qe
    assert back.delta_rep == setup.delta_rep
    np.testing.assert_array_equal(back.lo.amps, setup.lo.amps)
    doc = json.loads(setup_to_json(setup))
    assert set(doc) == {"signal", "lo", "omega_offset", "delta_rep", "strong_lo", "qe"}
