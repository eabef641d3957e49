"""Self-validation suites: oracle equivalence, reductions, MC agreement.

These are the machine-checkable consistency guarantees of the library: every
closed-form PSD must agree with the covariance quadratic form on randomized
inputs, the published reductions must hold exactly, and Monte-Carlo sample
statistics must match the analytic traces within statistical error.  The
``validate`` CLI command runs everything and reports machine-readable
pass/fail results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dcs, ofd, oracle, stochastic
from .envelope import make_envelope, raw_envelope, rms_modal_bandwidth, solve_shape_param
from .states import QuantumSpec

__all__ = ["CheckResult", "run_validation", "ORACLE_RTOL"]

ORACLE_RTOL = 1e-10


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _rand_gains(rng, indices) -> dict[int, float]:
    return {int(n): float(rng.uniform(1.0, 30.0)) for n in indices}


def _rand_envelope(rng, symmetric: bool):
    """Random small envelope; shaped or raw, optionally mirror-symmetric."""
    if rng.random() < 0.4:
        shape = rng.choice(["gaussian", "sech", "flattop"])
        param = int(rng.integers(1, 6)) if shape == "flattop" \
            else float(rng.uniform(0.6, 4.0))
        return make_envelope(shape, param, float(rng.uniform(0.5, 10.0)))
    half = int(rng.integers(1, 9))
    right = rng.uniform(0.05, 2.0, half + 1)
    if symmetric:
        amps = np.concatenate([right[:0:-1], right])
        return raw_envelope(-half, amps)
    left = rng.uniform(0.05, 2.0, half)
    return raw_envelope(-half, np.concatenate([left, right]))


def _rand_ofd_spec(rng, orientation: str, symmetric: bool) -> QuantumSpec:
    mode = rng.choice(["vacuum", "intra", "epr"] if symmetric else ["vacuum", "intra"])
    gains = None
    if mode == "intra":
        gains = _rand_gains(rng, range(-20, 21))
    elif mode == "epr":
        gains = _rand_gains(rng, range(0, 41))
    classical = None
    if rng.random() < 0.3:
        classical = {int(n): (float(rng.uniform(0, 2)), float(rng.uniform(0, 2)))
                     for n in range(-10, 11)}
    return QuantumSpec(mode=mode, orientation=orientation, gains=gains,
                       classical_add=classical)


def check_ofd_oracle(n_instances: int, seed: int) -> CheckResult:
    """Closed-form OFD PSDs vs the dense covariance quadratic form."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        estimator = rng.choice(["phase", "amplitude"])
        orientation = "phase" if estimator == "phase" else "amplitude"
        symmetric = bool(rng.random() < 0.5)
        env = _rand_envelope(rng, symmetric)
        spec = _rand_ofd_spec(rng, orientation, env.is_symmetric())
        policy = rng.choice([ofd.POLICY_SUPPORT, ofd.POLICY_EXTENDED])
        if estimator == "phase":
            closed = ofd.phase_noise_psd(env, spec, policy).value
        else:
            closed = ofd.amplitude_noise_psd(env, spec, policy).value
        brute = oracle.ofd_oracle_psd(env, spec, policy, estimator)
        worst = max(worst, abs(closed - brute) / max(brute, 1e-300))
    passed = worst < ORACLE_RTOL
    return CheckResult("ofd-oracle-equivalence", passed,
                       f"{n_instances} instances, worst relative deviation {worst:.3e}")


def _rand_dcs_instance(rng):
    epr = bool(rng.random() < 0.4)
    n_pairs = int(rng.integers(1, 6))
    if epr:
        sig = _rand_envelope(rng, True)
        while not sig.is_symmetric():
            sig = _rand_envelope(rng, True)
        half = sig.n_max
        right = rng.uniform(0.5, 20.0, half + 1)
        lo = raw_envelope(-half, np.concatenate([right[:0:-1], right]))
    else:
        n_lines = 2 * n_pairs + 1
        sig = raw_envelope(-n_pairs, rng.uniform(0.01, 1.0, n_lines))
        lo = raw_envelope(-n_pairs, rng.uniform(0.5, 20.0, n_lines))
    setup = dcs.DcsSetup(sig, lo, omega_offset=2.0 * math.pi * 5e4,
                         delta_rep=2.0 * math.pi * 100.0, strong_lo=False)
    n_min, n_max = setup.index_range
    n_lines = n_max - n_min + 1
    sample = dcs.SampleResponse(n_min, n_max, rng.uniform(0.0, 1.0, n_lines),
                                rng.uniform(-math.pi, math.pi, n_lines))
    frame = "cross" if epr else rng.choice(["self", "cross"])
    mode = "epr" if epr else rng.choice(["vacuum", "intra"])
    gains = _rand_gains(rng, range(0, n_max + 1) if epr else range(n_min, n_max + 1))
    classical = None
    if rng.random() < 0.25:
        classical = {int(n): (float(rng.uniform(0, 1)), float(rng.uniform(0, 1)))
                     for n in range(n_min, n_max + 1)}
    spec = QuantumSpec(mode=mode, frame=frame, orientation="amplitude",
                       gains=None if mode == "vacuum" else gains,
                       classical_add=classical)
    lo_choice = rng.choice(["none", "vacuum", "intra", "epr" if epr else "intra"])
    if lo_choice == "none":
        lo_spec = None
    elif lo_choice == "vacuum":
        lo_spec = QuantumSpec(frame=frame)
    else:
        lo_spec = QuantumSpec(mode=lo_choice, frame=frame, orientation="amplitude",
                              gains=_rand_gains(rng, range(0, n_max + 1)
                                                if lo_choice == "epr"
                                                else range(n_min, n_max + 1)))
    return setup, spec, sample, lo_spec


def check_dcs_oracle(n_instances: int, seed: int) -> CheckResult:
    """Closed-form DCS PSDs vs the joint covariance quadratic form."""
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for _ in range(n_instances):
        setup, spec, sample, lo_spec = _rand_dcs_instance(rng)
        closed = dcs.photocurrent_psd(setup, spec, sample, lo_spec=lo_spec).value
        brute = oracle.dcs_oracle_psd(setup, spec, sample, lo_spec)
        worst = max(worst, abs(closed - brute) / max(brute, 1e-300))
    passed = worst < ORACLE_RTOL
    return CheckResult("dcs-oracle-equivalence", passed,
                       f"{n_instances} instances, worst relative deviation {worst:.3e}")


def check_ofd_reductions(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 2)
    failures = []

    env = ofd.cw_pair(3.0)
    cw = ofd.phase_noise_psd(env).value
    if abs(cw * 3.0 - 1.0) > 1e-12:
        failures.append(f"CW benchmark {cw!r}")
    if abs(ofd.suppression_ratio(env) - 1.0) > 1e-12:
        failures.append("CW suppression ratio != 1")

    genv = make_envelope("gaussian", 5.0, 2.0)
    for g in (2.0, 10.0, 31.62):
        sq = QuantumSpec(mode="intra", orientation="phase", gains=g)
        ent = QuantumSpec(mode="epr", orientation="phase", gains=g)
        if abs(ofd.eta_enhancement(genv, sq) * g - 1.0) > 1e-12:
            failures.append(f"eta_sq(G={g})")
        if abs(ofd.eta_enhancement(genv, ent) * g - 1.0) > 1e-12:
            failures.append(f"eta_ent(G={g})")

    for _ in range(100):
        env = _rand_envelope(rng, False)
        for n0 in (1e3, 1e5):
            if abs(ofd.classical_transfer(env, n0) * n0 - 1.0) > 1e-12:
                failures.append("classical transfer")
                break

    ft = make_envelope("flattop", 1, 3.0)
    if abs(ofd.suppression_ratio(ft) - 0.375) > 1e-12:
        failures.append("flat-top N=1 suppression")

    return CheckResult("ofd-reductions", not failures,
                       "all identities hold" if not failures else "; ".join(failures))


def check_dcs_reductions(seed: int) -> CheckResult:
    failures = []
    setup = dcs.flattop_setup(5, 0.3, 30.0)
    trans = dcs.transparent_sample(setup.index_range)
    sql_full = setup.qe ** 2 * (setup.signal.total_flux + setup.lo.total_flux)

    vac = QuantumSpec()
    for spec in (QuantumSpec(frame="self"), QuantumSpec(frame="cross"),
                 QuantumSpec(mode="epr", frame="cross", orientation="amplitude",
                             gains=1.0)):
        v = dcs.photocurrent_psd(setup, spec, trans, lo_spec=vac).value
        if abs(v - sql_full) > 1e-12 * sql_full:
            failures.append(f"G=1 reduction ({spec.mode}/{spec.frame})")

    g = 7.5
    self_sq = QuantumSpec(mode="intra", frame="self", orientation="amplitude", gains=g)
    v = dcs.photocurrent_psd(setup, self_sq, trans, lo_spec=self_sq).value
    if abs(v - 0.5 * (g + 1.0 / g) * sql_full) > 1e-12 * sql_full:
        failures.append("self-referred penalty")

    cross_sq = QuantumSpec(mode="intra", frame="cross", orientation="amplitude", gains=g)
    v = dcs.photocurrent_psd(setup, cross_sq, trans, lo_spec=cross_sq).value
    if abs(v - sql_full / g) > 1e-12 * sql_full:
        failures.append("cross-referred 1/G reduction")

    # vacuum strong-LO floor is kappa independent
    ref = dcs.sql_psd(setup).value
    for depth in (0.0, 7.0, float("inf")):
        sample = dcs.localized_absorber(setup.index_range, 1, depth)
        v = dcs.photocurrent_psd(setup, vac, sample, lo_spec=None).value
        if abs(v - ref) > 1e-12 * ref:
            failures.append("kappa-independent vacuum floor")

    # EPR PSD invariant under swapping the pair members of the sample
    rng = np.random.default_rng(seed + 3)
    sw_setup = dcs.flattop_setup(3, 0.2, 10.0)
    k = rng.uniform(0, 1, 7)
    th = rng.uniform(-1, 1, 7)
    spec = QuantumSpec(mode="epr", frame="cross", orientation="amplitude",
                       gains={0: 2.0, 1: 5.0, 2: 11.0, 3: 3.0})
    s1 = dcs.SampleResponse(-3, 3, k, th)
    s2 = dcs.SampleResponse(-3, 3, k[::-1].copy(), th[::-1].copy())
    v1 = dcs.photocurrent_psd(sw_setup, spec, s1, lo_spec=None).value
    v2 = dcs.photocurrent_psd(sw_setup, spec, s2, lo_spec=None).value
    if abs(v1 - v2) > 1e-12 * v1:
        failures.append("EPR pair-swap symmetry")

    return CheckResult("dcs-reductions", not failures,
                       "all identities hold" if not failures else "; ".join(failures))


def mc_variance_agreement(setup, spec, sample, cfg, lo_spec=None):
    """(mc, analytic, standard error) of the time-averaged sample variance."""
    series = stochastic.sample_photocurrent(setup, spec, sample, cfg, lo_spec=lo_spec)
    trace = stochastic.variance_trace(setup, spec, sample, cfg.times(), lo_spec=lo_spec)
    per_sample = trace.variance * cfg.sample_rate_hz
    mc = float(np.mean(series * series))
    analytic = float(np.mean(per_sample))
    se = math.sqrt(2.0 * float(np.sum(per_sample ** 2))) / series.size
    return mc, analytic, se


def check_mc_agreement(seed: int, n_configs: int = 20,
                       duration_s: float = 0.05) -> CheckResult:
    """Randomized MC sample variances within 5 standard errors of analytic."""
    rng = np.random.default_rng(seed + 4)
    worst = 0.0
    for i in range(n_configs):
        setup, spec, sample, lo_spec = _rand_dcs_instance(rng)
        cfg = stochastic.TraceConfig(sample_rate_hz=2e5, duration_s=duration_s,
                                     seed=seed + 100 + i, rbw_hz=100.0)
        mc, analytic, se = mc_variance_agreement(setup, spec, sample, cfg, lo_spec)
        if se > 0:
            worst = max(worst, abs(mc - analytic) / se)
    return CheckResult("mc-analytic-agreement", worst < 5.0,
                       f"{n_configs} configs, worst deviation {worst:.2f} standard errors")


def check_determinism(seed: int) -> CheckResult:
    pre = stochastic.si_cyclo_preset(duration_s=0.01, seed=seed)
    spec = pre.specs[10.0]
    cfg = stochastic.TraceConfig(sample_rate_hz=1e6, duration_s=0.01,
                                 seed=seed, rbw_hz=100.0)
    a = stochastic.sample_photocurrent(pre.setup, spec, pre.sample, cfg, lo_spec=None)
    b = stochastic.sample_photocurrent(pre.setup, spec, pre.sample, cfg, lo_spec=None)
    same = bool(np.array_equal(a, b))
    return CheckResult("mc-determinism", same,
                       "identical series for identical (config, seed)" if same
                       else "series differ between identical runs")


def check_envelope_basics(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 5)
    failures = []
    for shape in ("gaussian", "sech"):
        for _ in range(10):
            param = float(rng.uniform(0.5, 30.0))
            flux = float(rng.uniform(0.1, 1e6))
            env = make_envelope(shape, param, flux)
            if abs(env.total_flux - flux) > 1e-12 * flux:
                failures.append(f"{shape} flux normalization")
            if not env.is_symmetric():
                failures.append(f"{shape} symmetry")
            m = rms_modal_bandwidth(env)
            back = solve_shape_param(shape, m)
            env2 = make_envelope(shape, back, flux)
            if abs(rms_modal_bandwidth(env2) - m) > 1e-6 * m:
                failures.append(f"{shape} roundtrip")
    return CheckResult("envelope-basics", not failures,
                       "flux, symmetry and roundtrip hold" if not failures
                       else "; ".join(sorted(set(failures))))


def run_validation(n_instances: int = 1000, seed: int = 20260811,
                   mc: bool = True) -> dict:
    """Run every suite; returns a machine-readable report dictionary."""
    n_ofd = max(1, n_instances // 2)
    n_dcs = max(1, n_instances - n_ofd)
    checks = [
        check_envelope_basics(seed),
        check_ofd_reductions(seed),
        check_dcs_reductions(seed),
        check_ofd_oracle(n_ofd, seed),
        check_dcs_oracle(n_dcs, seed),
    ]
    if mc:
        checks.append(check_mc_agreement(seed))
        checks.append(check_determinism(seed))
    return {
        "schema_version": 1,
        "seed": seed,
        "n_instances": n_instances,
        "all_passed": bool(all(c.passed for c in checks)),
        "checks": [{"name": c.name, "passed": bool(c.passed), "detail": c.detail}
                   for c in checks],
    }
