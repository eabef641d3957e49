"""Time-domain engine: analytic variance traces and Monte-Carlo sampling.

The balanced photocurrent noise is a sum over comb lines of white Gaussian
quadrature processes modulated by the beat tones.  In the self-referred
frame the detected quadrature rotates against the squeezing axis, making the
variance trace oscillate between ``SQL/G`` and ``SQL*G`` at twice each beat
frequency; cross-referred configurations are stationary.

Monte-Carlo realizations draw one Gaussian per sample per quadrature from a
counter-based RNG (numpy Philox) with one stream per comb line, so the
series is bit-reproducible for a given (config, seed) regardless of
scheduling.  Per-sample quadrature variance is ``S * f_s`` for a white
two-sided symmetrized PSD ``S``, which makes the periodogram of the series
estimate ``S`` directly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from . import _kernels
from .dcs import DcsSetup, SampleResponse, _baseline_spec, _center_view, _psd_value
from .envelope import raw_envelope
from .errors import ContractError, DomainError
from .states import QuantumSpec, line_variances, pair_variances

__all__ = [
    "TraceConfig",
    "TraceResult",
    "PsdEstimate",
    "variance_trace",
    "mean_photocurrent",
    "sample_photocurrent",
    "estimate_psd",
    "si_cyclo_preset",
    "CycloPreset",
]

_SQRT2 = math.sqrt(2.0)
_HBAR = 1.054571817e-34
_C_LIGHT = 299792458.0


@dataclass(frozen=True)
class TraceConfig:
    """Sampling parameters for time-domain traces and Monte-Carlo runs."""

    sample_rate_hz: float
    duration_s: float
    seed: int
    rbw_hz: float

    def __post_init__(self):
        if self.sample_rate_hz <= 0 or self.duration_s <= 0 or self.rbw_hz <= 0:
            raise DomainError("sample rate, duration and rbw must be positive")
        if self.duration_s * self.rbw_hz < 1.0:
            raise DomainError("duration * rbw must be >= 1 (one resolution cell)")
        if not (0 <= int(self.seed) < 2 ** 64):
            raise DomainError("seed must fit in 64 bits")

    @property
    def n_samples(self) -> int:
        return int(round(self.sample_rate_hz * self.duration_s))

    def times(self) -> np.ndarray:
        return np.arange(self.n_samples, dtype=float) / self.sample_rate_hz


@dataclass(frozen=True)
class TraceResult:
    """Analytic photocurrent statistics on a time grid.

    ``variance`` is the instantaneous white-noise density Var[I(t)] in the
    same units as the photocurrent PSD (a Monte-Carlo series at rate f_s has
    per-sample variance ``variance * f_s``); ``mean`` is the deterministic
    beat-note interferogram; ``sql`` is the G=1 level of the same
    configuration used for normalization.
    """

    times: np.ndarray
    variance: np.ndarray
    mean: np.ndarray
    sql: float

    @property
    def normalized(self) -> np.ndarray:
        return self.variance / self.sql


def _self_trace_coeffs(setup, spec, sample, lo_spec, n):
    """(a0, ac, as) of the per-line trace a0 + ac cos(2 W t) + as sin(2 W t)."""
    a_s, a_l = setup.signal.amp(n), setup.lo.amp(n)
    kap, th = sample.kappa(n), sample.theta(n)
    vq, vp = line_variances(spec, n)
    c, s = math.cos(th), math.sin(th)
    vq_t = kap * (c * c * vq + s * s * vp) + (1.0 - kap) * 0.5
    vp_t = kap * (s * s * vq + c * c * vp) + (1.0 - kap) * 0.5
    cc_t = kap * c * s * (vq - vp)
    qe2 = setup.qe ** 2
    a0 = qe2 * a_l * a_l * (vq_t + vp_t)
    ac = qe2 * a_l * a_l * (vq_t - vp_t)
    as_ = -2.0 * qe2 * a_l * a_l * cc_t
    if lo_spec is not None:
        vql, vpl = line_variances(lo_spec, n)
        c2, s2 = math.cos(2.0 * th), math.sin(2.0 * th)
        a0 += qe2 * kap * a_s * a_s * (vql + vpl)
        ac += qe2 * kap * a_s * a_s * (vql - vpl) * c2
        as_ += -qe2 * kap * a_s * a_s * (vql - vpl) * s2
    return a0, ac, as_


def variance_trace(setup: DcsSetup, spec: QuantumSpec, sample: SampleResponse,
                   times, lo_spec: QuantumSpec | None = None) -> TraceResult:
    """Analytic Var[I(t)] and mean photocurrent on the given time grid.

    Self-referred configurations are cyclostationary (the per-line variance
    is modulated at twice the beat frequency); cross-referred configurations
    give a time-constant trace.  ``lo_spec=None`` is the ideal strong-LO
    limit without LO-fluctuation terms.
    """
    t = np.asarray(times, dtype=float)
    if t.size == 0:
        raise DomainError("empty time grid")
    if (sample.n_min, sample.n_max) != setup.index_range:
        raise ContractError("sample response range does not match the setup")
    epr_anywhere = spec.mode == "epr" or (lo_spec is not None and lo_spec.mode == "epr")
    if epr_anywhere and spec.frame == "self":
        raise DomainError("EPR pairing is defined in the cross-referred frame")

    var = np.zeros_like(t)
    if spec.frame == "cross":
        var += _psd_value(setup, spec, sample, lo_spec)
    else:
        n_min, n_max = setup.index_range
        for n in range(n_min, n_max + 1):
            a0, ac, as_ = _self_trace_coeffs(setup, spec, sample, lo_spec, n)
            if a0 == 0.0 and ac == 0.0 and as_ == 0.0:
                continue
            _kernels.trace_accum(var, t, 2.0 * setup.tone(n), a0, ac, as_)
    sql = _psd_value(setup, _baseline_spec(spec), sample,
                     None if lo_spec is None else _baseline_spec(lo_spec))
    return TraceResult(times=t, variance=var, mean=mean_photocurrent(setup, sample, t),
                       sql=sql)


def mean_photocurrent(setup: DcsSetup, sample: SampleResponse, times) -> np.ndarray:
    """Deterministic interferogram 2 qe sum_n sqrt(k_n) aS_n aL_n cos(W_n t - th_n)."""
    t = np.asarray(times, dtype=float)
    out = np.zeros_like(t)
    n_min, n_max = setup.index_range
    for n in range(n_min, n_max + 1):
        amp = 2.0 * setup.qe * math.sqrt(sample.kappa(n)) \
            * setup.signal.amp(n) * setup.lo.amp(n)
        if amp == 0.0:
            continue
        out += amp * np.cos(setup.tone(n) * t - sample.theta(n))
    return out


# ---------------------------------------------------------------------------
# Monte-Carlo synthesis


_COMB_SIGNAL = 0
_COMB_LO = 1


def _stream(seed: int, comb: int, offset: int) -> Generator:
    """Counter-based per-line stream; key = (seed, comb<<32 | line offset)."""
    key = np.array([seed, (comb << 32) | offset], dtype=np.uint64)
    return Generator(Philox(key=key))


def _check_aliasing(setup: DcsSetup, cfg: TraceConfig) -> None:
    lo_s, hi_s = setup.signal.support()
    lo_l, hi_l = setup.lo.support()
    f_max = max(abs(setup.tone(n)) for n in (min(lo_s, lo_l), max(hi_s, hi_l))) / (2 * math.pi)
    if cfg.sample_rate_hz <= 2.0 * f_max:
        raise DomainError(f"sample rate {cfg.sample_rate_hz} Hz aliases the "
                          f"{f_max:.3g} Hz beat tone")


def _draw(gen: Generator, var: float, fs: float, n: int) -> np.ndarray:
    return gen.standard_normal(n) * math.sqrt(var * fs)


def _accumulate_line(out, t, setup, sample, n, q, p, gen, fs, frame):
    """Apply the sample map to one signal line's processes and accumulate.

    Draw order per line stream (after the comb-state draws): vacuum q, then
    vacuum p (self frame only), each drawn only when its weight is nonzero.
    """
    kap, th = sample.kappa(n), sample.theta(n)
    a_l = setup.lo.amp(n)
    if a_l == 0.0:
        return
    c, s = math.cos(th), math.sin(th)
    rk, rv = math.sqrt(kap), math.sqrt(1.0 - kap)
    w_l = _SQRT2 * setup.qe * a_l

    qp = (rk * c) * q if s == 0.0 else rk * (c * q - s * p)
    if rv != 0.0:
        qp = qp + rv * _draw(gen, 0.5, fs, out.size)
    if frame == "cross":
        _kernels.const_accum(out, w_l, qp)
        return
    pp = rk * (s * q + c * p)
    if rv != 0.0:
        pp = pp + rv * _draw(gen, 0.5, fs, out.size)
    _kernels.beat_accum(out, t, setup.tone(n), 0.0, w_l, qp, -w_l, pp)


def sample_photocurrent(setup: DcsSetup, spec: QuantumSpec, sample: SampleResponse,
                        cfg: TraceConfig,
                        lo_spec: QuantumSpec | None = None) -> np.ndarray:
    """Monte-Carlo noise series of the balanced photocurrent.

    Returns the zero-mean Gaussian noise series (the deterministic
    interferogram is available from :func:`mean_photocurrent`); its ensemble
    statistics converge to :func:`variance_trace`, with per-sample variance
    ``variance * f_s``.  The same (config, seed) yields a bit-identical
    series.
    """
    if (sample.n_min, sample.n_max) != setup.index_range:
        raise ContractError("sample response range does not match the setup")
    epr_anywhere = spec.mode == "epr" or (lo_spec is not None and lo_spec.mode == "epr")
    if epr_anywhere:
        if spec.frame == "self":
            raise DomainError("EPR pairing is defined in the cross-referred frame")
        if setup.index_range[0] != -setup.index_range[1]:
            raise DomainError("EPR pairing requires a symmetric index range")
    _check_aliasing(setup, cfg)

    fs = cfg.sample_rate_hz
    t = cfg.times()
    out = np.zeros(cfg.n_samples)
    n_min, n_max = setup.index_range
    frame = spec.frame
    seed = int(cfg.seed)

    if spec.mode == "epr":
        # center line, then pairs; pair-correlated draws from the +n stream
        gen0 = _stream(seed, _COMB_SIGNAL, 0 - n_min)
        spec0 = _center_view(spec)
        need_p = _need_p(frame, sample, 0)
        vq, vp = line_variances(spec0, 0)
        q = _draw(gen0, vq, fs, out.size)
        p = _draw(gen0, vp, fs, out.size) if need_p else np.zeros(out.size)
        _accumulate_line(out, t, setup, sample, 0, q, p, gen0, fs, frame)
        for n in range(1, n_max + 1):
            gen_p = _stream(seed, _COMB_SIGNAL, n - n_min)
            gen_m = _stream(seed, _COMB_SIGNAL, -n - n_min)
            pv = pair_variances(spec, n)
            q_pl, q_mi = _pair_draw(gen_p, pv.vq_plus, pv.vq_minus, pv.cq, fs, out.size)
            need_p_pair = _need_p(frame, sample, n) or _need_p(frame, sample, -n)
            if need_p_pair:
                p_pl, p_mi = _pair_draw(gen_p, pv.vp_plus, pv.vp_minus, pv.cp, fs, out.size)
            else:
                p_pl = p_mi = np.zeros(out.size)
            q_p = (q_pl + q_mi) / _SQRT2
            q_m = (q_pl - q_mi) / _SQRT2
            p_p = (p_pl + p_mi) / _SQRT2
            p_m = (p_pl - p_mi) / _SQRT2
            _accumulate_line(out, t, setup, sample, +n, q_p, p_p, gen_p, fs, frame)
            _accumulate_line(out, t, setup, sample, -n, q_m, p_m, gen_m, fs, frame)
    else:
        for n in range(n_min, n_max + 1):
            gen = _stream(seed, _COMB_SIGNAL, n - n_min)
            if setup.lo.amp(n) == 0.0 and (lo_spec is None or setup.signal.amp(n) == 0.0):
                continue
            vq, vp = line_variances(spec, n)
            q = _draw(gen, vq, fs, out.size)
            p = _draw(gen, vp, fs, out.size) if _need_p(frame, sample, n) \
                else np.zeros(out.size)
            _accumulate_line(out, t, setup, sample, n, q, p, gen, fs, frame)

    if lo_spec is not None:
        def lo_accumulate(n, q, p):
            a_s = setup.signal.amp(n)
            kap, th = sample.kappa(n), sample.theta(n)
            if a_s == 0.0 or kap == 0.0:
                return
            w = _SQRT2 * setup.qe * math.sqrt(kap) * a_s
            if frame == "cross":
                _kernels.const_accum(out, w, q)
            else:
                _kernels.beat_accum(out, t, setup.tone(n), th, w, q, w, p)

        if lo_spec.mode == "epr":
            # cross frame only (checked above): phase quadratures decouple
            gen0 = _stream(seed, _COMB_LO, 0 - n_min)
            vq0, _ = line_variances(_center_view(lo_spec), 0)
            lo_accumulate(0, _draw(gen0, vq0, fs, out.size), None)
            for n in range(1, n_max + 1):
                gen = _stream(seed, _COMB_LO, n - n_min)
                pv = pair_variances(lo_spec, n)
                q_pl, q_mi = _pair_draw(gen, pv.vq_plus, pv.vq_minus, pv.cq, fs,
                                        out.size)
                lo_accumulate(+n, (q_pl + q_mi) / _SQRT2, None)
                lo_accumulate(-n, (q_pl - q_mi) / _SQRT2, None)
        else:
            for n in range(n_min, n_max + 1):
                if setup.signal.amp(n) == 0.0 or sample.kappa(n) == 0.0:
                    continue
                gen = _stream(seed, _COMB_LO, n - n_min)
                vq, vp = line_variances(lo_spec, n)
                q = _draw(gen, vq, fs, out.size)
                p = _draw(gen, vp, fs, out.size) if frame == "self" else None
                lo_accumulate(n, q, p)
    return out


def _need_p(frame: str, sample: SampleResponse, n: int) -> bool:
    return frame == "self" or math.sin(sample.theta(n)) != 0.0


def _pair_draw(gen, v_plus, v_minus, cov, fs, size):
    """Correlated (X+, X-) EPR processes via the 2x2 Cholesky factor."""
    l00 = math.sqrt(v_plus)
    l10 = cov / l00
    l11 = math.sqrt(max(v_minus - l10 * l10, 0.0))
    z1 = gen.standard_normal(size)
    z2 = gen.standard_normal(size)
    root = math.sqrt(fs)
    return l00 * root * z1, (l10 * z1 + l11 * z2) * root


# ---------------------------------------------------------------------------
# Spectral estimation


@dataclass(frozen=True)
class PsdEstimate:
    """Segment-averaged periodogram with chi-squared confidence intervals.

    ``psd`` holds two-sided symmetrized densities at the non-negative
    frequency bins, directly comparable to the analytic PSD values.  The
    95% interval assumes 2*n_segments chi-squared degrees of freedom per bin
    (approximate at DC and Nyquist).
    """

    freq_hz: np.ndarray
    psd: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    n_segments: int
    rbw_hz: float


def psd_to_csv(estimate: PsdEstimate, path) -> None:
    """Write a PSD estimate as CSV with columns f_hz, psd, ci_lo, ci_hi."""
    from ._io import write_table

    rows = zip(estimate.freq_hz, estimate.psd, estimate.ci_lo, estimate.ci_hi)
    write_table(path, ("f_hz", "psd", "ci_lo", "ci_hi"),
                [tuple(float(v) for v in row) for row in rows], "csv")


def estimate_psd(series, cfg: TraceConfig) -> PsdEstimate:
    """Averaged boxcar periodogram honoring the configured resolution bandwidth."""
    from scipy.stats import chi2

    x = np.asarray(series, dtype=float)
    fs = cfg.sample_rate_hz
    nperseg = int(round(fs / cfg.rbw_hz))
    if nperseg < 2:
        raise DomainError("resolution bandwidth too wide for the sample rate")
    if x.size < nperseg:
        raise DomainError("series shorter than one periodogram segment")
    nseg = x.size // nperseg
    if nseg < 10:
        warnings.warn("fewer than 10 periodogram segments; intervals are wide",
                      stacklevel=2)
    segs = x[:nseg * nperseg].reshape(nseg, nperseg)
    spec = np.fft.rfft(segs, axis=1)
    psd = np.mean(np.abs(spec) ** 2, axis=0) / (fs * nperseg)
    freq = np.fft.rfftfreq(nperseg, 1.0 / fs)
    dof = 2 * nseg
    lo = psd * dof / chi2.ppf(0.975, dof)
    hi = psd * dof / chi2.ppf(0.025, dof)
    return PsdEstimate(freq_hz=freq, psd=psd, ci_lo=lo, ci_hi=hi,
                       n_segments=nseg, rbw_hz=fs / nperseg)


# ---------------------------------------------------------------------------
# Published cyclostationary simulation preset


@dataclass(frozen=True)
class CycloPreset:
    """Self-referred squeezing demonstration configuration."""

    setup: DcsSetup
    sample: SampleResponse
    specs: dict[float, QuantumSpec]
    cfg: TraceConfig


def si_cyclo_preset(gains=(1.0, 5.0, 10.0), sample_rate_hz=1e6, duration_s=0.02,
                    rbw_hz=100.0, seed=20260811, power_w=0.010,
                    wavelength_m=1550e-9, n_lines=101, sigma_lines=None,
                    offset_hz=10050.0, delta_rep_hz=100.0) -> CycloPreset:
    """Named preset for the cyclostationary variance demonstration.

    A Gaussian comb ``|a_n| ~ exp(-n^2 / (2 sigma^2))`` with ``sigma = N/3``
    over ``n = -N..N`` (101 lines), normalized to the photon flux of 10 mW
    at 1550 nm, self-referred amplitude squeezing with uniform gain, ideal
    strong-LO detection (LO fluctuations omitted; LO envelope mirrors the
    signal).  The RF tone grid ``f_n = 10.05 kHz + n * 100 Hz`` places the
    squeezed and anti-squeezed extrema exactly on the 1 MHz sample grid.
    """
    if n_lines < 1 or n_lines % 2 == 0:
        raise DomainError("preset needs an odd number of comb lines")
    half = (n_lines - 1) // 2
    sigma = (half / 3.0) if sigma_lines is None else float(sigma_lines)
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    n = np.arange(-half, half + 1, dtype=float)
    prof = np.exp(-(n * n) / (2.0 * sigma * sigma))
    omega0 = 2.0 * math.pi * _C_LIGHT / wavelength_m
    flux = power_w / (_HBAR * omega0)
    amps = prof * math.sqrt(flux / float(np.sum(prof * prof)))
    env = raw_envelope(-half, amps)
    setup = DcsSetup(signal=env, lo=env, omega_offset=2.0 * math.pi * offset_hz,
                     delta_rep=2.0 * math.pi * delta_rep_hz, strong_lo=False)
    sample = SampleResponse(-half, half, np.ones(n_lines), np.zeros(n_lines))
    specs = {}
    for g in gains:
        g = float(g)
        specs[g] = (QuantumSpec(mode="vacuum", frame="self", orientation="amplitude")
                    if g == 1.0 else
                    QuantumSpec(mode="intra", frame="self", orientation="amplitude",
                                gains=g))
    cfg = TraceConfig(sample_rate_hz=sample_rate_hz, duration_s=duration_s,
                      seed=seed, rbw_hz=rbw_hz)
    return CycloPreset(setup=setup, sample=sample, specs=specs, cfg=cfg)
