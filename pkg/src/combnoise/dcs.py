"""Dual-comb spectroscopy: balanced photocurrent noise and transmittance SNR.

A signal comb (repetition rate Omega_r) passes through the sample and beats
against a local-oscillator comb (rate Omega_r + dOmega_r) on a balanced
detector; line pair ``n`` produces an RF tone at ``Omega_n = Omega_0 +
n*dOmega_r``.  The photocurrent noise folds an independent vacuum
contribution from every comb line into each RF frequency.

Frames: in the ``self`` frame the detected quadrature rotates at the beat
frequency relative to each comb's own squeezing axis, so squeezing
time-averages into a ``(G + 1/G)/2`` penalty; in the ``cross`` frame the
squeezing axis tracks the detected quadrature and genuinely beats the
vacuum floor.  EPR pairing suppresses the symmetric pair quadrature but is
fragile to absorption asymmetry between the paired lines.

Conventions: quadratures referenced per line; the local oscillator never
passes through the sample, so its detected quadrature (which includes the
sample phase of the beat tone) is taken as the axis of any LO squeezing.
PSDs carry qe^2 * (photon flux) units; normalized values divide by the G=1
baseline of the same configuration.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .envelope import CombEnvelope, raw_envelope
from .errors import ContractError, DomainError
from .report import NoiseReport
from .states import QuantumSpec, line_variances, pair_variances

__all__ = [
    "DcsSetup",
    "SampleResponse",
    "transparent_sample",
    "localized_absorber",
    "photocurrent_psd",
    "sql_psd",
    "transmittance_snr",
    "transmittance_variance",
    "advantage_curve",
    "flattop_setup",
    "setup_to_json",
    "setup_from_json",
    "STRATEGIES",
]

STRATEGIES = ("intra-cross", "epr")


@dataclass(frozen=True)
class SampleResponse:
    """Comb-line-resolved sample map: transmittance kappa_n and phase theta_n."""

    n_min: int
    n_max: int
    kappas: np.ndarray
    thetas: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kappas, dtype=float)
        t = np.asarray(self.thetas, dtype=float)
        object.__setattr__(self, "kappas", k)
        object.__setattr__(self, "thetas", t)
        n = self.n_max - self.n_min + 1
        if k.shape != (n,) or t.shape != (n,):
            raise DomainError("kappas/thetas length must match the index range")
        if np.any(k < 0) or np.any(k > 1):
            raise DomainError("transmittances must lie in [0, 1]")
        if not np.all(np.isfinite(t)):
            raise DomainError("phase delays must be finite")

    def kappa(self, n: int) -> float:
        return float(self.kappas[n - self.n_min])

    def theta(self, n: int) -> float:
        return float(self.thetas[n - self.n_min])


def transparent_sample(index_range) -> SampleResponse:
    n_min, n_max = int(index_range[0]), int(index_range[1])
    n = n_max - n_min + 1
    return SampleResponse(n_min, n_max, np.ones(n), np.zeros(n))


def localized_absorber(index_range, m: int, depth_db: float) -> SampleResponse:
    """Single lossy line: kappa_m = 10^(-depth_db/10), all else transparent."""
    if depth_db < 0:
        raise DomainError("absorption depth must be >= 0 dB")
    sample = transparent_sample(index_range)
    if not sample.n_min <= m <= sample.n_max:
        raise DomainError(f"absorber line {m} outside index range")
    k = sample.kappas.copy()
    k[m - sample.n_min] = 10.0 ** (-depth_db / 10.0)
    return replace(sample, kappas=k)


@dataclass(frozen=True)
class DcsSetup:
    """Signal comb, LO comb and RF tone grid of a dual-comb measurement.

    ``strong_lo`` documents the regime |alpha_L| >> |alpha_S| assumed by the
    linearized formulas; when set, a warning is emitted if the signal flux is
    not small against the LO flux.  The closed forms always retain the
    alpha_S-weighted LO-fluctuation terms; pass ``lo_spec=None`` to the PSD
    functions for the ideal strong-LO limit without them.
    """

    signal: CombEnvelope
    lo: CombEnvelope
    omega_offset: float
    delta_rep: float
    strong_lo: bool = True
    qe: float = 1.0

    def __post_init__(self):
        if (self.signal.n_min, self.signal.n_max) != (self.lo.n_min, self.lo.n_max):
            raise DomainError("signal and LO combs must share the index range")
        if self.delta_rep <= 0:
            raise DomainError("delta_rep must be positive")
        if self.qe <= 0:
            raise DomainError("qe must be positive")
        lo_s, hi_s = self.signal.support()
        lo_l, hi_l = self.lo.support()
        for n in (min(lo_s, lo_l), max(hi_s, hi_l)):
            tone = self.omega_offset + n * self.delta_rep
            if tone <= 0:
                raise DomainError(f"RF tone of line {n} is not positive")
            if tone >= self.signal.omega_rep / 2.0:
                raise DomainError(f"RF tone of line {n} aliases beyond Omega_r/2")
        if self.strong_lo and self.signal.total_flux > 0.01 * self.lo.total_flux:
            warnings.warn("strong-LO setup with signal flux above 1% of the LO flux",
                          stacklevel=2)

    def tone(self, n: int) -> float:
        """RF beat frequency Omega_n = Omega_0 + n*dOmega_r (rad/s)."""
        return self.omega_offset + n * self.delta_rep

    @property
    def index_range(self) -> tuple[int, int]:
        return self.signal.n_min, self.signal.n_max


def _check_sample(setup: DcsSetup, sample: SampleResponse) -> None:
    if (sample.n_min, sample.n_max) != setup.index_range:
        raise ContractError("sample response range does not match the setup")


def _epr_requested(spec: QuantumSpec, lo_spec: QuantumSpec | None) -> bool:
    return spec.mode == "epr" or (lo_spec is not None and lo_spec.mode == "epr")


def _line_psd_terms(setup, spec, sample, lo_spec, n) -> float:
    """Per-line photocurrent PSD contribution (vacuum/intra modes)."""
    a_s, a_l = setup.signal.amp(n), setup.lo.amp(n)
    kap, th = sample.kappa(n), sample.theta(n)
    vq_s, vp_s = line_variances(spec, n)
    c, s = math.cos(th), math.sin(th)
    if spec.frame == "self":
        # cyclostationary: time-average samples both quadratures evenly,
        # so the sample phase drops out
        sig = kap * (vq_s + vp_s) + (1.0 - kap)
        lo_term = 0.0
        if lo_spec is not None:
            vq_l, vp_l = line_variances(lo_spec, n)
            lo_term = kap * a_s * a_s * (vq_l + vp_l)
        return lo_term + a_l * a_l * sig
    # cross frame: detector reads the (rotated) amplitude quadrature only
    sig = kap * (c * c * vq_s + s * s * vp_s) + (1.0 - kap) * 0.5
    lo_term = 0.0
    if lo_spec is not None:
        vq_l, _ = line_variances(lo_spec, n)
        lo_term = kap * a_s * a_s * vq_l
    return 2.0 * (lo_term + a_l * a_l * sig)


def _pair_psd_terms(setup, spec, sample, lo_spec, n) -> float:
    """Photocurrent PSD contribution of the (+n, -n) pair (cross frame)."""
    a_s, a_l = setup.signal.amp(n), setup.lo.amp(n)
    kp, km = sample.kappa(+n), sample.kappa(-n)
    tp, tm = sample.theta(+n), sample.theta(-n)
    rkp, rkm = math.sqrt(kp), math.sqrt(km)

    total = 0.0
    if lo_spec is not None:
        pv_l = pair_variances(lo_spec, n)
        ap = rkp + rkm
        am = rkp - rkm
        total += a_s * a_s * (ap * ap * pv_l.vq_plus + am * am * pv_l.vq_minus
                              + 2.0 * ap * am * pv_l.cq)
    pv_s = pair_variances(spec, n)
    bcp = rkp * math.cos(tp) + rkm * math.cos(tm)
    bcm = rkp * math.cos(tp) - rkm * math.cos(tm)
    bsp = rkp * math.sin(tp) + rkm * math.sin(tm)
    bsm = rkp * math.sin(tp) - rkm * math.sin(tm)
    total += a_l * a_l * (bcp * bcp * pv_s.vq_plus + bcm * bcm * pv_s.vq_minus
                          + 2.0 * bcp * bcm * pv_s.cq
                          + bsp * bsp * pv_s.vp_plus + bsm * bsm * pv_s.vp_minus
                          + 2.0 * bsp * bsm * pv_s.cp
                          + (1.0 - kp) + (1.0 - km))
    return total


def _psd_value(setup: DcsSetup, spec: QuantumSpec, sample: SampleResponse,
               lo_spec: QuantumSpec | None) -> float:
    qe2 = setup.qe * setup.qe
    n_min, n_max = setup.index_range

    if _epr_requested(spec, lo_spec):
        if spec.frame != "cross":
            raise DomainError("EPR pairing is defined in the cross-referred frame")
        if n_min != -n_max:
            raise DomainError("EPR pairing requires a symmetric index range")
        for env in (setup.signal, setup.lo):
            if not env.is_symmetric():
                raise DomainError("EPR pairing requires symmetric envelopes")
        lo_center = None if lo_spec is None else _center_view(lo_spec)
        total = _line_psd_terms(setup, _center_view(spec), sample, lo_center, 0)
        for n in range(1, n_max + 1):
            total += _pair_psd_terms(setup, spec, sample, lo_spec, n)
        return qe2 * total

    total = 0.0
    for n in range(n_min, n_max + 1):
        total += _line_psd_terms(setup, spec, sample, lo_spec, n)
    return qe2 * total


def _center_view(spec: QuantumSpec) -> QuantumSpec:
    """EPR spec as seen by the center line (single line, pair-0 gain)."""
    if spec.mode != "epr":
        return spec
    return replace(spec, mode="intra", gains={0: spec.gain(0)})


def _baseline_spec(spec: QuantumSpec) -> QuantumSpec:
    """Same configuration with all gains set to 1 and classical noise removed."""
    return QuantumSpec(mode="vacuum", frame=spec.frame, orientation=spec.orientation)


def photocurrent_psd(setup: DcsSetup, spec: QuantumSpec, sample: SampleResponse,
                     lo_spec: QuantumSpec | None = QuantumSpec(frame="cross")) -> NoiseReport:
    """Balanced photocurrent PSD (white, two-sided) of the configuration.

    ``spec`` describes the signal comb and selects the frame; ``lo_spec``
    describes the LO comb (its gains are exposed as parameters).  Pass
    ``lo_spec=None`` to drop the LO-fluctuation terms entirely (ideal
    strong-LO limit, reproducing the kappa-independent vacuum floor
    ``qe^2 * sum(alpha_L^2)``).  The self-referred result is the
    time-averaged PSD of the cyclostationary photocurrent.
    """
    _check_sample(setup, sample)
    value = _psd_value(setup, spec, sample, lo_spec)
    base = _psd_value(setup, _baseline_spec(spec), sample,
                      None if lo_spec is None else _baseline_spec(lo_spec))
    band = (0.0, setup.signal.omega_rep / (4.0 * math.pi))
    return NoiseReport(value=value, units="qe^2*flux/Hz", qe=setup.qe, band_hz=band,
                       normalized=value / base,
                       meta={"frame": spec.frame, "mode": spec.mode,
                             "baseline": "G=1 same configuration", "sql_raw": base})


def sql_psd(setup: DcsSetup) -> NoiseReport:
    """Vacuum shot-noise floor in the ideal strong-LO limit: qe^2 sum(alpha_L^2)."""
    value = setup.qe ** 2 * setup.lo.total_flux
    band = (0.0, setup.signal.omega_rep / (4.0 * math.pi))
    return NoiseReport(value=value, units="qe^2*flux/Hz", qe=setup.qe,
                       band_hz=band, normalized=1.0, meta={"frame": "any", "mode": "vacuum"})


def _psd_raw(psd) -> float:
    return psd.value if isinstance(psd, NoiseReport) else float(psd)


def transmittance_snr(setup: DcsSetup, sample: SampleResponse, psd, m: int,
                      integration_time: float) -> float:
    """Power SNR of the transmittance estimate at line ``m``.

    SNR = kappa_m qe^2 a_S,m^2 a_L,m^2 T / (2 S_II[Omega_m]); linear in the
    integration time because the photocurrent noise is white.
    """
    if not integration_time > 0:
        raise DomainError("integration time must be positive")
    _check_sample(setup, sample)
    if integration_time * setup.delta_rep < 20.0 * math.pi:
        warnings.warn("integration time below ~10 RF-comb periods; "
                      "tone orthogonality is marginal", stacklevel=2)
    if setup.tone(m) * integration_time < 100.0:
        warnings.warn("Omega_m * T is not large; demodulation variance formula "
                      "is approximate", stacklevel=2)
    a_s, a_l = setup.signal.amp(m), setup.lo.amp(m)
    return (sample.kappa(m) * setup.qe ** 2 * a_s ** 2 * a_l ** 2 * integration_time
            / (2.0 * _psd_raw(psd)))


def transmittance_variance(setup: DcsSetup, sample: SampleResponse, psd, m: int,
                           integration_time: float) -> float:
    """Var(kappa_m estimate) = kappa_m / (qe^2 a_S^2 a_L^2) * 2 S_II / T."""
    if not integration_time > 0:
        raise DomainError("integration time must be positive")
    _check_sample(setup, sample)
    a_s, a_l = setup.signal.amp(m), setup.lo.amp(m)
    if a_s == 0.0 or a_l == 0.0:
        raise DomainError(f"line {m} carries no beat tone")
    return (sample.kappa(m) / (setup.qe ** 2 * a_s ** 2 * a_l ** 2)
            * 2.0 * _psd_raw(psd) / integration_time)


def flattop_setup(n_pairs: int, alpha_s: float, alpha_l: float,
                  qe: float = 1.0) -> DcsSetup:
    """Flat-top dual-comb setup with 2*n_pairs+1 lines and a valid tone grid."""
    if n_pairs < 1:
        raise DomainError("need at least one line pair")
    n_lines = 2 * n_pairs + 1
    sig = raw_envelope(-n_pairs, np.full(n_lines, alpha_s))
    lo = raw_envelope(-n_pairs, np.full(n_lines, alpha_l))
    delta = 2.0 * math.pi * 100.0
    offset = (n_pairs + 1) * delta
    return DcsSetup(signal=sig, lo=lo, omega_offset=offset, delta_rep=delta,
                    strong_lo=False, qe=qe)


def advantage_curve(n_pairs: int, depth_db_grid, gain: float, alpha_s: float,
                    alpha_l: float, strategy: str):
    """SNR advantage versus single-line absorption depth (localized absorber).

    Flat-top combs with ``2*n_pairs`` intact lines and one absorbed line at
    ``+1`` (transparent partner at ``-1``); uniform gain on both combs.  The
    advantage is the ratio of the G=1 photocurrent PSD to the enhanced one,
    which equals the SNR improvement at fixed integration time.

    Returns a list of dict rows with keys depth_db, strategy, ratio, g_db,
    advantage, advantage_db.
    """
    if strategy not in STRATEGIES:
        raise DomainError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if gain < 1.0:
        raise DomainError("gain must be >= 1")
    setup = flattop_setup(n_pairs, alpha_s, alpha_l)
    mode = "intra" if strategy == "intra-cross" else "epr"
    spec = QuantumSpec(mode=mode, frame="cross", orientation="amplitude", gains=gain)
    lo_spec = QuantumSpec(mode=mode, frame="cross", orientation="amplitude", gains=gain)
    rows = []
    for depth in depth_db_grid:
        sample = localized_absorber(setup.index_range, +1, float(depth))
        rep = photocurrent_psd(setup, spec, sample, lo_spec=lo_spec)
        advantage = 1.0 / rep.normalized
        rows.append({
            "depth_db": float(depth),
            "strategy": strategy,
            "ratio": 2 * n_pairs,
            "g_db": 10.0 * math.log10(gain),
            "advantage": advantage,
            "advantage_db": 10.0 * math.log10(advantage),
        })
    return rows


def setup_to_json(setup: DcsSetup) -> str:
    """JSON description of a DcsSetup (envelopes inline)."""
    import json

    from .envelope import envelope_to_json

    doc = {
        "signal": json.loads(envelope_to_json(setup.signal)),
        "lo": json.loads(envelope_to_json(setup.lo)),
        "omega_offset": setup.omega_offset,
        "delta_rep": setup.delta_rep,
        "strong_lo": setup.strong_lo,
        "qe": setup.qe,
    }
    return json.dumps(doc, indent=2)


def setup_from_json(text: str) -> DcsSetup:
    import json

    from .envelope import envelope_from_json

    doc = json.loads(text)
    return DcsSetup(
        signal=envelope_from_json(json.dumps(doc["signal"])),
        lo=envelope_from_json(json.dumps(doc["lo"])),
        omega_offset=float(doc["omega_offset"]),
        delta_rep=float(doc["delta_rep"]),
        strong_lo=bool(doc.get("strong_lo", True)),
        qe=float(doc.get("qe", 1.0)),
    )
