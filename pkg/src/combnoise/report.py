"""Noise-report container carrying PSD values with normalization metadata."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class NoiseReport:
    """A white (frequency-flat) power spectral density with its conventions.

    Attributes:
        value: two-sided symmetrized PSD value.
        units: physical units of ``value`` (e.g. ``rad^2/Hz``, ``qe^2*flux/Hz``).
        qe: the elementary-charge value baked into ``value`` (1.0 means the
            photocurrent is expressed in units of q_e).
        sided: spectral-density convention; always two-sided symmetrized here.
        band_hz: positive-frequency support ``(f_lo, f_hi)`` of the white PSD;
            the density vanishes outside ``|f| <= f_hi``.
        normalized: ``value`` divided by the reference (vacuum / G=1) level of
            the same configuration, when such a reference is meaningful.
        meta: free-form diagnostic metadata.
    """

    value: float
    units: str
    qe: float = 1.0
    sided: str = "two-sided-symmetrized"
    band_hz: tuple[float, float] | None = None
    normalized: float | None = None
    meta: dict = field(default_factory=dict)
