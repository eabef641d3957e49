"""Comb spectral envelopes: construction, flux normalization, modal bandwidth.

An envelope is a set of real, non-negative line amplitudes ``a_n`` (units
sqrt(photons/s)) on an integer index grid, together with the optical carrier
``omega0`` and the repetition rate ``omega_rep`` that place line ``n`` at
``omega0 + n*omega_rep``.  Three archetypal shapes are supported:

* ``gaussian``: a_n ~ exp(-n^2 / (4 sigma^2))
* ``sech``:     a_n ~ sech(n / delta)
* ``flattop``:  a_n = const for |n| <= N, zero otherwise (N integer)
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, NumericError

__all__ = [
    "CombEnvelope",
    "PhasedEnvelope",
    "make_envelope",
    "raw_envelope",
    "rms_modal_bandwidth",
    "solve_shape_param",
    "envelope_to_json",
    "envelope_from_json",
    "TAIL_FLUX_TOL",
    "SHAPES",
]

# Maximum fraction of total flux that may be lost to tail truncation.
TAIL_FLUX_TOL = 1e-12

SHAPES = ("gaussian", "sech", "flattop")

# Default grid: 1550 nm carrier, 100 MHz repetition rate.
_C_LIGHT = 299792458.0
DEFAULT_OMEGA0 = 2.0 * math.pi * _C_LIGHT / 1550e-9
DEFAULT_OMEGA_REP = 2.0 * math.pi * 100e6


@dataclass(frozen=True)
class CombEnvelope:
    """Real, in-phase comb amplitudes on a contiguous index range.

    ``amps[i]`` is the amplitude of line ``n_min + i``.  Amplitudes are
    non-negative; complex line phases live in :class:`PhasedEnvelope`.
    """

    n_min: int
    n_max: int
    amps: np.ndarray
    omega0: float = DEFAULT_OMEGA0
    omega_rep: float = DEFAULT_OMEGA_REP
    shape: str | None = None
    param: float | None = None

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=float)
        object.__setattr__(self, "amps", amps)
        if self.n_max < self.n_min:
            raise DomainError("n_max must be >= n_min")
        if amps.ndim != 1 or amps.size != self.n_max - self.n_min + 1:
            raise DomainError("amps length must match the index range")
        if not np.all(np.isfinite(amps)):
            raise DomainError("amplitudes must be finite")
        if np.any(amps < 0):
            raise DomainError("amplitudes must be non-negative (phases live in PhasedEnvelope)")
        if not self.total_flux > 0:
            raise DomainError("total flux must be positive")
        if self.omega_rep <= 0 or self.omega0 <= 0:
            raise DomainError("omega0 and omega_rep must be positive")

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    @property
    def n_lines(self) -> int:
        return self.n_max - self.n_min + 1

    @property
    def total_flux(self) -> float:
        """Total photon flux N_tot = sum_n a_n^2 (photons/s)."""
        return float(np.sum(self.amps * self.amps))

    def amp(self, n: int) -> float:
        """Amplitude of line ``n``; zero outside the stored range."""
        if self.n_min <= n <= self.n_max:
            return float(self.amps[n - self.n_min])
        return 0.0

    def support(self) -> tuple[int, int]:
        """Index hull ``(lo, hi)`` of the nonzero amplitudes."""
        nz = np.nonzero(self.amps)[0]
        if nz.size == 0:
            raise DomainError("envelope has no populated lines")
        return int(nz[0]) + self.n_min, int(nz[-1]) + self.n_min

    def is_symmetric(self) -> bool:
        """True when the index range is centered and amps[n] == amps[-n] exactly."""
        return self.n_min == -self.n_max and bool(np.array_equal(self.amps, self.amps[::-1]))

    def scaled_to_flux(self, total_flux: float) -> "CombEnvelope":
        if total_flux <= 0:
            raise DomainError("total flux must be positive")
        factor = math.sqrt(total_flux / self.total_flux)
        return replace(self, amps=self.amps * factor)


@dataclass(frozen=True)
class PhasedEnvelope:
    """A :class:`CombEnvelope` with one phase (rad) per line.

    ``thetas`` must cover every index of ``base``; ``thetas = 0`` everywhere
    reduces every downstream estimator to the in-phase formulas.
    """

    base: CombEnvelope
    thetas: np.ndarray

    def __post_init__(self):
        thetas = np.asarray(self.thetas, dtype=float)
        object.__setattr__(self, "thetas", thetas)
        if thetas.shape != self.base.amps.shape:
            raise DomainError("thetas must be defined for every index of base")
        if not np.all(np.isfinite(thetas)):
            raise DomainError("thetas must be finite")

    def theta(self, n: int) -> float:
        if self.base.n_min <= n <= self.base.n_max:
            return float(self.thetas[n - self.base.n_min])
        return 0.0


def raw_envelope(n_min, amps, omega0=DEFAULT_OMEGA0, omega_rep=DEFAULT_OMEGA_REP) -> CombEnvelope:
    """Construct an envelope from raw amplitudes starting at index ``n_min``."""
    amps = np.asarray(amps, dtype=float)
    return CombEnvelope(n_min=int(n_min), n_max=int(n_min) + amps.size - 1, amps=amps)


def _shape_profile(shape: str, param: float, n_cut: int) -> np.ndarray:
    """Unnormalized amplitudes on ``n = -n_cut .. n_cut`` (even in n by design)."""
    n = np.arange(-n_cut, n_cut + 1, dtype=float)
    if shape == "gaussian":
        a = np.exp(-(n * n) / (4.0 * param * param))
    elif shape == "sech":
        # overflow-free sech: 2 e^{-|x|} / (1 + e^{-2|x|})
        e = np.exp(-np.abs(n) / param)
        a = 2.0 * e / (1.0 + e * e)
    else:
        raise DomainError(f"unknown continuous shape {shape!r}")
    # mirror to make amps[n] == amps[-n] bit-exact
    half = a[n_cut:]
    return np.concatenate([half[:0:-1], half])


def _minimal_cut(shape: str, param: float) -> int:
    """Smallest n_cut whose truncated tail flux is below TAIL_FLUX_TOL.

    The reference total is computed on a grid wide enough that its own tail
    is negligible at machine precision (exp(-72) for the Gaussian, exp(-40)
    for the sech).
    """
    if shape == "gaussian":
        n_ref = max(16, int(math.ceil(12.0 * param)) + 8)
    else:
        n_ref = max(16, int(math.ceil(20.0 * param)) + 8)
    a = _shape_profile(shape, param, n_ref)
    flux = a * a
    total = float(np.sum(flux))
    center = n_ref
    # cumulative flux of the symmetric window |n| <= k
    window = np.concatenate([[flux[center]],
                             flux[center] + 2.0 * np.cumsum(flux[center + 1:])])
    tail = total - window
    ok = np.nonzero(tail < TAIL_FLUX_TOL * total)[0]
    if ok.size == 0:
        raise NumericError("could not bound the envelope tail")
    return int(ok[0])


def make_envelope(shape, param, total_flux, n_cut=None,
                  omega0=DEFAULT_OMEGA0, omega_rep=DEFAULT_OMEGA_REP) -> CombEnvelope:
    """Build a normalized envelope of the given shape.

    Args:
        shape: one of ``gaussian``, ``sech``, ``flattop``.
        param: sigma (gaussian), delta (sech), or integer N (flattop).
        total_flux: target total photon flux (photons/s); exact after
            renormalization.
        n_cut: half-width of the index grid.  ``None`` selects the smallest
            cut whose discarded tail flux is below ``TAIL_FLUX_TOL`` of the
            total; an explicit cut below that is a domain error (no silent
            truncation).

    Returns:
        CombEnvelope with ``sum(amps**2) == total_flux`` to relative 1e-12
        and ``amps[n] == amps[-n]`` exactly.
    """
    if shape not in SHAPES:
        raise DomainError(f"unknown shape {shape!r}; expected one of {SHAPES}")
    if not (total_flux > 0):
        raise DomainError("total_flux must be positive")

    if shape == "flattop":
        if isinstance(param, float) and not param.is_integer():
            raise DomainError("flat-top param must be an integer line count N")
        n_lines = int(param)
        if n_lines < 0:
            raise DomainError("flat-top N must be >= 0")
        if n_cut is not None and n_cut < n_lines:
            raise DomainError("n_cut smaller than the flat-top half-width N")
        amps = np.full(2 * n_lines + 1, math.sqrt(total_flux / (2 * n_lines + 1)))
        return CombEnvelope(-n_lines, n_lines, amps, omega0, omega_rep,
                            shape=shape, param=float(n_lines))

    if not (param > 0):
        raise DomainError("shape parameter must be positive")
    cut_min = _minimal_cut(shape, float(param))
    if n_cut is None:
        n_cut = cut_min
    elif n_cut < cut_min:
        raise DomainError(
            f"n_cut={n_cut} would truncate more than {TAIL_FLUX_TOL:g} of the flux "
            f"(need >= {cut_min})")
    a = _shape_profile(shape, float(param), int(n_cut))
    a = a * math.sqrt(total_flux / float(np.sum(a * a)))
    return CombEnvelope(-int(n_cut), int(n_cut), a, omega0, omega_rep,
                        shape=shape, param=float(param))


def rms_modal_bandwidth(env: CombEnvelope) -> float:
    """Flux-weighted RMS line index sqrt(sum n^2 a_n^2 / sum a_n^2)."""
    flux = env.amps * env.amps
    total = float(np.sum(flux))
    if not total > 0:
        raise DomainError("envelope has zero total flux")
    n = env.indices.astype(float)
    return math.sqrt(float(np.sum(n * n * flux)) / total)


def _flattop_m_rms(n_lines: int) -> float:
    return math.sqrt(n_lines * (n_lines + 1) / 3.0)


def solve_shape_param(shape, m_rms_target, param_tol=1e-9):
    """Invert ``rms_modal_bandwidth`` for the shape parameter.

    Continuous shapes are inverted by bisection on the (monotone) map
    param -> M_rms to ``param_tol`` absolute.  The flat-top family is
    discrete: the returned integer N is the one whose M_rms is nearest the
    target (document the achieved value via ``rms_modal_bandwidth``).
    """
    if shape not in SHAPES:
        raise DomainError(f"unknown shape {shape!r}")
    if not (m_rms_target > 0):
        raise DomainError("m_rms target must be positive")

    if shape == "flattop":
        # N(N+1)/3 = target^2, then pick the nearer integer neighbor
        n_star = 0.5 * (-1.0 + math.sqrt(1.0 + 12.0 * m_rms_target ** 2))
        lo = max(0, math.floor(n_star))
        cands = (lo, lo + 1)
        return min(cands, key=lambda k: abs(_flattop_m_rms(k) - m_rms_target))

    def m_of(p):
        return rms_modal_bandwidth(make_envelope(shape, p, 1.0))

    lo = 1e-6
    if m_of(lo) >= m_rms_target:
        return lo
    hi = max(1.0, 2.0 * m_rms_target)
    for _ in range(80):
        if m_of(hi) >= m_rms_target:
            break
        hi *= 2.0
    else:
        raise NumericError("no bracketing interval found for the shape parameter")
    while hi - lo > param_tol:
        mid = 0.5 * (lo + hi)
        if m_of(mid) < m_rms_target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def envelope_to_json(env: CombEnvelope) -> str:
    """Serialize to the documented JSON schema."""
    doc = {
        "shape": env.shape,
        "param": env.param,
        "n_min": env.n_min,
        "n_max": env.n_max,
        "omega0": env.omega0,
        "omega_rep": env.omega_rep,
        "amps": [float(a) for a in env.amps],
    }
    return json.dumps(doc, indent=2)


def envelope_from_json(text: str) -> CombEnvelope:
    doc = json.loads(text)
    return CombEnvelope(
        n_min=int(doc["n_min"]),
        n_max=int(doc["n_max"]),
        amps=np.asarray(doc["amps"], dtype=float),
        omega0=float(doc["omega0"]),
        omega_rep=float(doc["omega_rep"]),
        shape=doc.get("shape"),
        param=doc.get("param"),
    )
