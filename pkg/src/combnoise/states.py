"""Per-line Gaussian quantum states and the brute-force covariance oracle.

Quadrature conventions (symmetrized-PSD units, vacuum variance = 1/2):

* each comb line ``n`` carries an amplitude quadrature ``q_n`` and a phase
  quadrature ``p_n`` defined relative to the line's own coherent carrier;
* intra-line squeezing with power gain ``G >= 1`` lowers the squeezed
  quadrature to ``1/(2G)`` and raises the conjugate one to ``G/2``;
* EPR pairing of lines ``(+n, -n)`` is two-mode squeezing: the combinations
  ``Q_n^+ = (q_n + q_-n)/sqrt(2)`` and ``P_n^- = (p_n - p_-n)/sqrt(2)`` have
  variance ``1/(2G)`` while ``Q_n^-`` and ``P_n^+`` have ``G/2``.

Covariances are frequency independent (white within ``|Omega| <= Omega_r/2``);
a frequency-resolved extension is out of scope.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError

__all__ = [
    "QuantumSpec",
    "CovarianceModel",
    "build_covariance",
    "quadratic_form_variance",
    "add_classical_noise",
    "line_variances",
    "pair_variances",
    "PairVariances",
    "covariance_to_csv",
    "MODES",
    "FRAMES",
    "ORIENTATIONS",
    "ORIENT_OFD_PHASE",
    "ORIENT_DCS_AMPLITUDE",
    "VACUUM",
]

MODES = ("vacuum", "intra", "epr")
FRAMES = ("self", "cross")
ORIENTATIONS = ("phase", "amplitude")

# Named orientation presets for the two use cases: optical frequency division
# squeezes the phase quadrature, dual-comb detection the (cross-referred)
# amplitude quadrature.
ORIENT_OFD_PHASE = "phase"
ORIENT_DCS_AMPLITUDE = "amplitude"


def _as_gain_map(gains) -> dict[int, float] | float | None:
    if gains is None:
        return None
    if isinstance(gains, Mapping):
        out = {int(k): float(v) for k, v in gains.items()}
        for g in out.values():
            if g < 1.0:
                raise DomainError("squeezing gains must be >= 1")
        return out
    g = float(gains)
    if g < 1.0:
        raise DomainError("squeezing gains must be >= 1")
    return g


@dataclass(frozen=True)
class QuantumSpec:
    """Gaussian state description of one comb.

    Attributes:
        mode: ``vacuum`` (all lines vacuum), ``intra`` (independent per-line
            squeezing) or ``epr`` (two-mode squeezing of symmetric pairs, one
            gain per pair index n >= 1 plus a line-0 gain at pair index 0).
        frame: quadrature reference for dual-comb detection, ``self`` (each
            comb's own carriers) or ``cross`` (co-rotating with the other
            comb's beat notes).  Ignored by direct-detection estimators.
        orientation: which quadrature is squeezed in ``intra`` mode (and for
            the EPR line-0 gain): ``phase`` or ``amplitude``.
        gains: scalar (uniform) or mapping {line or pair index: G >= 1}.
            Missing entries default to 1 (vacuum).
        classical_add: optional mapping {line index: (S_qq_cl, S_pp_cl)} of
            non-negative white classical PSD additions per quadrature.
    """

    mode: str = "vacuum"
    frame: str = "self"
    orientation: str = ORIENT_OFD_PHASE
    gains: float | Mapping[int, float] | None = None
    classical_add: Mapping[int, tuple[float, float]] | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}")
        if self.frame not in FRAMES:
            raise DomainError(f"frame must be one of {FRAMES}")
        if self.orientation not in ORIENTATIONS:
            raise DomainError(f"orientation must be one of {ORIENTATIONS}")
        object.__setattr__(self, "gains", _as_gain_map(self.gains))
        if self.classical_add is not None:
            cleaned = {}
            for n, (cq, cp) in self.classical_add.items():
                cq, cp = float(cq), float(cp)
                if cq < 0 or cp < 0:
                    raise DomainError("classical PSD additions must be >= 0")
                cleaned[int(n)] = (cq, cp)
            object.__setattr__(self, "classical_add", cleaned)

    def gain(self, index: int) -> float:
        """Gain for a line (intra) or pair (epr) index; 1.0 when unset."""
        if self.gains is None:
            return 1.0
        if isinstance(self.gains, dict):
            return self.gains.get(int(index), 1.0)
        return self.gains

    def classical(self, n: int) -> tuple[float, float]:
        if self.classical_add is None:
            return (0.0, 0.0)
        return self.classical_add.get(int(n), (0.0, 0.0))

    @property
    def has_classical(self) -> bool:
        return bool(self.classical_add) and any(
            c != (0.0, 0.0) for c in self.classical_add.values())


VACUUM = QuantumSpec()


def line_variances(spec: QuantumSpec, n: int) -> tuple[float, float]:
    """(Var q_n, Var p_n) for a single line under ``spec``.

    In ``epr`` mode this is only meaningful for the center line ``n = 0``
    (treated as a single squeezed line with the pair-0 gain); pair statistics
    for n != 0 live in :func:`pair_variances`.
    """
    cq, cp = spec.classical(n)
    if spec.mode == "vacuum":
        return 0.5 + cq, 0.5 + cp
    if spec.mode == "intra" or (spec.mode == "epr" and n == 0):
        g = spec.gain(n) if spec.mode == "intra" else spec.gain(0)
        lo, hi = 1.0 / (2.0 * g), 0.5 * g
        if spec.orientation == "amplitude":
            return lo + cq, hi + cp
        return hi + cq, lo + cp
    raise ContractError("per-line variances of an EPR pair member are correlated; "
                        "use pair_variances")


@dataclass(frozen=True)
class PairVariances:
    """Second moments of the EPR quadratures of a (+n, -n) pair.

    ``vq_plus`` is Var(Q^+), ``cq`` is Cov(Q^+, Q^-), and likewise for P.
    Cross correlations between Q and P quadratures vanish for every state
    built here (classical additions are quadrature-uncorrelated).
    """

    vq_plus: float
    vq_minus: float
    cq: float
    vp_plus: float
    vp_minus: float
    cp: float


def pair_variances(spec: QuantumSpec, n: int) -> PairVariances:
    """EPR-basis second moments of the (+n, -n) pair under ``spec`` (n >= 1)."""
    if n < 1:
        raise ContractError("pair index must be >= 1")
    cq_p, cp_p = spec.classical(+n)
    cq_m, cp_m = spec.classical(-n)
    # independent per-line classical noise splits evenly between the EPR
    # combinations and correlates them by the asymmetric half
    sq, dq = 0.5 * (cq_p + cq_m), 0.5 * (cq_p - cq_m)
    sp, dp = 0.5 * (cp_p + cp_m), 0.5 * (cp_p - cp_m)
    if spec.mode == "epr":
        g = spec.gain(n)
        lo, hi = 1.0 / (2.0 * g), 0.5 * g
        return PairVariances(lo + sq, hi + sq, dq, hi + sp, lo + sp, dp)
    # vacuum / intra: the pair factorizes into independent lines
    vq_p, vp_p = line_variances(spec, +n)
    vq_m, vp_m = line_variances(spec, -n)
    return PairVariances(0.5 * (vq_p + vq_m), 0.5 * (vq_p + vq_m), 0.5 * (vq_p - vq_m),
                         0.5 * (vp_p + vp_m), 0.5 * (vp_p + vp_m), 0.5 * (vp_p - vp_m))


@dataclass(frozen=True)
class CovarianceModel:
    """Full quadrature covariance over lines ``n_min..n_max``.

    Basis order: ``(q_{n_min}, p_{n_min}, ..., q_{n_max}, p_{n_max})``;
    entries are symmetrized-PSD units (vacuum = 1/2 on the diagonal).
    """

    n_min: int
    n_max: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        dim = 2 * (self.n_max - self.n_min + 1)
        if m.shape != (dim, dim):
            raise ContractError("covariance dimension does not match the index range")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def line_index_map(self) -> dict[int, int]:
        return {n: 2 * (n - self.n_min) for n in range(self.n_min, self.n_max + 1)}

    def q_index(self, n: int) -> int:
        if not self.n_min <= n <= self.n_max:
            raise ContractError(f"line {n} outside covariance range")
        return 2 * (n - self.n_min)

    def p_index(self, n: int) -> int:
        return self.q_index(n) + 1

    def validate(self, tol: float = 1e-10) -> None:
        """Check symmetry, positive semi-definiteness and the Heisenberg bound."""
        m = self.matrix
        if not np.allclose(m, m.T, rtol=0, atol=1e-12):
            raise ContractError("covariance matrix is not symmetric")
        if float(np.min(np.linalg.eigvalsh(m))) < -tol:
            raise ContractError("covariance matrix is not positive semi-definite")
        for n in range(self.n_min, self.n_max + 1):
            i = self.q_index(n)
            block = m[i:i + 2, i:i + 2]
            if float(np.linalg.det(block)) < 0.25 - 1e-9:
                raise ContractError(f"line {n} violates the Heisenberg bound")


def build_covariance(index_range: tuple[int, int], spec: QuantumSpec) -> CovarianceModel:
    """Covariance of all line quadratures for one comb under ``spec``."""
    n_min, n_max = int(index_range[0]), int(index_range[1])
    if n_max < n_min:
        raise DomainError("empty index range")
    if spec.mode == "epr" and n_min != -n_max:
        raise DomainError("EPR pairing requires a symmetric index range")

    n_lines = n_max - n_min + 1
    m = np.zeros((2 * n_lines, 2 * n_lines))

    def qi(n):
        return 2 * (n - n_min)

    if spec.mode in ("vacuum", "intra"):
        for n in range(n_min, n_max + 1):
            vq, vp = line_variances(spec, n)
            m[qi(n), qi(n)] = vq
            m[qi(n) + 1, qi(n) + 1] = vp
    else:
        vq0, vp0 = line_variances(spec, 0)
        m[qi(0), qi(0)] = vq0
        m[qi(0) + 1, qi(0) + 1] = vp0
        for n in range(1, n_max + 1):
            pv = pair_variances(spec, n)
            # map EPR-basis moments back to the (q_+, q_-) and (p_+, p_-) blocks
            vq = 0.5 * (pv.vq_plus + pv.vq_minus)
            cq_pm = 0.5 * (pv.vq_plus - pv.vq_minus)
            vp = 0.5 * (pv.vp_plus + pv.vp_minus)
            cp_pm = 0.5 * (pv.vp_plus - pv.vp_minus)
            qp, qm = qi(+n), qi(-n)
            m[qp, qp] = vq + pv.cq
            m[qm, qm] = vq - pv.cq
            m[qp, qm] = m[qm, qp] = cq_pm
            m[qp + 1, qp + 1] = vp + pv.cp
            m[qm + 1, qm + 1] = vp - pv.cp
            m[qp + 1, qm + 1] = m[qm + 1, qp + 1] = cp_pm

    cov = CovarianceModel(n_min, n_max, m)
    cov.validate()
    return cov


def quadratic_form_variance(cov: CovarianceModel, weights) -> float:
    """Variance ``w^T Sigma w`` of the linear combination defined by ``weights``.

    This is the brute-force oracle: any linearized estimator's PSD is the
    quadratic form of its weight vector with the covariance.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (cov.dim,):
        raise ContractError(
            f"weight vector of length {w.size} does not match covariance dim {cov.dim}")
    val = float(np.einsum("i,ij,j->", w, cov.matrix, w))
    if val < 0:
        if val < -1e-12 * max(1.0, float(np.max(np.abs(cov.matrix)))):
            raise ContractError("quadratic form produced a negative variance")
        val = 0.0
    return val


def add_classical_noise(cov: CovarianceModel, s_qq_cl, s_pp_cl) -> CovarianceModel:
    """Return a new model with per-line white classical PSDs added.

    ``s_qq_cl`` / ``s_pp_cl`` may be scalars, mappings {line: value} or
    arrays aligned with the covariance index range.  The quantum part is
    unchanged.
    """
    n_lines = cov.n_max - cov.n_min + 1

    def expand(x):
        if isinstance(x, Mapping):
            arr = np.zeros(n_lines)
            for n, v in x.items():
                if not cov.n_min <= int(n) <= cov.n_max:
                    raise ContractError(f"line {n} outside covariance range")
                arr[int(n) - cov.n_min] = float(v)
            return arr
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 0:
            return np.full(n_lines, float(arr))
        if arr.size != n_lines:
            raise ContractError("classical addition length does not match range")
        return arr

    aq, ap = expand(s_qq_cl), expand(s_pp_cl)
    if np.any(aq < 0) or np.any(ap < 0):
        raise DomainError("classical PSD additions must be >= 0")
    m = cov.matrix.copy()
    idx = np.arange(n_lines)
    m[2 * idx, 2 * idx] += aq
    m[2 * idx + 1, 2 * idx + 1] += ap
    return CovarianceModel(cov.n_min, cov.n_max, m)


def covariance_to_csv(cov: CovarianceModel, path) -> None:
    """Debug dump: one header row of basis labels, then the matrix rows."""
    labels = []
    for n in range(cov.n_min, cov.n_max + 1):
        labels += [f"q_{n}", f"p_{n}"]
    lines = [",".join(labels)]
    for row in cov.matrix:
        lines.append(",".join(f"{v:.15e}" for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
