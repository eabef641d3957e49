"""Brute-force covariance oracle paths for the closed-form PSDs.

Every closed-form noise expression in :mod:`combnoise.ofd` and
:mod:`combnoise.dcs` is a quadratic form ``w^T Sigma w`` of a documented
weight vector with a quadrature covariance matrix.  This module assembles
those dense matrices and vectors so the closed forms can be validated
against :func:`combnoise.states.quadratic_form_variance` on randomized
inputs.  The oracle never folds pairs or specializes formulas: it applies
the sample map to the covariance and evaluates the raw photocurrent weights.
"""

from __future__ import annotations

import math

import numpy as np

from .dcs import DcsSetup, SampleResponse
from .envelope import PhasedEnvelope
from .ofd import general_phase_estimator_weights
from .states import CovarianceModel, QuantumSpec, build_covariance, quadratic_form_variance

__all__ = [
    "ofd_oracle_psd",
    "dcs_oracle_psd",
    "apply_sample_to_covariance",
]

_SQRT2 = math.sqrt(2.0)


def _as_phased(env) -> PhasedEnvelope:
    if isinstance(env, PhasedEnvelope):
        return env
    return PhasedEnvelope(env, np.zeros(env.n_lines))


def ofd_oracle_psd(env, spec: QuantumSpec, policy: str = "support-only",
                   estimator: str = "phase") -> float:
    """OFD estimator PSD via the dense covariance quadratic form."""
    w = general_phase_estimator_weights(_as_phased(env), policy)
    cov = build_covariance((w.n_lo, w.n_hi), spec)
    vec = np.zeros(cov.dim)
    wq, wp = (w.phase_q, w.phase_p) if estimator == "phase" else (w.amp_q, w.amp_p)
    for i, n in enumerate(range(w.n_lo, w.n_hi + 1)):
        vec[cov.q_index(n)] = wq[i]
        vec[cov.p_index(n)] = wp[i]
    return quadratic_form_variance(cov, vec)


def apply_sample_to_covariance(cov: CovarianceModel, sample: SampleResponse) -> CovarianceModel:
    """Sample-transformed covariance: each line maps as
    ``x_n -> sqrt(kappa_n) R(theta_n) x_n + sqrt(1-kappa_n) x_vac``.
    """
    if (sample.n_min, sample.n_max) != (cov.n_min, cov.n_max):
        raise ValueError("sample range does not match covariance range")
    n_lines = cov.n_max - cov.n_min + 1
    a = np.zeros((2 * n_lines, 2 * n_lines))
    vac = np.zeros(2 * n_lines)
    for i, n in enumerate(range(cov.n_min, cov.n_max + 1)):
        k = sample.kappa(n)
        th = sample.theta(n)
        c, s = math.cos(th), math.sin(th)
        r = math.sqrt(k) * np.array([[c, -s], [s, c]])
        a[2 * i:2 * i + 2, 2 * i:2 * i + 2] = r
        vac[2 * i:2 * i + 2] = 1.0 - k
    m = a @ cov.matrix @ a.T + 0.5 * np.diag(vac)
    return CovarianceModel(cov.n_min, cov.n_max, m)


def dcs_oracle_psd(setup: DcsSetup, spec: QuantumSpec, sample: SampleResponse,
                   lo_spec: QuantumSpec | None) -> float:
    """Balanced photocurrent PSD via the joint covariance quadratic form.

    The joint basis is the sample-transformed signal block followed by the
    LO block.  Cross-referred weights: ``sqrt(2) qe alpha_L,n`` on the
    transformed signal amplitude quadrature and ``sqrt(2) qe sqrt(kappa_n)
    alpha_S,n`` on the LO's detected quadrature.  The self-referred value is
    the time average over the beat-note rotation, i.e. the mean of the
    cosine- and sine-phase weight quadratic forms.
    """
    n_min, n_max = setup.index_range
    cov_s = apply_sample_to_covariance(build_covariance((n_min, n_max), spec), sample)
    blocks = [cov_s.matrix]
    if lo_spec is not None:
        blocks.append(build_covariance((n_min, n_max), lo_spec).matrix)
    dim_s = cov_s.matrix.shape[0]
    dim = sum(b.shape[0] for b in blocks)
    sigma = np.zeros((dim, dim))
    sigma[:dim_s, :dim_s] = blocks[0]
    if lo_spec is not None:
        sigma[dim_s:, dim_s:] = blocks[1]
    joint = CovarianceModel(0, dim // 2 - 1, sigma)  # index labels are positional here

    qe = setup.qe

    def weight_vector(phase_kind: str) -> np.ndarray:
        vec = np.zeros(dim)
        for i, n in enumerate(range(n_min, n_max + 1)):
            a_l = setup.lo.amp(n)
            a_s = setup.signal.amp(n)
            rk = math.sqrt(sample.kappa(n))
            th = sample.theta(n)
            if phase_kind == "cos":
                vec[2 * i] = _SQRT2 * qe * a_l            # q'_S,n
                if lo_spec is not None:
                    vec[dim_s + 2 * i] = _SQRT2 * qe * rk * a_s * math.cos(th)
                    vec[dim_s + 2 * i + 1] = _SQRT2 * qe * rk * a_s * math.sin(th)
            else:
                vec[2 * i + 1] = -_SQRT2 * qe * a_l       # -p'_S,n
                if lo_spec is not None:
                    vec[dim_s + 2 * i] = -_SQRT2 * qe * rk * a_s * math.sin(th)
                    vec[dim_s + 2 * i + 1] = _SQRT2 * qe * rk * a_s * math.cos(th)
        return vec

    if spec.frame == "cross":
        vec = np.zeros(dim)
        for i, n in enumerate(range(n_min, n_max + 1)):
            vec[2 * i] = _SQRT2 * qe * setup.lo.amp(n)
            if lo_spec is not None:
                vec[dim_s + 2 * i] = _SQRT2 * qe * math.sqrt(sample.kappa(n)) * setup.signal.amp(n)
        return quadratic_form_variance(joint, vec)

    w_cos = weight_vector("cos")
    w_sin = weight_vector("sin")
    return 0.5 * (quadratic_form_variance(joint, w_cos)
                  + quadratic_form_variance(joint, w_sin))
