"""Binomial hypothesis test on the reconciliation disagreement count.

Under either hypothesis the per-bit disagreement between the enrolled and
the freshly decoded payload is modeled as Bernoulli with rate p0 (legitimate
re-authentication) or p1 (impersonation), making the Hamming statistic
binomial over the K payload bits.  Acceptance is eta <= eta_th with the
boundary included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def hamming_distance(r1: np.ndarray, r2: np.ndarray) -> int:
    a = np.asarray(r1)
    b = np.asarray(r2)
    if a.shape != b.shape:
        raise ValueError("bit vectors differ in length")
    return int(np.count_nonzero(a != b))


@dataclass(frozen=True)
class BinomialModel:
    """Disagreement-count model: eta ~ Binomial(k_len, p)."""

    k_len: int
    p: float

    def __post_init__(self):
        if self.k_len < 1:
            raise ValueError("k_len must be >= 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")


def binomial_pmf(model: BinomialModel, k: int) -> float:
    """P(eta = k), evaluated in log space so large k_len stays finite."""
    n, p = model.k_len, model.p
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}]")
    if p == 0.0:
        return 1.0 if k == 0 else 0.0
    if p == 1.0:
        return 1.0 if k == n else 0.0
    log_comb = math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
    return math.exp(log_comb + k * math.log(p) + (n - k) * math.log1p(-p))


def pmf_vector(model: BinomialModel) -> np.ndarray:
    return np.array([binomial_pmf(model, k) for k in range(model.k_len + 1)])


def total_variation(etas: np.ndarray, model: BinomialModel) -> float:
    """TV distance between an empirical eta sample and the binomial model.

    0.5 * sum_k |empirical_pmf(k) - model_pmf(k)| over k = 0..k_len; this is
    how closely the measured disagreement histogram tracks the closed form.
    """
    etas = np.asarray(etas, dtype=int)
    if etas.size == 0:
        raise ValueError("need at least one observation")
    if etas.min() < 0 or etas.max() > model.k_len:
        raise ValueError(f"eta values must lie in [0, {model.k_len}]")
    empirical = np.bincount(etas, minlength=model.k_len + 1) / etas.size
    return 0.5 * float(np.abs(empirical - pmf_vector(model)).sum())


def _tail_sum(model: BinomialModel, eta_th: int) -> float:
    # Compensated sum of P(eta > eta_th); small terms first would not matter
    # much, fsum is exact regardless of order.
    if not 0 <= eta_th <= model.k_len:
        raise ValueError(f"eta_th must lie in [0, {model.k_len}]")
    return math.fsum(
        binomial_pmf(model, k) for k in range(eta_th + 1, model.k_len + 1)
    )


def closed_form_pfa(k_len: int, p0: float, eta_th: int) -> float:
    """False-alarm probability: tail of Binomial(k_len, p0) above eta_th."""
    return _tail_sum(BinomialModel(k_len, p0), eta_th)


def closed_form_pd(k_len: int, p1: float, eta_th: int) -> float:
    """Detection probability: tail of Binomial(k_len, p1) above eta_th."""
    return _tail_sum(BinomialModel(k_len, p1), eta_th)


def calibrate_threshold(k_len: int, p0: float, target_pfa: float) -> int:
    """Smallest eta_th whose false-alarm probability meets the target.

    The tail is non-increasing in eta_th and reaches 0 at eta_th = k_len,
    so a solution always exists; binary search keeps large k_len cheap.
    """
    if target_pfa <= 0:
        raise ValueError("target_pfa must be positive")
    model = BinomialModel(k_len, p0)
    lo, hi = 0, k_len
    if _tail_sum(model, lo) <= target_pfa:
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _tail_sum(model, mid) <= target_pfa:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class Decision:
    statistic_eta: int
    threshold_eta_th: int
    accepted: bool


def decide(eta: int, eta_th: int) -> Decision:
    """Accept the legitimate-user hypothesis iff eta <= eta_th."""
    return Decision(statistic_eta=eta, threshold_eta_th=eta_th, accepted=eta <= eta_th)
