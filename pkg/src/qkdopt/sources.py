"""Photon-number statistics of the WCP, SPDC and ideal pair sources."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "WcpSource",
    "SpdcSource",
    "IdealPairSource",
    "poisson_pmf",
    "poisson_terms",
    "at_least_one_click",
    "spdc_pair_pmf",
    "spdc_terms",
    "spdc_mean_pairs",
    "TAIL_MASS",
    "MAX_TERMS",
]

TAIL_MASS = 1e-14
MAX_TERMS = 10_000


@dataclass(frozen=True)
class WcpSource:
    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mean photon number must be > 0, got {self.mu}")


@dataclass(frozen=True)
class SpdcSource:
    chi: float

    def __post_init__(self):
        if not self.chi >= 0:
            raise ValueError(f"chi must be >= 0, got {self.chi}")


@dataclass(frozen=True)
class IdealPairSource:
    """Exactly one entangled pair per pulse."""


def poisson_pmf(source: WcpSource, n: int) -> float:
    """P_mu(n) = exp(-mu) mu^n / n!, evaluated in log space."""
    if n < 0:
        raise ValueError(f"photon number must be >= 0, got {n}")
    mu = source.mu
    if n == 0:
        return math.exp(-mu)
    return math.exp(n * math.log(mu) - mu - math.lgamma(n + 1))


def poisson_terms(mu: float, min_terms: int = 1) -> np.ndarray:
    """P_mu(0), P_mu(1), ... up to the point where the tail mass is below TAIL_MASS.

    At least ``min_terms`` entries are returned, at most MAX_TERMS.
    """
    if not mu > 0:
        raise ValueError(f"mean photon number must be > 0, got {mu}")
    terms = []
    total = 0.0
    n = 0
    # Recurrence in log space so large mu does not underflow the first term.
    log_p = -mu
    while n < MAX_TERMS:
        p = math.exp(log_p)
        terms.append(p)
        total += p
        n += 1
        if n >= min_terms and total > 1.0 - TAIL_MASS and n > mu:
            break
        log_p += math.log(mu) - math.log(n)
    return np.asarray(terms)


def at_least_one_click(source: WcpSource, eta_total: float) -> float:
    """Probability that a coherent pulse yields at least one detection.

    Exact form 1 - exp(-mu * eta_total); for small arguments this reduces to
    the familiar mu * eta_total.
    """
    if not 0.0 <= eta_total <= 1.0:
        raise ValueError(f"eta_total must be in [0, 1], got {eta_total}")
    return -math.expm1(-source.mu * eta_total)


def spdc_pair_pmf(source: SpdcSource, n: int) -> float:
    """P(n) = tanh(chi)^(2n) / cosh(chi)^2 for the two-mode squeezed state."""
    if n < 0:
        raise ValueError(f"pair number must be >= 0, got {n}")
    chi = source.chi
    vac = 1.0 / math.cosh(chi) ** 2
    if n == 0:
        return vac
    t = math.tanh(chi)
    if t == 0.0:
        return 0.0
    return math.exp(2 * n * math.log(t) + math.log(vac))


def spdc_terms(chi: float, min_terms: int = 1) -> np.ndarray:
    """Truncated pair-number distribution, same tail rule as :func:`poisson_terms`."""
    if not chi >= 0:
        raise ValueError(f"chi must be >= 0, got {chi}")
    vac = 1.0 / math.cosh(chi) ** 2
    ratio = math.tanh(chi) ** 2
    terms = []
    p = vac
    total = 0.0
    while len(terms) < MAX_TERMS:
        terms.append(p)
        total += p
        if len(terms) >= min_terms and total > 1.0 - TAIL_MASS:
            break
        p *= ratio
    return np.asarray(terms)


def spdc_mean_pairs(source: SpdcSource) -> float:
    return math.sinh(source.chi) ** 2
