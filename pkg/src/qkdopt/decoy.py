"""Infinite-decoy yields, gains and error rates for the SARG04 protocols."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateChannelError
from .profiles import ChannelParams, DetectorParams, transmittance

__all__ = ["DecoyEstimates", "YieldTable", "VARIANTS", "sarg04_yields", "decoy_totals", "multiphoton_efficiency"]

# Number of bases/sets: the prefactor 1/s in the yield and error formulas.
VARIANTS = {"four_state": 2, "six_state": 3}


@dataclass(frozen=True)
class YieldTable:
    yields: np.ndarray
    bit_errors: np.ndarray


@dataclass(frozen=True)
class DecoyEstimates:
    mu: float
    yields: np.ndarray
    bit_errors: np.ndarray
    gains: np.ndarray
    total_gain: float
    total_error: float


def multiphoton_efficiency(eta: float, n: np.ndarray) -> np.ndarray:
    """eta_n = 1 - (1 - eta)^n, accurate when eta is tiny."""
    if eta >= 1.0:
        return np.where(n > 0, 1.0, 0.0)
    return -np.expm1(n * math.log1p(-eta))


def sarg04_yields(
    variant: str,
    detector: DetectorParams,
    channel: ChannelParams,
    L: float,
    n_max: int,
) -> YieldTable:
    """Y_n and e_b_n for n = 0..n_max.

    Y_n = [eta_n (e_d + 1/2) + (1 - eta_n) p_dark] / s
    e_b_n = [eta_n e_d + (1 - eta_n) p_dark / 2] / (s Y_n)

    with s = 2 (four-state) or 3 (six-state) and eta = eta_d 10^(-alpha L/10);
    receiver loss is not applied.
    """
    try:
        s = VARIANTS[variant]
    except KeyError:
        raise ValueError(f"unknown SARG04 variant {variant!r}; expected one of {sorted(VARIANTS)}") from None
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    eta = detector.efficiency * transmittance(channel, L)
    p_dark = detector.total_dark
    e_d = detector.intrinsic_error
    n = np.arange(n_max + 1)
    eta_n = multiphoton_efficiency(eta, n)
    numer_y = eta_n * (e_d + 0.5) + (1.0 - eta_n) * p_dark
    numer_e = eta_n * e_d + 0.5 * (1.0 - eta_n) * p_dark
    yields = numer_y / s
    bad = (yields == 0.0) & (numer_e != 0.0)
    if bad.any():
        raise DegenerateChannelError(f"zero yield with nonzero error weight at n={int(np.argmax(bad))}")
    with np.errstate(invalid="ignore", divide="ignore"):
        bit_errors = np.where(yields > 0.0, numer_e / (s * yields), 0.0)
    return YieldTable(yields=yields, bit_errors=bit_errors)


def decoy_totals(mu: float, table: YieldTable) -> DecoyEstimates:
    """Poisson-weighted gains Q_n, total gain Q_mu and total error E_mu.

    Terms beyond the table length are dropped.
    """
    if not mu > 0:
        raise ValueError(f"mean photon number must be > 0, got {mu}")
    yields = np.asarray(table.yields, dtype=float)
    errs = np.asarray(table.bit_errors, dtype=float)
    n = np.arange(len(yields))
    weights = np.exp(n * math.log(mu) - mu - np.array([math.lgamma(k + 1) for k in n]))
    gains = weights * yields
    total_gain = float(gains.sum())
    if total_gain <= 0.0:
        raise DegenerateChannelError("total gain is zero; total error rate is undefined")
    total_error = float((gains * errs).sum() / total_gain)
    return DecoyEstimates(
        mu=mu,
        yields=yields,
        bit_errors=errs,
        gains=gains,
        total_gain=total_gain,
        total_error=total_error,
    )
