"""Entropies and error-correction cost models."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "ShannonLimit",
    "Constant",
    "CascadeCubic",
    "Custom",
    "EcModel",
    "parse_ec_model",
    "binary_entropy",
    "ec_cost",
    "conditional_entropy",
    "asymptotic_key_rate",
]

# Slack for bound checks on quantities assembled from floating-point sums.
_EPS = 1e-15


@dataclass(frozen=True)
class ShannonLimit:
    """Ideal reconciliation, f_e = 1."""

    def cost(self, x: float) -> float:
        return 1.0

    def spec(self) -> str:
        return "shannon"


@dataclass(frozen=True)
class Constant:
    value: float = 1.33

    def __post_init__(self):
        if not self.value >= 1.0:
            raise ValueError(f"constant f_e must be >= 1, got {self.value}")

    def cost(self, x: float) -> float:
        return self.value

    def spec(self) -> str:
        return f"const:{self.value!r}"


@dataclass(frozen=True)
class CascadeCubic:
    """Empirical CASCADE efficiency, f_e(x) = 1.1581 + 57.2 x^3."""

    def cost(self, x: float) -> float:
        return 1.1581 + 57.200 * x**3

    def spec(self) -> str:
        return "cascade"


@dataclass(frozen=True)
class Custom:
    """Tabulated f_e, interpolated piecewise-linearly and held flat outside."""

    xs: tuple[float, ...]
    fs: tuple[float, ...]

    def __post_init__(self):
        if len(self.xs) == 0:
            raise ValueError("custom EC table is empty")
        if len(self.xs) != len(self.fs):
            raise ValueError("custom EC table needs as many f_e values as x nodes")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
            raise ValueError("custom EC table x nodes must be strictly increasing")

    def cost(self, x: float) -> float:
        return float(np.interp(x, self.xs, self.fs))

    def spec(self) -> str:
        pairs = ",".join(f"{x!r}:{f!r}" for x, f in zip(self.xs, self.fs))
        return f"table:{pairs}"


EcModel = Union[ShannonLimit, Constant, CascadeCubic, Custom]


def parse_ec_model(text: str) -> EcModel:
    """Parse ``shannon``, ``cascade``, ``const[:v]`` or ``table:x:f,x:f,...``."""
    kind, _, arg = text.strip().partition(":")
    kind = kind.lower()
    if kind == "shannon" and not arg:
        return ShannonLimit()
    if kind == "cascade" and not arg:
        return CascadeCubic()
    if kind == "const":
        return Constant(float(arg)) if arg else Constant()
    if kind == "table" and arg:
        nodes = [item.split(":") for item in arg.split(",")]
        if any(len(n) != 2 for n in nodes):
            raise ValueError(f"bad EC table {arg!r}; expected x:f pairs")
        return Custom(tuple(float(x) for x, _ in nodes), tuple(float(f) for _, f in nodes))
    raise ValueError(f"unknown EC model {text!r}")


def binary_entropy(x: float) -> float:
    """h2(x) = -x log2 x - (1-x) log2(1-x), with 0 log 0 = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy argument must be in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log1p(-x) / math.log(2.0)


def ec_cost(model: EcModel, x: float) -> float:
    if not 0.0 <= x <= 0.5:
        raise ValueError(f"error rate must be in [0, 0.5], got {x}")
    return model.cost(x)


def _xlogx_over(x: float, y: float, name: str) -> float:
    """x*log2(x/y) with the x = 0 limit; y = 0 < x is a bound violation."""
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        raise ValueError(f"conditional entropy: term {name} has positive weight over a zero denominator")
    return x * math.log2(x / y)


def conditional_entropy(e_b: float, e_p: float, a: float) -> float:
    """H(e_p | e_b) for bit error ``e_b``, phase error ``e_p`` and joint flip ``a``.

    ``a`` is the probability that a bit flip and a phase flip occur together;
    it must satisfy ``max(0, e_b + e_p - 1) <= a <= min(e_b, e_p)``.
    """
    for label, v in (("e_b", e_b), ("e_p", e_p)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{label} must be in [0, 1], got {v}")
    lower = max(0.0, e_b + e_p - 1.0)
    if a < lower - _EPS:
        raise ValueError(f"a={a} below lower bound max(0, e_b + e_p - 1) = {lower}")
    if a > min(e_b, e_p) + _EPS:
        bound = "e_b" if e_b <= e_p else "e_p"
        raise ValueError(f"a={a} above upper bound min(e_b, e_p) = {bound} = {min(e_b, e_p)}")
    a = min(max(a, lower), min(e_b, e_p))
    h = (
        _xlogx_over(1.0 + a - e_b - e_p, 1.0 - e_b, "(1+a-e_b-e_p)")
        + _xlogx_over(e_p - a, 1.0 - e_b, "(e_p-a)")
        + _xlogx_over(e_b - a, e_b, "(e_b-a)")
        + _xlogx_over(a, e_b, "a")
    )
    # Each term is x*log(x/y) with x <= y, so the sum is <= 0.
    return max(-h, 0.0)


def asymptotic_key_rate(Q: float, e_b: float, Q_mu: float, E_mu: float, model: EcModel) -> float:
    """Asymptotic secret key rate Q[1 - h2(e_b)] - Q_mu f_e(E_mu) h2(E_mu).

    The result may be negative; callers clamp when reporting.
    """
    for label, v in (("Q", Q), ("e_b", e_b), ("Q_mu", Q_mu), ("E_mu", E_mu)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{label} must be in [0, 1], got {v}")
    f = model.cost(min(E_mu, 0.5))
    return Q * (1.0 - binary_entropy(e_b)) - Q_mu * f * binary_entropy(E_mu)
