"""Photon-level Monte Carlo cross-check of the analytic click and error models.

Three event taxonomies are sampled, one per analytic model:

``bb84`` (WCP channel)
    n ~ Poisson(mu) photons; each survives with probability eta_t*eta
    (receiver loss included); a dark count fires with probability n_D*d_B.
    A click is signal-or-dark. A signal click is wrong with probability
    e_0, a dark-only click with probability 1/2.
    Analytic: click = 1 - (1 - p_dark) exp(-mu eta_t eta),
    errors = e_0 (1 - exp(-mu eta_t eta)) + p_dark exp(-mu eta_t eta) / 2.

``simple``
    First-order slot model: the pulse mode reaches the detector with
    probability eta_t*eta and carries a photon with probability mu; when the
    mode is lost a dark count (d_B) may fire, and every such noise click is
    an error. Analytic: click = p_signal + p_noise, errors = p_noise.

``qc``
    Signal detection with probability mu*eta_t*eta (receiver loss included),
    wrong with probability p_noise; each of the n_D detectors dark-fires with
    probability d_B and such an event is wrong with probability 1/n_D.
    Counted per detection event. Analytic: events = p_signal + n_D p_dark,
    errors = p_noise p_signal + p_dark.

All runs are pure functions of (seed, config): pulse i always consumes the
same deviates regardless of block size, backend or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .profiles import ChannelParams, DetectorParams, ExperimentProfile
from .rates import bb84_wcp_events, qc_probabilities, simple_probabilities
from .sources import poisson_terms

__all__ = [
    "MODELS",
    "McConfig",
    "McEstimate",
    "InsufficientStatisticsError",
    "simulate_wcp_channel",
    "simulate",
    "estimate_qber",
    "analytic_rates",
    "Agreement",
    "compare",
    "random_configs",
    "validate",
]

MODELS = ("simple", "qc", "bb84")
BLOCK = 1 << 16


class InsufficientStatisticsError(ArithmeticError):
    pass


@dataclass(frozen=True)
class McConfig:
    pulses: int
    seed: int
    profile: ExperimentProfile
    mu: float
    L: float

    def __post_init__(self):
        if self.pulses < 1:
            raise ValueError("need at least one pulse")
        if not self.mu > 0:
            raise ValueError("mu must be > 0")
        if self.L < 0:
            raise ValueError("L must be >= 0")


@dataclass(frozen=True)
class McEstimate:
    pulses: int
    clicks: int
    signal: int
    noise: int
    errors: int

    @staticmethod
    def _se(p, n):
        return math.sqrt(p * (1.0 - p) / n) if n > 0 else math.nan

    @property
    def click_rate(self) -> float:
        return self.clicks / self.pulses

    @property
    def click_se(self) -> float:
        return self._se(min(self.click_rate, 1.0), self.pulses)

    @property
    def error_rate(self) -> float:
        """Errors per pulse."""
        return self.errors / self.pulses

    @property
    def error_se(self) -> float:
        return self._se(min(self.error_rate, 1.0), self.pulses)

    @property
    def qber(self) -> float:
        if self.clicks == 0:
            raise InsufficientStatisticsError(f"no clicks in {self.pulses} pulses")
        return self.errors / self.clicks

    @property
    def qber_se(self) -> float:
        return self._se(min(self.qber, 1.0), self.clicks)


def _blocks(n, block):
    return [(s, min(block, n - s)) for s in range(0, n, block)]


def _run(name, config, args, workers, backend, block):
    key = _kernels.seed_key(config.seed)
    parts = _blocks(config.pulses, block)

    def one(part):
        return _kernels.run_kernel(name, key, part[0], part[1], *args, backend=backend)

    if workers > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(one, parts))
    else:
        counts = [one(p) for p in parts]
    total = np.sum(counts, axis=0)
    return McEstimate(config.pulses, int(total[0]), int(total[1]), int(total[2]), int(total[3]))


def _kernel_args(config: McConfig, model: str):
    prof = config.profile
    det = prof.detector
    if model == "bb84":
        ev = bb84_wcp_events(prof, config.mu, config.L)
        eta_b = ev.eta_t * det.efficiency
        cdf = np.cumsum(poisson_terms(config.mu))
        return "wcp", (cdf, eta_b, det.total_dark, det.intrinsic_error)
    if config.mu > 1.0:
        raise ValueError(f"the {model} slot model needs mu <= 1, got {config.mu}")
    if model == "simple":
        eta_t, _, _ = simple_probabilities(prof, config.mu, config.L)
        return "simple", (eta_t * det.efficiency, config.mu, det.dark_count)
    if model == "qc":
        pr = qc_probabilities(prof, config.mu, config.L)
        eta_b = pr["eta_t"] * det.efficiency
        return "qc", (eta_b, config.mu, pr["p_noise"], det.dark_count, det.num_detectors)
    raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")


def simulate(
    config: McConfig, model: str, workers: int = 1, backend: str | None = None, block: int = BLOCK
) -> McEstimate:
    name, args = _kernel_args(config, model)
    return _run(name, config, args, workers, backend, block)


def simulate_wcp_channel(config: McConfig, workers: int = 1, backend: str | None = None) -> McEstimate:
    """Sample the WCP channel pulse by pulse (the ``bb84`` taxonomy)."""
    return simulate(config, "bb84", workers=workers, backend=backend)


def estimate_qber(config: McConfig, model: str = "simple", workers: int = 1, backend: str | None = None) -> McEstimate:
    """Like :func:`simulate`, but insists on at least one click."""
    est = simulate(config, model, workers=workers, backend=backend)
    if est.clicks == 0:
        raise InsufficientStatisticsError(f"no clicks in {config.pulses} pulses")
    return est


def analytic_rates(config: McConfig, model: str) -> tuple[float, float]:
    """(click probability, error probability) per pulse from the rate engines."""
    prof = config.profile
    if model == "bb84":
        ev = bb84_wcp_events(prof, config.mu, config.L)
        return ev.click, ev.error(prof.detector.intrinsic_error)
    if model == "simple":
        _, p_signal, p_noise = simple_probabilities(prof, config.mu, config.L)
        return p_signal + p_noise, p_noise
    if model == "qc":
        pr = qc_probabilities(prof, config.mu, config.L)
        return pr["clicks"], pr["errors"]
    raise ValueError(f"unknown model {model!r}")


@dataclass(frozen=True)
class Agreement:
    model: str
    config: McConfig
    estimate: McEstimate
    click_expected: float
    error_expected: float
    click_z: float
    error_z: float
    sigmas: float = 3.0

    @property
    def ok(self) -> bool:
        return abs(self.click_z) <= self.sigmas and abs(self.error_z) <= self.sigmas


def _z(observed, expected, n):
    # Binomial standard error at the analytic value.
    sd = math.sqrt(max(expected * (1.0 - expected), 0.0) / n)
    if sd == 0.0:
        return 0.0 if observed == expected else math.inf
    return (observed - expected) / sd


def compare(config: McConfig, model: str, workers: int = 1, backend: str | None = None, sigmas: float = 3.0) -> Agreement:
    est = simulate(config, model, workers=workers, backend=backend)
    click, err = analytic_rates(config, model)
    return Agreement(
        model=model,
        config=config,
        estimate=est,
        click_expected=click,
        error_expected=err,
        click_z=_z(est.click_rate, click, config.pulses),
        error_z=_z(est.error_rate, err, config.pulses),
        sigmas=sigmas,
    )


def random_configs(count: int, seed: int, pulses: int, max_loss_db: float = 10.0) -> list[McConfig]:
    """Random configurations inside the range spanned by the Table-1 experiments.

    alpha, L_c, eta and e_0 are uniform and d_B log-uniform over the
    tabulated extremes; mu is uniform on [0.1, 0.6] and L keeps the total
    loss alpha L + L_c below ``max_loss_db``.
    """
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        alpha = rng.uniform(0.2, 2.5)
        lc = rng.uniform(1.0, 8.0)
        eta = rng.uniform(0.11, 0.5)
        e0 = rng.uniform(1.4e-3, 0.01)
        dark = 10.0 ** rng.uniform(math.log10(5e-8), math.log10(2e-4))
        mu = rng.uniform(0.1, 0.6)
        L = rng.uniform(0.0, max(max_loss_db - lc, 0.0) / alpha)
        prof = ExperimentProfile(
            name=f"mc{k:02d}",
            channel=ChannelParams(alpha=alpha, receiver_loss=lc),
            detector=DetectorParams(efficiency=eta, dark_count=dark, num_detectors=2, intrinsic_error=e0),
        )
        out.append(McConfig(pulses=pulses, seed=int(rng.integers(0, 2**63)), profile=prof, mu=mu, L=L))
    return out


def validate(
    models=MODELS,
    pulses: int = 1_000_000,
    seed: int = 42,
    configs: int = 20,
    allowed_failures: int = 1,
    workers: int = 1,
    backend: str | None = None,
) -> tuple[bool, list[Agreement]]:
    """Run every model over ``configs`` random configurations.

    A model passes when at most ``allowed_failures`` configurations fall
    outside 3 sigma; a failing model is rerun once on fresh seeds.
    """
    results = []
    passed = True
    for model in models:
        for attempt in range(2):
            cfgs = random_configs(configs, seed + 7919 * attempt, pulses)
            rows = [compare(c, model, workers=workers, backend=backend) for c in cfgs]
            if sum(not r.ok for r in rows) <= allowed_failures:
                break
        results.extend(rows)
        passed = passed and sum(not r.ok for r in rows) <= allowed_failures
    return passed, results
