"""Per-protocol secret key rate engines and the distance sweep driver.

Every engine maps (profile, source parameter, EC model, L) to a
:class:`RatePoint`. Raw rates may be negative; the reported rate is clamped
at zero and the raw value kept alongside it.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import decoy
from .errors import DegenerateChannelError
from .infomath import CascadeCubic, EcModel, asymptotic_key_rate, binary_entropy, conditional_entropy
from .optimize import OptimizeDirective, maximize
from .profiles import ExperimentProfile, mid_station_transmittance, profile_for_protocol, transmittance
from .sources import IdealPairSource, SpdcSource, poisson_terms, spdc_terms

__all__ = [
    "RatePoint",
    "MdiGains",
    "ArbitraryMuSource",
    "simple_probabilities",
    "simple_qber",
    "simple_rate",
    "qc_probabilities",
    "zbinden_ec_pa",
    "qc_rate",
    "bb84_wcp_events",
    "bb84_wcp_rate",
    "bb84_spdc_rate",
    "bbm92_coincidences",
    "bbm92_rate",
    "collision_secure_fraction",
    "dpsk_rate",
    "sarg04_rate",
    "default_mdi_gain_model",
    "mdi_sarg04_rate",
    "PROTOCOLS",
    "sweep",
    "distance_grid",
    "cutoff_distance",
]


@dataclass(frozen=True)
class RatePoint:
    L: float
    transmittance: float
    qber: float
    mu: float | None
    chi: float | None
    rate_per_pulse_raw: float
    rate_per_pulse: float
    rate_bps: float
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _point(profile, L, eta, qber, raw, mu=None, chi=None) -> RatePoint:
    reported = max(raw, 0.0)
    return RatePoint(
        L=float(L),
        transmittance=float(eta),
        qber=float(qber),
        mu=None if mu is None else float(mu),
        chi=None if chi is None else float(chi),
        rate_per_pulse_raw=float(raw),
        rate_per_pulse=reported,
        rate_bps=profile.pulse_rate * reported,
    )


def _failed_point(L, status, mu=None, chi=None) -> RatePoint:
    nan = math.nan
    return RatePoint(float(L), nan, nan, mu, chi, nan, nan, nan, status)


def _check_mu(mu):
    if not mu > 0:
        raise ValueError(f"mean photon number must be > 0, got {mu}")


# -- simplest protocol --------------------------------------------------------


def simple_probabilities(profile: ExperimentProfile, mu: float, L: float) -> tuple[float, float, float]:
    """(eta_t, p_signal, p_noise) with p_signal = mu eta_t eta, p_noise = (1 - eta_t eta) p_dark."""
    _check_mu(mu)
    eta_t = transmittance(profile.channel, L)
    eta_b = eta_t * profile.detector.efficiency
    return eta_t, mu * eta_b, (1.0 - eta_b) * profile.detector.dark_count


def simple_qber(profile: ExperimentProfile, mu: float, L: float) -> float:
    _, p_signal, p_noise = simple_probabilities(profile, mu, L)
    total = p_signal + p_noise
    if total <= 0.0:
        raise DegenerateChannelError("no signal and no noise detections")
    return p_noise / total


def simple_rate(profile: ExperimentProfile, mu: float, q_threshold: float, L: float) -> RatePoint:
    """K = (p_signal + p_noise)(1 - Q_B / Q_t) for a threshold QBER Q_t."""
    if not 0.0 < q_threshold <= 0.5:
        raise ValueError(f"threshold QBER must be in (0, 0.5], got {q_threshold}")
    eta_t, p_signal, p_noise = simple_probabilities(profile, mu, L)
    qber = simple_qber(profile, mu, L)
    raw = (p_signal + p_noise) * (1.0 - qber / q_threshold)
    return _point(profile, L, eta_t, qber, raw, mu=mu)


# -- QC protocol ---------------------------------------------------------------


def qc_probabilities(profile: ExperimentProfile, mu: float, L: float) -> dict[str, float]:
    """Detection bookkeeping of the QC protocol; eta_t includes receiver loss.

    QBER = (p_noise p_signal + p_dark) / (p_signal + n_D p_dark) with
    p_noise = (1 - eta_t eta) p_dark.
    """
    _check_mu(mu)
    det = profile.detector
    eta_t = transmittance(profile.channel, L, include_receiver_loss=True)
    eta_b = eta_t * det.efficiency
    p_signal = mu * eta_b
    p_dark = det.dark_count
    p_noise = (1.0 - eta_b) * p_dark
    clicks = p_signal + det.num_detectors * p_dark
    errors = p_noise * p_signal + p_dark
    if clicks <= 0.0:
        raise DegenerateChannelError("no signal and no dark detections")
    return {
        "eta_t": eta_t,
        "p_signal": p_signal,
        "p_dark": p_dark,
        "p_noise": p_noise,
        "clicks": clicks,
        "errors": errors,
        "qber": errors / clicks,
    }


def zbinden_ec_pa(qber: float) -> tuple[float, float]:
    """Approximate EC and PA fractions, EC = 7Q/2 - Q log2 Q, PA = 1 + log2[(1 + 4Q - 4Q^2)/2]."""
    q = qber
    ec = 3.5 * q - (q * math.log2(q) if q > 0.0 else 0.0)
    pa = 1.0 + math.log2((1.0 + 4.0 * q - 4.0 * q * q) / 2.0)
    return ec, pa


def qc_rate(
    profile: ExperimentProfile,
    mu: float,
    L: float,
    ec_pa: Callable[[float], tuple[float, float]] = zbinden_ec_pa,
    qber_prefactor: bool = True,
) -> RatePoint:
    """K = Q_B eta_t mu eta (1 - EC)(1 - PA).

    ``qber_prefactor=False`` drops the leading Q_B factor (diagnostic only).
    """
    pr = qc_probabilities(profile, mu, L)
    q = pr["qber"]
    ec, pa = ec_pa(q)
    raw = pr["p_signal"] * (1.0 - ec) * (1.0 - pa)
    if qber_prefactor:
        raw *= q
    return _point(profile, L, pr["eta_t"], q, raw, mu=mu)


# -- BB84 ------------------------------------------------------------------------


@dataclass(frozen=True)
class Bb84Events:
    """Per-pulse probabilities of the BB84 detection model (before sifting)."""

    eta_t: float
    signal: float  # at least one signal photon detected
    dark_only: float  # dark count and no signal photon
    multi: float  # multi-photon emission (heralded, for SPDC)

    @property
    def click(self) -> float:
        return self.signal + self.dark_only

    def error(self, e0: float) -> float:
        return e0 * self.signal + 0.5 * self.dark_only


def bb84_wcp_events(profile: ExperimentProfile, mu: float, L: float) -> Bb84Events:
    """Closed-form WCP event probabilities; p_dark = n_D d_B and eta_t includes L_c."""
    _check_mu(mu)
    det = profile.detector
    eta_t = transmittance(profile.channel, L, include_receiver_loss=True)
    signal = -math.expm1(-mu * eta_t * det.efficiency)
    dark_only = det.total_dark * (1.0 - signal)
    multi = -math.expm1(-mu) - mu * math.exp(-mu)
    return Bb84Events(eta_t, signal, dark_only, max(multi, 0.0))


def _bb84_series_events(profile, pn: np.ndarray, herald: np.ndarray, L: float) -> Bb84Events:
    det = profile.detector
    eta_t = transmittance(profile.channel, L, include_receiver_loss=True)
    n = np.arange(len(pn))
    miss = 1.0 - decoy.multiphoton_efficiency(eta_t * det.efficiency, n)
    w = pn * herald
    signal = float(np.sum(w * (1.0 - miss)))
    dark_only = det.total_dark * float(np.sum(w * miss))
    multi = float(np.sum(w[2:]))
    return Bb84Events(eta_t, signal, dark_only, multi)


def _bb84_distill(ev: Bb84Events, e0: float, ec: EcModel) -> tuple[float, float]:
    """(qber, raw key rate) with multi-photon pulses counted as fully leaked.

    Q_mu = click/2 is the sifted gain and E_mu its error rate; the privacy
    amplification term only credits the single-photon part
    Q_1 = Q_mu - multi/2, onto which all errors are charged.
    """
    click = ev.click
    if click <= 0.0:
        raise DegenerateChannelError("zero detection probability")
    q_mu = 0.5 * click
    e_mu = min(ev.error(e0) / click, 1.0)
    q1 = q_mu - 0.5 * ev.multi
    pa = 0.0
    if q1 > 0.0:
        e1 = min(e_mu * q_mu / q1, 0.5)
        pa = q1 * (1.0 - binary_entropy(e1))
    f = ec.cost(min(e_mu, 0.5))
    return e_mu, pa - q_mu * f * binary_entropy(e_mu)


def bb84_wcp_rate(
    profile: ExperimentProfile, mu: float, ec: EcModel, L: float, distill: bool = True
) -> RatePoint:
    """BB84 with a weak coherent source.

    ``distill=False`` returns the raw detection rate 1 - exp(-mu eta_t eta)
    (before sifting, error correction and privacy amplification).
    """
    ev = bb84_wcp_events(profile, mu, L)
    if not distill:
        qber = ev.error(profile.detector.intrinsic_error) / ev.click if ev.click > 0 else 0.0
        return _point(profile, L, ev.eta_t, qber, ev.signal, mu=mu)
    qber, raw = _bb84_distill(ev, profile.detector.intrinsic_error, ec)
    return _point(profile, L, ev.eta_t, qber, raw, mu=mu)


def bb84_spdc_rate(profile: ExperimentProfile, chi: float, ec: EcModel, L: float) -> RatePoint:
    """BB84 fed by a heralded SPDC source held by the sender.

    The sender's herald detector has the profile efficiency and dark count and
    no fiber in front of it; the receiver's arm crosses the full link.
    """
    pn = spdc_terms(SpdcSource(chi).chi, min_terms=3)
    det = profile.detector
    n = np.arange(len(pn))
    herald = 1.0 - (1.0 - det.dark_count) * (1.0 - decoy.multiphoton_efficiency(det.efficiency, n))
    ev = _bb84_series_events(profile, pn, herald, L)
    qber, raw = _bb84_distill(ev, det.intrinsic_error, ec)
    return _point(profile, L, ev.eta_t, qber, raw, chi=chi)


# -- BBM92 -----------------------------------------------------------------------


@dataclass(frozen=True)
class ArbitraryMuSource:
    """Poissonian pair source whose mean follows mu(L) = base 10^(-slope alpha L / 10).

    ``mu`` pins the mean instead of the distance rule; ``dark_count``
    replaces the profile's d_B when set.
    """

    base: float = 0.3
    slope: float = 0.7
    dark_count: float | None = 5e-5
    mu: float | None = None

    def mean(self, alpha: float, L: float) -> float:
        if self.mu is not None:
            return self.mu
        return self.base * 10.0 ** (-self.slope * alpha * L / 10.0)


def _arm_efficiency(profile: ExperimentProfile, L: float) -> float:
    # Source at the midpoint; each arm crosses L/2 of fiber.
    return profile.detector.efficiency * transmittance(profile.channel, L / 2.0)


def bbm92_coincidences(profile: ExperimentProfile, source, L: float) -> dict[str, float]:
    """True and false coincidence probabilities for a midpoint pair source."""
    eta = _arm_efficiency(profile, L)
    det = profile.detector
    d_b = det.dark_count
    if isinstance(source, ArbitraryMuSource) and source.dark_count is not None:
        d_b = source.dark_count
    p_dark = det.num_detectors * d_b
    if isinstance(source, IdealPairSource):
        p_true = eta * eta
        p_false = p_dark * (2.0 * eta - 2.0 * eta * eta) + p_dark**2 * (1.0 - eta) ** 2
        return {"eta_arm": eta, "p_true": p_true, "p_false": p_false, "p_dark": p_dark}
    if isinstance(source, SpdcSource):
        pn = spdc_terms(source.chi, min_terms=3)
    elif isinstance(source, ArbitraryMuSource):
        mu = source.mean(profile.channel.alpha, L)
        _check_mu(mu)
        pn = poisson_terms(mu, min_terms=3)
    else:
        raise TypeError(f"unsupported BBM92 source {source!r}")
    n = np.arange(len(pn))
    arm_click = 1.0 - (1.0 - p_dark) * (1.0 - decoy.multiphoton_efficiency(eta, n))
    coincidence = float(np.sum(pn * arm_click * arm_click))
    p_true = float(pn[1]) * eta * eta
    return {"eta_arm": eta, "p_true": p_true, "p_false": max(coincidence - p_true, 0.0), "p_dark": p_dark}


def bbm92_rate(profile: ExperimentProfile, source, ec: EcModel, L: float) -> RatePoint:
    c = bbm92_coincidences(profile, source, L)
    total = c["p_true"] + c["p_false"]
    if total <= 0.0:
        raise DegenerateChannelError("no coincidences")
    e = (profile.detector.intrinsic_error * c["p_true"] + 0.5 * c["p_false"]) / total
    q = 0.5 * total
    raw = asymptotic_key_rate(q, e, q, e, ec)
    eta_t = transmittance(profile.channel, L / 2.0)
    mu = source.mean(profile.channel.alpha, L) if isinstance(source, ArbitraryMuSource) else None
    chi = source.chi if isinstance(source, SpdcSource) else None
    return _point(profile, L, eta_t, e, raw, mu=mu, chi=chi)


# -- DPSK ------------------------------------------------------------------------

_DPSK_VERTEX = 3.0 / 19.0


def collision_secure_fraction(e: float) -> float:
    """Secure fraction -log2(1 - e^2 - (1 - 6e)^2 / 2) against individual attacks.

    The collision bound tightens with e only up to its vertex e = 3/19; past
    it the value is held at the vertex so the fraction stays nonincreasing.
    """
    e = min(max(e, 0.0), _DPSK_VERTEX)
    arg = 1.0 - e * e - 0.5 * (1.0 - 6.0 * e) ** 2
    return -math.log2(arg)


def dpsk_rate(
    profile: ExperimentProfile,
    mu: float,
    ec: EcModel,
    L: float,
    secure_fraction: Callable[[float], float] = collision_secure_fraction,
) -> RatePoint:
    """K = R_sift [tau(e) - f_e(e) h2(e)] with R_sift the click probability."""
    _check_mu(mu)
    det = profile.detector
    eta_t = transmittance(profile.channel, L, include_receiver_loss=True)
    signal = -math.expm1(-mu * eta_t * det.efficiency)
    dark_only = det.total_dark * (1.0 - signal)
    click = signal + dark_only
    if click <= 0.0:
        raise DegenerateChannelError("zero click probability")
    e = min((det.intrinsic_error * signal + 0.5 * dark_only) / click, 0.5)
    tau = secure_fraction(e)
    raw = click * (tau - ec.cost(e) * binary_entropy(e))
    return _point(profile, L, eta_t, e, raw, mu=mu)


# -- SARG04 --------------------------------------------------------------------


def same_as_bit_error(n: int, e_b: float) -> float:
    return e_b


def independent_flips(e_b: float, e_p: float) -> float:
    return e_b * e_p


def sarg04_rate(
    variant: str,
    profile: ExperimentProfile,
    mu: float,
    ec: EcModel,
    L: float,
    phase_error_map: Callable[[int, float], float] = same_as_bit_error,
    joint_flip: Callable[[float, float], float] = independent_flips,
) -> RatePoint:
    """Infinite-decoy SARG04 rate, crediting vacuum, one- and two-photon gains.

    K = Q_0 + sum_{n=1,2} Q_n [1 - H(e_p_n | e_b_n)] - Q_mu f_e(E_mu) h2(E_mu)

    ``phase_error_map(n, e_b_n)`` supplies e_p_n and ``joint_flip(e_b, e_p)``
    the joint flip probability a. The defaults (e_p = e_b, a = e_b e_p)
    reduce H(e_p|e_b) to h2(e_b).
    """
    _check_mu(mu)
    n_max = max(2, len(poisson_terms(mu)) - 1)
    table = decoy.sarg04_yields(variant, profile.detector, profile.channel, L, n_max)
    est = decoy.decoy_totals(mu, table)
    raw = float(est.gains[0])
    for n in (1, 2):
        e_b = float(est.bit_errors[n])
        e_p = phase_error_map(n, e_b)
        raw += float(est.gains[n]) * (1.0 - conditional_entropy(e_b, e_p, joint_flip(e_b, e_p)))
    raw -= est.total_gain * ec.cost(min(est.total_error, 0.5)) * binary_entropy(est.total_error)
    return _point(profile, L, transmittance(profile.channel, L), est.total_error, raw, mu=mu)


# -- MDI SARG04 ----------------------------------------------------------------


@dataclass(frozen=True)
class MdiGains:
    """Joint gains and errors indexed [m, n] by photon numbers sent by each side."""

    event_type: int
    joint_gains: np.ndarray
    bit_errors: np.ndarray
    phase_errors: np.ndarray
    total_gain: float
    total_error: float


# Fraction of matched rotation indices k = k' kept: all four for Type 1,
# only k = k' in {0, 2} for Type 2.
_MDI_SIFT = {1: 1.0, 2: 0.5}
_BELL_SUCCESS = 0.5


def default_mdi_gain_model(event_type: int, profile: ExperimentProfile, mu: float, L: float) -> MdiGains:
    """Relay at L/2; each side's click is signal-or-dark, signal errors at e_d, dark errors at 1/2."""
    if event_type not in _MDI_SIFT:
        raise ValueError(f"event type must be 1 or 2, got {event_type}")
    _check_mu(mu)
    det = profile.detector
    eta_arm = det.efficiency * mid_station_transmittance(profile.channel, L)
    d = det.total_dark
    pn = poisson_terms(mu, min_terms=3)
    n = np.arange(len(pn))
    sig = decoy.multiphoton_efficiency(eta_arm, n)
    click = sig + d * (1.0 - sig)
    both = np.outer(click, click)
    both_sig = np.outer(sig, sig)
    gains = _BELL_SUCCESS * _MDI_SIFT[event_type] * np.outer(pn, pn) * both
    with np.errstate(invalid="ignore", divide="ignore"):
        bit = np.where(both > 0.0, (det.intrinsic_error * both_sig + 0.5 * (both - both_sig)) / both, 0.0)
    total = float(gains.sum())
    if total <= 0.0:
        raise DegenerateChannelError("relay never announces success")
    return MdiGains(
        event_type=event_type,
        joint_gains=gains,
        bit_errors=bit,
        phase_errors=bit.copy(),
        total_gain=total,
        total_error=float((gains * bit).sum() / total),
    )


_MDI_SECURE_TERMS = ((1, 1), (1, 2), (2, 1))


def mdi_sarg04_rate(
    event_type: int,
    profile: ExperimentProfile,
    mu: float,
    ec: EcModel,
    L: float,
    gain_model: Callable[[int, ExperimentProfile, float, float], MdiGains] = default_mdi_gain_model,
    include_22: bool = False,
) -> RatePoint:
    """K_i = sum Q^(m,n)[1 - h2(e_p^(m,n))] - Q_tot f_e(e_tot) h2(e_tot).

    The sum runs over m, n in {1, 2} without the (2, 2) term; ``include_22``
    restores it for diagnostics.
    """
    g = gain_model(event_type, profile, mu, L)
    terms = _MDI_SECURE_TERMS + (((2, 2),) if include_22 else ())
    raw = 0.0
    for m, n in terms:
        raw += float(g.joint_gains[m, n]) * (1.0 - binary_entropy(min(float(g.phase_errors[m, n]), 1.0)))
    e_tot = g.total_error
    raw -= g.total_gain * ec.cost(min(e_tot, 0.5)) * binary_entropy(e_tot)
    return _point(profile, L, mid_station_transmittance(profile.channel, L), e_tot, raw, mu=mu)


# -- protocol registry and sweeps --------------------------------------------


@dataclass(frozen=True)
class Protocol:
    name: str
    family: str
    variables: tuple[str, ...]
    evaluate: Callable[[ExperimentProfile, dict, EcModel, float], RatePoint]

    def fixed_params(self, profile: ExperimentProfile, params: dict, L: float) -> dict:
        fixed = {v: params[v] for v in self.variables}
        if self.name == "bbm92-arbitrary" and params.get("mu") is None:
            fixed["mu"] = ArbitraryMuSource().mean(profile.channel.alpha, L)
        return fixed


def _arbitrary(profile, p, ec, L):
    return bbm92_rate(profile, ArbitraryMuSource(mu=p.get("mu")), ec, L)


_PROTOCOL_LIST = [
    Protocol("simple", "simple", ("mu",), lambda pr, p, ec, L: simple_rate(pr, p["mu"], p["qt"], L)),
    Protocol("qc", "qc", ("mu",), lambda pr, p, ec, L: qc_rate(pr, p["mu"], L)),
    Protocol("bb84-wcp", "bb84", ("mu",), lambda pr, p, ec, L: bb84_wcp_rate(pr, p["mu"], ec, L)),
    Protocol("bb84-spdc", "bb84", ("chi",), lambda pr, p, ec, L: bb84_spdc_rate(pr, p["chi"], ec, L)),
    Protocol("bbm92-ideal", "bbm92", (), lambda pr, p, ec, L: bbm92_rate(pr, IdealPairSource(), ec, L)),
    Protocol("bbm92-spdc", "bbm92", ("chi",), lambda pr, p, ec, L: bbm92_rate(pr, SpdcSource(p["chi"]), ec, L)),
    Protocol("bbm92-arbitrary", "bbm92", ("mu",), _arbitrary),
    Protocol("dpsk", "dpsk", ("mu",), lambda pr, p, ec, L: dpsk_rate(pr, p["mu"], ec, L)),
    Protocol("sarg04-4", "sarg04", ("mu",), lambda pr, p, ec, L: sarg04_rate("four_state", pr, p["mu"], ec, L)),
    Protocol("sarg04-6", "sarg04", ("mu",), lambda pr, p, ec, L: sarg04_rate("six_state", pr, p["mu"], ec, L)),
    Protocol("mdi-sarg04-t1", "mdi", ("mu",), lambda pr, p, ec, L: mdi_sarg04_rate(1, pr, p["mu"], ec, L)),
    Protocol("mdi-sarg04-t2", "mdi", ("mu",), lambda pr, p, ec, L: mdi_sarg04_rate(2, pr, p["mu"], ec, L)),
]
PROTOCOLS = {p.name: p for p in _PROTOCOL_LIST}


def distance_grid(l_min: float, l_max: float, l_step: float) -> list[float]:
    """Evenly spaced grid l_min, l_min + step, ... up to l_max inclusive."""
    if not l_step > 0:
        raise ValueError("step must be > 0")
    if l_min > l_max:
        raise ValueError("l_min must be <= l_max")
    if l_min < 0:
        raise ValueError("distances must be >= 0")
    count = int(math.floor((l_max - l_min) / l_step + 1e-9)) + 1
    return [l_min + k * l_step for k in range(count)]


def _evaluate_point(task) -> RatePoint:
    proto_name, profile, ec, directive, params, L = task
    proto = PROTOCOLS[proto_name]
    fixed = proto.fixed_params(profile, params, L)
    base = dict(params)
    try:
        active = directive.restricted(proto.variables) if directive is not None else None
        if active is not None:

            def objective(values):
                try:
                    return proto.evaluate(profile, {**base, **values}, ec, L).rate_per_pulse_raw
                except (ArithmeticError, ValueError):
                    return -math.inf

            best, _ = maximize(objective, active, candidates=[fixed])
            tuned = proto.evaluate(profile, {**base, **fixed, **best}, ec, L)
            # The fixed value may sit outside the search box (e.g. the
            # distance rule of bbm92-arbitrary); never report less than it.
            start = proto.evaluate(profile, {**base, **fixed}, ec, L)
            return tuned if tuned.rate_per_pulse_raw >= start.rate_per_pulse_raw else start
        return proto.evaluate(profile, {**base, **fixed}, ec, L)
    except DegenerateChannelError:
        return _failed_point(L, "degenerate", fixed.get("mu"), fixed.get("chi"))
    except (ArithmeticError, ValueError):
        return _failed_point(L, "error", fixed.get("mu"), fixed.get("chi"))


def sweep(
    protocol: str,
    profile: ExperimentProfile,
    distances: Sequence[float],
    ec: EcModel = CascadeCubic(),
    directive: OptimizeDirective | None = None,
    mu: float | None = 0.1,
    chi: float = 0.1,
    q_threshold: float = 0.04,
    workers: int = 1,
) -> list[RatePoint]:
    """Evaluate ``protocol`` over a strictly increasing distance grid.

    With a directive the applicable parameters are maximized per point,
    starting from the fixed values, so optimized sweeps dominate fixed ones.
    A failing point is reported with a non-"ok" status instead of aborting.
    ``mu=None`` selects the distance rule for ``bbm92-arbitrary``.
    """
    if protocol not in PROTOCOLS:
        raise KeyError(f"unknown protocol {protocol!r}; known: {', '.join(PROTOCOLS)}")
    distances = [float(x) for x in distances]
    if any(b <= a for a, b in zip(distances, distances[1:])):
        raise ValueError("distance grid must be strictly increasing")
    if any(x < 0 for x in distances):
        raise ValueError("distances must be >= 0")
    proto = PROTOCOLS[protocol]
    profile = profile_for_protocol(profile, proto.family)
    if protocol != "bbm92-arbitrary" and mu is None:
        mu = 0.1
    params = {"mu": mu, "chi": chi, "qt": q_threshold}
    tasks = [(protocol, profile, ec, directive, params, L) for L in distances]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_evaluate_point, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    return [_evaluate_point(t) for t in tasks]


def cutoff_distance(points: Iterable[RatePoint]) -> float | None:
    """Largest distance whose raw rate is positive, or None."""
    best = None
    for p in points:
        if p.ok and p.rate_per_pulse_raw > 0.0:
            best = p.L if best is None else max(best, p.L)
    return best
