"""Per-pulse Monte Carlo kernels, numba-compiled with a vectorized numpy twin.

Both backends draw from the same counter-based generator: every uniform is a
pure function of (seed key, pulse index, draw index), so results match
bit-for-bit across backends, block sizes and thread counts.

Set ``QKDOPT_NO_NUMBA=1`` to force the numpy path.
"""

from __future__ import annotations

import os

import numpy as np

_NO_NUMBA = os.environ.get("QKDOPT_NO_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    if _NO_NUMBA:
        raise ImportError("numba disabled by QKDOPT_NO_NUMBA")
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

DEFAULT_BACKEND = "numba" if HAVE_NUMBA else "numpy"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_STREAM = np.uint64(0xD1B54A32D192ED03)
_S11 = np.uint64(11)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_ONE = np.uint64(1)
_TO_UNIT = 1.0 / 9007199254740992.0  # 2**-53


def _jit(fn):
    if HAVE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


# -- generator ------------------------------------------------------------------


def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


_mix_jit = _jit(_mix)


def seed_key(seed: int) -> np.uint64:
    """Per-run key derived from a 64-bit seed."""
    with np.errstate(over="ignore"):
        return _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + _GOLDEN)


@_jit
def _pulse_key(key, pulse):
    return _mix_jit(key ^ (np.uint64(pulse) * _STREAM + _GOLDEN))


@_jit
def _uniform(pk, draw):
    h = _mix_jit(pk + np.uint64(draw + 1) * _GOLDEN)
    return np.float64(h >> _S11) * _TO_UNIT


def _np_pulse_keys(key, start, count):
    pulses = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix(key ^ (pulses * _STREAM + _GOLDEN))


def _np_uniform(pks, draw):
    with np.errstate(over="ignore"):
        h = _mix(pks + np.uint64(draw + 1) * _GOLDEN)
    return (h >> _S11).astype(np.float64) * _TO_UNIT


def uniforms(seed: int, pulses, draw: int) -> np.ndarray:
    """Uniform deviates in [0, 1) for the given pulse indices and draw slot."""
    key = seed_key(seed)
    pulses = np.asarray(pulses, dtype=np.uint64)
    with np.errstate(over="ignore"):
        pks = _mix(key ^ (pulses * _STREAM + _GOLDEN))
    return _np_uniform(pks, draw)


# -- WCP pulses: Poisson photons, per-photon survival, dark counts -------------
# Draw slots: 0 photon number, 1 dark count, 2 error coin, 3.. photon survival.
# Counts: [clicks, signal clicks, dark-only clicks, errors].


@_jit
def _wcp_loop(key, start, count, cdf, eta, p_dark, e0):
    out = np.zeros(4, dtype=np.int64)
    last = cdf.shape[0] - 1
    for i in range(start, start + count):
        pk = _pulse_key(key, i)
        u = _uniform(pk, 0)
        n = 0
        while n < last and u >= cdf[n]:
            n += 1
        detected = False
        for j in range(n):
            if _uniform(pk, 3 + j) < eta:
                detected = True
                break
        dark = _uniform(pk, 1) < p_dark
        if detected:
            out[0] += 1
            out[1] += 1
            if _uniform(pk, 2) < e0:
                out[3] += 1
        elif dark:
            out[0] += 1
            out[2] += 1
            if _uniform(pk, 2) < 0.5:
                out[3] += 1
    return out


def _wcp_numpy(key, start, count, cdf, eta, p_dark, e0):
    pks = _np_pulse_keys(key, start, count)
    n = np.minimum(np.searchsorted(cdf, _np_uniform(pks, 0), side="right"), cdf.shape[0] - 1)
    detected = np.zeros(count, dtype=bool)
    for j in range(int(n.max(initial=0))):
        idx = np.nonzero((n > j) & ~detected)[0]
        detected[idx] = _np_uniform(pks[idx], 3 + j) < eta
    dark = _np_uniform(pks, 1) < p_dark
    coin = _np_uniform(pks, 2)
    dark_only = dark & ~detected
    errors = (detected & (coin < e0)) | (dark_only & (coin < 0.5))
    s, d = int(detected.sum()), int(dark_only.sum())
    return np.array([s + d, s, d, int(errors.sum())], dtype=np.int64)


# -- first-order slot model (simplest protocol) --------------------------------
# Slot 0: the pulse mode reaches a live detector (prob eta); slot 1: a photon
# is present (prob mu); slot 2: dark count, only when the mode was lost.
# Counts: [clicks, signal, noise, errors]; every noise click is an error.


@_jit
def _simple_loop(key, start, count, eta, mu, p_dark):
    out = np.zeros(4, dtype=np.int64)
    for i in range(start, start + count):
        pk = _pulse_key(key, i)
        if _uniform(pk, 0) < eta:
            if _uniform(pk, 1) < mu:
                out[0] += 1
                out[1] += 1
        elif _uniform(pk, 2) < p_dark:
            out[0] += 1
            out[2] += 1
            out[3] += 1
    return out


def _simple_numpy(key, start, count, eta, mu, p_dark):
    pks = _np_pulse_keys(key, start, count)
    reached = _np_uniform(pks, 0) < eta
    signal = reached & (_np_uniform(pks, 1) < mu)
    noise = ~reached & (_np_uniform(pks, 2) < p_dark)
    s, z = int(signal.sum()), int(noise.sum())
    return np.array([s + z, s, z, z], dtype=np.int64)


# -- QC detection events -------------------------------------------------------
# Slots 0/1 as above give the signal detection (prob eta * mu); slot 2 flips
# it with prob p_noise. Each of the n_det detectors dark-fires on slot 3 + j
# and that dark event is wrong on slot 3 + n_det + j with prob 1 / n_det.
# Counts: [detection events, signal, dark events, errors].


@_jit
def _qc_loop(key, start, count, eta, mu, p_noise, p_dark, n_det):
    out = np.zeros(4, dtype=np.int64)
    wrong = 1.0 / n_det
    for i in range(start, start + count):
        pk = _pulse_key(key, i)
        if _uniform(pk, 0) < eta and _uniform(pk, 1) < mu:
            out[0] += 1
            out[1] += 1
            if _uniform(pk, 2) < p_noise:
                out[3] += 1
        for j in range(n_det):
            if _uniform(pk, 3 + j) < p_dark:
                out[0] += 1
                out[2] += 1
                if _uniform(pk, 3 + n_det + j) < wrong:
                    out[3] += 1
    return out


def _qc_numpy(key, start, count, eta, mu, p_noise, p_dark, n_det):
    pks = _np_pulse_keys(key, start, count)
    signal = (_np_uniform(pks, 0) < eta) & (_np_uniform(pks, 1) < mu)
    errors = int((signal & (_np_uniform(pks, 2) < p_noise)).sum())
    darks = 0
    wrong = 1.0 / n_det
    for j in range(n_det):
        fired = _np_uniform(pks, 3 + j) < p_dark
        darks += int(fired.sum())
        errors += int((fired & (_np_uniform(pks, 3 + n_det + j) < wrong)).sum())
    s = int(signal.sum())
    return np.array([s + darks, s, darks, errors], dtype=np.int64)


KERNELS = {
    "wcp": {"numba": _wcp_loop, "numpy": _wcp_numpy},
    "simple": {"numba": _simple_loop, "numpy": _simple_numpy},
    "qc": {"numba": _qc_loop, "numpy": _qc_numpy},
}


def run_kernel(name: str, key, start: int, count: int, *args, backend: str | None = None) -> np.ndarray:
    backend = backend or DEFAULT_BACKEND
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is unavailable or disabled")
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    return KERNELS[name][backend](key, start, count, *args)
