"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line."""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from qkdopt import cli, decoy
from qkdopt.infomath import CascadeCubic, binary_entropy, conditional_entropy, ec_cost
from qkdopt.mcoracle import MODELS, validate
from qkdopt.optimize import OptimizeDirective, maximize_scalar
from qkdopt.profiles import ChannelParams, DetectorParams, ExperimentProfile, builtin_profiles, get_profile, transmittance
from qkdopt.qubitalg import (
    apply_local,
    depolarizing_qber,
    filter_op,
    multiphoton_state,
    rotation_ops,
    schmidt_coefficients,
)
from qkdopt.rates import PROTOCOLS, cutoff_distance, distance_grid, simple_qber, sweep
from qkdopt.sources import SpdcSource, WcpSource, poisson_pmf, poisson_terms, spdc_pair_pmf

EC = CascadeCubic()


def test_criterion_1_sarg04_range(criterion):
    with criterion("[1] SARG04 four-state cutoff: GYS < 150 km, TANG > 200 km, 1 km grid to 300 km in < 5 s"):
        grid = distance_grid(0, 300, 1)
        t0 = time.perf_counter()
        gys = cutoff_distance(sweep("sarg04-4", get_profile("GYS"), grid, ec=EC, mu=0.1))
        tang = cutoff_distance(sweep("sarg04-4", get_profile("TANG"), grid, ec=EC, mu=0.1))
        elapsed = time.perf_counter() - t0
        print(f"GYS cutoff {gys} km, TANG cutoff {tang} km, {elapsed:.3f} s")
        assert gys is not None and gys < 150
        assert tang is not None and tang > 200
        assert elapsed < 5.0


def test_criterion_2_mdi_ordering(criterion):
    with criterion("[2] MDI SARG04: TANG cutoff exceeds GYS cutoff by >= 50 km for Type 1 and Type 2"):
        grid = distance_grid(0, 700, 1)
        for proto in ("mdi-sarg04-t1", "mdi-sarg04-t2"):
            gys = cutoff_distance(sweep(proto, get_profile("GYS"), grid, ec=EC, mu=0.1))
            tang = cutoff_distance(sweep(proto, get_profile("TANG"), grid, ec=EC, mu=0.1))
            print(f"{proto}: GYS {gys} km, TANG {tang} km")
            assert gys is not None and tang is not None
            assert tang < grid[-1]
            assert tang - gys >= 50


def test_criterion_3_spot_values(criterion):
    with criterion("[3] analytic spot values"):
        assert abs(binary_entropy(0.5) - 1.0) <= 1e-12
        assert abs(ec_cost(EC, 0.0) - 1.1581) <= 1e-12
        assert abs(transmittance(ChannelParams(0.2), 50.0) - 0.1) <= 1e-12
        assert abs(poisson_pmf(WcpSource(0.1), 0) - 0.904837) <= 1e-6
        assert abs(spdc_pair_pmf(SpdcSource(0.1), 0) - 0.990066) <= 1e-6
        fig1 = ExperimentProfile("fig1", ChannelParams(0.2), DetectorParams(0.25, 1e-4))
        assert abs(simple_qber(fig1, 0.1, 50.0) - 0.037536) <= 1e-6
        gys = get_profile("GYS")
        y1 = decoy.sarg04_yields("four_state", gys.detector, gys.channel, 0.0, 2).yields[1]
        assert abs(y1 - 0.0119930) <= 1e-6


def test_criterion_4_conditional_entropy_collapse(criterion):
    with criterion("[4] H(e_p|e_b) with a = e_b e_p equals h2(e_p); fully correlated gives 0"):
        rng = np.random.default_rng(20240601)
        pairs = rng.uniform(0.0, 0.5, size=(100, 2))
        pairs = np.clip(pairs, 1e-12, 0.5 - 1e-12)
        worst = max(abs(conditional_entropy(b, p, b * p) - binary_entropy(p)) for b, p in pairs)
        print(f"max deviation {worst:.3e}")
        assert worst <= 1e-10
        for e in (0.01, 0.1, 0.25, 0.5):
            assert conditional_entropy(e, e, e) == 0.0


def test_criterion_5_monte_carlo_agreement(criterion):
    with criterion("[5] Monte Carlo agreement: >= 19/20 configs within 3 sigma at 1e6 pulses, < 60 s"):
        t0 = time.perf_counter()
        passed, rows = validate(MODELS, pulses=1_000_000, seed=42, configs=20, allowed_failures=1)
        elapsed = time.perf_counter() - t0
        for model in MODELS:
            mine = [r for r in rows if r.model == model]
            good = sum(r.ok for r in mine)
            print(f"{model}: {good}/{len(mine)} within 3 sigma")
            assert len(mine) == 20 and good >= 19
        print(f"{elapsed:.2f} s")
        assert passed
        assert elapsed < 60.0


def test_criterion_6_optimizer_dominance(criterion):
    with criterion("[6] optimized sweep >= fixed sweep at every point; golden section finds argmax of mu e^-mu"):
        grid = distance_grid(0, 300, 10)
        checked = 0
        for name, proto in PROTOCOLS.items():
            if not proto.variables:
                continue
            directive = OptimizeDirective(proto.variables)
            for prof in builtin_profiles():
                fixed = sweep(name, prof, grid, ec=EC, mu=None if name == "bbm92-arbitrary" else 0.1, chi=0.1)
                best = sweep(name, prof, grid, ec=EC, directive=directive, mu=None if name == "bbm92-arbitrary" else 0.1, chi=0.1)
                for f, o in zip(fixed, best):
                    assert f.ok and o.ok, (name, prof.name, f.L)
                    assert o.rate_per_pulse_raw >= f.rate_per_pulse_raw, (name, prof.name, f.L)
                    checked += 1
        print(f"{checked} grid points compared")
        r = maximize_scalar(lambda m: m * math.exp(-m), (0.0, 5.0), tol=1e-9, method="golden")
        assert abs(r.x - 1.0) <= 1e-6


def test_criterion_7_qubit_algebra(criterion):
    with criterion("[7] qubit algebra: unitary rotations, filter success 1/4, maximal entanglement, depolarizing QBER"):
        eye = np.eye(2)
        for U in rotation_ops():
            assert np.max(np.abs(U @ U.conj().T - eye)) <= 1e-14
        out = apply_local(multiphoton_state(1), filter_op(), [1])
        p = np.vdot(out, out).real
        assert abs(p - 0.25) <= 1e-12
        sq = schmidt_coefficients(out / math.sqrt(p)) ** 2
        assert np.max(np.abs(sq - 0.5)) <= 1e-12
        for D in np.linspace(0.0, 1.0, 21):
            assert depolarizing_qber("bb84", D) == D
            assert depolarizing_qber("sarg04", D) == D / (0.5 + D)


def test_criterion_8_decoy_consistency(criterion):
    with criterion("[8] decoy totals equal independent sums to 1e-12 on a 10-point (mu, L) grid"):
        gys = get_profile("GYS")
        cases = list(zip([0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1.2, 1.6, 2.0], [0, 10, 25, 50, 75, 100, 150, 200, 250, 300]))
        for mu, L in cases:
            n_max = len(poisson_terms(mu)) - 1
            table = decoy.sarg04_yields("four_state", gys.detector, gys.channel, float(L), n_max)
            est = decoy.decoy_totals(mu, table)
            q_n = [math.exp(-mu) * mu**n / math.factorial(n) * float(y) for n, y in enumerate(table.yields)]
            q_mu = math.fsum(q_n)
            e_mu = math.fsum(q * float(e) for q, e in zip(q_n, table.bit_errors)) / q_mu
            assert abs(est.total_gain - q_mu) <= 1e-12
            assert abs(est.total_error - e_mu) <= 1e-12


def _cli_bytes(tmp_path, name, argv):
    path = tmp_path / name
    code = cli.main([*argv, "--out", str(path)])
    assert code == 0
    return path.read_bytes()


def test_criterion_9_determinism(criterion, tmp_path):
    with criterion("[9] sweep and mc-validate output byte-identical across runs and serial vs parallel"):
        sw = ["sweep", "--protocol", "bb84-wcp", "--profile", "KTH15", "--l-max", "150", "--l-step", "5", "--optimize", "mu"]
        a = _cli_bytes(tmp_path, "a.csv", sw)
        b = _cli_bytes(tmp_path, "b.csv", sw)
        c = _cli_bytes(tmp_path, "c.csv", [*sw, "--workers", "4"])
        assert a == b == c
        mc = ["mc-validate", "--pulses", "200000", "--seed", "7"]
        d = _cli_bytes(tmp_path, "d.txt", mc)
        e = _cli_bytes(tmp_path, "e.txt", [*mc, "--workers", "4"])
        assert d == e
        # A fresh interpreter produces the same bytes.
        out = subprocess.run(
            [sys.executable, "-m", "qkdopt", *sw, "--workers", "2"], capture_output=True, check=True
        ).stdout
        assert out == a
