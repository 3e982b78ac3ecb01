"""Command-line driver: ``profiles list``, ``sweep`` and ``mc-validate``.

Exit codes: 0 success, 2 bad arguments, 3 Monte Carlo validation failure,
4 every sweep point degenerate or failed.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

from . import mcoracle
from .infomath import parse_ec_model
from .optimize import DEFAULT_BOUNDS, OptimizeDirective
from .profiles import (
    ExperimentProfile,
    builtin_profiles,
    dumps_profile,
    get_profile,
    loads_profile,
    profile_for_protocol,
    read_profile,
)
from .rates import PROTOCOLS, RatePoint, cutoff_distance, distance_grid, sweep

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_DEGENERATE = 4

COLUMNS = (
    "L_km",
    "transmittance",
    "qber",
    "mu",
    "chi",
    "rate_per_pulse_raw",
    "rate_per_pulse",
    "rate_bps",
    "status",
)

_ATTR = {c: ("L" if c == "L_km" else c) for c in COLUMNS}

_OPTIMIZE = {"none": (), "mu": ("mu",), "chi": ("chi",), "mu-chi": ("mu", "chi")}
_MC_PROTOCOLS = {"simple": "simple", "qc": "qc", "bb84-wcp": "bb84"}
MIN_PULSES = 10_000


class UsageError(Exception):
    pass


# -- number formatting -----------------------------------------------------------


def fmt(x) -> str:
    """Shortest round-trip decimal; empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    return repr(float(x))


def _parse_num(text: str):
    return None if text == "" else float(text)


# -- sweep files -----------------------------------------------------------------


def write_sweep_csv(points, request: dict) -> str:
    out = io.StringIO()
    for key, value in request.items():
        out.write(f"# {key}: {value}\n")
    out.write(",".join(COLUMNS) + "\n")
    for p in points:
        out.write(",".join(fmt(getattr(p, _ATTR[c])) for c in COLUMNS) + "\n")
    return out.getvalue()


def read_sweep_csv(text: str) -> tuple[dict, list[RatePoint]]:
    """Inverse of :func:`write_sweep_csv`: (request echo, points)."""
    request, points = {}, []
    header_seen = False
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(": ")
            request[key] = value
            continue
        if not line.strip():
            continue
        fields = line.split(",")
        if not header_seen:
            if tuple(fields) != COLUMNS:
                raise ValueError(f"unexpected columns {fields}")
            header_seen = True
            continue
        if len(fields) != len(COLUMNS):
            raise ValueError(f"expected {len(COLUMNS)} fields, got {len(fields)}: {line!r}")
        *nums, status = fields
        points.append(RatePoint(*(_parse_num(v) for v in nums), status=status))
    if not header_seen:
        raise ValueError("no column header found")
    return request, points


def write_sweep_json(points, request: dict) -> str:
    rows = [{c: _json_num(getattr(p, _ATTR[c])) for c in COLUMNS} for p in points]
    return json.dumps({"request": request, "columns": list(COLUMNS), "points": rows}, indent=1) + "\n"


def _json_num(x):
    if x is None or isinstance(x, str):
        return x
    return float(x)


def read_sweep_json(text: str) -> tuple[dict, list[RatePoint]]:
    doc = json.loads(text)
    points = [
        RatePoint(*(None if row[c] is None else float(row[c]) for c in COLUMNS[:-1]), status=row["status"])
        for row in doc["points"]
    ]
    return doc["request"], points


def read_sweep(path: str | Path) -> tuple[dict, list[RatePoint]]:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        return read_sweep_json(text)
    return read_sweep_csv(text)


# -- commands --------------------------------------------------------------------


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def profiles_table(profiles) -> str:
    head = ("name", "wavelength_nm", "alpha_dB/km", "L_c_dB", "e_0", "d_B", "eta", "n_D")
    rows = [
        (
            p.name,
            "-" if p.wavelength is None else fmt(p.wavelength),
            fmt(p.channel.alpha),
            fmt(p.channel.receiver_loss),
            fmt(p.detector.intrinsic_error),
            fmt(p.detector.dark_count),
            fmt(p.detector.efficiency),
            fmt(p.detector.num_detectors),
        )
        for p in profiles
    ]
    widths = [max(len(r[i]) for r in [head, *rows]) for i in range(len(head))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in [head, *rows]]
    return "\n".join(lines) + "\n"


def cmd_profiles_list(args) -> int:
    profiles = builtin_profiles()
    if args.format == "machine":
        _emit("\n".join(dumps_profile(p) for p in profiles), args.out)
    else:
        _emit(profiles_table(profiles), args.out)
    return EXIT_OK


def _resolve_profile(selector: str, params: str | None) -> ExperimentProfile:
    try:
        profile = get_profile(selector)
    except KeyError:
        path = Path(selector)
        if not path.is_file():
            names = ", ".join(p.name for p in builtin_profiles())
            raise UsageError(f"unknown profile {selector!r} (not a builtin: {names}; not a file)")
        profile = read_profile(path)
    if params:
        # Keys in the params file override the chosen profile.
        overrides = Path(params).read_text(encoding="utf-8")
        profile = loads_profile(_merge_override(dumps_profile(profile) + overrides))
    return profile


def _merge_override(text: str) -> str:
    # Later keys win: keep the last occurrence of each key.
    seen = {}
    for ln in text.splitlines():
        s = ln.strip()
        if not s or s.startswith("#"):
            continue
        key = s.partition("=")[0].strip()
        seen[key] = s
    return "\n".join(seen.values()) + "\n"


def _one_line(profile: ExperimentProfile) -> str:
    return dumps_profile(profile).strip().replace("\n", " ")


def _directive(args) -> OptimizeDirective | None:
    variables = _OPTIMIZE[args.optimize]
    if not variables:
        return None
    return OptimizeDirective(variables, dict(DEFAULT_BOUNDS), args.tol, args.max_evals)


def cmd_sweep(args) -> int:
    if args.protocol not in PROTOCOLS:
        raise UsageError(f"unknown protocol {args.protocol!r}; known: {', '.join(PROTOCOLS)}")
    profile = _resolve_profile(args.profile, args.params)
    try:
        ec = parse_ec_model(args.ec)
        distances = distance_grid(args.l_min, args.l_max, args.l_step)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    directive = _directive(args)
    mu = args.mu
    if mu is None and args.protocol != "bbm92-arbitrary":
        mu = 0.1
    points = sweep(
        args.protocol,
        profile,
        distances,
        ec=ec,
        directive=directive,
        mu=mu,
        chi=args.chi,
        q_threshold=args.qt,
        workers=args.workers,
    )
    request = {
        "protocol": args.protocol,
        "profile": _one_line(profile_for_protocol(profile, PROTOCOLS[args.protocol].family)),
        "grid_km": f"{fmt(args.l_min)}:{fmt(args.l_max)}:{fmt(args.l_step)}",
        "optimize": "none" if directive is None else directive.describe(),
        "mu": "distance-rule" if mu is None else fmt(mu),
        "chi": fmt(args.chi),
        "qt": fmt(args.qt),
        "ec": args.ec,
        "cutoff_km": fmt(cutoff_distance(points)),
    }
    text = write_sweep_json(points, request) if args.format == "json" else write_sweep_csv(points, request)
    _emit(text, args.out)
    if not any(p.ok for p in points):
        print("error: every point is degenerate or failed", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


def _mc_models(selector: str) -> list[str]:
    names = [s.strip() for s in selector.split(",") if s.strip()]
    if not names:
        raise UsageError("empty --protocol list")
    unknown = [n for n in names if n not in _MC_PROTOCOLS]
    if unknown:
        raise UsageError(f"mc-validate supports {', '.join(_MC_PROTOCOLS)}; got {', '.join(unknown)}")
    return [_MC_PROTOCOLS[n] for n in names]


def mc_report(passed: bool, rows, pulses: int, seed: int, allowed: int) -> str:
    out = io.StringIO()
    out.write(f"# pulses: {pulses}\n# seed: {seed}\n# sigma: 3\n")
    out.write(
        "model,case,mu,L_km,click_expected,click_observed,click_z,"
        "error_expected,error_observed,error_z,within_3sigma\n"
    )
    by_model: dict[str, list] = {}
    for r in rows:
        by_model.setdefault(r.model, []).append(r)
    for model, items in by_model.items():
        for k, r in enumerate(items):
            out.write(
                ",".join(
                    [
                        model,
                        str(k),
                        fmt(r.config.mu),
                        fmt(r.config.L),
                        fmt(r.click_expected),
                        fmt(r.estimate.click_rate),
                        f"{r.click_z:+.3f}",
                        fmt(r.error_expected),
                        fmt(r.estimate.error_rate),
                        f"{r.error_z:+.3f}",
                        "yes" if r.ok else "no",
                    ]
                )
                + "\n"
            )
    for model, items in by_model.items():
        bad = sum(not r.ok for r in items)
        verdict = "PASS" if bad <= allowed else "FAIL"
        out.write(f"# {model}: {len(items) - bad}/{len(items)} within 3 sigma {verdict}\n")
    out.write(f"# overall: {'PASS' if passed else 'FAIL'}\n")
    return out.getvalue()


def cmd_mc_validate(args) -> int:
    models = _mc_models(args.protocol)
    if args.pulses < MIN_PULSES:
        raise UsageError(f"--pulses must be >= {MIN_PULSES}")
    if args.configs < 1:
        raise UsageError("--configs must be >= 1")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must be an unsigned 64-bit integer")
    allowed = max(args.configs // 20, 1) if args.configs >= 20 else 0
    passed, rows = mcoracle.validate(
        models,
        pulses=args.pulses,
        seed=args.seed,
        configs=args.configs,
        allowed_failures=allowed,
        workers=args.workers,
    )
    _emit(mc_report(passed, rows, args.pulses, args.seed, allowed), args.out)
    return EXIT_OK if passed else EXIT_VALIDATION


# -- argument parsing --------------------------------------------------------------


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _finite(text):
    v = float(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError("must be finite")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qkdopt", description="QKD secret key rate sweeps and checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    prof = sub.add_parser("profiles", help="builtin experiment profiles")
    prof_sub = prof.add_subparsers(dest="action", required=True)
    plist = prof_sub.add_parser("list", help="list builtin profiles")
    plist.add_argument("--format", choices=("text", "machine"), default="text")
    plist.add_argument("--out")
    plist.set_defaults(func=cmd_profiles_list)

    sw = sub.add_parser("sweep", help="key rate versus distance")
    sw.add_argument("--protocol", required=True, help=", ".join(PROTOCOLS))
    sw.add_argument("--profile", required=True, help="builtin name or profile file")
    sw.add_argument("--params", help="key=value file overriding profile fields")
    sw.add_argument("--l-min", type=_finite, default=0.0)
    sw.add_argument("--l-max", type=_finite, default=200.0)
    sw.add_argument("--l-step", type=_finite, default=1.0)
    sw.add_argument("--optimize", choices=tuple(_OPTIMIZE), default="none")
    sw.add_argument("--mu", type=_finite, default=None, help="mean photon number (default 0.1)")
    sw.add_argument("--chi", type=_finite, default=0.1)
    sw.add_argument("--qt", type=_finite, default=0.04, help="threshold QBER for the simple protocol")
    sw.add_argument("--ec", default="cascade", help="shannon | const:<v> | cascade")
    sw.add_argument("--tol", type=_finite, default=1e-7, help="optimizer tolerance")
    sw.add_argument("--max-evals", type=_positive_int, default=500)
    sw.add_argument("--format", choices=("csv", "json"), default="csv")
    sw.add_argument("--out")
    sw.add_argument("--workers", type=_positive_int, default=1)
    sw.set_defaults(func=cmd_sweep)

    mc = sub.add_parser("mc-validate", help="Monte Carlo check of the analytic click models")
    mc.add_argument("--protocol", default="simple,qc,bb84-wcp", help="comma list of simple, qc, bb84-wcp")
    mc.add_argument("--pulses", type=int, default=1_000_000)
    mc.add_argument("--seed", type=int, default=42)
    mc.add_argument("--configs", type=int, default=20)
    mc.add_argument("--workers", type=_positive_int, default=1)
    mc.add_argument("--out")
    mc.set_defaults(func=cmd_mc_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
