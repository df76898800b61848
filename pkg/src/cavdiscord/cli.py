"""Command-line entry point.

Exit codes: 0 success, 1 a verification check failed, 2 invalid usage or
configuration, 3 I/O failure. Every option can also come from a flat JSON
config file (``--config``); command-line flags win over the file, which wins
over built-in defaults. Times are scaled times ``omega_eff * t`` and decay
rates are given as ``gamma / omega_eff``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .dynamics import (
    DEFAULT_DISCORD_THRESHOLD,
    DISCORD_MODES,
    DegenerateOnsetError,
    TimeGrid,
    detect_death_intervals,
    emit_csv,
    esd_onset,
    long_time_limits,
    sweep_gamma,
    time_series,
)
from .lindblad import FockSpace, IntegratorConfig, verify_against_analytic
from .measures import discord_bell_diagonal, discord_numeric
from .model import (
    Family,
    PhysicalParams,
    SingleAtomInit,
    WernerSpec,
    correlation_vector,
    dephase_both,
    werner_initial,
)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

LINDBLAD_TOLERANCE = 1e-3
DISCORD_CHECK_TOLERANCE = 1e-5
ARGMIN_TOLERANCE_DEG = 2.0

DISCORD_FORMULA_NOTICE = (
    "Closed-form discord of Bell-diagonal states is computed as "
    "D = (1/4) sum_k u_k log2 u_k - [(1-d)/2 log2(1-d) + (1+d)/2 log2(1+d)], "
    "d = max|d_i|. A frequently printed variant whose last terms read "
    "-(1-d)/2 log2((1-d)/2) - (1+d)/2 log2((1+d)/2) gives discord 1 for the "
    "maximally mixed state and is not used."
)
DISCORD_DEATH_NOTICE = (
    "For p > 0 the model discord is strictly positive at every finite time; "
    "discord death intervals are crossings of discord_death, not exact zeros."
)

# built-in defaults, keyed by config-file name
COMMON_DEFAULTS = {
    "alpha_re": 0.5,
    "alpha_im": 0.0,
    "gamma_over_omega": 0.01,
    "family": "phi",
    "t_max_omega": 20.0,
    "steps": 2000,
}
COMMAND_DEFAULTS: dict[str, dict[str, Any]] = {
    "dynamics": {
        **COMMON_DEFAULTS,
        "p": None,
        "discord_mode": "closed-form",
        "discord_death": DEFAULT_DISCORD_THRESHOLD,
        "output_path": "dynamics.csv",
    },
    "verify-lindblad": {
        "alpha_re": 1.0,
        "alpha_im": 0.0,
        "gamma_over_omega": 0.01,
        "n_max": 16,
        "dt": 0.002,
        "t_max_omega": 10.0,
    },
    "discord-check": {"p_points": 11, "fsq_points": 20},
    "limits": {
        "p": None,
        "alpha_re": 0.5,
        "alpha_im": 0.0,
        "gamma_over_omega": 0.01,
        "family": "phi",
    },
    "sweep": {
        **COMMON_DEFAULTS,
        "p": 0.8,
        "alpha_re": 1.0,
        "gamma_min": 1e-3,
        "gamma_max": 1.0,
        "gamma_points": 101,
        "gammas": None,
        "output_path": "sweep.csv",
    },
}


class UsageError(Exception):
    pass


def _add_common(sp: argparse.ArgumentParser, names: Sequence[str]) -> None:
    flags = {
        "p": (["--p"], dict(type=float, help="Werner purity p in [0, 1]")),
        "alpha_re": (
            ["--alpha", "--alpha-re"],
            dict(type=float, dest="alpha_re", help="real part of the coherent amplitude"),
        ),
        "alpha_im": (["--alpha-im"], dict(type=float, help="imaginary part of alpha")),
        "gamma_over_omega": (
            ["--gamma-over-omega"],
            dict(type=float, help="cavity decay rate in units of omega_eff"),
        ),
        "family": (["--family"], dict(choices=["phi", "psi"], help="Werner family")),
        "t_max_omega": (
            ["--t-max"],
            dict(type=float, dest="t_max_omega", help="final scaled time"),
        ),
        "steps": (["--steps"], dict(type=int, help="number of time intervals")),
        "output_path": (["--out"], dict(dest="output_path", help="output CSV path")),
    }
    for name in names:
        opts, kw = flags[name]
        sp.add_argument(*opts, default=None, **kw)
    sp.add_argument("--config", help="flat JSON file with option values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavdiscord",
        description="Discord and concurrence of two atoms in lossy dispersive cavities.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("dynamics", help="time series CSV plus JSON metadata")
    _add_common(
        sp,
        ["p", "alpha_re", "alpha_im", "gamma_over_omega", "family", "t_max_omega", "steps", "output_path"],
    )
    sp.add_argument("--discord-mode", choices=DISCORD_MODES, default=None)
    sp.add_argument(
        "--discord-threshold", type=float, dest="discord_death", default=None,
        help="discord death threshold (bits)",
    )

    sp = sub.add_parser("verify-lindblad", help="check f(t) against the master equation")
    _add_common(sp, ["alpha_re", "alpha_im", "gamma_over_omega", "t_max_omega"])
    sp.add_argument("--n-max", type=int, default=None, help="highest Fock number kept")
    sp.add_argument("--dt", type=float, default=None, help="RK4 step in scaled time")

    sp = sub.add_parser("discord-check", help="closed-form discord vs numerical minimiser")
    sp.add_argument("--grid", type=int, default=None, help="points per axis (shorthand)")
    sp.add_argument("--p-points", type=int, default=None)
    sp.add_argument("--fsq-points", type=int, default=None)
    sp.add_argument("--config", help="flat JSON file with option values")

    sp = sub.add_parser("limits", help="long-time discord and concurrence")
    _add_common(sp, ["p", "alpha_re", "alpha_im", "gamma_over_omega", "family"])

    sp = sub.add_parser("sweep", help="discord over decay rate and time")
    _add_common(
        sp, ["p", "alpha_re", "alpha_im", "family", "t_max_omega", "steps", "output_path"]
    )
    sp.add_argument("--gamma-min", type=float, default=None)
    sp.add_argument("--gamma-max", type=float, default=None)
    sp.add_argument("--gamma-points", type=int, default=None)
    sp.add_argument(
        "--gammas", default=None, help="explicit comma-separated gamma/omega values"
    )
    return parser


def _load_config(path: Optional[str]) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold a flat JSON object")
    return data


def resolve_config(command: str, args: argparse.Namespace) -> dict[str, Any]:
    """Merge built-in defaults, the config file and command-line flags."""
    defaults = COMMAND_DEFAULTS[command]
    config = dict(defaults)
    file_values = _load_config(getattr(args, "config", None))
    unknown = sorted(set(file_values) - set(defaults))
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
    config.update(file_values)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    if command == "discord-check" and getattr(args, "grid", None) is not None:
        config["p_points"] = config["fsq_points"] = args.grid
    if "p" in config and config["p"] is None:
        raise UsageError("missing required option --p")
    return config


def _alpha(cfg) -> complex:
    return complex(float(cfg["alpha_re"]), float(cfg["alpha_im"]))


def _grid(cfg) -> TimeGrid:
    steps = int(cfg["steps"])
    if steps < 2:
        raise UsageError("--steps must be at least 2")
    return TimeGrid(float(cfg["t_max_omega"]), steps)


def _event_json(e) -> dict:
    return {"t_start": e.t_start, "t_end": e.t_end, "threshold": e.threshold}


def _metadata_path(out: Path) -> Path:
    return out.with_name(out.stem + ".meta.json")


def _write_json(path: Path, data: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_dynamics(cfg: dict) -> int:
    spec = WernerSpec(float(cfg["p"]), Family.parse(cfg["family"]))
    params = PhysicalParams.scaled(float(cfg["gamma_over_omega"]), _alpha(cfg))
    grid = _grid(cfg)
    mode = cfg["discord_mode"]
    if mode not in DISCORD_MODES:
        raise UsageError(f"discord_mode must be one of {DISCORD_MODES}")
    threshold = float(cfg["discord_death"])
    if threshold <= 0:
        raise UsageError("discord death threshold must be positive")
    out = Path(cfg["output_path"])

    series = time_series(spec, params, grid, discord_mode=mode)
    conc_events = detect_death_intervals(series, "concurrence", 0.0)
    disc_events = detect_death_intervals(series, "discord", threshold)
    asymptotic = None
    if params.gamma > 0:
        lim = long_time_limits(spec, params)
        asymptotic = {
            "f_sq": lim.f_sq,
            "discord": lim.discord,
            "concurrence": lim.concurrence,
            "larger": lim.larger,
        }
    try:
        onset: Any = esd_onset(spec.p, params)
    except DegenerateOnsetError:
        onset = "degenerate"
    meta = {
        "artifact": "cavdiscord",
        "version": __version__,
        "command": "dynamics",
        "parameters": cfg,
        "thresholds": {"discord_death": threshold, "concurrence": 0.0},
        "death_events": {
            "concurrence": [_event_json(e) for e in conc_events],
            "discord": [_event_json(e) for e in disc_events],
        },
        "esd_onset_omega_t": onset,
        "asymptotic": asymptotic,
        "discord_formula_notice": DISCORD_FORMULA_NOTICE,
        "discord_death_notice": DISCORD_DEATH_NOTICE,
    }
    if mode == "both":
        gap = max(abs(r.discord - r.discord_numeric) for r in series)
        meta["max_closed_form_numeric_gap"] = gap
    emit_csv(series, out)
    _write_json(_metadata_path(out), meta)
    print(f"wrote {len(series)} rows to {out}")
    print(
        f"concurrence death intervals: {len(conc_events)}; "
        f"discord below {threshold:g}: {len(disc_events)}"
    )
    return EXIT_OK


def cmd_verify_lindblad(cfg: dict) -> int:
    alpha = _alpha(cfg)
    params = PhysicalParams.scaled(float(cfg["gamma_over_omega"]), alpha)
    fock = FockSpace(int(cfg["n_max"]))
    icfg = IntegratorConfig(float(cfg["dt"]))
    fock.check_truncation(alpha)
    icfg.check_step(fock)
    init = SingleAtomInit(0.5, 0.5, 0.5)
    res = verify_against_analytic(
        init, alpha, params, float(cfg["t_max_omega"]), icfg, fock
    )
    ok = res.max_deviation <= LINDBLAD_TOLERANCE
    print(f"max |rho_eg - zeta_c f(t)|: {res.max_deviation:.3e}")
    print(f"max population drift:      {res.max_population_drift:.3e}")
    print(f"max trace error:           {res.max_trace_error:.3e}")
    print(f"{'PASS' if ok else 'FAIL'} (tolerance {LINDBLAD_TOLERANCE:g})")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def discord_check(p_points: int, fsq_points: int):
    """Worst closed-form/minimiser discord gap and worst argmin misalignment
    (degrees) over a (p, |f|^2) grid for both Werner families."""
    worst_gap = 0.0
    worst_angle = 0.0
    for family in Family:
        for p in np.linspace(0.0, 1.0, p_points):
            for fsq in np.linspace(0.05, 1.0, fsq_points):
                spec = WernerSpec(float(p), family)
                rho = dephase_both(werner_initial(spec), math.sqrt(fsq))
                d = correlation_vector(rho)
                report = discord_numeric(rho)
                worst_gap = max(worst_gap, abs(discord_bell_diagonal(d) - report.discord))
                mags = sorted(np.abs(d.as_tuple()))
                if mags[2] - mags[1] > 0.05:
                    axis = np.zeros(3)
                    axis[d.max_axis()] = 1.0
                    cos = min(1.0, abs(float(report.argmin_measurement.direction @ axis)))
                    worst_angle = max(worst_angle, math.degrees(math.acos(cos)))
    return worst_gap, worst_angle


def cmd_discord_check(cfg: dict) -> int:
    n_p, n_f = int(cfg["p_points"]), int(cfg["fsq_points"])
    if n_p < 1 or n_f < 1:
        raise UsageError("grid sizes must be positive")
    gap, angle = discord_check(n_p, n_f)
    ok = gap <= DISCORD_CHECK_TOLERANCE
    print(f"grid: {n_p} x {n_f} (p x |f|^2), both families")
    print(f"worst |closed form - minimiser|: {gap:.3e}")
    print(
        f"worst argmin misalignment: {angle:.3f} deg "
        f"({'ok' if angle <= ARGMIN_TOLERANCE_DEG else 'off-axis'})"
    )
    print(f"{'PASS' if ok else 'FAIL'} (tolerance {DISCORD_CHECK_TOLERANCE:g})")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_limits(cfg: dict) -> int:
    spec = WernerSpec(float(cfg["p"]), Family.parse(cfg["family"]))
    params = PhysicalParams.scaled(float(cfg["gamma_over_omega"]), _alpha(cfg))
    if params.gamma == 0:
        raise UsageError("long-time limits need gamma/omega > 0")
    lim = long_time_limits(spec, params)
    print(f"|f(inf)|^2:             {lim.f_sq:.12g}")
    print(f"long-time discord:      {lim.discord:.12g}")
    print(f"long-time concurrence:  {lim.concurrence:.12g}")
    print(f"larger: {lim.larger}")
    return EXIT_OK


def _gamma_grid(cfg) -> np.ndarray:
    if cfg["gammas"] is not None:
        raw = cfg["gammas"]
        if isinstance(raw, str):
            items = [s for s in raw.split(",") if s.strip()]
            try:
                values = [float(s) for s in items]
            except ValueError as exc:
                raise UsageError(f"bad --gammas value: {exc}") from exc
        else:
            values = [float(x) for x in raw]
        gammas = np.asarray(values, dtype=float)
    else:
        n = int(cfg["gamma_points"])
        lo, hi = float(cfg["gamma_min"]), float(cfg["gamma_max"])
        if n < 1:
            gammas = np.empty(0)
        elif not 0 < lo <= hi:
            raise UsageError("need 0 < gamma_min <= gamma_max for a log grid")
        else:
            gammas = np.geomspace(lo, hi, n)
    if gammas.size == 0:
        raise UsageError("the gamma/omega grid is empty")
    if np.any(gammas < 0):
        raise UsageError("gamma/omega values must be non-negative")
    return gammas


def cmd_sweep(cfg: dict) -> int:
    spec = WernerSpec(float(cfg["p"]), Family.parse(cfg["family"]))
    gammas = _gamma_grid(cfg)
    out = Path(cfg["output_path"])
    result = sweep_gamma(spec, _alpha(cfg), gammas, _grid(cfg))
    emit_csv(result, out)
    print(f"wrote {gammas.size} x {result.omega_t.size} discord matrix to {out}")
    return EXIT_OK


COMMANDS = {
    "dynamics": cmd_dynamics,
    "verify-lindblad": cmd_verify_lindblad,
    "discord-check": cmd_discord_check,
    "limits": cmd_limits,
    "sweep": cmd_sweep,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args.command, args)
        return COMMANDS[args.command](cfg)
    except (UsageError, ValueError, TypeError, KeyError) as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
