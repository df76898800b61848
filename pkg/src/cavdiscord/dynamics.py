"""Time series of discord and concurrence, death-interval detection, the
first entanglement sudden-death time, decay-rate sweeps and CSV output.

Times are scaled times ``omega_eff * t`` throughout this module.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .measures import (
    bell_diagonal_information,
    concurrence_model,
    concurrence_xstate,
    discord_bell_diagonal,
    discord_numeric,
)
from .model import (
    PhysicalParams,
    WernerSpec,
    asymptotic_magnitude_sq,
    correlation_vector,
    decoherence_factor,
    decoherence_factor_array,
    dephase_both,
    model_correlation_vector,
    werner_initial,
)

DEFAULT_DISCORD_THRESHOLD = 1e-3
DISCORD_MODES = ("closed-form", "numeric", "both")
TIME_SERIES_HEADER = (
    "omega_t",
    "f_sq",
    "discord",
    "classical_corr",
    "mutual_info",
    "concurrence",
)
CSV_DIGITS = 12
BISECTION_TOL = 1e-12
ESD_SCAN_STEP = 1e-3
ESD_TOL = 1e-10
# e^{-2 gamma t} below this counts as the asymptotic regime for root scans
ASYMPTOTIC_DAMPING = 1e-12


class DegenerateOnsetError(ValueError):
    """Raised when the state is never entangled, so no onset time exists."""


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of ``steps + 1`` scaled times on ``[0, t_max]``."""

    t_max: float = 20.0
    steps: int = 2000

    def __post_init__(self):
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if self.steps < 1:
            raise ValueError("a time grid needs at least two points")

    def points(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.steps + 1)


@dataclass(frozen=True)
class TimeSeriesRow:
    omega_t: float
    f_sq: float
    discord: float
    classical_corr: float
    mutual_info: float
    concurrence: float
    discord_numeric: Optional[float] = None


@dataclass
class TimeSeries:
    """Rows of a run together with the inputs that produced them."""

    spec: WernerSpec
    params: PhysicalParams
    rows: list[TimeSeriesRow] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, i):
        return self.rows[i]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)


@dataclass(frozen=True)
class DeathEvent:
    quantity: str
    t_start: float
    t_end: Optional[float]  # None: still dead at the end of the series
    threshold: float

    @property
    def closed(self) -> bool:
        return self.t_end is not None


def _time(params: PhysicalParams, omega_t: float) -> float:
    return omega_t / params.omega_eff


def _row(spec: WernerSpec, params: PhysicalParams, omega_t: float, mode: str) -> TimeSeriesRow:
    f = decoherence_factor(params, _time(params, omega_t))
    rho = dephase_both(werner_initial(spec), f)
    mutual, classical = bell_diagonal_information(correlation_vector(rho))
    row = dict(
        omega_t=float(omega_t),
        f_sq=abs(f) ** 2,
        discord=mutual - classical,
        classical_corr=classical,
        mutual_info=mutual,
        concurrence=concurrence_xstate(rho),
    )
    if mode != "closed-form":
        report = discord_numeric(rho)
        if mode == "numeric":
            row.update(
                discord=report.discord,
                classical_corr=report.classical_corr,
                mutual_info=report.mutual_info,
            )
        else:
            row["discord_numeric"] = report.discord
    return TimeSeriesRow(**row)


def time_series(
    spec: WernerSpec,
    params: PhysicalParams,
    grid: TimeGrid,
    discord_mode: str = "closed-form",
) -> TimeSeries:
    """Correlation quantities on every grid point.

    ``discord_mode`` selects the closed form (default), the numerical
    minimiser (``"numeric"``), or the closed form plus a numerical
    cross-check column (``"both"``).
    """
    if discord_mode not in DISCORD_MODES:
        raise ValueError(f"discord_mode must be one of {DISCORD_MODES}")
    rows = [_row(spec, params, t, discord_mode) for t in grid.points()]
    return TimeSeries(spec, params, rows)


def model_discord(spec: WernerSpec, fsq: float) -> float:
    return discord_bell_diagonal(model_correlation_vector(spec, min(fsq, 1.0)))


def concurrence_margin(spec: WernerSpec, fsq: float) -> float:
    """``p |f|^2 - (1 - p)/2``: positive exactly when the atoms are entangled."""
    return spec.p * fsq - (1 - spec.p) / 2


def _bisect(fn: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Root of ``fn`` in ``[lo, hi]`` given a sign change, to width ``tol``."""
    lo, hi = float(lo), float(hi)
    f_lo = fn(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return float(0.5 * (lo + hi))


def _margin_fn(series: TimeSeries, quantity: str, threshold: float):
    spec, params = series.spec, series.params

    def fsq(omega_t):
        return abs(decoherence_factor(params, _time(params, omega_t))) ** 2

    if quantity == "concurrence":
        return lambda s: concurrence_margin(spec, fsq(s)) - threshold
    return lambda s: model_discord(spec, fsq(s)) - threshold


def detect_death_intervals(
    series: TimeSeries, quantity: str, threshold: float
) -> list[DeathEvent]:
    """Maximal intervals on which ``quantity`` sits below ``threshold``.

    Concurrence may use ``threshold = 0``, meaning exactly zero. Discord
    never vanishes exactly for ``p > 0``, so it needs a positive threshold.
    Interval ends are refined by bisection on the analytic expressions, so
    they do not depend on the grid spacing.
    """
    if quantity not in ("concurrence", "discord"):
        raise ValueError(f"unknown quantity {quantity!r}")
    if quantity == "discord" and threshold <= 0:
        raise ValueError("discord death needs a positive threshold")
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    times = series.column("omega_t")
    values = series.column(quantity)
    dead = values <= 0.0 if threshold == 0 else values < threshold
    margin = _margin_fn(series, quantity, threshold)

    events = []
    k, n = 0, len(values)
    while k < n:
        if not dead[k]:
            k += 1
            continue
        j = k
        while j + 1 < n and dead[j + 1]:
            j += 1
        start = (
            float(times[0])
            if k == 0
            else _bisect(margin, times[k - 1], times[k], BISECTION_TOL)
        )
        end = (
            None
            if j == n - 1
            else _bisect(margin, times[j], times[j + 1], BISECTION_TOL)
        )
        events.append(DeathEvent(quantity, start, end, threshold))
        k = j + 1
    return events


def _scan_horizon(params: PhysicalParams) -> float:
    if params.gamma == 0:
        return math.pi  # |f|^2 has period pi in scaled time
    decay_time = math.log(1.0 / ASYMPTOTIC_DAMPING) / (2.0 * params.gamma_over_omega)
    return max(math.pi, decay_time)


def esd_onset(
    p: float,
    params: PhysicalParams,
    *,
    scan_step: float = ESD_SCAN_STEP,
    tol: float = ESD_TOL,
) -> Optional[float]:
    """First scaled time at which the concurrence reaches zero.

    Scans ``p|f|^2 - (1-p)/2`` for a sign change on a ``scan_step`` grid up to
    the asymptotic regime, then bisects to ``tol``. Returns ``None`` if the
    state stays entangled.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if 3 * p <= 1:
        raise DegenerateOnsetError(
            f"p={p} <= 1/3: the state is never entangled, onset is t = 0"
        )
    spec = WernerSpec(p)
    horizon = _scan_horizon(params)
    n_total = int(math.ceil(horizon / scan_step))
    chunk = 200_000
    prev_t = 0.0
    for first in range(1, n_total + 1, chunk):
        idx = np.arange(first, min(first + chunk, n_total + 1))
        ts = idx * scan_step
        fsq = np.abs(decoherence_factor_array(params, ts / params.omega_eff)) ** 2
        margin = p * fsq - (1 - p) / 2
        hits = np.flatnonzero(margin <= 0)
        if hits.size:
            i = int(hits[0])
            lo = ts[i - 1] if i > 0 else prev_t
            series = TimeSeries(spec, params)
            fn = _margin_fn(series, "concurrence", 0.0)
            return _bisect(fn, float(lo), float(ts[i]), tol)
        prev_t = float(ts[-1])
    return None


@dataclass(frozen=True)
class SweepResult:
    gamma_over_omega: np.ndarray
    omega_t: np.ndarray
    discord: np.ndarray  # shape (len(gamma_over_omega), len(omega_t))


def sweep_gamma(
    spec: WernerSpec,
    alpha: complex,
    gamma_over_omega: Sequence[float],
    grid: TimeGrid,
) -> SweepResult:
    """Closed-form discord on a (decay rate) x (scaled time) grid."""
    gammas = np.asarray(gamma_over_omega, dtype=float).ravel()
    if gammas.size == 0:
        raise ValueError("the decay-rate grid is empty")
    ts = grid.points()
    out = np.empty((gammas.size, ts.size))
    for i, g in enumerate(gammas):
        params = PhysicalParams.scaled(g, alpha)
        fsq = np.abs(decoherence_factor_array(params, ts)) ** 2
        out[i] = [model_discord(spec, x) for x in fsq]
    return SweepResult(gammas, ts, out)


@dataclass(frozen=True)
class LongTimeLimits:
    f_sq: float
    discord: float
    concurrence: float

    @property
    def larger(self) -> str:
        if self.discord > self.concurrence:
            return "discord"
        if self.concurrence > self.discord:
            return "concurrence"
        return "equal"


def long_time_limits(spec: WernerSpec, params: PhysicalParams) -> LongTimeLimits:
    fsq = asymptotic_magnitude_sq(params)
    return LongTimeLimits(
        f_sq=fsq,
        discord=model_discord(spec, fsq),
        concurrence=concurrence_model(spec.p, fsq),
    )


def _fmt(x) -> str:
    return format(float(x), f".{CSV_DIGITS}g")


def _rows_table(rows: Sequence[TimeSeriesRow]):
    with_check = any(r.discord_numeric is not None for r in rows)
    header = list(TIME_SERIES_HEADER) + (["discord_numeric"] if with_check else [])
    body = []
    for r in rows:
        line = [_fmt(getattr(r, name)) for name in TIME_SERIES_HEADER]
        if with_check:
            line.append(_fmt(r.discord_numeric))
        body.append(line)
    return header, body


def _sweep_table(sweep: SweepResult):
    header = ["gamma_over_omega"] + [_fmt(t) for t in sweep.omega_t]
    body = [
        [_fmt(g)] + [_fmt(v) for v in row]
        for g, row in zip(sweep.gamma_over_omega, sweep.discord)
    ]
    return header, body


Destination = Union[str, os.PathLike, io.TextIOBase]


def emit_csv(data: Union[TimeSeries, Iterable[TimeSeriesRow], SweepResult], destination: Destination) -> None:
    """Write a time series or a sweep matrix as CSV (LF line endings,
    12 significant digits, input order preserved)."""
    if isinstance(data, SweepResult):
        header, body = _sweep_table(data)
    else:
        rows = list(data)
        if not rows:
            raise ValueError("nothing to write")
        header, body = _rows_table(rows)

    def write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)

    if hasattr(destination, "write"):
        write(destination)
    else:
        with open(destination, "w", newline="", encoding="utf-8") as fh:
            write(fh)
