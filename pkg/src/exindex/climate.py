"""Heatwave analysis of daily maximum temperatures.

Input is a CSV with one row per station-day (default columns
``date,station,value``, ISO dates, degrees Celsius). Each retained year
contributes one complete season; a year missing any in-season day is
dropped whole, so all segments have the same length.
"""
from __future__ import annotations

import calendar
import csv
import datetime as dt
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import DataError, ParameterError, Series
from .estimate import expected_duration, select_d_star, theta_hat_segmented

SUMMER = (6, 7, 8)


@dataclass(frozen=True)
class DailyRecord:
    date: dt.date
    value: float
    station: str


@dataclass(frozen=True)
class SeasonalPanel:
    station: str
    years: tuple[int, ...]
    L: int
    series: Series
    dropped_years: tuple[tuple[int, str], ...] = ()
    months: tuple[int, ...] = SUMMER

    @property
    def n(self) -> int:
        return self.series.n


def season_days(year: int, months) -> list[dt.date]:
    return [dt.date(year, m, d) for m in months for d in range(1, calendar.monthrange(year, m)[1] + 1)]


def read_records(csv_path, col_date="date", col_station="station", col_value="value") -> list[DailyRecord]:
    """Parse the station CSV; ``csv_path`` may be ``"-"`` for stdin."""
    import sys

    path = str(csv_path)
    try:
        fh = sys.stdin if path == "-" else open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    records = []
    with fh:
        reader = csv.DictReader(fh)
        missing = {col_date, col_station, col_value} - set(reader.fieldnames or ())
        if missing:
            raise DataError(f"{path}: missing column(s) {sorted(missing)}")
        for row in reader:
            line = reader.line_num
            try:
                date = dt.date.fromisoformat(row[col_date].strip())
            except (ValueError, AttributeError):
                raise DataError(f"{path}:{line}: bad date {row[col_date]!r}") from None
            try:
                value = float(row[col_value])
            except (TypeError, ValueError):
                raise DataError(f"{path}:{line}: bad value {row[col_value]!r}") from None
            if not math.isfinite(value):
                raise DataError(f"{path}:{line}: non-finite value")
            records.append(DailyRecord(date, value, row[col_station].strip()))
    return records


def build_panel(records, station: str, year_range=None, months=SUMMER) -> SeasonalPanel:
    months = tuple(sorted(set(months)))
    if 2 in months:
        raise ParameterError("seasons containing February have year-dependent length")
    by_date: dict[dt.date, float] = {}
    for rec in records:
        if rec.station != station:
            continue
        if rec.date in by_date:
            raise DataError(f"duplicate date {rec.date.isoformat()} for station {station}")
        by_date[rec.date] = rec.value
    if not by_date:
        raise DataError(f"station {station!r} not found")
    lo, hi = year_range if year_range else (min(by_date).year, max(by_date).year)
    present = sorted({d.year for d in by_date if lo <= d.year <= hi and d.month in months})
    years, dropped, values = [], [], []
    for year in present:
        days = season_days(year, months)
        if any(d not in by_date for d in days):
            dropped.append((year, "incomplete season"))
            continue
        years.append(year)
        values.extend(by_date[d] for d in days)
    if not years:
        raise DataError(f"no complete season for station {station!r} in {lo}..{hi}")
    L = len(season_days(years[0], months))
    return SeasonalPanel(station, tuple(years), L, Series(np.array(values), L), tuple(dropped), months)


def load_panel(csv_path, station: str, year_range=None, months=SUMMER, **columns) -> SeasonalPanel:
    return build_panel(read_records(csv_path, **columns), station, year_range, months)


@dataclass
class Diagnostic:
    rows: list[dict]  # k, h, delta, rule_threshold
    d_star: dict[int, int]  # k -> selected d
    theta_rows: list[dict] = field(default_factory=list)  # k, d, theta_hat (stability curves)

    def modal_d(self) -> int:
        counts = Counter(self.d_star.values())
        best = max(counts.values())
        return min(d for d, c in counts.items() if c == best)


def d_diagnostic(panel: SeasonalPanel, k_grid, h_grid=range(1, 11)) -> Diagnostic:
    """delta_hat(h) = theta_hat(h) - theta_hat(h+1) of the segmented estimator vs 1/sqrt(k)."""
    h_grid = sorted(set(int(h) for h in h_grid))
    if not h_grid or h_grid[0] < 1:
        raise ParameterError("h_grid must hold positive integers")
    d_u = h_grid[-1]
    if d_u + 1 > panel.L:
        raise ParameterError(f"max(h_grid)+1 = {d_u + 1} exceeds season length {panel.L}")
    rows, d_star, theta_rows = [], {}, []
    for k in k_grid:
        sel = select_d_star(panel.series, k, d_u, segmented=True)
        d_star[int(k)] = sel.d_star_hat
        for h in h_grid:
            rows.append({"k": int(k), "h": h, "delta": float(sel.profile[h - 1]),
                         "rule_threshold": sel.rule_threshold})
        for d, th in enumerate(sel.theta_profile, start=1):
            theta_rows.append({"k": int(k), "d": d, "theta_hat": float(th)})
    return Diagnostic(rows, d_star, theta_rows)


def heatwave_report(panel: SeasonalPanel, k_list, d: int) -> list[dict]:
    """One row per k: threshold X_{n-k,n}, segmented theta_hat(d) and expected duration 1/theta."""
    rows = []
    for k in k_list:
        est = theta_hat_segmented(panel.series, k, d)
        duration = expected_duration(est.theta_hat) if est.theta_hat > 0 else math.inf
        rows.append({"station": panel.station, "k": int(k), "d": int(d), "threshold": est.threshold,
                     "theta_hat": est.theta_hat, "expected_duration": duration,
                     "warnings": "; ".join(est.warnings)})
    return rows


def format_report(rows) -> str:
    """Human-readable table: threshold and duration at display precision."""
    lines = [f"{'k':>5} {'X_(n-k,n)':>10} {'theta':>6} {'duration':>9}"]
    for r in rows:
        lines.append(f"{r['k']:>5} {r['threshold']:>8.1f} C {r['theta_hat']:>6.2f} {r['expected_duration']:>6.1f} d")
    return "\n".join(lines)


def write_synthetic_csv(path, station="SYN", years=range(2000, 2003), seed=0, drop_days=(),
                        clusters=0.6) -> Path:
    """Write a synthetic JJA station file for testing the pipeline.

    Temperatures follow a seasonal cycle plus AR(1) noise with coefficient
    ``clusters``; dates listed in ``drop_days`` are omitted.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    drop = set(drop_days)
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "station", "value"])
        for year in years:
            days = season_days(year, SUMMER)
            noise = 0.0
            for i, day in enumerate(days):
                noise = clusters * noise + rng.standard_normal() * 2.5
                temp = 22.0 + 4.0 * math.sin(math.pi * i / len(days)) + noise
                if day not in drop:
                    w.writerow([day.isoformat(), station, f"{temp:.1f}"])
    return path


def panel_by_year(panel: SeasonalPanel) -> dict[int, np.ndarray]:
    vals = panel.series.values.reshape(len(panel.years), panel.L)
    return {y: vals[i] for i, y in enumerate(panel.years)}

