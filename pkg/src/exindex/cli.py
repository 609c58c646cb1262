"""Command-line interface.

Exit codes: 0 success, 2 usage or parameter error, 3 data error, 4 internal error.
Subcommands that take ``--out-dir`` write a ``manifest.json`` next to their
outputs; ``exindex replay DIR/manifest.json`` reruns it.
"""
from __future__ import annotations

import argparse
import datetime as dt
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .core import DataError, ParameterError, Series
from .estimate import (
    block_length_for,
    intervals_estimator,
    runs_estimator,
    select_d_star,
    sliding_blocks_mle,
    theta_hat,
    theta_hat_auto,
    theta_hat_segmented,
)
from .plots import line_chart_svg, write_csv

EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 2, 3, 4

log = logging.getLogger("exindex")


class UsageError(ParameterError):
    pass


# ---------------------------------------------------------------- parsing helpers


def int_list(text: str) -> list[int]:
    """``"50,100,200"`` or ``"30:300:10"`` (inclusive stop)."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            start, stop, step = parts
            if step <= 0:
                raise ValueError
            return list(range(start, stop + 1, step))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list like 50,100 or a range 30:300:10, got {text!r}")


def year_range(text: str) -> tuple[int, int]:
    try:
        a, b = (int(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected --years A:B, got {text!r}")
    return a, b


def read_values(path: str) -> list[float]:
    """Single-column numeric input; ``#`` comments and one leading header line are skipped."""
    try:
        fh = sys.stdin if path == "-" else open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    values: list[float] = []
    seen_header = False
    with fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            field = text.split(",")[0].strip()
            try:
                values.append(float(field))
            except ValueError:
                if not values and not seen_header:
                    seen_header = True
                    continue
                raise DataError(f"{path}:{lineno}: not a number: {field!r}") from None
    if not values:
        raise DataError(f"{path}: no numeric values")
    return values


# ---------------------------------------------------------------- manifest


class Run:
    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.started = dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")
        self.seeds: list[int] = []
        self.outputs: list[str] = []

    @property
    def out_dir(self) -> Path | None:
        d = getattr(self.args, "out_dir", None)
        if d is None:
            return None
        p = Path(d)
        p.mkdir(parents=True, exist_ok=True)
        return p

    def path(self, name: str) -> Path:
        self.outputs.append(name)
        return self.out_dir / name

    def write_manifest(self):
        if self.out_dir is None:
            return
        params = {k: v for k, v in vars(self.args).items() if k not in ("func",)}
        manifest = {
            "tool": "exindex",
            "version": __version__,
            "subcommand": self.args.command,
            "argv": self.argv,
            "parameters": json.loads(json.dumps(params, default=str)),
            "seeds": self.seeds,
            "outputs": sorted(set(self.outputs)),
            "started": self.started,
            "finished": dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds"),
        }
        (self.out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def emit(run: Run, name: str, text: str):
    """Write to ``--out-dir`` if given, else stdout."""
    if run.out_dir is None:
        sys.stdout.write(text)
    else:
        run.path(name).write_text(text, encoding="utf-8")


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False, default=_json_default) + "\n"


def _json_default(o):
    import numpy as np

    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    raise TypeError(type(o).__name__)


def _clean(obj):
    """Replace non-finite floats with None so JSON stays standard."""
    import math

    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _csv_text(rows: list[dict]) -> str:
    import io
    import csv

    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if v is None else v) for k, v in r.items()})
    return buf.getvalue()


def _warn(warnings):
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)


# ---------------------------------------------------------------- subcommands


def cmd_simulate(run: Run):
    from .simulate import parse_model, simulate

    a = run.args
    spec = parse_model(a.model)
    path = simulate(spec, a.n, a.seed)
    run.seeds.append(a.seed)
    header = (f"# model={spec.label} family={spec.family.value} param={spec.param} "
              f"seed={a.seed} n={a.n} burn_in={path.burn_in} rng=PCG64 version={__version__}\n")
    body = "value\n" + "".join(f"{v!r}\n" for v in path.series.values.tolist())
    emit(run, "path.csv", header + body)


def _input_series(a) -> Series:
    return Series(read_values(a.input), a.segment_length)


def cmd_estimate(run: Run):
    a = run.args
    series = _input_series(a)
    doc = {"input": {"path": a.input, "n": series.n, "segment_length": series.segment_length}}
    if a.estimator == "intervals":
        res = intervals_estimator(series, a.k)
    elif a.estimator == "sliding_blocks":
        res = sliding_blocks_mle(series, a.block_length or block_length_for(series.n, a.k))
    elif a.d == "auto":
        res, sel = theta_hat_auto(series, a.k, a.d_u)
        doc["selection"] = sel.to_dict()
    else:
        try:
            d = int(a.d)
        except ValueError:
            raise UsageError(f"--d must be 'auto' or an integer, got {a.d!r}") from None
        if a.estimator == "runs":
            res = runs_estimator(series, a.k, d)
        elif series.segment_length is not None:
            res = theta_hat_segmented(series, a.k, d)
        else:
            res = theta_hat(series, a.k, d)
    doc["result"] = res.to_dict()
    _warn(res.warnings)
    if a.format == "json":
        emit(run, "estimate.json", dump_json(_clean(doc)))
    else:
        row = {k: v for k, v in doc["result"].items() if k != "warnings"}
        row["warnings"] = "; ".join(res.warnings)
        if "selection" in doc:
            row["d_star_hat"] = doc["selection"]["d_star_hat"]
        emit(run, "estimate.csv", _csv_text([_clean(row)]))


def cmd_select_d(run: Run):
    a = run.args
    series = _input_series(a)
    sel = select_d_star(series, a.k, a.d_u)
    _warn(sel.warnings)
    if a.format == "json":
        emit(run, "select_d.json", dump_json({"k": a.k, **sel.to_dict()}))
    else:
        rows = [{"h": h, "delta": float(v), "rule_threshold": sel.rule_threshold,
                 "below": bool(v < sel.rule_threshold), "d_star_hat": sel.d_star_hat}
                for h, v in enumerate(sel.profile, start=1)]
        emit(run, "select_d.csv", _csv_text(rows))


def cmd_stdf(run: Run):
    from .simulate import parse_model
    from .stdf import ell_monte_carlo, theta_and_dstar

    a = run.args
    names = a.models.split(",") if a.models else ["MM", "AR_CAUCHY", "AR_NORMAL", "MAX_AR"]
    rows = []
    for name in names:
        spec = parse_model(name)
        prof = theta_and_dstar(spec, a.s_max)
        for row in prof.rows():
            if a.mc_reps:
                mc = ell_monte_carlo(spec, row["s"], a.mc_n, a.mc_reps, a.seed)
                row["ell_mc"] = mc.estimate
                row["ell_mc_se"] = mc.std_error
            rows.append(row)
    if a.mc_reps:
        run.seeds.append(a.seed)
    emit(run, "stdf.csv", _csv_text(rows))


def cmd_mse_study(run: Run):
    from .mc import StudyConfig, mse_curves, run_study
    from .simulate import parse_model

    a = run.args
    models = tuple(parse_model(m) for m in a.models.split(","))
    config = StudyConfig(models=models, n=a.n, reps=a.reps, k_grid=tuple(a.k_grid), d_u=a.d_u,
                         estimators=tuple(a.estimators.split(",")), base_seed=a.seed)
    run.seeds.append(a.seed)
    if run.out_dir is None:
        raise UsageError("mse-study needs --out-dir")
    report = run_study(config, jobs=a.jobs)
    cells = [{k: v for k, v in c.items()} for c in report.cells]
    write_csv(run.path("report.csv"), cells)
    run.path("report.json").write_text(dump_json(_clean(report.to_dict())), encoding="utf-8")
    if report.selection:
        write_csv(run.path("selection.csv"), [{**s, "d_hat_counts": json.dumps(s["d_hat_counts"])}
                                              for s in report.selection])
    for label, rows in mse_curves(report).items():
        slug = _slug(label)
        write_csv(run.path(f"mse_{slug}.csv"), rows)
        if a.svg:
            series = {e: [(r["k"], r[e]) for r in rows] for e in config.estimators}
            line_chart_svg(run.path(f"mse_{slug}.svg"), series, title=f"MSE(k) {label}", xlabel="k", ylabel="MSE")
    print(f"wrote {len(cells)} cells to {run.out_dir}", file=sys.stderr)


def _slug(label: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in label).strip("_")


def cmd_heatwave(run: Run):
    from .climate import d_diagnostic, format_report, heatwave_report, load_panel

    a = run.args
    panel = load_panel(a.csv, a.station, a.years, col_date=a.col_date, col_station=a.col_station,
                       col_value=a.col_value)
    for year, reason in panel.dropped_years:
        print(f"warning: dropped {year}: {reason}", file=sys.stderr)
    diag = d_diagnostic(panel, a.k_grid, range(1, a.d_u + 1))
    if a.d == "auto":
        d = diag.modal_d()
    else:
        try:
            d = int(a.d)
        except ValueError:
            raise UsageError(f"--d must be 'auto' or an integer, got {a.d!r}") from None
    rows = heatwave_report(panel, a.k, d)
    stability = [{"k": k, "d": d, "theta_hat": heatwave_report(panel, [k], d)[0]["theta_hat"]} for k in a.k_grid]
    summary = {"station": panel.station, "n": panel.n, "L": panel.L, "years": list(panel.years),
               "dropped_years": [{"year": y, "reason": r} for y, r in panel.dropped_years],
               "d": d, "d_source": "auto" if a.d == "auto" else "user",
               "d_star_by_k": {str(k): v for k, v in diag.d_star.items()}, "report": rows}
    if run.out_dir is None:
        sys.stdout.write(format_report(rows) + "\n")
        return
    write_csv(run.path("report.csv"), rows)
    write_csv(run.path("diagnostic.csv"), diag.rows)
    write_csv(run.path("selected_d.csv"), [{"k": k, "d_star_hat": v} for k, v in diag.d_star.items()])
    write_csv(run.path("stability.csv"), stability)
    run.path("report.json").write_text(dump_json(_clean(summary)), encoding="utf-8")
    if a.svg:
        hs = sorted({r["h"] for r in diag.rows})
        curves = {f"h={h}": [(r["k"] ** -0.5, r["delta"]) for r in diag.rows if r["h"] == h] for h in hs}
        curves["1/sqrt(k)"] = [(k ** -0.5, k ** -0.5) for k in a.k_grid]
        line_chart_svg(run.path("diagnostic.svg"), curves, title=f"{panel.station}: delta_hat(h)",
                       xlabel="1/sqrt(k)", ylabel="delta_hat", dashed=("1/sqrt(k)",))
        line_chart_svg(run.path("stability.svg"), {f"d={d}": [(r["k"], r["theta_hat"]) for r in stability]},
                       title=f"{panel.station}: theta_hat", xlabel="k", ylabel="theta_hat")
    sys.stdout.write(format_report(rows) + "\n")


def cmd_replay(run: Run):
    manifest = json.loads(Path(run.args.manifest).read_text(encoding="utf-8"))
    argv = list(manifest["argv"])
    if run.args.out_dir is not None:
        if "--out-dir" in argv:
            argv[argv.index("--out-dir") + 1] = run.args.out_dir
        else:
            argv += ["--out-dir", run.args.out_dir]
    return main(argv)


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="exindex", description="Extremal index estimation and d* selection.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate a benchmark process")
    s.add_argument("--model", required=True, help="MM, AR_CAUCHY, AR_NORMAL, MAX_AR, SARCH, ARCH; optional :param")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-dir")
    s.set_defaults(func=cmd_simulate)

    def add_input(sp):
        sp.add_argument("input", nargs="?", default="-", help="single-column numeric file, '-' for stdin")
        sp.add_argument("--k", type=int, required=True, help="tail sample size")
        sp.add_argument("--d-u", type=int, default=10, help="upper bound of the d search")
        sp.add_argument("--segment-length", type=int, help="observations per independent segment")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--out-dir")

    e = sub.add_parser("estimate", help="estimate the extremal index of a series")
    add_input(e)
    e.add_argument("--d", default="auto", help="'auto' or a fixed integer order")
    e.add_argument("--estimator", choices=("theta_hat", "runs", "intervals", "sliding_blocks"), default="theta_hat")
    e.add_argument("--block-length", type=int, help="sliding blocks length (default n // k)")
    e.set_defaults(func=cmd_estimate)

    d = sub.add_parser("select-d", help="select d* and print the delta profile")
    add_input(d)
    d.set_defaults(func=cmd_select_d)

    t = sub.add_parser("stdf", help="closed-form l_s / Delta(s) table")
    t.add_argument("--models", help="comma list, default the four closed-form benchmarks")
    t.add_argument("--s-max", type=int, default=10)
    t.add_argument("--mc-reps", type=int, default=0, help="add Monte Carlo l_s with this many batches")
    t.add_argument("--mc-n", type=int, default=10**5)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out-dir")
    t.set_defaults(func=cmd_stdf)

    m = sub.add_parser("mse-study", help="simulation study: MSE(k) and c(k)")
    m.add_argument("--models", default="MM,AR_CAUCHY,AR_NORMAL,MAX_AR,SARCH,ARCH")
    m.add_argument("--reps", type=int, default=1000)
    m.add_argument("--n", type=int, default=5000)
    m.add_argument("--k-grid", type=int_list, default=list(range(30, 301, 10)))
    m.add_argument("--d-u", type=int, default=10)
    m.add_argument("--estimators", default="auto,sliding_blocks,intervals")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--jobs", type=int, default=1)
    m.add_argument("--svg", action="store_true")
    m.add_argument("--out-dir")
    m.set_defaults(func=cmd_mse_study)

    h = sub.add_parser("heatwave", help="heatwave duration analysis of a station CSV")
    h.add_argument("--csv", required=True)
    h.add_argument("--station", required=True)
    h.add_argument("--years", type=year_range)
    h.add_argument("--k", type=int_list, default=[50, 100, 200])
    h.add_argument("--d", default="auto")
    h.add_argument("--k-grid", type=int_list, default=list(range(50, 201, 10)),
                   help="k values for the d diagnostic and stability curve")
    h.add_argument("--d-u", type=int, default=10)
    h.add_argument("--col-date", default="date")
    h.add_argument("--col-station", default="station")
    h.add_argument("--col-value", default="value")
    h.add_argument("--svg", action="store_true")
    h.add_argument("--out-dir")
    h.set_defaults(func=cmd_heatwave)

    r = sub.add_parser("replay", help="rerun the command recorded in a manifest")
    r.add_argument("manifest")
    r.add_argument("--out-dir", help="write to another directory")
    r.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    run = Run(args, argv)
    try:
        rc = args.func(run)
        if args.command != "replay":
            run.write_manifest()
        return int(rc or 0)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
