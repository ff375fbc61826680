"""Command-line front end.

Subcommands::

    micromaser run     --theta-m 15 --q 0.25 --c 1 --gamma-tr 0.1 --nbar 0.15 --out run.csv
    micromaser figure  4 --out-dir figs/
    micromaser verify  oracles

``run`` writes one row per recorded collision with the columns
``k,energy,purity,fano,ergotropy,trace_leak,n_max``; ``fano`` is ``nan``
(CSV) or ``null`` (JSON) when the field holds no photons. With CSV output
the run summary goes to ``<out>.summary.json``; with JSON output it is
embedded under ``"summary"``.

Exit codes: 0 ok, 2 configuration error, 3 truncation overflow,
4 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .analytics import NORMALIZATION_NOTE
from .checks import SUITES
from .exceptions import InvalidParameterError
from .runner import TRUNCATION_OVERFLOW, ModelParams, RunOptions, run_protocol

log = logging.getLogger(__name__)

COLUMNS = ("k", "energy", "purity", "fano", "ergotropy", "trace_leak", "n_max")

EXIT_OK, EXIT_CONFIG, EXIT_OVERFLOW, EXIT_VERIFY = 0, 2, 3, 4

PARAM_KEYS = ("theta", "theta_m", "theta_q", "q", "c", "gamma_tr", "nbar", "collisions", "nmax", "nmax_cap", "decimate", "format", "out")
DEFAULTS = {"theta_q": 1, "c": 0.0, "gamma_tr": 0.0, "nbar": 0.0, "collisions": 1000, "decimate": 1, "nmax_cap": 1024, "format": "csv"}

# series per figure: (label, q, c, m_eff, gamma_tr); nbar = 0.15 whenever gamma_tr > 0
FIGURES = {
    1: ("energy", [("blue", 0.25, 0.0, 15, 0.0), ("red", 0.25, 0.0, 15.6, 0.0),
                   ("green", 0.0, 0.0, 15, 0.0), ("cyan", 0.0, 0.0, 15.6, 0.0)]),
    2: ("purity", [("blue", 0.25, 0.0, 15, 0.0), ("green", 0.0, 0.0, 15, 0.0)]),
    3: ("energy", [("blue", 0.25, 1.0, 15, 0.0), ("green", 0.25, 1.0, 15.6, 0.0)]),
}
_LOSSY = [("blue", 0.25, 1.0, 15, 0.1), ("green", 0.25, 1.0, 15.6, 0.1),
          ("red", 0.25, 1.0, 15, 0.001), ("cyan", 0.25, 1.0, 15.6, 0.001)]
FIGURES[4] = ("energy", _LOSSY)
FIGURES[5] = ("purity", _LOSSY)
FIGURES[6] = ("fano", _LOSSY)
FIGURE_NBAR = 0.15
FIGURE_COLLISIONS = 2000


class ConfigError(Exception):
    pass


def format_number(x) -> str:
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def _json_number(x):
    if isinstance(x, float) and math.isnan(x):
        return None
    return x


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([format_number(row[c]) for c in COLUMNS])
    return buf.getvalue()


def rows_to_json(rows, summary) -> str:
    payload = {
        "columns": list(COLUMNS),
        "rows": [{c: _json_number(r[c]) for c in COLUMNS} for r in rows],
        "summary": summary,
    }
    return json.dumps(payload, indent=1) + "\n"


def _to_plain(obj):
    """numpy scalars in summaries -> builtin floats for json."""
    if isinstance(obj, dict):
        return {k: _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def resolve_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(loaded) - set(PARAM_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key in PARAM_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    has_theta = cfg.get("theta") is not None
    has_m = cfg.get("theta_m") is not None
    if has_theta == has_m:
        raise ConfigError("give exactly one of --theta or --theta-m")
    if has_m and float(cfg["theta_m"]) <= 0:
        raise ConfigError("--theta-m must be positive")
    if cfg.get("q") is None:
        raise ConfigError("--q is required")
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError(f"unknown format {cfg['format']!r}")
    return cfg


def params_from_config(cfg) -> ModelParams:
    if cfg.get("theta") is not None:
        theta = float(cfg["theta"])
    else:
        theta = int(cfg["theta_q"]) * math.pi / math.sqrt(float(cfg["theta_m"]))
    try:
        return ModelParams(
            theta=theta,
            q=float(cfg["q"]),
            c=float(cfg["c"]),
            gamma_tr=float(cfg["gamma_tr"]),
            nbar=float(cfg["nbar"]),
            n_max=None if cfg.get("nmax") is None else int(cfg["nmax"]),
            collisions=int(cfg["collisions"]),
        )
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc


def simulate(params: ModelParams, decimate: int = 1, stop_when_converged: bool = False, n_max_cap: int = 1024):
    options = RunOptions(decimate=decimate, stop_when_converged=stop_when_converged, n_max_cap=n_max_cap)
    records, outcome = run_protocol(params, options)
    summary = _to_plain(outcome.summary())
    summary["params"] = {
        "theta": params.theta, "q": params.q, "c": params.c, "gamma_tr": params.gamma_tr,
        "nbar": params.nbar, "n_max": params.n_max, "collisions": params.collisions,
    }
    return [r.as_row() for r in records], summary


def _emit_error(code, message, exit_code):
    print(json.dumps({"error": code, "message": message, "exit_code": exit_code}), file=sys.stderr)
    return exit_code


def cmd_run(args) -> int:
    try:
        cfg = resolve_config(args)
        params = params_from_config(cfg)
        decimate, cap = int(cfg["decimate"]), int(cfg["nmax_cap"])
        if decimate < 1:
            raise ConfigError("--decimate must be >= 1")
        if cap < 1:
            raise ConfigError("--nmax-cap must be >= 1")
    except ConfigError as exc:
        return _emit_error("config_error", str(exc), EXIT_CONFIG)

    rows, summary = simulate(params, decimate, stop_when_converged=args.stop_when_converged, n_max_cap=cap)
    out = cfg.get("out")
    if cfg["format"] == "json":
        text = rows_to_json(rows, summary)
    else:
        text = rows_to_csv(rows)
    if out:
        Path(out).write_text(text)
        if cfg["format"] == "csv":
            Path(str(out) + ".summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    else:
        sys.stdout.write(text)
        if cfg["format"] == "csv":
            print(json.dumps(summary), file=sys.stderr)

    if summary["classification"] == TRUNCATION_OVERFLOW:
        return _emit_error(TRUNCATION_OVERFLOW, "Fock cutoff cap reached", EXIT_OVERFLOW)
    return EXIT_OK


def _figure_series(job):
    label, q, c, m_eff, gamma_tr, collisions = job
    params = ModelParams.from_m(
        m_eff, q=q, c=c, gamma_tr=gamma_tr,
        nbar=FIGURE_NBAR if gamma_tr > 0 else 0.0, collisions=collisions,
    )
    return simulate(params)


def cmd_figure(args) -> int:
    quantity, series = FIGURES[args.figure_id]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(label, q, c, m, g, args.collisions) for label, q, c, m, g in series]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_figure_series, jobs))
    else:
        results = [_figure_series(j) for j in jobs]

    manifest = {"figure": args.figure_id, "quantity": quantity, "series": []}
    for (label, q, c, m, g, _), (rows, summary) in zip(jobs, results):
        name = f"fig{args.figure_id}_{label}.csv"
        (out_dir / name).write_text(rows_to_csv(rows))
        caption = f"q={q}, c={c}, theta=pi/sqrt({m})"
        if g > 0:
            caption += f", gamma_tr={g}, nbar={FIGURE_NBAR}"
        manifest["series"].append({"label": label, "caption": caption, "file": name, "summary": summary})
        log.info("figure %s series %s -> %s", args.figure_id, label, name)
    (out_dir / f"fig{args.figure_id}_manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = SUITES[args.suite]()
    for r in results:
        print(r.line())
    if args.suite == "steady_states":
        print(f"note: {NORMALIZATION_NOTE}")
    failed = [r for r in results if not r.passed]
    print(f"{args.suite}: {len(results) - len(failed)}/{len(results)} passed")
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="micromaser", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser(
        "run",
        help="simulate one charging run",
        description="Columns: " + ",".join(COLUMNS) + ". Flags override --config.",
    )
    run.add_argument("--config", help="JSON file with any of: " + ", ".join(PARAM_KEYS))
    run.add_argument("--theta", type=float, help="collision angle g*tau")
    run.add_argument("--theta-m", dest="theta_m", type=float, help="theta = Q*pi/sqrt(m_eff)")
    run.add_argument("--theta-q", dest="theta_q", type=int, help="Q multiplier for --theta-m (default 1)")
    run.add_argument("--q", type=float, help="qubit ground-state weight")
    run.add_argument("--c", type=float, help="qubit coherence fraction (default 0)")
    run.add_argument("--gamma-tr", dest="gamma_tr", type=float, help="damping per collision interval")
    run.add_argument("--nbar", type=float, help="thermal photon number")
    run.add_argument("--collisions", type=int)
    run.add_argument("--nmax", type=int, help="initial Fock cutoff (grows adaptively)")
    run.add_argument("--nmax-cap", dest="nmax_cap", type=int, help="largest cutoff before overflow (default 1024)")
    run.add_argument("--decimate", type=int, help="record every n-th collision")
    run.add_argument("--format", choices=("csv", "json"))
    run.add_argument("--out", help="output path (default stdout)")
    run.add_argument("--stop-when-converged", action="store_true",
                     help="stop once the energy has settled")
    run.set_defaults(func=cmd_run)

    fig = sub.add_parser("figure", help="emit data series for a figure")
    fig.add_argument("figure_id", type=int, choices=sorted(FIGURES))
    fig.add_argument("--out-dir", default=".")
    fig.add_argument("--collisions", type=int, default=FIGURE_COLLISIONS)
    fig.add_argument("--jobs", type=int, default=1)
    fig.set_defaults(func=cmd_figure)

    ver = sub.add_parser("verify", help="run self-test suites")
    ver.add_argument("suite", choices=sorted(SUITES))
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
