"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 I/O error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import warnings
from pathlib import Path

from . import pipeline, storage
from .config import ENV_VAR, load_config
from .errors import AmbiguousSelection, ConfigError, FootInterfaceError, NonConvergence
from .geometry import PLACEMENTS
from .statics import energy_scan

log = logging.getLogger("footinterface")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="footinterface", description="Foot-interface modelling and evaluation tools.")
    p.add_argument("--config", help=f"run configuration INI (default: ${ENV_VAR} if set)")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="generate a synthetic cohort of trial CSVs and a manifest")
    s.add_argument("--subjects", type=int, required=True, help="number of synthetic subjects (>= 1)")
    s.add_argument("--seed", type=int, help="cohort seed (default: [run] seed from the config, else 0)")
    s.add_argument("-o", "--out", required=True, help="output directory")

    c = sub.add_parser("calibrate", help="fit subject ICA model(s) on dataset-1 single-direction trials")
    c.add_argument("--in", dest="input", required=True, help="cohort or subject directory")
    c.add_argument("--subject", help="subject id; omit to calibrate every subject of a cohort")
    c.add_argument("--out", required=True,
                   help="model file (with --subject) or directory receiving subject<ID>.model.txt")

    e = sub.add_parser("evaluate", help="score kinematic and ICA mappings on test datasets")
    e.add_argument("--model", required=True, help="model file or directory of subject models")
    e.add_argument("--in", dest="input", required=True, help="cohort or subject directory")
    e.add_argument("--baseline", choices=("kinematic", "ica", "both"), default="both",
                   help="mapping(s) to score (default: both)")
    e.add_argument("--datasets", default="2,3", help="comma-separated datasets to score (default: 2,3)")
    e.add_argument("--report", required=True, help="report CSV path")

    g = sub.add_parser("energy-scan", help="elastic energy over an (x, y, yaw) grid and its minima")
    g.add_argument("--placement", choices=PLACEMENTS, default="outside",
                   help="spring placement relative to the base (default: outside)")
    g.add_argument("--nx", type=int, default=51, help="grid points along x (>= 21, default 51)")
    g.add_argument("--ny", type=int, default=51, help="grid points along y (>= 21, default 51)")
    g.add_argument("--nyaw", type=int, default=25, help="grid points along yaw (>= 21, default 25)")
    g.add_argument("-o", "--out", required=True, help="grid CSV; minima go to <stem>_minima.csv")
    g.add_argument("--svg", help="optional SVG plot of energy against yaw at x = y = 0")

    m = sub.add_parser("metrics", help="foot-path error and SPARC per trial (kinematic reference track)")
    m.add_argument("--in", dest="input", required=True, help="cohort or subject directory")
    m.add_argument("--out", required=True, help="metrics CSV path")
    return p


# ---------------------------------------------------------------------------


def _write(path, text):
    storage._write_text(path, text)


def cmd_simulate(args, cfg) -> int:
    if args.subjects < 1:
        raise UsageError("--subjects must be at least 1")
    spec = cfg.cohort_spec(args.subjects, args.seed)
    paths = pipeline.simulate_cohort(spec, cfg.geometry(), args.out)
    print(f"wrote {len(paths)} trial files for {spec.n_subjects} subject(s) and "
          f"{storage.MANIFEST_NAME} to {args.out}")
    return EXIT_OK


def _subject_trials(root, subject):
    for sid, directory in pipeline.subject_dirs(root):
        if sid == subject:
            return [t for t in storage.read_trials(directory) if t.subject_id == sid]
    raise UsageError(f"subject {subject!r} not found under {root}")


def _calibrate_one(trials, sid, cfg, geom, out):
    present = {t.direction for t in trials if t.dataset == 1}
    missing = [d for d in ("F", "B", "L", "R", "TU", "TD", "LT", "RT") if d not in present]
    if missing:
        raise UsageError(f"subject {sid}: missing dataset-1 directions: {', '.join(missing)}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AmbiguousSelection)
        model = pipeline.calibrate(trials, geom, cfg.ica_settings(), cfg.filter_window)
    for w in caught:
        log.warning("subject %s: %s", sid, w.message)
    d = model.diagnostics
    log.info("subject %s: iterations %s, alignment |r| %s, ambiguous %s", sid, d["iterations"],
             [round(r, 4) for r in d["correlations"]], d["ambiguous"])
    storage.write_model(model, out, sid)


def cmd_calibrate(args, cfg) -> int:
    geom = cfg.geometry()
    if not Path(args.input).is_dir():
        raise FileNotFoundError(f"input directory not found: {args.input}")
    if args.subject:
        _calibrate_one(_subject_trials(args.input, args.subject), args.subject, cfg, geom, args.out)
        print(f"wrote model for subject {args.subject} to {args.out}")
        return EXIT_OK
    subjects = pipeline.subject_dirs(args.input)
    if not subjects:
        raise UsageError(f"no trials found under {args.input}")
    for sid, directory in subjects:
        trials = [t for t in storage.read_trials(directory) if t.subject_id == sid]
        _calibrate_one(trials, sid, cfg, geom, Path(args.out) / f"subject{sid}.model.txt")
    print(f"wrote {len(subjects)} model(s) to {args.out}")
    return EXIT_OK


def _models(path):
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("subject*.model.txt"))
        if not files:
            raise UsageError(f"no subject<ID>.model.txt files in {path}")
        return {storage.model_subject(f): storage.read_model(f) for f in files}
    return {storage.model_subject(path): storage.read_model(path)}


def cmd_evaluate(args, cfg) -> int:
    geom = cfg.geometry()
    try:
        datasets = tuple(int(x) for x in args.datasets.split(","))
    except ValueError:
        raise UsageError(f"--datasets must be comma-separated integers, got {args.datasets!r}") from None
    if not Path(args.input).is_dir():
        raise FileNotFoundError(f"input directory not found: {args.input}")
    models = _models(args.model)
    mappings = {"kinematic": (pipeline.KINEMATIC,), "ica": (pipeline.ICA,),
                "both": (pipeline.KINEMATIC, pipeline.ICA)}[args.baseline]
    scores = []
    for sid, directory in pipeline.subject_dirs(args.input):
        model = models.get(sid) or (next(iter(models.values())) if len(models) == 1 else None)
        if model is None:
            if pipeline.ICA in mappings:
                raise UsageError(f"no model for subject {sid}")
        trials = [t for t in storage.read_trials(directory) if t.subject_id == sid]
        scores += pipeline.evaluate(trials, geom, model, mappings, datasets, window=cfg.filter_window,
                                    threshold=cfg.velocity_threshold, fractions=cfg.fractions)
    if not scores:
        raise UsageError("no trials matched the requested datasets")
    _write(args.report, pipeline.report_to_csv(scores))
    for dataset in datasets:
        for mapping in mappings:
            per = pipeline.subject_means(scores, mapping, (dataset,))
            if per:
                mean, std = pipeline._mean_std(per.values())
                print(f"dataset {dataset} {mapping}: accuracy {mean:.3f} +- {std:.3f} over {len(per)} subject(s)")
    return EXIT_OK


def _svg_line(xs, ys, xlabel, ylabel, width=480, height=320, pad=48) -> str:
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    y1 = y1 if y1 > y0 else y0 + 1.0
    sx = lambda x: pad + (x - x0) / (x1 - x0) * (width - 2 * pad)  # noqa: E731
    sy = lambda y: height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)  # noqa: E731
    pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<polyline fill="none" stroke="black" stroke-width="1.5" points="{pts}"/>\n'
        f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle" font-size="12">{xlabel}</text>\n'
        f'<text x="14" y="{height / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {height / 2})">{ylabel}</text>\n'
        f'<text x="{pad}" y="{height - pad + 16}" font-size="10">{x0:.3g}</text>\n'
        f'<text x="{width - pad}" y="{height - pad + 16}" text-anchor="end" font-size="10">{x1:.3g}</text>\n'
        f'<text x="{pad - 4}" y="{height - pad}" text-anchor="end" font-size="10">{y0:.3g}</text>\n'
        f'<text x="{pad - 4}" y="{pad}" text-anchor="end" font-size="10">{y1:.3g}</text>\n'
        "</svg>\n"
    )


def cmd_energy_scan(args, cfg) -> int:
    geom = cfg.geometry().with_placement(args.placement)
    try:
        land = energy_scan(geom, args.nx, args.ny, args.nyaw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    lines = ["x_cm,y_cm,yaw_deg,energy_ncm"]
    for x, y, yaw, e in land.rows():
        lines.append(f"{x:.6f},{y:.6f},{math.degrees(yaw):.6f},{e:.9e}")
    _write(args.out, "\n".join(lines) + "\n")
    out = Path(args.out)
    minima_path = out.with_name(out.stem + "_minima.csv")
    mlines = ["x_cm,y_cm,yaw_deg,energy_ncm"]
    for x, y, yaw in land.minima:
        i, j, k = list(land.x).index(x), list(land.y).index(y), list(land.yaw).index(yaw)
        mlines.append(f"{x:.6f},{y:.6f},{math.degrees(yaw):.6f},{land.energy[i, j, k]:.9e}")
    _write(minima_path, "\n".join(mlines) + "\n")
    if args.svg:
        i0, j0 = args.nx // 2, args.ny // 2
        _write(args.svg, _svg_line([math.degrees(v) for v in land.yaw], list(land.energy[i0, j0, :]),
                                   "yaw (deg) at x = y = 0", "elastic energy (N cm)"))
    print(f"{args.placement} placement: {len(land.minima)} local minimum/minima")
    for x, y, yaw in land.minima:
        print(f"  x = {x:+.3f} cm, y = {y:+.3f} cm, yaw = {math.degrees(yaw):+.3f} deg")
    return EXIT_OK


def cmd_metrics(args, cfg) -> int:
    geom = cfg.geometry()
    if not Path(args.input).is_dir():
        raise FileNotFoundError(f"input directory not found: {args.input}")
    rows = []
    for trial in storage.read_trials(args.input):
        err, sp = pipeline.trial_metrics(trial, geom, cfg.filter_window, cfg.velocity_threshold)
        rows.append((trial.subject_id, trial.direction, trial.trial, err, sp))
    _write(args.out, storage.metrics_to_csv(rows))
    print(f"wrote metrics for {len(rows)} trial(s) to {args.out}")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "calibrate": cmd_calibrate, "evaluate": cmd_evaluate,
            "energy-scan": cmd_energy_scan, "metrics": cmd_metrics}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except (UsageError, ConfigError, storage.SchemaError) as exc:
        print(f"footinterface {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"footinterface {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NonConvergence as exc:
        print(f"footinterface {args.command}: {exc} (iterations: {exc.iterations})", file=sys.stderr)
        return EXIT_NUMERIC
    except FootInterfaceError as exc:
        print(f"footinterface {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
