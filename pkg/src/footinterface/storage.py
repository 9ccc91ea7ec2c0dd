"""Trial CSV, metric CSV, subject-model and cohort-manifest files.

Every writer is byte-deterministic: fixed column order, fixed float format,
sorted JSON keys and ``\\n`` line endings.
"""
from __future__ import annotations

import csv
import io
import json
import re
from pathlib import Path

import numpy as np

from .directions import ALL_LABELS
from .errors import FootInterfaceError
from .mapping import MODEL_VERSION, IcaSettings, SubjectModel, ZeroBand
from .signals import TrialRecord
from .synthetic import CohortSpec, MotionProfile, SyntheticSubject

TRIAL_HEADER = ["t_s"] + [f"f{i}_n" for i in range(1, 9)]
METRIC_HEADER = ["subject", "direction", "trial", "foot_path_error_cm", "sparc"]
TRIAL_NAME = re.compile(r"^subject(?P<subject>[A-Za-z0-9]+)_(?P<direction>[A-Z]+)_(?P<trial>\d+)\.csv$")
MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1


class SchemaError(FootInterfaceError):
    """A file does not follow the expected layout."""


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


def _json_dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write_text(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# trials


def trial_filename(trial: TrialRecord) -> str:
    return f"subject{trial.subject_id}_{trial.direction}_{trial.trial}.csv"


def trial_to_csv(trial: TrialRecord) -> str:
    buf = io.StringIO()
    buf.write(",".join(TRIAL_HEADER) + "\n")
    for t, row in zip(trial.t, trial.forces):
        buf.write(",".join([_fmt(t)] + [_fmt(v) for v in row]) + "\n")
    return buf.getvalue()


def write_trial(trial: TrialRecord, directory) -> Path:
    path = Path(directory) / trial_filename(trial)
    _write_text(path, trial_to_csv(trial))
    return path


def read_trial(path, dataset: int | None = None) -> TrialRecord:
    """Load ``subject<id>_<direction>_<trial>.csv``; the dataset comes from a ``dataset<k>`` parent."""
    path = Path(path)
    m = TRIAL_NAME.match(path.name)
    if not m or m["direction"] not in ALL_LABELS:
        raise SchemaError(f"{path.name}: expected subject<id>_<direction>_<trial>.csv")
    if dataset is None:
        dm = re.fullmatch(r"dataset(\d+)", path.parent.name)
        dataset = int(dm[1]) if dm else 1
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRIAL_HEADER:
            raise SchemaError(f"{path.name}: header must be {','.join(TRIAL_HEADER)}")
        try:
            rows = np.array([[float(v) for v in row] for row in reader if row], dtype=float)
        except ValueError as exc:
            raise SchemaError(f"{path.name}: {exc}") from None
    if rows.ndim != 2 or rows.shape[1] != 9:
        raise SchemaError(f"{path.name}: every row needs 9 columns")
    try:
        return TrialRecord(m["direction"], rows[:, 0], rows[:, 1:], m["subject"], int(m["trial"]), dataset)
    except ValueError as exc:
        raise SchemaError(f"{path.name}: {exc}") from None


def read_trials(directory) -> list:
    """All trial CSVs below ``directory``, sorted by (dataset, file name)."""
    paths = sorted(Path(directory).rglob("subject*_*_*.csv"))
    trials = [read_trial(p) for p in paths]
    return sorted(trials, key=lambda t: (t.dataset, t.subject_id, ALL_LABELS.index(t.direction), t.trial))


# ---------------------------------------------------------------------------
# metrics


def metrics_to_csv(rows) -> str:
    """``rows``: iterables of (subject, direction, trial, error_cm, sparc)."""
    buf = io.StringIO()
    buf.write(",".join(METRIC_HEADER) + "\n")
    for subject, direction, trial, err, sp in rows:
        buf.write(f"{subject},{direction},{trial},{_fmt(err)},{'' if sp is None else _fmt(sp)}\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subject model


def model_to_dict(model: SubjectModel, subject_id: str = "") -> dict:
    s = model.settings
    diag = model.diagnostics
    return {
        "format": "footinterface-subject-model",
        "version": MODEL_VERSION,
        "subject": subject_id,
        "T": model.T.tolist(),
        "mean_n": model.mean.tolist(),
        "std_n": model.std.tolist(),
        "pretension_n": model.pretension.tolist(),
        "minmax": model.minmax.tolist(),
        "zero_band": {"lo": model.zero_band.lo.tolist(), "hi": model.zero_band.hi.tolist()},
        "settings": {"seed": s.seed, "tol": s.tol, "max_iter": s.max_iter,
                     "components": s.components, "rank_tol": s.rank_tol, "floor": s.floor,
                     "fractions": list(map(float, s.fractions))},
        "diagnostics": {k: diag[k] for k in sorted(diag)},
    }


def model_to_text(model: SubjectModel, subject_id: str = "") -> str:
    return _json_dump(model_to_dict(model, subject_id))


def model_from_text(text: str) -> SubjectModel:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"model file is not valid JSON: {exc}") from None
    if d.get("format") != "footinterface-subject-model":
        raise SchemaError("not a subject model file")
    if d.get("version") != MODEL_VERSION:
        raise SchemaError(f"unsupported model version {d.get('version')!r}")
    try:
        s = d["settings"]
        settings = IcaSettings(seed=int(s["seed"]), tol=float(s["tol"]), max_iter=int(s["max_iter"]),
                               components=int(s["components"]), rank_tol=float(s["rank_tol"]),
                               floor=float(s["floor"]),
                               fractions=tuple(s["fractions"]))
        return SubjectModel(np.array(d["T"]), np.array(d["mean_n"]), np.array(d["std_n"]),
                            np.array(d["minmax"]),
                            ZeroBand(np.array(d["zero_band"]["lo"]), np.array(d["zero_band"]["hi"])),
                            np.array(d["pretension_n"]), settings, dict(d.get("diagnostics", {})))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed model file: {exc}") from None


def write_model(model: SubjectModel, path, subject_id: str = "") -> Path:
    _write_text(path, model_to_text(model, subject_id))
    return Path(path)


def read_model(path) -> SubjectModel:
    return model_from_text(Path(path).read_text(encoding="utf-8"))


def model_subject(path) -> str:
    return json.loads(Path(path).read_text(encoding="utf-8")).get("subject", "")


# ---------------------------------------------------------------------------
# cohort manifest


def subject_to_dict(subject: SyntheticSubject) -> dict:
    return {"id": subject.subject_id, "distortion": subject.distortion.tolist(),
            "channel_gain": subject.channel_gain.tolist(), "noise_sigma": subject.noise_sigma,
            "seed": subject.seed}


def subject_from_dict(d: dict) -> SyntheticSubject:
    return SyntheticSubject(d["id"], np.array(d["distortion"]), np.array(d["channel_gain"]),
                            float(d["noise_sigma"]), int(d["seed"]))


def manifest_to_text(spec: CohortSpec, subjects, trials) -> str:
    """``trials``: (relative path, subject id, dataset, direction, trial, clipped)."""
    p = spec.profile
    doc = {
        "format": "footinterface-cohort",
        "version": MANIFEST_VERSION,
        "cohort": {"n_subjects": spec.n_subjects, "seed": spec.seed,
                   "rotation_deg": list(spec.rotation_deg), "skew_max": spec.skew_max,
                   "gain_range": list(spec.gain_range), "noise_sigma": spec.noise_sigma,
                   "profile": {"duration_s": p.duration, "shape": p.shape, "hold_s": p.hold,
                               "returns": p.returns, "rest_s": p.rest}},
        "subjects": [subject_to_dict(s) for s in subjects],
        "trials": [{"path": path, "subject": sid, "dataset": ds, "direction": d, "trial": k,
                    "clipped": clipped} for path, sid, ds, d, k, clipped in trials],
    }
    return _json_dump(doc)


def read_manifest(path):
    """Returns (CohortSpec, [SyntheticSubject], [trial entries])."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
        c = d["cohort"]
        p = c["profile"]
        profile = MotionProfile(p["duration_s"], p["shape"], p["hold_s"], p["returns"], p["rest_s"])
        spec = CohortSpec(int(c["n_subjects"]), int(c["seed"]), tuple(c["rotation_deg"]),
                          float(c["skew_max"]), tuple(c["gain_range"]), float(c["noise_sigma"]), profile)
        return spec, [subject_from_dict(s) for s in d["subjects"]], d["trials"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed manifest {path}: {exc}") from None
