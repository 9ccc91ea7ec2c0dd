"""Batch workflows behind the command line: simulate, calibrate, evaluate, metrics."""
from __future__ import annotations

import io
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import storage
from .directions import ALL_LABELS, SINGLE
from .errors import AllStatic, EmptyTrack, TooShort
from .geometry import DeviceGeometry
from .mapping import (CalibrationSet, IcaSettings, SubjectModel, fit_ica, reference_ranges,
                      score_commands, normalized_band, trial_commands)
from .signals import (FILTER_WINDOW, VELOCITY_THRESHOLD, ReferenceTrack, foot_path_error,
                      pose_trajectory, reference_track, smoothness_sparc, velocity_filter)
from .synthetic import CohortSpec, cohort_subjects, intended_path, protocol_trials, generate_trial

log = logging.getLogger(__name__)

KINEMATIC = "kinematic"
ICA = "ica"


def simulate_cohort(spec: CohortSpec, geom: DeviceGeometry, out_dir) -> list:
    """Write every trial CSV plus the manifest; returns the written trial paths."""
    out_dir = Path(out_dir)
    subjects = cohort_subjects(spec)
    entries, paths = [], []
    for subject in subjects:
        for dataset, label, k in protocol_trials():
            trial = generate_trial(subject, label, geom, spec.profile, k, dataset)
            rel = Path(f"subject{subject.subject_id}") / f"dataset{dataset}" / storage.trial_filename(trial)
            storage._write_text(out_dir / rel, storage.trial_to_csv(trial))
            clipped = intended_path(subject, label, spec.profile)[2]
            entries.append((rel.as_posix(), subject.subject_id, dataset, label, k, clipped))
            paths.append(out_dir / rel)
    storage._write_text(out_dir / storage.MANIFEST_NAME, storage.manifest_to_text(spec, subjects, entries))
    return paths


def subject_dirs(root) -> list:
    """(subject id, directory) pairs for a cohort root, or the root itself for one subject."""
    root = Path(root)
    dirs = sorted(p for p in root.glob("subject*") if p.is_dir())
    if dirs:
        return [(p.name[len("subject"):], p) for p in dirs]
    trials = storage.read_trials(root)
    ids = sorted({t.subject_id for t in trials})
    return [(i, root) for i in ids]


def calibrate(trials, geom: DeviceGeometry, settings: IcaSettings = IcaSettings(),
              window: int = FILTER_WINDOW) -> SubjectModel:
    """Fit a model on the dataset-1 single-direction trials among ``trials``."""
    modeling = [t for t in trials if t.dataset == 1 and t.direction in SINGLE]
    return fit_ica(CalibrationSet.from_trials(modeling, geom, window), settings)


@dataclass(frozen=True)
class TrialScore:
    subject: str
    dataset: int
    direction: str
    trial: int
    mapping: str
    accuracy: float
    counted: int
    path_error_cm: float


def _command_path_error(commands, t, geom, target, threshold):
    """Foot-path error of the command track expressed in reference-point cm."""
    track = ReferenceTrack(t, commands * reference_ranges(geom))
    try:
        track = velocity_filter(track, threshold)
    except AllStatic:
        return float("nan")
    return foot_path_error(track, target)


def score_trial(trial, geom: DeviceGeometry, model: SubjectModel | None, window=FILTER_WINDOW,
                threshold=VELOCITY_THRESHOLD, fractions=None) -> TrialScore:
    commands = trial_commands(trial, geom, model, window)
    band = normalized_band(fractions) if fractions is not None else None
    acc = score_commands(commands, trial.direction, band)
    err = _command_path_error(commands, trial.t, geom, trial.direction, threshold)
    return TrialScore(trial.subject_id, trial.dataset, trial.direction, trial.trial,
                      ICA if model is not None else KINEMATIC, acc.ratio, acc.counted, err)


def evaluate(trials, geom: DeviceGeometry, model: SubjectModel | None, mappings=(KINEMATIC, ICA),
             datasets=(2, 3), **kwargs) -> list:
    scores = []
    for trial in trials:
        if trial.dataset not in datasets:
            continue
        for mapping in mappings:
            scores.append(score_trial(trial, geom, model if mapping == ICA else None, **kwargs))
    return scores


def _mean_std(values):
    v = np.asarray([x for x in values if np.isfinite(x)], dtype=float)
    if v.size == 0:
        return float("nan"), float("nan")
    return float(v.mean()), float(v.std(ddof=1)) if v.size > 1 else 0.0


def subject_means(scores, mapping, datasets):
    """Per-subject mean accuracy over the trials of ``datasets``."""
    by_subject = {}
    for s in scores:
        if s.mapping == mapping and s.dataset in datasets:
            by_subject.setdefault(s.subject, []).append(s.accuracy)
    return {k: float(np.mean(v)) for k, v in sorted(by_subject.items())}


REPORT_HEADER = ["scope", "subject", "dataset", "direction", "trial", "mapping", "accuracy",
                 "accuracy_std", "foot_path_error_cm", "foot_path_error_std_cm"]


def _f(x):
    return "" if x is None or not np.isfinite(x) else format(float(x), ".6f")


def report_to_csv(scores) -> str:
    """Per-trial rows, per-direction means over the cohort and a cohort footer.

    Footer rows hold the mean +- std over subjects of each subject's mean
    accuracy, per dataset and mapping.
    """
    buf = io.StringIO()
    buf.write(",".join(REPORT_HEADER) + "\n")
    key = lambda s: (s.dataset, s.subject, ALL_LABELS.index(s.direction), s.trial, s.mapping)  # noqa: E731
    scores = sorted(scores, key=key)
    for s in scores:
        buf.write(f"trial,{s.subject},{s.dataset},{s.direction},{s.trial},{s.mapping},"
                  f"{_f(s.accuracy)},,{_f(s.path_error_cm)},\n")
    groups = {}
    for s in scores:
        groups.setdefault((s.dataset, ALL_LABELS.index(s.direction), s.mapping), []).append(s)
    for (dataset, di, mapping), items in sorted(groups.items()):
        am, asd = _mean_std([s.accuracy for s in items])
        em, esd = _mean_std([s.path_error_cm for s in items])
        buf.write(f"direction,all,{dataset},{ALL_LABELS[di]},,{mapping},{_f(am)},{_f(asd)},"
                  f"{_f(em)},{_f(esd)}\n")
    for dataset in sorted({s.dataset for s in scores}):
        for mapping in sorted({s.mapping for s in scores}):
            per = subject_means(scores, mapping, (dataset,))
            if not per:
                continue
            am, asd = _mean_std(per.values())
            em, esd = _mean_std([s.path_error_cm for s in scores
                                 if s.dataset == dataset and s.mapping == mapping])
            buf.write(f"cohort,all,{dataset},all,,{mapping},{_f(am)},{_f(asd)},{_f(em)},{_f(esd)}\n")
    return buf.getvalue()


def trial_metrics(trial, geom: DeviceGeometry, window=FILTER_WINDOW, threshold=VELOCITY_THRESHOLD):
    """Foot-path error (cm) and SPARC of the kinematic reference track; SPARC is None when too short."""
    poses = pose_trajectory(trial, geom, window)
    track = reference_track(poses, trial.t, geom)
    try:
        moving = velocity_filter(track, threshold)
    except AllStatic:
        return float("nan"), None
    try:
        err = foot_path_error(moving, trial.direction)
    except EmptyTrack:
        err = float("nan")
    try:
        sp = smoothness_sparc(moving)
    except TooShort:
        sp = None
    return err, sp
