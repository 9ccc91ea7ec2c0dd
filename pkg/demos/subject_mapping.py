"""Calibrate subject-specific mappings on a synthetic cohort and compare them with forward kinematics.

Run: python3 demos/subject_mapping.py
"""
import warnings

import numpy as np

from footinterface import pipeline
from footinterface.errors import AmbiguousSelection
from footinterface.geometry import default_geometry
from footinterface.synthetic import CohortSpec, cohort_subjects, subject_trials

geom = default_geometry()
spec = CohortSpec(n_subjects=10, seed=0)
warnings.simplefilter("ignore", AmbiguousSelection)

scores = []
for subject in cohort_subjects(spec):
    trials = list(subject_trials(subject, geom, spec.profile))
    # dataset 1 calibrates, datasets 2 (single) and 3 (diagonal) are held out
    model = pipeline.calibrate(trials, geom)
    scores += pipeline.evaluate(trials, geom, model)

print("mean +- std over subjects of direction identification accuracy")
for dataset, name in ((2, "single directions"), (3, "diagonals")):
    for mapping in (pipeline.KINEMATIC, pipeline.ICA):
        per = list(pipeline.subject_means(scores, mapping, (dataset,)).values())
        print(f"  {name:17s} {mapping:9s} {np.mean(per):.3f} +- {np.std(per, ddof=1):.3f}")

print("\nhardest held-out directions for the kinematic baseline:")
by_dir = {}
for s in scores:
    if s.mapping == pipeline.KINEMATIC:
        by_dir.setdefault(s.direction, []).append(s.accuracy)
for label, acc in sorted(by_dir.items(), key=lambda kv: np.mean(kv[1]))[:4]:
    print(f"  {label:4s} {np.mean(acc):.3f}")
