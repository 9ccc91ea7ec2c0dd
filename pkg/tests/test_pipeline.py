import numpy as np
import pytest

from conftest import rotation_xy
from footinterface import pipeline
from footinterface.synthetic import SyntheticSubject, subject_trials


@pytest.fixture(scope="module")
def scored(geom):
    subject = SyntheticSubject("05", rotation_xy(20.0), noise_sigma=0.05, seed=5)
    trials = list(subject_trials(subject, geom))
    model = pipeline.calibrate(trials, geom)
    return pipeline.evaluate(trials, geom, model)


class TestEvaluate:
    def test_counts(self, scored):
        assert len(scored) == (24 + 36) * 2
        assert {s.dataset for s in scored} == {2, 3}

    def test_ica_wins(self, scored):
        means = {m: np.mean([s.accuracy for s in scored if s.mapping == m and s.dataset == 2])
                 for m in (pipeline.ICA, pipeline.KINEMATIC)}
        assert means[pipeline.ICA] - means[pipeline.KINEMATIC] >= 0.1

    def test_path_error_finite(self, scored):
        assert all(np.isfinite(s.path_error_cm) and s.path_error_cm >= 0 for s in scored)


class TestReport:
    def test_layout(self, scored):
        lines = pipeline.report_to_csv(scored).splitlines()
        assert lines[0].split(",") == pipeline.REPORT_HEADER
        scopes = [l.split(",")[0] for l in lines[1:]]
        assert scopes.count("trial") == len(scored)
        assert scopes.count("direction") == 20 * 2
        assert scopes.count("cohort") == 4
        assert scopes == sorted(scopes, key=["trial", "direction", "cohort"].index)

    def test_order_independent(self, scored):
        assert pipeline.report_to_csv(scored) == pipeline.report_to_csv(list(reversed(scored)))


class TestTrialMetrics:
    def test_forward_stroke(self, geom):
        trial = next(subject_trials(SyntheticSubject("01"), geom, datasets=(1,)))
        err, sp = pipeline.trial_metrics(trial, geom)
        assert err == pytest.approx(0.0, abs=1e-9)
        assert -3.0 < sp < 0.0

    def test_static_trial(self, geom):
        from footinterface.signals import TrialRecord
        trial = TrialRecord("F", np.arange(40) * 0.02, np.tile(geom.pretension, (40, 1)))
        err, sp = pipeline.trial_metrics(trial, geom)
        assert np.isnan(err) and sp is None
