"""Subject-specific ICA mapping, the kinematic baseline and direction scoring.

Commands are 4-vectors ordered (x, y, phi, theta). Both mappings produce
"unbanded" commands in [-1, 1] first; the zero band is applied afterwards so
that diagonal trials can be rotated before banding.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.decomposition import FastICA
from sklearn.exceptions import ConvergenceWarning

from .directions import AXIS_PAIRS, DIAGONAL, SINGLE, is_diagonal
from .errors import (AmbiguousSelection, ConstantChannel, DegenerateRange, DegenerateWhitening,
                     NonConvergence, NotDiagonal)
from .geometry import DeviceGeometry
from .kinematics import ForceFrame, pose_from_forces
from .signals import (FILTER_WINDOW, HOME_SAMPLES, YAW_SCALE, TrialRecord, moving_average,
                      reference_point)

ZERO_BAND_FRACTIONS = np.array([0.3, 0.3, 0.4, 0.4])
MIN_PAIR_SAMPLES = 200
AMBIGUITY_MARGIN = 0.05
MODEL_VERSION = 1


# ---------------------------------------------------------------------------
# zero band


@dataclass(frozen=True)
class ZeroBand:
    """Per-DOF dead zone; values with lo <= v <= hi are reported as exactly 0."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != (4,) or hi.shape != (4,):
            raise ValueError("a zero band has 4 (lo, hi) pairs")
        if np.any(lo >= 0) or np.any(hi <= 0):
            raise ValueError("zero band must straddle 0 (lo < 0 < hi)")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def symmetric(cls, widths):
        widths = np.asarray(widths, dtype=float)
        return cls(-widths, widths)

    def apply(self, commands) -> np.ndarray:
        d = np.array(commands, dtype=float)
        inside = (d >= self.lo) & (d <= self.hi)
        d[inside] = 0.0
        return d


def zero_band_from_ranges(mins, maxs, fractions=ZERO_BAND_FRACTIONS) -> ZeroBand:
    """Band = [frac * min, frac * max] per DOF (30% translations, 40% rotations)."""
    mins = np.asarray(mins, dtype=float)
    maxs = np.asarray(maxs, dtype=float)
    if np.any(maxs <= mins):
        dof = int(np.flatnonzero(maxs <= mins)[0])
        raise DegenerateRange(f"DOF {dof} has an empty output range")
    if np.any(mins >= 0) or np.any(maxs <= 0):
        raise DegenerateRange("every DOF needs outputs on both sides of zero")
    fractions = np.asarray(fractions, dtype=float)
    return ZeroBand(fractions * mins, fractions * maxs)


def zero_band_from_model(outputs, fractions=ZERO_BAND_FRACTIONS) -> ZeroBand:
    out = np.asarray(outputs, dtype=float)
    return zero_band_from_ranges(out.min(axis=0), out.max(axis=0), fractions)


def normalized_band(fractions=ZERO_BAND_FRACTIONS) -> ZeroBand:
    """The zero band expressed in min-max normalized command units."""
    return ZeroBand.symmetric(fractions)


def minmax_scale(raw, mins, maxs) -> np.ndarray:
    """Sign-preserving min-max scaling: positives by max, negatives by |min|, clamped to [-1, 1]."""
    raw = np.asarray(raw, dtype=float)
    scaled = np.where(raw >= 0, raw / maxs, raw / -np.asarray(mins))
    return np.clip(scaled, -1.0, 1.0)


# ---------------------------------------------------------------------------
# z-score


def zscore_stats(frames):
    """Channel means and sample standard deviations (n - 1 denominator)."""
    f = np.asarray(frames, dtype=float)
    if f.ndim != 2 or f.shape[0] < 2:
        raise ValueError("z-score statistics need at least 2 frames")
    mean = f.mean(axis=0)
    std = f.std(axis=0, ddof=1)
    flat = tuple(int(i) for i in np.flatnonzero(std < 1e-9))
    if flat:
        raise ConstantChannel(flat)
    return mean, std


def normalize(f, mean, std):
    return (np.asarray(f, dtype=float) - mean) / std


def denormalize(fn, mean, std):
    return np.asarray(fn, dtype=float) * std + mean


# ---------------------------------------------------------------------------
# calibration data


@dataclass
class CalibrationSet:
    """Filtered delta forces per axis pair with +1/-1 direction labels per sample.

    ``pairs`` maps a DOF index (0=x, 1=y, 2=phi, 3=theta) to ``(forces, labels)``.
    """

    pairs: dict
    pretension: np.ndarray = field(default_factory=lambda: np.zeros(8))

    def __post_init__(self):
        self.pretension = np.asarray(self.pretension, dtype=float)
        missing = [AXIS_PAIRS[d] for d in range(4) if d not in self.pairs]
        if missing:
            names = ", ".join("&".join(p) for p in missing)
            raise ValueError(f"calibration is missing axis pairs: {names}")
        for dof, (forces, labels) in self.pairs.items():
            if forces.ndim != 2 or forces.shape[1] != 8:
                raise ValueError("calibration forces must have 8 channels")
            if forces.shape[0] == 0 or forces.shape[0] != labels.shape[0]:
                raise ValueError(f"axis pair {dof} has no samples or mismatched labels")

    @classmethod
    def from_trials(cls, trials, geom: DeviceGeometry, window: int = FILTER_WINDOW):
        """Group single-direction trials by axis pair; diagonal trials are ignored."""
        collected = {}
        for trial in trials:
            if trial.direction not in SINGLE:
                continue
            axis, sign = SINGLE[trial.direction]
            forces = moving_average(trial.forces, window) - geom.pretension
            collected.setdefault(axis, []).append((forces, np.full(len(trial), float(sign))))
        missing = sorted({lab for d, pair in AXIS_PAIRS.items() for lab in pair
                          if d not in collected or not any(
                              (lab == pair[0]) == (lb[0] > 0) for _, lb in collected[d])})
        if missing:
            raise ValueError(f"calibration is missing directions: {', '.join(missing)}")
        pairs = {d: (np.vstack([f for f, _ in items]), np.concatenate([lb for _, lb in items]))
                 for d, items in sorted(collected.items())}
        return cls(pairs, geom.pretension.copy())

    def stacked(self) -> np.ndarray:
        return np.vstack([self.pairs[d][0] for d in range(4)])


# ---------------------------------------------------------------------------
# component alignment


@dataclass(frozen=True)
class Alignment:
    vector: np.ndarray
    index: int
    correlation: float
    ambiguous: bool


def align_component(candidates, data, profile, margin: float = AMBIGUITY_MARGIN) -> Alignment:
    """Pick the candidate whose activation best tracks ``profile`` and fix its sign.

    ``candidates`` is (k, d); ``data`` is (n, d); ``profile`` holds +1 for
    samples of the positive direction and -1 for the negative one (0 for
    rest). Emits AmbiguousSelection when the two best |correlations| are
    closer than ``margin``; the first of them is kept.
    """
    cands = np.atleast_2d(np.asarray(candidates, dtype=float))
    acts = np.asarray(data, dtype=float) @ cands.T
    prof = np.asarray(profile, dtype=float)
    corr = np.array([_corr(acts[:, j], prof) for j in range(cands.shape[0])])
    order = np.argsort(-np.abs(corr), kind="stable")
    best = int(order[0])
    ambiguous = len(order) > 1 and abs(corr[best]) - abs(corr[order[1]]) < margin
    if ambiguous:
        warnings.warn(AmbiguousSelection(
            f"candidates {best} and {int(order[1])} are within {margin} in |correlation|"),
            stacklevel=2)
    sign = -1.0 if corr[best] < 0 else 1.0
    return Alignment(sign * cands[best], best, float(abs(corr[best])), bool(ambiguous))


def _corr(a, b):
    a = a - a.mean()
    b = b - b.mean()
    den = math.sqrt(float(a @ a) * float(b @ b))
    return 0.0 if den == 0 else float(a @ b) / den


# ---------------------------------------------------------------------------
# model


@dataclass(frozen=True)
class IcaSettings:
    seed: int = 42
    tol: float = 1e-6
    max_iter: int = 500
    components: int = 2
    rank_tol: float = 1e-4  # directions with less pooled variance share are discarded
    floor: float = 3e-3  # weakest whitened variance relative to the leading one
    fractions: tuple = tuple(ZERO_BAND_FRACTIONS)


@dataclass(frozen=True)
class SubjectModel:
    """4x8 mapping T with its z-score statistics, output ranges and zero band."""

    T: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    minmax: np.ndarray  # (4, 2) rows of (min, max) raw outputs on calibration data
    zero_band: ZeroBand  # raw output units
    pretension: np.ndarray = field(default_factory=lambda: np.zeros(8))
    settings: IcaSettings = IcaSettings()
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if np.asarray(self.T).shape != (4, 8):
            raise ValueError("T must be 4x8")
        if np.any(np.asarray(self.std) <= 0):
            raise ValueError("channel standard deviations must be positive")
        mm = np.asarray(self.minmax, dtype=float)
        if np.any(mm[:, 0] >= mm[:, 1]):
            raise ValueError("minmax needs min < max on every DOF")

    def raw(self, delta_forces) -> np.ndarray:
        """T applied to z-scored delta forces, referenced so the home reading maps to 0."""
        f = np.asarray(delta_forces, dtype=float)
        return (normalize(f, self.mean, self.std) - normalize(0.0, self.mean, self.std)) @ self.T.T

    def unbanded(self, delta_forces) -> np.ndarray:
        return minmax_scale(self.raw(delta_forces), self.minmax[:, 0], self.minmax[:, 1])

    @property
    def normalized_band(self) -> ZeroBand:
        return ZeroBand(self.zero_band.lo / -self.minmax[:, 0], self.zero_band.hi / self.minmax[:, 1])


def _whitener(z, rank_tol, required=4, floor=0.0):
    """Whitening projection onto the principal directions above ``rank_tol``.

    Variances below ``floor`` times the leading one are raised to it, which
    caps how much a weak direction (mostly sensor noise) is amplified.
    """
    vals, vecs = np.linalg.eigh(np.cov(z, rowvar=False))
    vals, vecs = vals[::-1], vecs[:, ::-1]
    rank = int(np.sum(vals > rank_tol * vals[0]))
    if rank < required:
        raise DegenerateWhitening(f"calibration covariance has rank {rank}, need {required}")
    vals, vecs = np.maximum(vals[:rank], floor * vals[0]), vecs[:, :rank]
    # fix eigenvector signs so the whitener is reproducible
    vecs = vecs * np.where(vecs[np.abs(vecs).argmax(axis=0), range(rank)] < 0, -1.0, 1.0)
    return (vecs / np.sqrt(vals)).T


def _pair_components(y, settings: IcaSettings, dof: int):
    """FastICA on the top principal components of one axis pair (pooled-whitened data)."""
    yc = y - y.mean(axis=0)
    vals, vecs = np.linalg.eigh(np.cov(yc, rowvar=False))
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    m = int(min(settings.components, np.sum(vals > settings.rank_tol * vals[0])))
    if m < 1:
        raise DegenerateWhitening(f"axis pair {dof} carries no variance")
    basis = vecs[:, :m] / np.sqrt(vals[:m])
    x = yc @ basis
    if m == 1:
        rows = basis.T
        return rows / np.linalg.norm(rows, axis=1, keepdims=True), rows, 0
    ica = FastICA(algorithm="parallel", whiten=False, fun="logcosh",
                  tol=settings.tol, max_iter=settings.max_iter, random_state=settings.seed)
    with warnings.catch_warnings():
        warnings.simplefilter("error", ConvergenceWarning)
        try:
            ica.fit(x)
        except ConvergenceWarning:
            raise NonConvergence(f"FastICA did not converge on axis pair {dof}",
                                 iterations=settings.max_iter) from None
    rows = ica.components_ @ basis.T
    rows = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    return rows, ica.components_ @ basis.T, int(ica.n_iter_)


def _candidates(rows, data, profile):
    """ICA rows led by their best combination for the axis profile.

    A pair can split one axis over two sources: toe-up and toe-down press
    different cells, and yaw also drives an even (quadratic) source. The
    combination sum_j r_j w_j, with r_j the profile correlation of source j,
    is the unit direction in their span that tracks the profile best. Rows
    that coincide with it are dropped so they do not register as a tie.
    """
    acts = data @ rows.T
    r = np.array([_corr(acts[:, j], profile) for j in range(rows.shape[0])])
    # sources are uncorrelated with unit variance within the pair, so weights are r
    scale = acts.std(axis=0)
    combo = (r / np.where(scale > 0, scale, 1.0)) @ rows
    norm = np.linalg.norm(combo)
    if norm == 0:
        return rows
    combo = combo / norm
    distinct = [w for w in rows if abs(float(w @ combo)) < 0.99]
    return np.array([combo] + distinct)


def fit_ica(calib: CalibrationSet, settings: IcaSettings = IcaSettings()) -> SubjectModel:
    """Fit the 4x8 mapping from single-direction calibration data.

    Channels are z-scored and whitened over the pooled calibration data, so
    the four axis patterns come out orthogonal. FastICA then runs per axis
    pair and align_component picks and signs one row per DOF.
    """
    for dof, (forces, _) in calib.pairs.items():
        if forces.shape[0] < MIN_PAIR_SAMPLES:
            raise ValueError(f"axis pair {dof} has {forces.shape[0]} samples, need {MIN_PAIR_SAMPLES}")
    mean, std = zscore_stats(calib.stacked())
    whitener = _whitener(normalize(calib.stacked(), mean, std), settings.rank_tol, floor=settings.floor)
    T = np.zeros((4, 8))
    diag = {"iterations": [], "correlations": [], "ambiguous": [], "rank": int(whitener.shape[0])}
    for dof in range(4):
        forces, labels = calib.pairs[dof]
        y = normalize(forces, mean, std) @ whitener.T
        rows, _, n_iter = _pair_components(y, settings, dof)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", AmbiguousSelection)
            al = align_component(_candidates(rows, y, labels), y, labels)
        for w in caught:
            warnings.warn(w.message, stacklevel=2)
        T[dof] = al.vector @ whitener
        diag["iterations"].append(n_iter)
        diag["correlations"].append(al.correlation)
        diag["ambiguous"].append(al.ambiguous)
    home = normalize(0.0, mean, std)
    outputs = (normalize(calib.stacked(), mean, std) - home) @ T.T
    mins, maxs = outputs.min(axis=0), outputs.max(axis=0)
    band = zero_band_from_ranges(mins, maxs, settings.fractions)
    return SubjectModel(T, mean, std, np.column_stack([mins, maxs]), band, calib.pretension.copy(),
                        settings, diag)


def predict_command(model: SubjectModel, frame) -> np.ndarray:
    """Command in [-1, 1]^4 from raw readings (ForceFrame, 8-vector or n x 8)."""
    forces = frame.forces if isinstance(frame, ForceFrame) else np.asarray(frame, dtype=float)
    return model.normalized_band.apply(model.unbanded(forces - model.pretension))


# ---------------------------------------------------------------------------
# kinematic baseline


def reference_ranges(geom: DeviceGeometry, yaw_scale: float = YAW_SCALE) -> np.ndarray:
    """Reference-point excursion at the workspace limits: [x, y, s*P_phi, P_theta] (cm)."""
    d = geom.reference_offset
    return np.array([geom.x_limit, geom.y_limit,
                     yaw_scale * 2.0 * d * math.sin(geom.yaw_limit / 2.0),
                     d * math.sin(geom.pitch_limit)])


def kinematic_zero_band(geom: DeviceGeometry, fractions=ZERO_BAND_FRACTIONS) -> ZeroBand:
    """Zero band in physical units (cm for the reference point) from the ideal ranges."""
    r = reference_ranges(geom)
    return zero_band_from_ranges(-r, r, fractions)


def kinematic_unbanded(frame, geom: DeviceGeometry, home=None) -> np.ndarray:
    forces = frame.forces if isinstance(frame, ForceFrame) else np.asarray(frame, dtype=float)
    p = reference_point(pose_from_forces(forces, geom), geom)
    if home is not None:
        p = p - home
    return np.clip(p / reference_ranges(geom), -1.0, 1.0)


def kinematic_command(frame, geom: DeviceGeometry, zero_band: ZeroBand | None = None) -> np.ndarray:
    """Forward-kinematics baseline: reference point scaled by the workspace limits, banded.

    ``zero_band`` is in normalized units; the default is the 30%/40% rule.
    """
    band = zero_band or normalized_band()
    return band.apply(kinematic_unbanded(frame, geom))


# ---------------------------------------------------------------------------
# scoring


@dataclass(frozen=True)
class Accuracy:
    ratio: float
    correct: int
    counted: int

    @property
    def all_zero(self) -> bool:
        return self.counted == 0

    def __float__(self):
        return self.ratio


def _correct_mask(d, axis, sign, ignore=()):
    others = [k for k in range(4) if k != axis and k not in ignore]
    ok = np.sign(d[:, axis]) == sign
    for k in others:
        ok &= d[:, k] == 0
    return ok


def direction_accuracy(commands, target: str, ignore=()) -> Accuracy:
    """Share of non-zero samples whose zero/sign pattern matches ``target``."""
    d = np.atleast_2d(np.asarray(commands, dtype=float))
    if d.shape[0] == 0:
        raise ValueError("no commands to score")
    axis, sign = SINGLE[target]
    keep = [k for k in range(4) if k not in ignore]
    moving = np.any(d[:, keep] != 0, axis=1)
    correct = int((_correct_mask(d, axis, sign, ignore) & moving).sum())
    counted = int(moving.sum())
    return Accuracy(correct / counted if counted else 0.0, correct, counted)


def diagonal_transform(commands, diagonal: str):
    """Rotate the diagonal's command plane by 45 degrees onto its first component.

    Returns the rotated commands and the single-direction target; yaw takes no
    part in scoring.
    """
    if not is_diagonal(diagonal):
        raise NotDiagonal(f"{diagonal!r} is not a diagonal direction")
    first, second = DIAGONAL[diagonal]
    (i, s1), (j, s2) = SINGLE[first], SINGLE[second]
    # the diagonal sits at atan2(s2, s1) in the (i, j) plane; the target at atan2(0, s1)
    delta = -s1 * s2 * math.pi / 4.0
    c, s = math.cos(delta), math.sin(delta)
    d = np.array(np.atleast_2d(commands), dtype=float)
    a, b = d[:, i].copy(), d[:, j].copy()
    d[:, i] = c * a - s * b
    d[:, j] = s * a + c * b
    return d, first


def score_commands(unbanded, target: str, band: ZeroBand | None = None) -> Accuracy:
    """Band then score; diagonals are rotated first and ignore yaw."""
    band = band or normalized_band()
    if is_diagonal(target):
        rotated, single = diagonal_transform(unbanded, target)
        return direction_accuracy(band.apply(rotated), single, ignore=(2,))
    return direction_accuracy(band.apply(unbanded), target)


def trial_commands(trial: TrialRecord, geom: DeviceGeometry, model: SubjectModel | None = None,
                   window: int = FILTER_WINDOW, home_samples: int = HOME_SAMPLES) -> np.ndarray:
    """Unbanded commands for a trial; kinematic baseline when ``model`` is None.

    Each trial is re-zeroed on the mean of its first ``home_samples`` outputs.
    """
    forces = moving_average(trial.forces, window)
    if model is None:
        p = reference_point(pose_from_forces(forces, geom), geom)
        if home_samples:
            p = p - p[:home_samples].mean(axis=0)
        return np.clip(p / reference_ranges(geom), -1.0, 1.0)
    raw = model.raw(forces - model.pretension)
    if home_samples:
        raw = raw - raw[:home_samples].mean(axis=0)
    return minmax_scale(raw, model.minmax[:, 0], model.minmax[:, 1])
