"""Depth-based classification and ranking-experiment drivers.

Classification assigns a test observation the label of the group in
which it sits deepest. Observations may first be cut into time
segments (for example the first and last five seconds of a trial, each
with its own kernel constants); every segment is classified
independently and reported separately. Cross-validation is stratified
k-fold, and everything downstream of the fold split is fit on training
observations only, including the per-group centers used by the
center-based depth.

The ranking driver reproduces the simulation studies end to end:
simulate, smooth, rank by depth, and write plot-ready CSV artifacts.
"""
from __future__ import annotations

import csv
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .center import AnnealSchedule, CenterEstimate, SgdConfig, SsdObjective, combined_center
from .depth import (
    H_DEPTH,
    MODIFIED_H_DEPTH,
    DepthConfig,
    h_depth,
    modified_band_depth,
    modified_h_depth,
    rank,
)
from .errors import DataValidationError
from .kernel import KernelSpec
from .process import IntensitySpec, PointProcess, simulate_hpp, simulate_ipp
from .smoothing import smooth

DEFAULT_ANNEAL_N_MAX = 20000
CV_BUDGET_DIVISOR = 4


class Segment(NamedTuple):
    """Half-open time window [start, end) with its own kernel spec.

    The final segment of a partition also includes its right endpoint.
    spec.T must equal end - start; sliced events are re-anchored to
    start at zero.
    """

    start: float
    end: float
    spec: KernelSpec


def slice_segment(p: PointProcess, start: float, end: float, include_end: bool = False) -> PointProcess:
    """Events of p inside the window, shifted so the window begins at 0."""
    if not (0.0 <= start < end <= p.T):
        raise DataValidationError(f"window [{start!r}, {end!r}) does not fit inside [0, {p.T!r}]")
    mask = (p.events >= start) & ((p.events <= end) if include_end else (p.events < end))
    return PointProcess(p.events[mask] - start, end - start, id=p.id, label=p.label)


@dataclass(frozen=True)
class ClassifierConfig:
    """Depth-classification protocol settings.

    segments must partition [0, T] contiguously from zero; a single
    full-window segment is the unsegmented protocol. The depth config
    decides the method; its h rule is resolved against each segment's
    kernel spec. Group centers (center-based method only) are
    re-estimated per fold on training data with the annealing budget
    cut to n_max / 4 unless an explicit schedule is supplied.
    """

    segments: tuple[Segment, ...]
    depth: DepthConfig = field(default_factory=lambda: DepthConfig(method=MODIFIED_H_DEPTH))
    folds: int = 4
    seed: int = 0
    anneal: AnnealSchedule | None = None
    sgd: SgdConfig | None = None
    d_r: int = 3

    def __post_init__(self) -> None:
        if not self.segments:
            raise DataValidationError("at least one segment is required")
        if self.segments[0].start != 0.0:
            raise DataValidationError("the first segment must start at 0")
        prev_end = 0.0
        for seg in self.segments:
            if not (seg.start == prev_end and seg.end > seg.start):
                raise DataValidationError(f"segments must be contiguous and increasing, got {seg!r} after end {prev_end!r}")
            if seg.spec.T != seg.end - seg.start:
                raise DataValidationError(
                    f"segment [{seg.start!r}, {seg.end!r}) needs spec.T = {seg.end - seg.start!r}, got {seg.spec.T!r}"
                )
            prev_end = seg.end
        if self.folds < 2:
            raise DataValidationError("folds must be >= 2")
        if self.d_r < 1:
            raise DataValidationError("d_r must be >= 1")

    @property
    def T(self) -> float:
        return self.segments[-1].end

    def schedule(self) -> AnnealSchedule:
        if self.anneal is not None:
            return self.anneal
        return AnnealSchedule(n_max=DEFAULT_ANNEAL_N_MAX // CV_BUDGET_DIVISOR)


def full_window_config(spec: KernelSpec, **kwargs) -> ClassifierConfig:
    """ClassifierConfig with one segment spanning [0, spec.T]."""
    return ClassifierConfig(segments=(Segment(0.0, spec.T, spec),), **kwargs)


class ClassMetrics(NamedTuple):
    precision: float
    recall: float
    f1: float
    support: int


class FoldResult(NamedTuple):
    fold: int
    accuracy: float
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]


@dataclass(frozen=True)
class EvalReport:
    """Classification quality for one segment, aggregated over folds.

    confusion[true][pred] counts test observations; accuracy is the
    diagonal mass; per_class holds precision, recall, F1, support.
    """

    accuracy: float
    per_class: dict[str, ClassMetrics]
    confusion: dict[str, dict[str, int]]
    folds: tuple[FoldResult, ...]
    config: dict

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "per_class": {k: m._asdict() for k, m in self.per_class.items()},
            "confusion": self.confusion,
            "folds": [f._asdict() for f in self.folds],
            "config": self.config,
        }


def _estimate_center(
    group: Sequence[PointProcess], spec: KernelSpec, cfg: ClassifierConfig, seed: int
) -> PointProcess:
    obj = SsdObjective(group, spec)
    return combined_center(obj, schedule=cfg.schedule(), sgd=cfg.sgd, d_r=cfg.d_r, seed=seed).center


def classify_by_depth(
    test: PointProcess,
    groups: Mapping[str, Sequence[PointProcess]],
    depth_cfg: DepthConfig,
    spec: KernelSpec,
    centers: Mapping[str, PointProcess] | None = None,
    seed: int = 0,
) -> str:
    """Label of the group where the test observation is deepest.

    For the center-based method, per-group centers are taken from
    ``centers`` or estimated here from the group members. Exact depth
    ties go to the lexicographically smaller label with a warning.
    """
    if not groups:
        raise DataValidationError("at least one labeled group is required")
    for label, members in groups.items():
        if not members:
            raise DataValidationError(f"group {label!r} is empty")
    if depth_cfg.method == MODIFIED_H_DEPTH and centers is None:
        cc = full_window_config(spec)
        centers = {
            label: _estimate_center(members, spec, cc, seed) for label, members in sorted(groups.items())
        }
    scores: dict[str, float] = {}
    for label in sorted(groups):
        if depth_cfg.method == H_DEPTH:
            scores[label] = h_depth(test, groups[label], depth_cfg, spec)
        elif depth_cfg.method == MODIFIED_H_DEPTH:
            scores[label] = modified_h_depth(test, centers[label], depth_cfg, spec)  # type: ignore[index]
        else:
            scores[label] = modified_band_depth(test, groups[label], spec, grid_size=depth_cfg.grid_size)
    best = max(scores.values())
    winners = sorted(label for label, v in scores.items() if v == best)
    if len(winners) > 1:
        warnings.warn(f"depth tie between {winners}; choosing {winners[0]!r}", stacklevel=2)
    return winners[0]


def _stratified_folds(labels: Sequence[str], k: int, seed: int) -> list[list[int]]:
    """k folds, each containing every label; dealt round-robin after a
    seeded shuffle within each label. Reshuffles with stepped seeds up
    to 10 times before giving up."""
    by_label: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        by_label.setdefault(lab, []).append(i)
    for attempt in range(10):
        rng = np.random.default_rng([seed + attempt, 9001])
        folds: list[list[int]] = [[] for _ in range(k)]
        offset = 0
        for lab in sorted(by_label):
            idx = list(by_label[lab])
            rng.shuffle(idx)
            for j, i in enumerate(idx):
                folds[(offset + j) % k].append(i)
            offset += len(idx)
        ok = all(len({labels[i] for i in fold}) == len(by_label) for fold in folds)
        if ok:
            return [sorted(f) for f in folds]
    raise DataValidationError(
        f"could not build {k} stratified folds with every class present; smallest class has "
        f"{min(len(v) for v in by_label.values())} members"
    )


def cross_validate(
    dataset: Sequence[PointProcess], cfg: ClassifierConfig, n_jobs: int = 1
) -> tuple[EvalReport, ...]:
    """Stratified k-fold depth classification, one report per segment.

    Centers and reference samples are built from training folds only;
    each fold report records the train/test id split so that leakage
    is checkable after the fact.
    """
    if any(p.label is None for p in dataset):
        raise DataValidationError("every observation needs a label for classification")
    if any(p.T != cfg.T for p in dataset):
        raise DataValidationError(f"observations must live on [0, {cfg.T!r}] to match the segmentation")
    labels = [p.label for p in dataset]
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise DataValidationError("classification needs at least two classes")
    folds = _stratified_folds(labels, cfg.folds, cfg.seed)

    def run_fold(f: int) -> list[list[tuple[str, str]]]:
        test_idx = set(folds[f])
        train = [dataset[i] for i in range(len(dataset)) if i not in test_idx]
        test = [dataset[i] for i in folds[f]]
        outcomes: list[list[tuple[str, str]]] = []
        for si, seg in enumerate(cfg.segments):
            is_last = si == len(cfg.segments) - 1
            tr = [slice_segment(p, seg.start, seg.end, include_end=is_last) for p in train]
            te = [slice_segment(p, seg.start, seg.end, include_end=is_last) for p in test]
            groups = {c: [p for p in tr if p.label == c] for c in classes}
            centers = None
            if cfg.depth.method == MODIFIED_H_DEPTH:
                centers = {
                    c: _estimate_center(
                        groups[c], seg.spec, cfg, seed=((cfg.seed * 1000003 + f) * 1000003 + si) * 1000003 + ci
                    )
                    for ci, c in enumerate(classes)
                }
            seg_out = [
                (p.label, classify_by_depth(p, groups, cfg.depth, seg.spec, centers=centers))
                for p in te
            ]
            outcomes.append(seg_out)
        return outcomes

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            fold_outcomes = list(pool.map(run_fold, range(cfg.folds)))
    else:
        fold_outcomes = [run_fold(f) for f in range(cfg.folds)]

    reports = []
    for si, seg in enumerate(cfg.segments):
        confusion = {c: {d: 0 for d in classes} for c in classes}
        fold_results = []
        for f in range(cfg.folds):
            pairs = fold_outcomes[f][si]
            hits = sum(1 for true, pred in pairs if true == pred)
            for true, pred in pairs:
                confusion[true][pred] += 1
            test_idx = folds[f]
            fold_results.append(
                FoldResult(
                    fold=f,
                    accuracy=hits / len(pairs),
                    train_ids=tuple(
                        dataset[i].id or f"#{i}" for i in range(len(dataset)) if i not in set(test_idx)
                    ),
                    test_ids=tuple(dataset[i].id or f"#{i}" for i in test_idx),
                )
            )
        total = sum(sum(row.values()) for row in confusion.values())
        correct = sum(confusion[c][c] for c in classes)
        per_class = {}
        for c in classes:
            tp = confusion[c][c]
            fn = sum(confusion[c][d] for d in classes if d != c)
            fp = sum(confusion[d][c] for d in classes if d != c)
            precision = tp / (tp + fp) if tp + fp else 0.0
            recall = tp / (tp + fn) if tp + fn else 0.0
            f1 = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
            per_class[c] = ClassMetrics(precision, recall, f1, tp + fn)
        reports.append(
            EvalReport(
                accuracy=correct / total,
                per_class=per_class,
                confusion=confusion,
                folds=tuple(fold_results),
                config={
                    "segment": {"start": seg.start, "end": seg.end, "c1": seg.spec.c1, "c2": seg.spec.c2, "T": seg.spec.T},
                    "method": cfg.depth.method,
                    "folds": cfg.folds,
                    "seed": cfg.seed,
                },
            )
        )
    return tuple(reports)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x: float) -> str:
    return repr(float(x))


def run_ranking_experiment(
    model: IntensitySpec | float,
    n: int,
    spec: KernelSpec,
    depth_cfg: DepthConfig,
    seed: int,
    out_dir,
    top_k: int = 5,
    curve_grid: int = 256,
    schedule: AnnealSchedule | None = None,
    sgd: SgdConfig | None = None,
    estimate_center: bool | None = None,
    n_jobs: int = 1,
) -> dict:
    """Simulate, smooth, rank, and write plot-ready artifacts.

    Writes ranked.csv (id, count, depth, rank), top_bottom.csv (the
    extreme-ranked observations with their event times), curves.csv
    (t, value, id, depth in long format), and center.json when a
    center is estimated. estimate_center=None estimates one exactly
    when the depth method needs it; True forces the estimate (the
    center table artifact) even for sample-averaged depth. Returns the
    paths plus the in-memory report and center estimate.
    """
    if n < 10:
        raise DataValidationError("ranking experiments need n >= 10")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    if isinstance(model, IntensitySpec):
        if model.T != spec.T:
            raise DataValidationError(f"intensity T={model.T!r} does not match kernel T={spec.T!r}")
        sample = simulate_ipp(model, n, seed)
    else:
        sample = simulate_hpp(float(model), spec.T, n, seed)

    need_center = depth_cfg.method == MODIFIED_H_DEPTH
    center_est: CenterEstimate | None = None
    center = None
    if need_center or estimate_center:
        obj = SsdObjective(sample, spec)
        center_est = combined_center(obj, schedule=schedule, sgd=sgd, seed=seed)
        center = center_est.center
    report = rank(sample, depth_cfg, spec, center=center if need_center else None, n_jobs=n_jobs)

    order = np.argsort([e.rank for e in report.entries])
    ranked_rows = [
        [report.entries[i].id, len(sample[i]), _fmt(report.entries[i].depth), report.entries[i].rank]
        for i in order
    ]
    _write_csv(out / "ranked.csv", ["id", "count", "depth", "rank"], ranked_rows)

    k = min(top_k, len(sample))
    tb_rows = []
    for pos, i in list(zip(range(1, k + 1), order[:k])) + list(zip(range(-k, 0), order[len(order) - k :])):
        e = report.entries[i]
        tb_rows.append([pos, e.id, _fmt(e.depth), e.rank, " ".join(_fmt(t) for t in sample[i].events)])
    _write_csv(out / "top_bottom.csv", ["position", "id", "depth", "rank", "events"], tb_rows)

    t = np.linspace(0.0, spec.T, curve_grid + 1)
    curve_rows = []
    for i, p in enumerate(sample):
        vals = smooth(p, spec).value(t)
        depth_str = _fmt(report.entries[i].depth)
        curve_rows.extend([[_fmt(x), _fmt(v), p.id, depth_str] for x, v in zip(t, vals)])
    _write_csv(out / "curves.csv", ["t", "value", "id", "depth"], curve_rows)

    artifacts = {
        "ranked": out / "ranked.csv",
        "top_bottom": out / "top_bottom.csv",
        "curves": out / "curves.csv",
        "report": report,
        "sample": sample,
        "center_estimate": center_est,
    }
    if center_est is not None:
        center_path = out / "center.json"
        with open(center_path, "w", encoding="utf-8") as fh:
            json.dump(center_est.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        artifacts["center"] = center_path
    return artifacts
