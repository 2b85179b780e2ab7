"""Segmented depth classification and the ranking experiment driver."""
from __future__ import annotations

import dataclasses
import json
import time

import numpy as np
import pytest

from conftest import as_process
from ppdepth import (
    ClassifierConfig,
    IntensitySpec,
    DataValidationError,
    DepthConfig,
    KernelSpec,
    PointProcess,
    Segment,
    classify_by_depth,
    cross_validate,
    full_window_config,
    run_ranking_experiment,
    simulate_ipp,
    slice_segment,
)


def _two_tight_classes(n_per_class: int = 16) -> list[PointProcess]:
    """Hand-built, perfectly separated classes: four events jittered
    around 20 (early) or around 80 (late)."""
    rng = np.random.default_rng(77)
    out = []
    for i in range(n_per_class):
        early = 20.0 + rng.uniform(-2.0, 2.0, 4)
        late = 80.0 + rng.uniform(-2.0, 2.0, 4)
        out.append(as_process(np.sort(early), id=f"e{i:02d}", label="early"))
        out.append(as_process(np.sort(late), id=f"l{i:02d}", label="late"))
    return out


class TestSliceSegment:
    def test_reanchors_events(self):
        p = PointProcess(np.array([5.0, 45.0, 55.0, 95.0]), T=100.0, id="x", label="g")
        first = slice_segment(p, 0.0, 50.0)
        np.testing.assert_array_equal(first.events, [5.0, 45.0])
        assert first.T == 50.0
        second = slice_segment(p, 50.0, 100.0, include_end=True)
        np.testing.assert_array_equal(second.events, [5.0, 45.0])
        assert (second.id, second.label) == ("x", "g")

    def test_window_endpoint_membership(self):
        p = PointProcess(np.array([50.0]), T=100.0)
        assert len(slice_segment(p, 0.0, 50.0)) == 0
        assert len(slice_segment(p, 0.0, 50.0, include_end=True)) == 1
        assert len(slice_segment(p, 50.0, 100.0)) == 1

    @pytest.mark.parametrize("window", [(-1.0, 50.0), (50.0, 50.0), (60.0, 50.0), (0.0, 101.0)])
    def test_rejects_bad_windows(self, window):
        p = PointProcess(np.array([10.0]), T=100.0)
        with pytest.raises(DataValidationError):
            slice_segment(p, *window)


class TestClassifierConfig:
    def test_full_window_helper(self, default_spec):
        cfg = full_window_config(default_spec)
        assert cfg.T == 100.0
        assert len(cfg.segments) == 1
        assert cfg.segments[0] == Segment(0.0, 100.0, default_spec)

    def test_cv_budget_is_quartered_by_default(self, default_spec):
        cfg = full_window_config(default_spec)
        assert cfg.schedule().n_max == 5000

    def test_explicit_schedule_wins(self, default_spec):
        from ppdepth import AnnealSchedule

        cfg = full_window_config(default_spec, anneal=AnnealSchedule(n_max=123))
        assert cfg.schedule().n_max == 123

    def test_segmented_partition_accepted(self):
        half = KernelSpec(T=50.0)
        cfg = ClassifierConfig(segments=(Segment(0.0, 50.0, half), Segment(50.0, 100.0, half)))
        assert cfg.T == 100.0

    @pytest.mark.parametrize("segments", [
        (),
        (Segment(10.0, 100.0, KernelSpec(T=90.0)),),
        (Segment(0.0, 40.0, KernelSpec(T=40.0)), Segment(50.0, 100.0, KernelSpec(T=50.0))),
        (Segment(0.0, 100.0, KernelSpec(T=50.0)),),
    ])
    def test_rejects_bad_partitions(self, segments):
        with pytest.raises(DataValidationError):
            ClassifierConfig(segments=tuple(segments))

    def test_rejects_single_fold(self, default_spec):
        with pytest.raises(DataValidationError, match="folds"):
            full_window_config(default_spec, folds=1)


class TestClassifyByDepth:
    def test_assigns_nearest_center_label(self, default_spec):
        dataset = _two_tight_classes()
        groups = {
            "early": [p for p in dataset if p.label == "early"],
            "late": [p for p in dataset if p.label == "late"],
        }
        cfg = DepthConfig(method="modified_h_depth")
        probe = as_process([19.0, 20.0, 21.0, 22.0])
        assert classify_by_depth(probe, groups, cfg, default_spec, seed=1) == "early"
        probe = as_process([78.0, 79.5, 81.0, 82.0])
        assert classify_by_depth(probe, groups, cfg, default_spec, seed=1) == "late"

    def test_sample_averaged_method_needs_no_centers(self, default_spec):
        dataset = _two_tight_classes()
        groups = {
            "early": [p for p in dataset if p.label == "early"],
            "late": [p for p in dataset if p.label == "late"],
        }
        probe = as_process([20.5, 21.0, 21.5, 19.0])
        assert classify_by_depth(probe, groups, DepthConfig(), default_spec) == "early"

    def test_exact_tie_warns_and_goes_lexicographic(self, default_spec):
        center = as_process([50.0])
        groups = {"b": [as_process([40.0])], "a": [as_process([60.0])]}
        cfg = DepthConfig(method="modified_h_depth")
        with pytest.warns(UserWarning, match="depth tie"):
            label = classify_by_depth(
                as_process([10.0]), groups, cfg, default_spec,
                centers={"a": center, "b": center},
            )
        assert label == "a"

    def test_rejects_empty_group(self, default_spec):
        with pytest.raises(DataValidationError, match="empty"):
            classify_by_depth(as_process([1.0]), {"g": []}, DepthConfig(), default_spec)


class TestCrossValidate:
    def test_perfectly_separated_classes_hit_full_accuracy(self, default_spec):
        dataset = _two_tight_classes()
        cfg = full_window_config(default_spec, folds=4, seed=0)
        report, = cross_validate(dataset, cfg)
        assert report.accuracy == 1.0
        assert all(f.accuracy == 1.0 for f in report.folds)
        for cls in ("early", "late"):
            assert report.per_class[cls].f1 == 1.0
            assert report.per_class[cls].support == 16

    def test_shuffled_labels_score_near_chance(self, default_spec):
        dataset = _two_tight_classes()
        labels = [p.label for p in dataset]
        rng = np.random.default_rng(42)
        perm = rng.permutation(len(labels))
        import dataclasses

        shuffled = [dataclasses.replace(p, label=labels[perm[i]]) for i, p in enumerate(dataset)]
        cfg = full_window_config(default_spec, folds=4, seed=0)
        report, = cross_validate(shuffled, cfg)
        # 3 sigma binomial band around 0.5 on 32 draws.
        assert abs(report.accuracy - 0.5) <= 3.0 * 0.5 / np.sqrt(len(dataset))

    def test_folds_partition_without_leakage(self, default_spec):
        dataset = _two_tight_classes()
        cfg = full_window_config(default_spec, folds=4, seed=3)
        report, = cross_validate(dataset, cfg)
        seen = []
        for fold in report.folds:
            assert not (set(fold.train_ids) & set(fold.test_ids))
            assert len(fold.train_ids) + len(fold.test_ids) == len(dataset)
            seen.extend(fold.test_ids)
        assert sorted(seen) == sorted(p.id for p in dataset)

    def test_deterministic_reports(self, default_spec):
        dataset = _two_tight_classes()
        cfg = full_window_config(default_spec, folds=4, seed=9)
        assert cross_validate(dataset, cfg) == cross_validate(dataset, cfg)

    def test_thread_count_does_not_change_reports(self, default_spec):
        dataset = _two_tight_classes(n_per_class=8)
        cfg = full_window_config(default_spec, folds=2, seed=9)
        assert cross_validate(dataset, cfg, n_jobs=1) == cross_validate(dataset, cfg, n_jobs=4)

    def test_segmented_protocol_reports_per_segment(self):
        half = KernelSpec(T=50.0)
        cfg = ClassifierConfig(
            segments=(Segment(0.0, 50.0, half), Segment(50.0, 100.0, half)),
            folds=2,
            seed=1,
        )
        dataset = _two_tight_classes(n_per_class=8)
        first, second = cross_validate(dataset, cfg)
        assert first.config["segment"]["start"] == 0.0
        assert second.config["segment"]["start"] == 50.0
        # Early events land in the first window, late in the second, so
        # both windows still separate the classes (present vs absent).
        assert first.accuracy == 1.0
        assert second.accuracy == 1.0

    def test_unlabeled_observation_rejected(self, default_spec):
        dataset = _two_tight_classes()
        dataset.append(as_process([50.0]))
        with pytest.raises(DataValidationError, match="label"):
            cross_validate(dataset, full_window_config(default_spec))

    def test_single_class_rejected(self, default_spec):
        dataset = [p for p in _two_tight_classes() if p.label == "early"]
        with pytest.raises(DataValidationError, match="two classes"):
            cross_validate(dataset, full_window_config(default_spec))

    def test_wrong_interval_rejected(self, default_spec):
        dataset = _two_tight_classes()
        dataset.append(PointProcess(np.array([1.0]), T=50.0, label="early"))
        with pytest.raises(DataValidationError, match="match the segmentation"):
            cross_validate(dataset, full_window_config(default_spec))

    def test_metric_identities_on_imperfect_run(self, ipp_spec):
        # Overlapping classes leave real confusion, so the identities
        # are checked away from the all-ones corner.
        near = IntensitySpec.mixture([(3.0, 45.0, 12.0)], 100.0)
        far = IntensitySpec.mixture([(3.0, 55.0, 12.0)], 100.0)
        data = [
            dataclasses.replace(p, label="a", id=f"a{i:02d}")
            for i, p in enumerate(simulate_ipp(near, 20, seed=61))
        ] + [
            dataclasses.replace(p, label="b", id=f"b{i:02d}")
            for i, p in enumerate(simulate_ipp(far, 20, seed=62))
        ]
        report, = cross_validate(data, full_window_config(ipp_spec, folds=4, seed=9))
        assert 0.0 < report.accuracy < 1.0
        total = sum(sum(row.values()) for row in report.confusion.values())
        diag = sum(report.confusion[k].get(k, 0) for k in report.confusion)
        assert report.accuracy == diag / total
        for m in report.per_class.values():
            expected = (
                0.0
                if m.precision + m.recall == 0.0
                else 2.0 * m.precision * m.recall / (m.precision + m.recall)
            )
            assert m.f1 == expected

    def test_report_to_dict_json_ready(self, default_spec):
        dataset = _two_tight_classes(n_per_class=8)
        cfg = full_window_config(default_spec, folds=2, seed=0)
        report, = cross_validate(dataset, cfg)
        blob = json.loads(json.dumps(report.to_dict()))
        assert blob["accuracy"] == report.accuracy
        assert blob["confusion"]["early"]["early"] == 8


class TestRunRankingExperiment:
    def test_writes_artifacts_and_is_deterministic(self, tmp_path, default_spec):
        cfg = DepthConfig()
        out_a = run_ranking_experiment(0.045, 20, default_spec, cfg, seed=3, out_dir=tmp_path / "a")
        out_b = run_ranking_experiment(0.045, 20, default_spec, cfg, seed=3, out_dir=tmp_path / "b")
        for name in ("ranked", "top_bottom", "curves"):
            a = (tmp_path / "a" / f"{name}.csv").read_bytes()
            b = (tmp_path / "b" / f"{name}.csv").read_bytes()
            assert a == b
        assert out_a["report"].entries == out_b["report"].entries

    def test_ranked_rows_cover_sample(self, tmp_path, default_spec):
        out = run_ranking_experiment(0.045, 15, default_spec, DepthConfig(), seed=1, out_dir=tmp_path)
        lines = (tmp_path / "ranked.csv").read_text().strip().splitlines()
        assert lines[0] == "id,count,depth,rank"
        assert len(lines) == 16

    def test_center_artifact_when_forced(self, tmp_path, default_spec):
        out = run_ranking_experiment(
            0.045, 12, default_spec, DepthConfig(), seed=1, out_dir=tmp_path, estimate_center=True
        )
        blob = json.loads((tmp_path / "center.json").read_text())
        assert blob["method"] == "combined"
        assert blob["cardinality"] == len(blob["events"])
        assert out["center"] is not None

    def test_no_center_artifact_for_plain_h_depth(self, tmp_path, default_spec):
        run_ranking_experiment(0.045, 12, default_spec, DepthConfig(), seed=1, out_dir=tmp_path)
        assert not (tmp_path / "center.json").exists()

    def test_small_n_rejected(self, tmp_path, default_spec):
        with pytest.raises(DataValidationError, match="n >= 10"):
            run_ranking_experiment(0.045, 5, default_spec, DepthConfig(), seed=1, out_dir=tmp_path)

    def test_two_peak_sample_top_ranks_concentrate_at_peaks(self, tmp_path, ipp_spec):
        mix = IntensitySpec.mixture([(3.0, 25.0, 10.0), (2.0, 75.0, 10.0)], 100.0)
        out = run_ranking_experiment(mix, 60, ipp_spec, DepthConfig(), seed=13, out_dir=tmp_path)
        ranked = (tmp_path / "ranked.csv").read_text().strip().splitlines()[1:]
        by_id = {s.id: s for s in out["sample"]}
        top_events = np.concatenate([by_id[ln.split(",")[0]].events for ln in ranked[:10]])
        near_peak = (np.abs(top_events - 25.0) <= 12.0) | (np.abs(top_events - 75.0) <= 12.0)
        assert near_peak.mean() > 0.6

    def test_minimal_run_is_quick(self, tmp_path, default_spec):
        started = time.perf_counter()
        run_ranking_experiment(
            0.045, 10, default_spec, DepthConfig(), seed=3, out_dir=tmp_path, estimate_center=True
        )
        assert time.perf_counter() - started < 5.0
