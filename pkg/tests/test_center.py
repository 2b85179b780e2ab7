"""SSD objective, cardinality bound, annealing, and center search."""
from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import as_process, oracle_ssd, random_events
from ppdepth import (
    AnnealSchedule,
    DataValidationError,
    KernelSpec,
    PointProcess,
    SgdConfig,
    SsdObjective,
    combined_center,
    dimension_bound,
    kernel_mass_floor,
    line_search,
    rjmcmc_anneal,
    simulate_hpp,
    squared_l2_distance,
    ssd,
    ssd_gradient,
)

# c1 * (T / 2) * sqrt(pi / c2) * erf(sqrt(c2)) at the default constants.
MASS_FLOOR = 28.024739050664273


@pytest.fixture()
def small_objective(default_spec) -> SsdObjective:
    sample = simulate_hpp(0.045, 100.0, 12, seed=3)
    return SsdObjective(sample, default_spec)


class TestSsdObjective:
    def test_matches_pairwise_sum(self, default_spec, small_objective):
        rng = np.random.default_rng(20)
        for _ in range(5):
            t = random_events(rng, max_k=6)
            direct = math.fsum(
                squared_l2_distance(t, m.events, default_spec) for m in small_objective.sample
            )
            assert small_objective.ssd_events(t) == pytest.approx(direct, rel=1e-12)

    def test_matches_quadrature_oracle(self, default_spec):
        rng = np.random.default_rng(21)
        sample = [as_process(random_events(rng, max_k=8)) for _ in range(4)]
        obj = SsdObjective(sample, default_spec)
        for _ in range(3):
            t = random_events(rng, max_k=6)
            expected = oracle_ssd(t, [m.events for m in sample], default_spec)
            assert obj.ssd_events(t) == pytest.approx(expected, rel=1e-7)

    def test_phi0_ssd_is_empty_candidate(self, small_objective):
        assert small_objective.ssd_events(np.empty(0)) == pytest.approx(
            small_objective.phi0_ssd, rel=1e-15
        )

    def test_rejects_empty_sample(self, default_spec):
        with pytest.raises(DataValidationError, match="non-empty"):
            SsdObjective([], default_spec)

    def test_rejects_interval_mismatch(self, default_spec):
        with pytest.raises(DataValidationError, match="does not match"):
            SsdObjective([PointProcess.empty(50.0)], default_spec)

    def test_module_level_wrappers_validate_domain(self, small_objective):
        t = PointProcess(np.array([10.0]), T=50.0)
        with pytest.raises(DataValidationError):
            ssd(t, small_objective)
        with pytest.raises(DataValidationError):
            ssd_gradient(t, small_objective)


class TestGradient:
    def test_matches_central_differences(self, small_objective):
        rng = np.random.default_rng(22)
        step = 1e-5
        for _ in range(10):
            k = int(rng.integers(1, 8))
            t = np.sort(rng.uniform(0.0, 100.0, k))
            grad = small_objective.gradient_events(t)
            for a in range(k):
                plus, minus = t.copy(), t.copy()
                plus[a] += step
                minus[a] -= step
                fd = (small_objective.ssd_events(plus) - small_objective.ssd_events(minus)) / (2 * step)
                assert grad[a] == pytest.approx(fd, rel=1e-5, abs=1e-7)

    def test_full_batch_equals_full_gradient(self, small_objective):
        t = np.array([20.0, 50.0, 80.0])
        full = small_objective.gradient_events(t)
        batched = small_objective.gradient_batch(t, list(range(small_objective.N)))
        np.testing.assert_allclose(batched, full, rtol=1e-12)

    def test_gradient_of_empty_rejected(self, small_objective):
        with pytest.raises(DataValidationError, match="empty"):
            small_objective.gradient_events(np.empty(0))

    def test_wrapper_returns_same_values(self, small_objective):
        t = PointProcess(np.array([25.0, 60.0]), T=100.0)
        np.testing.assert_array_equal(
            ssd_gradient(t, small_objective), small_objective.gradient_events(t.events)
        )


class TestEditDeltas:
    """Incremental SSD updates must equal full recomputation."""

    def test_birth_delta(self, small_objective):
        rng = np.random.default_rng(23)
        for _ in range(10):
            t = np.sort(rng.uniform(0.0, 100.0, int(rng.integers(0, 6))))
            u = float(rng.uniform(0.0, 100.0))
            before = small_objective.ssd_events(t)
            after = small_objective.ssd_events(np.sort(np.append(t, u)))
            delta = small_objective.delta_birth(t, u)
            assert delta == pytest.approx(after - before, rel=1e-9, abs=1e-8)

    def test_death_delta(self, small_objective):
        rng = np.random.default_rng(24)
        for _ in range(10):
            t = np.sort(rng.uniform(0.0, 100.0, int(rng.integers(1, 7))))
            idx = int(rng.integers(len(t)))
            before = small_objective.ssd_events(t)
            after = small_objective.ssd_events(np.delete(t, idx))
            delta = small_objective.delta_death(t, idx)
            assert delta == pytest.approx(after - before, rel=1e-9, abs=1e-8)

    def test_move_delta(self, small_objective):
        rng = np.random.default_rng(25)
        for _ in range(10):
            t = np.sort(rng.uniform(0.0, 100.0, int(rng.integers(1, 7))))
            idx = int(rng.integers(len(t)))
            new = float(rng.uniform(0.0, 100.0))
            moved = t.copy()
            moved[idx] = new
            before = small_objective.ssd_events(t)
            after = small_objective.ssd_events(np.sort(moved))
            delta = small_objective.delta_move(t, idx, new)
            assert delta == pytest.approx(after - before, rel=1e-9, abs=1e-8)

    def test_birth_then_death_cancels(self, small_objective):
        t = np.array([30.0, 60.0])
        u = 45.0
        grown = np.sort(np.append(t, u))
        idx = int(np.searchsorted(grown, u))
        assert small_objective.delta_birth(t, u) == pytest.approx(
            -small_objective.delta_death(grown, idx), rel=1e-12
        )


class TestDimensionBound:
    def test_mass_floor_frozen_value(self, default_spec):
        assert kernel_mass_floor(default_spec) == pytest.approx(MASS_FLOOR, rel=1e-15)

    def test_mass_floor_formula(self):
        spec = KernelSpec(c1=2.0, c2=5.0, T=60.0)
        expected = 2.0 * 30.0 * math.sqrt(math.pi / 5.0) * math.erf(math.sqrt(5.0))
        assert kernel_mass_floor(spec) == pytest.approx(expected, rel=1e-15)

    def test_single_event_sample(self, default_spec):
        obj = SsdObjective([as_process([50.0])], default_spec)
        b = dimension_bound(obj)
        # ceil(2 * sqrt(100) * ||K(. - 50)|| / m1) = ceil(4.489...) = 5
        assert b.proven == 5
        assert b.search_hint == max(b.proven, 2 * obj.max_count)
        assert int(b) == b.proven

    def test_all_empty_sample_has_zero_cap(self, default_spec):
        obj = SsdObjective([PointProcess.empty(100.0)] * 3, default_spec)
        assert dimension_bound(obj) == (0, 0)

    def test_bound_grows_with_observed_mass(self, default_spec):
        lone = SsdObjective([as_process([50.0])], default_spec)
        dense = SsdObjective([as_process(np.linspace(10.0, 90.0, 9))], default_spec)
        assert dimension_bound(dense).proven > dimension_bound(lone).proven

    def test_minimizer_cardinality_within_proven_cap(self, default_spec):
        # The cap is a theorem about minimizers; the search respects it.
        sample = simulate_hpp(0.045, 100.0, 20, seed=17)
        obj = SsdObjective(sample, default_spec)
        cap = dimension_bound(obj).proven
        est = combined_center(obj, seed=17)
        assert len(est.center) <= cap


class TestAnnealSchedule:
    def test_temperature_strictly_decreasing(self):
        sched = AnnealSchedule(c=2.0)
        temps = [sched.temperature(i, 2.0) for i in range(1, 200)]
        assert all(a > b for a, b in zip(temps, temps[1:]))

    @pytest.mark.parametrize("kwargs", [
        {"c": 0.0},
        {"c": -1.0},
        {"n_max": 0},
        {"p_birth": 0.5, "p_death": 0.25, "p_move": 0.5},
        {"p_birth": 0.0, "p_death": 0.5, "p_move": 0.5},
        {"sigma_move": 0.0},
    ])
    def test_rejects_bad_schedule(self, kwargs):
        with pytest.raises(DataValidationError):
            AnnealSchedule(**kwargs)


class TestRjmcmcAnneal:
    @pytest.fixture()
    def objective(self, default_spec) -> SsdObjective:
        return SsdObjective(simulate_hpp(0.045, 100.0, 25, seed=6), default_spec)

    def test_deterministic_for_seed(self, objective):
        sched = AnnealSchedule(n_max=2000)
        a = rjmcmc_anneal(objective, sched, seed=9)
        b = rjmcmc_anneal(objective, sched, seed=9)
        assert a.best.ssd == b.best.ssd
        np.testing.assert_array_equal(a.best.events, b.best.events)
        assert a.trace == b.trace
        assert a.acceptance == b.acceptance

    def test_improves_on_empty_process(self, objective):
        result = rjmcmc_anneal(objective, AnnealSchedule(n_max=3000), seed=1)
        assert result.best.ssd < objective.phi0_ssd

    def test_trace_is_monotone_best_so_far(self, objective):
        result = rjmcmc_anneal(objective, AnnealSchedule(n_max=1500), seed=2)
        trace = np.array(result.trace)
        assert len(trace) == 1500
        assert np.all(np.diff(trace) <= 0.0)

    def test_recorded_ssds_are_exact(self, objective):
        # Guards the incremental-update drift: stored values must match
        # a fresh evaluation of the stored state.
        result = rjmcmc_anneal(objective, AnnealSchedule(n_max=2000), seed=3)
        for best in result.by_dimension.values():
            assert best.ssd == pytest.approx(objective.ssd_events(best.events), rel=1e-9)

    def test_respects_cardinality_cap(self, objective):
        result = rjmcmc_anneal(objective, AnnealSchedule(n_max=2000), seed=4)
        assert all(k <= result.dimension_bound for k in result.by_dimension)
        assert result.dimension_bound == dimension_bound(objective).proven

    def test_acceptance_counts_cover_all_iterations(self, objective):
        n = 1234
        result = rjmcmc_anneal(objective, AnnealSchedule(n_max=n), seed=5)
        proposed = sum(p for p, _ in result.acceptance.values())
        assert proposed == n
        assert all(a <= p for p, a in result.acceptance.values())

    def test_top_is_ascending_and_bounded_by_d_r(self, objective):
        result = rjmcmc_anneal(objective, AnnealSchedule(n_max=2000), seed=6, d_r=2)
        assert len(result.top) <= 2
        ssds = [b.ssd for b in result.top]
        assert ssds == sorted(ssds)

    def test_all_empty_sample_returns_empty_center(self, default_spec):
        obj = SsdObjective([PointProcess.empty(100.0)] * 2, default_spec)
        result = rjmcmc_anneal(obj, seed=0)
        assert result.best.dimension == 0
        assert result.best.ssd == 0.0
        assert result.dimension_bound == 0

    def test_x0_above_cap_rejected(self, objective):
        cap = dimension_bound(objective).proven
        too_big = PointProcess(np.linspace(1.0, 99.0, cap + 1), T=100.0)
        with pytest.raises(DataValidationError, match="above the cardinality cap"):
            rjmcmc_anneal(objective, x0=too_big)

    def test_x0_interval_mismatch_rejected(self, objective):
        with pytest.raises(DataValidationError, match="does not match"):
            rjmcmc_anneal(objective, x0=PointProcess.empty(50.0))

    def test_invalid_d_r_rejected(self, objective):
        with pytest.raises(DataValidationError, match="d_r"):
            rjmcmc_anneal(objective, d_r=0)


class TestSgdConfig:
    @pytest.mark.parametrize("kwargs", [
        {"batch": 0},
        {"rate": 0.0},
        {"rate": -1.0},
        {"epochs": 0},
        {"tol": -1.0},
        {"max_halvings": -1},
    ])
    def test_rejects_bad_config(self, kwargs):
        with pytest.raises(DataValidationError):
            SgdConfig(**kwargs)


class TestLineSearch:
    @pytest.fixture()
    def objective(self, default_spec) -> SsdObjective:
        return SsdObjective(simulate_hpp(0.045, 100.0, 25, seed=6), default_spec)

    def test_dimension_zero_is_empty_process(self, objective):
        result = line_search(objective, [0])
        assert result.best.ssd == objective.phi0_ssd
        assert len(result.best.center) == 0

    def test_covers_requested_dimensions(self, objective):
        result = line_search(objective, [0, 2, 4], seed=1)
        assert sorted(result.per_dimension) == [0, 2, 4]
        for k, est in result.per_dimension.items():
            assert len(est.center) == k

    def test_best_minimizes_over_dimensions(self, objective):
        result = line_search(objective, [0, 1, 2, 3, 4, 5], seed=1)
        assert result.best.ssd == min(e.ssd for e in result.per_dimension.values())

    def test_descent_improves_on_quantile_init(self, objective):
        from ppdepth.center import _quantile_init

        k = 4
        init_ssd = objective.ssd_events(_quantile_init(objective, k))
        result = line_search(objective, [k], seed=1)
        assert result.per_dimension[k].ssd <= init_ssd

    def test_targeted_run_agrees_with_sweep(self, objective):
        # Per-cardinality RNG depends only on (seed, k).
        sweep = line_search(objective, [1, 2, 3, 4], seed=2)
        targeted = line_search(objective, [3], seed=2)
        assert targeted.per_dimension[3].ssd == sweep.per_dimension[3].ssd
        np.testing.assert_array_equal(
            targeted.per_dimension[3].center.events, sweep.per_dimension[3].center.events
        )

    def test_thread_count_does_not_change_result(self, objective):
        serial = line_search(objective, [0, 1, 2, 3], seed=3, n_jobs=1)
        threaded = line_search(objective, [0, 1, 2, 3], seed=3, n_jobs=4)
        for k in serial.per_dimension:
            np.testing.assert_array_equal(
                serial.per_dimension[k].center.events, threaded.per_dimension[k].center.events
            )

    def test_extra_inits_can_only_help(self, objective):
        plain = line_search(objective, [3], seed=4)
        seeded = line_search(
            objective, [3], inits={3: [np.array([20.0, 50.0, 80.0])]}, seed=4
        )
        assert seeded.per_dimension[3].ssd <= plain.per_dimension[3].ssd

    def test_rejects_dimension_above_cap(self, objective):
        cap = dimension_bound(objective).proven
        with pytest.raises(DataValidationError, match="above the proven cap"):
            line_search(objective, [cap + 1])

    def test_rejects_negative_dimension(self, objective):
        with pytest.raises(DataValidationError, match=">= 0"):
            line_search(objective, [-1])

    def test_rejects_empty_dimension_list(self, objective):
        with pytest.raises(DataValidationError, match="at least one"):
            line_search(objective, [])

    def test_rejects_misshapen_init(self, objective):
        with pytest.raises(DataValidationError, match="init for cardinality"):
            line_search(objective, [3], inits={3: [np.array([1.0])]})


class TestCombinedCenter:
    @pytest.fixture()
    def objective(self, default_spec) -> SsdObjective:
        return SsdObjective(simulate_hpp(0.045, 100.0, 30, seed=8), default_spec)

    def test_never_worse_than_annealing(self, objective):
        sched = AnnealSchedule(n_max=3000)
        ann = rjmcmc_anneal(objective, sched, seed=5)
        comb = combined_center(objective, schedule=sched, seed=5)
        assert comb.ssd <= ann.best.ssd

    def test_never_worse_than_empty_process(self, objective):
        comb = combined_center(objective, schedule=AnnealSchedule(n_max=1000), seed=5)
        assert comb.ssd <= objective.phi0_ssd

    def test_deterministic_for_seed(self, objective):
        sched = AnnealSchedule(n_max=2000)
        a = combined_center(objective, schedule=sched, seed=11)
        b = combined_center(objective, schedule=sched, seed=11)
        assert a.ssd == b.ssd
        np.testing.assert_array_equal(a.center.events, b.center.events)

    def test_reports_method_and_trace_sections(self, objective):
        comb = combined_center(objective, schedule=AnnealSchedule(n_max=1000), seed=2)
        assert comb.method == "combined"
        assert set(comb.trace) == {"anneal", "line_search", "near_ties"}

    def test_to_dict_is_json_ready(self, objective):
        import json

        comb = combined_center(objective, schedule=AnnealSchedule(n_max=500), seed=2)
        blob = json.dumps(comb.to_dict())
        back = json.loads(blob)
        assert back["events"] == [float(e) for e in comb.center.events]
        assert back["method"] == "combined"
        slim = comb.to_dict(include_trace=False)
        assert "trace" not in slim

    def test_all_empty_sample(self, default_spec):
        obj = SsdObjective([PointProcess.empty(100.0)] * 2, default_spec)
        comb = combined_center(obj, seed=0)
        assert len(comb.center) == 0
        assert comb.ssd == 0.0
