"""Kernel evaluation and properness checking."""
from __future__ import annotations

import math

import numpy as np
import pytest

from ppdepth import DataValidationError, KernelSpec, check_properness, evaluate

# K(T; T) = c1 * exp(-c2) at the default constants.
EXP_MINUS_TEN = 4.5399929762484854e-05


class TestKernelSpec:
    def test_defaults(self):
        spec = KernelSpec()
        assert spec.family == "gaussian"
        assert (spec.c1, spec.c2, spec.T) == (1.0, 10.0, 100.0)

    @pytest.mark.parametrize("field,value", [
        ("c1", 0.0), ("c1", -1.0), ("c2", 0.0), ("c2", -2.0),
        ("T", 0.0), ("T", -100.0), ("c1", float("nan")), ("T", float("inf")),
    ])
    def test_rejects_nonpositive_constants(self, field, value):
        with pytest.raises(DataValidationError):
            KernelSpec(**{field: value})

    def test_rejects_unknown_family(self):
        with pytest.raises(DataValidationError):
            KernelSpec(family="epanechnikov")

    def test_frozen(self, default_spec):
        with pytest.raises(AttributeError):
            default_spec.c1 = 2.0


class TestEvaluate:
    def test_peak_value_is_c1(self, default_spec):
        assert evaluate(default_spec, 0.0) == 1.0
        assert evaluate(KernelSpec(c1=3.5), 0.0) == 3.5

    def test_value_at_interval_length(self, default_spec):
        assert evaluate(default_spec, 100.0) == pytest.approx(EXP_MINUS_TEN, rel=1e-15)

    def test_even_function(self, default_spec):
        xs = np.linspace(0.0, 250.0, 41)
        np.testing.assert_array_equal(evaluate(default_spec, xs), evaluate(default_spec, -xs))

    def test_scalar_in_scalar_out(self, default_spec):
        out = evaluate(default_spec, 1.25)
        assert isinstance(out, float)

    def test_array_shape_preserved(self, default_spec):
        out = evaluate(default_spec, np.zeros((3, 4)))
        assert out.shape == (3, 4)

    def test_matches_direct_formula(self, default_spec):
        xs = np.linspace(-150.0, 150.0, 301)
        expected = default_spec.c1 * np.exp(-default_spec.c2 * xs**2 / default_spec.T**2)
        np.testing.assert_allclose(evaluate(default_spec, xs), expected, rtol=0, atol=0)

    def test_scale_invariance_exact_for_gaussian(self, default_spec):
        # K(a*x; a*T) == K(x; T) holds identically for this family.
        xs = np.linspace(0.0, 100.0, 57)
        for alpha in (0.5, 2.0, 10.0):
            scaled = KernelSpec(c1=1.0, c2=10.0, T=alpha * 100.0)
            np.testing.assert_allclose(
                evaluate(scaled, alpha * xs), evaluate(default_spec, xs), rtol=5e-15
            )


class TestProperness:
    def test_default_spec_passes_all_conditions(self, default_spec):
        report = check_properness(default_spec)
        assert set(report.conditions) == {
            "continuous_nonnegative",
            "positive_at_zero",
            "linear_independence",
            "scale_invariance",
        }
        assert report.passed
        assert all(c.passed for c in report.conditions.values())

    def test_positive_at_zero_evidence_is_c1(self, default_spec):
        report = check_properness(default_spec)
        assert report.conditions["positive_at_zero"].evidence == 1.0

    def test_near_constant_kernel_reported_not_raised(self):
        # c2 -> 0 makes every shifted copy the same curve, so the shift
        # family degenerates; the report must flag it without raising.
        report = check_properness(KernelSpec(c2=1e-12))
        assert not report.passed
        assert not report.conditions["linear_independence"].passed
        assert report.conditions["positive_at_zero"].passed

    def test_explicit_shifts_accepted(self, default_spec):
        report = check_properness(default_spec, shifts=np.array([10.0, 50.0, 90.0]))
        assert report.conditions["linear_independence"].passed

    def test_too_few_shift_points_rejected(self, default_spec):
        with pytest.raises(DataValidationError):
            check_properness(default_spec, n_shift_points=1)

    def test_coarse_grid_rejected(self, default_spec):
        with pytest.raises(DataValidationError):
            check_properness(default_spec, grid_size=8)

    def test_report_is_deterministic(self, default_spec):
        a = check_properness(default_spec, seed=3)
        b = check_properness(default_spec, seed=3)
        assert a.conditions["linear_independence"].evidence == b.conditions["linear_independence"].evidence
