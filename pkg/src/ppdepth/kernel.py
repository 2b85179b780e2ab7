"""Smoothing kernels and machine-checkable properness tests.

A kernel is "proper" when it is (1) continuous and non-negative,
(2) positive at zero, (3) linearly independent under shifts, and
(4) scale invariant in the interval length. The Gaussian family

    K(x; T) = c1 * exp(-c2 * x**2 / T**2)

satisfies all four; ``check_properness`` verifies them numerically for
any configured spec.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataValidationError

GAUSSIAN = "gaussian"
_FAMILIES = (GAUSSIAN,)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus constants; immutable and safe to share.

    Parameters
    ----------
    family : str
        Kernel family name. Only ``"gaussian"`` is supported; the enum
        exists so kernels with other shapes can be added without
        touching call sites.
    c1 : float
        Amplitude, K(0) = c1 > 0.
    c2 : float
        Inverse-width constant, > 0.
    T : float
        Interval length, > 0, in the same units as event times.
    """

    family: str = GAUSSIAN
    c1: float = 1.0
    c2: float = 10.0
    T: float = 100.0

    def __post_init__(self) -> None:
        if self.family not in _FAMILIES:
            raise DataValidationError(f"unknown kernel family: {self.family!r}")
        for name in ("c1", "c2", "T"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise DataValidationError(f"kernel constant {name} must be a positive finite real, got {v!r}")


def evaluate(spec: KernelSpec, x):
    """K(x; T) for a scalar or array ``x``; defined on all of R."""
    x = np.asarray(x, dtype=np.float64)
    out = spec.c1 * np.exp(-spec.c2 * x * x / (spec.T * spec.T))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ConditionResult:
    passed: bool
    evidence: float
    detail: str


@dataclass(frozen=True)
class PropernessReport:
    conditions: dict[str, ConditionResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions.values())


def _quadrature_gram(spec: KernelSpec, shifts: np.ndarray, grid_size: int) -> np.ndarray:
    """Gram matrix of the shifted kernels over [0, T], composite Simpson."""
    n = grid_size if grid_size % 2 == 0 else grid_size + 1
    t = np.linspace(0.0, spec.T, n + 1)
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= (spec.T / n) / 3.0
    vals = evaluate(spec, t[None, :] - shifts[:, None])  # (k, n+1)
    return (vals * w[None, :]) @ vals.T


def check_properness(
    spec: KernelSpec,
    n_shift_points: int = 5,
    grid_size: int = 512,
    seed: int = 0,
    shifts: np.ndarray | None = None,
    gram_floor: float = 1e-10,
) -> PropernessReport:
    """Numerically verify the four properness conditions.

    A failing condition is reported, never raised, so degenerate specs
    can be inspected. Condition 3 (linear independence, an
    infinite-dimensional statement) is checked through a surrogate:
    the quadrature Gram matrix of ``n_shift_points`` random distinct
    shifts must have smallest singular value above ``gram_floor`` after
    row normalization.
    """
    if n_shift_points < 2:
        raise DataValidationError("n_shift_points must be >= 2")
    if grid_size < 16:
        raise DataValidationError("grid_size must be >= 16")
    rng = np.random.default_rng(seed)
    conditions: dict[str, ConditionResult] = {}

    # 1: continuous and non-negative. Grid over [-2T, 2T]; adjacent jumps
    # bounded by the configured Lipschitz surrogate times a safety factor.
    t = np.linspace(-2.0 * spec.T, 2.0 * spec.T, grid_size)
    vals = evaluate(spec, t)
    step = t[1] - t[0]
    jump = float(np.max(np.abs(np.diff(vals)))) if grid_size > 1 else 0.0
    jump_cap = 10.0 * (2.0 * spec.c1 * spec.c2 / spec.T) * step
    nonneg = bool(np.all(vals >= 0.0))
    conditions["continuous_nonnegative"] = ConditionResult(
        passed=nonneg and jump <= jump_cap,
        evidence=jump,
        detail=f"min value {vals.min():.3e}, max adjacent jump {jump:.3e} vs cap {jump_cap:.3e}",
    )

    # 2: positive at zero.
    k0 = float(evaluate(spec, 0.0))
    conditions["positive_at_zero"] = ConditionResult(k0 > 0.0, k0, f"K(0) = {k0:.6g}")

    # 3: linear independence under shifts (Gram nonsingularity surrogate).
    if shifts is None:
        shifts = np.sort(rng.choice(np.linspace(0.0, spec.T, 4096), size=n_shift_points, replace=False))
    shifts = np.asarray(shifts, dtype=np.float64)
    gram = _quadrature_gram(spec, shifts, max(grid_size, 512))
    norms = np.linalg.norm(gram, axis=1)
    if np.all(norms > 0):
        sigma_min = float(np.linalg.svd(gram / norms[:, None], compute_uv=False)[-1])
    else:
        sigma_min = 0.0
    conditions["linear_independence"] = ConditionResult(
        sigma_min > gram_floor,
        sigma_min,
        f"smallest singular value {sigma_min:.3e} at shifts {np.array2string(shifts, precision=3)}",
    )

    # 4: scale invariance K(alpha*x; alpha*T) = K(x; T). Evaluated inline so a
    # degenerate spec is still reported instead of failing re-construction.
    xs = rng.uniform(0.0, spec.T, size=100)
    worst = 0.0
    base = evaluate(spec, xs)
    denom = np.where(np.abs(base) > 0, np.abs(base), 1.0)
    for alpha in (0.5, 2.0, 10.0):
        ax, aT = alpha * xs, alpha * spec.T
        scaled = spec.c1 * np.exp(-spec.c2 * ax * ax / (aT * aT))
        worst = max(worst, float(np.max(np.abs(scaled - base) / denom)))
    conditions["scale_invariance"] = ConditionResult(
        worst <= 1e-12, worst, f"worst relative mismatch {worst:.3e} over alpha in (0.5, 2, 10)"
    )

    return PropernessReport(conditions)
