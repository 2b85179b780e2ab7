"""Depth-center estimation: minimize the sum of squared distances.

The center of a sample S_1..S_N is an event vector t minimizing

    SSD(t) = sum_i || f_t - f_{S_i} ||_2^2,

searched over all cardinalities at once. Everything here runs on the
closed-form Gram identities, so SSD, its increments under single-event
edits, and its analytic gradient cost O(|t| + total events) per
evaluation.

Three estimators are provided. ``rjmcmc_anneal`` runs a
reversible-jump Metropolis chain over event vectors of every
cardinality with a logarithmic cooling schedule; it explores
dimensions cheaply but refines slowly. ``line_search`` runs minibatch
gradient descent at fixed cardinality from quantile inits; it refines
fast but must be told which cardinalities to try. ``combined_center``
anneals first, keeps the few best cardinalities and their states, and
finishes them with gradient descent, which in practice matches the
full sweep at a fraction of the cost.

A proof-backed cardinality cap keeps the search finite: with
m1 = min over x in [0, T] of the integral of K(. - x) on [0, T] (the
minimum sits at the endpoints), any t satisfies
||f_t||_2 >= ||f_t||_1 / sqrt(T) >= |t| * m1 / sqrt(T), so by the
reverse triangle inequality |t| > 2 sqrt(T) max_i ||f_{S_i}||_2 / m1
forces d(t, S_i) > ||f_{S_i}||_2 for every i, hence
SSD(t) > SSD(empty). No minimizer lives above that cap.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import _backend
from .errors import DataValidationError, NumericalError
from .kernel import GAUSSIAN, KernelSpec
from .process import PointProcess

RJMCMC = "rjmcmc"
LINE_SEARCH = "line_search"
COMBINED = "combined"

NEAR_TIE_RELATIVE = 1e-3


class SsdObjective:
    """Immutable SSD evaluator for one sample and kernel spec.

    Precomputes the pooled event array and the per-observation
    self-products sum_{a,b} I(S_i_a, S_i_b), after which

        SSD(t) = N * Q(t, t) - 2 * R(t) + sum_i Q(S_i, S_i)

    with Q the cross-integral Gram sum and R(t) the Gram sum of t
    against the pooled events.
    """

    def __init__(self, sample: Sequence[PointProcess], spec: KernelSpec):
        if not sample:
            raise DataValidationError("objective needs a non-empty sample")
        if spec.family != GAUSSIAN:
            raise DataValidationError("closed-form SSD requires the gaussian kernel family")
        for s in sample:
            if s.T != spec.T:
                raise DataValidationError(f"sample interval T={s.T!r} does not match kernel T={spec.T!r}")
        self.sample = tuple(sample)
        self.spec = spec
        self.N = len(sample)
        self.arrays = tuple(np.ascontiguousarray(s.events, dtype=np.float64) for s in sample)
        self.pooled = np.ascontiguousarray(np.concatenate(self.arrays) if self.arrays else np.empty(0))
        c1, c2, T = spec.c1, spec.c2, spec.T
        self.self_products = np.array([_backend.gram_sum(a, a, c1, c2, T) for a in self.arrays])
        self.self_total = float(math.fsum(self.self_products))
        self.max_count = max(len(a) for a in self.arrays)
        self.max_self_norm = float(np.sqrt(self.self_products.max())) if self.N else 0.0

    @property
    def phi0_ssd(self) -> float:
        """SSD of the empty process: sum of squared curve norms."""
        return self.self_total

    def ssd_events(self, events: np.ndarray) -> float:
        events = np.ascontiguousarray(events, dtype=np.float64)
        c1, c2, T = self.spec.c1, self.spec.c2, self.spec.T
        q = _backend.gram_sum(events, events, c1, c2, T)
        r = _backend.gram_sum(events, self.pooled, c1, c2, T)
        return max(self.N * q - 2.0 * r + self.self_total, 0.0)

    def gradient_events(self, events: np.ndarray) -> np.ndarray:
        """Analytic gradient of SSD at an event vector (length >= 1)."""
        events = np.ascontiguousarray(events, dtype=np.float64)
        if events.size == 0:
            raise DataValidationError("gradient undefined for the empty process")
        c1, c2, T = self.spec.c1, self.spec.c2, self.spec.T
        own = _backend.g_rowsums(events, events, c1, c2, T)
        cross = _backend.g_rowsums(events, self.pooled, c1, c2, T)
        scale = 4.0 * c1 * c1 * c2 / (T * T)
        return scale * (self.N * own - cross)

    def gradient_batch(self, events: np.ndarray, batch: Sequence[int]) -> np.ndarray:
        """Gradient of (N/|B|) * sum_{i in B} d(t, S_i)^2, the unbiased
        minibatch estimate of the full gradient."""
        events = np.ascontiguousarray(events, dtype=np.float64)
        if events.size == 0:
            raise DataValidationError("gradient undefined for the empty process")
        c1, c2, T = self.spec.c1, self.spec.c2, self.spec.T
        chunk = np.ascontiguousarray(np.concatenate([self.arrays[i] for i in batch]))
        own = _backend.g_rowsums(events, events, c1, c2, T)
        cross = _backend.g_rowsums(events, chunk, c1, c2, T)
        scale = 4.0 * c1 * c1 * c2 / (T * T) * (self.N / len(batch))
        return scale * (len(batch) * own - cross)

    # Single-event edit increments, O(|t| + pooled) each, used by the
    # annealing chain.

    def _psum(self, u: float, arr: np.ndarray) -> float:
        return _backend.point_cross_sum(u, arr, self.spec.c1, self.spec.c2, self.spec.T)

    def _self_i(self, u: float) -> float:
        return _backend.cross_integral(u, u, self.spec.c1, self.spec.c2, self.spec.T)

    def delta_birth(self, events: np.ndarray, u: float) -> float:
        dq = 2.0 * self._psum(u, events) + self._self_i(u)
        dr = self._psum(u, self.pooled)
        return self.N * dq - 2.0 * dr

    def delta_death(self, events: np.ndarray, index: int) -> float:
        x = float(events[index])
        dq = -2.0 * self._psum(x, events) + self._self_i(x)
        dr = -self._psum(x, self.pooled)
        return self.N * dq - 2.0 * dr

    def delta_move(self, events: np.ndarray, index: int, new: float) -> float:
        old = float(events[index])
        i_cross = _backend.cross_integral(new, old, self.spec.c1, self.spec.c2, self.spec.T)
        dq = (
            -2.0 * self._psum(old, events)
            + self._self_i(old)
            + 2.0 * (self._psum(new, events) - i_cross)
            + self._self_i(new)
        )
        dr = self._psum(new, self.pooled) - self._psum(old, self.pooled)
        return self.N * dq - 2.0 * dr


def ssd(t: PointProcess, obj: SsdObjective) -> float:
    """Sum of squared kernel distances from t to every sample member."""
    if t.T != obj.spec.T:
        raise DataValidationError(f"interval T={t.T!r} does not match objective T={obj.spec.T!r}")
    return obj.ssd_events(t.events)


def ssd_gradient(t: PointProcess, obj: SsdObjective) -> np.ndarray:
    """Analytic SSD gradient with respect to each event time of t."""
    if t.T != obj.spec.T:
        raise DataValidationError(f"interval T={t.T!r} does not match objective T={obj.spec.T!r}")
    return obj.gradient_events(t.events)


class DimensionBound(NamedTuple):
    """Cardinality cap for the center search.

    ``proven`` is the proof-backed cap (no SSD minimizer has more
    events; see the module docstring for the two-line argument).
    ``search_hint`` additionally floors it at twice the largest
    observed count; it is a search heuristic only, not a theorem.
    """

    proven: int
    search_hint: int

    def __int__(self) -> int:
        return self.proven


def kernel_mass_floor(spec: KernelSpec) -> float:
    """min over x in [0, T] of integral_0^T K(u - x; T) du.

    F(x) = integral of K(u - x) has F'(x) = K(x) - K(T - x), which is
    positive for x < T/2 and negative after, so the minimum sits at
    the endpoints: F(0) = c1 * (T / 2) * sqrt(pi / c2) * erf(sqrt(c2)).
    """
    return spec.c1 * (spec.T / 2.0) * math.sqrt(math.pi / spec.c2) * math.erf(math.sqrt(spec.c2))


def dimension_bound(obj: SsdObjective) -> DimensionBound:
    """Cardinality cap: ceil(2 sqrt(T) max_i ||f_{S_i}||_2 / m1)."""
    if obj.max_self_norm == 0.0:
        return DimensionBound(0, 0)
    m1 = kernel_mass_floor(obj.spec)
    proven = math.ceil(2.0 * math.sqrt(obj.spec.T) * obj.max_self_norm / m1)
    return DimensionBound(proven, max(proven, 2 * obj.max_count))


@dataclass(frozen=True)
class AnnealSchedule:
    """Logarithmic cooling schedule and proposal mix for the chain.

    Temperature at iteration i >= 1 is c / log(1 + i), strictly
    decreasing to zero. When c is None it is set at run time to
    0.01 * SSD(empty), which scales the early acceptance probabilities
    to the objective. sigma_move = None resolves to T / 20.
    """

    c: float | None = None
    n_max: int = 20000
    p_birth: float = 0.25
    p_death: float = 0.25
    p_move: float = 0.5
    sigma_move: float | None = None

    def __post_init__(self) -> None:
        if self.c is not None and not (np.isfinite(self.c) and self.c > 0):
            raise DataValidationError(f"schedule constant c must be positive, got {self.c!r}")
        if self.n_max < 1:
            raise DataValidationError("n_max must be >= 1")
        probs = (self.p_birth, self.p_death, self.p_move)
        if any(not (np.isfinite(p) and p > 0) for p in probs):
            raise DataValidationError(f"proposal probabilities must all be positive, got {probs}")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise DataValidationError(f"proposal probabilities must sum to 1, got {probs}")
        if self.sigma_move is not None and not (np.isfinite(self.sigma_move) and self.sigma_move > 0):
            raise DataValidationError(f"sigma_move must be positive, got {self.sigma_move!r}")

    def temperature(self, i: int, c: float) -> float:
        return c / math.log1p(i)


class DimensionBest(NamedTuple):
    dimension: int
    events: np.ndarray
    ssd: float


@dataclass(frozen=True)
class AnnealResult:
    """Best state found in each visited cardinality, plus diagnostics.

    ``top`` holds the ``d_r`` lowest-SSD cardinalities, ascending by
    SSD. ``acceptance`` maps proposal kind to (proposed, accepted)
    counts; ``trace`` is the best SSD seen up to each iteration.
    """

    top: tuple[DimensionBest, ...]
    by_dimension: dict[int, DimensionBest]
    trace: tuple[float, ...]
    acceptance: dict[str, tuple[int, int]]
    dimension_bound: int
    seed: int

    @property
    def best(self) -> DimensionBest:
        return self.top[0]


def _reflect(x: float, T: float) -> float:
    z = math.fmod(x, 2.0 * T)
    if z < 0.0:
        z += 2.0 * T
    return z if z <= T else 2.0 * T - z


def _mix(k: int, cap: int, schedule: AnnealSchedule) -> tuple[float, float]:
    """(birth, death) proposal probabilities at cardinality k; move
    takes the remainder. Boundary cardinalities reroute impossible
    proposals, and the acceptance ratios use these exact values."""
    if k == 0:
        return 1.0, 0.0
    if k >= cap:
        return 0.0, schedule.p_death
    return schedule.p_birth, schedule.p_death


def rjmcmc_anneal(
    obj: SsdObjective,
    schedule: AnnealSchedule | None = None,
    x0: PointProcess | None = None,
    seed: int = 0,
    d_r: int = 3,
) -> AnnealResult:
    """Reversible-jump annealing over event vectors of all cardinalities.

    Targets pi_i(t) proportional to exp(-SSD(t) / T_i) with the
    schedule temperature at iteration i. Proposals: birth inserts a
    Uniform[0, T] event, death deletes a uniformly chosen event, move
    perturbs one event by a reflected Gaussian step. Cardinality stays
    within [0, proven bound]. Deterministic for a fixed seed.
    """
    if d_r < 1:
        raise DataValidationError("d_r must be >= 1")
    schedule = schedule or AnnealSchedule()
    bound = dimension_bound(obj)
    cap = bound.proven
    T = obj.spec.T
    if x0 is None:
        state = np.empty(0)
    else:
        if x0.T != T:
            raise DataValidationError(f"x0 interval T={x0.T!r} does not match objective T={obj.spec.T!r}")
        if len(x0) > cap:
            raise DataValidationError(f"x0 has {len(x0)} events, above the cardinality cap {cap}")
        state = np.array(x0.events, dtype=np.float64)

    if cap == 0:
        empty = DimensionBest(0, np.empty(0), obj.phi0_ssd)
        return AnnealResult(
            top=(empty,),
            by_dimension={0: empty},
            trace=(obj.phi0_ssd,),
            acceptance={"birth": (0, 0), "death": (0, 0), "move": (0, 0)},
            dimension_bound=0,
            seed=seed,
        )

    rng = np.random.default_rng([seed, 4001])
    c = schedule.c if schedule.c is not None else 0.01 * obj.phi0_ssd
    if not c > 0:
        raise NumericalError("annealing temperature scale is zero; sample carries no events")
    sigma = schedule.sigma_move if schedule.sigma_move is not None else T / 20.0

    cur = obj.ssd_events(state)
    by_dim: dict[int, DimensionBest] = {len(state): DimensionBest(len(state), state.copy(), cur)}
    if len(state) != 0:
        by_dim[0] = DimensionBest(0, np.empty(0), obj.phi0_ssd)
    best_overall = min(b.ssd for b in by_dim.values())
    trace = []
    counts = {"birth": [0, 0], "death": [0, 0], "move": [0, 0]}

    for i in range(1, schedule.n_max + 1):
        temp = schedule.temperature(i, c)
        k = len(state)
        p_b, p_d = _mix(k, cap, schedule)
        u = rng.uniform()
        accepted = False
        if u < p_b:
            kind = "birth"
            loc = rng.uniform(0.0, T)
            delta = obj.delta_birth(state, loc)
            pb_here, _ = _mix(k, cap, schedule)
            _, pd_next = _mix(k + 1, cap, schedule)
            ratio = math.exp(max(min(-delta / temp, 700.0), -700.0)) * (T * pd_next) / ((k + 1) * pb_here)
            if rng.uniform() < ratio:
                state = np.sort(np.append(state, loc))
                cur += delta
                accepted = True
        elif u < p_b + p_d:
            kind = "death"
            idx = int(rng.integers(k))
            delta = obj.delta_death(state, idx)
            _, pd_here = _mix(k, cap, schedule)
            pb_prev, _ = _mix(k - 1, cap, schedule)
            ratio = math.exp(max(min(-delta / temp, 700.0), -700.0)) * (k * pb_prev) / (T * pd_here)
            if rng.uniform() < ratio:
                state = np.delete(state, idx)
                cur += delta
                accepted = True
        else:
            kind = "move"
            idx = int(rng.integers(k))
            loc = _reflect(float(state[idx]) + rng.normal(0.0, sigma), T)
            delta = obj.delta_move(state, idx, loc)
            ratio = math.exp(max(min(-delta / temp, 700.0), -700.0))
            if rng.uniform() < ratio:
                state = state.copy()
                state[idx] = loc
                state.sort()
                cur += delta
                accepted = True
        counts[kind][0] += 1
        counts[kind][1] += int(accepted)

        if accepted:
            k = len(state)
            if k not in by_dim or cur < by_dim[k].ssd:
                exact = obj.ssd_events(state)
                if k not in by_dim or exact < by_dim[k].ssd:
                    by_dim[k] = DimensionBest(k, state.copy(), exact)
                    best_overall = min(best_overall, exact)
        if i % 1024 == 0:
            cur = obj.ssd_events(state)
        trace.append(best_overall)

    top = tuple(sorted(by_dim.values(), key=lambda b: (b.ssd, b.dimension))[:d_r])
    return AnnealResult(
        top=top,
        by_dimension=dict(sorted(by_dim.items())),
        trace=tuple(trace),
        acceptance={kind: (proposed, accepted) for kind, (proposed, accepted) in counts.items()},
        dimension_bound=cap,
        seed=seed,
    )


@dataclass(frozen=True)
class SgdConfig:
    """Minibatch gradient-descent settings for the line search.

    batch = None resolves to min(16, N); rate = None is tuned from the
    initial gradient so the first step moves the largest coordinate by
    T / 100, then halves on any epoch-over-epoch regression; tol =
    None resolves to 1e-6 * SSD(empty).
    """

    batch: int | None = None
    rate: float | None = None
    epochs: int = 200
    tol: float | None = None
    max_halvings: int = 30

    def __post_init__(self) -> None:
        if self.batch is not None and self.batch < 1:
            raise DataValidationError("batch must be >= 1")
        if self.rate is not None and not (np.isfinite(self.rate) and self.rate > 0):
            raise DataValidationError(f"rate must be positive, got {self.rate!r}")
        if self.epochs < 1:
            raise DataValidationError("epochs must be >= 1")
        if self.tol is not None and not (np.isfinite(self.tol) and self.tol >= 0):
            raise DataValidationError(f"tol must be >= 0, got {self.tol!r}")
        if self.max_halvings < 0:
            raise DataValidationError("max_halvings must be >= 0")


@dataclass(frozen=True)
class CenterEstimate:
    """One center candidate: the event vector, its exact SSD, the
    cardinality cap that bounded the search, and how it was found."""

    center: PointProcess
    ssd: float
    dimension_bound: int
    method: str
    seed: int
    trace: tuple | dict = field(default_factory=tuple)

    def to_dict(self, include_trace: bool = True) -> dict:
        """JSON-ready view (trace tuples become lists, keys strings)."""

        def jsonable(node):
            if isinstance(node, dict):
                return {str(k): jsonable(v) for k, v in node.items()}
            if isinstance(node, (list, tuple)):
                return [jsonable(v) for v in node]
            if isinstance(node, (np.floating, np.integer)):
                return node.item()
            return node

        out = {
            "events": [float(e) for e in self.center.events],
            "cardinality": len(self.center),
            "ssd": self.ssd,
            "dimension_bound": self.dimension_bound,
            "method": self.method,
            "seed": self.seed,
        }
        if include_trace:
            out["trace"] = jsonable(self.trace)
        return out


@dataclass(frozen=True)
class LineSearchResult:
    per_dimension: dict[int, CenterEstimate]
    best: CenterEstimate


def _quantile_init(obj: SsdObjective, k: int) -> np.ndarray:
    if obj.pooled.size == 0:
        return np.linspace(0.0, obj.spec.T, k + 2)[1:-1]
    qs = np.arange(1, k + 1) / (k + 1.0)
    return np.sort(np.quantile(obj.pooled, qs))


def _sgd_run(
    obj: SsdObjective,
    init: np.ndarray,
    cfg: SgdConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, float, list[float]]:
    T = obj.spec.T
    t = np.clip(np.array(init, dtype=np.float64), 0.0, T)
    t.sort()
    best = obj.ssd_events(t)
    best_state = t.copy()
    trace = [best]

    batch_size = min(cfg.batch if cfg.batch is not None else min(16, obj.N), obj.N)
    tol = cfg.tol if cfg.tol is not None else 1e-6 * obj.phi0_ssd
    if cfg.rate is not None:
        rate = cfg.rate
    else:
        g0 = np.abs(obj.gradient_events(t)).max()
        rate = (T / 100.0) / g0 if g0 > 0 else T / 100.0

    prev = best
    halvings = 0
    for _ in range(cfg.epochs):
        perm = rng.permutation(obj.N)
        for lo in range(0, obj.N, batch_size):
            batch = perm[lo : lo + batch_size]
            grad = obj.gradient_batch(t, batch)
            t = np.clip(t - rate * grad, 0.0, T)
            t.sort()
        cur = obj.ssd_events(t)
        if cur < best:
            best = cur
            best_state = t.copy()
        trace.append(best)
        if cur > prev:
            halvings += 1
            if halvings > cfg.max_halvings:
                break
            rate *= 0.5
            t = best_state.copy()
            prev = best
            continue
        if prev - cur < tol:
            break
        prev = cur
    return best_state, best, trace


def line_search(
    obj: SsdObjective,
    dimensions: Iterable[int],
    inits: dict[int, Sequence[np.ndarray]] | None = None,
    sgd: SgdConfig | None = None,
    seed: int = 0,
    n_jobs: int = 1,
) -> LineSearchResult:
    """Minibatch gradient descent at each requested cardinality.

    Every cardinality k >= 1 is started from the k-quantiles of the
    pooled sample events, plus any extra ``inits[k]`` states; events
    are clamped into [0, T] and re-sorted after each step (SSD ignores
    event order, so sorting never changes the objective). Cardinality
    0 is evaluated explicitly since the gradient is undefined there.
    The per-cardinality RNG depends only on (seed, k), so a sweep and
    a targeted run agree on their common cardinalities.
    """
    dims = sorted(set(int(k) for k in dimensions))
    if not dims:
        raise DataValidationError("line_search needs at least one cardinality")
    cap = dimension_bound(obj).proven
    if dims[0] < 0:
        raise DataValidationError("cardinalities must be >= 0")
    if dims[-1] > cap:
        raise DataValidationError(f"cardinality {dims[-1]} is above the proven cap {cap}")
    sgd = sgd or SgdConfig()
    inits = inits or {}
    T = obj.spec.T

    def solve(k: int) -> CenterEstimate:
        if k == 0:
            return CenterEstimate(
                PointProcess.empty(T), obj.phi0_ssd, cap, LINE_SEARCH, seed, trace=(obj.phi0_ssd,)
            )
        runs = [(_quantile_init(obj, k), np.random.default_rng([seed, 7001, k]))]
        for j, extra in enumerate(inits.get(k, ())):
            extra = np.asarray(extra, dtype=np.float64)
            if extra.size != k:
                raise DataValidationError(f"init for cardinality {k} has {extra.size} events")
            runs.append((extra, np.random.default_rng([seed, 7002, k, j])))
        outcomes = [_sgd_run(obj, init, sgd, rng) for init, rng in runs]
        state, value, trace = min(outcomes, key=lambda o: o[1])
        return CenterEstimate(PointProcess(state, T), value, cap, LINE_SEARCH, seed, trace=tuple(trace))

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            estimates = list(pool.map(solve, dims))
    else:
        estimates = [solve(k) for k in dims]
    per_dimension = {k: est for k, est in zip(dims, estimates)}
    best = min(estimates, key=lambda e: (e.ssd, len(e.center)))
    return LineSearchResult(per_dimension=per_dimension, best=best)


def combined_center(
    obj: SsdObjective,
    schedule: AnnealSchedule | None = None,
    sgd: SgdConfig | None = None,
    d_r: int = 3,
    seed: int = 0,
) -> CenterEstimate:
    """Anneal, keep the d_r best cardinalities and states, then refine
    each with the gradient line search; return the overall minimizer.

    The returned SSD is never above the best annealing state's SSD:
    every kept state seeds a descent run whose best-so-far starts at
    that state, and the unkept cardinalities' bests enter the final
    minimum directly.
    """
    ann = rjmcmc_anneal(obj, schedule, x0=None, seed=seed, d_r=d_r)
    dims = sorted(b.dimension for b in ann.top)
    inits = {b.dimension: [b.events] for b in ann.top if b.dimension > 0}
    ls = line_search(obj, dims, inits=inits, sgd=sgd, seed=seed)

    candidates = [ls.best]
    for b in ann.by_dimension.values():
        candidates.append(
            CenterEstimate(PointProcess(b.events, obj.spec.T), b.ssd, ann.dimension_bound, RJMCMC, seed)
        )
    candidates.append(
        CenterEstimate(PointProcess.empty(obj.spec.T), obj.phi0_ssd, ann.dimension_bound, RJMCMC, seed)
    )
    winner = min(candidates, key=lambda e: (e.ssd, len(e.center)))

    near_ties = [
        (k, est.ssd)
        for k, est in ls.per_dimension.items()
        if len(winner.center) != k and est.ssd <= winner.ssd * (1.0 + NEAR_TIE_RELATIVE)
    ]
    trace = {
        "anneal": ann.trace,
        "line_search": {k: est.trace for k, est in ls.per_dimension.items()},
        "near_ties": tuple(near_ties),
    }
    return CenterEstimate(
        center=winner.center,
        ssd=winner.ssd,
        dimension_bound=ann.dimension_bound,
        method=COMBINED,
        seed=seed,
        trace=trace,
    )
