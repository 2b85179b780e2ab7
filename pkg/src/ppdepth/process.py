"""Point-process observations, intensity models, and simulators.

An observation is a finite, sorted set of event times on a closed
interval [0, T]; the empty observation is legal and written phi0 in
docs. Homogeneous Poisson processes are simulated by drawing a
Poisson count and sorting uniform locations; inhomogeneous ones by
thinning a homogeneous envelope. Each observation gets its own RNG
stream derived from (seed, index), so simulating n processes is
reproducible under any partitioning of the indices.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataValidationError

_FORMATS = ("jsonl", "text")


@dataclass(frozen=True, eq=False, repr=False)
class PointProcess:
    """One realization: sorted event times in [0, T].

    Parameters
    ----------
    events : sequence of float
        Event times, each in [0, T] (endpoints legal). Sorted on
        construction; an empty sequence encodes the empty process.
    T : float
        Observation-interval length, > 0.
    id : str, optional
        Stable identifier carried through serialization.
    label : str, optional
        Free-form group tag (e.g. a class name).
    """

    events: np.ndarray
    T: float
    id: str | None = None
    label: str | None = None

    def __post_init__(self) -> None:
        if not (np.isfinite(self.T) and self.T > 0):
            raise DataValidationError(f"interval length T must be a positive finite real, got {self.T!r}")
        arr = np.array(self.events, dtype=np.float64, copy=True)
        if arr.ndim != 1:
            raise DataValidationError(f"events must be one-dimensional, got shape {arr.shape}")
        if arr.size and not np.all(np.isfinite(arr)):
            raise DataValidationError("events must all be finite")
        if arr.size and (arr.min() < 0.0 or arr.max() > self.T):
            bad = arr[(arr < 0.0) | (arr > self.T)][0]
            raise DataValidationError(f"event {bad!r} outside [0, {self.T!r}]")
        arr.sort()
        arr.setflags(write=False)
        object.__setattr__(self, "events", arr)
        for name in ("id", "label"):
            v = getattr(self, name)
            if v is not None and not isinstance(v, str):
                raise DataValidationError(f"{name} must be a string or None, got {type(v).__name__}")

    @classmethod
    def empty(cls, T: float, id: str | None = None, label: str | None = None) -> "PointProcess":
        """The empty process phi0 on [0, T]."""
        return cls(np.empty(0), T, id, label)

    def __len__(self) -> int:
        return int(self.events.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PointProcess):
            return NotImplemented
        return (
            self.T == other.T
            and self.id == other.id
            and self.label == other.label
            and self.events.shape == other.events.shape
            and bool(np.all(self.events == other.events))
        )

    def __repr__(self) -> str:
        head = np.array2string(self.events[:4], separator=", ")
        tail = "" if len(self) <= 4 else f" (+{len(self) - 4} more)"
        return f"PointProcess(|s|={len(self)}, T={self.T!r}, id={self.id!r}, label={self.label!r}, events={head}{tail})"


CONSTANT = "constant"
MIXTURE = "mixture"


@dataclass(frozen=True)
class IntensitySpec:
    """Intensity function on [0, T]: a constant rate or a weighted sum
    of Gaussian densities w * phi(t; mu, sigma).

    Use the :meth:`constant` / :meth:`mixture` constructors rather than
    the raw dataclass fields.
    """

    kind: str
    T: float
    rate: float = 0.0
    components: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self) -> None:
        if not (np.isfinite(self.T) and self.T > 0):
            raise DataValidationError(f"interval length T must be a positive finite real, got {self.T!r}")
        if self.kind == CONSTANT:
            if not (np.isfinite(self.rate) and self.rate >= 0):
                raise DataValidationError(f"constant rate must be finite and >= 0, got {self.rate!r}")
        elif self.kind == MIXTURE:
            if not self.components:
                raise DataValidationError("mixture intensity needs at least one component")
            for w, mu, sigma in self.components:
                if not (np.isfinite(w) and w > 0):
                    raise DataValidationError(f"mixture weight must be positive, got {w!r}")
                if not (np.isfinite(sigma) and sigma > 0):
                    raise DataValidationError(f"mixture sigma must be positive, got {sigma!r}")
                if not np.isfinite(mu):
                    raise DataValidationError(f"mixture mean must be finite, got {mu!r}")
        else:
            raise DataValidationError(f"unknown intensity kind: {self.kind!r}")

    @classmethod
    def constant(cls, rate: float, T: float) -> "IntensitySpec":
        return cls(CONSTANT, T, rate=float(rate))

    @classmethod
    def mixture(cls, components: Sequence[tuple[float, float, float]], T: float) -> "IntensitySpec":
        comps = tuple((float(w), float(mu), float(sigma)) for w, mu, sigma in components)
        return cls(MIXTURE, T, components=comps)

    def value(self, t):
        """lambda(t) for scalar or array t."""
        t = np.asarray(t, dtype=np.float64)
        if self.kind == CONSTANT:
            out = np.full_like(t, self.rate)
        else:
            out = np.zeros_like(t)
            for w, mu, sigma in self.components:
                z = (t - mu) / sigma
                out += w * np.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi))
        return float(out) if out.ndim == 0 else out

    def bound(self) -> float:
        """A finite upper bound for lambda on [0, T].

        For the mixture kind this is sum(w / (sigma * sqrt(2 pi))),
        the sum of the component maxima.
        """
        if self.kind == CONSTANT:
            return float(self.rate)
        return float(sum(w / (sigma * math.sqrt(2.0 * math.pi)) for w, mu, sigma in self.components))


def _stream(seed: int, index: int) -> np.random.Generator:
    # One stream per observation index: partition-invariant parallel simulation.
    return np.random.default_rng([int(seed), int(index)])


def _check_n(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise DataValidationError(f"n must be an integer >= 1, got {n!r}")
    return int(n)


def simulate_hpp(lam: float, T: float, n: int, seed: int = 0) -> list[PointProcess]:
    """n independent homogeneous Poisson realizations on [0, T].

    Counts are Poisson(lam * T); given a count k, the events are k
    sorted i.i.d. Uniform[0, T] draws. Deterministic for a fixed seed,
    and process i depends only on (seed, i).
    """
    if not (np.isfinite(lam) and lam > 0):
        raise DataValidationError(f"rate must be a positive finite real, got {lam!r}")
    if not (np.isfinite(T) and T > 0):
        raise DataValidationError(f"interval length T must be a positive finite real, got {T!r}")
    n = _check_n(n)
    out = []
    for i in range(n):
        rng = _stream(seed, i)
        k = int(rng.poisson(lam * T))
        events = np.sort(rng.uniform(0.0, T, size=k))
        out.append(PointProcess(events, T, id=f"hpp-{i:04d}"))
    return out


def simulate_ipp(intensity: IntensitySpec, n: int, seed: int = 0) -> list[PointProcess]:
    """n independent inhomogeneous Poisson realizations by thinning.

    A homogeneous envelope at rate bound() is simulated, then each
    event u is kept with probability lambda(u) / bound(). Deterministic
    for a fixed seed, one stream per process index.
    """
    lam_max = intensity.bound()
    if not lam_max > 0:
        raise DataValidationError(f"intensity upper bound must be positive, got {lam_max!r}")
    n = _check_n(n)
    T = intensity.T
    out = []
    for i in range(n):
        rng = _stream(seed, i)
        k = int(rng.poisson(lam_max * T))
        times = rng.uniform(0.0, T, size=k)
        keep = rng.uniform(size=k) * lam_max < intensity.value(times)
        events = np.sort(times[keep])
        out.append(PointProcess(events, T, id=f"ipp-{i:04d}"))
    return out


def _common_T(processes: Sequence[PointProcess]) -> float:
    if not processes:
        raise DataValidationError("cannot save an empty process list (no T for the header)")
    T = processes[0].T
    for p in processes:
        if p.T != T:
            raise DataValidationError(f"all processes must share one interval length; saw {T!r} and {p.T!r}")
    return T


def save_processes(processes: Sequence[PointProcess], path, format: str = "jsonl") -> None:
    """Write processes to ``path``.

    jsonl: a header line {"T": ...} then one object per process with
    keys "events" and, when present, "id" and "label". text: a header
    line ``T=...`` then one whitespace-separated line of event times
    per process (an empty line encodes the empty process; ids and
    labels are not representable). Floats are serialized with
    shortest round-trip decimals, so load(save(p)) is bit-exact.
    """
    if format not in _FORMATS:
        raise DataValidationError(f"unknown format: {format!r} (expected one of {_FORMATS})")
    T = _common_T(processes)
    lines = []
    if format == "jsonl":
        lines.append(json.dumps({"T": T}))
        for p in processes:
            row: dict = {}
            if p.id is not None:
                row["id"] = p.id
            if p.label is not None:
                row["label"] = p.label
            row["events"] = [float(e) for e in p.events]
            lines.append(json.dumps(row))
    else:
        lines.append(f"T={T!r}")
        for p in processes:
            lines.append(" ".join(repr(float(e)) for e in p.events))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_events(raw: Sequence[float], T: float, lineno: int, path) -> np.ndarray:
    events = np.asarray(raw, dtype=np.float64)
    if events.size and not np.all(np.isfinite(events)):
        raise DataValidationError(f"{path}:{lineno}: non-finite event time")
    if events.size and (events.min() < 0.0 or events.max() > T):
        bad = events[(events < 0.0) | (events > T)][0]
        raise DataValidationError(f"{path}:{lineno}: event {bad!r} outside [0, {T!r}]")
    if events.size > 1 and np.any(np.diff(events) < 0):
        warnings.warn(f"{path}:{lineno}: events not sorted; sorting", stacklevel=3)
        events = np.sort(events)
    return events


def load_processes(path, format: str = "jsonl") -> list[PointProcess]:
    """Read processes written by :func:`save_processes`.

    Unsorted events are sorted with a warning; an event outside
    [0, T] or a malformed line is a hard error naming the line number.
    """
    if format not in _FORMATS:
        raise DataValidationError(f"unknown format: {format!r} (expected one of {_FORMATS})")
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh.readlines()]
    if not lines:
        raise DataValidationError(f"{path}: empty file (missing header)")

    out = []
    if format == "jsonl":
        try:
            header = json.loads(lines[0])
            T = float(header["T"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DataValidationError(f'{path}:1: malformed header (expected {{"T": ...}}): {exc}') from exc
        for lineno, line in enumerate(lines[1:], start=2):
            try:
                row = json.loads(line)
                raw = row["events"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DataValidationError(f"{path}:{lineno}: malformed process line: {exc}") from exc
            events = _parse_events(raw, T, lineno, path)
            out.append(PointProcess(events, T, id=row.get("id"), label=row.get("label")))
    else:
        header = lines[0].strip()
        if not header.startswith("T="):
            raise DataValidationError(f"{path}:1: malformed header (expected T=<value>)")
        try:
            T = float(header[2:])
        except ValueError as exc:
            raise DataValidationError(f"{path}:1: malformed header value {header[2:]!r}") from exc
        for lineno, line in enumerate(lines[1:], start=2):
            try:
                raw = [float(tok) for tok in line.split()]
            except ValueError as exc:
                raise DataValidationError(f"{path}:{lineno}: malformed event time: {exc}") from exc
            events = _parse_events(raw, T, lineno, path)
            out.append(PointProcess(events, T))
    return out
