"""Command-line interface.

One executable with subcommands covering the whole pipeline:

    simulate   draw HPP/IPP realizations and write them to a file
    smooth     evaluate smoothed curves on a grid (plot-ready CSV)
    distance   pairwise kernel-distance matrix between two files
    depth      depth of observations against a reference sample
    rank       depth-rank a sample against itself
    center     estimate the SSD-minimizing center
    classify   stratified k-fold depth classification
    experiment end-to-end ranking study (simulate + rank + center)
    check      kernel properness and metric spot checks

Exit codes: 0 success, 1 usage error, 2 data or validation error,
3 numerical failure. Every run writes a manifest (resolved config,
seed, library versions, input and output hashes) into the output
directory; logs go to stderr so data streams stay parseable. Rerunning
a command with the same config, seed, and inputs reproduces every
output byte for byte.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import platform
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__, _backend
from .analysis import (
    ClassifierConfig,
    Segment,
    cross_validate,
    run_ranking_experiment,
)
from .center import (
    COMBINED,
    RJMCMC,
    AnnealSchedule,
    CenterEstimate,
    SgdConfig,
    SsdObjective,
    combined_center,
    dimension_bound,
    line_search,
    rjmcmc_anneal,
)
from .depth import (
    H_DEPTH,
    MODIFIED_BAND_DEPTH,
    MODIFIED_H_DEPTH,
    PROPORTIONAL_TO_T,
    DepthConfig,
    h_depth,
    modified_band_depth,
    modified_h_depth,
    rank,
)
from .errors import DataValidationError, NumericalError
from .kernel import KernelSpec, check_properness
from .process import IntensitySpec, PointProcess, load_processes, save_processes, simulate_hpp, simulate_ipp
from .smoothing import lp_distance, smooth

_COMMANDS = ("simulate", "smooth", "distance", "depth", "rank", "center", "classify", "experiment", "check")


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this toolkit reserves 2
    for data errors, so remap usage problems to exit code 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


@dataclass
class RunConfig:
    """Resolved settings for one invocation: config-file values with
    command-line flags layered on top (flags win)."""

    command: str
    argv: list[str]
    values: dict
    seed: int
    out_dir: Path
    threads: int


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


# Execution-only settings: they steer scheduling, logging, and output
# placement, never results, so the manifest omits them to stay identical
# across reruns that only change them.
_EPHEMERAL_KEYS = frozenset({"threads", "verbose", "out_dir"})


def _write_manifest(run: RunConfig, inputs: dict[str, Path], outputs: dict[str, Path]) -> Path:
    manifest = {
        "command": run.command,
        "config": {k: v for k, v in run.values.items() if k not in _EPHEMERAL_KEYS},
        "seed": run.seed,
        "versions": {
            "ppdepth": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
            "backend": _backend.backend_name(),
        },
        "inputs": {name: {"path": str(p), "sha256": _sha256(Path(p))} for name, p in sorted(inputs.items())},
        "outputs": {name: {"path": str(p), "sha256": _sha256(Path(p))} for name, p in sorted(outputs.items())},
    }
    run.out_dir.mkdir(parents=True, exist_ok=True)
    path = run.out_dir / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _log(run: RunConfig, message: str) -> None:
    if run.values.get("verbose"):
        print(f"[{run.command}] {message}", file=sys.stderr)


class _Resolver:
    """Flag value if given, else config-file value, else default."""

    def __init__(self, args: argparse.Namespace, config: dict):
        self.args = args
        self.config = config
        self.resolved: dict = {}

    def get(self, key: str, default=None):
        value = getattr(self.args, key, None)
        if value is None:
            value = self.config.get(key, default)
        self.resolved[key] = value
        return value


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise DataValidationError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataValidationError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise DataValidationError(f"config file {path} must hold a JSON object of flat keys")
    return config


def _kernel_spec(res: _Resolver, T: float | None = None) -> KernelSpec:
    c1 = float(res.get("c1", 1.0))
    c2 = float(res.get("c2", 10.0))
    if T is None:
        T = float(res.get("T", 100.0))
    return KernelSpec(c1=c1, c2=c2, T=T)


def _depth_config(res: _Resolver, method: str) -> DepthConfig:
    h = res.get("h")
    h_rule = res.get("h_rule", PROPORTIONAL_TO_T if h is None else "fixed")
    return DepthConfig(
        method=method,
        h_rule=h_rule,
        C=float(res.get("C", 1.0)),
        h=float(h) if h is not None else None,
        p=float(res.get("p", 2.0)),
        grid_size=int(res.get("grid_size", 1024)),
        leave_one_out=bool(res.get("leave_one_out", False)),
    )


def _parse_mixture(text: str) -> list[tuple[float, float, float]]:
    components = []
    for chunk in text.split(","):
        parts = chunk.split(":")
        if len(parts) != 3:
            raise DataValidationError(f"mixture component {chunk!r} must look like w:mu:sigma")
        try:
            components.append((float(parts[0]), float(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise DataValidationError(f"mixture component {chunk!r}: {exc}") from exc
    return components


def _parse_segments(text: str, default_c1: float, default_c2: float) -> tuple[Segment, ...]:
    segments = []
    for chunk in text.split(","):
        parts = chunk.split(":")
        if len(parts) < 2:
            raise DataValidationError(f"segment {chunk!r} must look like start:end[:c1=...][:c2=...]")
        try:
            start, end = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise DataValidationError(f"segment {chunk!r}: {exc}") from exc
        c1, c2 = default_c1, default_c2
        for assign in parts[2:]:
            key, _, value = assign.partition("=")
            if key == "c1":
                c1 = float(value)
            elif key == "c2":
                c2 = float(value)
            else:
                raise DataValidationError(f"segment {chunk!r}: unknown setting {key!r}")
        segments.append(Segment(start, end, KernelSpec(c1=c1, c2=c2, T=end - start)))
    return tuple(segments)


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _data_T(processes) -> float:
    if not processes:
        raise DataValidationError("input file holds no processes")
    return processes[0].T


def _load_center_file(path: str | None, T: float) -> PointProcess | None:
    if path is None:
        return None
    centers = load_processes(path, format="jsonl" if path.endswith(".jsonl") else "text")
    if not centers:
        raise DataValidationError(f"center file {path} holds no process")
    center = centers[0]
    if center.T != T:
        raise DataValidationError(f"center interval T={center.T!r} does not match data T={T!r}")
    return center


# Subcommand bodies. Each returns (inputs, outputs) path maps for the
# manifest.


def _cmd_simulate(run: RunConfig, res: _Resolver) -> tuple[dict, dict]:
    model = res.get("model")
    if model not in ("hpp", "ipp"):
        raise DataValidationError("simulate needs --model hpp|ipp (flag or config file)")
    n = int(res.get("n", 100))
    T = float(res.get("T", 100.0))
    fmt = res.get("format", "jsonl")
    out = Path(res.get("out") or (run.out_dir / f"simulated.{ 'jsonl' if fmt == 'jsonl' else 'txt' }"))
    if model == "hpp":
        rate = res.get("rate")
        if rate is None:
            raise DataValidationError("hpp simulation needs --lambda")
        processes = simulate_hpp(float(rate), T, n, run.seed)
    else:
        mixture = res.get("mixture")
        if mixture is None:
            raise DataValidationError("ipp simulation needs --mixture w:mu:sigma[,w:mu:sigma...]")
        intensity = IntensitySpec.mixture(_parse_mixture(mixture), T)
        processes = simulate_ipp(intensity, n, run.seed)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_processes(processes, out, format=fmt)
    _log(run, f"wrote {len(processes)} processes to {out}")
    return {}, {"processes": out}


def _cmd_smooth(run: RunConfig, res: _Resolver) -> tuple[dict, dict]:
    data_path = res.get("data")
    if data_path is None:
        raise DataValidationError("smooth needs --data")
    fmt = res.get("format", "jsonl")
    processes = load_processes(data_path, format=fmt)
    spec = _kernel_spec(res, T=_data_T(processes))
    grid = int(res.get("grid", 256))
    out = Path(res.get("out") or (run.out_dir / "curves.csv"))
    t = np.linspace(0.0, spec.T, grid + 1)
    rows = []
    for p in processes:
        vals = smooth(p, spec).value(t)
        rows.extend([[_fmt(x), _fmt(v), p.id or ""] for x, v in zip(t, vals)])
    _write_csv(out, ["t", "value", "id"], rows)
    return {"data": Path(data_path)}, {"curves": out}


def _cmd_distance(run: RunConfig, res: _Resolver) -> tuple[dict, dict]:
    a_path = res.get("a")
    if a_path is None:
        raise DataValidationError("distance needs --a (and optionally --b)")
    b_path = res.get("b") or a_path
    fmt = res.get("format", "jsonl")
    a = load_processes(a_path, format=fmt)
    b = load_processes(b_path, format=fmt)
    T = _data_T(a)
    if _data_T(b) != T:
        raise DataValidationError("both files must share one interval length")
    spec = _kernel_spec(res, T=T)
    p = float(res.get("p", 2.0))
    method = res.get("method")
    grid = int(res.get("grid", 4096))
    curves_a = [smooth(x, spec) for x in a]
    curves_b = [smooth(x, spec) for x in b]
    out = Path(res.get("out") or (run.out_dir / "distance.csv"))
    header = ["id"] + [x.id or f"b{j}" for j, x in enumerate(b)]
    rows = []
    for i, ca in enumerate(curves_a):
        row = [a[i].id or f"a{i}"]
        row += [_fmt(lp_distance(ca, cb, p=p, method=method, grid_size=grid)) for cb in curves_b]
        rows.append(row)
    _write_csv(out, header, rows)
    inputs = {"a": Path(a_path)}
    if b_path != a_path:
        inputs["b"] = Path(b_path)
    return inputs, {"matrix": out}


def _cmd_depth(run: RunConfig, res: _Resolver) -> tuple[dict, dict]:
    data_path = res.get("data")
    if data_path is None:
        raise DataValidationError("depth needs --data")
    fmt = res.get("format", "jsonl")
    data = load_processes(data_path, format=fmt)
    sample_path = res.get("sample")
    sample = load_processes(sample_path, format=fmt) if sample_path else data
    T = _data_T(data)
    spec = _kernel_spec(res, T=T)
    method = res.get("method", H_DEPTH)
    cfg = _depth_config(res, method)
    center = _load_center_file(res.get("center_file"), T)
    if method == MODIFIED_H_DEPTH and center is None:
        raise DataValidationError("modified_h_depth needs --center-file")
    out = Path(res.get("out") or (run.out_dir / "depth.csv"))
    rows = []
    for i, s in enumerate(data):
        if method == H_DEPTH:
            value = h_depth(s, sample, cfg, spec)
        elif method == MODIFIED_H_DEPTH:
            value = modified_h_depth(s, center, cfg, spec)
        else:
            value = modified_band_depth(s, sample, spec, grid_size=cfg.grid_size)
        rows.append([s.id or f"#{i}", _fmt(value)])
    _write_csv(out, ["id", "depth"], rows)
    inputs = {"data": Path(data_path)}
    if sample_path:
        inputs["sample"] = Path(sample_path)
    if res.resolved.get("center_file"):
        inputs["center"] = Path(res.resolved["center_file"])
    return inputs, {"depth": out}


def _cmd_rank(run: RunConfig, res: _Resolver) -> tuple[dict, dict]:
    data_path = res.get("data")
    if data_path is None:
        raise DataValidationError("rank needs --data")
    fmt = res.get("format", "jsonl")
    sample = load_processes(data_path, format=fmt)
    T = _data_T(sample)
    spec = _kernel_spec(res, T=T)
    method = res.get("method", H_DEPTH)
    cfg = _depth_config(res, method)
    center = _load_center_file(res.get("center_file"), T)
    if method == MODIFIED_H_DEPTH and center is None:
        raise DataValidationError("modified_h_depth needs --center-file")
    report = rank(sample, cfg, spec, center=center, n_jobs=run.threads)
    order = np.argsort(report.ranks)
    top_k = res.get("top_k")
    bottom_k = res.get("bottom_k")
    if top_k is not None or bottom_k is not None:
        keep = list(order[: int(top_k or 0)]) + list(order[len(order) - int(bottom_k or 0) :])
    else:
        keep = list(order)
    rows = [[report.entries[i].id or f"#{i}", _fmt(report.entries[i].depth), report.entries[i].rank] for i in keep]
    out = Path(res.get("out") or (run.out_dir / "rank.csv"))
    _write_csv(out, ["id", "depth", "rank"], rows)
    inputs = {"data": Path(data_path)}
    if res.resolved.get("center_file"):
        inputs["center"] = Path(res.resolved["center_file"])
    return inputs, {"rank": out}


def _cmd_center(run: RunConfig, res: _Resolver) -> tuple[dict, dict]:
    data_path = res.get("data")
    if data_path is None:
        raise DataValidationError("center needs --data")
    fmt = res.get("format", "jsonl")
    sample = load_processes(data_path, format=fmt)
    spec = _kernel_spec(res, T=_data_T(sample))
    obj = SsdObjective(sample, spec)
    method = res.get("method", COMBINED)
    n_max = res.get("n_max")
    anneal_c = res.get("anneal_c")
    schedule = AnnealSchedule(
        c=float(anneal_c) if anneal_c is not None else None,
        n_max=int(n_max) if n_max is not None else 20000,
    )
    sgd = SgdConfig(
        batch=int(res.get("batch")) if res.get("batch") is not None else None,
        rate=float(res.get("rate")) if res.get("rate") is not None else None,
        epochs=int(res.get("epochs", 200)),
        tol=float(res.get("eps")) if res.get("eps") is not None else None,
    )
    d_r = int(res.get("dr", 3))
    started = time.perf_counter()
    if method == RJMCMC:
        ann = rjmcmc_anneal(obj, schedule, seed=run.seed, d_r=d_r)
        best = ann.best
        estimate = CenterEstimate(
            PointProcess(best.events, spec.T), best.ssd, ann.dimension_bound, RJMCMC, run.seed, trace=ann.trace
        )
    elif method == "line":
        bound = dimension_bound(obj)
        result = line_search(obj, range(bound.proven + 1), sgd=sgd, seed=run.seed, n_jobs=run.threads)
        estimate = result.best
    else:
        estimate = combined_center(obj, schedule=schedule, sgd=sgd, d_r=d_r, seed=run.seed)
    elapsed = time.perf_counter() - started
    out = Path(res.get("out") or (run.out_dir / "center.json"))
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(estimate.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if res.get("report"):
        events = ", ".join(f"{e:.2f}" for e in estimate.center.events)
        print(f"method: {estimate.method}")
        print(f"center: [{events}]")
        print(f"ssd: {estimate.ssd:.6g}")
        print(f"wall_time_s: {elapsed:.3f}")
    return {"data": Path(data_path)}, {"center": out}


def _cmd_classify(run: RunConfig, res: _Resolver) -> tuple[dict, dict]:
    data_path = res.get("data")
    if data_path is None:
        raise DataValidationError("classify needs --data")
    dataset = load_processes(data_path, format=res.get("format", "jsonl"))
    T = _data_T(dataset)
    default_c1 = float(res.get("c1", 1.0))
    default_c2 = float(res.get("c2", 10.0))
    segment_text = res.get("segment")
    if segment_text:
        segments = _parse_segments(segment_text, default_c1, default_c2)
    else:
        segments = (Segment(0.0, T, KernelSpec(c1=default_c1, c2=default_c2, T=T)),)
    method = res.get("method", MODIFIED_H_DEPTH)
    n_max = res.get("n_max")
    cfg = ClassifierConfig(
        segments=segments,
        depth=_depth_config(res, method),
        folds=int(res.get("folds", 4)),
        seed=run.seed,
        anneal=AnnealSchedule(n_max=int(n_max)) if n_max is not None else None,
    )
    reports = cross_validate(dataset, cfg, n_jobs=run.threads)
    for seg, report in zip(segments, reports):
        print(f"segment [{seg.start:g}, {seg.end:g}] c2={seg.spec.c2:g}: accuracy {report.accuracy:.2%}")
        for label, m in sorted(report.per_class.items()):
            print(
                f"  {label}: precision {m.precision:.4f}  recall {m.recall:.4f}  "
                f"F1 {m.f1:.4f}  support {m.support}"
            )
    out = Path(res.get("out") or (run.out_dir / "classification.json"))
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump([r.to_dict() for r in reports], fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"data": Path(data_path)}, {"report": out}


def _cmd_experiment(run: RunConfig, res: _Resolver) -> tuple[dict, dict]:
    protocol = res.get("protocol")
    n = int(res.get("n", 100))
    method = res.get("method", H_DEPTH)
    if protocol == "hpp":
        spec = KernelSpec(c1=float(res.get("c1", 1.0)), c2=float(res.get("c2", 10.0)), T=float(res.get("T", 100.0)))
        model: IntensitySpec | float = float(res.get("rate") or 0.045)
    else:
        spec = KernelSpec(c1=float(res.get("c1", 1.0)), c2=float(res.get("c2", 25.0)), T=float(res.get("T", 100.0)))
        mixture = res.get("mixture") or "3:25:10,2:75:10"
        model = IntensitySpec.mixture(_parse_mixture(mixture), spec.T)
    cfg = _depth_config(res, method)
    artifacts = run_ranking_experiment(
        model,
        n,
        spec,
        cfg,
        seed=run.seed,
        out_dir=run.out_dir,
        estimate_center=True,
        n_jobs=run.threads,
    )
    sample_path = run.out_dir / "sample.jsonl"
    save_processes(artifacts["sample"], sample_path, format="jsonl")
    _log(run, f"ranked {n} processes; center ssd {artifacts['center_estimate'].ssd:.6g}")
    outputs = {
        "ranked": artifacts["ranked"],
        "top_bottom": artifacts["top_bottom"],
        "curves": artifacts["curves"],
        "center": artifacts["center"],
        "sample": sample_path,
    }
    return {}, outputs


def _cmd_check(run: RunConfig, res: _Resolver) -> tuple[dict, dict]:
    spec = _kernel_spec(res)
    report = check_properness(spec, seed=run.seed)
    failures = 0
    for name, cond in report.conditions.items():
        status = "pass" if cond.passed else "FAIL"
        failures += 0 if cond.passed else 1
        print(f"properness {name}: {status} ({cond.detail})")

    rng = np.random.default_rng([run.seed, 12001])
    processes = []
    for _ in range(24):
        k = int(rng.integers(0, 9))
        processes.append(PointProcess(np.sort(rng.uniform(0.0, spec.T, size=k)), spec.T))
    curves = [smooth(p, spec) for p in processes]
    sym_worst = 0.0
    tri_worst = 0.0
    identity_ok = True
    for _ in range(200):
        i, j, k = rng.integers(0, len(curves), size=3)
        dij = lp_distance(curves[i], curves[j])
        dji = lp_distance(curves[j], curves[i])
        dik = lp_distance(curves[i], curves[k])
        dkj = lp_distance(curves[k], curves[j])
        sym_worst = max(sym_worst, abs(dij - dji))
        tri_worst = max(tri_worst, dij - (dik + dkj))
        if i == j and dij != 0.0:
            identity_ok = False
    checks = [
        ("metric identity d(s,s)=0", all(lp_distance(c, c) == 0.0 for c in curves) and identity_ok, 0.0),
        ("metric symmetry", sym_worst <= 1e-12, sym_worst),
        ("metric triangle inequality", tri_worst <= 1e-10, tri_worst),
    ]
    for name, ok, worst in checks:
        failures += 0 if ok else 1
        print(f"{name}: {'pass' if ok else 'FAIL'} (worst {worst:.3e})")
    if failures:
        raise NumericalError(f"{failures} check(s) failed")
    return {}, {}


_BODIES = {
    "simulate": _cmd_simulate,
    "smooth": _cmd_smooth,
    "distance": _cmd_distance,
    "depth": _cmd_depth,
    "rank": _cmd_rank,
    "center": _cmd_center,
    "classify": _cmd_classify,
    "experiment": _cmd_experiment,
    "check": _cmd_check,
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="ppdepth", description="Rank point-process observations by statistical depth.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat JSON config file; flags override its keys")
    common.add_argument("--out-dir", dest="out_dir", help="output directory (default: PPDEPTH_OUT_DIR or '.')")
    common.add_argument("--seed", type=int, help="global RNG seed (default 0)")
    common.add_argument("--threads", type=int, help="worker-thread cap; results are thread-count-invariant")
    common.add_argument("--verbose", action="store_true", default=None, help="progress notes on stderr")
    kernel = _Parser(add_help=False)
    kernel.add_argument("--c1", type=float, help="kernel amplitude (default 1.0)")
    kernel.add_argument("--c2", type=float, help="kernel inverse-width constant (default 10.0)")
    fileio = _Parser(add_help=False)
    fileio.add_argument("--format", choices=["jsonl", "text"], help="process-file format (default jsonl)")

    sub = parser.add_subparsers(dest="command", required=True, metavar="|".join(_COMMANDS))

    p = sub.add_parser("simulate", parents=[common, fileio], help="draw HPP/IPP realizations")
    p.add_argument("--model", choices=["hpp", "ipp"])
    p.add_argument("--lambda", dest="rate", type=float, help="HPP rate")
    p.add_argument("--mixture", help="IPP intensity components w:mu:sigma[,w:mu:sigma...]")
    p.add_argument("--T", type=float, help="interval length (default 100)")
    p.add_argument("--n", type=int, help="number of realizations (default 100)")
    p.add_argument("--out", help="output file (default <out-dir>/simulated.<ext>)")

    p = sub.add_parser("smooth", parents=[common, kernel, fileio], help="grid-evaluate smoothed curves")
    p.add_argument("--data", help="process file")
    p.add_argument("--grid", type=int, help="grid intervals (default 256)")
    p.add_argument("--out", help="output CSV (default <out-dir>/curves.csv)")

    p = sub.add_parser("distance", parents=[common, kernel, fileio], help="pairwise distance matrix")
    p.add_argument("--a", help="first process file")
    p.add_argument("--b", help="second process file (default: --a)")
    p.add_argument("--p", type=float, help="norm order (default 2)")
    p.add_argument("--method", choices=["closed_form", "quadrature"], help="default: closed form at p=2")
    p.add_argument("--grid", type=int, help="quadrature intervals (default 4096)")
    p.add_argument("--out", help="output CSV (default <out-dir>/distance.csv)")

    for name, extra in (("depth", True), ("rank", False)):
        p = sub.add_parser(
            name,
            parents=[common, kernel, fileio],
            help="score observations" if extra else "rank a sample against itself",
        )
        p.add_argument("--data", help="process file")
        if extra:
            p.add_argument("--sample", help="reference sample file (default: --data)")
        p.add_argument("--method", choices=[H_DEPTH, MODIFIED_H_DEPTH, MODIFIED_BAND_DEPTH])
        p.add_argument("--h", type=float, help="fixed bandwidth (switches h-rule to fixed)")
        p.add_argument("--h-rule", dest="h_rule", choices=["fixed", PROPORTIONAL_TO_T])
        p.add_argument("--C", type=float, help="bandwidth constant for h = C*T (default 1)")
        p.add_argument("--p", type=float, help="norm order (default 2)")
        p.add_argument("--grid-size", dest="grid_size", type=int, help="band-depth / quadrature grid")
        p.add_argument("--leave-one-out", dest="leave_one_out", action="store_true", default=None)
        p.add_argument("--center-file", dest="center_file", help="center observation for modified_h_depth")
        if not extra:
            p.add_argument("--top-k", dest="top_k", type=int, help="emit only the k deepest")
            p.add_argument("--bottom-k", dest="bottom_k", type=int, help="emit only the k shallowest")
        p.add_argument("--out", help=f"output CSV (default <out-dir>/{name}.csv)")

    p = sub.add_parser("center", parents=[common, kernel, fileio], help="estimate the SSD-minimizing center")
    p.add_argument("--data", help="process file")
    p.add_argument("--method", choices=[RJMCMC, "line", COMBINED], help="default combined")
    p.add_argument("--n-max", dest="n_max", type=int, help="annealing iterations (default 20000)")
    p.add_argument("--anneal-c", dest="anneal_c", type=float, help="temperature scale (default 0.01*SSD(empty))")
    p.add_argument("--dr", type=int, help="cardinalities kept from annealing (default 3)")
    p.add_argument("--batch", type=int, help="SGD minibatch size (default min(16, N))")
    p.add_argument("--rate", type=float, help="SGD learning rate (default auto)")
    p.add_argument("--epochs", type=int, help="SGD epoch cap (default 200)")
    p.add_argument("--eps", type=float, help="SGD epoch-improvement tolerance (default 1e-6*SSD(empty))")
    p.add_argument("--report", action="store_true", default=None, help="print method/center/SSD/time summary")
    p.add_argument("--out", help="output JSON (default <out-dir>/center.json)")

    p = sub.add_parser("classify", parents=[common, kernel, fileio], help="k-fold depth classification")
    p.add_argument("--data", help="labeled process file (jsonl)")
    p.add_argument("--folds", type=int, help="number of folds (default 4)")
    p.add_argument("--method", choices=[H_DEPTH, MODIFIED_H_DEPTH, MODIFIED_BAND_DEPTH])
    p.add_argument("--segment", help='time windows, e.g. "0:5:c2=100,5:10:c2=50" (default: one full window)')
    p.add_argument("--h", type=float)
    p.add_argument("--h-rule", dest="h_rule", choices=["fixed", PROPORTIONAL_TO_T])
    p.add_argument("--C", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--grid-size", dest="grid_size", type=int)
    p.add_argument("--n-max", dest="n_max", type=int, help="annealing iterations for per-fold centers")
    p.add_argument("--out", help="report JSON (default <out-dir>/classification.json)")

    p = sub.add_parser("experiment", parents=[common, kernel, fileio], help="end-to-end ranking study")
    p.add_argument("protocol", choices=["hpp", "ipp"])
    p.add_argument("--n", type=int, help="sample size (default 100)")
    p.add_argument("--T", type=float, help="interval length (default 100)")
    p.add_argument("--lambda", dest="rate", type=float, help="HPP rate (default 0.045)")
    p.add_argument("--mixture", help="IPP components (default 3:25:10,2:75:10)")
    p.add_argument("--method", choices=[H_DEPTH, MODIFIED_H_DEPTH, MODIFIED_BAND_DEPTH])
    p.add_argument("--h", type=float)
    p.add_argument("--h-rule", dest="h_rule", choices=["fixed", PROPORTIONAL_TO_T])
    p.add_argument("--C", type=float)
    p.add_argument("--p", type=float)

    p = sub.add_parser("check", parents=[common, kernel], help="properness and metric spot checks")
    p.add_argument("--T", type=float, help="interval length (default 100)")

    return parser


def dispatch(argv: list[str]) -> int:
    """Parse argv, run the subcommand, write the manifest, map errors
    to exit codes (0 ok, 1 usage, 2 data, 3 numerical)."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _load_config_file(getattr(args, "config", None))
        res = _Resolver(args, config)
        out_dir = Path(res.get("out_dir") or os.environ.get("PPDEPTH_OUT_DIR", "."))
        seed = int(res.get("seed", 0))
        threads = int(res.get("threads", 1))
        res.get("verbose", False)
        run = RunConfig(
            command=args.command,
            argv=list(argv),
            values=res.resolved,
            seed=seed,
            out_dir=out_dir,
            threads=max(1, threads),
        )
        inputs, outputs = _BODIES[args.command](run, res)
        run.values = {k: v for k, v in sorted(res.resolved.items()) if k != "report"}
        manifest = _write_manifest(run, inputs, outputs)
        _log(run, f"manifest at {manifest}")
        return 0
    except DataValidationError as exc:
        print(f"ppdepth {args.command}: data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"ppdepth {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 3


def main() -> int:
    return dispatch(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
