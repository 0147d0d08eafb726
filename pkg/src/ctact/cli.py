"""Command-line laboratory: errors, traces, bench, attack, thresholds.

Exit codes
----------
0  success
1  check failure (an assertion bound was violated, or a kind that must be
   trace-uniform is not)
2  usage error (bad flags, bad config file, bad grid, missing delay spec)
3  runtime error (solver bracket failure and other unexpected conditions)

Determinism: for a fixed seed and fixed config every output file is
byte-identical across runs, except the elapsed_ns column written by bench,
which is a wall-clock measurement.  Floats are serialized with their
shortest round-trip decimal form (binary32 fields round-trip through
binary32, statistics through binary64).

Configuration: flags override the config file, which overrides built-in
defaults (84 MHz clock, both canonical grids, 5 repetitions, 10,000
profiling measurements).  The config file is a flat JSON object whose keys
are ExperimentConfig field names; unknown keys are rejected.  The
CTACT_OUT_DIR environment variable supplies the default output directory.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import statistics
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .activations import (
    ActivationKind,
    DEFAULT_THRESHOLDS,
)
from .analysis import error_metrics, balancing_errors, solve_tanh_threshold, threshold_sweep
from .attack import (
    BASE_CYCLES_DESYNC,
    DelaySpec,
    attack_experiment,
    calibrated_delay,
    constant_time_model,
    default_desync_model,
)
from .grids import GRID_DENSE, GRID_WIDE, GridSpec, inclusive_grid
from .harness import check_uniformity, measure_host

__all__ = ["ExperimentConfig", "main", "entry",
           "EXIT_OK", "EXIT_CHECK_FAILED", "EXIT_USAGE", "EXIT_RUNTIME"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3

OUT_DIR_ENV = "CTACT_OUT_DIR"

_ALL_KINDS = tuple(ActivationKind)
_SMOOTH_KINDS = (ActivationKind.SIGMOID, ActivationKind.TANH,
                 ActivationKind.GELU, ActivationKind.SWISH)


class UsageError(Exception):
    pass


class CheckFailure(Exception):
    pass


@dataclass
class ExperimentConfig:
    """Flat experiment configuration; also the config-file schema."""

    seed: int = 0
    format: str = "csv"
    out: str | None = None
    force: bool = False
    kinds: object = None          # comma string or list; None = command default
    grid: str | None = None       # dense | wide | both
    interval: object = None       # [lo, hi] custom grid
    step: float | None = None
    repetitions: int = 5
    protection: str = "protected"  # bench: protected | unprotected | both
    include_unprotected: bool = False
    classes: object = None
    countermeasure: str = "desync"
    n_prof: int = 10000
    n_attack_max: int = 8000
    trials: int = 100
    delay_distribution: str = "uniform"
    delay_low_us: float | None = None
    delay_high_us: float | None = None
    delay_mean_us: float | None = None
    delay_std_us: float | None = None
    input_swing_cycles: int = 10
    history_trials: int = 1
    clock_hz: float = 84e6
    tolerance: float = 1e-9
    sweep: bool = False
    assert_max_abs: dict | None = None
    assert_rmse: dict | None = None

    def validate(self) -> None:
        if self.format not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.format!r}")
        if self.grid is not None and self.grid not in ("dense", "wide", "both"):
            raise UsageError(f"grid must be dense, wide or both, got {self.grid!r}")
        if self.protection not in ("protected", "unprotected", "both"):
            raise UsageError(f"bad protection selector: {self.protection!r}")
        if self.countermeasure not in ("desync", "constant-time"):
            raise UsageError(f"bad countermeasure: {self.countermeasure!r}")
        if self.delay_distribution not in ("uniform", "truncated-gaussian"):
            raise UsageError(f"bad delay distribution: {self.delay_distribution!r}")
        for name in ("repetitions", "n_attack_max", "trials"):
            if int(getattr(self, name)) < 1:
                raise UsageError(f"{name} must be >= 1")
        if self.n_prof < 2:
            raise UsageError("n_prof must be >= 2")
        if self.history_trials < 0:
            raise UsageError("history_trials must be >= 0")
        if self.clock_hz <= 0:
            raise UsageError("clock_hz must be positive")


_FIELD_NAMES = {f.name for f in dataclasses.fields(ExperimentConfig)}


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise UsageError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = sorted(set(data) - _FIELD_NAMES)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    return data


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    merged = dataclasses.asdict(ExperimentConfig())
    if getattr(args, "config", None):
        merged.update(_load_config_file(args.config))
    for name in _FIELD_NAMES:
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    cfg = ExperimentConfig(**merged)
    cfg.validate()
    return cfg


def _parse_kind_list(value, default, label: str = "kind"):
    if value is None:
        return list(default)
    items = value
    if isinstance(value, str):
        items = [part.strip() for part in value.split(",") if part.strip()]
    if not items:
        raise UsageError(f"empty {label} list")
    kinds = []
    for item in items:
        try:
            kinds.append(ActivationKind(str(item)))
        except ValueError as exc:
            known = ", ".join(k.value for k in ActivationKind)
            raise UsageError(f"unknown {label} {item!r} (known: {known})") from exc
    return kinds


def _resolve_grids(cfg: ExperimentConfig, default_named: str) -> list:
    custom = cfg.interval is not None or cfg.step is not None
    if custom:
        if cfg.grid is not None:
            raise UsageError("give either --grid or --interval/--step, not both")
        if cfg.step is not None and float(cfg.step) <= 0:
            raise UsageError(f"step must be positive, got {cfg.step}")
        if cfg.interval is None or cfg.step is None:
            raise UsageError("a custom grid needs both --interval and --step")
        interval = list(cfg.interval)
        if len(interval) != 2:
            raise UsageError("interval must be two numbers: lo hi")
        spec = GridSpec(float(interval[0]), float(interval[1]), float(cfg.step))
        try:
            inclusive_grid(*spec)  # validates bounds and step
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        return [spec]
    named = cfg.grid or default_named
    return {"dense": [GRID_DENSE], "wide": [GRID_WIDE],
            "both": [GRID_DENSE, GRID_WIDE]}[named]


# -- output helpers -----------------------------------------------------------

def _output_path(cfg: ExperimentConfig, filename: str) -> Path:
    directory = Path(cfg.out or os.environ.get(OUT_DIR_ENV) or ".")
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / filename
    if path.exists() and not cfg.force:
        raise UsageError(f"refusing to overwrite {path} (use --force)")
    return path


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _f32_str(value) -> str:
    """Shortest decimal that parses back to the same binary32 value."""
    return str(np.float32(value))


def _f32_num(value) -> float:
    return float(_f32_str(value))


# -- errors -------------------------------------------------------------------

_ERRORS_CSV_HEADER = ("kind", "lo", "hi", "step", "n_points",
                      "mse", "rmse", "max_abs", "argmax_input")


def cmd_errors(cfg: ExperimentConfig) -> int:
    kinds = _parse_kind_list(cfg.kinds, _SMOOTH_KINDS)
    if ActivationKind.RELU in kinds:
        raise UsageError("relu is exact; error metrics apply to the smooth kinds")
    path = _output_path(cfg, f"errors.{cfg.format}")
    reports = [
        error_metrics(kind, spec.lo, spec.hi, spec.step)
        for spec in _resolve_grids(cfg, "both")
        for kind in kinds
    ]
    print(f"{'kind':8s} {'interval':>16s} {'step':>7s} "
          f"{'mse':>12s} {'rmse':>12s} {'max_abs':>12s} {'argmax':>9s}")
    for r in reports:
        print(f"{r.kind.value:8s} [{r.lo:+7.1f},{r.hi:+7.1f}] {r.step:7.3g} "
              f"{r.mse:12.3e} {r.rmse:12.3e} {r.max_abs:12.3e} "
              f"{_f32_str(r.argmax_input):>9s}")

    if cfg.format == "csv":
        rows = [
            (r.kind.value, repr(r.lo), repr(r.hi), repr(r.step), r.n_points,
             repr(r.mse), repr(r.rmse), repr(r.max_abs), _f32_str(r.argmax_input))
            for r in reports
        ]
        _write_csv(path, _ERRORS_CSV_HEADER, rows)
    else:
        payload = [
            {"kind": r.kind.value, "lo": r.lo, "hi": r.hi, "step": r.step,
             "n_points": r.n_points, "mse": r.mse, "rmse": r.rmse,
             "max_abs": r.max_abs, "argmax_input": _f32_num(r.argmax_input)}
            for r in reports
        ]
        _write_json(path, payload)
    print(f"wrote {path}")

    violations = []
    for metric, bounds in (("max_abs", cfg.assert_max_abs), ("rmse", cfg.assert_rmse)):
        for kind_name, bound in (bounds or {}).items():
            kind = ActivationKind(str(kind_name))
            for r in reports:
                if r.kind == kind and getattr(r, metric) > float(bound):
                    violations.append(
                        f"{kind.value} {metric} {getattr(r, metric):.3e} > {float(bound):.3e} "
                        f"on [{r.lo}, {r.hi}] step {r.step}"
                    )
    if violations:
        raise CheckFailure("; ".join(violations))
    return EXIT_OK


# -- traces ---------------------------------------------------------------------

_TRACES_CSV_HEADER = ("kind", "protected", "lo", "hi", "step", "input", "trace_len")


def cmd_traces(cfg: ExperimentConfig) -> int:
    kinds = _parse_kind_list(cfg.kinds, _ALL_KINDS)
    grid_specs = _resolve_grids(cfg, "both")
    path = _output_path(cfg, f"traces.{cfg.format}")
    ok = True
    grid_payloads = []
    csv_rows = []
    for spec in grid_specs:
        grid = inclusive_grid(*spec)
        reports = []
        lengths = set()
        for protected in ((True, False) if cfg.include_unprotected else (True,)):
            for kind in kinds:
                report = check_uniformity(kind, grid, protected)
                reports.append(report)
                if protected:
                    if report.uniform:
                        lengths.add(report.canonical_length)
                    else:
                        ok = False
                if cfg.format == "csv":
                    # Per-input lengths reconstruct exactly from the report:
                    # everything off the deviating list matched the canonical
                    # trace, so no second tracing pass is needed.
                    deviating = {_f32_str(x): n for x, n in report.deviating_inputs}
                    for x in grid:
                        key = _f32_str(x)
                        csv_rows.append((kind.value, int(protected),
                                         repr(spec.lo), repr(spec.hi), repr(spec.step),
                                         key, deviating.get(key, report.canonical_length)))
        aligned = len(lengths) == 1 and all(
            r.uniform for r in reports if r.protected)
        if not aligned:
            ok = False
        label = f"[{spec.lo}, {spec.hi}] step {spec.step}"
        for r in reports:
            state = "uniform" if r.uniform else f"NON-UNIFORM ({len(r.deviating_inputs)} deviating)"
            mode = "protected" if r.protected else "unprotected"
            print(f"{label} {r.kind.value:8s} {mode:11s} length {r.canonical_length:3d}  {state}")
            if r.protected and not r.uniform:
                for x, length in r.deviating_inputs[:20]:
                    print(f"    deviates at {x!r}: length {length}")
        print(f"{label} protected kinds aligned: {aligned}")
        grid_payloads.append({
            "lo": spec.lo, "hi": spec.hi, "step": spec.step,
            "protected_aligned": aligned,
            "shared_length": lengths.pop() if len(lengths) == 1 else None,
            "reports": [
                {"kind": r.kind.value, "protected": r.protected,
                 "uniform": r.uniform, "canonical_length": r.canonical_length,
                 "n_deviating": len(r.deviating_inputs),
                 "deviating_inputs": [[_f32_num(x), n] for x, n in r.deviating_inputs[:20]]}
                for r in reports
            ],
        })

    if cfg.format == "csv":
        _write_csv(path, _TRACES_CSV_HEADER, csv_rows)
    else:
        _write_json(path, {"ok": ok, "grids": grid_payloads})
    print(f"wrote {path}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# -- bench ---------------------------------------------------------------------

_BENCH_CSV_HEADER = ("kind", "protected", "input", "repetition", "elapsed_ns")


def cmd_bench(cfg: ExperimentConfig) -> int:
    kinds = _parse_kind_list(cfg.kinds, _ALL_KINDS)
    grids = _resolve_grids(cfg, "wide")
    reps = int(cfg.repetitions)
    modes = {"protected": (True,), "unprotected": (False,),
             "both": (True, False)}[cfg.protection]
    samples_path = _output_path(cfg, "bench_samples.csv")
    summary_path = _output_path(cfg, "bench_summary.json")
    all_samples = []
    for protected in modes:
        for kind in kinds:
            for spec in grids:
                grid = inclusive_grid(*spec)
                all_samples.extend(measure_host(kind, grid, reps, protected))

    rows = [
        (s.kind.value, int(s.protected), _f32_str(s.input), s.repetition, s.elapsed_ns)
        for s in all_samples
    ]
    _write_csv(samples_path, _BENCH_CSV_HEADER, rows)

    summary = []
    for protected in modes:
        for kind in kinds:
            values = [s.elapsed_ns for s in all_samples
                      if s.kind == kind and s.protected == protected]
            summary.append({
                "kind": kind.value,
                "protected": protected,
                "n": len(values),
                "min_ns": min(values),
                "mean_ns": statistics.fmean(values),
                "median_ns": statistics.median(values),
                "std_ns": statistics.stdev(values) if len(values) > 1 else 0.0,
                "max_ns": max(values),
            })
    _write_json(summary_path, summary)

    print(f"{'kind':8s} {'mode':11s} {'n':>6s} {'min':>9s} {'mean':>10s} "
          f"{'median':>9s} {'std':>10s} {'max':>9s}   (ns)")
    for row in summary:
        mode = "protected" if row["protected"] else "unprotected"
        print(f"{row['kind']:8s} {mode:11s} {row['n']:6d} {row['min_ns']:9d} "
              f"{row['mean_ns']:10.1f} {row['median_ns']:9.1f} "
              f"{row['std_ns']:10.1f} {row['max_ns']:9d}")
    print(f"wrote {samples_path} and {summary_path}")
    print("note: host wall times are scheduling-noisy; trace uniformity, not "
          "this table, carries the constant-time claim")
    return EXIT_OK


# -- attack ----------------------------------------------------------------------

_ATTACK_CSV_HEADER = ("true_kind", "trial", "n", "class", "score")


def _resolve_delay(cfg: ExperimentConfig) -> DelaySpec:
    if cfg.delay_distribution == "uniform":
        given = (cfg.delay_low_us is not None, cfg.delay_high_us is not None)
        if given == (False, False):
            return calibrated_delay()
        if all(given):
            try:
                return DelaySpec("uniform", low_us=float(cfg.delay_low_us),
                                 high_us=float(cfg.delay_high_us))
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
        raise UsageError("uniform delay needs both delay_low_us and delay_high_us")
    if cfg.delay_mean_us is None or cfg.delay_std_us is None:
        raise UsageError("truncated-gaussian delay needs delay_mean_us and delay_std_us")
    try:
        return DelaySpec("truncated-gaussian", mean_us=float(cfg.delay_mean_us),
                         std_us=float(cfg.delay_std_us))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_attack(cfg: ExperimentConfig) -> int:
    classes = _parse_kind_list(cfg.classes, tuple(BASE_CYCLES_DESYNC), label="class")
    unsupported = [k.value for k in classes if k not in BASE_CYCLES_DESYNC]
    if unsupported:
        raise UsageError(
            f"no base latency for: {', '.join(unsupported)}; the modeled device "
            f"dispatches {', '.join(k.value for k in BASE_CYCLES_DESYNC)}"
        )
    if len(classes) < 2:
        raise UsageError("the attack needs at least 2 classes")
    delay = _resolve_delay(cfg)
    if cfg.countermeasure == "constant-time":
        model = constant_time_model(delay)
    else:
        model = default_desync_model(delay, input_swing_cycles=int(cfg.input_swing_cycles))
    model = dataclasses.replace(model, clock_hz=float(cfg.clock_hz))
    model = dataclasses.replace(
        model, base_cycles={k: model.base_cycles[k] for k in classes})
    scores_path = _output_path(cfg, "attack_scores.csv")
    summary_path = _output_path(cfg, "attack_summary.json")

    records, kept = attack_experiment(
        model, classes, int(cfg.n_prof), int(cfg.n_attack_max),
        int(cfg.trials), int(cfg.seed), keep_history_trials=int(cfg.history_trials),
    )

    csv_rows = []
    for (true_kind, trial), result in kept.items():
        for kind in classes:
            series = result.score_history[kind]
            csv_rows.extend(
                (true_kind.value, trial, n + 1, kind.value, repr(float(series[n])))
                for n in range(len(series))
            )
    _write_csv(scores_path, _ATTACK_CSV_HEADER, csv_rows)

    per_class = {}
    for kind in classes:
        rows = [r for r in records if r.true_kind == kind]
        separations = [r.separation_n for r in rows]
        successes = [s for s in separations if s is not None]
        argmax_counts = {c.value: 0 for c in classes}
        for r in rows:
            argmax_counts[r.final_argmax.value] += 1
        per_class[kind.value] = {
            "trials": len(rows),
            "success_rate": len(successes) / len(rows),
            "median_separation_n": (float(statistics.median(successes))
                                    if successes else None),
            "max_separation_n": max(successes) if successes else None,
            "separation_n": separations,
            "final_argmax_counts": argmax_counts,
        }
    summary = {
        "config": {
            "seed": int(cfg.seed),
            "classes": [k.value for k in classes],
            "countermeasure": cfg.countermeasure,
            "n_prof": int(cfg.n_prof),
            "n_attack_max": int(cfg.n_attack_max),
            "trials": int(cfg.trials),
            "clock_hz": float(cfg.clock_hz),
            "input_swing_cycles": (0 if cfg.countermeasure == "constant-time"
                                   else int(cfg.input_swing_cycles)),
            "delay": dataclasses.asdict(delay),
            "rng": "PCG64 via numpy default_rng; one spawned child stream per trial",
        },
        "per_true_class": per_class,
    }
    _write_json(summary_path, summary)

    for kind in classes:
        stats_row = per_class[kind.value]
        med = stats_row["median_separation_n"]
        print(f"true={kind.value:8s} success {stats_row['success_rate']:6.1%}  "
              f"median separation {med if med is not None else 'n/a'}  "
              f"argmax {stats_row['final_argmax_counts']}")
    print(f"wrote {scores_path} and {summary_path}")
    return EXIT_OK


# -- thresholds --------------------------------------------------------------------

_GELU_SWEEP = tuple(round(3.0 + 0.1 * i, 1) for i in range(15))   # 3.0 .. 4.4
_SWISH_SWEEP = tuple(round(6.5 + 0.25 * i, 2) for i in range(13))  # 6.5 .. 9.5


def cmd_thresholds(cfg: ExperimentConfig) -> int:
    if cfg.tolerance <= 0:
        raise UsageError(f"tolerance must be positive, got {cfg.tolerance}")
    path = _output_path(cfg, f"thresholds.{cfg.format}")
    solution = solve_tanh_threshold(float(cfg.tolerance))
    approx_err, sat_err = balancing_errors(solution.threshold)
    payload = {
        "solved": {
            "tanh_threshold": solution.threshold,
            "residual": solution.residual,
            "iterations": solution.iterations,
            "approximation_error": approx_err,
            "saturation_error": sat_err,
            "provenance": "balanced-error bisection",
        },
        "derived": {
            "sigmoid_threshold": 2.0 * solution.threshold,
            "provenance": "doubled tanh threshold",
        },
        "stored_constants": {
            "tanh": {"value": _f32_num(DEFAULT_THRESHOLDS.tanh),
                     "provenance": "binary32 nearest the solved threshold"},
            "sigmoid": {"value": _f32_num(DEFAULT_THRESHOLDS.sigmoid),
                        "provenance": "exactly twice the tanh constant"},
            "gelu": {"value": _f32_num(DEFAULT_THRESHOLDS.gelu),
                     "provenance": "empirical"},
            "swish": {"value": _f32_num(DEFAULT_THRESHOLDS.swish),
                      "provenance": "empirical"},
        },
        "stored_vs_solved_gap": abs(float(DEFAULT_THRESHOLDS.tanh) - solution.threshold),
    }
    if cfg.sweep:
        wide = GRID_WIDE
        payload["sweep"] = {
            kind.value: [
                {"threshold": t, "max_abs": err}
                for t, err in threshold_sweep(kind, candidates, *wide)
            ]
            for kind, candidates in ((ActivationKind.GELU, _GELU_SWEEP),
                                     (ActivationKind.SWISH, _SWISH_SWEEP))
        }

    if cfg.format == "json":
        _write_json(path, payload)
    else:
        rows = [
            ("tanh_threshold_solved", repr(solution.threshold), "balanced-error bisection"),
            ("residual", repr(solution.residual), "solver"),
            ("iterations", str(solution.iterations), "solver"),
            ("sigmoid_threshold_derived", repr(2.0 * solution.threshold), "doubled tanh threshold"),
            ("tanh_constant", _f32_str(DEFAULT_THRESHOLDS.tanh), "binary32 nearest the solved threshold"),
            ("sigmoid_constant", _f32_str(DEFAULT_THRESHOLDS.sigmoid), "exactly twice the tanh constant"),
            ("gelu_constant", _f32_str(DEFAULT_THRESHOLDS.gelu), "empirical"),
            ("swish_constant", _f32_str(DEFAULT_THRESHOLDS.swish), "empirical"),
        ]
        if cfg.sweep:
            for kind, candidates in ((ActivationKind.GELU, _GELU_SWEEP),
                                     (ActivationKind.SWISH, _SWISH_SWEEP)):
                for t, err in threshold_sweep(kind, candidates, *GRID_WIDE):
                    rows.append((f"sweep_{kind.value}", repr(t), repr(err)))
        _write_csv(path, ("name", "value", "detail"), rows)

    print(f"solved tanh threshold {solution.threshold:.10f} "
          f"(residual {solution.residual:.2e}, {solution.iterations} iterations)")
    print(f"derived sigmoid threshold {2.0 * solution.threshold:.10f}")
    print(f"stored constants: tanh {_f32_str(DEFAULT_THRESHOLDS.tanh)}, "
          f"sigmoid {_f32_str(DEFAULT_THRESHOLDS.sigmoid)}, "
          f"gelu {_f32_str(DEFAULT_THRESHOLDS.gelu)} (empirical), "
          f"swish {_f32_str(DEFAULT_THRESHOLDS.swish)} (empirical)")
    print(f"wrote {path}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="master RNG seed")
    parser.add_argument("--format", choices=("csv", "json"), default=None,
                        help="primary artifact format")
    parser.add_argument("--out", default=None,
                        help=f"output directory (default: ${OUT_DIR_ENV} or .)")
    parser.add_argument("--force", action="store_true", default=None,
                        help="overwrite existing output files")
    parser.add_argument("--config", default=None, help="JSON config file")


def _add_grid_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid", choices=("dense", "wide", "both"), default=None,
                        help="named grid selection")
    parser.add_argument("--interval", nargs=2, type=float, default=None,
                        metavar=("LO", "HI"), help="custom grid bounds")
    parser.add_argument("--step", type=float, default=None, help="custom grid step")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctact",
        description="Constant-time activation laboratory: accuracy, traces, "
                    "host timing, and a timing template attack.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_errors = sub.add_parser("errors", help="accuracy metrics vs libm references")
    _add_common(p_errors)
    _add_grid_options(p_errors)
    p_errors.add_argument("--kinds", default=None,
                          help="comma list (default: sigmoid,tanh,gelu,swish)")

    p_traces = sub.add_parser("traces", help="operation-trace uniformity checks")
    _add_common(p_traces)
    _add_grid_options(p_traces)
    p_traces.add_argument("--kinds", default=None, help="comma list (default: all five)")
    p_traces.add_argument("--include-unprotected", dest="include_unprotected",
                          action="store_true", default=None,
                          help="also report unprotected reference traces")

    p_bench = sub.add_parser("bench", help="host-process wall-time measurements")
    _add_common(p_bench)
    _add_grid_options(p_bench)
    p_bench.add_argument("--kinds", default=None, help="comma list (default: all five)")
    p_bench.add_argument("--repetitions", type=int, default=None,
                         help="timed passes over the grid (default 5)")
    p_bench.add_argument("--protection", choices=("protected", "unprotected", "both"),
                         default=None, help="which implementations to time")

    p_attack = sub.add_parser("attack", help="profiled Gaussian template attack")
    _add_common(p_attack)
    p_attack.add_argument("--classes", default=None,
                          help="comma list (default: relu,sigmoid,tanh)")
    p_attack.add_argument("--countermeasure", choices=("desync", "constant-time"),
                          default=None, help="device configuration under attack")
    p_attack.add_argument("--n-prof", dest="n_prof", type=int, default=None,
                          help="profiling measurements per class (default 10000)")
    p_attack.add_argument("--n-max", dest="n_attack_max", type=int, default=None,
                          help="attack measurements per trial (default 8000)")
    p_attack.add_argument("--trials", type=int, default=None,
                          help="trials per true class (default 100)")
    p_attack.add_argument("--delay-dist", dest="delay_distribution",
                          choices=("uniform", "truncated-gaussian"), default=None)
    p_attack.add_argument("--delay-low", dest="delay_low_us", type=float, default=None,
                          help="uniform delay lower bound, microseconds")
    p_attack.add_argument("--delay-high", dest="delay_high_us", type=float, default=None,
                          help="uniform delay upper bound, microseconds")
    p_attack.add_argument("--delay-mean", dest="delay_mean_us", type=float, default=None,
                          help="truncated-gaussian delay mean, microseconds")
    p_attack.add_argument("--delay-std", dest="delay_std_us", type=float, default=None,
                          help="truncated-gaussian delay std, microseconds")
    p_attack.add_argument("--input-swing", dest="input_swing_cycles", type=int,
                          default=None, help="input-dependent base swing in cycles")
    p_attack.add_argument("--history-trials", dest="history_trials", type=int,
                          default=None, help="trials per class with saved score history")
    p_attack.add_argument("--clock-hz", dest="clock_hz", type=float, default=None)

    p_thresh = sub.add_parser("thresholds", help="balanced-threshold solve and sweeps")
    _add_common(p_thresh)
    p_thresh.add_argument("--tolerance", type=float, default=None,
                          help="solver residual tolerance (default 1e-9)")
    p_thresh.add_argument("--sweep", action="store_true", default=None,
                          help="add gelu/swish threshold sensitivity sweeps")

    return parser


_HANDLERS = {
    "errors": cmd_errors,
    "traces": cmd_traces,
    "bench": cmd_bench,
    "attack": cmd_attack,
    "thresholds": cmd_thresholds,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        cfg = _resolve_config(args)
        return _HANDLERS[args.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except Exception as exc:  # solver brackets, I/O, and other runtime faults
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
