"""Command-line front end: run, compare, sweep, trace.

Configuration is a flat `key = value` file (see README).  Every artifact
written under --out is byte-deterministic for a fixed config and seed;
wall-clock timings go to a separate timing.json so the main outputs stay
reproducible.  Exit codes: 0 success, 2 configuration or input error,
3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .coordinator import (
    AdamHyper,
    BaselineResult,
    EvalContext,
    Evaluator,
    OptimizeResult,
    TraceEntry,
    adam_optimize,
    baseline_ch,
    baseline_na,
    baseline_ta,
    greedy_optimize,
    online_refine,
    warm_start_offline,
)
from .corpus import scenario_set_around
from .errors import ConfigError, ParseError, SolverFailure, ValidationError
from .milp import CostBreakdown
from .model import (
    CapCrossing,
    NetLoadSeries,
    RampSpike,
    SynthProfile,
    load_fleet,
    load_netload_csv,
    synth_netload,
)
from .partition import TimePartition, adjacent_ward_merge, uniform_partition

SCHEMA_VERSION = 1

METHODS = ("ch", "na", "ta", "co-greedy", "co-adam")
INIT_CHOICES = ("ta", "uniform", "best")

_CONFIG_KEYS = {
    "fleet",
    "netload",
    "forecast",
    "shed_cost",
    "step_minutes",
    "grid_minutes",
    "method",
    "T",
    "seed",
    "mode",
    "scenarios",
    "scenario_noise_mw",
    "alpha",
    "beta1",
    "beta2",
    "eps",
    "max_iter",
    "init",
    "jobs",
    "out_dir",
    "t_list",
    "synth_base_mw",
    "synth_amplitude_mw",
    "synth_cap_mw",
    "synth_cap_osc_mw",
    "synth_noise_mw",
    "synth_spike_mw",
    "synth_spike_at",
    "synth_n",
}


@dataclass
class RunConfig:
    """Typed view of a configuration file plus command-line overrides."""

    fleet_path: str
    netload_path: Optional[str] = None
    forecast_path: Optional[str] = None
    shed_cost: float = 3000.0
    step_minutes: int = 10
    grid_minutes: int = 10
    method: str = "co-greedy"
    num_periods: int = 6
    seed: int = 0
    mode: str = "deterministic"
    scenarios: int = 1
    scenario_noise_mw: float = 0.0
    hyper: AdamHyper = field(default_factory=AdamHyper)
    max_iter: int = 50
    init: str = "ta"
    jobs: int = 1
    out_dir: str = "out"
    t_list: Optional[tuple[int, ...]] = None
    synth: Optional[SynthProfile] = None

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.init not in INIT_CHOICES:
            raise ConfigError(f"init must be one of {INIT_CHOICES}, got {self.init!r}")
        if self.mode not in ("deterministic", "probabilistic"):
            raise ConfigError(f"mode must be deterministic or probabilistic, got {self.mode!r}")
        if self.num_periods < 1:
            raise ConfigError("T must be at least 1")
        if self.scenarios < 1:
            raise ConfigError("scenarios must be at least 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if self.netload_path is None and self.synth is None:
            raise ConfigError("config needs either netload = <path> or synth_* parameters")


def parse_config_file(path: str) -> dict[str, str]:
    """Read a flat `key = value` file; '#' starts a comment."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in out:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            out[key] = value
    return out


def _coerce(kv: Mapping[str, str], key: str, cast, default):
    if key not in kv:
        return default
    try:
        return cast(kv[key])
    except ValueError as exc:
        raise ConfigError(f"config key {key!r}: {exc}") from exc


def build_run_config(kv: Mapping[str, str]) -> RunConfig:
    if "fleet" not in kv:
        raise ConfigError("config is missing the required key 'fleet'")
    synth = None
    if "synth_base_mw" in kv:
        cap = _coerce(kv, "synth_cap_mw", float, None)
        spike_mw = _coerce(kv, "synth_spike_mw", float, None)
        synth = SynthProfile(
            base_mw=_coerce(kv, "synth_base_mw", float, 0.0),
            amplitude_mw=_coerce(kv, "synth_amplitude_mw", float, 0.0),
            cap_crossing=(
                CapCrossing(cap, _coerce(kv, "synth_cap_osc_mw", float, 0.0))
                if cap is not None
                else None
            ),
            ramp_spike=(
                RampSpike(spike_mw, _coerce(kv, "synth_spike_at", int, 1))
                if spike_mw is not None
                else None
            ),
            noise_mw=_coerce(kv, "synth_noise_mw", float, 0.0),
            n=_coerce(kv, "synth_n", int, 144),
            step_minutes=_coerce(kv, "step_minutes", int, 10),
        )
    t_list_raw = kv.get("t_list")
    t_list = None
    if t_list_raw is not None:
        try:
            t_list = tuple(int(x) for x in t_list_raw.split(",") if x.strip())
        except ValueError as exc:
            raise ConfigError(f"config key 't_list': {exc}") from exc
        if not t_list:
            raise ConfigError("config key 't_list' is empty")
    try:
        hyper = AdamHyper(
            alpha=_coerce(kv, "alpha", float, 3.0),
            beta1=_coerce(kv, "beta1", float, 0.9),
            beta2=_coerce(kv, "beta2", float, 0.999),
            eps=_coerce(kv, "eps", float, 1e-8),
        )
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(
        fleet_path=kv["fleet"],
        netload_path=kv.get("netload"),
        forecast_path=kv.get("forecast"),
        shed_cost=_coerce(kv, "shed_cost", float, 3000.0),
        step_minutes=_coerce(kv, "step_minutes", int, 10),
        grid_minutes=_coerce(kv, "grid_minutes", int, 10),
        method=kv.get("method", "co-greedy"),
        num_periods=_coerce(kv, "T", int, 6),
        seed=_coerce(kv, "seed", int, 0),
        mode=kv.get("mode", "deterministic"),
        scenarios=_coerce(kv, "scenarios", int, 1),
        scenario_noise_mw=_coerce(kv, "scenario_noise_mw", float, 0.0),
        hyper=hyper,
        max_iter=_coerce(kv, "max_iter", int, 50),
        init=kv.get("init", "ta"),
        jobs=_coerce(kv, "jobs", int, 1),
        out_dir=kv.get("out_dir", "out"),
        t_list=t_list,
        synth=synth,
    )


def _load_series(cfg: RunConfig) -> NetLoadSeries:
    if cfg.netload_path is not None:
        if not os.path.exists(cfg.netload_path):
            raise ConfigError(f"net-load file not found: {cfg.netload_path}")
        return load_netload_csv(cfg.netload_path, cfg.step_minutes)
    return synth_netload(cfg.synth, cfg.seed)


def _load_forecast(cfg: RunConfig, fallback: NetLoadSeries) -> NetLoadSeries:
    if cfg.forecast_path is None:
        return fallback
    if not os.path.exists(cfg.forecast_path):
        raise ConfigError(f"forecast file not found: {cfg.forecast_path}")
    return load_netload_csv(cfg.forecast_path, cfg.step_minutes)


def build_context(cfg: RunConfig) -> EvalContext:
    """Online evaluation context from a configuration."""
    if not os.path.exists(cfg.fleet_path):
        raise ConfigError(f"fleet file not found: {cfg.fleet_path}")
    fleet = load_fleet(cfg.fleet_path, cfg.shed_cost)
    actual = _load_series(cfg)
    if cfg.mode == "probabilistic":
        forecast = _load_forecast(cfg, actual)
        da_data = scenario_set_around(
            forecast, cfg.scenarios, cfg.scenario_noise_mw, cfg.seed + 1
        )
        return EvalContext(fleet, actual, da_data, "probabilistic", cfg.grid_minutes)
    return EvalContext(fleet, actual, actual, "deterministic", cfg.grid_minutes)


def _initial_partition(ev: Evaluator, cfg: RunConfig) -> TimePartition:
    ctx = ev.ctx
    if cfg.init == "uniform":
        return uniform_partition(cfg.num_periods, ctx.horizon_minutes, ctx.grid_minutes)
    if cfg.init == "ta":
        return adjacent_ward_merge(ctx.da_view_values(), cfg.num_periods, ctx.grid_minutes)
    candidates = [
        baseline_ch(ev, cfg.num_periods),
        baseline_na(ev, cfg.num_periods),
        baseline_ta(ev, cfg.num_periods),
    ]
    best = min(range(3), key=lambda i: (candidates[i].rt_cost, i))
    return candidates[best].partition


@dataclass(frozen=True)
class MethodOutcome:
    partition: TimePartition
    rt_cost: float
    da_cost: float
    breakdown: CostBreakdown
    iterations: int
    converged: bool
    eval_calls: int
    trace: tuple[TraceEntry, ...]


def run_method(ctx: EvalContext, cfg: RunConfig, method: Optional[str] = None) -> MethodOutcome:
    """Execute one method and normalize its outputs."""
    method = method or cfg.method
    ev = Evaluator(ctx, cfg.jobs)
    if method in ("ch", "na", "ta"):
        fn = {"ch": baseline_ch, "na": baseline_na, "ta": baseline_ta}[method]
        res: BaselineResult = fn(ev, cfg.num_periods)
        entry = TraceEntry(0, res.partition, res.rt_cost, {}, 0.0)
        return MethodOutcome(
            res.partition,
            res.rt_cost,
            res.evaluation.da_cost,
            res.breakdown,
            0,
            True,
            ev.eval_calls,
            (entry,),
        )
    initial = _initial_partition(ev, cfg)
    if method == "co-greedy":
        opt: OptimizeResult = greedy_optimize(ev, initial, cfg.max_iter, cfg.jobs)
    elif method == "co-adam":
        opt = adam_optimize(ev, initial, cfg.hyper, cfg.max_iter, cfg.jobs)
    else:
        raise ConfigError(f"unknown method {method!r}")
    final_eval = ev.evaluate(opt.final)
    return MethodOutcome(
        opt.final,
        opt.final_cost,
        final_eval.da_cost,
        final_eval.breakdown,
        opt.iterations,
        opt.converged,
        ev.eval_calls,
        opt.trace,
    )


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_trace_csv(path: str, trace: Sequence[TraceEntry]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "rt_cost_eur", "partition"])
        for e in trace:
            writer.writerow([e.iteration, repr(e.rt_cost), e.partition.to_csv_line()])


def _breakdown_dict(b: CostBreakdown) -> dict:
    return {
        "start_stop_eur": b.start_stop,
        "op_baseload_eur": b.op_baseload,
        "op_intermediate_eur": b.op_intermediate,
        "op_peaking_eur": b.op_peaking,
        "shed_eur": b.shed,
        "total_eur": b.total,
    }


def cmd_run(cfg: RunConfig, out_dir: str) -> int:
    t0 = time.perf_counter()
    ctx = build_context(cfg)
    outcome = run_method(ctx, cfg)
    os.makedirs(out_dir, exist_ok=True)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "method": cfg.method,
        "mode": cfg.mode,
        "T": cfg.num_periods,
        "seed": cfg.seed,
        "grid_minutes": cfg.grid_minutes,
        "horizon_minutes": ctx.horizon_minutes,
        "partition_minutes": list(outcome.partition.lengths_minutes),
        "iterations": outcome.iterations,
        "converged": outcome.converged,
        "eval_calls": outcome.eval_calls,
        "rt_cost_eur": outcome.rt_cost,
        "da_cost_eur": outcome.da_cost,
        "cost": _breakdown_dict(outcome.breakdown),
    }
    _write_json(os.path.join(out_dir, "result.json"), payload)
    _write_trace_csv(os.path.join(out_dir, "trace.csv"), outcome.trace)
    _write_json(
        os.path.join(out_dir, "timing.json"),
        {"wall_time_s": time.perf_counter() - t0},
    )
    return 0


def cmd_compare(cfg: RunConfig, out_dir: str) -> int:
    t0 = time.perf_counter()
    ctx = build_context(cfg)
    ev = Evaluator(ctx, cfg.jobs)
    rows = []
    results = {}
    for method in ("ch", "na", "ta"):
        fn = {"ch": baseline_ch, "na": baseline_na, "ta": baseline_ta}[method]
        results[method] = fn(ev, cfg.num_periods)
    best = min(
        ("ch", "na", "ta"),
        key=lambda m: (results[m].rt_cost, ("ch", "na", "ta").index(m)),
    )
    co = greedy_optimize(ev, results[best].partition, cfg.max_iter, cfg.jobs)
    co_breakdown = ev.evaluate(co.final).breakdown
    ch_total = results["ch"].breakdown.total
    ordered = [
        ("ch", results["ch"].breakdown),
        ("na", results["na"].breakdown),
        ("ta", results["ta"].breakdown),
        ("co", co_breakdown),
    ]
    for method, b in ordered:
        reduction = 0.0 if method == "ch" else (ch_total - b.total) / ch_total * 100.0
        rows.append(
            [
                method,
                repr(b.start_stop),
                repr(b.op_baseload),
                repr(b.op_intermediate),
                repr(b.op_peaking),
                repr(b.shed),
                repr(b.total),
                repr(reduction),
            ]
        )
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "compare.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "method",
                "start_stop_eur",
                "op_baseload_eur",
                "op_intermediate_eur",
                "op_peaking_eur",
                "shed_eur",
                "total_eur",
                "reduction_vs_ch_pct",
            ]
        )
        writer.writerows(rows)
    _write_json(
        os.path.join(out_dir, "timing.json"),
        {"wall_time_s": time.perf_counter() - t0},
    )
    return 0


def cmd_sweep(cfg: RunConfig, out_dir: str) -> int:
    if cfg.t_list is None:
        raise ConfigError("sweep needs t_list in the config or --t-list")
    t0 = time.perf_counter()
    ctx = build_context(cfg)
    ev = Evaluator(ctx, cfg.jobs)
    rows = []
    for T in cfg.t_list:
        results = {}
        for method in ("ch", "na", "ta"):
            fn = {"ch": baseline_ch, "na": baseline_na, "ta": baseline_ta}[method]
            results[method] = fn(ev, T)
        best = min(
            ("ch", "na", "ta"),
            key=lambda m: (results[m].rt_cost, ("ch", "na", "ta").index(m)),
        )
        co = greedy_optimize(ev, results[best].partition, cfg.max_iter, cfg.jobs)
        for method in ("ch", "na", "ta"):
            rows.append([T, method, repr(results[method].breakdown.total)])
        rows.append([T, "co", repr(co.final_cost)])
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "sweep.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["T", "method", "total_eur"])
        writer.writerows(rows)
    _write_json(
        os.path.join(out_dir, "timing.json"),
        {"wall_time_s": time.perf_counter() - t0},
    )
    return 0


def cmd_trace(cfg: RunConfig, out_dir: str, warm_start: bool) -> int:
    t0 = time.perf_counter()
    ctx = build_context(cfg)
    ev = Evaluator(ctx, cfg.jobs)
    cold_init = adjacent_ward_merge(ctx.da_view_values(), cfg.num_periods, ctx.grid_minutes)
    cold = adam_optimize(ev, cold_init, cfg.hyper, cfg.max_iter, cfg.jobs)
    os.makedirs(out_dir, exist_ok=True)
    _write_trace_csv(os.path.join(out_dir, "trace_cold.csv"), cold.trace)
    if warm_start:
        actual = ctx.rt_series
        forecast = _load_forecast(cfg, actual)
        offline_ctx = EvalContext(
            ctx.fleet, forecast, forecast, "deterministic", cfg.grid_minutes
        )
        offline = warm_start_offline(
            offline_ctx, cfg.num_periods, cfg.hyper, cfg.max_iter, cfg.jobs
        )
        warm = online_refine(ctx, offline, cfg.hyper, cfg.max_iter, cfg.jobs)
        _write_trace_csv(os.path.join(out_dir, "trace_warm.csv"), warm.trace)
    _write_json(
        os.path.join(out_dir, "timing.json"),
        {"wall_time_s": time.perf_counter() - t0},
    )
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="couc",
        description="Cost-oriented adaptive temporal resolution for day-ahead unit commitment",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "compare", "sweep", "trace"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--jobs", type=int, default=None)
        if name == "run":
            p.add_argument("--method", choices=METHODS, default=None)
        if name in ("run", "compare", "trace"):
            p.add_argument("--T", type=int, default=None)
        if name == "sweep":
            p.add_argument("--t-list", dest="t_list", default=None)
        if name == "trace":
            p.add_argument("--warm-start", action="store_true")
    args = parser.parse_args(argv)
    try:
        kv = parse_config_file(args.config)
        cfg = build_run_config(kv)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.jobs is not None:
            cfg.jobs = max(1, args.jobs)
        if getattr(args, "method", None) is not None:
            cfg.method = args.method
        if getattr(args, "T", None) is not None:
            cfg.num_periods = args.T
        if getattr(args, "t_list", None) is not None:
            try:
                cfg.t_list = tuple(int(x) for x in args.t_list.split(",") if x.strip())
            except ValueError as exc:
                raise ConfigError(f"--t-list: {exc}") from exc
        out_dir = args.out if args.out is not None else cfg.out_dir
        if args.command == "run":
            return cmd_run(cfg, out_dir)
        if args.command == "compare":
            return cmd_compare(cfg, out_dir)
        if args.command == "sweep":
            return cmd_sweep(cfg, out_dir)
        return cmd_trace(cfg, out_dir, args.warm_start)
    except (ConfigError, ParseError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
