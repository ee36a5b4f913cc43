"""Reproducible experiment pipeline: workload -> scheduler -> validator ->
simulator -> metrics, with all artifacts written to disk.

Every run emits ``jobs.txt``, ``schedule.txt``, ``report.json`` and
``metrics.csv`` into the output directory. Repetitions re-run the
pipeline with consecutive seeds and aggregate mean and 95% confidence
intervals; the worker count is capped by the ``DPMSS_THREADS``
environment variable (sequential by default).
"""

from __future__ import annotations

import json
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .local_search import DEFAULT_TXOP_US
from .phy import CHANNEL_WIDTHS, full_26_tone_configuration
from .scheduling import Schedule, dump_schedule
from .simulator import (
    CHANNEL_QUALITIES,
    ChannelScenario,
    SimulationReport,
    run_scenario,
    validate_schedule,
)
from .slotted import slotted_apps_from_profiles, slotted_schedule
from .workload import USE_CASES, JobSet, dump_jobs, load_use_case, use_case_profiles

__all__ = ["SCHEDULERS", "CSV_HEADER", "ExperimentConfig", "MetricsRow", "run", "compare"]

SCHEDULERS = ("lsds", "lsdsf", "edf", "lrf", "nlrf",
              "slotted_optimal", "slotted_heuristic")
CSV_HEADER = ("use_case,scheduler,bandwidth_mhz,channel,seed,"
              "profit_ratio,drop_pct,critical_drop_pct,runtime_ms")

DEFAULT_HEURISTIC_WINDOW_SLOTS = 10


@dataclass(frozen=True)
class ExperimentConfig:
    use_case: str
    scheduler: str
    bandwidth_mhz: int = 40
    channel: str = "ideal"
    seed: int = 1
    horizon_us: int = 200_000
    txop_us: int = DEFAULT_TXOP_US
    grid_us: int | None = None
    reps: int = 1
    out_dir: str | None = None
    force: bool = False

    def validate(self):
        if self.use_case not in USE_CASES:
            raise ValueError(f"unknown use case {self.use_case}; choose from {USE_CASES}")
        if self.scheduler not in SCHEDULERS:
            raise ValueError(f"unknown scheduler {self.scheduler}; choose from {SCHEDULERS}")
        if self.bandwidth_mhz not in CHANNEL_WIDTHS:
            raise ValueError(f"bandwidth must be one of {CHANNEL_WIDTHS} MHz")
        if self.channel not in CHANNEL_QUALITIES:
            raise ValueError(f"channel must be one of {CHANNEL_QUALITIES}")
        if self.horizon_us <= 0 or self.txop_us <= 0 or self.reps < 1:
            raise ValueError("horizon, txop and reps must be positive")
        if self.use_case == "UC3" and self.bandwidth_mhz < 160 and not self.force:
            raise ValueError(
                "A bandwidth of 40 MHz cannot handle this much load: UC3 is sized "
                "for 160 MHz. Pass --bandwidth 160, or --force to run anyway.")


@dataclass(frozen=True)
class MetricsRow:
    use_case: str
    scheduler: str
    bandwidth_mhz: int
    channel: str
    seed: int
    profit_ratio: float
    drop_pct: float
    critical_drop_pct: float | None
    runtime_ms: float

    def csv(self) -> str:
        crit = "" if self.critical_drop_pct is None else f"{self.critical_drop_pct:.4f}"
        return (f"{self.use_case},{self.scheduler},{self.bandwidth_mhz},"
                f"{self.channel},{self.seed},{self.profit_ratio:.6f},"
                f"{self.drop_pct:.4f},{crit},{self.runtime_ms:.3f}")


def _metrics_from(config, jobs: JobSet, report: SimulationReport) -> MetricsRow:
    total_profit = jobs.total_profit
    achieved = sum(j.profit for j in jobs.jobs if j.id in report.delivered)
    criticals = [j for j in jobs.jobs if j.critical]
    # a use case where every application carries the top profit has no
    # distinguished critical class; its critical breakdown stays blank
    if len(criticals) == len(jobs.jobs) or not criticals:
        crit_pct = None
    else:
        crit_dropped = sum(1 for j in criticals if j.id in report.dropped)
        crit_pct = 100.0 * crit_dropped / len(criticals)
    return MetricsRow(
        use_case=config.use_case,
        scheduler=config.scheduler,
        bandwidth_mhz=config.bandwidth_mhz,
        channel=config.channel,
        seed=jobs.seed,
        profit_ratio=achieved / total_profit if total_profit else 1.0,
        drop_pct=100.0 * len(report.dropped) / len(jobs) if len(jobs) else 0.0,
        critical_drop_pct=crit_pct,
        runtime_ms=report.runtime_ms,
    )


def _run_slotted(config, jobs, scenario, phy):
    """Slot-based schedulers need slot-aligned periodic applications."""
    try:
        apps = slotted_apps_from_profiles(use_case_profiles(config.use_case))
    except ValueError as exc:
        raise ValueError(
            f"{config.use_case} cannot run under {config.scheduler}: {exc}") from exc
    window = (None if config.scheduler == "slotted_optimal"
              else DEFAULT_HEURISTIC_WINDOW_SLOTS)
    eq_config = full_26_tone_configuration(config.bandwidth_mhz)
    t0 = time.perf_counter()
    schedule, slot_jobs = slotted_schedule(
        apps, eq_config, config.horizon_us // 1_000, window, phy)
    runtime_ms = (time.perf_counter() - t0) * 1e3
    violations = validate_schedule(schedule, slot_jobs, config.bandwidth_mhz,
                                   phy, config.txop_us)
    if violations:
        raise RuntimeError(f"{config.scheduler} schedule infeasible: {violations[:3]}")
    delivered = frozenset(schedule.scheduled_jobs)
    report = SimulationReport(
        delivered=delivered,
        dropped=frozenset(j.id for j in slot_jobs.jobs) - delivered,
        per_app={}, runtime_ms=runtime_ms,
        scheduler=config.scheduler, quality=config.channel,
    )
    return report, schedule, slot_jobs


def _single_run(config: ExperimentConfig) -> tuple[MetricsRow, JobSet, Schedule, SimulationReport]:
    scenario = ChannelScenario(config.channel)
    phy = scenario.phy()
    stage = "workload"
    try:
        jobs = load_use_case(config.use_case, config.horizon_us, config.seed)
        stage = "scheduler"
        if config.scheduler in ("slotted_optimal", "slotted_heuristic"):
            report, schedule, jobs = _run_slotted(config, jobs, scenario, phy)
        else:
            report, schedule = run_scenario(
                jobs, config.scheduler, scenario, config.bandwidth_mhz,
                txop=config.txop_us, grid_us=config.grid_us)
        stage = "metrics"
        row = _metrics_from(config, jobs, report)
    except Exception as exc:
        raise RuntimeError(f"stage '{stage}' failed: {exc}") from exc
    return row, jobs, schedule, report


def _rep_worker(args):
    config, seed = args
    row, *_ = _single_run(replace(config, seed=seed))
    return row


def _confidence(values):
    mean = statistics.fmean(values)
    if len(values) < 2:
        return mean, 0.0
    half = 1.96 * statistics.stdev(values) / math.sqrt(len(values))
    return mean, half


def run(config: ExperimentConfig) -> MetricsRow:
    """Run one experiment (plus repetitions) and write artifacts."""
    config.validate()
    row, jobs, schedule, report = _single_run(config)

    rows = [row]
    if config.reps > 1:
        seeds = list(range(config.seed + 1, config.seed + config.reps))
        workers = int(os.environ.get("DPMSS_THREADS", "1"))
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                extra = list(pool.map(_rep_worker, [(config, s) for s in seeds]))
        else:
            extra = [_rep_worker((config, s)) for s in seeds]
        rows += sorted(extra, key=lambda r: r.seed)

    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "jobs.txt").write_text(dump_jobs(jobs))
        (out / "schedule.txt").write_text(dump_schedule(schedule))
        (out / "metrics.csv").write_text(
            "\n".join([CSV_HEADER] + [r.csv() for r in rows]) + "\n")
        payload = {
            "config": {k: getattr(config, k) for k in (
                "use_case", "scheduler", "bandwidth_mhz", "channel", "seed",
                "horizon_us", "txop_us", "grid_us", "reps")},
            "delivered": sorted(report.delivered),
            "dropped": sorted(report.dropped),
            "per_app": report.per_app,
            "runtime_ms": report.runtime_ms,
            "metrics": [r.__dict__ for r in rows],
        }
        if len(rows) > 1:
            ratio_mean, ratio_ci = _confidence([r.profit_ratio for r in rows])
            drop_mean, drop_ci = _confidence([r.drop_pct for r in rows])
            payload["aggregate"] = {
                "profit_ratio_mean": ratio_mean, "profit_ratio_ci95": ratio_ci,
                "drop_pct_mean": drop_mean, "drop_pct_ci95": drop_ci,
            }
        (out / "report.json").write_text(json.dumps(payload, indent=2))
    return rows[0]


def compare(configs: list[ExperimentConfig]) -> tuple[str, list[MetricsRow]]:
    """Run several schedulers on one workload; returns (table, rows)."""
    if len(configs) < 2:
        raise ValueError("compare needs at least two configurations")
    anchor = configs[0]
    for c in configs[1:]:
        if (c.use_case, c.seed, c.horizon_us) != (anchor.use_case, anchor.seed,
                                                  anchor.horizon_us):
            raise ValueError("compared configurations must share use case, seed "
                             "and horizon")
    rows = []
    for c in configs:
        c.validate()
        row, *_ = _single_run(c)
        rows.append(row)
    header = f"{'scheduler':<18}{'profit_ratio':>14}{'drop_pct':>10}{'crit_drop':>11}{'runtime_ms':>12}"
    lines = [header, "-" * len(header)]
    for r in rows:
        crit = "-" if r.critical_drop_pct is None else f"{r.critical_drop_pct:.2f}"
        lines.append(f"{r.scheduler:<18}{r.profit_ratio:>14.6f}{r.drop_pct:>10.2f}"
                     f"{crit:>11}{r.runtime_ms:>12.1f}")
    return "\n".join(lines), rows
