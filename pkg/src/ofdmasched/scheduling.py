"""Schedule data model: intervals, batches, schedules, and their text form.

Intervals are closed [t1, t2] on the integer microsecond grid. Two
intervals conflict if they share any point, including endpoints; a
feasible schedule consists of pairwise non-conflicting batches.
"""

from __future__ import annotations

from dataclasses import dataclass

from .phy import Machine, PhyProfile, RuConfiguration, configuration_by_index, configuration_index, machines_for_configuration

__all__ = ["Interval", "Batch", "Schedule", "conflicts", "dump_schedule", "parse_schedule"]


@dataclass(frozen=True, order=True)
class Interval:
    start: int  # t1, us
    end: int    # t2, us

    def __post_init__(self):
        if self.start >= self.end:
            raise ValueError(f"empty interval [{self.start}, {self.end}]")

    @property
    def length(self) -> int:
        return self.end - self.start


def conflicts(a: Interval, b: Interval) -> bool:
    """Closed-interval conflict: the intervals share at least one point."""
    return a.start <= b.start <= a.end or b.start <= a.start <= b.end


@dataclass(frozen=True)
class Batch:
    """One synchronized transmission: an interval plus job->machine pairs.

    ``assignments`` maps job ids to indices into ``machines``. When the
    batch was built from an RU configuration, ``machines`` is the
    canonical widest-first machine list of that configuration.
    """

    interval: Interval
    assignments: tuple[tuple[int, int], ...]  # (job_id, machine_index)
    machines: tuple[Machine, ...]
    config: RuConfiguration | None = None

    @property
    def job_ids(self) -> tuple[int, ...]:
        return tuple(j for j, _ in self.assignments)


@dataclass(frozen=True)
class Schedule:
    batches: tuple[Batch, ...]
    scheduled_jobs: frozenset[int]
    total_profit: float

    def __post_init__(self):
        ids = [j for b in self.batches for j in b.job_ids]
        if len(ids) != len(set(ids)):
            raise ValueError("job appears in two batches")
        if set(ids) != set(self.scheduled_jobs):
            raise ValueError("scheduled_jobs inconsistent with batches")


def make_schedule(batches: list[Batch], profit_of: dict[int, float]) -> Schedule:
    batches = sorted(batches, key=lambda b: (b.interval.start, b.interval.end))
    ids = frozenset(j for b in batches for j in b.job_ids)
    return Schedule(
        batches=tuple(batches),
        scheduled_jobs=ids,
        total_profit=sum(profit_of[j] for j in ids),
    )


def dump_schedule(schedule: Schedule) -> str:
    """Line format: ``batch_idx t1_us t2_us config_id job_id machine_id``.

    ``config_id`` is the configuration's stable index within its channel
    width, or -1 for batches built from an explicit machine list.
    """
    lines = []
    for idx, b in enumerate(schedule.batches):
        cfg = -1 if b.config is None else configuration_index(b.config)
        for job_id, machine_id in b.assignments:
            lines.append(f"{idx} {b.interval.start} {b.interval.end} {cfg} {job_id} {machine_id}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_schedule(
    text: str,
    profit_of: dict[int, float],
    channel_width: int,
    phy: PhyProfile,
) -> Schedule:
    rows: dict[int, dict] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        idx, t1, t2, cfg, job, mach = line.split()
        entry = rows.setdefault(int(idx), {"t1": int(t1), "t2": int(t2),
                                           "cfg": int(cfg), "pairs": []})
        entry["pairs"].append((int(job), int(mach)))
    batches = []
    for idx in sorted(rows):
        e = rows[idx]
        if e["cfg"] < 0:
            raise ValueError("cannot reconstruct machines for config-less batch")
        config = configuration_by_index(channel_width, e["cfg"])
        machines = tuple(machines_for_configuration(config, phy))
        batches.append(Batch(
            interval=Interval(e["t1"], e["t2"]),
            assignments=tuple(sorted(e["pairs"])),
            machines=machines,
            config=config,
        ))
    return make_schedule(batches, profit_of)
