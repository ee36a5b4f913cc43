"""Job-set generation from application profiles.

The four factory use cases are table-driven; each station of a profile
emits packets independently (one application per station). Generation is
a pure function of (profile, horizon, seed): per-station RNG streams are
keyed by a string of the seed, use-case and station index, so job sets
are byte-identical across runs and platforms.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

__all__ = [
    "ApplicationProfile",
    "Job",
    "JobSet",
    "USE_CASES",
    "use_case_profiles",
    "generate_periodic",
    "generate_poisson",
    "load_use_case",
    "dump_jobs",
    "parse_jobs",
]


@dataclass(frozen=True)
class ApplicationProfile:
    """One application row of a use-case table."""

    name: str
    gen_rate: float  # packets per second, per station
    size_min: int    # bytes; size_min == size_max for fixed-size traffic
    size_max: int
    deadline_us: int
    profit: float
    node_count: int
    arrival_kind: str = "periodic"  # or "poisson"

    def __post_init__(self):
        if self.gen_rate <= 0:
            raise ValueError("gen_rate must be positive")
        if self.deadline_us <= 0:
            raise ValueError("deadline must be positive")
        if self.profit < 0:
            raise ValueError("profit must be non-negative")
        if self.node_count < 1:
            raise ValueError("node_count must be >= 1")
        if not 0 < self.size_min <= self.size_max:
            raise ValueError("bad size range")
        if self.arrival_kind not in ("periodic", "poisson"):
            raise ValueError(f"unknown arrival kind: {self.arrival_kind}")

    @property
    def period_us(self) -> int:
        return round(1e6 / self.gen_rate)


@dataclass(frozen=True, slots=True)
class Job:
    """A packet: release time, absolute deadline, profit, payload size."""

    id: int
    station: int
    release: int        # us
    deadline_abs: int   # us, clipped to the horizon
    profit: float
    size: int           # bytes
    critical: bool = False
    app: str = ""

    def __post_init__(self):
        if self.release >= self.deadline_abs:
            raise ValueError(f"job {self.id}: release {self.release} >= deadline {self.deadline_abs}")
        if self.size <= 0:
            raise ValueError("zero-size payload")


@dataclass(frozen=True)
class JobSet:
    jobs: tuple[Job, ...]
    horizon: int
    seed: int

    @property
    def total_profit(self) -> float:
        return sum(j.profit for j in self.jobs)

    def __len__(self):
        return len(self.jobs)


def _station_rng(seed: int, scope: str, station: int) -> random.Random:
    return random.Random(f"{seed}:{scope}:{station}")


def _draw_size(profile: ApplicationProfile, rng: random.Random) -> int:
    if profile.size_min == profile.size_max:
        return profile.size_min
    return rng.randint(profile.size_min, profile.size_max)


def _make_job(profile, horizon, station, release, size, next_id) -> Job:
    deadline = min(release + profile.deadline_us, horizon)
    return Job(
        id=next_id,
        station=station,
        release=release,
        deadline_abs=deadline,
        profit=profile.profit,
        size=size,
        app=profile.name,
    )


def generate_periodic(
    profile: ApplicationProfile,
    horizon: int,
    offset_policy: str = "zero",
    seed: int = 0,
    station_base: int = 0,
) -> list[Job]:
    """Periodic arrivals: one packet per station every ``period_us``.

    Releases are strictly inside [0, horizon); deadlines are clipped to
    the horizon. ``offset_policy`` is "zero" (synchronized stations, the
    adversarial default) or "uniform" (per-station phase in [0, period)
    drawn from the seed).
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    period = profile.period_us
    if period < 1:
        raise ValueError(f"{profile.name}: period below the 1 us grid")
    if offset_policy not in ("zero", "uniform"):
        raise ValueError(f"unknown offset policy: {offset_policy}")
    jobs = []
    for s in range(profile.node_count):
        station = station_base + s
        rng = _station_rng(seed, profile.name, station)
        offset = rng.randrange(period) if offset_policy == "uniform" else 0
        t = offset
        while t < horizon:
            jobs.append(_make_job(profile, horizon, station, t, _draw_size(profile, rng), len(jobs)))
            t += period
    return jobs


def generate_poisson(
    profile: ApplicationProfile,
    horizon: int,
    seed: int,
    station_base: int = 0,
) -> list[Job]:
    """Poisson arrivals: per-station exponential inter-arrival times with
    mean ``1e6 / gen_rate`` us, floored to the 1 us grid."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    mean_us = 1e6 / profile.gen_rate
    jobs = []
    for s in range(profile.node_count):
        station = station_base + s
        rng = _station_rng(seed, profile.name, station)
        t = 0.0
        while True:
            t += -mean_us * math.log(1.0 - rng.random())
            release = int(t)
            if release >= horizon:
                break
            jobs.append(_make_job(profile, horizon, station, release, _draw_size(profile, rng), len(jobs)))
    return jobs


# Use-case tables: (name, gen rate pkts/s, size or (min, max) bytes,
# deadline ms, profit, nodes).
_UC1 = [
    ("profile-1", 4000, (64, 128), 0.25, 10, 10),
    ("profile-2", 2000, (128, 256), 0.5, 10, 10),
    ("profile-3", 1000, (256, 512), 1, 10, 10),
    ("profile-4", 500, (512, 1024), 2, 10, 10),
    ("profile-5", 250, (1024, 1522), 4, 10, 10),
]
_UC2 = [
    ("smart-meters", 1.25, 100, 16, 10, 15),
    ("status-info", 2.5, 100, 16, 20, 15),
    ("reporting-logging", 0.75, 500, 1000, 30, 15),
    ("data-polling", 1, 500, 16, 10, 15),
    ("control-traffic", 937.5, 100, 16, 160, 20),
    ("video-surveillance", 2000, 1500, 1000, 10, 10),
]
# UC-3 table rates are per application (40000 pkts/s each) and are split
# evenly across the application's 10 nodes.
_UC3 = [
    ("motion-control", 4000, 50, 1, 30, 10),
    ("collaborative-agv", 4000, 50, 4, 20, 10),
    ("robotic-control", 4000, 50, 10, 30, 10),
    ("asset-monitoring", 4000, 50, 100, 5, 10),
]
_UC4 = [
    ("size-inspection", 1, 30000, 5000, 30, 3),
    ("defect-detection", 10, 500, 500, 50, 4),
    ("ac-sensing", 0.016, 64, 6000, 45, 1),
    ("preventive-maintenance", 0.02, 30, 1000, 50, 2),
    ("equipment-monitoring", 1, 20, 1000, 30, 2),
    ("wrench-counting", 0.016, 64, 100, 40, 10),
    ("movement-beacon", 2, 4000, 4000, 10, 6),
    ("asset-racking", 1, 200, 1000, 15, 20),
    ("parts-tracking", 0.028, 1000, 1000, 45, 10),
    ("expert-video", 50, 24000, 200000, 1, 1),
]

_UC_TABLES = {"UC1": (_UC1, "periodic"), "UC2": (_UC2, "periodic"),
              "UC3": (_UC3, "poisson"), "UC4": (_UC4, "periodic")}

USE_CASES = tuple(_UC_TABLES)


def use_case_profiles(use_case: str) -> list[ApplicationProfile]:
    """Application profiles of a use case, in table order."""
    if use_case not in _UC_TABLES:
        raise ValueError(f"unknown use case: {use_case}")
    rows, kind = _UC_TABLES[use_case]
    profiles = []
    for name, rate, size, deadline_ms, profit, nodes in rows:
        lo, hi = size if isinstance(size, tuple) else (size, size)
        profiles.append(ApplicationProfile(
            name=name, gen_rate=rate, size_min=lo, size_max=hi,
            deadline_us=round(deadline_ms * 1000), profit=profit,
            node_count=nodes, arrival_kind=kind,
        ))
    return profiles


def load_use_case(use_case: str, horizon: int, seed: int) -> JobSet:
    """Instantiate a use-case table into a concrete JobSet.

    Packets of the highest-profit application(s) are flagged critical.
    Stations are numbered globally in table order; job ids follow
    (release, station) order.
    """
    profiles = use_case_profiles(use_case)
    max_profit = max(p.profit for p in profiles)
    jobs: list[Job] = []
    station_base = 0
    for p in profiles:
        scope = f"{use_case}:{p.name}"
        scoped = ApplicationProfile(**{**p.__dict__, "name": scope})
        if p.arrival_kind == "poisson":
            raw = generate_poisson(scoped, horizon, seed, station_base)
        else:
            raw = generate_periodic(scoped, horizon, "zero", seed, station_base)
        critical = p.profit == max_profit
        for j in raw:
            jobs.append(Job(
                id=0, station=j.station, release=j.release,
                deadline_abs=j.deadline_abs, profit=j.profit, size=j.size,
                critical=critical, app=p.name,
            ))
        station_base += p.node_count
    jobs.sort(key=lambda j: (j.release, j.station, j.deadline_abs))
    jobs = [Job(id=i, station=j.station, release=j.release,
                deadline_abs=j.deadline_abs, profit=j.profit, size=j.size,
                critical=j.critical, app=j.app)
            for i, j in enumerate(jobs)]
    return JobSet(jobs=tuple(jobs), horizon=horizon, seed=seed)


def dump_jobs(jobset: JobSet) -> str:
    """Line format: ``id station release_us deadline_us profit size_bytes critical``."""
    lines = [f"# horizon_us={jobset.horizon} seed={jobset.seed}"]
    for j in jobset.jobs:
        lines.append(
            f"{j.id} {j.station} {j.release} {j.deadline_abs} {j.profit!r} {j.size} {int(j.critical)}"
        )
    return "\n".join(lines) + "\n"


def parse_jobs(text: str) -> JobSet:
    horizon, seed = 0, 0
    jobs = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            meta = dict(kv.split("=") for kv in line[1:].split())
            horizon = int(meta.get("horizon_us", 0))
            seed = int(meta.get("seed", 0))
            continue
        f = line.split()
        jobs.append(Job(id=int(f[0]), station=int(f[1]), release=int(f[2]),
                        deadline_abs=int(f[3]), profit=float(f[4]),
                        size=int(f[5]), critical=bool(int(f[6]))))
    if not horizon and jobs:
        horizon = max(j.deadline_abs for j in jobs)
    return JobSet(jobs=tuple(jobs), horizon=horizon, seed=seed)
