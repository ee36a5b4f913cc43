"""Round-based benchmark schedulers: EDF, LRF and non-starving LRF.

Each round sorts the stations by a scheduling metric, assigns the first
M stations positionally to the M RUs of a configuration (widest RU to
the front of the order), and keeps the configuration with the maximum
round profit over the whole configuration space. A station's head-of-line
packet transmits only if it fits its assigned RU within the TXOP and its
own deadline; the round then advances to the batch end.

Metrics: EDF uses the packet's absolute deadline (ascending). LRF uses
profit over the packet's effective relative deadline (descending), which
is the application's profit-to-deadline ratio except where the horizon
clipped the deadline. NLRF divides that ratio by
(transmitted+1)/(generated+1), tracked per application, so starved
applications drift upward. Ties break by station id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phy import (
    PhyProfile,
    TONE_CLASSES,
    enumerate_configurations,
    machines_for_configuration,
    tx_duration_us,
)
from .scheduling import Batch, Interval, Schedule, make_schedule
from .workload import JobSet

__all__ = ["BENCHMARK_KINDS", "greedy_benchmark"]

BENCHMARK_KINDS = ("edf", "lrf", "nlrf")


@dataclass
class _Station:
    station: int
    app: str
    queue: list  # jobs, release-sorted
    head: int = 0

    def pending(self, now):
        q = self.queue
        while self.head < len(q) and q[self.head].deadline_abs <= now:
            self.head += 1  # expired
        if self.head < len(q) and q[self.head].release <= now:
            return q[self.head]
        return None

    def next_event(self, now):
        """Earliest future time at which this station's state can change."""
        q = self.queue
        for i in range(self.head, len(q)):
            if q[i].deadline_abs > now:
                if q[i].release > now:
                    return q[i].release
                return q[i].deadline_abs
        return None

    def pop(self):
        job = self.queue[self.head]
        self.head += 1
        return job


class _ConfigTable:
    """Padded per-configuration RU class indices, widest first."""

    def __init__(self, channel_width):
        self.configs = enumerate_configurations(channel_width)
        width = max(c.total_rus for c in self.configs)
        mat = np.full((len(self.configs), width), -1, dtype=np.int8)
        for i, cfg in enumerate(self.configs):
            classes = [TONE_CLASSES.index(cls) for cls in cfg.ru_classes_desc()]
            mat[i, : len(classes)] = classes
        self.class_mat = mat


def greedy_benchmark(
    kind: str,
    jobs: JobSet,
    channel_width: int,
    phy: PhyProfile | None = None,
    horizon: int | None = None,
    txop: int = 4_000,
) -> Schedule:
    """Round-based station-sorting scheduler (EDF, LRF or NLRF)."""
    if kind not in BENCHMARK_KINDS:
        raise ValueError(f"unknown benchmark kind: {kind}")
    phy = phy or PhyProfile()
    horizon = jobs.horizon if horizon is None else horizon

    table = _ConfigTable(channel_width)
    machine_cache = {}

    stations: dict[int, _Station] = {}
    for job in jobs.jobs:
        st = stations.get(job.station)
        if st is None:
            st = stations[job.station] = _Station(job.station, job.app, [])
        st.queue.append(job)
    for st in stations.values():
        st.queue.sort(key=lambda j: (j.release, j.id))
    station_list = sorted(stations.values(), key=lambda s: s.station)

    apps = sorted({s.app for s in station_list})
    app_releases = {a: np.array(sorted(j.release for j in jobs.jobs if j.app == a))
                    for a in apps}
    transmitted = {a: 0 for a in apps}

    dur_cache: dict[int, tuple[int, ...]] = {}

    def durations(size):
        d = dur_cache.get(size)
        if d is None:
            d = tuple(tx_duration_us(size, c, phy) for c in TONE_CLASSES)
            dur_cache[size] = d
        return d

    def metric(job, now):
        if kind == "edf":
            return job.deadline_abs
        ratio = job.profit / (job.deadline_abs - job.release)
        if kind == "lrf":
            return -ratio
        generated = int(np.searchsorted(app_releases[job.app], now, side="right"))
        starvation = (transmitted[job.app] + 1) / (generated + 1)
        return -ratio / starvation

    batches = []
    now = 0
    while now < horizon:
        heads = []
        for st in station_list:
            job = st.pending(now)
            if job is not None:
                heads.append((metric(job, now), st.station, st, job))
        if not heads:
            events = [st.next_event(now) for st in station_list]
            events = [e for e in events if e is not None]
            if not events:
                break
            now = min(events)
            continue
        heads.sort(key=lambda h: (h[0], h[1]))

        n = len(heads)
        dur = np.array([durations(h[3].size) for h in heads], dtype=np.int64)
        limit = np.array([min(txop, h[3].deadline_abs - now) for h in heads],
                         dtype=np.int64)
        profit = np.array([h[3].profit for h in heads])

        width = min(table.class_mat.shape[1], n)
        cls = table.class_mat[:, :width]
        valid = cls >= 0
        d = dur[np.arange(width)[None, :], np.where(valid, cls, 0)]
        ok = valid & (d <= limit[None, :width])
        round_profit = (ok * profit[None, :width]).sum(axis=1)

        best = float(round_profit.max())
        if best <= 0:
            events = [st.next_event(now) for st in station_list]
            events = [e for e in events if e is not None and e > now]
            if not events:
                break
            now = min(events)
            continue
        cfg_idx = int(np.argmax(round_profit == best))  # canonical tie-break

        config = table.configs[cfg_idx]
        machines = machine_cache.get(cfg_idx)
        if machines is None:
            machines = tuple(machines_for_configuration(config, phy))
            machine_cache[cfg_idx] = machines
        assignments = []
        end = now
        for pos in np.nonzero(ok[cfg_idx])[0]:
            st, job = heads[pos][2], heads[pos][3]
            st.pop()
            transmitted[st.app] += 1
            assignments.append((job.id, int(pos)))
            end = max(end, now + int(d[cfg_idx, pos]))
        batches.append(Batch(
            interval=Interval(now, end),
            assignments=tuple(sorted(assignments)),
            machines=machines,
            config=config,
        ))
        now = end + 1  # closed intervals: the next batch may not share the endpoint

    return make_schedule(batches, {j.id: j.profit for j in jobs.jobs})
