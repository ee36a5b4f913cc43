"""Local-search schedulers over candidate transmission intervals.

The scheduler walks every interval length 1..txop and every start on a
coarse time grid, computes the best admissible job set for the interval,
and commits it iff its profit strictly exceeds twice the profit of the
already-committed batches it conflicts with (evicting those).

The per-interval subproblem is a maximum weight bipartite matching, but
the instances here have special structure: edge weights depend only on
the job, all machines of one RU class are interchangeable, and a job
admissible to some class is admissible to every faster class. Job sets
matchable under such nested (suffix) neighborhoods form a matroid whose
feasibility is a simple capacity condition, so a profit-ordered greedy
over per-class counts is exact. That makes one interval evaluation a few
binary searches per (job group, class) instead of a Hungarian solve; the
equivalence is covered by tests against the matching module.

Between commits the candidate pool is fixed, so whole start ranges are
screened with a vectorized upper bound; only intervals whose bound beats
the commit threshold are evaluated exactly. Commits keep already-computed
bounds valid (the pool only shrinks and conflict weights only grow), so
the sweep restarts only after an eviction returns jobs to the pool. The
result is identical to the plain sequential scan.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

from .phy import (
    Machine,
    PhyProfile,
    RuConfiguration,
    TONE_CLASSES,
    enumerate_configurations,
    machines_for_configuration,
    max_ru_counts,
    tx_duration_us,
)
from .scheduling import Batch, Interval, Schedule, make_schedule
from .workload import JobSet

__all__ = [
    "LocalSearchStats",
    "default_grid_us",
    "lsdsf",
    "lsdsf_run",
    "lsds",
    "lsds_run",
    "DEFAULT_TXOP_US",
]

DEFAULT_TXOP_US = 4_000
_CLIPPED = -1  # sentinel deadline offset for jobs whose deadline sits on the horizon


def default_grid_us(phy: PhyProfile, floor_us: int = 100) -> int:
    """Smallest whole-microsecond multiple of the OFDM symbol >= floor_us."""
    sym_ns = phy.symbol_duration_ns
    k = -(-floor_us * 1000 // sym_ns)
    while (k * sym_ns) % 1000:
        k += 1
    return k * sym_ns // 1000


@dataclass
class LocalSearchStats:
    candidate_intervals: int = 0
    commits: int = 0
    evictions: int = 0
    commit_log: list[tuple[float, float]] = field(default_factory=list)


class _Group:
    """Unscheduled jobs sharing profit, per-class durations and deadline shape."""

    __slots__ = ("profit", "durations", "off", "releases", "ids")

    def __init__(self, profit, durations, off):
        self.profit = profit
        self.durations = durations  # per class, ascending class order (non-increasing)
        self.off = off              # deadline - release, or _CLIPPED (deadline == horizon)
        self.releases = None        # np.int64, sorted
        self.ids = None             # aligned job ids

    def remove(self, positions):
        self.releases = np.delete(self.releases, positions)
        self.ids = np.delete(self.ids, positions)

    def add(self, releases, ids):
        pos = np.searchsorted(self.releases, releases)
        self.releases = np.insert(self.releases, pos, releases)
        self.ids = np.insert(self.ids, pos, ids)


class _CommittedBatch:
    __slots__ = ("t1", "t2", "weight", "assignments", "config", "machines", "pool_refs")

    def __init__(self, t1, t2, weight, assignments, config, machines, pool_refs):
        self.t1 = t1
        self.t2 = t2
        self.weight = weight
        self.assignments = assignments      # (job_id, machine_index) pairs
        self.config = config
        self.machines = machines
        self.pool_refs = pool_refs          # (group_idx, releases, ids) for eviction


class _Engine:
    def __init__(self, jobset, horizon, txop, grid_us, phy, *,
                 fixed_classes=None, fixed_caps=None, fixed_machines=None,
                 fixed_config=None, channel_width=None):
        if txop < grid_us:
            raise ValueError("txop shorter than one grid step")
        self.horizon = horizon
        self.grid = grid_us
        self.t_units = horizon // grid_us
        self.delta_units = min(txop // grid_us, self.t_units)
        self.phy = phy
        self.stats = LocalSearchStats()
        self.config_mode = channel_width is not None

        if self.config_mode:
            self.classes = list(TONE_CLASSES)
            table = max_ru_counts(channel_width)
            caps = np.array([table[c] for c in self.classes], dtype=np.int64)
            configs = enumerate_configurations(channel_width)
            self.configs = configs
            counts = np.array([c.counts for c in configs], dtype=np.int64)
            self.cfg_counts = counts
            self.cfg_suffix = counts[:, ::-1].cumsum(axis=1)[:, ::-1]
            self.batch_machines_cache = {}
        else:
            self.classes = fixed_classes
            caps = fixed_caps
            self.fixed_machines = fixed_machines
            self.fixed_config = fixed_config
            # machine indices per class, in batch machine-list order
            self.class_slots = [[] for _ in self.classes]
            for idx, m in enumerate(fixed_machines):
                self.class_slots[self.classes.index(m.tone_class)].append(idx)
        self.caps = caps
        self.suffix_caps = caps[::-1].cumsum()[::-1]
        self.sigma_total = int(self.suffix_caps[0])
        self.K = len(self.classes)

        self._build_groups(jobset)
        self.batches: list[_CommittedBatch] = []  # kept sorted by t1

    # ---- pool construction -------------------------------------------------

    def _build_groups(self, jobset):
        dur_cache = {}

        def durations(size):
            d = dur_cache.get(size)
            if d is None:
                d = tuple(tx_duration_us(size, c, self.phy) for c in self.classes)
                dur_cache[size] = d
            return d

        table = {}
        members = {}
        for job in jobset.jobs:
            off = _CLIPPED if job.deadline_abs >= self.horizon else job.deadline_abs - job.release
            key = (job.profit, durations(job.size), off)
            grp = table.get(key)
            if grp is None:
                grp = table[key] = _Group(job.profit, key[1], off)
                members[key] = []
            members[key].append((job.release, job.id))
        self.groups = []
        for key in sorted(table, key=lambda k: (-k[0], k[2] if k[2] != _CLIPPED else 1 << 62, k[1])):
            grp = table[key]
            rel_ids = sorted(members[key])
            grp.releases = np.array([r for r, _ in rel_ids], dtype=np.int64)
            grp.ids = np.array([i for _, i in rel_ids], dtype=np.int64)
            self.groups.append(grp)

    # ---- committed-batch bookkeeping ---------------------------------------

    def _conflict_range(self, t1, t2):
        """Indices of committed batches sharing a point with [t1, t2]."""
        ends = [b.t2 for b in self.batches]
        starts = [b.t1 for b in self.batches]
        lo = bisect.bisect_left(ends, t1)
        hi = bisect.bisect_right(starts, t2)
        return lo, hi

    def _conflict_weight_vector(self, t1v, t2v):
        if not self.batches:
            return np.zeros(len(t1v))
        starts = np.array([b.t1 for b in self.batches], dtype=np.int64)
        ends = np.array([b.t2 for b in self.batches], dtype=np.int64)
        cumw = np.concatenate(([0.0], np.cumsum([b.weight for b in self.batches])))
        hi = np.searchsorted(starts, t2v, side="right")
        lo = np.searchsorted(ends, t1v, side="left")
        return cumw[hi] - cumw[lo]

    # ---- per-interval evaluation -------------------------------------------

    def _items_for(self, t1, t2):
        """Admissible job counts per (group, minimum class), with positions.

        Returns (group_idx, c_min, lo, count) tuples in greedy (profit)
        order; members of a slice sit at positions [lo, lo+count) of the
        group's release-sorted pool and are interchangeable.
        """
        length = t2 - t1
        items = []
        for gi, g in enumerate(self.groups):
            if g.durations[-1] > length:
                continue
            R = g.releases
            hi = int(np.searchsorted(R, t1, side="right"))
            if hi == 0:
                continue
            if g.off == _CLIPPED:
                if t2 > self.horizon:
                    continue
                for c in range(self.K):
                    if g.durations[c] <= length:
                        items.append((gi, c, 0, hi))
                        break
                continue
            prev_lo = None
            for c in range(self.K):
                d = g.durations[c]
                if d > length:
                    continue
                lo = int(np.searchsorted(R, t1 + d - g.off, side="left"))
                lo = min(lo, hi)
                top = hi if prev_lo is None else min(prev_lo, hi)
                if lo < top:
                    items.append((gi, c, lo, top - lo))
                prev_lo = lo
                if lo == 0:
                    break
        return items

    def _greedy(self, items, suffix_caps):
        """Profit-ordered selection under nested class capacities (exact)."""
        avail = suffix_caps.astype(np.int64).copy()
        value = 0.0
        takes = []
        for gi, c, lo, count in items:
            room = int(avail[: c + 1].min())
            if room <= 0:
                continue
            take = min(count, room)
            avail[: c + 1] -= take
            value += self.groups[gi].profit * take
            takes.append((gi, c, lo, take))
        return value, takes

    def _config_search(self, items):
        """Best configuration for the pruned item set (vectorized stage 2)."""
        counts = np.array([t[3] for t in items], dtype=np.int64)
        profits = np.array([self.groups[t[0]].profit for t in items])
        cum_counts = np.concatenate(([0], np.cumsum(counts)))
        cum_profit = np.concatenate(([0.0], np.cumsum(profits * counts)))
        total = int(cum_counts[-1])

        sigma0 = self.cfg_suffix[:, 0]
        k = np.minimum(sigma0, total)
        idx = np.searchsorted(cum_counts, k, side="left")
        bound = cum_profit[idx] - (cum_counts[idx] - k) * np.where(idx > 0, profits[np.maximum(idx - 1, 0)], 0.0)

        first = int(np.argmax(bound))
        v0 = self._eval_configs(np.array([first]), items)[0]
        cand = np.nonzero(bound >= v0)[0]
        values = self._eval_configs(cand, items)
        best = float(values.max())
        winner = int(cand[int(np.argmax(values == best))])
        return winner, best

    def _eval_configs(self, cfg_indices, items):
        rem = self.cfg_suffix[cfg_indices].copy()
        values = np.zeros(len(cfg_indices))
        for gi, c, lo, count in items:
            room = rem[:, : c + 1].min(axis=1)
            take = np.minimum(count, room)
            values += self.groups[gi].profit * take
            rem[:, : c + 1] -= take[:, None]
        return values

    # ---- committing ---------------------------------------------------------

    def _realize(self, takes, caps):
        """Split takes across concrete classes: most-constrained first, each
        member on the slowest class it admits."""
        free = caps.astype(np.int64).copy()
        per_class = []  # (group_idx, class, lo, count)
        for gi, c, lo, take in sorted(takes, key=lambda t: -t[1]):
            pos = lo
            need = take
            for cls in range(c, self.K):
                if need == 0:
                    break
                n = int(min(free[cls], need))
                if n > 0:
                    per_class.append((gi, cls, pos, n))
                    free[cls] -= n
                    pos += n
                    need -= n
            if need:
                raise AssertionError("infeasible realization; capacity accounting bug")
        return per_class

    def _commit(self, t1, t2, weight, takes, caps, class_slots, config, machines):
        # extract the selected jobs first: take positions index the pool
        # as it was when the interval was evaluated, so the pool must not
        # change (eviction re-adds included) until the slices are read
        per_class = self._realize(takes, caps)
        slot_cursor = [0] * self.K
        assignments = []
        pool_refs = []
        removals = {}
        for gi, cls, lo, n in per_class:
            g = self.groups[gi]
            ids = g.ids[lo: lo + n]
            rels = g.releases[lo: lo + n]
            pool_refs.append((gi, rels.copy(), ids.copy()))
            removals.setdefault(gi, []).extend(range(lo, lo + n))
            for j in ids:
                slot = class_slots[cls][slot_cursor[cls]]
                slot_cursor[cls] += 1
                assignments.append((int(j), slot))
        for gi, positions in removals.items():
            self.groups[gi].remove(np.array(sorted(positions), dtype=np.int64))

        lo_b, hi_b = self._conflict_range(t1, t2)
        evicted = self.batches[lo_b:hi_b]
        evicted_weight = sum(b.weight for b in evicted)
        del self.batches[lo_b:hi_b]
        for b in evicted:
            for gi, releases, ids in b.pool_refs:
                self.groups[gi].add(releases, ids)

        batch = _CommittedBatch(t1, t2, weight, tuple(sorted(assignments)), config,
                                machines, pool_refs)
        bisect.insort(self.batches, batch, key=lambda b: b.t1)
        self.stats.commits += 1
        self.stats.evictions += len(evicted)
        self.stats.commit_log.append((weight, evicted_weight))
        return bool(evicted)

    # ---- sweeps --------------------------------------------------------------

    def _sweep(self, l_units, from_idx):
        """Candidate starts (grid indices) whose profit bound can pass the
        commit test, under the pool and batches at call time."""
        n = self.t_units - l_units + 1
        if from_idx >= n:
            return np.empty(0, dtype=np.int64)
        g = self.grid
        t1v = np.arange(from_idx, n, dtype=np.int64) * g
        t2v = t1v + l_units * g
        length = l_units * g
        slots_left = np.full(len(t1v), self.sigma_total, dtype=np.int64)
        bound = np.zeros(len(t1v))
        for grp in self.groups:
            dmin = grp.durations[-1]
            if dmin > length or len(grp.releases) == 0:
                continue
            hi = np.searchsorted(grp.releases, t1v, side="right")
            if grp.off == _CLIPPED:
                cnt = np.where(t2v <= self.horizon, hi, 0)
            else:
                lo = np.searchsorted(grp.releases, t1v + (dmin - grp.off), side="left")
                cnt = np.maximum(hi - lo, 0)
            take = np.minimum(cnt, slots_left)
            bound += grp.profit * take
            slots_left -= take
        mask = bound > 2.0 * self._conflict_weight_vector(t1v, t2v)
        return from_idx + np.nonzero(mask)[0]

    def run(self):
        g = self.grid
        for l_units in range(1, self.delta_units + 1):
            self.stats.candidate_intervals += self.t_units - l_units + 1
            pos = 0
            while True:
                restarted = False
                for idx in self._sweep(l_units, pos):
                    t1 = int(idx) * g
                    t2 = t1 + l_units * g
                    lo_b, hi_b = self._conflict_range(t1, t2)
                    conflict_w = sum(b.weight for b in self.batches[lo_b:hi_b])

                    items = self._items_for(t1, t2)
                    if not items:
                        continue
                    value1, takes1 = self._greedy(items, self.suffix_caps)
                    if value1 <= 2.0 * conflict_w:
                        continue
                    if self.config_mode:
                        winner, value = self._config_search(takes1)
                        if value <= 2.0 * conflict_w:
                            continue
                        config = self.configs[winner]
                        caps = self.cfg_counts[winner]
                        machines, class_slots = self._machines_for(winner)
                        _, takes = self._greedy(takes1, self.cfg_suffix[winner])
                        evicted = self._commit(t1, t2, value, takes, caps,
                                               class_slots, config, machines)
                    else:
                        evicted = self._commit(t1, t2, value1, takes1, self.caps,
                                               self.class_slots, self.fixed_config,
                                               self.fixed_machines)
                    if evicted:
                        pos = int(idx) + 1
                        restarted = True
                        break
                if not restarted:
                    break

    def _machines_for(self, cfg_index):
        cached = self.batch_machines_cache.get(cfg_index)
        if cached is None:
            config = self.configs[cfg_index]
            machines = tuple(machines_for_configuration(config, self.phy))
            class_slots = [[] for _ in self.classes]
            for idx, m in enumerate(machines):
                class_slots[self.classes.index(m.tone_class)].append(idx)
            cached = (machines, class_slots)
            self.batch_machines_cache[cfg_index] = cached
        return cached

    def schedule(self, jobset):
        profit_of = {j.id: j.profit for j in jobset.jobs}
        batches = [
            Batch(interval=Interval(b.t1, b.t2), assignments=b.assignments,
                  machines=tuple(b.machines), config=b.config)
            for b in self.batches
        ]
        return make_schedule(batches, profit_of)


def _check_machines(machines):
    if not machines:
        raise ValueError("empty machine set")
    phys = {m.phy for m in machines}
    if len(phys) != 1:
        raise ValueError("machines must share one PHY profile")
    return next(iter(phys))


def lsdsf_run(
    jobs: JobSet,
    machines: list[Machine],
    horizon: int | None = None,
    txop: int = DEFAULT_TXOP_US,
    grid_us: int | None = None,
    config: RuConfiguration | None = None,
) -> tuple[Schedule, LocalSearchStats]:
    """Local-search scheduler over a fixed machine (RU) configuration."""
    phy = _check_machines(machines)
    horizon = jobs.horizon if horizon is None else horizon
    grid_us = default_grid_us(phy) if grid_us is None else grid_us
    classes = sorted({m.tone_class for m in machines})
    caps = np.array([sum(1 for m in machines if m.tone_class == c) for c in classes],
                    dtype=np.int64)
    ordered = tuple(sorted(machines, key=lambda m: (-int(m.tone_class), m.id)))
    engine = _Engine(jobs, horizon, txop, grid_us, phy,
                     fixed_classes=classes, fixed_caps=caps,
                     fixed_machines=ordered, fixed_config=config)
    engine.run()
    return engine.schedule(jobs), engine.stats


def lsdsf(jobs, machines, horizon=None, txop=DEFAULT_TXOP_US, grid_us=None,
          config=None) -> Schedule:
    return lsdsf_run(jobs, machines, horizon, txop, grid_us, config)[0]


def lsds_run(
    jobs: JobSet,
    channel_width: int,
    phy: PhyProfile | None = None,
    horizon: int | None = None,
    txop: int = DEFAULT_TXOP_US,
    grid_us: int | None = None,
) -> tuple[Schedule, LocalSearchStats]:
    """Local-search scheduler that also picks each batch's RU configuration."""
    phy = phy or PhyProfile()
    horizon = jobs.horizon if horizon is None else horizon
    grid_us = default_grid_us(phy) if grid_us is None else grid_us
    engine = _Engine(jobs, horizon, txop, grid_us, phy, channel_width=channel_width)
    engine.run()
    return engine.schedule(jobs), engine.stats


def lsds(jobs, channel_width, phy=None, horizon=None, txop=DEFAULT_TXOP_US,
         grid_us=None) -> Schedule:
    return lsds_run(jobs, channel_width, phy, horizon, txop, grid_us)[0]
