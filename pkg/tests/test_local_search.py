import random

from ofdmasched.exhaustive import brute_force_optimal
from ofdmasched.local_search import lsds, lsds_run, lsdsf, lsdsf_run
from ofdmasched.phy import (
    Machine,
    PhyProfile,
    RuToneClass,
    enumerate_configurations,
    machines_for_configuration,
    phy_rate,
)
from ofdmasched.workload import Job, JobSet

from reference_impl import reference_lsds, reference_lsdsf

PHY0 = PhyProfile()  # MCS 11: a 26-tone symbol carries 25 B, so sizes map cleanly to 16 us steps


def machine(tone_class, machine_id, phy=PHY0):
    return Machine(machine_id, tone_class, phy_rate(tone_class, phy), phy)


def micro_instance(rng, max_jobs=6, horizon=192):
    """Random tiny instance on a 16 us grid with power-of-two profits.

    Distinct power-of-two profits make every subset sum unique, so exact
    solvers agree on the chosen job set, not only on its weight; that
    lets the fast engine be compared against the reference trajectory.
    """
    n = rng.randint(1, max_jobs)
    profits = rng.sample([2 ** k for k in range(1, 13)], n)
    jobs = []
    for i in range(n):
        release = 16 * rng.randint(0, 8)
        deadline = min(release + 16 * rng.randint(1, 9), horizon + 16 * 4)
        jobs.append(Job(id=i, station=i, release=release, deadline_abs=deadline,
                        profit=float(profits[i]), size=rng.randint(1, 140)))
    return JobSet(jobs=tuple(jobs), horizon=horizon, seed=0)


def small_machine_set(rng):
    classes = [RuToneClass.RU26, RuToneClass.RU52, RuToneClass.RU106]
    k = rng.randint(1, 3)
    return [machine(rng.choice(classes), i) for i in range(k)]


def test_single_job_single_batch():
    jobs = JobSet(jobs=(Job(id=0, station=0, release=0, deadline_abs=200,
                            profit=9.0, size=18),), horizon=192, seed=0)
    machines = [machine(RuToneClass.RU26, 0)]
    schedule, stats = lsdsf_run(jobs, machines, txop=64, grid_us=16)
    assert schedule.total_profit == 9.0
    assert len(schedule.batches) == 1
    assert stats.evictions == 0


def test_swap_requires_strictly_more_than_double():
    # job 0 fits a one-symbol interval and commits first; job 1 needs the
    # whole [0, 32] window on the only machine, so committing it means
    # evicting job 0, which happens only when its profit strictly exceeds 2x
    def run(second_profit):
        jobs = JobSet(jobs=(
            Job(id=0, station=0, release=0, deadline_abs=16, profit=10.0, size=20),
            Job(id=1, station=1, release=0, deadline_abs=32, profit=second_profit, size=40),
        ), horizon=32, seed=0)
        return lsdsf(jobs, [machine(RuToneClass.RU26, 0)], txop=32, grid_us=16)

    s = run(20.0)
    assert s.scheduled_jobs == {0}  # 20 > 2*10 is false
    s = run(20.5)
    assert s.scheduled_jobs == {1}


def test_engine_matches_reference_lsdsf_trajectory():
    rng = random.Random(101)
    for _ in range(40):
        jobset = micro_instance(rng)
        machines = small_machine_set(rng)
        txop = 16 * rng.randint(1, 4)
        schedule, _ = lsdsf_run(jobset, machines, txop=txop, grid_us=16)
        for batch in schedule.batches:
            for job_id, m_idx in batch.assignments:
                job = next(j for j in jobset.jobs if j.id == job_id)
                from ofdmasched.phy import tx_duration
                p = tx_duration(job.size, batch.machines[m_idx])
                assert job.release <= batch.interval.start
                assert batch.interval.start + p <= min(batch.interval.end, job.deadline_abs)
        committed, scheduled = reference_lsdsf(jobset, machines, txop=txop, grid_us=16)
        got_intervals = sorted((b.interval.start, b.interval.end) for b in schedule.batches)
        want_intervals = sorted((c[0].start, c[0].end) for c in committed)
        assert got_intervals == want_intervals
        assert schedule.scheduled_jobs == scheduled
        assert schedule.total_profit == sum(
            j.profit for j in jobset.jobs if j.id in scheduled)


def test_engine_matches_reference_lsds_trajectory():
    rng = random.Random(55)
    for _ in range(12):
        jobset = micro_instance(rng, max_jobs=5)
        txop = 16 * rng.randint(1, 3)
        schedule, _ = lsds_run(jobset, 20, PHY0, txop=txop, grid_us=16)
        committed, scheduled = reference_lsds(jobset, 20, PHY0, txop=txop, grid_us=16)
        got = sorted((b.interval.start, b.interval.end) for b in schedule.batches)
        want = sorted((c[0].start, c[0].end) for c in committed)
        assert got == want
        assert schedule.scheduled_jobs == scheduled
        # per-batch winning configurations agree too
        got_cfg = {(b.interval.start, b.interval.end): b.config.counts
                   for b in schedule.batches}
        want_cfg = {(c[0].start, c[0].end): c[3].counts for c in committed}
        assert got_cfg == want_cfg


def generic_micro_instance(rng, max_jobs=6, horizon=192):
    n = rng.randint(1, max_jobs)
    jobs = []
    for i in range(n):
        release = 16 * rng.randint(0, 8)
        deadline = min(release + 16 * rng.randint(1, 9), horizon + 64)
        jobs.append(Job(id=i, station=i, release=release, deadline_abs=deadline,
                        profit=float(rng.randint(1, 100)), size=rng.randint(1, 140)))
    return JobSet(jobs=tuple(jobs), horizon=horizon, seed=0)


def test_twelve_approximation_on_micro_suite():
    # the 12x worst-case bound must hold without exception; this suite
    # never dips below a third of optimal (worst observed ratio 0.4156)
    rng = random.Random(2024)
    for _ in range(60):
        jobset = generic_micro_instance(rng)
        machines = small_machine_set(rng)
        txop = 16 * rng.randint(1, 4)
        schedule, _ = lsdsf_run(jobset, machines, txop=txop, grid_us=16)
        opt = brute_force_optimal(jobset, machines=machines, txop=txop, grid_us=16)
        assert 12 * schedule.total_profit >= opt - 1e-9
        assert 3 * schedule.total_profit >= opt - 1e-9


def test_commit_log_invariants():
    rng = random.Random(31)
    saw_eviction = False
    for _ in range(30):
        jobset = micro_instance(rng, max_jobs=6)
        machines = small_machine_set(rng)
        _, stats = lsdsf_run(jobset, machines, txop=48, grid_us=16)
        total = 0.0
        for weight, evicted in stats.commit_log:
            assert weight > 2 * evicted
            new_total = total - evicted + weight
            assert new_total > total
            total = new_total
        saw_eviction = saw_eviction or stats.evictions > 0
    assert saw_eviction, "suite never exercised an eviction"


def test_deterministic_across_runs():
    rng = random.Random(8)
    jobset = micro_instance(rng, max_jobs=6)
    machines = small_machine_set(rng)
    a = lsdsf(jobset, machines, txop=64, grid_us=16)
    b = lsdsf(jobset, machines, txop=64, grid_us=16)
    assert a == b


def test_candidate_interval_count_matches_formula():
    rng = random.Random(12)
    jobset = micro_instance(rng)
    machines = small_machine_set(rng)
    grid = 16
    txop = 64
    _, stats = lsdsf_run(jobset, machines, txop=txop, grid_us=grid)
    t_units = jobset.horizon // grid
    delta = min(txop // grid, t_units)
    expected = sum(t_units - l + 1 for l in range(1, delta + 1))
    assert stats.candidate_intervals == expected


def test_lsds_beats_fixed_configs_on_micro_suite():
    # configuration search wins almost everywhere at micro scale; the rare
    # losses come from local-search path dependence (a richer interval can
    # block a luckier trajectory), so this is a rate assertion here and a
    # strict one on the workload-scale regression matrix
    rng = random.Random(77)
    phy = PHY0
    comparisons = violations = 0
    for _ in range(20):
        jobset = generic_micro_instance(rng, max_jobs=5)
        txop = 16 * rng.randint(2, 3)
        lsds_schedule = lsds(jobset, 20, phy, txop=txop, grid_us=16)
        for config in enumerate_configurations(20):
            machines = machines_for_configuration(config, phy)
            fixed = lsdsf(jobset, machines, txop=txop, grid_us=16, config=config)
            comparisons += 1
            if lsds_schedule.total_profit < fixed.total_profit - 1e-9:
                violations += 1
    assert violations <= 0.02 * comparisons


def test_empty_jobset_gives_empty_schedule():
    jobs = JobSet(jobs=(), horizon=192, seed=0)
    schedule = lsdsf(jobs, [machine(RuToneClass.RU26, 0)], txop=64, grid_us=16)
    assert schedule.batches == ()
    assert schedule.total_profit == 0


def test_degenerate_search_space_reduces_to_fixed_config():
    # payloads so large that, within the txop, only the undivided root RU
    # can carry them: every batch's configuration search collapses to the
    # single feasible choice and lsds coincides with lsdsf on it
    phy = PHY0
    # 3600 B needs 15 symbols on the 242-tone root but 34 on a 106-tone
    # RU, which overruns the 512 us txop; no split is ever feasible
    jobs = tuple(
        Job(id=i, station=i, release=i * 500, deadline_abs=i * 500 + 4_000,
            profit=float(10 + i), size=3_600)
        for i in range(4)
    )
    jobset = JobSet(jobs=jobs, horizon=4_000, seed=0)
    searched = lsds(jobset, 20, phy, txop=512, grid_us=16)
    root = enumerate_configurations(20)[0]  # {1x242}
    machines = machines_for_configuration(root, phy)
    fixed = lsdsf(jobset, machines, txop=512, grid_us=16, config=root)
    assert searched.total_profit == fixed.total_profit
    assert searched.scheduled_jobs == fixed.scheduled_jobs
    assert all(b.config.counts == root.counts for b in searched.batches)
