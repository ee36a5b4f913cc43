import pytest

from ofdmasched.local_search import lsds
from ofdmasched.phy import PhyProfile, RuToneClass, full_26_tone_configuration, machines_for_configuration, tx_duration_us
from ofdmasched.scheduling import Batch, Interval
from ofdmasched.simulator import (
    ChannelScenario,
    best_effort_overlay,
    escalate_profit,
    generate_best_effort,
    run_scenario,
    validate_schedule,
)
from ofdmasched.workload import Job, JobSet, load_use_case

PHY = PhyProfile()


def small_jobset():
    jobs = (
        Job(id=0, station=0, release=0, deadline_abs=5_000, profit=10.0, size=100),
        Job(id=1, station=1, release=0, deadline_abs=5_000, profit=20.0, size=100),
        Job(id=2, station=2, release=500, deadline_abs=2_000, profit=5.0, size=50),
    )
    return JobSet(jobs=jobs, horizon=10_000, seed=0)


def test_scheduler_output_validates_clean():
    js = load_use_case("UC4", 100_000, seed=3)
    schedule = lsds(js, 40, PHY)
    assert validate_schedule(schedule, js, 40, PHY, 4_000) == []


def test_machine_reuse_detected():
    js = small_jobset()
    config = full_26_tone_configuration(20)
    machines = tuple(machines_for_configuration(config, PHY))
    batch = Batch(interval=Interval(0, 1_000),
                  assignments=((0, 0), (1, 0)),  # same machine twice
                  machines=machines, config=config)
    violations = validate_schedule([batch], js, 20, PHY, 4_000)
    assert sum("machine reuse" in v for v in violations) == 1


def test_admissibility_violation_names_the_job():
    js = small_jobset()
    config = full_26_tone_configuration(20)
    machines = tuple(machines_for_configuration(config, PHY))
    # job 2 releases at 500; a batch starting at 0 cannot carry it
    batch = Batch(interval=Interval(0, 1_000),
                  assignments=((2, 0),), machines=machines, config=config)
    violations = validate_schedule([batch], js, 20, PHY, 4_000)
    assert len(violations) == 1
    assert "admissibility" in violations[0] and "job 2" in violations[0]


def test_txop_conflict_and_job_reuse_detected():
    js = small_jobset()
    config = full_26_tone_configuration(20)
    machines = tuple(machines_for_configuration(config, PHY))
    long_batch = Batch(interval=Interval(0, 5_000), assignments=((0, 0),),
                       machines=machines, config=config)
    assert any("txop" in v for v in validate_schedule([long_batch], js, 20, PHY, 4_000))
    a = Batch(interval=Interval(0, 1_000), assignments=((0, 0),),
              machines=machines, config=config)
    b = Batch(interval=Interval(1_000, 2_000), assignments=((0, 1),),
              machines=machines, config=config)
    violations = validate_schedule([a, b], js, 20, PHY, 4_000)
    assert any("conflict" in v for v in violations)
    assert any("job reuse" in v for v in violations)


def test_channel_scenario_map_validation():
    assert ChannelScenario("ideal").phy().mcs == 11
    assert ChannelScenario("very_poor").phy().mcs == 0
    with pytest.raises(ValueError):
        ChannelScenario("foggy")
    with pytest.raises(ValueError):
        ChannelScenario("ideal", {"ideal": 11, "slightly_poor": 5,
                                  "moderately_poor": 7, "very_poor": 4})


def test_run_scenario_uc4_ideal_zero_drops():
    js = load_use_case("UC4", 200_000, seed=1)
    report, schedule = run_scenario(js, "lsds", ChannelScenario("ideal"), 40)
    assert len(report.dropped) == 0
    assert report.delivered == frozenset(j.id for j in js.jobs)
    assert len(report.delivered) + len(report.dropped) == len(js)
    assert report.runtime_ms > 0


def test_run_scenario_conservation_and_registry():
    js = load_use_case("UC4", 50_000, seed=5)
    for name in ("edf", "lrf", "nlrf", "lsdsf"):
        report, _ = run_scenario(js, name, ChannelScenario("ideal"), 40)
        assert len(report.delivered) + len(report.dropped) == len(js)
    with pytest.raises(ValueError):
        run_scenario(js, "nope", ChannelScenario("ideal"), 40)


def test_duration_weakly_increases_as_mcs_drops():
    for cls in RuToneClass:
        durations = [tx_duration_us(300, cls, PhyProfile(mcs=m)) for m in range(12)]
        assert all(a >= b for a, b in zip(durations, durations[1:]))


def test_escalation_sequence_and_fixed_point():
    p = 2.0
    seq = []
    for _ in range(3):
        p = escalate_profit(p, 160.0)
        seq.append(p)
    assert seq == [81.0, 120.5, 140.25]
    for _ in range(200):
        p = escalate_profit(p, 160.0)
        assert p <= 160.0
    assert p == pytest.approx(160.0)


def test_overlay_zero_load_convention():
    js = load_use_case("UC4", 50_000, seed=2)
    schedule = lsds(js, 40, PHY)
    out, satisfaction, utilization = best_effort_overlay(schedule, js, [], 40, PHY)
    assert satisfaction == 1.0
    assert utilization == 0.0
    assert out.batches == schedule.batches


def test_overlay_preserves_factory_assignments():
    js = load_use_case("UC4", 100_000, seed=1)
    schedule = lsds(js, 40, PHY)
    packets = generate_best_effort(20.0, js.horizon, seed=4)
    out, satisfaction, utilization = best_effort_overlay(schedule, js, packets, 40, PHY)

    factory_ids = {j.id for j in js.jobs}

    def factory_triples(sched):
        return {(b.interval.start, job, m)
                for b in sched.batches for job, m in b.assignments
                if job in factory_ids}

    assert factory_triples(out) == factory_triples(schedule)
    assert 0 <= satisfaction <= 1
    assert 0 <= utilization <= 1
    # best-effort ids live above the factory id range and never collide
    be_ids = {job for b in out.batches for job, _ in b.assignments} - factory_ids
    assert all(i > max(factory_ids) for i in be_ids)


def test_overlay_respects_arrivals_and_batch_feasibility():
    js = load_use_case("UC4", 50_000, seed=7)
    schedule = lsds(js, 40, PHY)
    packets = generate_best_effort(10.0, js.horizon, seed=9)
    out, _, _ = best_effort_overlay(schedule, js, packets, 40, PHY)
    by_be_id = {p.id + max(j.id for j in js.jobs) + 1: p for p in packets}
    for b in out.batches:
        for job, m in b.assignments:
            if job in by_be_id:
                p = by_be_id[job]
                assert p.arrival_us <= b.interval.start
                dur = tx_duration_us(p.size, b.machines[m].tone_class, PHY)
                assert b.interval.start + dur <= b.interval.end
