"""Deadline-aware uplink OFDMA scheduling: schedulers, simulator, CLI."""

from .phy import (
    Machine,
    PhyProfile,
    RuConfiguration,
    RuToneClass,
    enumerate_configurations,
    max_ru_counts,
    phy_rate,
    tx_duration,
)
from .workload import ApplicationProfile, Job, JobSet, load_use_case
from .matching import (
    BipartiteInstance,
    Matching,
    budgeted_max_weight_matching,
    lsds_config_search,
    max_profit,
    max_weight_matching,
)
from .scheduling import Batch, Interval, Schedule
from .local_search import lsds, lsdsf
from .benchmarks import greedy_benchmark
from .slotted import SlottedApp, slotted_heuristic, slotted_optimal, slotted_schedule
from .exhaustive import brute_force_optimal
from .simulator import (
    ChannelScenario,
    SimulationReport,
    best_effort_overlay,
    run_scenario,
    validate_schedule,
)
from .experiment import ExperimentConfig, MetricsRow, compare, run

__version__ = "0.1.0"
