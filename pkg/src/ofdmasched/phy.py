"""OFDMA resource-unit model: tone classes, legal RU configurations, PHY timing.

Time is kept on an integer microsecond grid throughout. Transmission
durations are whole OFDM symbols; symbol arithmetic uses exact integer
math so that durations never suffer float rounding at admissibility
boundaries.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from enum import IntEnum

__all__ = [
    "RuToneClass",
    "PhyProfile",
    "Machine",
    "RuConfiguration",
    "CHANNEL_WIDTHS",
    "max_ru_counts",
    "enumerate_configurations",
    "configuration_index",
    "configuration_by_index",
    "phy_rate",
    "tx_duration",
    "tx_duration_us",
    "machines_for_configuration",
    "full_26_tone_configuration",
    "root_tones",
]


class RuToneClass(IntEnum):
    """The six RU widths of the standard, by subcarrier (tone) count."""

    RU26 = 26
    RU52 = 52
    RU106 = 106
    RU242 = 242
    RU484 = 484
    RU996 = 996


TONE_CLASSES = tuple(RuToneClass)  # ascending by tones

CHANNEL_WIDTHS = (20, 40, 80, 160)

# Data (non-pilot) subcarriers per RU class.
DATA_SUBCARRIERS = {
    RuToneClass.RU26: 24,
    RuToneClass.RU52: 48,
    RuToneClass.RU106: 102,
    RuToneClass.RU242: 234,
    RuToneClass.RU484: 468,
    RuToneClass.RU996: 980,
}

# Bits per data subcarrier per symbol (modulation bits x coding rate),
# kept as exact (numerator, denominator) pairs. Index = MCS.
_MCS_BITS_PER_SUBCARRIER = (
    (1, 2),   # 0: BPSK 1/2
    (1, 1),   # 1: QPSK 1/2
    (3, 2),   # 2: QPSK 3/4
    (2, 1),   # 3: 16-QAM 1/2
    (3, 1),   # 4: 16-QAM 3/4
    (4, 1),   # 5: 64-QAM 2/3
    (9, 2),   # 6: 64-QAM 3/4
    (5, 1),   # 7: 64-QAM 5/6
    (6, 1),   # 8: 256-QAM 3/4
    (20, 3),  # 9: 256-QAM 5/6
    (15, 2),  # 10: 1024-QAM 3/4
    (25, 3),  # 11: 1024-QAM 5/6
)

_PAYLOAD_SYMBOL_NS = 12800
_GUARD_INTERVALS_NS = (800, 1600, 3200)

# Root RU(s) that a channel of each width splits down from.
_CHANNEL_ROOTS = {
    20: (RuToneClass.RU242,),
    40: (RuToneClass.RU484,),
    80: (RuToneClass.RU996,),
    160: (RuToneClass.RU996, RuToneClass.RU996),
}

# Maximum RU count per class, per channel width. "n" in the standard's
# "+n 26-tone RUs" annotations is already folded into the 26-tone row.
_MAX_RU_TABLE = {
    20: {RuToneClass.RU26: 9, RuToneClass.RU52: 4, RuToneClass.RU106: 2,
         RuToneClass.RU242: 1, RuToneClass.RU484: 0, RuToneClass.RU996: 0},
    40: {RuToneClass.RU26: 18, RuToneClass.RU52: 8, RuToneClass.RU106: 4,
         RuToneClass.RU242: 2, RuToneClass.RU484: 1, RuToneClass.RU996: 0},
    80: {RuToneClass.RU26: 37, RuToneClass.RU52: 16, RuToneClass.RU106: 8,
         RuToneClass.RU242: 4, RuToneClass.RU484: 2, RuToneClass.RU996: 1},
    160: {RuToneClass.RU26: 74, RuToneClass.RU52: 32, RuToneClass.RU106: 16,
          RuToneClass.RU242: 8, RuToneClass.RU484: 4, RuToneClass.RU996: 2},
}

# Split grammar. 242- and 996-tone RUs split three ways (the extra
# 26-tone RU); the others split in two.
_SPLITS = {
    RuToneClass.RU996: (RuToneClass.RU484, RuToneClass.RU484, RuToneClass.RU26),
    RuToneClass.RU484: (RuToneClass.RU242, RuToneClass.RU242),
    RuToneClass.RU242: (RuToneClass.RU106, RuToneClass.RU106, RuToneClass.RU26),
    RuToneClass.RU106: (RuToneClass.RU52, RuToneClass.RU52),
    RuToneClass.RU52: (RuToneClass.RU26, RuToneClass.RU26),
}


def _check_width(channel_width: int) -> None:
    if channel_width not in CHANNEL_WIDTHS:
        raise ValueError(f"unsupported channel width: {channel_width} MHz")


def root_tones(channel_width: int) -> int:
    """Total tones of the channel's root RU(s); the bandwidth budget B."""
    _check_width(channel_width)
    return sum(int(c) for c in _CHANNEL_ROOTS[channel_width])


@dataclass(frozen=True)
class PhyProfile:
    """Modulation/guard-interval settings shared by all stations.

    ``overhead_us`` is a fixed per-transmission overhead added to every
    duration (trigger frame, SIFS); it defaults to 0.
    """

    mcs: int = 11
    guard_interval_ns: int = 3200
    overhead_us: int = 0

    def __post_init__(self):
        if not 0 <= self.mcs <= 11:
            raise ValueError(f"mcs out of range: {self.mcs}")
        if self.guard_interval_ns not in _GUARD_INTERVALS_NS:
            raise ValueError(f"invalid guard interval: {self.guard_interval_ns} ns")
        if self.overhead_us < 0:
            raise ValueError("overhead_us must be >= 0")

    @property
    def symbol_duration_ns(self) -> int:
        return _PAYLOAD_SYMBOL_NS + self.guard_interval_ns

    @property
    def symbol_duration_us(self) -> float:
        return self.symbol_duration_ns / 1000.0


@dataclass(frozen=True)
class Machine:
    """One RU instance available within a batch."""

    id: int
    tone_class: RuToneClass
    rate: float  # bits per microsecond
    phy: PhyProfile = field(default_factory=PhyProfile)

    @property
    def bandwidth(self) -> int:
        """Occupied bandwidth in tones (the knapsack unit)."""
        return int(self.tone_class)

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("machine rate must be positive")


def phy_rate(tone_class: RuToneClass, phy: PhyProfile) -> float:
    """Effective PHY rate of an RU class, in bits per microsecond."""
    num, den = _MCS_BITS_PER_SUBCARRIER[phy.mcs]
    bits_per_symbol = DATA_SUBCARRIERS[tone_class] * num / den
    return bits_per_symbol / phy.symbol_duration_us


def tx_symbols(payload_bytes: int, tone_class: RuToneClass, phy: PhyProfile) -> int:
    """Whole OFDM symbols needed for a payload on an RU class (exact)."""
    if payload_bytes <= 0:
        raise ValueError("payload must be positive")
    bits = payload_bytes * 8
    num, den = _MCS_BITS_PER_SUBCARRIER[phy.mcs]
    # ceil(bits / (subcarriers * num / den)) in integers
    denom = DATA_SUBCARRIERS[tone_class] * num
    return -(-bits * den // denom)


def tx_duration_us(payload_bytes: int, tone_class: RuToneClass, phy: PhyProfile) -> int:
    """Transmission duration on an RU class, whole symbols, ceil'd to 1 us."""
    symbols = tx_symbols(payload_bytes, tone_class, phy)
    ns = symbols * phy.symbol_duration_ns
    return -(-ns // 1000) + phy.overhead_us


def tx_duration(payload_bytes: int, machine: Machine) -> int:
    """Processing time p_ij of a payload on a machine, in microseconds."""
    return tx_duration_us(payload_bytes, machine.tone_class, machine.phy)


@dataclass(frozen=True)
class RuConfiguration:
    """A legal multiset of RU classes for a channel width.

    ``counts`` is a 6-tuple aligned with ascending tone classes
    (26, 52, 106, 242, 484, 996).
    """

    counts: tuple[int, int, int, int, int, int]
    channel_width: int

    def __post_init__(self):
        _check_width(self.channel_width)
        if len(self.counts) != len(TONE_CLASSES) or any(c < 0 for c in self.counts):
            raise ValueError(f"malformed counts: {self.counts}")
        table = _MAX_RU_TABLE[self.channel_width]
        for cls, n in zip(TONE_CLASSES, self.counts):
            if n > table[cls]:
                raise ValueError(
                    f"{n} x {int(cls)}-tone exceeds the {self.channel_width} MHz maximum"
                )

    def count(self, tone_class: RuToneClass) -> int:
        return self.counts[TONE_CLASSES.index(tone_class)]

    @property
    def total_rus(self) -> int:
        return sum(self.counts)

    @property
    def total_tones(self) -> int:
        return sum(n * int(c) for n, c in zip(self.counts, TONE_CLASSES))

    def sort_key(self) -> tuple:
        """Deterministic order: fewer RUs first, then counts lexicographically."""
        return (self.total_rus, self.counts)

    def ru_classes_desc(self) -> list[RuToneClass]:
        """RU instances of this configuration, widest first."""
        out = []
        for cls, n in zip(reversed(TONE_CLASSES), reversed(self.counts)):
            out.extend([cls] * n)
        return out

    def __str__(self):
        parts = [f"{n}x{int(c)}" for c, n in zip(TONE_CLASSES, self.counts) if n]
        return "{" + ",".join(parts) + "}" if parts else "{}"


def max_ru_counts(channel_width: int) -> dict[RuToneClass, int]:
    """Maximum RU count per class for a channel width."""
    _check_width(channel_width)
    return dict(_MAX_RU_TABLE[channel_width])


@functools.lru_cache(maxsize=None)
def _class_config_vectors(cls: RuToneClass) -> frozenset[tuple[int, ...]]:
    """Count vectors reachable from a single RU of class ``cls``."""
    idx = TONE_CLASSES.index(cls)
    base = [0] * len(TONE_CLASSES)
    base[idx] = 1
    vectors = {tuple(base)}
    if cls in _SPLITS:
        # splits are (a, b) or (a, b, fixed 26); the first two recurse
        parts = _SPLITS[cls]
        a_set = _class_config_vectors(parts[0])
        b_set = _class_config_vectors(parts[1])
        extra = [0] * len(TONE_CLASSES)
        for p in parts[2:]:
            extra[TONE_CLASSES.index(p)] += 1
        for a in a_set:
            for b in b_set:
                vectors.add(tuple(x + y + z for x, y, z in zip(a, b, extra)))
    return frozenset(vectors)


@functools.lru_cache(maxsize=None)
def enumerate_configurations(channel_width: int) -> tuple[RuConfiguration, ...]:
    """All distinct RU configurations for a channel width.

    Configurations are every multiset reachable from the channel's root
    RU(s) by recursive splitting, deduplicated by multiset equality, and
    returned in the deterministic (total RUs, counts) order used for
    configuration ids.
    """
    _check_width(channel_width)
    roots = _CHANNEL_ROOTS[channel_width]
    vectors = _class_config_vectors(roots[0])
    if len(roots) == 2:
        b_vectors = _class_config_vectors(roots[1])
        vectors = frozenset(
            tuple(x + y for x, y in zip(a, b)) for a in vectors for b in b_vectors
        )
    configs = [RuConfiguration(v, channel_width) for v in vectors]
    configs.sort(key=RuConfiguration.sort_key)
    return tuple(configs)


@functools.lru_cache(maxsize=None)
def _config_index_map(channel_width: int) -> dict[tuple[int, ...], int]:
    return {
        cfg.counts: i for i, cfg in enumerate(enumerate_configurations(channel_width))
    }


def configuration_index(config: RuConfiguration) -> int:
    """Stable id of a configuration within its channel width."""
    try:
        return _config_index_map(config.channel_width)[config.counts]
    except KeyError:
        raise ValueError(f"{config} is not a legal {config.channel_width} MHz configuration")


def configuration_by_index(channel_width: int, index: int) -> RuConfiguration:
    return enumerate_configurations(channel_width)[index]


def full_26_tone_configuration(channel_width: int) -> RuConfiguration:
    """The all-26-tone split (the widest-parallelism configuration)."""
    _check_width(channel_width)
    counts = [0] * len(TONE_CLASSES)
    counts[0] = _MAX_RU_TABLE[channel_width][RuToneClass.RU26]
    return RuConfiguration(tuple(counts), channel_width)


def machines_for_configuration(config: RuConfiguration, phy: PhyProfile) -> list[Machine]:
    """Machine instances for a configuration, widest RU first, ids 0..M-1."""
    return [
        Machine(id=i, tone_class=cls, rate=phy_rate(cls, phy), phy=phy)
        for i, cls in enumerate(config.ru_classes_desc())
    ]
