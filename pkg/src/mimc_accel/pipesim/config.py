"""Design presets for the seven accelerator variants."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

MUL_ALGORITHMS = ("barrett-chunked", "barrett-flat", "peasant")

# Reference clocks (MHz) for the AMZ-1 device comparison.
DEVICE_CLOCKS_MHZ = {
    "artix-7": 58.82,
    "stratix-v-gt": 128.27,
    "kintex-ultrascale+": 156.25,
}
CPU_LATENCY_US = 31.093


class UnknownVariantError(KeyError):
    pass


@dataclass(frozen=True)
class DesignConfig:
    """Timing parameters of one design.

    ``modmul_latency`` is P (pipelined, transfer cycle included) or M (serial).
    Every design obeys ``total = r * (exp_depth * modmul_latency + round_overhead)
    + global_overhead``; pipelined designs have ``round_overhead = 1`` (the
    key/constant addition cycle) and ``global_overhead = 0``.
    """

    variant: str
    mul_algorithm: str
    intmul_stages: int
    transfer_cycles: int
    modmul_latency: int
    exp_depth: int
    pipelined: bool
    batch: int
    round_overhead: int
    global_overhead: int
    clock_mhz: float
    chunk_width: int = 27
    calibrated: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.mul_algorithm not in MUL_ALGORITHMS:
            raise ValueError(f"unknown multiplier algorithm {self.mul_algorithm!r}")
        if self.exp_depth not in (3, 4):
            raise ValueError("exp_depth must be 4 (one unit) or 3 (two units)")
        if self.pipelined and self.batch != self.modmul_latency:
            raise ValueError("pipelined designs accept exactly P requests per frame")
        if not self.pipelined and self.batch != 1:
            raise ValueError("serial designs have batch size 1")
        if self.clock_mhz <= 0:
            raise ValueError("clock frequency must be positive")

    @property
    def modmul_units(self) -> int:
        return 1 if self.exp_depth == 4 else 2

    @property
    def accept_window(self) -> int:
        return self.batch

    @property
    def round_cycles(self) -> int:
        return self.exp_depth * self.modmul_latency + self.round_overhead

    def expected_cycles(self, rounds: int) -> int:
        return rounds * self.round_cycles + self.global_overhead

    def with_clock(self, mhz: float) -> "DesignConfig":
        return replace(self, clock_mhz=mhz)

    def with_chunk_width(self, width: int) -> "DesignConfig":
        return replace(self, chunk_width=width)

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["calibrated"] = list(self.calibrated)
        return rec


_PRESETS = {
    "AMZ-1": DesignConfig("AMZ-1", "barrett-chunked", 3, 1, 13, 4, True, 13, 1, 0, 128.27),
    "AMZ-1a": DesignConfig("AMZ-1a", "barrett-flat", 1, 1, 4, 4, True, 4, 1, 0, 43.47),
    "AMZ-1b": DesignConfig(
        "AMZ-1b", "barrett-flat", 3, 0, 9, 4, False, 1, 10, 3, 44.89,
        calibrated=("modmul_latency", "round_overhead", "global_overhead"),
    ),
    "AMZ-2": DesignConfig("AMZ-2", "barrett-chunked", 3, 1, 13, 3, True, 13, 1, 0, 125.75),
    "AMZ-2a": DesignConfig("AMZ-2a", "barrett-flat", 1, 1, 4, 3, True, 4, 1, 0, 39.97),
    "AMZ-2b": DesignConfig(
        "AMZ-2b", "barrett-flat", 3, 0, 9, 3, False, 1, 10, 3, 44.07,
        calibrated=("modmul_latency", "round_overhead", "global_overhead"),
    ),
    "AMZ-3": DesignConfig(
        "AMZ-3", "peasant", 1, 0, 254, 3, False, 1, 29, 47, 151.45,
        calibrated=("round_overhead", "global_overhead"),
    ),
}

VARIANTS = tuple(_PRESETS)


def preset(variant: str) -> DesignConfig:
    key = variant.strip()
    for name in _PRESETS:
        if name.lower() == key.lower():
            return _PRESETS[name]
    raise UnknownVariantError(f"unknown variant {variant!r}; choose from {', '.join(VARIANTS)}")
