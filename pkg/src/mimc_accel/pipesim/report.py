from __future__ import annotations

from dataclasses import dataclass

from .config import DesignConfig


@dataclass(frozen=True)
class CycleReport:
    variant: str
    total_cycles: int
    batch_size: int
    clock_mhz: float

    @property
    def amortized_latency_us(self) -> float:
        return self.total_cycles / (self.batch_size * self.clock_mhz)

    @property
    def throughput_ops_per_s(self) -> float:
        return self.clock_mhz * 1e6 * self.batch_size / self.total_cycles

    def to_record(self) -> dict:
        return {
            "variant": self.variant,
            "batch": self.batch_size,
            "cycles": self.total_cycles,
            "mhz": self.clock_mhz,
            "latency_us": round(self.amortized_latency_us, 6),
            "throughput_ops": round(self.throughput_ops_per_s, 3),
        }


def timing_report(config: DesignConfig, total_cycles: int, batch: int, clock_mhz: float | None = None) -> CycleReport:
    mhz = config.clock_mhz if clock_mhz is None else clock_mhz
    if mhz <= 0:
        raise ValueError(f"clock frequency must be positive, got {mhz}")
    if batch <= 0 or total_cycles <= 0:
        raise ValueError("batch and total_cycles must be positive")
    return CycleReport(config.variant, total_cycles, batch, float(mhz))


def speedup_vs_cpu(report, cpu_latency_us: float) -> float:
    """CPU latency over accelerator latency; ``report`` may be a CycleReport or microseconds."""
    lat = report.amortized_latency_us if isinstance(report, CycleReport) else float(report)
    if lat <= 0 or cpu_latency_us <= 0:
        raise ValueError("latencies must be positive")
    return cpu_latency_us / lat


def format_table(reports) -> str:
    header = f"{'design':<8} {'batch':>5} {'cycles':>7} {'MHz':>8} {'latency_us':>11} {'throughput':>12}"
    lines = [header, "-" * len(header)]
    for r in reports:
        lines.append(
            f"{r.variant:<8} {r.batch_size:>5} {r.total_cycles:>7} {r.clock_mhz:>8.2f} "
            f"{r.amortized_latency_us:>11.3f} {r.throughput_ops_per_s:>12.0f}"
        )
    return "\n".join(lines)
