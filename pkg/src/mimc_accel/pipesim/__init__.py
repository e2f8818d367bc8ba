"""Cycle-accurate model of the pipelined and serial MiMC accelerator designs."""

from .config import CPU_LATENCY_US, DEVICE_CLOCKS_MHZ, VARIANTS, DesignConfig, UnknownVariantError, preset
from .datapath import multiplier_stage_model, run_multiplier_pipeline
from .report import CycleReport, format_table, speedup_vs_cpu, timing_report
from .simulator import (
    BatchOverflowError,
    CipherRequest,
    HazardError,
    StageTrace,
    simulate_cipher,
    simulate_hash,
    simulate_hash_blocks,
)
