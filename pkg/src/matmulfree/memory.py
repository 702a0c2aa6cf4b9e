"""SRAM/DRAM access counts per MatMul and projection weight footprints.

Operand placement follows the TPU memory partition: the stored matrix (a
projection weight, or the cached Key/Value matrix of an attention head) lives
in weight SRAM, the streamed vector (activation, query or score) in input
SRAM, and results in output SRAM. Counts are in elements unless noted.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import ceil

from .hardware import HardwareConfig
from .models import ModelConfig


@dataclass(frozen=True)
class TrafficResult:
    sram_reads_a: int
    sram_reads_b: int
    sram_writes_out: int
    dram_reads: int
    dram_writes: int
    fits_a: bool
    fits_b: bool
    fits_out: bool
    element_bytes: int = 2

    @property
    def fits_in_sram(self) -> dict:
        return {"a": self.fits_a, "b": self.fits_b, "out": self.fits_out}

    @property
    def sram_accesses(self) -> int:
        return self.sram_reads_a + self.sram_reads_b + self.sram_writes_out

    @property
    def dram_bytes(self) -> int:
        return (self.dram_reads + self.dram_writes) * self.element_bytes


def traffic(op, hw: HardwareConfig) -> TrafficResult:
    """Access counts for ``op`` under the output-stationary fold structure.

    The stored matrix is re-read once per column fold and the streamed operand
    once per row fold. An operand too large for its SRAM is streamed from DRAM
    on every read; otherwise DRAM sees a single cold load of it.
    """
    m, k, n = op.m, op.k, op.n
    row_folds = ceil(m / hw.rows)
    col_folds = ceil(n / hw.cols)
    reads_a = col_folds * m * k
    reads_b = row_folds * k * n
    writes = m * n

    eb = hw.element_bytes
    fits_a = m * k * eb <= hw.sram_weight_bytes
    fits_b = k * n * eb <= hw.sram_input_bytes
    fits_out = m * n * eb <= hw.sram_output_bytes
    dram_reads = (m * k if fits_a else reads_a) + (k * n if fits_b else reads_b)
    return TrafficResult(
        sram_reads_a=reads_a,
        sram_reads_b=reads_b,
        sram_writes_out=writes,
        dram_reads=dram_reads,
        dram_writes=writes,
        fits_a=fits_a,
        fits_b=fits_b,
        fits_out=fits_out,
        element_bytes=eb,
    )


class Precision(str, Enum):
    FP16 = "fp16"
    INT8 = "int8"
    TERNARY = "ternary"
    BINARY = "binary"

    @property
    def bits(self) -> int:
        return {"fp16": 16, "int8": 8, "ternary": 2, "binary": 1}[self.value]


def weight_footprint(model: ModelConfig, precision) -> int:
    """Bytes of projection weights in one decoder block, rounded up."""
    bits = Precision(precision).bits
    return ceil(model.projection_macs * bits / 8)
