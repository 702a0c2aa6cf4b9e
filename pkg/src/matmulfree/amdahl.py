"""Amdahl's Law over the projection / attention split of a decoder block."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from .errors import DomainError
from .hardware import HardwareConfig
from .models import ModelConfig, Role


class Metric(str, Enum):
    COMPUTE = "compute"
    MEMORY = "memory"


class MemoryBasis(str, Enum):
    SRAM = "sram"  # SRAM reads + writes, elements
    DRAM = "dram"  # DRAM reads + writes, bytes


class Target(str, Enum):
    PROJECTIONS = "projections"
    ATTENTION = "attention"


def s_total(f: float, s_partial: float) -> float:
    """Whole-system speedup when a fraction ``f`` of the work is sped up ``s_partial`` times."""
    if not 0.0 <= f <= 1.0 or math.isnan(f):
        raise DomainError(f"fraction must lie in [0, 1], got {f}")
    if not s_partial >= 1.0:
        raise DomainError(f"partial speedup must be >= 1, got {s_partial}")
    return 1.0 / (1.0 - f + f / s_partial)


def asymptote(f: float) -> float:
    return math.inf if f >= 1.0 else 1.0 / (1.0 - f)


@dataclass(frozen=True)
class OpRecord:
    role: Role
    head_index: Optional[int]
    m: int
    k: int
    n: int
    quantizable: bool
    compute_cycles: int
    folds: int
    mac_count: int
    utilization: float
    sram_accesses: int
    dram_bytes: int

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["role"] = self.role.value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "OpRecord":
        return cls(**{**data, "role": Role(data["role"])})


@dataclass(frozen=True)
class FractionReport:
    """Cycle and traffic totals of one decoder block, split by quantizability.

    ``layers`` scales the absolute totals to a whole model; it cancels in
    every fraction.
    """

    model: ModelConfig
    seqlen: int
    hardware: HardwareConfig
    memory_basis: MemoryBasis
    cycles_projection: int
    cycles_attention: int
    memory_projection: int
    memory_attention: int
    per_op: Tuple[OpRecord, ...] = ()
    layers: int = 1

    @property
    def f_compute(self) -> float:
        return self.cycles_projection / (self.cycles_projection + self.cycles_attention)

    @property
    def f_memory(self) -> float:
        return self.memory_projection / (self.memory_projection + self.memory_attention)

    def fraction(self, metric) -> float:
        return self.f_compute if Metric(metric) is Metric.COMPUTE else self.f_memory

    @property
    def total_cycles(self) -> int:
        return self.layers * (self.cycles_projection + self.cycles_attention)

    @property
    def total_memory(self) -> int:
        return self.layers * (self.memory_projection + self.memory_attention)


@dataclass(frozen=True)
class AmdahlCurve:
    f: float
    target: Target
    samples: Tuple[Tuple[int, float], ...]

    @property
    def asymptote(self) -> float:
        return asymptote(self.f)

    def to_dict(self) -> dict:
        return {
            "f": self.f,
            "target": self.target.value,
            "asymptote": self.asymptote,
            "samples": [list(s) for s in self.samples],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AmdahlCurve":
        samples = tuple((int(s), float(t)) for s, t in data["samples"])
        return cls(float(data["f"]), Target(data["target"]), samples)


def curve(f: float, target, s_max: int = 100) -> AmdahlCurve:
    if s_max < 1:
        raise DomainError(f"s_max must be >= 1, got {s_max}")
    samples = tuple((s, s_total(f, s)) for s in range(1, s_max + 1))
    return AmdahlCurve(f, Target(target), samples)


def curves(report: FractionReport, metric="compute", s_max: int = 100) -> Tuple[AmdahlCurve, AmdahlCurve]:
    """(projection-improvement, attention-improvement) curves for one block."""
    f = report.fraction(metric)
    return curve(f, Target.PROJECTIONS, s_max), curve(1.0 - f, Target.ATTENTION, s_max)
