"""Closed-form stall-free cycle counts for one MatMul on an R x C systolic array.

The stored operand A is ``m x k``, the streamed operand B is ``k x n`` and the
output is ``m x n``. Each dataflow pins one of the three matrices to the PE
grid, tiles it into folds of at most R x C and charges every fold for its
fill skew, its streaming length and its drain:

    OS  pins the output (m -> rows, n -> cols), streams k:  2r + c + k - 2
    WS  pins B (k -> rows, n -> cols), streams m:           r + m + r + c - 2
    IS  pins A (m -> rows, k -> cols), streams n:           c + n + r + c - 2

The leading ``r``/``c`` term of WS/IS is the preload of the pinned tile; OS
instead pays ``r`` cycles to drain its accumulators row by row.

These schedules are exactly what :mod:`matmulfree.refsim` executes, so the two
must agree cycle for cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List

from .errors import DomainError
from .hardware import Dataflow, HardwareConfig


@dataclass(frozen=True)
class OpCost:
    compute_cycles: int
    folds: int
    mac_count: int
    utilization: float


def tile_sizes(extent: int, size: int) -> List[int]:
    """Split ``extent`` into consecutive tiles of at most ``size``."""
    full, rem = divmod(extent, size)
    return [size] * full + ([rem] if rem else [])


def _check(op, hw: HardwareConfig, dataflow: Dataflow) -> None:
    if hw.dataflow is not dataflow:
        raise DomainError(f"{hw.name} is configured for {hw.dataflow.value}, not {dataflow.value}")
    if min(op.m, op.k, op.n) < 1:
        raise DomainError(f"zero-sized MatMul m={op.m} k={op.k} n={op.n}")


def _finish(op, hw: HardwareConfig, cycles: int, folds: int) -> OpCost:
    macs = op.m * op.k * op.n
    return OpCost(cycles, folds, macs, macs / (cycles * hw.rows * hw.cols))


def cost_os(op, hw: HardwareConfig) -> OpCost:
    _check(op, hw, Dataflow.OS)
    rows, cols = tile_sizes(op.m, hw.rows), tile_sizes(op.n, hw.cols)
    cycles = sum(2 * r + c + op.k - 2 for r in rows for c in cols)
    return _finish(op, hw, cycles, len(rows) * len(cols))


def cost_ws(op, hw: HardwareConfig) -> OpCost:
    _check(op, hw, Dataflow.WS)
    rows, cols = tile_sizes(op.k, hw.rows), tile_sizes(op.n, hw.cols)
    cycles = sum(r + op.m + r + c - 2 for r in rows for c in cols)
    return _finish(op, hw, cycles, len(rows) * len(cols))


def cost_is(op, hw: HardwareConfig) -> OpCost:
    _check(op, hw, Dataflow.IS)
    rows, cols = tile_sizes(op.m, hw.rows), tile_sizes(op.k, hw.cols)
    cycles = sum(c + op.n + r + c - 2 for r in rows for c in cols)
    return _finish(op, hw, cycles, len(rows) * len(cols))


COST_FUNCTIONS: Dict[Dataflow, Callable[..., OpCost]] = {
    Dataflow.OS: cost_os,
    Dataflow.WS: cost_ws,
    Dataflow.IS: cost_is,
}


def op_cost(op, hw: HardwareConfig) -> OpCost:
    """Cost of ``op`` under whichever dataflow ``hw`` is configured for."""
    return COST_FUNCTIONS[hw.dataflow](op, hw)
