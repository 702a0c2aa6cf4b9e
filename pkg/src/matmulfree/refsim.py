"""Register-level systolic array simulator used as the oracle for :mod:`cost`.

Operands move one PE per cycle through explicit registers. Injection into row
``i`` is delayed ``i`` cycles and into column ``j`` by ``j`` cycles (the usual
input skew). Nothing here evaluates the closed-form cycle counts: a fold ends
when its last output has left the grid, and the cycle total is simply how
many clock steps that took.

Integer operands keep the numerical check exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .cost import COST_FUNCTIONS, tile_sizes
from .errors import ScaleError
from .hardware import MB, Dataflow, HardwareConfig
from .models import MatMulOp, Role

MAX_MK = 64
MAX_N = 16
MAX_ARRAY = 16

# A register slot holds (value, stream index) or None when empty.
Slot = Optional[Tuple[int, int]]


@dataclass
class PEGridState:
    rows: int
    cols: int
    held: List[List[int]] = field(default_factory=list)
    acc: List[List[int]] = field(default_factory=list)
    horiz: List[List[Slot]] = field(default_factory=list)
    vert: List[List[Slot]] = field(default_factory=list)
    cycle: int = 0
    mac_events: int = 0

    def __post_init__(self):
        r, c = self.rows, self.cols
        self.held = [[0] * c for _ in range(r)]
        self.acc = [[0] * c for _ in range(r)]
        self.horiz = [[None] * c for _ in range(r)]
        self.vert = [[None] * c for _ in range(r)]

    def tick(self) -> None:
        self.cycle += 1


@dataclass(frozen=True)
class SimResult:
    result: np.ndarray
    cycles: int
    mac_events: int
    folds: int


def _guard(grid: PEGridState, limit: int) -> None:
    if grid.cycle > limit:
        raise RuntimeError("systolic schedule failed to terminate")


def _fold_os(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, int, int]:
    """Output tile pinned; A rows stream right, B columns stream down."""
    r, k = a.shape
    c = b.shape[1]
    g = PEGridState(r, c)
    limit = 4 * (r + c + k) + 8
    done = [[0] * c for _ in range(r)]
    while g.mac_events < r * c * k:
        t = g.cycle
        horiz = [[None] * c for _ in range(r)]
        vert = [[None] * c for _ in range(r)]
        for i in range(r):
            s = t - i
            horiz[i][0] = (int(a[i, s]), s) if 0 <= s < k else None
            for j in range(1, c):
                horiz[i][j] = g.horiz[i][j - 1]
        for j in range(c):
            s = t - j
            vert[0][j] = (int(b[s, j]), s) if 0 <= s < k else None
            for i in range(1, r):
                vert[i][j] = g.vert[i - 1][j]
        for i in range(r):
            for j in range(c):
                x, y = horiz[i][j], vert[i][j]
                if x is not None and y is not None:
                    assert x[1] == y[1], "operand streams misaligned"
                    g.acc[i][j] += x[0] * y[0]
                    done[i][j] += 1
                    g.mac_events += 1
        g.horiz, g.vert = horiz, vert
        g.tick()
        _guard(g, limit)
    # drain: the bottom row leaves each cycle and the rest shift down one row
    out = np.zeros((r, c), dtype=np.int64)
    chain: List[Optional[Tuple[int, List[int]]]] = [(i, g.acc[i]) for i in range(r)]
    while any(slot is not None for slot in chain):
        leaving = chain[-1]
        chain = [None] + chain[:-1]
        if leaving is not None:
            out[leaving[0]] = leaving[1]
        g.tick()
    return out, g.cycle, g.mac_events


def _preload(g: PEGridState, tile: np.ndarray, along_rows: bool) -> None:
    """Shift ``tile`` into ``g.held`` one row (or column) per cycle."""
    r, c = tile.shape
    steps = r if along_rows else c
    for t in range(steps):
        if along_rows:
            for i in range(r - 1, 0, -1):
                g.held[i] = list(g.held[i - 1])
            g.held[0] = [int(v) for v in tile[r - 1 - t]]
        else:
            for i in range(r):
                g.held[i] = [int(tile[i, c - 1 - t])] + g.held[i][:-1]
        g.tick()


def _fold_ws(a: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, int, int]:
    """B tile (r x c) pinned; rows of A stream right, partial sums flow down."""
    m, r = a.shape
    c = w.shape[1]
    g = PEGridState(r, c)
    _preload(g, w, along_rows=True)
    limit = g.cycle + 4 * (m + r + c) + 8
    out = np.zeros((m, c), dtype=np.int64)
    emitted = 0
    while emitted < m * c:
        t = g.cycle - r
        horiz = [[None] * c for _ in range(r)]
        psum = [[None] * c for _ in range(r)]
        for i in range(r):
            s = t - i
            horiz[i][0] = (int(a[s, i]), s) if 0 <= s < m else None
            for j in range(1, c):
                horiz[i][j] = g.horiz[i][j - 1]
        for i in range(r):
            for j in range(c):
                x = horiz[i][j]
                if x is None:
                    continue
                above = g.vert[i - 1][j] if i > 0 else (0, x[1])
                assert above is not None and above[1] == x[1], "partial sums misaligned"
                psum[i][j] = (above[0] + x[0] * g.held[i][j], x[1])
                g.mac_events += 1
        g.horiz, g.vert = horiz, psum
        g.tick()
        for j in range(c):
            leaving = psum[r - 1][j]
            if leaving is not None:
                out[leaving[1], j] = leaving[0]
                emitted += 1
        _guard(g, limit)
    return out, g.cycle, g.mac_events


def _fold_is(w: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, int, int]:
    """A tile (r x c) pinned; columns of B stream down, partial sums flow right."""
    r, c = w.shape
    n = b.shape[1]
    g = PEGridState(r, c)
    _preload(g, w, along_rows=False)
    limit = g.cycle + 4 * (n + r + c) + 8
    out = np.zeros((r, n), dtype=np.int64)
    emitted = 0
    while emitted < r * n:
        t = g.cycle - c
        vert = [[None] * c for _ in range(r)]
        psum = [[None] * c for _ in range(r)]
        for j in range(c):
            s = t - j
            vert[0][j] = (int(b[j, s]), s) if 0 <= s < n else None
            for i in range(1, r):
                vert[i][j] = g.vert[i - 1][j]
        for i in range(r):
            for j in range(c):
                y = vert[i][j]
                if y is None:
                    continue
                left = g.horiz[i][j - 1] if j > 0 else (0, y[1])
                assert left is not None and left[1] == y[1], "partial sums misaligned"
                psum[i][j] = (left[0] + g.held[i][j] * y[0], y[1])
                g.mac_events += 1
        g.vert, g.horiz = vert, psum
        g.tick()
        for i in range(r):
            leaving = psum[i][c - 1]
            if leaving is not None:
                out[i, leaving[1]] = leaving[0]
                emitted += 1
        _guard(g, limit)
    return out, g.cycle, g.mac_events


def _spans(extent: int, size: int) -> List[slice]:
    spans, start = [], 0
    for t in tile_sizes(extent, size):
        spans.append(slice(start, start + t))
        start += t
    return spans


def simulate(a, b, hw: HardwareConfig) -> SimResult:
    """Multiply integer matrices ``a`` (m x k) and ``b`` (k x n) on ``hw``.

    Folds run back to back; partial sums from different reduction folds are
    added outside the array.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if b.ndim == 1:
        b = b[:, None]
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"incompatible operand shapes {a.shape} and {b.shape}")
    m, k = a.shape
    n = b.shape[1]
    if min(m, k, n) < 1:
        raise ScaleError("operands must be non-empty")
    if m > MAX_MK or k > MAX_MK or n > MAX_N or hw.rows > MAX_ARRAY or hw.cols > MAX_ARRAY:
        raise ScaleError(
            f"oracle limited to m,k <= {MAX_MK}, n <= {MAX_N}, array <= {MAX_ARRAY}x{MAX_ARRAY}; "
            f"got m={m} k={k} n={n} on {hw.rows}x{hw.cols}"
        )

    result = np.zeros((m, n), dtype=np.int64)
    cycles = macs = folds = 0
    if hw.dataflow is Dataflow.OS:
        for rs in _spans(m, hw.rows):
            for cs in _spans(n, hw.cols):
                out, cyc, mac = _fold_os(a[rs, :], b[:, cs])
                result[rs, cs] += out
                cycles, macs, folds = cycles + cyc, macs + mac, folds + 1
    elif hw.dataflow is Dataflow.WS:
        for ks in _spans(k, hw.rows):
            for cs in _spans(n, hw.cols):
                out, cyc, mac = _fold_ws(a[:, ks], b[ks, cs])
                result[:, cs] += out
                cycles, macs, folds = cycles + cyc, macs + mac, folds + 1
    else:
        for rs in _spans(m, hw.rows):
            for ks in _spans(k, hw.cols):
                out, cyc, mac = _fold_is(a[rs, ks], b[ks, :])
                result[rs, :] += out
                cycles, macs, folds = cycles + cyc, macs + mac, folds + 1
    return SimResult(result, cycles, macs, folds)


def oracle_array(rows: int, cols: int, dataflow: Dataflow) -> HardwareConfig:
    return HardwareConfig(f"oracle-{rows}x{cols}", rows, cols, MB, MB, MB, dataflow=dataflow)


@dataclass(frozen=True)
class Mismatch:
    m: int
    k: int
    n: int
    rows: int
    cols: int
    dataflow: Dataflow
    simulated: int
    analytical: int
    detail: str = ""

    def __str__(self) -> str:
        text = (
            f"{self.dataflow.value} m={self.m} k={self.k} n={self.n} on {self.rows}x{self.cols}: "
            f"simulated {self.simulated} cycles, closed form {self.analytical}"
        )
        return f"{text} ({self.detail})" if self.detail else text


@dataclass(frozen=True)
class ValidationReport:
    checked: int
    mismatches: Tuple[Mismatch, ...]

    @property
    def ok(self) -> bool:
        return not self.mismatches


def validate(
    max_mk: int = 8,
    max_n: int = 4,
    max_array: int = 4,
    dataflows=tuple(Dataflow),
    cost_functions: Optional[Dict[Dataflow, Callable]] = None,
    seed: int = 0,
) -> ValidationReport:
    """Compare simulated and closed-form cycles over every small shape.

    Also checks the numerical product and the MAC count, so a schedule that
    happens to hit the right cycle count with the wrong data still fails.
    """
    cost_functions = cost_functions or COST_FUNCTIONS
    rng = np.random.default_rng(seed)
    mismatches = []
    checked = 0
    for dataflow in dataflows:
        for rows, cols in itertools.product(range(1, max_array + 1), repeat=2):
            hw = oracle_array(rows, cols, dataflow)
            for m, k, n in itertools.product(range(1, max_mk + 1), range(1, max_mk + 1), range(1, max_n + 1)):
                checked += 1
                a = rng.integers(-8, 9, size=(m, k))
                b = rng.integers(-8, 9, size=(k, n))
                sim = simulate(a, b, hw)
                expected = cost_functions[dataflow](MatMulOp(Role.Q_PROJ, m, k, n), hw).compute_cycles
                problems = []
                if not np.array_equal(sim.result, a @ b):
                    problems.append("wrong product")
                if sim.mac_events != m * k * n:
                    problems.append(f"{sim.mac_events} MAC events")
                if sim.cycles != expected or problems:
                    mismatches.append(
                        Mismatch(m, k, n, rows, cols, dataflow, sim.cycles, expected, ", ".join(problems))
                    )
    return ValidationReport(checked, tuple(mismatches))
