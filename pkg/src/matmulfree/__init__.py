"""Cycle and memory-traffic model of MatMul-free decoder inference on systolic arrays."""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, ScaleError, SeqlenRangeError
from .models import (
    MatMulOp,
    ModelConfig,
    Role,
    builtin_models,
    enumerate_block_ops,
    get_model,
    load_model_config,
)
from .hardware import Dataflow, HardwareConfig, builtin_hardware, get_hardware, load_hardware_config
from .cost import OpCost, cost_is, cost_os, cost_ws, op_cost
from .memory import Precision, TrafficResult, traffic, weight_footprint
from .amdahl import AmdahlCurve, FractionReport, curves, s_total
from .report import SweepGrid, analyze_block, emit, parse_json, sweep

__all__ = [
    "AmdahlCurve",
    "ConfigError",
    "Dataflow",
    "DomainError",
    "FractionReport",
    "HardwareConfig",
    "MatMulOp",
    "ModelConfig",
    "OpCost",
    "Precision",
    "Role",
    "ScaleError",
    "SeqlenRangeError",
    "SweepGrid",
    "TrafficResult",
    "analyze_block",
    "builtin_hardware",
    "builtin_models",
    "cost_is",
    "cost_os",
    "cost_ws",
    "curves",
    "emit",
    "enumerate_block_ops",
    "get_hardware",
    "get_model",
    "load_hardware_config",
    "load_model_config",
    "op_cost",
    "parse_json",
    "s_total",
    "sweep",
    "traffic",
    "weight_footprint",
]
