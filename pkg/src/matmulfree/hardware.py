"""Systolic-array TPU descriptions (array geometry, SRAM partition, dataflow)."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import List, Union

from .errors import ConfigError
from .models import _load_mapping

MB = 1 << 20


class Dataflow(str, Enum):
    OS = "OS"  # output stationary
    WS = "WS"  # weight stationary
    IS = "IS"  # input stationary

    @classmethod
    def parse(cls, value: Union[str, "Dataflow"]) -> "Dataflow":
        try:
            return cls(str(value.value if isinstance(value, Dataflow) else value).upper())
        except ValueError:
            raise ConfigError(f"unknown dataflow {value!r}; expected OS, WS or IS") from None


@dataclass(frozen=True)
class HardwareConfig:
    name: str
    rows: int
    cols: int
    sram_input_bytes: int
    sram_output_bytes: int
    sram_weight_bytes: int
    dataflow: Dataflow = Dataflow.OS
    element_bytes: int = 2

    def __post_init__(self):
        object.__setattr__(self, "dataflow", Dataflow.parse(self.dataflow))
        if self.rows < 1 or self.cols < 1:
            raise ConfigError(f"{self.name}: array must be at least 1x1, got {self.rows}x{self.cols}")
        for cap in ("sram_input_bytes", "sram_output_bytes", "sram_weight_bytes"):
            if getattr(self, cap) <= 0:
                raise ConfigError(f"{self.name}: {cap} must be positive")
        if self.element_bytes not in (1, 2, 4):
            raise ConfigError(f"{self.name}: element_bytes must be 1, 2 or 4")

    def with_dataflow(self, dataflow: Union[str, Dataflow]) -> "HardwareConfig":
        return replace(self, dataflow=Dataflow.parse(dataflow))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "rows": self.rows,
            "cols": self.cols,
            "dataflow": self.dataflow.value,
            "sram_input_bytes": self.sram_input_bytes,
            "sram_output_bytes": self.sram_output_bytes,
            "sram_weight_bytes": self.sram_weight_bytes,
            "element_bytes": self.element_bytes,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HardwareConfig":
        required = {"rows", "cols", "sram_input_bytes", "sram_output_bytes", "sram_weight_bytes"}
        known = required | {"name", "dataflow", "element_bytes"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown hardware config keys: {sorted(unknown)}")
        missing = required - set(data)
        if missing:
            raise ConfigError(f"missing hardware config keys: {sorted(missing)}")
        return cls(
            name=str(data.get("name", "custom")),
            rows=int(data["rows"]),
            cols=int(data["cols"]),
            sram_input_bytes=int(data["sram_input_bytes"]),
            sram_output_bytes=int(data["sram_output_bytes"]),
            sram_weight_bytes=int(data["sram_weight_bytes"]),
            dataflow=data.get("dataflow", "OS"),
            element_bytes=int(data.get("element_bytes", 2)),
        )


def builtin_hardware() -> List[HardwareConfig]:
    return [
        HardwareConfig("cloud", 256, 256, 4 * MB, 4 * MB, 8 * MB),
        HardwareConfig("edge", 32, 32, 2 * MB, 2 * MB, 4 * MB),
    ]


def load_hardware_config(path: Union[str, Path]) -> HardwareConfig:
    data = _load_mapping(path)
    data.setdefault("name", Path(path).stem)
    return HardwareConfig.from_dict(data)


def get_hardware(selector: str) -> HardwareConfig:
    """Resolve "cloud"/"edge" or a hardware config file path."""
    for hw in builtin_hardware():
        if hw.name == selector.lower():
            return hw
    if Path(selector).is_file():
        return load_hardware_config(selector)
    raise ConfigError(f"unknown hardware {selector!r} (built-in: cloud, edge)")
