"""Built-in decoder-only LLM configurations and per-block MatMul enumeration."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Optional, Union

import yaml

from .errors import ConfigError, DomainError, SeqlenRangeError

logger = logging.getLogger(__name__)

DEFAULT_SEQLEN_MIN = 128
DEFAULT_SEQLEN_MAX = 4096


class Role(str, Enum):
    Q_PROJ = "QProj"
    K_PROJ = "KProj"
    V_PROJ = "VProj"
    OUT_PROJ = "OutProj"
    FF_INTERMEDIATE = "FFIntermediate"
    FF_OUTPUT = "FFOutput"
    SCORE_QK = "ScoreQK"
    CONTEXT_SV = "ContextSV"

    @property
    def quantizable(self) -> bool:
        return self not in (Role.SCORE_QK, Role.CONTEXT_SV)


PROJECTION_ROLES = tuple(r for r in Role if r.quantizable)


@dataclass(frozen=True)
class ModelConfig:
    name: str
    d: int
    h: int
    d_ff: int
    seqlen_min: int = DEFAULT_SEQLEN_MIN
    seqlen_max: int = DEFAULT_SEQLEN_MAX
    head_dim_override: Optional[int] = None

    def __post_init__(self):
        for field_name in ("d", "h", "d_ff", "seqlen_min", "seqlen_max"):
            value = getattr(self, field_name)
            if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
                raise ConfigError(f"{self.name}: {field_name} must be a positive integer, got {value!r}")
        if self.seqlen_min > self.seqlen_max:
            raise ConfigError(f"{self.name}: seqlen_min {self.seqlen_min} > seqlen_max {self.seqlen_max}")
        if self.head_dim_override is not None and self.head_dim_override <= 0:
            raise ConfigError(f"{self.name}: head_dim must be positive")
        if self.head_dim < 1:
            raise ConfigError(f"{self.name}: h={self.h} exceeds d={self.d}, leaving no per-head dimension")
        if self.head_dim_warning:
            logger.debug("%s: d=%d not divisible by h=%d, flooring head_dim", self.name, self.d, self.h)

    @property
    def head_dim(self) -> int:
        if self.head_dim_override is not None:
            return self.head_dim_override
        return self.d // self.h

    @property
    def head_dim_warning(self) -> bool:
        """True when the head dimension was floored because h does not divide d."""
        return self.head_dim_override is None and self.d % self.h != 0

    @property
    def projection_macs(self) -> int:
        return 4 * self.d * self.d + 2 * self.d * self.d_ff

    def attention_macs(self, l: int) -> int:
        return 2 * self.h * l * self.head_dim

    def check_seqlen(self, l: int) -> None:
        if not self.seqlen_min <= l <= self.seqlen_max:
            raise SeqlenRangeError(
                f"{self.name}: sequence length {l} outside [{self.seqlen_min}, {self.seqlen_max}]"
            )

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "d": self.d,
            "h": self.h,
            "d_ff": self.d_ff,
            "seqlen_min": self.seqlen_min,
            "seqlen_max": self.seqlen_max,
        }
        if self.head_dim_override is not None:
            out["head_dim"] = self.head_dim_override
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        known = {"name", "d", "h", "d_ff", "head_dim", "seqlen_min", "seqlen_max"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
        missing = {"name", "d", "h", "d_ff"} - set(data)
        if missing:
            raise ConfigError(f"missing model config keys: {sorted(missing)}")
        return cls(
            name=str(data["name"]),
            d=data["d"],
            h=data["h"],
            d_ff=data["d_ff"],
            seqlen_min=data.get("seqlen_min", DEFAULT_SEQLEN_MIN),
            seqlen_max=data.get("seqlen_max", DEFAULT_SEQLEN_MAX),
            head_dim_override=data.get("head_dim"),
        )


@dataclass(frozen=True)
class MatMulOp:
    """One matrix-vector (or, for oracle shapes, matrix-matrix) multiply.

    The stored operand is ``m x k`` and the streamed operand ``k x n``;
    decoder ops always have ``n == 1``.
    """

    role: Role
    m: int
    k: int
    n: int = 1
    head_index: Optional[int] = None

    def __post_init__(self):
        if min(self.m, self.k, self.n) < 1:
            raise DomainError(f"MatMul dimensions must be >= 1, got m={self.m} k={self.k} n={self.n}")

    @property
    def quantizable(self) -> bool:
        return self.role.quantizable

    @property
    def macs(self) -> int:
        return self.m * self.k * self.n


# name, d, h, d_ff
_TABLE = [
    ("gpt-125m", 768, 12, 768),
    ("gpt-355m", 1024, 16, 1024),
    ("gpt-774m", 1280, 20, 1280),
    ("gpt-1.5b", 1600, 25, 1600),
    ("opt-350m", 1024, 16, 4096),
    ("opt-1.3b", 2048, 32, 8192),
    ("opt-2.7b", 2560, 32, 10240),
    ("opt-6.7b", 4096, 32, 16384),
    ("opt-13b", 5120, 40, 20480),
    ("opt-30b", 7168, 56, 28672),
    ("opt-66b", 9216, 76, 36864),
    ("llama-7b", 4096, 32, 11008),
    ("llama-13b", 5120, 40, 13824),
]

FAMILIES = ("gpt", "opt", "llama")


def builtin_models() -> List[ModelConfig]:
    return [ModelConfig(name, d, h, d_ff) for name, d, h, d_ff in _TABLE]


def family_models(family: str) -> List[ModelConfig]:
    """Built-in models of one family, smallest first."""
    family = family.lower()
    if family not in FAMILIES:
        raise ConfigError(f"unknown model family {family!r}; expected one of {FAMILIES}")
    return [m for m in builtin_models() if m.name.startswith(family + "-")]


def load_model_config(path: Union[str, Path]) -> ModelConfig:
    """Read a model from a YAML (or JSON) file with the ModelConfig keys."""
    data = _load_mapping(path)
    return ModelConfig.from_dict(data)


def get_model(selector: str) -> ModelConfig:
    """Resolve a built-in model name (case-insensitive) or a config file path."""
    for model in builtin_models():
        if model.name == selector.lower():
            return model
    if Path(selector).is_file():
        return load_model_config(selector)
    names = ", ".join(m.name for m in builtin_models())
    raise ConfigError(f"unknown model {selector!r} (built-in: {names})")


def enumerate_block_ops(model: ModelConfig, l: int) -> List[MatMulOp]:
    """All 2h+6 MatMuls of one decode step through a decoder block at context length l."""
    model.check_seqlen(l)
    d, d_ff, hd = model.d, model.d_ff, model.head_dim
    ops = [
        MatMulOp(Role.Q_PROJ, d, d),
        MatMulOp(Role.K_PROJ, d, d),
        MatMulOp(Role.V_PROJ, d, d),
        MatMulOp(Role.OUT_PROJ, d, d),
        MatMulOp(Role.FF_INTERMEDIATE, d_ff, d),
        MatMulOp(Role.FF_OUTPUT, d, d_ff),
    ]
    for i in range(model.h):
        ops.append(MatMulOp(Role.SCORE_QK, l, hd, head_index=i))
        ops.append(MatMulOp(Role.CONTEXT_SV, hd, l, head_index=i))
    return ops


def _load_mapping(path: Union[str, Path]) -> dict:
    path = Path(path)
    try:
        with path.open() as f:
            data = yaml.safe_load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a mapping of keys")
    return data
