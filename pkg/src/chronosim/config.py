"""Scenario configuration: TOML files validated into immutable models."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ChronosimError


class ConfigError(ChronosimError):
    """Invalid scenario configuration; ``problems`` lists ``(field_path, message)``."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(f"{path}: {msg}" for path, msg in self.problems))


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GravityConfig(_Model):
    enabled: bool = False
    g: float = 0.0


class ClockConfig(_Model):
    type: Literal["two-level", "oscillator"] = "two-level"
    omega: float = Field(1.0, gt=0)
    dim: int = 2
    kappa: float = 0.0

    @model_validator(mode="after")
    def _dims(self):
        if self.type == "two-level" and self.dim != 2:
            raise ValueError("dim must be 2 for a two-level clock")
        if self.type == "oscillator" and self.dim < 3:
            raise ValueError("dim must be >= 3 for an oscillator clock")
        return self


class PacketConfig(_Model):
    amp_re: float = 1.0
    amp_im: float = 0.0
    p_mean: float = 0.0
    p_spread: float = Field(gt=0)
    x_mean: float = 0.0


class CMConfig(_Model):
    packets: list[PacketConfig] = Field(min_length=1)
    theta: Optional[float] = None
    phi: float = 0.0

    @model_validator(mode="after")
    def _two_packet_shorthand(self):
        if self.theta is not None and len(self.packets) != 2:
            raise ValueError("theta/phi shorthand needs exactly two packets")
        return self


class EvolutionConfig(_Model):
    method: Literal["exact-flat", "exact-grid", "dyson", "grav-limit"] = "exact-flat"
    t_list: list[float] = Field(min_length=1)


class GridConfig(_Model):
    n: int = Field(512, ge=16)
    extent: Optional[float] = Field(None, gt=0)


class OrderingConfig(_Model):
    kind: Literal["weyl", "lambda"] = "weyl"
    lambda_value: float = Field(0.5, ge=0.0, le=1.0)


class OutputConfig(_Model):
    dir: Optional[str] = None


class ScenarioConfig(_Model):
    name: str = Field(min_length=1)
    check: Optional[str] = None
    mass: float = Field(1.0, gt=0)
    tol: float = Field(1e-6, gt=0)
    seed: int = 0
    gravity: GravityConfig = GravityConfig()
    clock: ClockConfig = ClockConfig()
    cm: CMConfig
    evolution: EvolutionConfig
    grid: GridConfig = GridConfig()
    ordering: OrderingConfig = OrderingConfig()
    output: OutputConfig = OutputConfig()

    @field_validator("name")
    @classmethod
    def _name_is_path_safe(cls, v):
        if "/" in v or v.startswith("."):
            raise ValueError("name must be usable as a directory name")
        return v

    @model_validator(mode="after")
    def _method_matches_gravity(self):
        if self.check is None and self.evolution.method == "exact-flat" and self.g != 0:
            raise ValueError("evolution.method exact-flat requires gravity disabled or g = 0")
        if self.check is None and self.evolution.method == "exact-grid" and self.ordering.kind != "weyl":
            raise ValueError("evolution.method exact-grid needs a Hermitian (weyl) ordering")
        return self

    @property
    def g(self) -> float:
        return self.gravity.g if self.gravity.enabled else 0.0

    def config_hash(self) -> str:
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def with_overrides(self, grid_n=None, tol=None) -> "ScenarioConfig":
        data = self.model_dump()
        if grid_n is not None:
            data["grid"]["n"] = grid_n
        if tol is not None:
            data["tol"] = tol
        return parse_config(data)


def _path(loc) -> str:
    out = ""
    for part in loc:
        if isinstance(part, int):
            out += f"[{part}]"
        else:
            out += f".{part}" if out else str(part)
    return out or "<root>"


def parse_config(data: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError((_path(e["loc"]), e["msg"]) for e in exc.errors()) from None


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([(str(path), f"TOML syntax error: {exc}")]) from None
    except OSError as exc:
        raise ConfigError([(str(path), str(exc))]) from None
    return parse_config(data)
