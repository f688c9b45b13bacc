"""Run configurations: one strict model per command.

Unknown keys are rejected, and the seed is always present so it ends up in
the echoed config of every run record.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import tomli
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from .errors import ConfigError

U64 = Annotated[int, Field(ge=0, lt=2**64)]


class _Run(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: U64 = 0
    out: Optional[str] = None
    threads: int = Field(1, ge=1)


class ForgeConfig(_Run):
    command: Literal["forge"] = "forge"
    curve: str
    base_point: str
    p: Optional[int] = None
    restarts: int = Field(1000, ge=0)
    n_max: int = Field(10, ge=1, le=16)
    b_max: int = Field(5, ge=1)
    line_limit: Optional[int] = Field(400, ge=1)
    extensions: list[int] = [1]
    log: bool = False


class ScanConfig(_Run):
    command: Literal["scan"] = "scan"
    curve: str
    base_point: str
    p: Optional[int] = None
    forms: list[tuple[str, str]]
    t_min: int = -20
    t_max: int = 20
    ext: int = 1


class DensityConfig(_Run):
    command: Literal["density"] = "density"
    prime_min: int = 100
    prime_max: int = 1000
    n: int = Field(2, ge=0)
    k: int = Field(0, ge=0)
    m: int = Field(2, ge=1)
    budget: int = Field(20_000, ge=1)
    form_sets: int = Field(1, ge=1)
    p_min: int = 100
    curve: Optional[str] = None
    base_point: Optional[str] = None


class AvoidConfig(_Run):
    command: Literal["avoid"] = "avoid"
    p: int
    k: int = Field(2, ge=1)
    n: int = Field(2, ge=1)
    m: int = Field(2, ge=1)
    budget: int = Field(20_000, ge=1)
    curve: Optional[str] = None
    base_point: Optional[str] = None


class CertifyConfig(_Run):
    command: Literal["certify"] = "certify"
    curve: str
    points: list[str]
    B: int = Field(10_000, ge=1)
    primes: int = Field(20, ge=1)
    prime_budget: int = Field(60, ge=1)
    p_min: int = Field(100, ge=3)


class GrowthConfig(_Run):
    command: Literal["growth"] = "growth"
    curve: str
    base_point: str
    schedule: list[int] = [1000, 4000]
    extensions: list[int] = [1]
    n_max: int = Field(10, ge=1, le=16)
    line_limit: Optional[int] = Field(400, ge=1)
    B: int = Field(10_000, ge=1)


class ConvertConfig(_Run):
    command: Literal["convert"] = "convert"
    curve: str
    base_point: str
    p: Optional[int] = None
    points: list[str] = []
    quartic_points: list[str] = []


RunConfig = Annotated[
    Union[ForgeConfig, ScanConfig, DensityConfig, AvoidConfig, CertifyConfig, GrowthConfig, ConvertConfig],
    Field(discriminator="command"),
]
_adapter = TypeAdapter(RunConfig)


def load_config_file(path: str) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if p.suffix == ".toml":
            return tomli.loads(text)
        return json.loads(text)
    except (tomli.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc


def build_config(data: dict):
    try:
        return _adapter.validate_python(data)
    except ValidationError as exc:
        raise ConfigError(_summarize(exc)) from exc


def _summarize(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(x) for x in err["loc"])
        parts.append(f"{loc}: {err['msg']}" if loc else err["msg"])
    return "; ".join(parts)
