"""Scenario configuration files (TOML).

Every table rejects unknown keys, and each subcommand rejects tables it does
not use, so a misspelt parameter name is an error instead of a silent default.
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .model import BuyerGroup, CostModel, Population, ProductLine
from .spam import SpamScenario

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GroupSpec(_Strict):
    alpha: float = Field(ge=0)
    sigma: float = Field(default=0.0, ge=0)
    proportion: float = Field(ge=0, le=1)


class PopulationSpec(_Strict):
    groups: list[GroupSpec] = Field(min_length=1)
    n_buyers: int = Field(default=1_000_000, ge=1)

    def build(self) -> Population:
        return Population(tuple(BuyerGroup(g.alpha, g.sigma, g.proportion) for g in self.groups), self.n_buyers)


class ProductSpec(_Strict):
    qualities: Optional[list[float]] = None
    m: Optional[int] = Field(default=None, ge=1)
    m_max: Optional[int] = Field(default=None, ge=1)
    weights: Optional[list[float]] = None
    ordered: bool = False
    price: float = Field(default=1.0, gt=0)
    beta: float = Field(default=1.0, gt=0)
    gamma: float = Field(default=1.0, gt=0)

    def build_line(self) -> ProductLine:
        if self.qualities is None:
            raise ConfigError("product.qualities is required")
        return ProductLine(tuple(self.qualities), None if self.weights is None else tuple(self.weights),
                           self.price, self.beta, self.gamma)


class CostSpec(_Strict):
    z: float = Field(default=0.0, ge=0)
    mode: Literal["independent", "damaged-goods"] = "independent"

    def build(self) -> CostModel:
        return CostModel(self.z, self.mode)


class SpamSpec(_Strict):
    alpha: float = Field(gt=0)
    z: float = Field(ge=0)
    perception_cap: Optional[int] = Field(default=None, ge=1)
    quality: Optional[float] = Field(default=None, ge=0, le=1)
    m: Optional[int] = Field(default=None, ge=1)

    def build(self) -> SpamScenario:
        return SpamScenario(self.alpha, self.z, self.perception_cap)


class AxisSpec(_Strict):
    name: str
    start: Optional[float] = None
    stop: Optional[float] = None
    step: Optional[float] = None
    values: Optional[list[float]] = None

    @model_validator(mode="after")
    def _range(self):
        if self.values is not None:
            if self.start is not None or self.stop is not None or self.step is not None:
                raise ValueError("give either values or start/stop/step")
            if not self.values:
                raise ValueError(f"axis {self.name!r}: empty value list")
            return self
        if self.start is None or self.stop is None or self.step is None:
            raise ValueError(f"axis {self.name!r}: start, stop and step are required")
        if not self.step > 0:
            raise ValueError(f"axis {self.name!r}: step must be positive")
        if self.stop < self.start:
            raise ValueError(f"axis {self.name!r}: empty range [{self.start}, {self.stop}]")
        return self

    def grid(self) -> list[float]:
        if self.values is not None:
            return sorted(float(v) for v in self.values)
        n = int(round((self.stop - self.start) / self.step))
        if self.start + n * self.step > self.stop + 1e-9 * max(1.0, abs(self.stop)):
            n -= 1
        return [round(self.start + i * self.step, 12) for i in range(n + 1)]


class SweepSpec(_Strict):
    task: Literal["eval", "optimize", "phase", "variants", "price", "spam"]
    axes: list[AxisSpec] = Field(min_length=1, max_length=2)


class OutputSpec(_Strict):
    path: Optional[str] = None
    format: Literal["csv", "json"] = "csv"


class ScenarioConfig(_Strict):
    population: Optional[PopulationSpec] = None
    product: Optional[ProductSpec] = None
    cost: Optional[CostSpec] = None
    spam: Optional[SpamSpec] = None
    sweep: Optional[SweepSpec] = None
    output: Optional[OutputSpec] = None


# tables each task may use; the first set is required
TASK_SECTIONS = {
    "eval": ({"population", "product", "cost"}, set()),
    "optimize": ({"population", "product", "cost"}, set()),
    "variants": ({"population", "product", "cost"}, set()),
    "phase": ({"population", "cost"}, {"product"}),
    "price": ({"population"}, {"cost"}),
    "spam": ({"spam"}, set()),
    "validate": (set(), {"population", "product", "cost", "spam"}),
}


def check_sections(config: ScenarioConfig, task: str, sweep: bool = False) -> None:
    required, optional = TASK_SECTIONS[task]
    present = {name for name in ScenarioConfig.model_fields if getattr(config, name) is not None}
    present.discard("output")
    if sweep:
        present.discard("sweep")
    elif "sweep" in present:
        raise ConfigError(f"[sweep] is not used by '{task}'")
    missing = required - present
    if missing:
        raise ConfigError(f"'{task}' needs table(s): {', '.join(sorted(missing))}")
    unused = present - required - optional
    if unused:
        raise ConfigError(f"table(s) not used by '{task}': {', '.join(sorted(unused))}")


def parse_config(text: str) -> ScenarioConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text)
