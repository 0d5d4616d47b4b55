"""Run configuration read from a YAML file.

Every section and key is optional except ``lattice.dims``; unknown keys are
rejected. Defaults::

    lattice:  {dims: [required], boundary: periodic}
    model:    {t: 1.0, delta: 1.0, gamma: null, gamma_grid: null, bond_overrides: null}
    scan:     {family: paper_default, exhaustive_cap: 14, block_cap: 4, record_modes: false}
    output:   {path: null, format: csv, precision: 12}
    oracle:   {cap: 6}

``gamma_grid`` is ``{min, max, points, spacing: log|linear}`` or
``{values: [...]}``. ``bond_overrides`` maps a direction index to
``{t_ab, delta_ab, t_ba, delta_ba}``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .lattice import Boundary, LatticeSpec
from .sector import BondCoupling, ModelParams


class ConfigError(ValueError):
    pass


@dataclass
class GammaGrid:
    min: Optional[float] = None
    max: Optional[float] = None
    points: Optional[int] = None
    spacing: str = "log"
    values: Optional[list] = None

    def to_array(self) -> np.ndarray:
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        if None in (self.min, self.max, self.points):
            raise ConfigError("gamma_grid needs min, max and points (or values)")
        if self.points == 0:
            return np.empty(0)
        if self.spacing == "log":
            if self.min <= 0:
                raise ConfigError("log-spaced gamma grid needs min > 0")
            return np.logspace(np.log10(self.min), np.log10(self.max), self.points)
        if self.spacing == "linear":
            return np.linspace(self.min, self.max, self.points)
        raise ConfigError(f"unknown spacing {self.spacing!r}")


@dataclass
class LatticeSection:
    dims: list = field(default_factory=list)
    boundary: str = "periodic"


@dataclass
class ModelSection:
    t: float = 1.0
    delta: float = 1.0
    gamma: Optional[float] = None
    gamma_grid: Optional[GammaGrid] = None
    bond_overrides: Optional[dict] = None


@dataclass
class ScanSection:
    family: str = "paper_default"
    exhaustive_cap: int = 14
    block_cap: int = 4
    record_modes: bool = False


@dataclass
class OutputSection:
    path: Optional[str] = None
    format: str = "csv"
    precision: int = 12


@dataclass
class OracleSection:
    cap: int = 6


@dataclass
class RunConfig:
    lattice: LatticeSection = field(default_factory=LatticeSection)
    model: ModelSection = field(default_factory=ModelSection)
    scan: ScanSection = field(default_factory=ScanSection)
    output: OutputSection = field(default_factory=OutputSection)
    oracle: OracleSection = field(default_factory=OracleSection)

    # -- derived objects ---------------------------------------------------

    def lattice_spec(self) -> LatticeSpec:
        if not self.lattice.dims:
            raise ConfigError("lattice.dims is required")
        try:
            return LatticeSpec(tuple(self.lattice.dims), Boundary(self.lattice.boundary))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def model_params(self, gamma: Optional[float] = None) -> ModelParams:
        m = self.model
        g = m.gamma if gamma is None else gamma
        overrides = None
        if m.bond_overrides:
            try:
                overrides = {int(a): BondCoupling(**v) for a, v in m.bond_overrides.items()}
            except TypeError as exc:
                raise ConfigError(f"bad bond_overrides: {exc}") from exc
        try:
            return ModelParams(float(m.t), float(m.delta), float(g or 0.0), overrides)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def gamma_grid(self) -> np.ndarray:
        if self.model.gamma_grid is not None:
            return self.model.gamma_grid.to_array()
        if self.model.gamma is not None:
            return np.array([float(self.model.gamma)])
        raise ConfigError("model.gamma or model.gamma_grid is required")

    def single_gamma(self) -> float:
        if self.model.gamma is None:
            raise ConfigError("model.gamma is required for this command")
        return float(self.model.gamma)

    def to_dict(self) -> dict:
        return _prune(asdict(self))


def _prune(d):
    if isinstance(d, dict):
        return {k: _prune(v) for k, v in d.items() if v is not None}
    return d


_CLASSES = {
    "lattice": LatticeSection,
    "model": ModelSection,
    "scan": ScanSection,
    "output": OutputSection,
    "oracle": OracleSection,
}


def _build(cls, data, where):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(map(str, unknown)))}")
    kwargs = dict(data)
    if cls is ModelSection and kwargs.get("gamma_grid") is not None:
        kwargs["gamma_grid"] = _build(GammaGrid, kwargs["gamma_grid"], "model.gamma_grid")
    return cls(**kwargs)


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(data) - set(_CLASSES)
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(map(str, unknown)))}")
    cfg = RunConfig(**{name: _build(cls, data.get(name), name) for name, cls in _CLASSES.items()})
    if cfg.output.format not in ("csv", "json"):
        raise ConfigError(f"unknown output format {cfg.output.format!r}")
    if cfg.scan.family not in ("paper_default", "flipped", "exhaustive"):
        raise ConfigError(f"unknown family {cfg.scan.family!r}")
    return cfg


def parse_config(text: str) -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from exc
    return config_from_dict(data or {})


def emit_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_config(text)
