"""Run configuration: JSON ingestion, kernel/model literals, validation.

A run config is one JSON file with a model block plus command-specific
blocks; presets are referenced by name.  Kernel literals come in three
forms:

    [[s, w], ...]                     explicit atoms
    {"point": s}                      unit mass at s
    {"uniform": {"tau": T, "atoms": N}}  midpoint-discretized density

Parse errors carry the offending field path and map to exit code 1.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

from .kernels import DelayKernel, KernelError
from .models import LotkaVolterraModel, ModelError, NicholsonModel, ZouModel
from .presets import get_preset

__all__ = ["RunConfig", "ConfigError", "parse_kernel", "parse_model", "load_config"]


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"config field '{path}': {message}")
        self.path = path


def parse_kernel(obj: Any, path: str = "kernel") -> DelayKernel:
    try:
        if isinstance(obj, list):
            atoms = [(float(s), float(w)) for s, w in obj]
            return DelayKernel.from_atoms(atoms)
        if isinstance(obj, dict) and "point" in obj:
            unknown = set(obj) - {"point", "tau"}
            if unknown:
                raise ConfigError(path, f"unexpected keys {sorted(unknown)}")
            return DelayKernel.point_mass(float(obj["point"]),
                                          tau=float(obj["tau"]) if "tau" in obj else None)
        if isinstance(obj, dict) and "uniform" in obj:
            u = obj["uniform"]
            return DelayKernel.uniform_quadrature(float(u["tau"]), int(u["atoms"]))
    except (KernelError, TypeError, KeyError) as exc:
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(path, f"not a kernel literal: {obj!r}")


def parse_model(obj: Any, path: str = "model"):
    if isinstance(obj, str):
        try:
            return get_preset(obj)
        except KeyError as exc:
            raise ConfigError(path, str(exc)) from exc
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected a preset name or a model block")
    if "preset" in obj:
        return parse_model(obj["preset"], path + ".preset")
    kind = obj.get("kind", "lotka_volterra")
    try:
        if kind in ("lotka_volterra", "fisher"):
            if kind == "fisher":
                return LotkaVolterraModel.fisher(float(obj.get("d", 1.0)),
                                                 float(obj.get("r", 1.0)))
            d = tuple(float(v) for v in obj["d"])
            r = tuple(float(v) for v in obj["r"])
            c = tuple(tuple(float(v) for v in row) for row in obj["c"])
            n = len(d)
            if "kernels" in obj:
                kern = tuple(tuple(parse_kernel(obj["kernels"][i][j],
                                                f"{path}.kernels[{i}][{j}]")
                                   for j in range(n)) for i in range(n))
                return LotkaVolterraModel(d, r, c, kern)
            return LotkaVolterraModel.undelayed(d, r, c)
        if kind == "zou":
            return ZouModel(d=float(obj.get("d", 1.0)), r=float(obj.get("r", 1.0)),
                            kernel=parse_kernel(obj.get("kernel", {"point": -1.0}),
                                                path + ".kernel"))
        if kind == "nicholson":
            return NicholsonModel(d=float(obj.get("d", 1.0)),
                                  kernel=parse_kernel(obj.get("kernel", {"point": -1.0}),
                                                      path + ".kernel"))
    except ConfigError:
        raise
    except (ModelError, KernelError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(path + ".kind", f"unknown model kind {kind!r}")


@dataclass
class RunConfig:
    """Parsed configuration plus provenance (hash of the raw document)."""

    raw: dict = field(default_factory=dict)
    seed: int = 0
    out_dir: str = "out"
    plot: bool = False

    @property
    def digest(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def model(self):
        if "model" not in self.raw:
            raise ConfigError("model", "missing model block (or use --preset)")
        return parse_model(self.raw["model"])

    def block(self, name: str) -> dict:
        blk = self.raw.get(name, {})
        if not isinstance(blk, dict):
            raise ConfigError(name, "expected an object")
        return blk


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(path, f"cannot read: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(path, f"invalid JSON at line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(path, "top level must be an object")
    return doc
