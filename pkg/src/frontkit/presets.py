"""Named model presets for the CLI and the test suite."""

from __future__ import annotations

from .kernels import DelayKernel
from .models import LotkaVolterraModel, NicholsonModel, ZouModel

__all__ = ["get_preset", "preset_names", "default_speed"]


def _lv_benchmark() -> LotkaVolterraModel:
    """Two-species benchmark: slow sparse diffuser vs fast grower, no delay."""
    return LotkaVolterraModel.undelayed(
        d=(0.0001, 0.05), r=(0.1, 0.5),
        c=((1.0, 0.55), (0.75, 1.0)))


def _lv_benchmark_delayed() -> LotkaVolterraModel:
    """Benchmark variant with 60% instantaneous self-limitation and the
    remaining intraspecific mass delayed by 5 time units; interspecific
    coupling weakened so the row-sum condition still holds."""
    diag = DelayKernel.from_atoms([(-5.0, 0.4), (0.0, 0.6)])
    off = DelayKernel.point_mass(0.0, tau=5.0)
    return LotkaVolterraModel(
        d=(0.0001, 0.05), r=(0.1, 0.5),
        c=((1.0, 0.1), (0.1, 1.0)),
        kernels=((diag, off), (off, diag)))


_PRESETS = {
    "lv-5.4": _lv_benchmark,
    "lv-5.4-delayed": _lv_benchmark_delayed,
    "fisher": lambda: LotkaVolterraModel.fisher(1.0, 1.0),
    "fisher-d4": lambda: LotkaVolterraModel.fisher(4.0, 1.0),
    "zou": lambda: ZouModel(d=1.0, r=1.0, kernel=DelayKernel.point_mass(-1.0)),
    "nicholson": lambda: NicholsonModel(d=1.0, kernel=DelayKernel.point_mass(-1.0)),
}

_DEFAULT_SPEEDS = {
    "lv-5.4": 1.0,
    "lv-5.4-delayed": 1.0,
    "fisher": 3.0,
    "fisher-d4": 5.0,
}


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def get_preset(name: str):
    try:
        return _PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")


def default_speed(name: str) -> float | None:
    return _DEFAULT_SPEEDS.get(name)
