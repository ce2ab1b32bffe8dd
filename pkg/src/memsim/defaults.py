"""Access to the packaged reference operating points.

Family defaults ship as data (``data/defaults.toml``) rather than code
constants.  This module loads them once, validates them through the
parameter dataclasses, and exposes small typed views.
"""

from __future__ import annotations

import dataclasses
from functools import lru_cache
from importlib import resources

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .errors import ConfigError
from .models import MemristorModel, make_model, params_from_dict
from .sweep import Waveform, make_sweep

__all__ = [
    "ReadSpec",
    "SweepSpec",
    "build_model",
    "default_params",
    "default_read",
    "default_sweep",
    "expected_ratio_log10",
    "family_names",
]


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    """Canonical characterization sweep for one family."""

    v_max_pos: float
    v_max_neg: float
    period: float
    cycles: int
    dt: float

    def build(self, cycles: int | None = None) -> Waveform:
        return make_sweep(
            self.v_max_pos,
            self.v_max_neg,
            self.period,
            self.cycles if cycles is None else cycles,
            self.dt,
        )


@dataclasses.dataclass(frozen=True)
class ReadSpec:
    """Standard non-destructive read pulse for one family."""

    read_v: float
    t_read: float
    dt: float


# Historical/CLI spellings accepted for family names.
FAMILY_ALIASES = {
    "strukov": "drift",
}


@lru_cache(maxsize=1)
def _raw() -> dict:
    text = resources.files("memsim.data").joinpath("defaults.toml").read_text()
    return tomllib.loads(text)


def family_names() -> tuple[str, ...]:
    return tuple(sorted(_raw()))


def resolve_family(name: str) -> str:
    """Map a family name or accepted alias to its canonical id."""
    canonical = FAMILY_ALIASES.get(name.lower(), name.lower())
    if canonical not in _raw():
        known = ", ".join(family_names() + tuple(sorted(FAMILY_ALIASES)))
        raise ConfigError(f"unknown family {name!r} (known: {known})")
    return canonical


def _entry(family: str) -> dict:
    return _raw()[resolve_family(family)]


def default_params(family: str):
    """Packaged parameter set for ``family``."""
    family = resolve_family(family)
    return params_from_dict(family, _entry(family)["params"])


def default_sweep(family: str) -> SweepSpec:
    sweep = dict(_entry(family)["sweep"])
    sweep["cycles"] = int(sweep["cycles"])
    return SweepSpec(**sweep)


def default_read(family: str) -> ReadSpec:
    return ReadSpec(**_entry(family)["read"])


def expected_ratio_log10(family: str) -> tuple[float, float] | None:
    """Expected resistance-window bounds in decades, if pinned."""
    bench = _entry(family).get("bench")
    if not bench or "expected_ratio_log10" not in bench:
        return None
    lo, hi = bench["expected_ratio_log10"]
    return float(lo), float(hi)


def build_model(family: str, **overrides) -> MemristorModel:
    """Model at packaged defaults with keyword overrides applied."""
    family = resolve_family(family)
    params = default_params(family)
    if overrides:
        known = {f.name for f in dataclasses.fields(params)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise ConfigError(
                f"unknown parameter(s) for family {family!r}: {', '.join(unknown)}"
            )
        params = dataclasses.replace(params, **overrides)
    return make_model(family, params)
