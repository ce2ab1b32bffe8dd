"""Single-cell Boolean gates built from polarity-programmable writes.

A gate recipe is pure data: an initialization pulse, a short train of
write pulses whose amplitudes are looked up per input pair, and a final
read compared against a current threshold.  Every input row runs on a
freshly initialized device, so rows can be evaluated in any order.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError
from .models import MemristorModel
from .sweep import hold, simulate

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

INPUT_ROWS = ("00", "01", "10", "11")


@dataclass(frozen=True)
class InitStep:
    """Preconditioning pulse applied before every input row."""

    amplitude: float
    duration: float
    dt: float


@dataclass(frozen=True)
class PulseStep:
    """One write pulse; the amplitude depends on the input pair."""

    amplitudes: Mapping[str, float]
    duration: float
    dt: float

    def amplitude_for(self, a: int, b: int) -> float:
        return self.amplitudes[f"{a}{b}"]


@dataclass(frozen=True)
class ReadStep:
    """Final read pulse and the current threshold that decides the bit."""

    amplitude: float
    t_read: float
    dt: float
    threshold: float
    invert: bool

    @property
    def polarity(self) -> int:
        return 1 if self.amplitude > 0 else -1


@dataclass(frozen=True)
class GateRecipe:
    name: str
    v_limit: float
    init: InitStep
    pulses: Tuple[PulseStep, ...]
    read: ReadStep
    target: Mapping[str, int]

    def __post_init__(self):
        if self.v_limit <= 0:
            raise ConfigError(f"recipe {self.name}: v_limit must be positive")
        amps = [self.init.amplitude, self.read.amplitude]
        for pulse in self.pulses:
            amps.extend(pulse.amplitudes.values())
        for a in amps:
            if abs(a) > self.v_limit:
                raise ConfigError(
                    f"recipe {self.name}: amplitude {a} outside "
                    f"[-{self.v_limit}, {self.v_limit}]"
                )
        if self.read.threshold <= 0:
            raise ConfigError(
                f"recipe {self.name}: read threshold must be positive"
            )
        if sorted(self.target) != sorted(INPUT_ROWS):
            raise ConfigError(
                f"recipe {self.name}: target table must have exactly the "
                f"rows {INPUT_ROWS}"
            )
        for row, bit in self.target.items():
            if bit not in (0, 1):
                raise ConfigError(
                    f"recipe {self.name}: target[{row}] must be 0 or 1, "
                    f"got {bit!r}"
                )
        for pulse in self.pulses:
            if sorted(pulse.amplitudes) != sorted(INPUT_ROWS):
                raise ConfigError(
                    f"recipe {self.name}: each pulse needs amplitudes for "
                    f"exactly the rows {INPUT_ROWS}"
                )


@dataclass(frozen=True)
class TruthTable:
    """Produced outputs next to the recipe's declared targets."""

    name: str
    outputs: Mapping[str, int]
    target: Mapping[str, int]

    def __post_init__(self):
        if sorted(self.outputs) != sorted(INPUT_ROWS):
            raise ConfigError("truth table must have exactly 4 rows")

    @property
    def row_match(self) -> Dict[str, bool]:
        return {row: self.outputs[row] == self.target[row] for row in INPUT_ROWS}

    @property
    def all_match(self) -> bool:
        return all(self.row_match.values())

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "outputs": {row: self.outputs[row] for row in INPUT_ROWS},
            "target": {row: self.target[row] for row in INPUT_ROWS},
            "row_match": self.row_match,
            "all_match": self.all_match,
        }


def _require_keys(table: Mapping, allowed: Sequence[str], context: str) -> None:
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ConfigError(f"{context}: unknown key(s) {', '.join(unknown)}")
    missing = sorted(set(allowed) - set(table))
    if missing:
        raise ConfigError(f"{context}: missing key(s) {', '.join(missing)}")


def recipe_from_dict(raw: Mapping, *, source: str = "recipe") -> GateRecipe:
    """Build a validated recipe from parsed structured data."""
    _require_keys(raw, ["name", "v_limit", "init", "pulse", "read", "target"],
                  source)
    init_raw = raw["init"]
    _require_keys(init_raw, ["amplitude", "duration", "dt"], f"{source}.init")
    init = InitStep(
        amplitude=float(init_raw["amplitude"]),
        duration=float(init_raw["duration"]),
        dt=float(init_raw["dt"]),
    )
    pulses = []
    for k, pulse_raw in enumerate(raw["pulse"]):
        ctx = f"{source}.pulse[{k}]"
        _require_keys(pulse_raw, ["amplitude", "duration", "dt"], ctx)
        amps = {key: float(val) for key, val in pulse_raw["amplitude"].items()}
        pulses.append(
            PulseStep(
                amplitudes=amps,
                duration=float(pulse_raw["duration"]),
                dt=float(pulse_raw["dt"]),
            )
        )
    read_raw = raw["read"]
    _require_keys(
        read_raw,
        ["amplitude", "t_read", "dt", "threshold", "invert"],
        f"{source}.read",
    )
    read = ReadStep(
        amplitude=float(read_raw["amplitude"]),
        t_read=float(read_raw["t_read"]),
        dt=float(read_raw["dt"]),
        threshold=float(read_raw["threshold"]),
        invert=bool(read_raw["invert"]),
    )
    target = {key: int(val) for key, val in raw["target"].items()}
    return GateRecipe(
        name=str(raw["name"]),
        v_limit=float(raw["v_limit"]),
        init=init,
        pulses=tuple(pulses),
        read=read,
        target=target,
    )


def load_recipe(path) -> GateRecipe:
    """Parse one recipe file."""
    with open(path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if "pulse" not in raw:
        raw = dict(raw)
        raw["pulse"] = []
    return recipe_from_dict(raw, source=str(path))


def shipped_recipes() -> Dict[str, GateRecipe]:
    """All recipe files bundled with the package, keyed by gate name."""
    out: Dict[str, GateRecipe] = {}
    folder = resources.files("memsim.data") / "recipes"
    for entry in sorted(folder.iterdir(), key=lambda e: e.name):
        if not entry.name.endswith(".toml"):
            continue
        with resources.as_file(entry) as path:
            recipe = load_recipe(path)
        out[recipe.name] = recipe
    return out


def _read_current(model: MemristorModel, state: np.ndarray, read: ReadStep) -> float:
    trace = simulate(
        model,
        hold(read.amplitude, read.t_read, read.dt),
        initial_state=state,
        check_amplitude=False,
    )
    return abs(float(trace.i[-1]))


def _apply(model: MemristorModel, state, v: float, duration: float, dt: float):
    trace = simulate(
        model,
        hold(v, duration, dt),
        initial_state=state,
        check_amplitude=False,
    )
    return trace.state[-1].copy()


def threshold_window(
    model: MemristorModel, recipe: GateRecipe
) -> Tuple[float, float]:
    """Read currents after full negative and full positive writes.

    The recipe threshold must fall strictly inside this interval or the
    read cannot separate the two stored states.
    """
    duration, dt = recipe.init.duration, recipe.init.dt
    s_lo = _apply(model, None, -recipe.v_limit, duration, dt)
    s_hi = _apply(model, None, recipe.v_limit, duration, dt)
    i_lo = _read_current(model, s_lo, recipe.read)
    i_hi = _read_current(model, s_hi, recipe.read)
    return (min(i_lo, i_hi), max(i_lo, i_hi))


def _check_threshold(model: MemristorModel, recipe: GateRecipe) -> None:
    low, high = threshold_window(model, recipe)
    if not low < recipe.read.threshold < high:
        raise ConfigError(
            f"recipe {recipe.name}: threshold {recipe.read.threshold:.3e} A "
            f"not strictly inside the achievable read window "
            f"[{low:.3e}, {high:.3e}] A"
        )


def _run_row(model: MemristorModel, recipe: GateRecipe, a: int, b: int) -> int:
    state = _apply(
        model, None, recipe.init.amplitude, recipe.init.duration, recipe.init.dt
    )
    for pulse in recipe.pulses:
        state = _apply(
            model, state, pulse.amplitude_for(a, b), pulse.duration, pulse.dt
        )
    i_read = _read_current(model, state, recipe.read)
    bit = i_read > recipe.read.threshold
    return int(bit ^ recipe.read.invert)


def evaluate_gate(
    model: MemristorModel,
    recipe: GateRecipe,
    a: int,
    b: int,
    *,
    check_threshold: bool = True,
) -> int:
    """Run one input pair through the recipe and return the output bit."""
    if a not in (0, 1) or b not in (0, 1):
        raise ConfigError(f"gate inputs must be bits, got ({a!r}, {b!r})")
    if check_threshold:
        _check_threshold(model, recipe)
    return _run_row(model, recipe, a, b)


def truth_table(
    model: MemristorModel,
    recipe: GateRecipe,
    *,
    order: Optional[Sequence[str]] = None,
) -> TruthTable:
    """Evaluate all four input pairs, each on a freshly initialized device.

    ``order`` only changes the evaluation sequence; because rows share no
    state, the resulting table is order-independent.
    """
    rows = tuple(order) if order is not None else INPUT_ROWS
    if sorted(rows) != sorted(INPUT_ROWS):
        raise ConfigError(
            f"evaluation order must be a permutation of {INPUT_ROWS}, "
            f"got {rows}"
        )
    _check_threshold(model, recipe)
    outputs: Dict[str, int] = {}
    for row in rows:
        a, b = int(row[0]), int(row[1])
        outputs[row] = _run_row(model, recipe, a, b)
    return TruthTable(name=recipe.name, outputs=outputs, target=dict(recipe.target))
