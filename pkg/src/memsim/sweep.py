"""Waveform construction and fixed-step trace simulation.

Waveforms are uniformly sampled voltage programs.  A canonical sweep is
a zero-mean triangle: per cycle it ramps 0 -> +v_max_pos -> 0 ->
-v_max_neg -> 0 in four equal quarters.  Initialization prefixes are
constant holds whose end is marked so that analysis can skip them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, InstabilityError
from .models import MemristorModel

__all__ = [
    "IVTrace",
    "Waveform",
    "hold",
    "make_initialization",
    "make_sweep",
    "simulate",
]

END_OF_INIT = "end_of_initialization"


@dataclass(frozen=True)
class Waveform:
    """Uniformly sampled voltage program.

    ``markers`` tags sample indices with labels; ``sweep_amplitude``
    carries the nominal (positive, negative) sweep peaks when the
    waveform contains a canonical sweep, for setup-time validation.
    """

    t: np.ndarray
    v: np.ndarray
    markers: tuple[tuple[int, str], ...] = ()
    sweep_amplitude: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if t.ndim != 1 or v.ndim != 1 or t.shape != v.shape:
            raise ConfigError("waveform t and v must be 1-d arrays of equal length")
        if t.size < 2:
            raise ConfigError("waveform needs at least two samples")
        steps = np.diff(t)
        if not np.all(steps > 0):
            raise ConfigError("waveform time axis must be strictly increasing")
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ConfigError("waveform time axis must be uniform")
        for index, label in self.markers:
            if not 0 <= index < t.size:
                raise ConfigError(f"marker {label!r} index {index} out of range")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def __len__(self) -> int:
        return int(self.t.size)

    def concat(self, other: "Waveform") -> "Waveform":
        """Append ``other`` after this waveform, one step apart.

        Markers from both parts are kept, with the second part's indices
        shifted past the first.
        """
        if not np.isclose(self.dt, other.dt, rtol=1e-9):
            raise ConfigError(
                f"cannot concatenate waveforms with different steps "
                f"({self.dt} vs {other.dt})"
            )
        offset = self.t[-1] + self.dt - other.t[0]
        t = np.concatenate([self.t, other.t + offset])
        v = np.concatenate([self.v, other.v])
        markers = tuple(self.markers) + tuple(
            (index + len(self), label) for index, label in other.markers
        )
        amplitude = self.sweep_amplitude or other.sweep_amplitude
        return Waveform(t=t, v=v, markers=markers, sweep_amplitude=amplitude)


def make_sweep(
    v_max_pos: float,
    v_max_neg: float,
    period: float,
    cycles: int,
    dt: float,
) -> Waveform:
    """Triangular sweep covering ``cycles`` full periods.

    Each cycle visits +v_max_pos and -v_max_neg exactly once and starts
    and ends at zero.  The sample count is round(cycles * period / dt)
    plus the shared endpoint.
    """
    if v_max_pos <= 0 or v_max_neg <= 0:
        raise ConfigError(
            f"sweep amplitudes must be positive, got ({v_max_pos}, {v_max_neg})"
        )
    if not isinstance(cycles, int) or cycles < 1:
        raise ConfigError(f"cycles must be an integer >= 1, got {cycles}")
    if dt <= 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    if period < 4 * dt:
        raise ConfigError(f"period {period} too short for dt {dt} (needs >= 4 samples)")

    n = int(round(cycles * period / dt)) + 1
    t = np.arange(n) * dt
    quarter = period / 4.0
    phase = np.mod(t, period)
    seg = np.minimum((phase / quarter).astype(int), 3)
    frac = phase / quarter - seg
    v = np.select(
        [seg == 0, seg == 1, seg == 2, seg == 3],
        [
            v_max_pos * frac,
            v_max_pos * (1.0 - frac),
            -v_max_neg * frac,
            -v_max_neg * (1.0 - frac),
        ],
    )
    return Waveform(t=t, v=v, sweep_amplitude=(float(v_max_pos), float(v_max_neg)))


def half_sweep(v_peak: float, duration: float, dt: float) -> Waveform:
    """Unipolar triangle 0 -> v_peak -> 0 over ``duration``.

    The sign of ``v_peak`` selects the polarity.  Used by write steps that
    push the state one way without traversing the opposite branch.
    """
    if v_peak == 0:
        raise ConfigError("half sweep needs a nonzero peak voltage")
    if dt <= 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    if duration < 2 * dt:
        raise ConfigError(
            f"half sweep duration {duration} too short for dt {dt}"
        )
    n = int(round(duration / dt)) + 1
    t = np.arange(n) * dt
    frac = t / (duration / 2.0)
    v = np.where(frac <= 1.0, v_peak * frac, v_peak * (2.0 - frac))
    v[np.abs(v) < 1e-15] = 0.0
    return Waveform(t=t, v=v)


def hold(v_hold: float, duration: float, dt: float) -> Waveform:
    """Constant-voltage segment of round(duration / dt) + 1 samples."""
    if duration <= 0:
        raise ConfigError(f"hold duration must be positive, got {duration}")
    if dt <= 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    n = int(round(duration / dt)) + 1
    if n < 2:
        raise ConfigError(f"hold duration {duration} too short for dt {dt}")
    t = np.arange(n) * dt
    v = np.full(n, float(v_hold))
    return Waveform(t=t, v=v)


def make_initialization(v_init: float, duration: float, dt: float) -> Waveform:
    """Constant preconditioning hold whose last sample is marked.

    Concatenating a sweep after it keeps the marker, and the simulator
    uses it to report where post-initialization data begins.
    """
    wf = hold(v_init, duration, dt)
    return replace(wf, markers=((len(wf) - 1, END_OF_INIT),))


@dataclass(frozen=True)
class IVTrace:
    """Simulated (or imported) current-voltage record.

    ``state`` has one row per sample and one column per state component;
    it is empty (shape (n, 0)) for imported traces.  ``t0_index`` points
    at the first sample after any initialization prefix.
    """

    t: np.ndarray
    v: np.ndarray
    i: np.ndarray
    state: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    t0_index: int = 0

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.v, dtype=float)
        i = np.asarray(self.i, dtype=float)
        if not (t.shape == v.shape == i.shape) or t.ndim != 1:
            raise ConfigError("trace t, v, i must be 1-d arrays of equal length")
        if t.size < 2:
            raise ConfigError("trace needs at least two samples")
        if not np.all(np.diff(t) > 0):
            raise ConfigError("trace time axis must be strictly increasing")
        state = np.asarray(self.state, dtype=float)
        if state.size and state.shape[0] != t.size:
            raise ConfigError("trace state must have one row per sample")
        if not 0 <= self.t0_index < t.size:
            raise ConfigError(f"t0_index {self.t0_index} out of range")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "state", state)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def __len__(self) -> int:
        return int(self.t.size)

    def analysis_slice(self) -> slice:
        """Samples after the initialization prefix."""
        return slice(self.t0_index, len(self))


def simulate(
    model: MemristorModel,
    waveform: Waveform,
    initial_state: np.ndarray | None = None,
    check_amplitude: bool = True,
) -> IVTrace:
    """Integrate a model along a waveform with the classical 4-stage
    Runge-Kutta scheme.

    The drive is treated as piecewise linear between samples, the state
    is clamped to [0, 1] after every step, and any non-finite state or
    current aborts with the offending step index.  Currents are recorded
    at sample times from the pre-step state.
    """
    if model.state_dim != 1:
        raise ConfigError("the fixed-step engine only supports scalar-state models")
    if check_amplitude and waveform.sweep_amplitude is not None:
        need = model.min_sweep_amplitude()
        pos, neg = waveform.sweep_amplitude
        if min(pos, neg) <= need:
            raise ConfigError(
                f"sweep amplitude ({pos}, {neg}) does not clear the "
                f"{model.family} switching threshold {need}"
            )

    if initial_state is None:
        s = float(model.initial_state()[0])
    else:
        arr = np.asarray(initial_state, dtype=float).reshape(-1)
        if arr.size != 1:
            raise ConfigError(f"initial state must have 1 component, got {arr.size}")
        s = float(arr[0])
    if not 0.0 <= s <= 1.0:
        raise ConfigError(f"initial state {s} outside [0, 1]")

    t = waveform.t
    v = waveform.v
    n = len(waveform)
    h = waveform.dt
    i_out = np.empty(n)
    s_out = np.empty((n, 1))

    rate = model._rate
    current = model._current
    try:
        for k in range(n - 1):
            vk = v[k]
            vk1 = v[k + 1]
            vm = 0.5 * (vk + vk1)
            ik = current(vk, s)
            if not (math.isfinite(ik) and math.isfinite(s)):
                raise InstabilityError(k)
            i_out[k] = ik
            s_out[k, 0] = s
            r1 = rate(vk, s)
            r2 = rate(vm, s + 0.5 * h * r1)
            r3 = rate(vm, s + 0.5 * h * r2)
            r4 = rate(vk1, s + h * r3)
            s = s + h / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4)
            if not math.isfinite(s):
                raise InstabilityError(k)
            s = 0.0 if s < 0.0 else (1.0 if s > 1.0 else s)
        k = n - 1
        ik = current(v[k], s)
        if not math.isfinite(ik):
            raise InstabilityError(k)
        i_out[k] = ik
        s_out[k, 0] = s
    except OverflowError as exc:
        raise InstabilityError(k, f"overflow: {exc}") from exc

    t0 = 0
    for index, label in waveform.markers:
        if label == END_OF_INIT:
            t0 = max(t0, index + 1)
    if t0 >= n:
        raise ConfigError("initialization marker leaves no samples to analyze")

    return IVTrace(t=t.copy(), v=v.copy(), i=i_out, state=s_out, t0_index=t0)
