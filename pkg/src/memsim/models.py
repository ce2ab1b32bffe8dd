"""Behavioral device models with a shared state-space contract.

Every family exposes the same two maps over a normalized internal state
vector ``s`` in [0, 1]^k: a read-out ``current(v, s)`` and an evolution
law ``state_rate(v, s)``.  Models are pure functions of (voltage, state);
time stepping, clamping, and stability checks live in the engine.

All built-in families are scalar (k = 1).  The hot path works on plain
floats through the underscore methods; the public vector API wraps them
so callers never depend on k = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import ClassVar

import numpy as np

from .errors import ConfigError

__all__ = [
    "FAMILIES",
    "BarrierModel",
    "BarrierParams",
    "DriftModel",
    "DriftParams",
    "FerroelectricModel",
    "FerroelectricParams",
    "MemristorModel",
    "ThresholdModel",
    "ThresholdParams",
    "make_model",
    "model_current",
    "model_state_rate",
    "param_class",
]


def _sigmoid(x: float) -> float:
    # overflow-safe logistic: exp argument is never positive
    if x >= 0.0:
        z = math.exp(-x)
        return 1.0 / (1.0 + z)
    z = math.exp(x)
    return z / (1.0 + z)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _check_common(tau_ret: float, initial_state: float) -> None:
    _require(tau_ret > 0.0, f"tau_ret must be positive, got {tau_ret}")
    _require(
        0.0 <= initial_state <= 1.0,
        f"initial_state must lie in [0, 1], got {initial_state}",
    )


@dataclass(frozen=True)
class DriftParams:
    """Ionic-drift resistor pair: state is the low-resistance fraction."""

    r_on: float
    r_off: float
    mobility: float
    thickness: float
    window_p: int
    tau_ret: float
    initial_state: float

    def __post_init__(self) -> None:
        _require(self.r_on > 0.0, f"r_on must be positive, got {self.r_on}")
        _require(
            self.r_off > self.r_on,
            f"r_off must exceed r_on, got r_off={self.r_off} r_on={self.r_on}",
        )
        # zero mobility is legal: it freezes the state and leaves a resistor
        _require(self.mobility >= 0.0, f"mobility must be nonnegative, got {self.mobility}")
        _require(self.thickness > 0.0, f"thickness must be positive, got {self.thickness}")
        _require(
            isinstance(self.window_p, int) and self.window_p >= 1,
            f"window_p must be an integer >= 1, got {self.window_p}",
        )
        _check_common(self.tau_ret, self.initial_state)


@dataclass(frozen=True)
class ThresholdParams:
    """Voltage-gated conductance mixer used by the abrupt and gradual families."""

    g_on: float
    g_off: float
    v_set: float
    v_reset: float
    delta_v: float
    k_set: float
    k_reset: float
    tau_ret: float
    initial_state: float

    def __post_init__(self) -> None:
        _require(self.g_off > 0.0, f"g_off must be positive, got {self.g_off}")
        _require(
            self.g_on > self.g_off,
            f"g_on must exceed g_off, got g_on={self.g_on} g_off={self.g_off}",
        )
        _require(self.v_set > 0.0, f"v_set must be positive, got {self.v_set}")
        _require(self.v_reset > 0.0, f"v_reset must be positive, got {self.v_reset}")
        _require(self.delta_v > 0.0, f"delta_v must be positive, got {self.delta_v}")
        # zero switching rates are legal: they freeze the state
        _require(self.k_set >= 0.0, f"k_set must be nonnegative, got {self.k_set}")
        _require(self.k_reset >= 0.0, f"k_reset must be nonnegative, got {self.k_reset}")
        _check_common(self.tau_ret, self.initial_state)


@dataclass(frozen=True)
class FerroelectricParams:
    """Polarization-switching capacitor with a polarization-controlled leak."""

    v_c: float
    v_sat_width: float
    gate_width: float
    k_switch: float
    c_sw: float
    g_on: float
    g_off: float
    v_t: float
    tau_ret: float
    initial_state: float

    def __post_init__(self) -> None:
        _require(self.v_c > 0.0, f"v_c must be positive, got {self.v_c}")
        _require(self.v_sat_width > 0.0, f"v_sat_width must be positive, got {self.v_sat_width}")
        _require(self.gate_width > 0.0, f"gate_width must be positive, got {self.gate_width}")
        _require(self.k_switch >= 0.0, f"k_switch must be nonnegative, got {self.k_switch}")
        _require(self.c_sw > 0.0, f"c_sw must be positive, got {self.c_sw}")
        _require(self.g_off > 0.0, f"g_off must be positive, got {self.g_off}")
        _require(
            self.g_on > self.g_off,
            f"g_on must exceed g_off, got g_on={self.g_on} g_off={self.g_off}",
        )
        _require(self.v_t > 0.0, f"v_t must be positive, got {self.v_t}")
        _check_common(self.tau_ret, self.initial_state)


@dataclass(frozen=True)
class BarrierParams:
    """Trap-filling barrier with polarity-dependent conductance readout."""

    g_hi: float
    g_lo: float
    v_th: float
    v_w: float
    k_up: float
    k_dn: float
    tau_ret: float
    initial_state: float

    def __post_init__(self) -> None:
        _require(self.g_lo > 0.0, f"g_lo must be positive, got {self.g_lo}")
        _require(
            self.g_hi > self.g_lo,
            f"g_hi must exceed g_lo, got g_hi={self.g_hi} g_lo={self.g_lo}",
        )
        _require(self.v_th > 0.0, f"v_th must be positive, got {self.v_th}")
        _require(self.v_w > 0.0, f"v_w must be positive, got {self.v_w}")
        _require(self.k_up >= 0.0, f"k_up must be nonnegative, got {self.k_up}")
        _require(self.k_dn >= 0.0, f"k_dn must be nonnegative, got {self.k_dn}")
        _check_common(self.tau_ret, self.initial_state)


class MemristorModel:
    """Common vector API over the scalar fast path.

    Subclasses implement ``_current`` and ``_rate`` on floats.  ``s`` is
    clamped to [0, 1] by the engine, so models may assume it in range.
    """

    family: ClassVar[str]
    state_dim: ClassVar[int] = 1

    def __init__(self, params):
        self.params = params

    def current(self, v: float, s: np.ndarray) -> float:
        """Terminal current at drive voltage ``v`` and state ``s``."""
        return self._current(float(v), float(s[0]))

    def state_rate(self, v: float, s: np.ndarray) -> np.ndarray:
        """Time derivative of the state vector at (``v``, ``s``)."""
        return np.array([self._rate(float(v), float(s[0]))])

    def initial_state(self) -> np.ndarray:
        return np.array([self.params.initial_state])

    def min_sweep_amplitude(self) -> float:
        """Smallest sweep peak that can actually move the state.

        Zero means the family has no threshold to clear.
        """
        return 0.0

    def _current(self, v: float, s: float) -> float:
        raise NotImplementedError

    def _rate(self, v: float, s: float) -> float:
        raise NotImplementedError


class DriftModel(MemristorModel):
    """Two-resistor series device driven by charge flow.

    The state is the fraction of the device in the low-resistance phase.
    Its growth rate is proportional to current, shaped by a boundary
    window that freezes motion at both ends of the range.
    """

    family = "drift"

    def _resistance(self, s: float) -> float:
        p = self.params
        return p.r_on * s + p.r_off * (1.0 - s)

    def _current(self, v: float, s: float) -> float:
        return v / self._resistance(s)

    def _rate(self, v: float, s: float) -> float:
        p = self.params
        i = v / self._resistance(s)
        window = 1.0 - (2.0 * s - 1.0) ** (2 * p.window_p)
        return p.mobility * p.r_on / (p.thickness * p.thickness) * i * window - s / p.tau_ret


class ThresholdModel(MemristorModel):
    """Conductance mixer with logistic set/reset gates.

    Positive drive beyond ``v_set`` grows the state toward 1, negative
    drive beyond ``v_reset`` shrinks it toward 0; between the thresholds
    both gates are exponentially shut and only retention decay acts.
    The abrupt and gradual families differ only in their parameter sets.
    """

    family = "threshold"

    def _conductance(self, s: float) -> float:
        p = self.params
        return s * p.g_on + (1.0 - s) * p.g_off

    def _current(self, v: float, s: float) -> float:
        return self._conductance(s) * v

    def _rate(self, v: float, s: float) -> float:
        p = self.params
        set_gate = _sigmoid((v - p.v_set) / p.delta_v)
        reset_gate = _sigmoid((-v - p.v_reset) / p.delta_v)
        return (
            p.k_set * set_gate * (1.0 - s)
            - p.k_reset * reset_gate * s
            - s / p.tau_ret
        )

    def min_sweep_amplitude(self) -> float:
        return max(self.params.v_set, self.params.v_reset)


class AbruptThresholdModel(ThresholdModel):
    family = "filamentary"


class GradualThresholdModel(ThresholdModel):
    family = "structural"


class FerroelectricModel(MemristorModel):
    """Polarization state with displacement plus leakage readout.

    The state relaxes toward a drive-dependent saturation level whenever
    |v| clears the coercive gate.  Current carries a displacement term
    proportional to the switching rate, so it is generally nonzero at
    v = 0 while switching: the loop is not pinched at the origin.  The
    leak is exponential in voltage with an ohmic small-signal limit.
    """

    family = "ferroelectric"

    def _saturation(self, v: float) -> float:
        p = self.params
        center = math.copysign(p.v_c, v) if v != 0.0 else p.v_c
        return 0.5 * (1.0 + math.tanh((v - center) / p.v_sat_width))

    def _gate(self, v: float) -> float:
        p = self.params
        return _sigmoid((abs(v) - p.v_c) / p.gate_width)

    def _switch_rate(self, v: float, s: float) -> float:
        p = self.params
        return p.k_switch * (self._saturation(v) - s) * self._gate(v)

    def _current(self, v: float, s: float) -> float:
        p = self.params
        g = p.g_off + (p.g_on - p.g_off) * s
        conduction = g * p.v_t * math.sinh(v / p.v_t)
        return conduction + p.c_sw * self._switch_rate(v, s)

    def _rate(self, v: float, s: float) -> float:
        return self._switch_rate(v, s) - s / self.params.tau_ret

    def min_sweep_amplitude(self) -> float:
        return self.params.v_c


class BarrierModel(MemristorModel):
    """Trap-filling barrier whose conductance labels swap with polarity.

    The filled fraction chases a polarity-split target: positive drive
    can only raise it, negative drive can only lower it, and small
    voltages of either sign leave it untouched apart from retention.
    Read-out is piecewise ohmic with the high/low conductance roles
    exchanged between polarities, so a written device conducts strongly
    in one direction and weakly in the other.
    """

    family = "barrier"

    def _target_up(self, v: float) -> float:
        p = self.params
        return 0.5 * (1.0 + math.tanh((v - p.v_th) / p.v_w))

    def _target_down(self, v: float) -> float:
        p = self.params
        return 0.5 * (1.0 - math.tanh((-v - p.v_th) / p.v_w))

    def _current(self, v: float, s: float) -> float:
        p = self.params
        if v >= 0.0:
            g = s * p.g_hi + (1.0 - s) * p.g_lo
        else:
            g = s * p.g_lo + (1.0 - s) * p.g_hi
        return g * v

    def _rate(self, v: float, s: float) -> float:
        p = self.params
        if v > 0.0:
            target = self._target_up(v)
            if target > s:
                return p.k_up * (target - s)
        elif v < 0.0:
            target = self._target_down(v)
            if target < s:
                return p.k_dn * (target - s)
        return -s / p.tau_ret

    def min_sweep_amplitude(self) -> float:
        return self.params.v_th


FAMILIES: dict[str, type[MemristorModel]] = {
    "drift": DriftModel,
    "filamentary": AbruptThresholdModel,
    "structural": GradualThresholdModel,
    "ferroelectric": FerroelectricModel,
    "barrier": BarrierModel,
}

_PARAM_CLASSES: dict[str, type] = {
    "drift": DriftParams,
    "filamentary": ThresholdParams,
    "structural": ThresholdParams,
    "ferroelectric": FerroelectricParams,
    "barrier": BarrierParams,
}


def param_class(family: str) -> type:
    """Parameter dataclass used by ``family``."""
    try:
        return _PARAM_CLASSES[family]
    except KeyError:
        known = ", ".join(sorted(FAMILIES))
        raise ConfigError(f"unknown model family {family!r} (known: {known})") from None


def make_model(family: str, params) -> MemristorModel:
    """Instantiate ``family`` with an already-built parameter set."""
    cls = FAMILIES.get(family)
    if cls is None:
        known = ", ".join(sorted(FAMILIES))
        raise ConfigError(f"unknown model family {family!r} (known: {known})")
    expected = _PARAM_CLASSES[family]
    if not isinstance(params, expected):
        raise ConfigError(
            f"family {family!r} expects {expected.__name__}, got {type(params).__name__}"
        )
    return cls(params)


def params_from_dict(family: str, values: dict) -> object:
    """Build the parameter set for ``family`` from a plain mapping.

    Unknown keys are rejected by name so config typos fail loudly.
    """
    cls = param_class(family)
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(
            f"unknown parameter(s) for family {family!r}: {', '.join(unknown)}"
        )
    missing = sorted(known - set(values))
    if missing:
        raise ConfigError(
            f"missing parameter(s) for family {family!r}: {', '.join(missing)}"
        )
    kwargs = dict(values)
    if "window_p" in kwargs:
        p = kwargs["window_p"]
        if isinstance(p, float):
            if p != int(p):
                raise ConfigError(f"window_p must be an integer, got {p}")
            kwargs["window_p"] = int(p)
    return cls(**kwargs)


def model_current(family: str, params, v: float, s: np.ndarray) -> float:
    """Functional form of :meth:`MemristorModel.current`."""
    return make_model(family, params).current(v, s)


def model_state_rate(family: str, params, v: float, s: np.ndarray) -> np.ndarray:
    """Functional form of :meth:`MemristorModel.state_rate`."""
    return make_model(family, params).state_rate(v, s)
