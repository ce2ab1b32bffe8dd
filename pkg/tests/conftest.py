"""Shared fixtures.

The default sweeps are the expensive part of the suite, so each family is
simulated and classified once per session and reused everywhere.
"""

import math

import numpy as np
import pytest

from memsim import build_model, classify, default_sweep, family_names, simulate


@pytest.fixture(scope="session")
def family_traces():
    """family -> (model, trace) at packaged defaults."""
    out = {}
    for family in family_names():
        model = build_model(family)
        trace = simulate(model, default_sweep(family).build())
        out[family] = (model, trace)
    return out


@pytest.fixture(scope="session")
def family_reports(family_traces):
    """family -> ClassificationReport for the default run."""
    return {
        family: classify(trace) for family, (_, trace) in family_traces.items()
    }


@pytest.fixture(scope="session")
def resistor_trace():
    """Frozen-state device: zero mobility turns the drift family into a
    plain resistor."""
    model = build_model("drift", mobility=0.0, tau_ret=math.inf)
    trace = simulate(model, default_sweep("drift").build())
    return model, trace


def make_sinusoid_resistor(r=100.0, n=10_000, cycles=3.0, v_amp=1.0):
    """Analytic oracle trace: sinusoidal drive through a fixed resistor."""
    omega = 2.0 * np.pi
    t = np.linspace(0.0, cycles / 1.0, n)
    v = v_amp * np.sin(omega * t)
    i = v / r
    phi_exact = v_amp / omega * (1.0 - np.cos(omega * t))
    q_exact = phi_exact / r
    return t, v, i, phi_exact, q_exact, r
