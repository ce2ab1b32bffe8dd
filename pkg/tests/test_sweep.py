"""Waveform construction and the fixed-step integrator."""

import math

import numpy as np
import pytest

from memsim import (
    ConfigError,
    InstabilityError,
    IVTrace,
    Waveform,
    build_model,
    default_sweep,
    hold,
    make_initialization,
    make_sweep,
    simulate,
)
from memsim.sweep import END_OF_INIT, half_sweep


def test_coarsest_sweep_samples():
    wf = make_sweep(1.0, 1.0, 4.0, 1, 1.0)
    assert np.array_equal(wf.v, [0.0, 1.0, 0.0, -1.0, 0.0])
    assert np.array_equal(wf.t, [0.0, 1.0, 2.0, 3.0, 4.0])


def test_asymmetric_amplitudes():
    wf = make_sweep(2.0, 1.0, 4.0, 1, 0.5)
    assert wf.v.max() == pytest.approx(2.0)
    assert wf.v.min() == pytest.approx(-1.0)
    assert wf.v[0] == 0.0
    assert wf.v[-1] == 0.0


def test_two_cycle_sample_count_and_boundary():
    wf = make_sweep(1.0, 1.0, 4.0, 2, 0.5)
    assert len(wf) == 17
    assert wf.v[8] == 0.0  # cycle boundary returns to zero


def test_sweep_peaks_hit_once_per_cycle():
    wf = make_sweep(1.0, 1.0, 2.0, 3, 1e-3)
    assert np.sum(wf.v == 1.0) == 3
    assert np.sum(wf.v == -1.0) == 3


@pytest.mark.parametrize(
    "args",
    [
        (0.0, 1.0, 4.0, 1, 0.5),
        (1.0, -1.0, 4.0, 1, 0.5),
        (1.0, 1.0, 1.0, 1, 0.5),  # period shorter than 4 dt
        (1.0, 1.0, 4.0, 0, 0.5),
        (1.0, 1.0, 4.0, 1, 0.0),
    ],
)
def test_bad_sweep_arguments(args):
    with pytest.raises(ConfigError):
        make_sweep(*args)


def test_half_sweep_shape():
    wf = half_sweep(1.0, 1.0, 0.25)
    assert np.allclose(wf.v, [0.0, 0.5, 1.0, 0.5, 0.0])
    down = half_sweep(-2.0, 1.0, 0.25)
    assert down.v.min() == pytest.approx(-2.0)
    assert down.v[0] == 0.0 and down.v[-1] == 0.0


def test_half_sweep_rejects_zero_peak():
    with pytest.raises(ConfigError):
        half_sweep(0.0, 1.0, 0.1)


def test_hold_is_constant():
    wf = hold(0.3, 1.0, 0.5)
    assert len(wf) == 3
    assert np.all(wf.v == 0.3)


def test_initialization_default_shape():
    wf = make_initialization(0.0, 1.0, 0.1)
    assert len(wf) == 11
    assert np.all(wf.v == 0.0)
    assert wf.markers == ((10, END_OF_INIT),)


def test_initialization_negative_hold():
    wf = make_initialization(-2.0, 0.5, 0.1)
    assert len(wf) == 6
    assert np.all(wf.v == -2.0)
    assert wf.markers == ((5, END_OF_INIT),)


def test_concat_shifts_markers_and_time():
    init = make_initialization(0.0, 1.0, 0.1)
    sweep = make_sweep(1.0, 1.0, 4.0, 1, 0.1)
    wf = init.concat(sweep)
    assert len(wf) == len(init) + len(sweep)
    assert wf.markers == ((10, END_OF_INIT),)
    assert np.all(np.diff(wf.t) > 0)
    assert wf.dt == pytest.approx(0.1)


def test_concat_rejects_step_mismatch():
    with pytest.raises(ConfigError):
        hold(0.0, 1.0, 0.1).concat(hold(0.0, 1.0, 0.2))


def test_waveform_validation():
    with pytest.raises(ConfigError):
        Waveform(t=np.array([0.0, 1.0, 1.5]), v=np.zeros(3))  # nonuniform
    with pytest.raises(ConfigError):
        Waveform(t=np.array([0.0]), v=np.array([0.0]))
    with pytest.raises(ConfigError):
        Waveform(t=np.array([0.0, 1.0]), v=np.zeros(2), markers=((5, "x"),))


def test_trace_validation():
    with pytest.raises(ConfigError):
        IVTrace(t=np.array([0.0, 1.0]), v=np.zeros(3), i=np.zeros(2))
    with pytest.raises(ConfigError):
        IVTrace(t=np.array([0.0, 1.0]), v=np.zeros(2), i=np.zeros(2), t0_index=7)


def test_t0_index_equals_initialization_length():
    model = build_model("drift")
    init = make_initialization(0.0, 1.0, 1e-3)
    sweep = make_sweep(1.0, 1.0, 2.0, 1, 1e-3)
    trace = simulate(model, init.concat(sweep))
    assert trace.t0_index == len(init)
    assert trace.analysis_slice() == slice(len(init), len(trace))


def test_frozen_state_has_no_hysteresis():
    model = build_model("drift", mobility=0.0, tau_ret=math.inf)
    trace = simulate(model, make_sweep(1.0, 1.0, 2.0, 1, 1e-3))
    r = (
        model.params.r_on * model.params.initial_state
        + model.params.r_off * (1.0 - model.params.initial_state)
    )
    assert np.array_equal(trace.i, trace.v / r)
    # rising and falling branch currents coincide at equal drive, up to the
    # one-ulp wobble in the mirrored voltage samples
    quarter = (len(trace) - 1) // 4
    up = trace.i[:quarter + 1]
    down = trace.i[2 * quarter:quarter - 1:-1]
    assert np.allclose(up, down, rtol=1e-12, atol=0.0)


def test_pure_resistor_limit_exact():
    model = build_model(
        "filamentary",
        k_set=0.0,
        k_reset=0.0,
        initial_state=1.0,
        tau_ret=math.inf,
    )
    trace = simulate(model, make_sweep(1.0, 1.0, 2.0, 1, 1e-3))
    assert np.array_equal(trace.i, model.params.g_on * trace.v)


def test_halving_dt_barely_moves_barrier_currents():
    model = build_model("barrier")
    sw = default_sweep("barrier")
    coarse = simulate(model, sw.build())
    fine = simulate(
        model,
        make_sweep(sw.v_max_pos, sw.v_max_neg, sw.period, sw.cycles, sw.dt / 2.0),
    )
    rel = np.max(np.abs(coarse.i - fine.i[::2])) / np.max(np.abs(coarse.i))
    assert rel < 1e-6


def test_rk4_self_convergence_order_on_smooth_family():
    # with dt dividing the quarter period, the triangle kinks land on step
    # boundaries and each step integrates a smooth piece
    model = build_model("drift")
    sw = default_sweep("drift")

    def states(dt):
        wf = make_sweep(sw.v_max_pos, sw.v_max_neg, sw.period, sw.cycles, dt)
        return simulate(model, wf).state[:, 0]

    s0, s1, s2 = states(0.05), states(0.025), states(0.0125)
    err_coarse = np.max(np.abs(s0 - s1[::2]))
    err_fine = np.max(np.abs(s1 - s2[::2]))
    assert math.log2(err_coarse / err_fine) >= 3.0


def test_simulate_is_deterministic():
    model = build_model("ferroelectric")
    wf = default_sweep("ferroelectric").build()
    a = simulate(model, wf)
    b = simulate(model, wf)
    assert np.array_equal(a.i, b.i)
    assert np.array_equal(a.state, b.state)


def test_state_stays_clamped(family_traces):
    for family, (_, trace) in family_traces.items():
        s = trace.state[:, 0]
        assert np.all((s >= 0.0) & (s <= 1.0)), family


def test_current_recorded_from_prestep_state():
    model = build_model("drift")
    wf = make_sweep(1.0, 1.0, 2.0, 1, 1e-3)
    trace = simulate(model, wf)
    s0 = model.initial_state()
    assert trace.state[0, 0] == s0[0]
    assert trace.i[0] == model.current(wf.v[0], s0)


def test_initial_state_override():
    model = build_model("drift")
    wf = make_sweep(1.0, 1.0, 2.0, 1, 1e-3)
    trace = simulate(model, wf, initial_state=np.array([0.7]))
    assert trace.state[0, 0] == 0.7
    with pytest.raises(ConfigError):
        simulate(model, wf, initial_state=np.array([1.5]))
    with pytest.raises(ConfigError):
        simulate(model, wf, initial_state=np.array([0.1, 0.2]))


def test_sweep_below_threshold_rejected():
    model = build_model("barrier")
    weak = make_sweep(0.5, 0.5, 2.0, 1, 1e-3)
    with pytest.raises(ConfigError, match="threshold"):
        simulate(model, weak)
    trace = simulate(model, weak, check_amplitude=False)
    assert len(trace) == len(weak)


def test_instability_names_the_step():
    # a tiny thermal voltage overflows the exponential conduction law
    model = build_model("ferroelectric", v_t=0.001)
    wf = default_sweep("ferroelectric").build()
    with pytest.raises(InstabilityError, match="integration step") as info:
        simulate(model, wf)
    assert info.value.step >= 0
