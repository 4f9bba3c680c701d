import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nevarisk import (
    DegenerateInstitutionError,
    ModelError,
    SystemState,
    ValuationModel,
    book_equity,
    calibrate,
    check_feasibility,
    delta_r,
    internal_values,
    ir_feedback,
    linear_debtrank,
    recovery_debtrank,
    reduced_form,
    spread,
    spreads,
    system_state,
    value_external,
    value_internal,
)

from helpers import random_network, random_state_equities


def state1(E, E0, A, A0, dr=0.0):
    return SystemState(np.array([E], float), np.array([E0], float),
                       np.array([A], float), np.array([A0], float), dr)


ALL_MODELS = [
    linear_debtrank(),
    recovery_debtrank(0.5),
    recovery_debtrank(0.0),
    reduced_form(gamma=1.0, beta=0.5),
    reduced_form(gamma=30.0, beta=0.0, tau=2.0),
    ir_feedback(gamma=20.0, beta=0.5, gamma_sys=0.1, beta_sys=0.5),
    ir_feedback(gamma=5.0, beta=1.0, gamma_sys=0.05, beta_sys=0.0),
]


# spread

def test_spread_zero_at_calibration_point():
    m = reduced_form(gamma=3.0, beta=0.5)
    assert spread(m, 0, state1(10, 10, 100, 100)) == 0.0


@pytest.mark.parametrize("beta", [0.0, 0.3, 1.0])
def test_spread_equals_gamma_when_wiped_out(beta):
    m = reduced_form(gamma=2.5, beta=beta)
    assert spread(m, 0, state1(-5, 10, -1, 100)) == 2.5
    assert spread(m, 0, state1(0, 10, 0, 100)) == 2.5


def test_spread_hand_value():
    # gamma * (1 - 0.5) * (1 - 0.5 * 0.5) = 0.375
    m = reduced_form(gamma=1.0, beta=0.5)
    assert spread(m, 0, state1(5, 10, 50, 100)) == pytest.approx(0.375, abs=1e-15)


def test_spread_recovery_cap():
    # With beta = 0.5 the asset ratio is capped at 1 / beta = 2.
    m = reduced_form(gamma=1.0, beta=0.5)
    assert spread(m, 0, state1(5, 10, 500, 100)) == 0.0


def test_spread_rejects_degenerate_institutions():
    m = reduced_form()
    with pytest.raises(DegenerateInstitutionError):
        spread(m, 0, state1(1, 0, 50, 100))
    with pytest.raises(DegenerateInstitutionError):
        spread(m, 0, state1(1, 10, 50, -1))


def test_spread_not_defined_for_debtrank():
    with pytest.raises(ModelError):
        spread(linear_debtrank(), 0, state1(5, 10, 50, 100))
    np.testing.assert_array_equal(spreads(linear_debtrank(), state1(5, 10, 50, 100)), [0.0])


# delta_r

def test_delta_r_zero_at_calibration_point():
    m = ir_feedback(gamma_sys=0.1)
    st0 = SystemState(np.array([10., 20.]), np.array([10., 20.]),
                      np.array([100., 50.]), np.array([100., 50.]))
    assert delta_r(m, st0) == 0.0


def test_delta_r_hand_value():
    # No positive equity, aggregate assets at 80% of initial:
    # 0.05 * 1 * (1 - 0.5 * 0.8) = 0.03
    m = ir_feedback(gamma_sys=0.05, beta_sys=0.5)
    st0 = SystemState(np.array([-1., 0.]), np.array([10., 30.]),
                      np.array([60., 100.]), np.array([100., 100.]))
    assert delta_r(m, st0) == pytest.approx(0.03, abs=1e-15)


def test_delta_r_zero_for_models_without_feedback():
    st0 = state1(-5, 10, 0, 100)
    for m in (linear_debtrank(), recovery_debtrank(), reduced_form()):
        assert delta_r(m, st0) == 0.0


# value_internal / value_external

@pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.variant)
def test_value_one_at_initial_state(model):
    s = state1(10, 10, 100, 100)
    assert value_internal(model, 0, s) == pytest.approx(1.0, abs=1e-15)
    assert value_external(model, s) == 1.0


def test_linear_value_zero_when_equity_gone():
    assert value_internal(linear_debtrank(), 0, state1(0, 10, 90, 100)) == 0.0


def test_reduced_form_floor_hand_value():
    m = reduced_form(gamma=1.0, beta=1.0, tau=1.0)
    assert value_internal(m, 0, state1(-3, 10, -1, 100)) == pytest.approx(math.exp(-1), abs=1e-15)
    assert math.exp(-1) == pytest.approx(0.3679, abs=5e-5)


def test_recovery_hand_value():
    m = recovery_debtrank(0.5)
    assert value_internal(m, 0, state1(0, 10, 50, 100)) == pytest.approx(0.25, abs=1e-15)


def test_value_external_examples():
    assert value_external(reduced_form(), state1(-3, 10, 0, 100)) == 1.0
    m = ir_feedback()
    assert value_external(m, state1(10, 10, 100, 100)) == 1.0
    assert value_external(m, state1(5, 10, 60, 100, dr=0.03)) == pytest.approx(math.exp(-0.03), abs=1e-15)
    assert math.exp(-0.03) == pytest.approx(0.97045, abs=5e-6)


def test_ir_feedback_uses_rate_in_both_valuations():
    m = ir_feedback(gamma=2.0, beta=0.5, gamma_sys=0.1, beta_sys=0.5, tau=1.5)
    s = state1(5, 10, 50, 100, dr=0.02)
    sp = spread(m, 0, s)
    assert value_internal(m, 0, s) == pytest.approx(math.exp(-(0.02 + sp) * 1.5), rel=1e-15)


# calibration

def test_calibrate_recovery():
    m = calibrate(ValuationModel("recovery-dr", alpha=0.7))
    assert m.calibrated
    assert m.beta == pytest.approx(0.3, abs=1e-15)


def test_calibrate_reduced_form_fixes_alpha():
    raw = ValuationModel("reduced-form", alpha=0.4, beta=0.25, gamma=7.0, tau=2.0)
    m = calibrate(raw)
    assert m.calibrated and m.alpha == 1.0 and m.alpha_sys == 1.0
    assert (m.gamma, m.beta, m.tau) == (7.0, 0.25, 2.0)
    assert not raw.calibrated


def test_calibrate_linear():
    m = calibrate(ValuationModel("linear-dr"))
    assert m.calibrated and m.variant == "linear-dr"


def test_calibrate_array_parameters():
    m = calibrate(ValuationModel("recovery-dr", alpha=[0.2, 0.9]))
    np.testing.assert_allclose(m.beta, [0.8, 0.1])
    m = calibrate(ValuationModel("ir-feedback", alpha=[0.2, 0.9], gamma=[1, 2], alpha_sys=0.3))
    np.testing.assert_array_equal(m.alpha, [1.0, 1.0])
    assert m.alpha_sys == 1.0


@pytest.mark.parametrize("kwargs", [
    dict(variant="recovery-dr", alpha=1.2),
    dict(variant="reduced-form", beta=-0.1),
    dict(variant="reduced-form", gamma=0.0),
    dict(variant="reduced-form", tau=0.0),
    dict(variant="ir-feedback", gamma_sys=-0.01),
    dict(variant="ir-feedback", beta_sys=1.5),
    dict(variant="no-such-model"),
])
def test_invalid_raw_parameters_rejected(kwargs):
    with pytest.raises(ModelError):
        ValuationModel(**kwargs)


def test_uncalibrated_model_rejected():
    raw = ValuationModel("reduced-form", gamma=2.0, beta=0.5)
    with pytest.raises(ModelError, match="calibrated"):
        value_internal(raw, 0, state1(10, 10, 100, 100))


def test_parameter_length_mismatch():
    m = reduced_form(gamma=[1.0, 2.0, 3.0])
    with pytest.raises(ModelError, match="length"):
        spreads(m, state1(5, 10, 50, 100))


def test_with_params_recalibrates_and_checks_names():
    m = recovery_debtrank(0.5).with_params(alpha=0.8)
    assert m.calibrated and m.beta == pytest.approx(0.2)
    with pytest.raises(ModelError):
        reduced_form().with_params(gamma_sys=0.1)


# properties over random networks and states

def _random_states(seed, count=40):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 15))
    net = random_network(rng, n)
    E0 = book_equity(net)
    return net, E0, random_state_equities(rng, E0, count)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 40), st.floats(0, 1), st.floats(0.05, 3),
       st.floats(0, 0.2), st.floats(0, 1))
def test_bounds_and_floor(seed, gamma, beta, tau, gamma_sys, beta_sys):
    net, E0, states = _random_states(seed)
    rf = reduced_form(gamma, beta, tau)
    ir = ir_feedback(gamma, beta, gamma_sys, beta_sys, tau)
    floor = math.exp(-gamma * tau)
    for E in states:
        s = system_state(net, ir, E, E0)
        sp = spreads(ir, s)
        assert np.all(sp >= 0) and np.all(sp <= gamma)
        assert 0.0 <= s.delta_r <= gamma_sys
        v = internal_values(rf, system_state(net, rf, E, E0))
        assert np.all(v >= floor * (1 - 1e-15)) and np.all(v <= 1)
        vi = internal_values(ir, s)
        assert np.all(vi >= 0) and np.all(vi <= 1)
        assert 0.0 <= value_external(ir, s) <= 1.0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_recovery_alpha_one_is_linear_bitwise(seed):
    net, E0, states = _random_states(seed)
    lin, rec = linear_debtrank(), recovery_debtrank(1.0)
    for E in states:
        s = system_state(net, None, E, E0)
        np.testing.assert_array_equal(internal_values(lin, s), internal_values(rec, s))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_first_order_expansion_error(seed, beta):
    # With gamma = tau = 1 and no rate change, exp(-s) is within s**2 / 2 of
    # the linearised valuation 1 - s.
    net, E0, states = _random_states(seed)
    m = reduced_form(1.0, beta, 1.0)
    for E in states:
        s_state = system_state(net, m, E, E0)
        x = spreads(m, s_state)
        v = internal_values(m, s_state)
        assert np.all(np.abs(v - (1 - x)) <= x**2 / 2 + 1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(range(len(ALL_MODELS))))
def test_monotone_in_each_equity_coordinate(seed, which):
    model = ALL_MODELS[which]
    net, E0, states = _random_states(seed, count=10)
    rng = np.random.default_rng(seed + 1)
    for E in states:
        k = int(rng.integers(net.n))
        bump = np.zeros(net.n)
        bump[k] = rng.uniform(0, 1) * E0[k]
        lo = system_state(net, model, E, E0)
        hi = system_state(net, model, E + bump, E0)
        assert np.all(internal_values(model, hi) >= internal_values(model, lo))
        assert value_external(model, hi) >= value_external(model, lo)
        assert np.all(spreads(model, hi) <= spreads(model, lo))
        assert delta_r(model, hi) <= delta_r(model, lo)


def test_calibration_to_machine_precision_on_random_networks():
    rng = np.random.default_rng(5)
    for _ in range(30):
        net = random_network(rng, int(rng.integers(1, 20)))
        n = net.n
        models = ALL_MODELS + [
            recovery_debtrank(rng.uniform(0, 1, n)),
            reduced_form(rng.uniform(0.1, 30, n), rng.uniform(0, 1, n), 1.0),
        ]
        for m in models:
            s = system_state(net, m, book_equity(net))
            assert s.delta_r == 0.0
            np.testing.assert_allclose(internal_values(m, s), 1.0, rtol=0, atol=1e-12)
            np.testing.assert_array_equal(spreads(m, s), 0.0)
            assert value_external(m, s) == 1.0


# feasibility

@pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.variant)
def test_check_feasibility_accepts_all_families(model):
    net = random_network(np.random.default_rng(11), 6)
    report = check_feasibility(model, net)
    assert report.feasible, report.violation
    assert report.pairs_checked > 0


class _Broken:
    def valuate(self, state):
        return np.full(state.n, 1.5), 1.0


class _Decreasing:
    def valuate(self, state):
        return 1.0 - np.clip(state.E / state.E0, 0, 1) * 0.5, 1.0


def test_check_feasibility_flags_range_violation():
    net = random_network(np.random.default_rng(3), 4)
    report = check_feasibility(_Broken(), net)
    assert not report.feasible and "[0, 1]" in report.violation
    assert report.lower is not None


def test_check_feasibility_flags_decreasing_model():
    net = random_network(np.random.default_rng(3), 4)
    report = check_feasibility(_Decreasing(), net)
    assert not report.feasible and "decreases" in report.violation
