from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from periodtwo.gluing import (
    BranchFlip,
    DegenerateError,
    InconsistentError,
    build_alphabet,
    crossing_events,
    find_anchor,
    find_crossing,
    glue,
    label_branches,
    labeling_from_seed,
    reduce_to_period_two,
    reduce_with_trace,
    splice,
)
from periodtwo.scenario import DEFAULT_GRID_STEP, PeriodicTrajectory, residual_check
from periodtwo.symbolic import Periodic, Window, random_window_sequence
from periodtwo.synthetic import INSTANCES, amplitude_trajectory, synthetic_instance

H = DEFAULT_GRID_STEP


def sampled(fn, period, h=H):
    t = h * np.arange(int(round(period / h)))
    return PeriodicTrajectory(fn(t), period)


def test_builtin_anchor(seed):
    assert find_anchor(seed) == 1.5


def test_anchor_of_shifted_seed(seed):
    assert find_anchor(seed.shifted(1.0)) == 0.5


def test_anchor_of_zero_seed():
    with pytest.raises(DegenerateError, match="1-periodic"):
        find_anchor(PeriodicTrajectory(np.zeros(2048), 2.0))


def test_anchor_of_one_periodic_seed():
    x = sampled(lambda t: np.sin(np.pi * t) ** 2, 2.0)
    with pytest.raises(DegenerateError):
        find_anchor(x)


def test_builtin_crossing(seed):
    assert find_crossing(seed, 1.5) == 2.0


@pytest.mark.parametrize("t1", [0.0, 0.3, 1.7, -2.25])
def test_linear_crossing(t1):
    xi = find_crossing(lambda t: np.asarray(t), t1, y=lambda t: np.full(np.shape(t), t1 + 0.5), h=H)
    assert xi == pytest.approx(t1 + 0.5, abs=1e-12)


def test_off_grid_crossing_is_bisected():
    c = 0.123456789
    xi = find_crossing(lambda t: np.asarray(t), 0.0, y=lambda t: np.full(np.shape(t), c), h=H)
    assert abs(xi - c) <= 1e-12


def test_no_crossing_is_inconsistent():
    with pytest.raises(InconsistentError):
        find_crossing(lambda t: np.asarray(t) + 5.0, 0.0, y=lambda t: np.zeros(np.shape(t)), h=H)


def test_contact_interval_rejected():
    g = lambda t: np.clip(np.abs(np.asarray(t) - 0.5) - 0.1, 0, None)  # noqa: E731
    with pytest.raises(DegenerateError, match="contact"):
        crossing_events(g, 0.0, 1.0, H, 1e-12)


def test_touch_is_reported_once():
    g = lambda t: (np.asarray(t) - 0.25) ** 2  # noqa: E731
    assert crossing_events(g, 0.0, 1.0, H, 1e-12) == [0.25]


def test_builtin_labeling(labeling, seed):
    assert (labeling.t1, labeling.xi, labeling.p, labeling.q, labeling.s1) == (1.5, 2.0, 0.0, 1.0, 2.5)
    assert labeling.upper(0) == "x" and labeling.upper(1) == "y"
    # the up branch on interval i exceeds the other one at t1 + i + 1
    for i in range(-4, 5):
        t = labeling.t1 + i + 1
        up, down = (seed(t), seed(t + 1)) if labeling.upper(i) == "x" else (seed(t + 1), seed(t))
        assert up > down
    assert labeling.to_json() == {"t1": 1.5, "xi": 2.0, "p": 0.0, "q": 1.0, "s1": 2.5, "up_parity": 0}


def test_labeling_requires_normalised_anchor(seed):
    with pytest.raises(ValueError):
        label_branches(seed, 0.5, 1.0)


def test_constant_zero_glue_is_one_periodic(labeling):
    w = glue(labeling, Periodic("0"))
    t = H * np.arange(-4096, 4097)
    assert np.array_equal(w(t + 1.0), w(t))


def test_alternating_glue(labeling):
    w = glue(labeling, Periodic("01"))
    t = H * np.arange(-4096, 4097)
    assert np.array_equal(w(t + 2.0), w(t))
    assert w(labeling.s1) == 1.0 and w(labeling.s1 + 1) == 0.0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_anchor_contract(seed_):
    lab = labeling_from_seed(_seed())
    eta = random_window_sequence(np.random.default_rng(seed_))
    w = glue(lab, eta)
    i = np.arange(-20, 21)
    got = w(lab.s1 + i)
    expected = np.where(eta.at(i) == 0, lab.q, lab.p)
    assert np.array_equal(got, expected)


def _seed():
    from periodtwo.scenario import builtin_bump_scenario, materialize_seed

    return materialize_seed(builtin_bump_scenario())


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_knot_continuity(seed_):
    lab = labeling_from_seed(_seed())
    w = glue(lab, random_window_sequence(np.random.default_rng(seed_)))
    assert max(w.knot_jump(i) for i in range(-20, 21)) == 0.0


@pytest.mark.parametrize("k", range(1, 9))
def test_periodicity_transfer(labeling, k):
    t = H * np.arange(0, 4 * k * 1024 + 1) - 2.0 * k
    for bits in product("01", repeat=k):
        w = glue(labeling, Periodic("".join(bits)))
        assert np.max(np.abs(w(t + k) - w(t))) <= 1e-14


def test_glued_residual(scenario, labeling):
    rng = np.random.default_rng(2)
    for _ in range(20):
        assert residual_check(glue(labeling, random_window_sequence(rng)), scenario) <= 1e-3


@pytest.mark.parametrize("t_c", [0.25, 2.5, -1.75])
def test_corrupted_branch_detected(scenario, labeling, t_c):
    w = glue(labeling, Window("0110101"))
    assert residual_check(BranchFlip(w, t_c), scenario) >= 0.1


def test_sample_window(labeling):
    t, w = glue(labeling, Periodic("01")).sample((-4, 4))
    assert t.size == 8193 and t[0] == -4.0 and t[-1] == 4.0
    assert w[np.searchsorted(t, 2.5)] == 1.0


# --- cancellation ---------------------------------------------------------------


def test_splice_piecewise_linear_period_four():
    # tent values 0, 1, 0, 2 at the integers, linear in between
    vals = np.array([0.0, 1.0, 0.0, 2.0])
    t = H * np.arange(4096)
    k = np.floor(t).astype(int)
    u = PeriodicTrajectory(vals[k] + (t - k) * (vals[(k + 1) % 4] - vals[k]), 4.0)
    v = splice(u, 0, 2, 0.0)
    assert v.period == 2.0
    assert v.is_periodic_with(2.0)
    # left of the junction v agrees with the shifted tail of u
    s = H * np.arange(2048)
    assert np.array_equal(v(s), u(s + 2.0))


def test_splice_identity_on_builtin(seed):
    u = seed.repeated(2)
    v = splice(u, 0, 2, 2.0)
    t = H * np.arange(-2048, 2048)
    assert v.period == 2.0
    assert np.array_equal(v(t), seed(t))


def test_splice_precondition(seed):
    u = seed.repeated(2)
    with pytest.raises(ValueError):
        splice(u, 1, 1, 2.0)
    with pytest.raises(ValueError):
        splice(u, 0, 4, 2.0)


def test_splice_junction_mismatch(seed):
    with pytest.raises(InconsistentError):
        splice(seed.repeated(2), 0, 1, 1.5)


def _is_two_not_one(v):
    t = v.t_base + H * np.arange(4096)
    two = np.array_equal(v(t + 2.0), v(t))
    one = np.max(np.abs(v(t + 1.0) - v(t))) > 1e-6
    return two and one


@pytest.mark.parametrize("name", sorted(INSTANCES))
def test_reduce_instances(scenario, name):
    v, trace = reduce_with_trace(synthetic_instance(name))
    assert v.period == 2.0
    assert _is_two_not_one(v)
    assert residual_check(v, scenario, window=(v.t_base, v.t_base + 2.0)) <= 1e-3
    assert all(r.junction_residual <= 1e-9 for r in trace)


def test_reduce_three_is_one_splice():
    _, trace = reduce_with_trace(synthetic_instance("m3"))
    assert [r.kind for r in trace] == ["bolzano"]


def test_reduce_five_with_coincidence():
    _, trace = reduce_with_trace(synthetic_instance("m5"))
    assert [r.kind for r in trace] == ["dedupe", "bolzano"]
    assert (trace[0].period_before, trace[0].period_after) == (5, 3)


def test_reduce_rejects_period_two(seed):
    with pytest.raises(ValueError):
        reduce_to_period_two(seed)


def test_reduce_rejects_one_periodic():
    with pytest.raises(DegenerateError):
        reduce_to_period_two(amplitude_trajectory((0.5, 0.5, 0.5)))


@settings(max_examples=20, deadline=None)
@given(st.lists(st.sampled_from([0.1, 0.3, 0.5, 0.7, 0.9, 1.0]), min_size=3, max_size=6))
def test_reduce_random_amplitudes(amps):
    u = amplitude_trajectory(amps)
    if len(set(amps)) == 1:
        with pytest.raises(DegenerateError):
            reduce_to_period_two(u)
        return
    assert _is_two_not_one(reduce_to_period_two(u))


# --- multi-crossing alphabet ----------------------------------------------------


def test_builtin_alphabet(seed):
    alpha = build_alphabet(seed, 1.5)
    assert alpha.crossings == (2.0,)
    assert alpha.strings() == ["0", "1"]
    assert [alpha.to_symbol(s) for s in alpha.strings()] == [0, 1]


def test_two_crossing_alphabet():
    # o(t + 1) = -o(t), so x - x(. + 1) = 2o: a sign change at 1/2 and a touch at 3/4
    x = sampled(lambda t: -np.cos(np.pi * t) * np.sin(np.pi * (t - 0.75)) ** 2, 2.0)
    assert x(1.0) > x(0.0)
    alpha = build_alphabet(x, 0.0)
    assert alpha.crossings == (0.5, 0.75)
    assert {s: alpha.to_symbol(s) for s in alpha.strings()} == {"00": 0, "01": 1, "10": 2, "11": 3}
    assert all(alpha.to_symbol(alpha.to_string(k)) == k for k in range(4))


def test_alphabet_rejects_bad_strings(seed):
    alpha = build_alphabet(seed, 1.5)
    with pytest.raises(ValueError):
        alpha.to_symbol("01")
    with pytest.raises(ValueError):
        alpha.to_string(2)
