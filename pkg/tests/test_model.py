import pytest
from hypothesis import given
from hypothesis import strategies as st

from cdpolya.model import (
    BLUE,
    WHITE,
    IndivisibleInitialWhite,
    ModelParams,
    NonPositiveAddition,
    NonPositiveDifferential,
    ReplacementMatrix,
    UntenableDraw,
    UrnState,
    apply_draw,
    initial_state,
    total_balls,
    validate,
)


def test_minimal_tenable_configuration():
    validate(ModelParams(a=1, delta=1, w0=0))


def test_indivisible_initial_white_rejected():
    # from w0=3 with a=2, one white draw reaches white=1 and a second is stuck
    with pytest.raises(IndivisibleInitialWhite):
        validate(ModelParams(a=2, delta=1, w0=3))


def test_nonpositive_differential_rejected():
    with pytest.raises(NonPositiveDifferential):
        validate(ModelParams(a=1, delta=0, w0=1))


def test_nonpositive_addition_rejected():
    with pytest.raises(NonPositiveAddition):
        validate(ModelParams(a=0, delta=1, w0=0))


def test_negative_w0_rejected():
    with pytest.raises(IndivisibleInitialWhite):
        validate(ModelParams(a=1, delta=1, w0=-1))


def test_delta_need_not_divide_a():
    validate(ModelParams(a=2, delta=3, w0=4))


def test_b0_is_derived():
    assert ModelParams(2, 3, 4).b0 == 7
    assert initial_state(ModelParams(2, 3, 4)) == UrnState(4, 7, 0.0)


def test_white_draw_removes_a_of_each():
    assert apply_draw(UrnState(2, 3), WHITE, a=2) == UrnState(0, 1)


def test_blue_draw_adds_a_of_each():
    assert apply_draw(UrnState(0, 1), BLUE, a=2) == UrnState(2, 3)


def test_white_draw_without_supply_is_a_bug():
    with pytest.raises(UntenableDraw):
        apply_draw(UrnState(0, 1), WHITE, a=1)


def test_apply_draw_keeps_time():
    st_after = apply_draw(UrnState(2, 3, time=1.5), BLUE, a=1)
    assert st_after.time == 1.5


def test_unknown_color_rejected():
    with pytest.raises(ValueError):
        apply_draw(UrnState(2, 3), "green", a=1)


@pytest.mark.parametrize(
    "state,expected",
    [
        (UrnState(3, 4), 7),
        (UrnState(0, 3), 3),  # white-depleted: total equals the differential
        (UrnState(5, 8), 13),
    ],
)
def test_total_balls(state, expected):
    assert total_balls(state) == expected
    assert total_balls(state) == 2 * state.white + (state.blue - state.white)


def test_replacement_matrix_rows():
    m = ReplacementMatrix(a=3)
    assert m.entries == ((-3, -3), (3, 3))
    assert m.row(WHITE) == (-3, -3)
    assert m.row(BLUE) == (3, 3)
    # unbalanced scheme: both row sums have magnitude 2a, opposite signs
    assert sum(m.row(WHITE)) == -6
    assert sum(m.row(BLUE)) == 6


small_a = st.integers(min_value=1, max_value=5)
small_delta = st.integers(min_value=1, max_value=5)
small_mult = st.integers(min_value=0, max_value=20)


@given(a=small_a, delta=small_delta, k=small_mult, draws=st.lists(st.booleans(), max_size=60))
def test_draw_sequences_preserve_invariants(a, delta, k, draws):
    params = ModelParams(a, delta, k * a)
    validate(params)
    state = initial_state(params)
    for want_white in draws:
        color = WHITE if (want_white and state.white >= a) else BLUE
        state = apply_draw(state, color, a)
        assert state.blue - state.white == delta
        assert state.white % a == 0
        assert state.white >= 0
        assert total_balls(state) == 2 * state.white + delta


@given(a=small_a, delta=small_delta, k=small_mult)
def test_opposite_draws_cancel(a, delta, k):
    state = UrnState(k * a, k * a + delta)
    roundtrip = apply_draw(apply_draw(state, BLUE, a), WHITE, a)
    assert (roundtrip.white, roundtrip.blue) == (state.white, state.blue)
