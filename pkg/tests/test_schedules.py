import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from duality_lab.pauli import InvalidInput
from duality_lab.schedules import OutOfRange, Schedule, default_dt, random_schedule


def two_step():
    return Schedule([(0.0, [0, 0, 1], [1, 0, 0]), (1.0, [1, 0, 0], [0, 2, 0])], 2.0)


class TestSample:
    def test_constant(self):
        s = Schedule.constant([0.1, 0.2, 0.3], [1, 0, 0], 5.0)
        for t in (0.0, 2.5, 5.0):
            h0, v = s.sample(t)
            np.testing.assert_array_equal(h0, [0.1, 0.2, 0.3])
            np.testing.assert_array_equal(v, [1, 0, 0])

    def test_right_continuous(self):
        h0, v = two_step().sample(1.0)
        np.testing.assert_array_equal(v, [0, 2, 0])

    def test_horizon_is_last_segment(self):
        _, v = two_step().sample(2.0)
        np.testing.assert_array_equal(v, [0, 2, 0])

    @pytest.mark.parametrize("t", [-1e-9, 2.0 + 1e-9, np.nan])
    def test_out_of_range(self, t):
        with pytest.raises(OutOfRange):
            two_step().sample(t)

    def test_piecewise_constant(self):
        s = two_step()
        for a, b in [(0.1, 0.9), (1.0, 1.7)]:
            assert all(np.array_equal(x, y) for x, y in zip(s.sample(a), s.sample(b)))


class TestBounds:
    def test_single_axis(self):
        b = Schedule.constant([0, 0, 1], [1, 0, 0], 1.0).bounds()
        assert (b.v_star, b.v_m, b.h0_m) == (1.0, 4.0, 2.0)

    def test_no_interaction(self):
        b = Schedule.constant([0, 0, 1], [0, 0, 0], 1.0).bounds()
        assert b.v_m == 0 and b.v_star == 0

    def test_max_over_segments(self):
        b = two_step().bounds()
        assert b.v_star == 2.0 and b.v_m == 8.0

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_norm_sandwich(self, seed):
        b = random_schedule(np.random.default_rng(seed), 1.0).bounds()
        assert 4 * b.v_star <= b.v_m + 1e-12
        assert b.v_m <= 4 * np.sqrt(3) * b.v_star + 1e-12
        if b.v_m:
            assert 6 * b.v_star / b.v_m <= 1.5 + 1e-12


class TestPieces:
    def test_split_at_breakpoints(self):
        pieces = list(two_step().pieces(0.5, 1.5))
        assert [(a, b) for a, b, *_ in pieces] == [(0.5, 1.0), (1.0, 1.5)]

    def test_empty(self):
        assert list(two_step().pieces(0.7, 0.7)) == []

    def test_backwards(self):
        with pytest.raises(OutOfRange):
            list(two_step().pieces(1.0, 0.5))


class TestValidation:
    def test_must_start_at_zero(self):
        with pytest.raises(InvalidInput):
            Schedule([(0.5, [0, 0, 0], [0, 0, 0])], 1.0)

    def test_increasing_starts(self):
        with pytest.raises(InvalidInput):
            Schedule([(0.0, [0] * 3, [0] * 3), (0.0, [0] * 3, [0] * 3)], 1.0)

    def test_horizon_after_last_start(self):
        with pytest.raises(InvalidInput):
            Schedule([(0.0, [0] * 3, [0] * 3), (2.0, [0] * 3, [0] * 3)], 1.0)

    def test_non_finite(self):
        with pytest.raises(InvalidInput):
            Schedule.constant([np.inf, 0, 0], [0, 0, 0], 1.0)


def test_dict_roundtrip():
    s = two_step()
    s2 = Schedule.from_dict(s.to_dict())
    assert s2.to_dict() == s.to_dict()


def test_default_dt():
    s = Schedule.constant([0, 0, 1], [1, 0, 0], 1.0)
    assert default_dt(s.bounds()) == pytest.approx(1e-3 / 12)
    assert default_dt(Schedule.constant([0] * 3, [0] * 3, 1.0).bounds()) == 1e-3


@settings(max_examples=30, deadline=None)
@given(arrays(float, 3, elements=st.floats(-2, 2)), arrays(float, 3, elements=st.floats(-2, 2)))
def test_time_independence(h0, v):
    assert Schedule.constant(h0, v, 1.0).is_time_independent()
