import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scmpp import (
    DegenerateRangeError,
    MarkedPattern,
    RangeError,
    TimeMapping,
    Window,
    order_by_time,
    size_to_time,
    time_to_size,
)

WIN = Window(0, 10, 0, 10)


class TestSizeToTime:
    def test_linear_endpoints_and_midpoint(self):
        m = TimeMapping(1.0, 2.0, 8.0)
        assert size_to_time(2.0, m) == pytest.approx(1.0)
        assert size_to_time(5.0, m) == pytest.approx(0.5)
        assert size_to_time(8.0, m) == 0.0

    def test_quadratic_worked_example(self):
        # 1 - ((5-2)/(8-2))^2 = 1 - 0.25 = 0.75
        m = TimeMapping(2.0, 2.0, 8.0)
        assert size_to_time(5.0, m) == pytest.approx(0.75, abs=1e-12)

    @pytest.mark.parametrize("delta", [0.5, 1.0, 2.0, 7.5])
    def test_max_size_maps_to_zero(self, delta):
        m = TimeMapping(delta, 1.0, 9.0)
        assert size_to_time(9.0, m) == 0.0
        assert size_to_time(1.0, m) == 1.0

    def test_out_of_range_rejected(self):
        m = TimeMapping(1.0, 2.0, 8.0)
        with pytest.raises(RangeError):
            size_to_time(1.9, m)
        with pytest.raises(RangeError):
            size_to_time(8.1, m)

    def test_degenerate_range_rejected(self):
        with pytest.raises(DegenerateRangeError):
            TimeMapping(1.0, 3.0, 3.0)

    def test_bad_delta_rejected(self):
        with pytest.raises(RangeError):
            TimeMapping(0.0, 1.0, 2.0)
        with pytest.raises(RangeError):
            TimeMapping(17.0, 1.0, 2.0)

    def test_strictly_decreasing_in_size(self):
        rng = np.random.default_rng(1)
        for delta in (0.5, 1.0, 2.0):
            m = TimeMapping(delta, 1.0, 5.0)
            s = np.sort(rng.uniform(1.0, 5.0, 50))
            t = size_to_time(s, m)
            assert (np.diff(t) < 0).all()


class TestTimeToSize:
    def test_endpoint_inversion(self):
        m = TimeMapping(1.5, 2.0, 8.0)
        assert time_to_size(0.0, m) == pytest.approx(8.0)
        assert time_to_size(1.0, m) == pytest.approx(2.0)

    def test_invert_worked_example(self):
        # t = 0.75, delta = 2: 2 + 6*sqrt(0.25) = 5
        m = TimeMapping(2.0, 2.0, 8.0)
        assert time_to_size(0.75, m) == pytest.approx(5.0, abs=1e-12)

    def test_out_of_range_rejected(self):
        m = TimeMapping(1.0, 2.0, 8.0)
        with pytest.raises(RangeError):
            time_to_size(-0.01, m)
        with pytest.raises(RangeError):
            time_to_size(1.01, m)

    @pytest.mark.parametrize("delta", [0.5, 1.0, 2.0])
    def test_round_trip_identity(self, delta):
        rng = np.random.default_rng(int(delta * 10))
        m = TimeMapping(delta, 0.5, 12.0)
        sizes = rng.uniform(0.5, 12.0, 100)
        back = time_to_size(size_to_time(sizes, m), m)
        assert back == pytest.approx(sizes, abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(
    delta=st.floats(0.1, 8.0, allow_nan=False),
    lo=st.floats(0.1, 5.0, allow_nan=False),
    span=st.floats(0.5, 20.0, allow_nan=False),
    u=st.floats(0.0, 1.0, allow_nan=False),
)
def test_round_trip_property(delta, lo, span, u):
    m = TimeMapping(delta, lo, lo + span)
    s = lo + u * span
    assert time_to_size(size_to_time(s, m), m) == pytest.approx(s, rel=1e-9, abs=1e-9)


class TestOrderByTime:
    def test_basic_ordering(self):
        p = MarkedPattern(WIN, np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 3.0]),
                          np.array([8.0, 2.0, 5.0]))
        tp = order_by_time(p, 1.0)
        assert tp.size == pytest.approx([8.0, 5.0, 2.0])
        assert tp.times == pytest.approx([0.0, 0.5, 1.0])
        assert tp.anchor == (1.0, 1.0)
        assert list(tp.permutation) == [0, 2, 1]

    def test_duplicate_sizes_stable(self):
        p = MarkedPattern(WIN, np.array([1.0, 2.0, 3.0]), np.array([1.0, 1.0, 1.0]),
                          np.array([5.0, 5.0, 8.0]))
        tp = order_by_time(p, 1.0)
        # anchor is the size-8 point; the tied size-5 points keep input order
        assert list(tp.permutation) == [2, 0, 1]
        assert (np.diff(tp.times) > 0).all()
        assert tp.times[-1] == 1.0

    def test_tie_at_time_one_kept_in_range(self):
        p = MarkedPattern(WIN, np.array([1.0, 2.0, 3.0, 4.0]), np.ones(4),
                          np.array([2.0, 2.0, 2.0, 9.0]))
        tp = order_by_time(p, 1.0)
        assert tp.times[0] == 0.0
        assert tp.times[-1] == 1.0
        assert (np.diff(tp.times) > 0).all()

    def test_anchor_has_max_size(self):
        rng = np.random.default_rng(2)
        n = 30
        p = MarkedPattern(WIN, rng.uniform(0, 10, n), rng.uniform(0, 10, n),
                          rng.uniform(1, 50, n))
        tp = order_by_time(p, 2.0)
        assert tp.size[0] == p.size.max()
        assert tp.times[0] == 0.0

    def test_permutation_recovers_input(self):
        rng = np.random.default_rng(4)
        n = 20
        x, y, s = rng.uniform(0, 10, n), rng.uniform(0, 10, n), rng.uniform(1, 9, n)
        tp = order_by_time(MarkedPattern(WIN, x, y, s), 1.0)
        inv = np.empty(n, dtype=int)
        inv[tp.permutation] = np.arange(n)
        assert tp.x[inv] == pytest.approx(x)
        assert tp.y[inv] == pytest.approx(y)
        assert tp.size[inv] == pytest.approx(s)

    def test_all_equal_sizes_rejected(self):
        p = MarkedPattern(WIN, np.array([1.0, 2.0]), np.array([1.0, 2.0]), np.array([3.0, 3.0]))
        with pytest.raises(DegenerateRangeError):
            order_by_time(p, 1.0)

    def test_extremes_attained(self):
        rng = np.random.default_rng(6)
        n = 15
        p = MarkedPattern(WIN, rng.uniform(0, 10, n), rng.uniform(0, 10, n), rng.uniform(1, 4, n))
        for delta in (0.5, 1.0, 3.0):
            tp = order_by_time(p, delta)
            assert tp.times.min() == 0.0
            assert tp.times.max() == 1.0
