import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horizonlab.errors import HorizonLabError
from horizonlab.foundation import (
    LIGHTLIKE,
    SI,
    SPACELIKE,
    TIMELIKE_FUTURE,
    TIMELIKE_PAST,
    ZERO,
    MinkowskiEvent,
    causal_reachable,
    convert_units,
    interval_minkowski,
)

O = MinkowskiEvent(0.0, 0.0)
finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_interval_examples():
    iv = interval_minkowski(O, MinkowskiEvent(1.0, 0.0))
    assert iv.ds2 == 1.0 and iv.causal_class == TIMELIKE_FUTURE
    iv = interval_minkowski(O, MinkowskiEvent(0.0, 1.0))
    assert iv.ds2 == -1.0 and iv.causal_class == SPACELIKE
    iv = interval_minkowski(O, MinkowskiEvent(1.0, 1.0))
    assert iv.ds2 == 0.0 and iv.causal_class == LIGHTLIKE


def test_interval_zero_and_past():
    assert interval_minkowski(O, O).causal_class == ZERO
    iv = interval_minkowski(MinkowskiEvent(2.0, 0.0, 0.5), O)
    assert iv.causal_class == TIMELIKE_PAST
    assert iv.ds2 == pytest.approx(4.0 - 0.25)


def test_transverse_components_enter_interval():
    iv = interval_minkowski(O, MinkowskiEvent(1.0, 0.0, 0.6, 0.8))
    assert iv.causal_class == LIGHTLIKE


def test_non_finite_event_rejected():
    with pytest.raises(ValueError):
        MinkowskiEvent(math.nan, 0.0)
    with pytest.raises(ValueError):
        MinkowskiEvent(0.0, 1.0, math.inf)


def test_causal_reachable_examples():
    assert causal_reachable(MinkowskiEvent(0, 1), MinkowskiEvent(2, 1))
    # (0,1) -> (1,2) lies on the future light cone, so a light signal gets there
    assert interval_minkowski(MinkowskiEvent(0, 1), MinkowskiEvent(1, 2)).causal_class == LIGHTLIKE
    assert causal_reachable(MinkowskiEvent(0, 1), MinkowskiEvent(1, 2))
    assert not causal_reachable(MinkowskiEvent(0, 1), MinkowskiEvent(0.5, 2))
    assert not causal_reachable(MinkowskiEvent(1, 2), MinkowskiEvent(0, 1))


def test_one_way_channel_scan():
    # Alice's event beyond the horizon: on x = 1 with ct = 1.2 > x
    alice = MinkowskiEvent(1.2, 1.0)
    assert causal_reachable(MinkowskiEvent(0.0, 1.0), alice)
    for i in range(1001):
        tau = 0.01 * i
        rob = MinkowskiEvent(math.sinh(tau), math.cosh(tau))
        assert not causal_reachable(alice, rob)


@given(finite, finite, finite, finite, finite, finite, finite, finite)
def test_swap_asymmetry(t1, x1, y1, z1, t2, x2, y2, z2):
    a = MinkowskiEvent(t1, x1, y1, z1)
    b = MinkowskiEvent(t2, x2, y2, z2)
    if causal_reachable(a, b):
        assert not causal_reachable(b, a)


@given(
    st.tuples(finite, finite, finite, finite),
    st.tuples(finite, finite, finite, finite),
    st.tuples(finite, finite, finite, finite),
)
def test_translation_invariance(p, q, shift):
    a, b = MinkowskiEvent(*p), MinkowskiEvent(*q)
    a2 = MinkowskiEvent(*(u + s for u, s in zip(p, shift)))
    b2 = MinkowskiEvent(*(u + s for u, s in zip(q, shift)))
    d1 = interval_minkowski(a, b).ds2
    d2 = interval_minkowski(a2, b2).ds2
    # rounding of the shifted coordinates themselves bounds the agreement
    mag = sum(max(abs(u), abs(v)) + abs(s) for u, v, s in zip(p, q, shift))
    assert abs(d1 - d2) <= 1e-12 * max(1.0, mag) ** 2


def test_convert_units_examples():
    assert convert_units(1.0, "time") == 299792458.0
    for dim in ("length", "time", "mass", "acceleration"):
        assert convert_units(0.0, dim) == 0.0
    R = 2.0 * convert_units(1.989e30, "mass")
    # 2 G M / c^2 with CODATA 2018 G, evaluated in 40-digit arithmetic
    assert R == pytest.approx(2954.1265550554051366, rel=1e-14)
    assert SI.c == 299792458.0


@settings(max_examples=200)
@given(
    st.floats(1e-30, 1e30),
    st.sampled_from(["length", "time", "mass", "acceleration"]),
)
def test_convert_units_round_trip(v, dim):
    back = convert_units(convert_units(v, dim, "to_geometric"), dim, "to_si")
    assert back == pytest.approx(v, rel=1e-14)


def test_convert_units_bad_tags():
    with pytest.raises(HorizonLabError):
        convert_units(1.0, "charge")
    with pytest.raises(HorizonLabError):
        convert_units(1.0, "time", "sideways")
