import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracvar.grid import GridFunction, MemoryWindow, Side, check_order, interior_mask

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def test_grid_basics():
    u = GridFunction.from_callable(lambda t: t**2, 0.0, 2.0, 4)
    assert u.n == 4
    assert u.h == 0.5
    np.testing.assert_array_equal(u.t, [0.0, 0.5, 1.0, 1.5, 2.0])
    np.testing.assert_array_equal(u.values, [0.0, 0.25, 1.0, 2.25, 4.0])
    assert u.index_of(1.5) == 3
    with pytest.raises(ValueError):
        u.index_of(1.2)


@pytest.mark.parametrize(
    "a, b, values",
    [(1.0, 0.0, [1, 2]), (0.0, 0.0, [1, 2]), (0.0, 1.0, [1]), (0.0, 1.0, [1.0, np.nan])],
)
def test_grid_rejects_invalid(a, b, values):
    with pytest.raises(ValueError):
        GridFunction(a, b, values)


def test_grid_is_immutable():
    u = GridFunction(0.0, 1.0, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        u.values[0] = 5.0


def test_restrict_and_arithmetic():
    u = GridFunction.from_callable(lambda t: t, 0.0, 1.0, 10)
    r = u.restrict(0.2, 0.7)
    assert r.n == 5
    np.testing.assert_allclose(r.t, np.linspace(0.2, 0.7, 6))
    np.testing.assert_allclose((u + u).values, 2 * u.values)
    np.testing.assert_allclose((3.0 * u - u).values, 2 * u.values)
    with pytest.raises(ValueError):
        u + GridFunction(0.0, 1.0, np.zeros(5))


@given(st.lists(finite, min_size=2, max_size=50), st.floats(-10, 10), st.floats(0.01, 10))
def test_csv_round_trip_is_byte_identical(values, a, width):
    u = GridFunction(a, a + width, values)
    text = u.to_csv()
    v = GridFunction.from_csv(text)
    assert v.to_csv() == text
    np.testing.assert_array_equal(v.values, u.values)


def test_csv_rejects_nonuniform_and_bad_header():
    with pytest.raises(ValueError):
        GridFunction.from_csv("t,u\n0,1\n0.5,1\n0.6,1\n")
    with pytest.raises(ValueError):
        GridFunction.from_csv("x,y\n0,1\n1,1\n")


def test_memory_window():
    assert MemoryWindow.classical(0.0, 1.0) == MemoryWindow(0.0, 0.0, 1.0, 1.0)
    assert MemoryWindow(-0.5, 0.0, 1.0, 1.0).has_memory
    for bad in [(0.0, 0.5, 0.5, 1.0), (0.2, 0.1, 1.0, 1.0), (0.0, 0.0, 1.0, 0.5)]:
        with pytest.raises(ValueError):
            MemoryWindow(*bad)


def test_order_and_side():
    assert check_order(0.0) == 0.0
    for bad in (-0.1, 1.0, 1.5, float("nan")):
        with pytest.raises(ValueError):
            check_order(bad)
    with pytest.raises(ValueError):
        check_order(0.0, allow_zero=False)
    assert Side.parse("LEFT") is Side.Left
    with pytest.raises(ValueError):
        Side.parse("up")


def test_interior_mask():
    m = interior_mask(100)
    assert not m[:5].any() and not m[-5:].any() and m[5:-5].all()
    m = interior_mask(100, left=False)
    assert m[:96].all() and not m[96:].any()
    assert interior_mask(4).sum() == 3
