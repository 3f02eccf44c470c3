import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from geoseg.metrics import (BoundaryMetrics, absolute_error, evaluate, hausdorff, overall,
                            signed_error)
from geoseg.trace import BoundaryCurve

curves = st.integers(1, 12).flatmap(
    lambda n: st.tuples(*[arrays(np.float64, n, elements=st.floats(-50, 50))] * 2))


def test_identical():
    g = np.array([1.0, 2.5, 3.0])
    assert signed_error(g, g) == 0 and absolute_error(g, g) == 0 and hausdorff(g, g) == 0


def test_constant_offset():
    g = np.linspace(10, 20, 7)
    assert signed_error(g + 2, g) == 2.0
    assert absolute_error(g + 2, g) == 2.0


def test_sign_cancelling():
    assert signed_error([12.0, 8.0], [10.0, 10.0]) == 0.0
    assert absolute_error([12.0, 8.0], [10.0, 10.0]) == 2.0


def test_three_row_hausdorff():
    assert hausdorff(np.full(9, 5.0), np.full(9, 8.0)) == 3.0


def test_hausdorff_single_outlier():
    b = np.zeros(10)
    b[4] = 6.0
    # nearest truth point to (4, 6) is (4, 0): any other column is farther
    assert hausdorff(b, np.zeros(10)) == pytest.approx(6.0, abs=1e-12)


def test_hausdorff_pitches():
    assert hausdorff(np.zeros(5), np.full(5, 2.0), row_pitch=3.3) == pytest.approx(6.6, abs=1e-12)
    surf = np.zeros((3, 4))
    assert hausdorff(surf, surf + 1.0) == 1.0


@given(curves)
def test_properties(pair):
    b, g = pair
    assert signed_error(b, g) == pytest.approx(-signed_error(g, b), abs=1e-9)
    assert absolute_error(b, g) >= abs(signed_error(b, g)) - 1e-9
    assert hausdorff(b, g) == hausdorff(g, b)
    assert hausdorff(b, g) <= np.max(np.abs(b - g)) + 1e-9


def test_overall():
    m = BoundaryMetrics("B1", 0.5, 1.0, 2.0)
    assert overall([m]) == (0.5, 1.0, 2.0)
    assert overall([m, BoundaryMetrics("B2", 0.0, 3.0, 4.0)])[1] == 2.0
    with pytest.raises(ValueError):
        overall([])


def test_evaluate_scaling():
    truth = {"B1": np.full(6, 10.0), "B2": np.full(6, 20.0)}
    det = {"B1": np.full(6, 12.0), "B2": np.array([19.0, 21.0] * 3)}
    px = evaluate(det, truth)
    um = evaluate(det, truth, scale=3.3)
    assert [m.id for m in px.boundaries] == ["B1", "B2"]
    assert (px.oae, px.ose) == (1.5, 1.0)
    for a, b in zip(px.boundaries, um.boundaries):
        assert (b.se, b.ae, b.hd) == (a.se * 3.3, a.ae * 3.3, a.hd * 3.3)
    assert um.rows()[-1][0] == "overall" and len(um.rows()) == 3


def test_evaluate_axis_mode():
    truth = {"B1": np.full(6, 10.0)}
    det = {"B1": np.full(6, 12.0)}
    rec = evaluate(det, truth, scale=3.3, hd_mode="axis", col_pitch=10.0)
    assert rec.ohd == pytest.approx(6.6, abs=1e-12)
    with pytest.raises(ValueError):
        evaluate(det, truth, hd_mode="euclid")


def test_accepts_curves_and_checks_shape():
    c = BoundaryCurve("B1", np.arange(4.0))
    assert signed_error(c, np.arange(4.0)) == 0
    with pytest.raises(ValueError):
        signed_error(np.zeros(3), np.zeros(4))
    with pytest.raises(ValueError):
        evaluate({"B1": np.zeros(3)}, {"B2": np.zeros(3)})
