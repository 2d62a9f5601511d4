import numpy as np
import pytest
from hypothesis import given, strategies as st

from vexlap.errors import DescriptorError, IncompatibleSampling, NonAdmissibleExponent
from vexlap.exponent import ExponentField, Grid, conjugate, log_holder_modulus, make_exponent
from vexlap.mesh import build_mesh

UNIT = (0.0, 0.0, 1.0, 1.0)


def test_constant_and_affine_descriptors():
    g = Grid.from_box(UNIT, 8)
    p = make_exponent("constant(3)", g)
    assert p.is_constant and p.p_minus == p.p_plus == 3.0
    q = make_exponent("affine(2, 0.5, 0.25)", g)
    assert q.p_minus == pytest.approx(2.0) and q.p_plus == pytest.approx(2.75)
    pts = np.array([[0.3, 0.7], [1.0, 0.0]])
    np.testing.assert_allclose(q.at(pts), 2 + 0.5 * pts[:, 0] + 0.25 * pts[:, 1], rtol=1e-13)


def test_radial_descriptor_at_nodes():
    g = Grid.from_box(UNIT, 10)
    p = make_exponent("radial(2, 1)", g)
    xy = g.coordinates()
    np.testing.assert_allclose(p.values.ravel(), 2 + np.hypot(xy[:, 0] - 0.5, xy[:, 1] - 0.5), rtol=1e-13)
    q = make_exponent("radial(2, 1, 0, 0)", g)
    assert q.p_plus == pytest.approx(2 + np.sqrt(2))


def test_mesh_and_callable_inputs():
    mesh = build_mesh(UNIT, 4)
    p = make_exponent(lambda x, y: 2 + x * y, mesh)
    assert p.values.shape == (5, 5)
    assert make_exponent(2.5, mesh).p_plus == 2.5


@pytest.mark.parametrize("bad", ["constant(1)", "affine(1.5, -1, 0)", "constant(nan)"])
def test_rejects_inadmissible(bad):
    with pytest.raises((NonAdmissibleExponent, DescriptorError)):
        make_exponent(bad, Grid.from_box(UNIT, 4))


def test_bad_descriptors():
    g = Grid.from_box(UNIT, 4)
    for bad in ["cubic(2)", "constant(2, 3)", "constant(", "__import__('os')"]:
        with pytest.raises(DescriptorError):
            make_exponent(bad, g)


def test_sampling_outside_box_raises():
    p = make_exponent("constant(2)", Grid.from_box(UNIT, 4))
    with pytest.raises(IncompatibleSampling):
        p.at(np.array([[1.5, 0.5]]))


def test_field_is_read_only():
    p = make_exponent("affine(2, 1, 0)", Grid.from_box(UNIT, 4))
    with pytest.raises(ValueError):
        p.values[0, 0] = 5.0


@given(st.floats(1.01, 6.0), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5),
       st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=20))
def test_interpolation_within_bounds(a, b, c, pts):
    p = make_exponent(f"affine({a + 1.0}, {b}, {c})", Grid.from_box(UNIT, 5))
    v = p.at(np.array(pts))
    assert np.all(v >= p.p_minus - 1e-12) and np.all(v <= p.p_plus + 1e-12)
    # affine fields are reproduced exactly by P1 interpolation
    q = np.array(pts)
    np.testing.assert_allclose(v, a + 1.0 + b * q[:, 0] + c * q[:, 1], rtol=1e-12)


def test_log_holder_modulus():
    g = Grid.from_box(UNIT, 8)
    assert log_holder_modulus(make_exponent("constant(2)", g)) == 0.0
    # |p(x)-p(y)| = |x1-y1| here, so the modulus is sup t log(1/t) = 1/e over t in the grid spacings
    m = log_holder_modulus(make_exponent("affine(2, 1, 0)", g))
    t = np.arange(1, 9) / 8
    assert m >= np.max(t[t < 1] * np.log(1 / t[t < 1])) - 1e-12
    assert m <= 1 / np.e + 1e-12


def test_conjugate():
    p = make_exponent("constant(3)", Grid.from_box(UNIT, 2))
    assert conjugate(p).p_minus == pytest.approx(1.5)


def test_degenerate_grid_only_at_nodes():
    g = Grid(0.0, 0.0, 1.0, 0, 0)
    p = ExponentField(np.array([[2.0]]), g)
    assert p.at(np.array([[0.0, 0.0]]))[0] == 2.0
    with pytest.raises(IncompatibleSampling):
        p.at(np.array([[0.5, 0.0]]))
