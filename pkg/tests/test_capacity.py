import json

import numpy as np
import pytest

from vexlap.capacity import (alpha_r_condition_check, ball_capacity, calibrate_alpha, capacity_comparison_check,
                             comparison_constants, connected_lower_bound_check, crop, relative_capacity,
                             sobolev_capacity)
from vexlap.errors import EmptyConstraintSet, PreconditionViolated, ResolutionTooCoarse
from vexlap.exponent import make_exponent
from vexlap.geometry import Disk, RasterDomain, Rect, Square
from vexlap.mesh import build_mesh

UNIT = (0.0, 0.0, 1.0, 1.0)


def _set(shape, res=64, mode="cover"):
    return RasterDomain.from_shape(shape, UNIT, res, mode)


def test_annulus_p2_coarse():
    mesh = build_mesh(UNIT, 128)
    e = _set(Disk(0.5, 0.5, 0.1), 128, "center")
    d = _set(Disk(0.5, 0.5, 0.4), 128, "interior")
    c = relative_capacity(e, d, make_exponent("constant(2)", mesh), mesh)
    assert c.value == pytest.approx(2 * np.pi / np.log(4), rel=0.06)
    assert c.converged and c.resolved
    v = c.potential.values
    assert v.min() >= -1e-10 and v.max() <= 1 + 1e-10
    json.loads(c.to_json())


def test_monotonicity_randomized():
    rng = np.random.default_rng(3)
    mesh = build_mesh(UNIT, 32)
    for _ in range(4):
        p = make_exponent(f"affine({rng.uniform(1.5, 2.5)}, {rng.uniform(0, 1)}, 0)", mesh)
        cx, cy = rng.uniform(0.4, 0.6, 2)
        r1 = rng.uniform(0.05, 0.1)
        e1, e2 = _set(Disk(cx, cy, r1)), _set(Disk(cx, cy, r1 + 0.05))
        d1 = _set(Square(0.5, 0.5, 0.35), mode="interior")
        d2 = _set(Square(0.5, 0.5, 0.45), mode="interior")
        c11 = relative_capacity(e1, d1, p, mesh).value
        assert relative_capacity(e2, d1, p, mesh).value >= c11 * (1 - 1e-9)
        assert relative_capacity(e1, d2, p, mesh).value <= c11 * (1 + 1e-9)


def test_empty_set_errors_and_sobolev_zero():
    mesh = build_mesh(UNIT, 16)
    p = make_exponent("constant(2)", mesh)
    empty = RasterDomain.empty(UNIT, 64)
    with pytest.raises(EmptyConstraintSet):
        relative_capacity(empty, RasterDomain.full(UNIT, 64), p, mesh)
    assert sobolev_capacity(empty, p, mesh).value == 0.0


def test_sobolev_exceeds_gradient_part_and_is_monotone():
    mesh = build_mesh(UNIT, 32)
    p = make_exponent("affine(1.8, 0.5, 0)", mesh)
    small, big = _set(Disk(0.5, 0.5, 0.05)), _set(Disk(0.5, 0.5, 0.12))
    cs, cb = sobolev_capacity(small, p, mesh), sobolev_capacity(big, p, mesh)
    assert cs.value > cs.gradient_part > 0
    assert cb.value >= cs.value


@pytest.mark.parametrize("rho,theta,K", [(0.3, 0.5, 1.0), (5.0, 0.8, 0.6), (1e-4, 0.3, 2.0)])
def test_comparison_constants_bruteforce(rho, theta, K):
    B, C = comparison_constants(rho, theta, K)
    s = np.linspace(0, rho, 200_001)
    assert B == pytest.approx(np.max(rho - s + K * s ** theta), rel=1e-6)
    assert C == pytest.approx(B / rho ** theta)


def test_capacity_comparison_check():
    mesh = build_mesh(UNIT, 32)
    p = make_exponent("affine(1.5, 1.5, 0)", mesh)
    rep = capacity_comparison_check(_set(Disk(0.5, 0.5, 0.1)), _set(Disk(0.5, 0.5, 0.4), mode="interior"), p, mesh)
    assert rep.passed and rep.margin >= 0
    assert rep.beta == pytest.approx(1.5 / 3.0)


def test_ball_capacity_oracle_p2():
    # full set: cap(B_r, B_2r) = 2 pi / ln 2 in the plane for p = 2
    k = RasterDomain.full(UNIT, 256)
    c = ball_capacity(k, (0.5, 0.5), 0.1, make_exponent("constant(2)", (UNIT, 4)), 256)
    assert c.value == pytest.approx(2 * np.pi / np.log(2), rel=0.08)


def test_crop_is_aligned():
    o = _set(Disk(0.5, 0.5, 0.3), 64)
    sub = crop(o, (0.25, 0.25, 0.75, 0.5))
    assert sub.mask.shape == (16, 32)
    np.testing.assert_array_equal(sub.mask, o.mask[16:32, 16:48])


def test_connected_lower_bound():
    k = _set(Rect(0.2, 0.45, 0.8, 0.55), 128)
    p = make_exponent("constant(1.5)", (UNIT, 4))
    rep = connected_lower_bound_check(k, (0.5, 0.5), 0.1, p, kappa=0.0, mesh_resolution=64)
    assert rep.passed and rep.capacity > 0
    with pytest.raises(PreconditionViolated):
        connected_lower_bound_check(k | _set(Disk(0.1, 0.1, 0.03), 128), (0.5, 0.5), 0.1, p)
    with pytest.raises(PreconditionViolated):
        connected_lower_bound_check(k, (0.5, 0.9), 0.1, p)
    with pytest.raises(PreconditionViolated):
        connected_lower_bound_check(k, (0.5, 0.5), 0.4, p)


def test_alpha_condition_square_and_vacuous():
    p = make_exponent("constant(2)", (UNIT, 4))
    o = RasterDomain.from_shape(Square(0.5, 0.5, 0.2), UNIT, 128)
    alpha = calibrate_alpha(o, p, 0.08, samples=2, mesh_resolution=128)
    assert alpha > 0
    assert alpha_r_condition_check(o, p, alpha, 0.08, samples=2, mesh_resolution=128).passed
    assert not alpha_r_condition_check(o, p, 4 * alpha, 0.08, samples=2, mesh_resolution=128).passed
    with pytest.raises(ResolutionTooCoarse):
        alpha_r_condition_check(o, p, alpha, 0.08, samples=2, mesh_resolution=64)
    vac = alpha_r_condition_check(RasterDomain.full(UNIT, 64), p, 1.0, 0.3, samples=2, mesh_resolution=64)
    assert vac.passed and vac.vacuous
