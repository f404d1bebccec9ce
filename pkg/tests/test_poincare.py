import numpy as np
import pytest

import beclab as bl
from beclab.errors import InvalidParameterError
from beclab.poincare import (PoincareInstance, Region, check_inequality,
                             estimate_constant, masked_gradient_sq,
                             omega_x_mask, weighted_check)


@pytest.fixture(scope="module")
def box3():
    return Region.box(1.0, 32, 3)


@pytest.fixture(scope="module")
def ball3():
    return Region.ball(1.0, 32, 3)


def _smooth_field(region, seed=0):
    rng = np.random.default_rng(seed)
    mesh = region.grid.meshgrid()
    f = np.zeros(region.grid.shape)
    for _ in range(5):
        c = [lo + rng.random() * e for lo, e in zip(region.grid.lo, region.grid.extent)]
        rr = np.zeros(region.grid.shape)
        for ax, x in enumerate(mesh):
            rr = rr + (x - c[ax]) ** 2
        f += rng.normal() * np.exp(-rr / 0.08)
    return f


def test_zero_field_holds(box3):
    inst = PoincareInstance.build(box3, box3.mask.copy(), np.zeros(box3.grid.shape))
    res = check_inequality(inst, 2.0)
    assert res["holds"] and res["lhs"] == 0.0 and res["rhs"] == 0.0


def test_full_omega_reduces_to_classical(box3):
    f = _smooth_field(box3)
    inst = PoincareInstance.build(box3, box3.mask.copy(), f)
    res = check_inequality(inst, 1.0)
    grad = float(np.sum(masked_gradient_sq(inst.f, box3) * box3.grid.weights))
    assert res["lhs"] == pytest.approx(grad, rel=1e-12)


def test_empty_omega_unit_coefficient(box3):
    f = _smooth_field(box3, seed=1)
    inst = PoincareInstance.build(box3, np.zeros_like(box3.mask), f)
    res = check_inequality(inst, 1.0)
    grad = float(np.sum(masked_gradient_sq(inst.f, box3) * box3.grid.weights))
    assert res["lhs"] == pytest.approx(grad, rel=1e-12)


def test_mean_zero_enforced(box3, ball3):
    for region in (box3, ball3):
        f = _smooth_field(region, seed=2) + 3.0
        inst = PoincareInstance.build(region, region.mask.copy(), f)
        h = inst.h
        w = region.grid.weights
        assert abs(float(np.sum(inst.f * h * w * region.mask))) < 1e-10


def test_neumann_eigenvalue_oracle():
    for (m, n) in [(3, 48), (2, 128)]:
        region = Region.box(1.0, n, m)
        mesh = region.grid.meshgrid()
        f = np.cos(np.pi * mesh[0]) * np.ones(region.grid.shape)
        inst = PoincareInstance.build(region, region.mask.copy(), f)
        res = check_inequality(inst, 1.0)
        c_star = res["rhs"] / res["lhs"]
        assert c_star == pytest.approx(1.0 / np.pi**2, rel=0.02)


def test_estimate_constant_self_consistent(ball3):
    est = estimate_constant(ball3, trials=60, seed=4)
    assert est.holds_all
    assert est.c_star > 0 and np.isfinite(est.c_star)
    assert "omega" in est.worst_trial or "trial" in est.worst_trial


def test_more_trials_never_shrink_constant(box3):
    few = estimate_constant(box3, trials=30, seed=9)
    more = estimate_constant(box3, trials=60, seed=9)
    assert more.c_star >= few.c_star - 1e-15


def test_complement_transfer_inequality(ball3):
    # moving mass out of Omega costs at most the moved gradient energy:
    # lhs(Omega2) + int_{Omega1 - Omega2} |grad f|^2 >= lhs(Omega1)
    rng = np.random.default_rng(21)
    f = _smooth_field(ball3, seed=21)
    omega1 = ball3.mask & (rng.random(ball3.grid.shape) < 0.8)
    omega2 = omega1 & (rng.random(ball3.grid.shape) < 0.6)
    i1 = PoincareInstance.build(ball3, omega1, f)
    i2 = PoincareInstance.build(ball3, omega2, f)
    r1 = check_inequality(i1, 1.0)
    r2 = check_inequality(i2, 1.0)
    grad = masked_gradient_sq(i1.f, ball3) * ball3.grid.weights
    moved = float(np.sum(grad * (omega1 & ~omega2)))
    assert r2["lhs"] + moved >= r1["lhs"] - 1e-12


def test_scale_covariance():
    # identical relative trials on a doubled region: constant scales by 4
    small = estimate_constant(Region.box(1.0, 32, 3), trials=40, seed=12)
    large = estimate_constant(Region.box(2.0, 32, 3), trials=40, seed=12)
    assert large.c_star / small.c_star == pytest.approx(4.0, rel=0.05)


def test_weighted_constant_weight_matches_plain(box3):
    f = _smooth_field(box3, seed=6)
    omega = box3.mask & (np.random.default_rng(7).random(box3.grid.shape) < 0.5)
    inst = PoincareInstance.build(box3, omega, f)
    plain = check_inequality(inst, 3.0)
    w = np.full(box3.grid.shape, 1.0 / box3.volume)
    weighted = weighted_check(inst, w, 3.0)
    assert weighted["lhs"] == pytest.approx(plain["lhs"], rel=1e-12)
    assert weighted["rhs"] == pytest.approx(plain["rhs"], rel=1e-12)


def test_weighted_rejects_vanishing_weight(box3):
    f = _smooth_field(box3, seed=8)
    inst = PoincareInstance.build(box3, box3.mask.copy(), f)
    w = np.zeros(box3.grid.shape)
    with pytest.raises(InvalidParameterError):
        weighted_check(inst, w, 1.0)


def test_omega_x_mask_geometry(ball3):
    assert np.array_equal(omega_x_mask([], 0.2, ball3), ball3.mask)
    mask = omega_x_mask([(0.0, 0.0, 0.0)], 0.3, ball3)
    excluded = float(np.sum(ball3.grid.weights[ball3.mask & ~mask]))
    ball_vol = 4 * np.pi * 0.3**3 / 3
    cell = max(ball3.grid.spacing)
    shell = 4 * np.pi * 0.3**2 * 2 * cell
    assert abs(excluded - ball_vol) < shell
    with pytest.raises(InvalidParameterError):
        omega_x_mask([(0, 0, 0)], 0.5 * cell, ball3)


def test_omega_x_scaling_volume_bound():
    # excluded volume of n exclusion balls at the n^(-7/17) radius obeys
    # the n^(-4/17) roof (up to one cell layer) on the unit ball
    region = Region.ball(1.0, 48, 3)
    rng = np.random.default_rng(3)
    for n_pts in (4, 12, 30):
        radius = float(n_pts) ** (-7.0 / 17.0)
        pts = rng.uniform(-0.6, 0.6, size=(n_pts, 3))
        mask = omega_x_mask(pts, radius, region)
        excluded = float(np.sum(region.grid.weights[region.mask & ~mask]))
        roof = n_pts * (4 * np.pi / 3) * radius**3
        cell = max(region.grid.spacing)
        slack = n_pts * 4 * np.pi * radius**2 * 2 * cell
        assert excluded <= roof + slack
        assert roof == pytest.approx((4 * np.pi / 3) * float(n_pts) ** (-4.0 / 17.0))
