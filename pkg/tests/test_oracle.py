import math

import numpy as np
import pytest

from udw_harvest import oracle
from udw_harvest.harvest import DensityMatrixBlocks, elements_stationary
from udw_harvest.oracle import (OracleInapplicable, compare, inertial_closed_form, inertial_mp,
                                kernel_grid_check, position_space_kernel, rel_diff,
                                wootters_concurrence)
from udw_harvest.response import DetectorParams
from udw_harvest.wightman import FOUR_PI2, Flavor, PairConfig, TrajectoryParams


def test_rel_diff_floor():
    assert rel_diff(0.0, 0.0) == 0.0
    assert rel_diff(1.0, 2.0) == 0.5
    r = compare("x", 1.0, 1.0 + 1e-9, 1e-8)
    assert r.passed and r.to_dict()["lhs"] == 1.0


def test_closed_form_limits():
    assert inertial_closed_form(DetectorParams(0.0)) == pytest.approx(1 / (4 * math.pi))
    assert inertial_closed_form(DetectorParams(12.0)) < 1e-60


@pytest.mark.parametrize("g", [0.0, 1.0, 4.0])
def test_closed_form_matches_high_precision(g):
    hi = inertial_mp(g)
    assert inertial_closed_form(DetectorParams(g)) == pytest.approx(hi.real, rel=1e-13)
    assert abs(hi.imag) < 1e-40


def test_contour_shift_independent():
    assert inertial_mp(1.0, shift=0.5).real == pytest.approx(inertial_mp(1.0, shift=2.0).real,
                                                             rel=1e-30)


@pytest.mark.parametrize("bbar", [0.0, 0.5, 1.0, 2.0])
@pytest.mark.parametrize("flavor", list(Flavor))
def test_position_space_matches_compact(bbar, flavor):
    r = kernel_grid_check(PairConfig(TrajectoryParams(1.0, bbar), 1.0, flavor))
    assert r.passed, r


def test_position_space_equal_time_spacelike():
    cfg = PairConfig(TrajectoryParams(1.0), 1.5)
    k = position_space_kernel(cfg, 0.4, 0.4, 1e-10)
    assert k.real == pytest.approx(1 / (FOUR_PI2 * 1.5**2), rel=1e-9)


def test_circular_nonstationary_offset_sign():
    # displacing A by +L instead of -L reverses u in the compact denominator
    from udw_harvest.wightman import pair_denominator

    cfg = PairConfig(TrajectoryParams(1.0, 2.0), 1.0, Flavor.NONSTATIONARY)
    ta, tb = np.array([0.9, -0.3, 1.7]), np.array([0.2, 0.5, -1.1])
    xa = oracle.worldline(cfg.traj, ta)
    xb = oracle.worldline(cfg.traj, tb)
    plus = (xa[0] - xb[0]) ** 2 - (xa[1] + cfg.L - xb[1]) ** 2 - (xa[2] - xb[2]) ** 2
    minus = (xa[0] - xb[0]) ** 2 - (xa[1] - cfg.L - xb[1]) ** 2 - (xa[2] - xb[2]) ** 2
    compact, _ = pair_denominator(cfg, ta - tb, ta + tb)
    flipped, _ = pair_denominator(cfg, tb - ta, ta + tb)
    assert np.allclose(minus.real, compact.real, rtol=1e-12)
    assert np.allclose(plus.real, flipped.real, rtol=1e-12)
    assert not np.allclose(plus.real, compact.real)


def test_coordinate_mapping_is_first_order():
    for bbar in (0.0, 2.0):
        r = oracle.coordinate_mapping_order(PairConfig(TrajectoryParams(1.0, bbar), 1.0,
                                                       Flavor.NONSTATIONARY))
        assert r.passed, r


def test_wootters_separable():
    b = DensityMatrixBlocks(0.1, 0.1, 0.0, 0.0, 0.0, 0.0)
    assert wootters_concurrence(b, 1e-3) == 0.0


def test_wootters_rejects_inconsistent_blocks():
    with pytest.raises(OracleInapplicable):
        wootters_concurrence(DensityMatrixBlocks(0.0, 0.0, 0.0, 0.1, 0.1, 0.0), 1e-3)


def test_wootters_rejects_non_psd():
    # violates Cauchy-Schwarz far beyond the clamp
    with pytest.raises(OracleInapplicable):
        wootters_concurrence(DensityMatrixBlocks(0.01, 0.01, 0.5, 0.0, 0.0, 0.0), 1e-1)


def test_wootters_matches_closed_form():
    b = elements_stationary(PairConfig(TrajectoryParams(1.0), 1.0), DetectorParams(1.0))
    r = oracle.wootters_check(b, 1e-3)
    assert r.lhs > 0 and r.passed


def test_reduction_configs_cover_battery():
    cfgs = oracle.reduction_configs()
    assert len(cfgs) == 12
    assert {c.traj.bbar for c in cfgs} == {0.0, 0.5, 1.0, 2.0}
    assert {c.traj.a for c in cfgs} == {1.0, 2.0}
    assert {c.L for c in cfgs} == {0.5, 1.0, 3.0}
