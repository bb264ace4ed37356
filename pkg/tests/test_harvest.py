import math

import pytest

from udw_harvest.harvest import (DensityMatrixBlocks, HarvestPoint, concurrence, correlation_report,
                                 elements, elements_2d, elements_nonstationary, elements_stationary,
                                 harvest_sweep, mutual_information, nonlocal_element,
                                 transition_cross)
from udw_harvest.response import DetectorParams, transition_probability
from udw_harvest.wightman import Flavor, PairConfig, TrajectoryParams


def blocks(laa=0.1, lbb=0.1, lab=0.0, m=0.0, mp=None, mm=None):
    mp = m.real if mp is None else mp
    mm = m.imag if mm is None else mm
    return DensityMatrixBlocks(laa, lbb, lab, m, mp, mm)


def test_concurrence_boundary():
    assert concurrence(blocks(0.04, 0.09, m=0.06))[0] == 0.0
    assert concurrence(blocks(0.04, 0.09, m=0.08))[0] == pytest.approx(0.04)


def test_concurrence_zero_m():
    assert concurrence(blocks(0.3, 0.2, m=0j)) == (0.0, 0.0, 0.0)


def test_concurrence_plus_minus():
    c, cp, cm = concurrence(blocks(0.01, 0.01, m=0.03 + 0.015j))
    assert cp == pytest.approx(0.04)
    assert cm == pytest.approx(0.01)
    assert c == pytest.approx(2 * (abs(0.03 + 0.015j) - 0.01))


def test_negative_local_rejected():
    with pytest.raises(ValueError):
        concurrence(DensityMatrixBlocks(-1e-3, 0.1, 0, 0, 0, 0, err_laa=1e-8))
    # within error it is accepted and treated as zero
    assert concurrence(DensityMatrixBlocks(-1e-10, 0.1, 0, 0, 0, 0, err_laa=1e-8))[0] == 0.0


def test_mutual_information_uncorrelated():
    info, lp, lm = mutual_information(blocks(0.3, 0.2, lab=0.0))
    assert info == pytest.approx(0.0, abs=1e-15)
    assert (lp, lm) == pytest.approx((0.3, 0.2))


def test_mutual_information_maximal():
    ell = 0.05
    info, lp, lm = mutual_information(blocks(ell, ell, lab=ell))
    assert lp == pytest.approx(2 * ell)
    assert lm == pytest.approx(0.0, abs=1e-16)
    assert info == pytest.approx(2 * ell * math.log(2))


def test_degenerate_no_response():
    r = correlation_report(blocks(0.0, 0.0, lab=0.0, m=0.0))
    assert r.concurrence == 0.0 and r.mutual_info == 0.0


def test_zero_separation_rejected():
    cfg = PairConfig(TrajectoryParams(1.0), 0.0)
    with pytest.raises(ValueError):
        elements_stationary(cfg, DetectorParams(1.0))


@pytest.mark.parametrize("bbar", [0.0, 0.5, 1.0, 2.0])
def test_cross_element_at_zero_separation_is_local(bbar):
    traj = TrajectoryParams(1.0, bbar)
    det = DetectorParams(1.0)
    lab = transition_cross(PairConfig(traj, 0.0), det).value
    local = transition_probability(traj, det).prob_over_lambda2
    assert lab.real == pytest.approx(local, rel=1e-8)


def test_flavor_guards():
    st = PairConfig(TrajectoryParams(1.0), 1.0)
    ns = PairConfig(TrajectoryParams(1.0), 1.0, Flavor.NONSTATIONARY)
    det = DetectorParams(1.0)
    with pytest.raises(ValueError):
        elements_stationary(ns, det)
    with pytest.raises(ValueError):
        elements_nonstationary(st, det)
    with pytest.raises(ValueError):
        transition_cross(ns, det, method="1d")


@pytest.mark.parametrize("L", [50.0, 200.0])
def test_far_apart_detectors_decouple(L):
    # spacelike kernel ~ 1/(4 pi^2 L^2) over the whole window
    b = elements_stationary(PairConfig(TrajectoryParams(1.0), L), DetectorParams(1.0))
    lead = math.exp(-1.0) / (2 * math.pi * L * L)
    assert b.m.real == pytest.approx(-lead, rel=2e-2)
    assert abs(b.lab) == pytest.approx(lead, rel=2e-2)


def test_identical_detectors_share_local_element():
    b = elements_stationary(PairConfig(TrajectoryParams(1.0, 2.0), 1.0), DetectorParams(1.0))
    assert b.laa == b.lbb


def test_decomposition_closure():
    b = elements_stationary(PairConfig(TrajectoryParams(1.0, 0.5), 1.0), DetectorParams(1.0))
    assert abs(b.m - (b.m_plus + 1j * b.m_minus)) <= b.err_m


def test_linear_reference_values():
    # frozen from this implementation after the 1D/2D and position-space cross-checks
    b = elements_stationary(PairConfig(TrajectoryParams(1.0), 1.0), DetectorParams(1.0))
    assert b.m == pytest.approx(-0.02545958818166722 + 0.036816989465521345j, rel=1e-6)
    assert b.lab == pytest.approx(0.010128548608907377, rel=1e-6)


def test_stationary_2d_agrees():
    cfg = PairConfig(TrajectoryParams(2.0, 2.0), 1.0)
    det = DetectorParams(1.0)
    one = elements_stationary(cfg, det)
    two = elements_2d(cfg, det)
    assert two.m == pytest.approx(one.m, rel=1e-6)
    assert two.lab == pytest.approx(one.lab, rel=1e-6)


def test_nonstationary_harvests_less():
    cfg = PairConfig(TrajectoryParams(1.0), 1.0, Flavor.NONSTATIONARY)
    det = DetectorParams(0.1)
    ns = correlation_report(elements(cfg, det))
    st = correlation_report(elements(PairConfig(cfg.traj, 1.0), det))
    assert ns.concurrence < st.concurrence
    assert ns.mutual_info < st.mutual_info


def test_nonstationary_decomposition_closure():
    cfg = PairConfig(TrajectoryParams(1.0, 2.0), 1.0, Flavor.NONSTATIONARY)
    m, mp, mm = nonlocal_element(cfg, DetectorParams(0.5))
    assert abs(m.value - (mp.value + 1j * mm.value)) <= m.err_estimate


def test_harvest_sweep_single_point():
    p = HarvestPoint(1.0, 0.0, 1.0, 1.0)
    rows = harvest_sweep([p])
    direct = correlation_report(elements_stationary(*p.config()))
    assert rows[0].result.concurrence == direct.concurrence
    assert harvest_sweep([]) == []
