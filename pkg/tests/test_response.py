import math
import warnings

import pytest

from udw_harvest.quad import DEFAULT_1D
from udw_harvest.response import (DetectorParams, UndefinedTemperatureWarning, effective_temperature,
                                  effective_temperature_full, eps_unit, response_function,
                                  response_sweep, transition_probability)
from udw_harvest.wightman import TrajectoryParams


def test_detector_params_validation():
    with pytest.raises(ValueError):
        DetectorParams(1.0, sigma=0.0)
    with pytest.raises(ValueError):
        DetectorParams(math.nan)


def test_eps_unit_takes_shortest_scale():
    assert eps_unit(4.0, DetectorParams(2.0, 1.0)) == 0.25
    assert eps_unit(0.1, DetectorParams(0.0, 1.0)) == 1.0


@pytest.mark.parametrize("omega,expected", [(0.5, 0.028158875373857042), (1.0, 0.007088272232636416),
                                            (2.0, 0.00013794755706218251)])
def test_small_acceleration_is_inertial(omega, expected):
    r = transition_probability(TrajectoryParams(1e-4), DetectorParams(omega))
    assert r.prob_over_lambda2 == pytest.approx(expected, rel=1e-6)
    assert not r.flagged


def test_sigma_scaling():
    # L depends on (a sigma, Omega sigma) only
    r1 = transition_probability(TrajectoryParams(1.0, 0.5), DetectorParams(1.0, 1.0))
    r2 = transition_probability(TrajectoryParams(0.5, 0.5), DetectorParams(0.5, 2.0))
    assert r1.prob_over_lambda2 == pytest.approx(r2.prob_over_lambda2, rel=1e-8)


def test_response_function_divides_by_sigma():
    traj = TrajectoryParams(1.0)
    det = DetectorParams(1.0, 2.0)
    assert response_function(traj, det).prob_over_lambda2 == pytest.approx(
        transition_probability(traj, det).prob_over_lambda2 / 2.0)


def test_large_gap_decays():
    small = transition_probability(TrajectoryParams(1.0), DetectorParams(2.0)).prob_over_lambda2
    large = transition_probability(TrajectoryParams(1.0), DetectorParams(8.0)).prob_over_lambda2
    assert 0 < large < 1e-6 * small


@pytest.mark.parametrize("bbar", [0.0, 0.5, 1.0, 2.0])
def test_increases_with_acceleration(bbar):
    lo = transition_probability(TrajectoryParams(0.5, bbar), DetectorParams(2.0)).prob_over_lambda2
    hi = transition_probability(TrajectoryParams(8.0, bbar), DetectorParams(2.0)).prob_over_lambda2
    assert hi > lo


@pytest.mark.parametrize("bbar", [0.0, 0.5, 1.0, 2.0])
def test_detailed_balance_direction(bbar):
    traj = TrajectoryParams(1.0, bbar)
    up = transition_probability(traj, DetectorParams(1.0)).prob_over_lambda2
    down = transition_probability(traj, DetectorParams(-1.0)).prob_over_lambda2
    assert down > up > 0


def test_temperature_symmetric_in_gap():
    traj = TrajectoryParams(2.0, 0.5)
    assert effective_temperature(traj, DetectorParams(1.5)) == effective_temperature(
        traj, DetectorParams(-1.5))


def test_temperature_needs_gap():
    with pytest.raises(ValueError):
        effective_temperature(TrajectoryParams(1.0), DetectorParams(0.0))


def test_temperature_undefined_signal():
    # at a huge gap the excitation rate underflows below its error
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        t = effective_temperature_full(TrajectoryParams(1e-3), DetectorParams(40.0))
    assert math.isnan(t.value) and not t.defined
    assert any(issubclass(x.category, UndefinedTemperatureWarning) for x in w)


def test_unruh_temperature_large_sigma():
    t = effective_temperature(TrajectoryParams(20.0), DetectorParams(20.0))
    assert t / 20.0 == pytest.approx(1 / (2 * math.pi), rel=0.01)


def test_sweep_empty_and_single():
    assert response_sweep([]) == []
    rows = response_sweep([(1.0, 0.5, 2.0)])
    direct = transition_probability(TrajectoryParams(1.0, 0.5), DetectorParams(2.0))
    assert rows[0].ok
    assert rows[0].result.prob_over_lambda2 == direct.prob_over_lambda2


def test_sweep_records_failures():
    rows = response_sweep([(1.0, 0.0, 1.0), (-1.0, 0.0, 1.0)])
    assert rows[0].ok and not rows[1].ok
    assert "ValueError" in rows[1].error


def test_sweep_parallel_matches_serial():
    grid = [dict(a_sigma=a, bbar=0.5, omega_sigma=1.0) for a in (0.5, 1.0, 2.0)]
    serial = response_sweep(grid, DEFAULT_1D, jobs=1)
    par = response_sweep(grid, DEFAULT_1D, jobs=2)
    assert [r.result.prob_over_lambda2 for r in serial] == [r.result.prob_over_lambda2 for r in par]
