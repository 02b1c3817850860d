import math

import numpy as np

from gpp.diagnostics import DivergenceMonitor
from gpp.problem import PolicySequence
from gpp.randfeatures import RandomFeatureModel, new_feature_map
from gpp.stochastics import SeedSpec


def _policy(value, clip_bound=math.inf):
    fm = new_feature_map(SeedSpec(0), d=1, d_h=3)
    model = RandomFeatureModel(fm, np.full((1, fm.n_features), value), clip_bound)
    return PolicySequence([model, model], np.array([0.0, 0.5]))


def checks(flags):
    return [f["check"] for f in flags]


def test_quiet_run_has_no_flags():
    monitor = DivergenceMonitor()
    assert monitor.check_epoch(1, 1.0, _policy(0.1)) == []
    assert monitor.check_epoch(2, 0.9, _policy(0.1)) == []


def test_cost_jump_is_flagged():
    monitor = DivergenceMonitor()
    monitor.check_epoch(1, 1.0, _policy(0.1))
    assert checks(monitor.check_epoch(2, 50.0, _policy(0.1))) == ["cost_jump"]


def test_non_finite_cost_keeps_previous_reference():
    monitor = DivergenceMonitor()
    monitor.check_epoch(1, 2.0, _policy(0.1))
    assert checks(monitor.check_epoch(2, math.nan, _policy(0.1))) == ["non_finite_cost"]
    assert monitor.previous_cost == 2.0


def test_large_coefficients_and_saturation():
    monitor = DivergenceMonitor()
    assert checks(monitor.check_epoch(1, 1.0, _policy(1e7))) == ["theta_norm"]
    assert checks(monitor.check_epoch(2, 1.0, _policy(0.5, clip_bound=0.5))) == ["clip_saturation"]


def test_oracle_policies_are_not_inspected(lq1d):
    flags = DivergenceMonitor().check_epoch(1, 1.0, PolicySequence.from_oracle(lq1d, 3))
    assert flags == []
