import math

import pytest

from benchmarks.lq import LqParams, LqProblem
from gpp.probe import unbiasedness_probe
from gpp.problem import PolicySequence
from gpp.stochastics import SeedSpec


def test_lq_sample_wise_adjoint_is_unbiased(lq1d):
    policy = PolicySequence.from_oracle(lq1d, 2)
    report = unbiasedness_probe(lq1d, policy, n_outer=20000, n_inner=8, seed=SeedSpec(13), n_roots=2000)
    assert report.passed, report.to_dict()
    assert report.include_dxh
    assert len(report.gap) == 1


def test_dropping_dxh_is_detected(lq1d):
    policy = PolicySequence.from_oracle(lq1d, 2)
    report = unbiasedness_probe(lq1d, policy, n_outer=20000, n_inner=8, seed=SeedSpec(13), n_roots=2000,
                                include_dxh=False)
    assert not report.passed
    assert report.gap_se > 3.0


def test_deterministic_problem_has_zero_gap():
    problem = LqProblem(LqParams(d=1, c=0.0, x0_value=0.5), T=1.0)
    policy = PolicySequence.from_oracle(problem, 2)
    report = unbiasedness_probe(problem, policy, n_outer=50, n_inner=4, seed=SeedSpec(1), n_roots=10)
    assert report.gap_se == 0.0
    assert report.passed
    assert report.sample_se[0] < 1e-12
    assert math.isclose(report.sample_mean[0], report.nested_mean[0], rel_tol=1e-12)


def test_interbank_probe_passes(interbank):
    policy = PolicySequence.from_oracle(interbank, 2)
    report = unbiasedness_probe(interbank, policy, n_outer=20000, n_inner=8, seed=SeedSpec(17), n_roots=2000)
    assert report.passed, report.to_dict()


def test_report_serialises(lq1d):
    report = unbiasedness_probe(lq1d, PolicySequence.from_oracle(lq1d, 1), n_outer=100, n_inner=4,
                                seed=SeedSpec(2), n_roots=20)
    data = report.to_dict()
    assert data["n_outer"] == 100 and data["n_roots"] == 20
    assert set(data) >= {"sample_mean", "nested_mean", "gap", "gap_se", "passed"}


@pytest.mark.slow
def test_probe_with_more_steps(lq1d):
    policy = PolicySequence.from_oracle(lq1d, 4)
    report = unbiasedness_probe(lq1d, policy, n_outer=50000, n_inner=6, seed=SeedSpec(23), n_roots=400)
    assert report.passed, report.to_dict()
