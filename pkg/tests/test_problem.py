import numpy as np
import pytest

from benchmarks.hjb import HjbParams, HjbProblem
from benchmarks.interbank import InterbankProblem
from benchmarks.lq import LqParams, LqProblem
from benchmarks.meanvar import MeanVarProblem
from benchmarks.priceimpact import PriceImpactProblem
from benchmarks.sine import SineProblem
from gpp.errors import DimensionError, OracleUnavailableError, PolicyFormatError
from gpp.problem import (FactorizedKernel, MeasureSummary, OracleController, PairwiseKernel, PolicySequence,
                         as_mean_field, hamiltonian_partial_check, measure_summary, mf_args)
from gpp.randfeatures import RandomFeatureModel, new_feature_map
from gpp.stochastics import SeedSpec

ALL_PROBLEMS = {
    "lq": lambda: LqProblem(LqParams(d=3), T=1.0),
    "hjb_g1": lambda: HjbProblem(HjbParams(d=3, terminal="g1"), T=1.0),
    "hjb_g2": lambda: HjbProblem(HjbParams(d=3, terminal="g2", lam=4.0), T=1.0),
    "interbank": lambda: InterbankProblem(T=1.0),
    "meanvar": lambda: MeanVarProblem(T=0.2),
    "priceimpact": lambda: PriceImpactProblem(T=1.0),
    "sine": lambda: SineProblem(T=0.5),
}


@pytest.mark.parametrize("name", sorted(ALL_PROBLEMS))
def test_hamiltonian_partials_match_finite_differences(name):
    problem = ALL_PROBLEMS[name]()
    report = hamiltonian_partial_check(problem, n_points=12, seed=SeedSpec(21))
    assert report.passed(1e-5), report


@pytest.mark.parametrize("name", sorted(ALL_PROBLEMS))
def test_terminal_gradient_matches_finite_differences(name):
    problem = ALL_PROBLEMS[name]()
    gen = SeedSpec(4).generator()
    x = gen.standard_normal((10, problem.d))
    mu = measure_summary(x, None, problem) if problem.is_mean_field else None
    extra = mf_args(problem, mu)
    eps = 1e-5
    fd = np.empty_like(x)
    for k in range(problem.d):
        e = np.zeros_like(x)
        e[:, k] = eps
        fd[:, k] = (problem.g(x + e, *extra) - problem.g(x - e, *extra)) / (2 * eps)
    np.testing.assert_allclose(problem.grad_g(x, *extra), fd, atol=1e-6)


def test_measure_summary_is_permutation_invariant(interbank):
    x = np.random.default_rng(0).normal(size=(100, 1))
    u = np.random.default_rng(1).normal(size=(100, 1))
    perm = np.random.default_rng(2).permutation(100)
    a = measure_summary(x, u, interbank)
    b = measure_summary(x[perm], u[perm], interbank)
    np.testing.assert_allclose(a.mean_state, b.mean_state, rtol=1e-14)
    np.testing.assert_allclose(a.mean_control, b.mean_control, rtol=1e-14)


def test_measure_summary_rejects_empty_ensemble(lq1d):
    with pytest.raises(DimensionError):
        measure_summary(np.zeros((0, 1)), None, lq1d)
    with pytest.raises(DimensionError):
        measure_summary(np.zeros(5), None, lq1d)


def test_factorized_and_pairwise_kernels_agree():
    rng = np.random.default_rng(3)
    weights = rng.normal(size=(50, 1))
    points = rng.normal(size=(7, 1))
    factorized = FactorizedKernel(weights, lambda p: np.ones((p.shape[0], 1, 1)))
    pairwise = PairwiseKernel([weights], lambda part, p: np.broadcast_to(part[0][:, None, :],
                                                                         (part[0].shape[0], p.shape[0], 1)),
                              chunk=7)
    np.testing.assert_allclose(factorized.average_at(points), pairwise.average_at(points), rtol=1e-12)
    np.testing.assert_allclose(factorized.average_at(points), weights.mean(), rtol=1e-12)


def test_as_mean_field_wraps_socp_only(lq1d, interbank):
    assert as_mean_field(interbank) is interbank
    view = as_mean_field(lq1d)
    assert view.is_mean_field and view.name == lq1d.name
    x = np.array([[0.3], [-1.0]])
    u = np.array([[0.5], [0.2]])
    mu = view.summary(x, u)
    np.testing.assert_array_equal(view.b(0.1, x, u, mu), lq1d.b(0.1, x, u))
    np.testing.assert_array_equal(view.grad_g(x, mu), lq1d.grad_g(x))
    np.testing.assert_array_equal(view.oracle_control(0.1, x, mu), lq1d.oracle_control(0.1, x))


def test_socp_without_oracle_raises():
    with pytest.raises(OracleUnavailableError):
        SineProblem().oracle_control(0.0, np.zeros((1, 2)))


def test_oracle_controller_reshapes():
    ctrl = OracleController(lambda t, x, mu: -x[:, 0], d1=1)
    assert ctrl(0.0, np.ones((4, 1))).shape == (4, 1)


def _fitted_policy():
    rng = np.random.default_rng(8)
    maps = [new_feature_map(SeedSpec(1).with_stream(n), d=1, d_h=6) for n in range(3)]
    models = [RandomFeatureModel(fm, rng.normal(size=(1, fm.n_features))) for fm in maps]
    return PolicySequence(models, np.arange(3) / 3.0)


def test_policy_dict_round_trip():
    policy = _fitted_policy()
    restored = PolicySequence.from_dict(policy.to_dict())
    x = np.linspace(-1, 1, 9)[:, None]
    assert restored.N == 3
    for n in range(3):
        np.testing.assert_array_equal(restored.control(n, x), policy.control(n, x))


def test_policy_rejects_unknown_version_and_bad_header():
    data = _fitted_policy().to_dict()
    with pytest.raises(PolicyFormatError):
        PolicySequence.from_dict({**data, "version": 99})
    with pytest.raises(PolicyFormatError):
        PolicySequence.from_dict({**data, "N": 4})
    with pytest.raises(PolicyFormatError):
        PolicySequence.from_dict({k: v for k, v in data.items() if k != "models"})


def test_oracle_policy_cannot_be_serialised(lq1d):
    with pytest.raises(PolicyFormatError):
        PolicySequence.from_oracle(lq1d, 4).to_dict()


def test_policy_length_mismatch():
    maps = [new_feature_map(SeedSpec(1), d=1, d_h=4)]
    with pytest.raises(DimensionError):
        PolicySequence.zeros(maps, 1, np.arange(2) * 0.5)


def test_policy_uses_input_dims():
    fm = new_feature_map(SeedSpec(2), d=1, d_h=4)
    model = RandomFeatureModel(fm, np.ones((1, fm.n_features)))
    policy = PolicySequence([model], np.zeros(1), input_dims=[0])
    x = np.array([[0.4, 10.0], [-0.2, -3.0]])
    np.testing.assert_allclose(policy.control(0, x), model.evaluate(x[:, :1]))


def test_summary_without_controls_has_no_mean_control(interbank):
    mu = interbank.summary(np.ones((3, 1)))
    assert isinstance(mu, MeasureSummary) and mu.mean_control is None
