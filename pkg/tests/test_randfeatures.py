import math

import numpy as np
import pytest

from gpp.errors import DimensionError, IllConditionedFitError, PolicyFormatError
from gpp.randfeatures import (FeatureMap, RandomFeatureModel, RidgeSpec, evaluate, fit, input_standardization,
                              model_from_dict,
                              model_to_dict, new_feature_map, project_l2)
from gpp.stochastics import SeedSpec


@pytest.fixture
def fmap():
    return new_feature_map(SeedSpec(3), d=2, d_h=16)


def test_features_shape_and_bias_column(fmap):
    x = np.random.default_rng(0).normal(size=(5, 2))
    phi = fmap.features(x)
    assert phi.shape == (5, 17)
    np.testing.assert_array_equal(phi[:, -1], 1.0)
    assert fmap.features(x[0]).shape == (17,)


def test_features_reject_wrong_dimension(fmap):
    with pytest.raises(DimensionError):
        fmap.features(np.zeros((4, 3)))


def test_feature_map_is_reproducible_and_read_only(fmap):
    again = new_feature_map(SeedSpec(3), d=2, d_h=16)
    np.testing.assert_array_equal(fmap.A_tilde, again.A_tilde)
    np.testing.assert_array_equal(fmap.b_tilde, again.b_tilde)
    with pytest.raises(ValueError):
        fmap.A_tilde[0, 0] = 1.0


def test_unknown_activation():
    with pytest.raises(ValueError):
        FeatureMap(np.ones((2, 1)), np.ones(2), activation="swish")


def test_fit_recovers_function_in_span(fmap):
    rng = np.random.default_rng(1)
    x = rng.uniform(-2, 2, size=(200, 2))
    theta = rng.normal(size=(3, fmap.n_features))
    targets = fmap.features(x) @ theta.T
    model = fit(x, targets, fmap, RidgeSpec(0.0))
    query = rng.uniform(-2, 2, size=(20, 2))
    np.testing.assert_allclose(model(query), fmap.features(query) @ theta.T, atol=1e-6)


def test_unregularised_fit_needs_enough_points(fmap):
    x = np.random.default_rng(2).normal(size=(3, 2))
    with pytest.raises(IllConditionedFitError):
        fit(x, np.zeros((3, 1)), fmap, RidgeSpec(0.0))


def test_fit_rejects_mismatched_rows(fmap):
    with pytest.raises(DimensionError):
        fit(np.zeros((5, 2)), np.zeros((4, 1)), fmap)


def test_clip_bound_limits_coefficients(fmap):
    rng = np.random.default_rng(4)
    x = rng.normal(size=(300, 2))
    model = fit(x, 50 * np.sin(x[:, :1]), fmap, RidgeSpec(1e-8), clip_bound=0.1)
    assert np.all(np.abs(model.theta) <= 0.1)


def test_projection_is_idempotent(fmap):
    x = np.random.default_rng(5).uniform(-2, 2, size=(500, 2))
    targets = np.sin(x[:, :1]) + np.cos(x[:, 1:])
    first = project_l2((x, targets), fmap, RidgeSpec(0.0))
    second = project_l2((x, first(x)), fmap, RidgeSpec(0.0))
    np.testing.assert_allclose(second(x), first(x), atol=1e-6)


def test_more_features_fit_better():
    x = np.random.default_rng(6).uniform(-math.pi, math.pi, size=(1000, 1))
    y = np.sin(x)
    errors = {}
    for d_h in (16, 256):
        model = fit(x, y, new_feature_map(SeedSpec(10), d=1, d_h=d_h))
        errors[d_h] = float(np.mean((model(x) - y) ** 2))
    assert errors[256] <= errors[16]


def test_model_round_trip_is_bit_identical(fmap):
    rng = np.random.default_rng(7)
    model = RandomFeatureModel(fmap, rng.normal(size=(2, fmap.n_features)), clip_bound=5.0)
    restored = model_from_dict(model_to_dict(model))
    x = rng.normal(size=(10, 2))
    np.testing.assert_array_equal(evaluate(restored, x), evaluate(model, x))
    assert restored.clip_bound == 5.0


def test_unclipped_model_round_trip(fmap):
    model = RandomFeatureModel.zeros(fmap, 1)
    data = model_to_dict(model)
    assert data["clip_bound"] is None
    assert math.isinf(model_from_dict(data).clip_bound)


def test_model_from_dict_rejects_bad_header(fmap):
    data = model_to_dict(RandomFeatureModel.zeros(fmap, 1))
    data["d1"] = 4
    with pytest.raises(PolicyFormatError):
        model_from_dict(data)


def test_standardized_fit_recovers_function_in_scaled_span(fmap):
    rng = np.random.default_rng(8)
    x = np.column_stack([5.0 + 0.3 * rng.normal(size=400), -3.0 + 2.0 * rng.normal(size=400)])
    shift, scale = input_standardization(x)
    theta = rng.normal(size=(1, fmap.n_features))
    targets = fmap.features((x - shift) / scale) @ theta.T
    model = fit(x, targets, fmap, RidgeSpec(0.0), standardize=True)
    np.testing.assert_array_equal(model.input_shift, shift)
    np.testing.assert_array_equal(model.input_scale, scale)
    query = x[:20] + 0.01
    np.testing.assert_allclose(model(query), fmap.features((query - shift) / scale) @ theta.T, atol=1e-6)


def test_standardized_inputs_have_unit_spread(fmap):
    x = np.random.default_rng(9).normal(loc=[5.0, -1.0], scale=[0.05, 3.0], size=(1000, 2))
    model = fit(x, x[:, :1], fmap, standardize=True)
    z = model.transform(x)
    np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-10)
    np.testing.assert_allclose(z.std(axis=0), 1.0, rtol=1e-10)


def test_constant_coordinate_is_only_centred(fmap):
    x = np.column_stack([np.full(50, 0.5), np.linspace(-1, 1, 50)])
    model = fit(x, np.ones((50, 1)), fmap, standardize=True)
    assert model.input_shift[0] == pytest.approx(0.5)
    assert model.input_scale[0] == 1.0
    assert np.all(np.isfinite(model(x)))


def test_plain_fit_keeps_identity_transform(fmap):
    x = np.random.default_rng(10).normal(size=(40, 2))
    model = fit(x, x[:, :1], fmap)
    assert not model.standardized
    assert "input_shift" not in model_to_dict(model)


def test_standardized_model_round_trip(fmap):
    rng = np.random.default_rng(11)
    x = rng.normal(loc=3.0, size=(100, 2))
    model = fit(x, np.sin(x[:, :1]), fmap, RidgeSpec(1e-3), standardize=True)
    data = model_to_dict(model)
    assert len(data["input_shift"]) == 2 and len(data["input_scale"]) == 2
    restored = model_from_dict(data)
    np.testing.assert_array_equal(restored(x), model(x))


def test_model_rejects_bad_input_scale(fmap):
    with pytest.raises(ValueError):
        RandomFeatureModel(fmap, np.zeros((1, fmap.n_features)), input_scale=np.array([1.0, 0.0]))
    with pytest.raises(DimensionError):
        RandomFeatureModel(fmap, np.zeros((1, fmap.n_features)), input_shift=np.zeros(3))
