"""
Tests for update-time models: sampling, means and the exponential fit
"""

import json
import math

import numpy as np
import pytest

from analysis.timemodel import (
    TimeModel, SdnLatencyModel, PathObservation, sample, sample_many, mean, variance,
    fit_exponential, load_observations, model_from_dict, model_to_json, save_model_json,
    synthetic_path_delays, empirical_ccdf,
)
from utils.errors import DomainError, EmptyObservations, ParseError
from utils.random_streams import make_stream


def test_deterministic_sample():
    assert sample(TimeModel.deterministic(1.0), make_stream(1)) == 1.0


def test_exponential_sample_mean():
    draws = sample_many(TimeModel.exponential(1.0), make_stream(7), 100000)
    assert 0.98 <= draws.mean() <= 1.02
    assert draws.min() >= 0


def test_uniform_sample_mean():
    draws = sample_many(TimeModel.uniform(0.0, 2.0), make_stream(7), 100000)
    assert 0.985 <= draws.mean() <= 1.015
    assert draws.min() >= 0 and draws.max() <= 2.0


def test_empirical_samples_come_from_stored_values():
    model = TimeModel.empirical([2.0, 4.0])
    draws = sample_many(model, make_stream(3), 1000)
    assert set(np.unique(draws)) <= {2.0, 4.0}


def test_sample_matches_sample_many_sequence():
    model = TimeModel.exponential(2.0)
    rng = make_stream(11)
    singles = [sample(model, rng) for _ in range(5)]
    batch = sample_many(model, make_stream(11), 5)
    assert np.allclose(singles, batch)


def test_sampling_is_reproducible():
    model = TimeModel.uniform(0.5, 1.5)
    first = sample_many(model, make_stream(42, 3), 50)
    second = sample_many(model, make_stream(42, 3), 50)
    assert np.array_equal(first, second)


@pytest.mark.parametrize('model, expected', [
    (TimeModel.exponential(1.0), 1.0),
    (TimeModel.exponential(4.0), 0.25),
    (TimeModel.uniform(0.0, 2.0), 1.0),
    (TimeModel.empirical([2.0, 4.0]), 3.0),
    (TimeModel.deterministic(0.0), 0.0),
])
def test_closed_form_mean(model, expected):
    assert mean(model) == pytest.approx(expected)


@pytest.mark.parametrize('model', [
    TimeModel.exponential(1.5),
    TimeModel.uniform(1.0, 3.0),
    TimeModel.empirical([0.5, 1.0, 4.0]),
])
def test_sample_mean_within_four_sigma(model):
    n = 20000
    draws = sample_many(model, make_stream(5), n)
    assert abs(draws.mean() - mean(model)) <= 4 * math.sqrt(variance(model) / n)


@pytest.mark.parametrize('kwargs', [
    {'variant': 'exponential', 'rate': 0.0},
    {'variant': 'uniform', 'lo': 2.0, 'hi': 1.0},
    {'variant': 'uniform', 'lo': -1.0, 'hi': 1.0},
    {'variant': 'deterministic', 'value': -0.5},
])
def test_invalid_models_rejected(kwargs):
    with pytest.raises(DomainError):
        model_from_dict(kwargs)


def test_empty_empirical_rejected():
    with pytest.raises(DomainError):
        TimeModel.empirical([])


def test_sdn_latency_defaults_to_zero():
    latency = SdnLatencyModel()
    assert latency.mean() == 0.0
    assert latency.sample(make_stream(0)) == 0.0


def test_path_observation_validation():
    with pytest.raises(DomainError):
        PathObservation(1.0, 0)
    with pytest.raises(DomainError):
        PathObservation(-1.0, 2)


def test_fit_single_observation():
    model = fit_exponential([PathObservation(6.27, 1)])
    assert model.variant == 'exponential'
    assert model.rate == pytest.approx(1 / 6.27)


def test_fit_pools_hops():
    model = fit_exponential([PathObservation(2.0, 1), PathObservation(4.0, 2)])
    assert mean(model) == pytest.approx(2.0)
    assert model.rate == pytest.approx(0.5)


def test_fit_empty_raises():
    with pytest.raises(EmptyObservations):
        fit_exponential([])


def test_fit_is_scale_equivariant():
    observations = [PathObservation(1.5, 2), PathObservation(3.0, 4), PathObservation(0.7, 1)]
    scaled = [PathObservation(obs.t_sd * 3.0, obs.d) for obs in observations]
    assert fit_exponential(scaled).rate == pytest.approx(fit_exponential(observations).rate / 3.0)


def test_fit_recovers_generating_rate():
    rng = make_stream(2024)
    model = TimeModel.exponential(2.0)
    lengths = rng.integers(1, 7, size=10000)
    observations = [PathObservation(float(synthetic_path_delays(model, int(d), 1, rng)[0]), int(d))
                    for d in lengths]
    assert 1.9 <= fit_exponential(observations).rate <= 2.1


def test_load_observations(tmp_path):
    path = tmp_path / 'obs.csv'
    path.write_text('t_sd,d\n2.0,1\n4.0,2\n')
    observations = load_observations(path)
    assert observations == [PathObservation(2.0, 1), PathObservation(4.0, 2)]


def test_load_observations_missing_column(tmp_path):
    path = tmp_path / 'obs.csv'
    path.write_text('delay,hops\n2.0,1\n')
    with pytest.raises(ParseError):
        load_observations(path)


def test_model_json(tmp_path):
    model = TimeModel.exponential(0.5)
    assert json.loads(model_to_json(model)) == {'variant': 'exponential', 'rate': 0.5}
    path = tmp_path / 'model.json'
    save_model_json(model, path)
    assert model_from_dict(json.loads(path.read_text())) == model


def test_model_from_mean():
    assert model_from_dict({'variant': 'exponential', 'mean': 4.0}).rate == pytest.approx(0.25)


def test_synthetic_path_delays_mean():
    delays = synthetic_path_delays(TimeModel.exponential(1.0), 4, 20000, make_stream(9))
    assert delays.shape == (20000,)
    assert abs(delays.mean() - 4.0) < 4 * math.sqrt(4.0 / 20000)


def test_empirical_ccdf():
    frame = empirical_ccdf([3.0, 1.0, 2.0, 4.0])
    assert list(frame['t']) == [1.0, 2.0, 3.0, 4.0]
    assert list(frame['ccdf']) == pytest.approx([0.75, 0.5, 0.25, 0.0])
