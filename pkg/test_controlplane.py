"""
Tests for the control-plane convergence chain
"""

import math

import numpy as np
import pytest

from analysis.controlplane import (
    ChainScenario, DegreeFunction, FULL_MESH, POISSON_GRAPH,
    n_updated, degree_fullmesh, degree_poisson_expected, p_sdn, p_sdn_vector, partial_limit,
    mgf_tc, expected_tc, expected_t_partial, moment_tc, variance_tc, sweep,
)
from topology.generators import gen_poisson
from utils.errors import DomainError, DegenerateDegree


def test_updated_count_before_and_after_cluster():
    assert n_updated(2, 3, 5) == 2
    assert n_updated(3, 3, 5) == 3
    assert n_updated(4, 3, 5) == 8
    assert n_updated(1, 0, 10) == 10


def test_updated_count_checks_range():
    with pytest.raises(DomainError):
        n_updated(6, 0, 5, N=10)


def test_degree_fullmesh():
    assert degree_fullmesh(1, 0, 10, 5) == 5
    assert degree_fullmesh(1, 1, 10, 5) == 9
    assert degree_fullmesh(2, 1, 10, 5) == 4


def test_degree_poisson_expected():
    assert degree_poisson_expected(1, 1, 100, 1, 0.05) == pytest.approx(4.95)
    with pytest.raises(DomainError):
        degree_poisson_expected(1, 1, 100, 1, 0.0)


@pytest.mark.parametrize('N, k', [(1, 1), (3, 1), (10, 4), (1000, 100), (50, 50)])
def test_psdn_is_a_distribution(N, k):
    weights = p_sdn_vector(N, k)
    assert weights.shape == (N - k + 1,)
    assert np.all(weights >= 0)
    assert weights.sum() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize('N', [10, 100, 1000, 5000])
def test_psdn_normalizes_for_large_networks(N):
    for k in sorted({1, 2, max(1, N // 10), N // 2, N - 1, N}):
        assert abs(p_sdn_vector(N, k).sum() - 1.0) <= 1e-10


@pytest.mark.slow
@pytest.mark.parametrize('updated', [1, 10])
def test_poisson_degree_matches_sampled_graphs(updated):
    """Mean number of non-updated neighbors of the updated set over sampled G(100, 0.05)"""
    rng = np.random.default_rng(41)
    counts = []
    for seed in range(10000):
        graph = gen_poisson(100, 0.05, seed)
        chosen = set(rng.choice(100, updated, replace=False).tolist())
        eligible = {v for u in chosen for v in graph.neighbors(u)} - chosen
        counts.append(len(eligible))
    expected = degree_poisson_expected(updated, updated, 100, 1, 0.05)
    se = np.std(counts, ddof=1) / math.sqrt(len(counts))
    assert abs(np.mean(counts) - expected) <= 3 * se


def test_psdn_single_member_is_uniform():
    assert p_sdn_vector(4, 1) == pytest.approx([0.25] * 4)
    assert p_sdn(0, 10, 3) == pytest.approx(0.3)


def test_partial_limit():
    assert partial_limit(1, 4, 10) == 0
    assert partial_limit(3, 4, 10) == 2
    assert partial_limit(10, 4, 10) == 4
    assert partial_limit(20, 4, 10) == 10


def test_mgf_small_full_mesh():
    scenario = ChainScenario.full_mesh(3, 1)
    assert mgf_tc(0.5, scenario) == pytest.approx(8 / 3)
    assert mgf_tc(0.0, scenario) == pytest.approx(1.0)


def test_mgf_outside_region():
    with pytest.raises(DomainError):
        mgf_tc(1.0, ChainScenario.full_mesh(3, 1))


@pytest.mark.parametrize('N, expected', [(2, 1.0), (3, 1.5), (4, 11 / 6)])
def test_expected_tc_harmonic(N, expected):
    assert expected_tc(ChainScenario.full_mesh(N, 1)) == pytest.approx(expected)


def test_expected_tc_harmonic_sum_large():
    N = 200
    harmonic = sum(1.0 / j for j in range(1, N))
    assert expected_tc(ChainScenario.full_mesh(N, 1, rate=2.0)) == pytest.approx(harmonic / 2.0)


def test_mgf_derivative_matches_mean():
    for scenario in (ChainScenario.full_mesh(30, 4), ChainScenario.poisson(40, 5, 0.2)):
        assert moment_tc(1, scenario) == pytest.approx(expected_tc(scenario), rel=1e-6)


def random_chain_cells(count, seed):
    rng = np.random.default_rng(seed)
    cells = []
    while len(cells) < count:
        N = int(rng.integers(2, 51))
        k = int(rng.integers(1, N))
        cells.append((N, k))
    return cells


@pytest.mark.parametrize('N, k', random_chain_cells(20, 59))
def test_mgf_derivative_matches_mean_on_random_cells(N, k):
    scenario = ChainScenario.full_mesh(N, k)
    assert moment_tc(1, scenario) == pytest.approx(expected_tc(scenario), rel=1e-6)


def test_variance_single_member_cluster():
    # k=1: a sum of independent exponentials with rates 2 and 1
    assert variance_tc(ChainScenario.full_mesh(3, 1)) == pytest.approx(1.25, rel=1e-4)


def test_whole_network_in_cluster():
    scenario = ChainScenario.full_mesh(7, 7)
    assert expected_tc(scenario) == 0.0
    assert expected_t_partial(7, scenario) == 0.0
    assert mgf_tc(0.3, scenario) == 1.0


def test_partial_extremes():
    for scenario in (ChainScenario.full_mesh(60, 7), ChainScenario.poisson(60, 7, 0.1)):
        assert expected_t_partial(60, scenario) == expected_tc(scenario)
        assert expected_t_partial(1, scenario) == 0.0


def test_partial_monotone_in_ell():
    scenario = ChainScenario.poisson(80, 6, 0.1)
    values = [expected_t_partial(ell, scenario) for ell in range(1, 81)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_partial_rejects_ell_out_of_range():
    with pytest.raises(DomainError):
        expected_t_partial(0, ChainScenario.full_mesh(5, 1))
    with pytest.raises(DomainError):
        expected_t_partial(6, ChainScenario.full_mesh(5, 1))


def test_tc_decreases_with_cluster_size():
    values = [expected_tc(ChainScenario.full_mesh(100, k)) for k in (1, 10, 30, 60, 100)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_zero_degree_is_reported():
    scenario = ChainScenario.full_mesh(10, 5)
    deg = DegreeFunction(scenario, vector=lambda x: np.zeros(scenario.steps))
    with pytest.raises(DegenerateDegree):
        expected_tc(scenario, deg)


def test_custom_degree_function_shape_checked():
    scenario = ChainScenario.full_mesh(10, 5)
    deg = DegreeFunction(scenario, vector=lambda x: np.ones(3))
    with pytest.raises(DomainError):
        expected_tc(scenario, deg)


def test_scenario_validation():
    with pytest.raises(DomainError):
        ChainScenario(10, 11)
    with pytest.raises(DomainError):
        ChainScenario(10, 2, degree_model=POISSON_GRAPH, p=0.0)
    with pytest.raises(DomainError):
        ChainScenario(10, 2, degree_model="ring")


def test_poisson_partial_anchor():
    frame = sweep(1000, [1, 100], [100], degree_model=POISSON_GRAPH, p=0.01)
    value = frame.loc[frame.k == 100, "E_Tl_100_norm"].item()
    assert 0.4 <= value <= 0.6


def test_full_mesh_large_cluster_keeps_most_of_tc():
    frame = sweep(1000, [500], [], degree_model=FULL_MESH)
    assert frame.E_Tc_norm.item() > 0.7


def test_sweep_columns_and_baseline():
    frame = sweep(50, [0, 1, 10, 50], [5, 50])
    assert list(frame.columns) == ["k", "E_Tc", "E_Tc_norm", "E_Tl_5", "E_Tl_5_norm", "E_Tl_50", "E_Tl_50_norm"]
    assert frame.E_Tc_norm.iloc[0] == pytest.approx(1.0)
    assert frame.E_Tc_norm.iloc[1] == pytest.approx(1.0)
    assert frame.E_Tc.iloc[-1] == 0.0
    assert np.allclose(frame.E_Tl_50, frame.E_Tc)
