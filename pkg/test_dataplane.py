"""
Tests for the data-plane bounds and cluster-occupancy distributions
"""

import numpy as np
import pytest
from scipy.stats import hypergeom

from analysis.dataplane import (
    KPrimeDistribution, CentralityProfile, PathLengthDistribution,
    lb, ub, kprime_pmf, kprime_pmf_vector, tsd_bounds_given_d, tsd_bounds, normalized_bounds, omega_ratio,
)
from utils.errors import DomainError, DegenerateProfile


@pytest.mark.parametrize('d, kprime, expected', [(5, 0, 5), (3, 3, 0), (4, 1, 2), (3, 4, 0), (6, 2, 2)])
def test_lower_bound(d, kprime, expected):
    assert lb(d, kprime) == pytest.approx(expected)


@pytest.mark.parametrize('d, kprime, expected', [(5, 3, 3), (5, 0, 5), (5, 1, 5), (4, 5, 0), (1, 2, 0)])
def test_upper_bound(d, kprime, expected):
    assert ub(d, kprime) == pytest.approx(expected)


def test_bounds_reject_kprime_outside_path():
    with pytest.raises(DomainError):
        lb(3, 5)
    with pytest.raises(DomainError):
        ub(3, -1)


def test_bounds_ordered_and_monotone():
    for d in range(1, 12):
        lowers = [lb(d, i) for i in range(d + 2)]
        uppers = [ub(d, i) for i in range(d + 2)]
        for low, high in zip(lowers, uppers):
            assert 0 <= low <= high <= d
        assert all(a >= b for a, b in zip(lowers, lowers[1:]))
        assert all(a >= b for a, b in zip(uppers, uppers[1:]))


def test_pmf_empty_cluster():
    assert kprime_pmf(KPrimeDistribution.hypergeometric(10, 0), 4, 0) == 1.0


def test_pmf_small_hypergeometric():
    assert kprime_pmf(KPrimeDistribution.hypergeometric(5, 2), 1, 1) == pytest.approx(0.6)


def test_fisher_with_unit_odds_equals_hypergeometric():
    assert kprime_pmf(KPrimeDistribution.fisher(5, 2, 1.0), 1, 1) == pytest.approx(0.6)
    for N, k, d in [(50, 7, 4), (1000, 200, 5), (55567, 50, 9)]:
        central = kprime_pmf_vector(KPrimeDistribution.hypergeometric(N, k), d)
        fisher = kprime_pmf_vector(KPrimeDistribution.fisher(N, k, 1.0), d)
        assert np.allclose(central, fisher, atol=1e-14)


def occupancy_cells(count, seed):
    rng = np.random.default_rng(seed)
    cells = []
    for _ in range(count):
        N = int(rng.integers(2, 20001))
        cells.append((N, int(rng.integers(0, N + 1)), int(rng.integers(1, min(N - 1, 30) + 1))))
    return cells


def test_unit_odds_grid_matches_hypergeometric():
    for N, k, d in occupancy_cells(200, 31):
        central = kprime_pmf_vector(KPrimeDistribution.hypergeometric(N, k), d)
        fisher = kprime_pmf_vector(KPrimeDistribution.fisher(N, k, 1.0), d)
        assert np.max(np.abs(central - fisher)) <= 1e-12
        assert abs(central.sum() - 1.0) <= 1e-12
        assert abs(fisher.sum() - 1.0) <= 1e-12
        reference = hypergeom(N, k, d + 1).pmf(np.arange(d + 2))
        assert np.max(np.abs(central - reference)) <= 1e-12, (N, k, d)


@pytest.mark.parametrize('dist', [
    KPrimeDistribution.hypergeometric(20, 3),
    KPrimeDistribution.hypergeometric(55567, 10000),
    KPrimeDistribution.fisher(55567, 50, 180.0),
    KPrimeDistribution.fisher(12, 10, 0.2),
])
def test_pmf_sums_to_one(dist):
    for d in (1, 3, 8):
        assert abs(kprime_pmf_vector(dist, d).sum() - 1.0) <= 1e-12


def test_pmf_zero_outside_support():
    # N - k = 2 outsiders, so at least d+1-2 members on a path of d+1 nodes
    pmf = kprime_pmf_vector(KPrimeDistribution.hypergeometric(6, 4), 4)
    assert pmf[0] == 0 and pmf[1] == 0 and pmf[2] == 0
    assert pmf[3] > 0 and pmf[5] == 0


def test_fisher_stochastically_increasing_in_odds():
    low = np.cumsum(kprime_pmf_vector(KPrimeDistribution.fisher(1000, 100, 2.0), 6))
    high = np.cumsum(kprime_pmf_vector(KPrimeDistribution.fisher(1000, 100, 8.0), 6))
    assert np.all(high <= low + 1e-15)


def test_pmf_rejects_path_longer_than_population():
    with pytest.raises(DomainError):
        kprime_pmf_vector(KPrimeDistribution.hypergeometric(4, 1), 4)


def test_bounds_without_cluster():
    assert tsd_bounds_given_d(3, KPrimeDistribution.hypergeometric(100, 0), 1.0) == (3.0, 3.0)


def test_bounds_with_everything_in_cluster():
    assert tsd_bounds_given_d(2, KPrimeDistribution.hypergeometric(1000, 1000), 1.0) == (0.0, 0.0)


def test_bounds_scale_with_mean_update_time():
    dist = KPrimeDistribution.hypergeometric(1000, 100)
    lower, upper = tsd_bounds_given_d(4, dist, 1.0)
    scaled = tsd_bounds_given_d(4, dist, 2.5)
    assert scaled == pytest.approx((2.5 * lower, 2.5 * upper))


# normalized bounds for N=1000, (d, k) -> (upper, lower)
BOUNDS_TABLE = {
    (2, 20): (0.99943, 0.97000), (2, 50): (0.99638, 0.92506),
    (2, 100): (0.98562, 0.85049), (2, 200): (0.94419, 0.70395),
    (5, 20): (0.99889, 0.94187), (5, 50): (0.99310, 0.86169),
    (5, 100): (0.97389, 0.74495), (5, 200): (0.90777, 0.56381),
}


@pytest.mark.parametrize('d, k', sorted(BOUNDS_TABLE))
def test_normalized_bounds_table(d, k):
    upper, lower = BOUNDS_TABLE[(d, k)]
    low, high = normalized_bounds(PathLengthDistribution.point_mass(d), KPrimeDistribution.hypergeometric(1000, k))
    assert high == pytest.approx(upper, abs=5e-5)
    assert low == pytest.approx(lower, abs=5e-5)


def test_mixture_over_path_lengths():
    path_dist = PathLengthDistribution({2: 0.5, 5: 0.5})
    assert tsd_bounds(path_dist, KPrimeDistribution.hypergeometric(100, 0), 1.0) == pytest.approx((3.5, 3.5))
    assert tsd_bounds(PathLengthDistribution.point_mass(4), KPrimeDistribution.hypergeometric(100, 0), 2.0) == \
        pytest.approx((8.0, 8.0))


def test_betweenness_weighting_tightens_bounds():
    path_dist = PathLengthDistribution({3: 0.3, 4: 0.4, 5: 0.3})
    _, random_upper = normalized_bounds(path_dist, KPrimeDistribution.hypergeometric(5000, 50))
    _, central_upper = normalized_bounds(path_dist, KPrimeDistribution.fisher(5000, 50, 200.0))
    assert central_upper < random_upper <= 1.0


def test_omega_ratio():
    assert omega_ratio(CentralityProfile({0: 2.0, 1: 2.0, 2: 2.0}), [0]) == pytest.approx(1.0)
    assert omega_ratio(CentralityProfile({0: 10.0, 1: 10.0, 2: 1.0, 3: 1.0}), [0, 1]) == pytest.approx(10.0)


@pytest.mark.parametrize('cluster', [[], [0, 1, 2, 3]])
def test_omega_ratio_needs_proper_subset(cluster):
    with pytest.raises(DegenerateProfile):
        omega_ratio(CentralityProfile({0: 1.0, 1: 1.0, 2: 1.0, 3: 1.0}), cluster)


def test_omega_ratio_zero_outside():
    with pytest.raises(DegenerateProfile):
        omega_ratio(CentralityProfile({0: 5.0, 1: 0.0}), [0])


def test_profile_ranking_ties_by_id():
    profile = CentralityProfile({3: 1.0, 1: 2.0, 0: 1.0, 2: 2.0})
    assert profile.ranked() == [1, 2, 0, 3]


def test_path_length_distribution_validation():
    with pytest.raises(DomainError):
        PathLengthDistribution({0: 1.0})
    with pytest.raises(DomainError):
        PathLengthDistribution({2: 0.5, 3: 0.4})


def test_path_length_distribution_csv(tmp_path):
    path_dist = PathLengthDistribution.from_counts({2: 1, 3: 2, 4: 1})
    path = tmp_path / 'pd.csv'
    path_dist.save_csv(path)
    loaded = PathLengthDistribution.load_csv(path)
    assert loaded.pmf == pytest.approx({2: 0.25, 3: 0.5, 4: 0.25})
    assert loaded.mean() == pytest.approx(3.0)
