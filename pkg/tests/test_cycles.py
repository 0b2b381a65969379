import math

import numpy as np
import pytest
import scipy.sparse as sp

from conftest import brute_c3, brute_u3, random_graph
from netgof.core.enums import ModelTag
from netgof.core.exceptions import UndefinedStatisticError
from netgof.services.cycles import count_c3, cycle_stats, t_n, u_n3
from netgof.services.fitters import ProbMatrix


def test_triangle_has_six_ordered_triples(triangle):
    assert count_c3(triangle) == 6


def test_path_has_no_triangles(path):
    assert count_c3(path) == 0


def random_pair(seed: int):
    """A random graph on at most 12 nodes and a random symmetric Ω̂ in [0, 1]."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 13))
    net = random_graph(n, float(rng.uniform(0.2, 0.8)), seed=seed)
    omega = rng.uniform(0, 1, size=(n, n))
    return net, (omega + omega.T) / 2


def test_c3_matches_triple_loop():
    net = random_graph(30, 0.3, seed=1)
    assert count_c3(net) == brute_c3(net.adjacency.toarray())


@pytest.mark.parametrize("seed", range(100))
def test_small_pairs_match_triple_loop(seed):
    net, omega = random_pair(seed)
    dense = net.adjacency.toarray()
    assert count_c3(net) == brute_c3(dense)
    assert u_n3(net, omega) == pytest.approx(brute_u3(dense, omega), rel=1e-8, abs=1e-8)


def test_perfect_fit_gives_zero(karate):
    dense = karate.adjacency.toarray()
    assert u_n3(karate, dense) == pytest.approx(0.0, abs=1e-9)
    assert t_n(karate, dense) == pytest.approx(0.0, abs=1e-9)


def test_zero_fit_counts_triangles(karate):
    zeros = np.zeros((karate.n, karate.n))
    c3 = count_c3(karate)
    assert u_n3(karate, zeros) == pytest.approx(c3)
    assert t_n(karate, zeros) == pytest.approx(math.sqrt(c3 / 6))


def test_factored_u3_matches_dense_and_triple_loop():
    net = random_graph(12, 0.4, seed=4)
    rng = np.random.default_rng(4)
    theta = rng.uniform(0.2, 0.6, size=12)
    pi = rng.dirichlet(np.ones(3), size=12)
    p = np.array([[1.0, 0.3, 0.1], [0.3, 1.0, 0.2], [0.1, 0.2, 1.0]])
    prob = ProbMatrix(model=ModelTag.DCMM, theta=theta, pi=pi, p=p)

    factored = u_n3(net, prob)
    assert factored == pytest.approx(u_n3(net, prob.dense()), rel=1e-10)
    assert factored == pytest.approx(brute_u3(net.adjacency.toarray(), prob.dense()), rel=1e-10)


def test_dense_only_prob_matrix_is_accepted(triangle):
    prob = ProbMatrix.from_dense(np.full((3, 3), 0.5))
    # every off-diagonal residual is 0.5: 6 ordered triples of 0.125
    assert u_n3(triangle, prob) == pytest.approx(0.75)


def test_shape_and_symmetry_are_checked(triangle):
    with pytest.raises(ValueError):
        u_n3(triangle, np.zeros((4, 4)))
    with pytest.raises(ValueError):
        u_n3(triangle, np.triu(np.ones((3, 3))))


def test_triangle_free_statistic_is_undefined(path):
    with pytest.raises(UndefinedStatisticError):
        cycle_stats(path, np.zeros((4, 4)))


def test_cycle_stats_bundle(triangle):
    stats = cycle_stats(triangle, np.zeros((3, 3)))
    assert (stats.c_n3, stats.u_n3, stats.t_n) == (6, pytest.approx(6.0), pytest.approx(1.0))


def test_factored_u3_with_weighted_adjacency():
    rng = np.random.default_rng(6)
    n, k = 11, 2
    weights = np.triu(rng.uniform(0.5, 3.0, size=(n, n)) * (rng.random((n, n)) < 0.5), k=1)
    adjacency = sp.csr_matrix(weights + weights.T)
    prob = ProbMatrix(
        model=ModelTag.DCMM,
        theta=rng.uniform(0.2, 0.6, size=n),
        pi=rng.dirichlet(np.ones(k), size=n),
        p=np.array([[1.0, 0.4], [0.4, 1.0]]),
    )

    expected = brute_u3(adjacency.toarray(), prob.dense())
    assert u_n3(adjacency, prob) == pytest.approx(expected, rel=1e-10)
    assert u_n3(adjacency, prob.dense()) == pytest.approx(expected, rel=1e-10)
