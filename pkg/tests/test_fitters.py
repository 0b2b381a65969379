import numpy as np
import pytest

from conftest import block_network, complete_graph
from netgof.core.enums import ModelTag
from netgof.core.exceptions import FitError
from netgof.schemas.config import GofConfig, VertexHuntingConfig
from netgof.schemas.simulation import PiSpec, ThetaSpec
from netgof.services.fitters import (
    ProbMatrix,
    clip_to_unit,
    fit_dcbm,
    fit_dcmm,
    fit_mmsbm,
    fit_model,
    fit_sbm,
    hull_vertices,
    oracle_retrieve,
)
from netgof.services.membership import HardLabeling, net_round
from netgof.services.utils.linalg import align_columns


SP = VertexHuntingConfig.theory()
HETEROGENEOUS = ThetaSpec(law="uniform", low=0.2, high=0.5)
DENSE = ThetaSpec(law="uniform", low=0.4, high=0.9)


def dcmm_truth(n: int, k: int, seed: int, b: float = 0.3, theta: ThetaSpec = HETEROGENEOUS):
    return block_network(
        n, k, model=ModelTag.DCMM, theta=theta, b=b,
        pi=PiSpec(kind="dirichlet", pure_fraction=0.15, concentration=0.5), seed=seed,
    )


def test_dcmm_fit_matches_closed_form():
    net, _, _ = dcmm_truth(200, 2, seed=1, b=0.1, theta=DENSE)
    fit = fit_dcmm(net, 2, SP, regularize=False)
    assert "vh_identity_reset" not in fit.flags

    a = net.adjacency.toarray()
    h = fit.labels.matrix
    ah = a @ h
    closed_form = ah @ np.linalg.inv(h.T @ ah) @ ah.T
    np.testing.assert_allclose(fit.omega.dense(), closed_form, rtol=1e-8, atol=1e-10)


@pytest.mark.parametrize("seed", range(20))
def test_dcmm_fit_with_given_labels_matches_closed_form(seed):
    k = 2 + seed % 2
    net, _, params = dcmm_truth(150, k, seed=seed, b=0.1, theta=DENSE)
    labels = net_round(params.pi)
    fit = fit_dcmm(net, k, SP, regularize=False, labels=labels)

    a = net.adjacency.toarray()
    ah = a @ labels.matrix
    closed_form = ah @ np.linalg.inv(labels.matrix.T @ ah) @ ah.T
    np.testing.assert_allclose(fit.omega.dense(), closed_form, rtol=1e-8, atol=1e-10)


def test_dcmm_oracle_pipeline_reproduces_omega():
    _, omega, _ = dcmm_truth(80, 2, seed=3)
    fit = fit_dcmm(omega, 2, SP, regularize=False)
    np.testing.assert_allclose(fit.omega.dense(), omega, atol=1e-8)


@pytest.mark.parametrize("seed", range(20))
def test_oracle_retrieve_is_exact(seed):
    k = 2 + seed % 2
    _, omega, params = dcmm_truth(90, k, seed=seed)
    theta, pi, p = oracle_retrieve(omega, net_round(params.pi), k)

    perm = align_columns(pi, params.pi)
    np.testing.assert_allclose(theta, params.theta, rtol=1e-9)
    np.testing.assert_allclose(pi[:, perm], params.pi, atol=1e-9)
    np.testing.assert_allclose(p[np.ix_(perm, perm)], params.p, atol=1e-9)


def test_oracle_retrieve_all_pure_gives_hard_labels():
    _, omega, params = block_network(60, 2, model=ModelTag.DCBM, theta=HETEROGENEOUS, b=0.2, seed=5)
    _, pi, _ = oracle_retrieve(omega, net_round(params.pi), 2)
    perm = align_columns(pi, params.pi)
    np.testing.assert_allclose(pi[:, perm], params.pi, atol=1e-9)


def test_hull_vertices_two_communities():
    points = np.array([[0.5, 0.5], [0.9, 0.1], [0.2, 0.8], [0.6, 0.4]])
    assert hull_vertices(points, 2).tolist() == [1, 2]


def test_mmsbm_oracle_pipeline_reproduces_omega():
    _, omega, _ = block_network(
        60, 2, model=ModelTag.MMSBM, theta=ThetaSpec(law="constant", alpha_n=0.3), b=0.3,
        pi=PiSpec(kind="dirichlet", pure_fraction=0.2, concentration=0.5), seed=6,
    )
    fit = fit_mmsbm(omega, 2, SP, regularize=False)
    np.testing.assert_allclose(fit.omega.dense(), omega, atol=1e-8)


def test_mmsbm_single_community_is_mean_density(karate):
    fit = fit_mmsbm(karate, 1)
    density = karate.adjacency.sum() / karate.n ** 2
    np.testing.assert_allclose(fit.omega.dense(), np.full((34, 34), density))


def test_dcbm_oracle_with_true_labels_reproduces_omega():
    _, omega, params = block_network(60, 2, model=ModelTag.DCBM, theta=HETEROGENEOUS, b=0.2, seed=7)
    labels = net_round(params.pi)
    fit = fit_dcbm(omega, 2, regularize=False, labels=labels)
    np.testing.assert_allclose(fit.omega.dense(), omega, atol=1e-10)


def test_dcbm_single_community_closed_form(karate):
    fit = fit_dcbm(karate, 1, regularize=False)
    d = karate.degrees.astype(float)
    np.testing.assert_allclose(fit.omega.p, [[1.0]])
    np.testing.assert_allclose(fit.omega.dense(), np.outer(d, d) / d.sum())


def test_dcbm_row_sums_equal_degrees():
    net, _, _ = block_network(200, 2, model=ModelTag.DCBM, theta=DENSE, b=0.2, seed=8)
    fit = fit_dcbm(net, 2, regularize=False, rng=np.random.default_rng(0))
    np.testing.assert_allclose(fit.omega.dense().sum(axis=1), net.degrees, rtol=1e-10)


def test_dcbm_community_without_internal_edges(star):
    labels = HardLabeling(labels=np.array([0, 1, 1, 1]), k=2)
    with pytest.raises(FitError) as info:
        fit_dcbm(star, 2, labels=labels)
    assert info.value.community == 0


def test_sbm_single_community_is_mean_density(karate):
    fit = fit_sbm(karate, 1)
    density = karate.adjacency.sum() / karate.n ** 2
    np.testing.assert_allclose(fit.omega.dense(), np.full((34, 34), density))


def test_sbm_on_disjoint_cliques_is_block_diagonal(two_cliques):
    fit = fit_sbm(two_cliques, 2, rng=np.random.default_rng(0))
    np.testing.assert_allclose(fit.omega.p, [[5 / 6, 0.0], [0.0, 4 / 5]])


def test_isolated_node_is_a_fit_error():
    adjacency = complete_graph(5).adjacency.toarray()
    adjacency = np.pad(adjacency, ((0, 1), (0, 1)))
    with pytest.raises(FitError):
        fit_dcmm(adjacency, 2)


def test_clip_to_unit_only_materializes_when_needed():
    inside = ProbMatrix(model=ModelTag.DCBM, theta=np.full(4, 0.5), pi=np.eye(2)[[0, 0, 1, 1]], p=np.eye(2))
    same, changed = clip_to_unit(inside)
    assert not changed
    assert same.factors() is not None

    outside = ProbMatrix(model=ModelTag.DCBM, theta=np.full(4, 1.5), pi=np.eye(2)[[0, 0, 1, 1]], p=np.eye(2))
    clipped, changed = clip_to_unit(outside)
    assert changed
    assert clipped.clipped
    assert clipped.factors() is None
    assert clipped.dense().max() == 1.0


def test_report_sorts_communities_by_size():
    net, _, _ = block_network(90, 2, model=ModelTag.DCBM, theta=DENSE, b=0.2, seed=9)
    labels = HardLabeling(labels=np.r_[np.zeros(30, dtype=np.int64), np.ones(60, dtype=np.int64)], k=2)
    report = fit_dcbm(net, 2, labels=labels).to_report()
    assert np.sum(report.pi, axis=0).tolist() == [60.0, 30.0]
    assert len(report.theta) == 90


@pytest.mark.parametrize("model", list(ModelTag))
def test_fit_model_dispatch(model, karate):
    fit = fit_model(karate, model, 2, GofConfig(vh=SP))
    assert fit.model == model
    assert fit.omega.n == 34
    assert fit.theta_max > 0


def mixed_network(seed: int = 7):
    net, _, _ = dcmm_truth(300, 3, seed=seed, b=0.2)
    return net


@pytest.mark.parametrize("model", list(ModelTag))
def test_unclipped_fit_has_rank_at_most_k(model):
    fit = fit_model(mixed_network(), model, 3, GofConfig.theory(seed=7))
    assert not fit.omega.clipped

    singular = np.linalg.svd(fit.omega.dense(), compute_uv=False)
    assert singular[0] > 0
    assert np.all(singular[3:] < 1e-8 * singular[0])


@pytest.mark.parametrize("model", list(ModelTag))
@pytest.mark.parametrize("regularize", [True, False])
def test_fitted_omega_is_symmetric(model, regularize):
    config = GofConfig(regularize=regularize, vh=SP, seed=7)
    omega = fit_model(mixed_network(), model, 3, config).omega.dense()
    np.testing.assert_allclose(omega, omega.T, rtol=0, atol=1e-12)
