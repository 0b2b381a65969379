import math

import numpy as np
import pytest

from conftest import block_network, complete_graph
from netgof.core.enums import FitClass, ModelTag
from netgof.core.exceptions import ReducibleMatrixError, UndefinedStatisticError
from netgof.schemas.config import GofConfig
from netgof.schemas.simulation import PiSpec, ThetaSpec
from netgof.services.gof import (
    estimate_k,
    fit_class,
    gof_all,
    nmf_feasibility,
    snr,
    tuning_sweep,
    z_critical,
)
from netgof.services.sim import experiment_preset, gen_omega


KARATE_TABLE = {ModelTag.SBM: -1.744, ModelTag.DCBM: 0.061, ModelTag.MMSBM: -1.483, ModelTag.DCMM: 0.198}


def test_z_critical():
    assert z_critical(0.05) == pytest.approx(1.959963984540054, abs=1e-12)
    assert z_critical(0.01) == pytest.approx(2.5758293035489004, abs=1e-12)
    with pytest.raises(ValueError):
        z_critical(1.0)


@pytest.mark.parametrize(
    "t, expected",
    [(0.0, FitClass.GOOD), (-4.99, FitClass.GOOD), (5.0, FitClass.MODERATE), (-7.5, FitClass.MODERATE), (7.51, FitClass.SIGNIFICANT)],
)
def test_fit_class(t, expected):
    assert fit_class(t) == expected


def test_gof_all_on_triangle(triangle):
    report = gof_all(triangle, 1)
    assert report.c_n3 == 6
    assert [entry.model for entry in report.models] == [ModelTag.SBM, ModelTag.DCBM, ModelTag.MMSBM, ModelTag.DCMM]
    assert all(entry.error is None and entry.t_n is not None for entry in report.models)
    assert all(entry.decision == (abs(entry.t_n) >= report.z_critical) for entry in report.models)


def test_gof_all_needs_triangles(path):
    with pytest.raises(UndefinedStatisticError):
        gof_all(path, 1)


def test_gof_all_is_reproducible(karate):
    first = gof_all(karate, 2, GofConfig(seed=3))
    second = gof_all(karate, 2, GofConfig(seed=3))
    assert first.model_dump() == second.model_dump()


def test_karate_regression(karate):
    report = gof_all(karate, 2).by_model()
    for model, published in KARATE_TABLE.items():
        assert report[model].error is None
        assert abs(report[model].t_n - published) <= 2.0, model


def test_estimate_k_complete_graph():
    estimate = estimate_k(complete_graph(10), k_max=3)
    assert estimate.k == 1
    assert list(estimate.statistics) == [1]


def test_estimate_k_sentinel_when_nothing_accepted():
    net, _, _ = block_network(300, 3, b=0.05, seed=2)
    estimate = estimate_k(net, k_max=1)
    assert estimate.k == 2
    assert abs(estimate.statistics[1]) >= z_critical(0.05)


@pytest.mark.parametrize("seed", range(10))
def test_snr_closed_form_for_degree_heterogeneity(seed):
    theta = np.random.default_rng(seed).uniform(0.1, 0.9, size=100)
    omega = np.outer(theta, theta)
    n, sq, mean = len(theta), float(theta @ theta), float(theta.mean())

    result = snr(omega, ModelTag.SBM, 1)
    expected_residual = (sq - n * mean ** 2) ** 2 * (sq + 2 * n * mean ** 2)
    assert result.trace_residual == pytest.approx(expected_residual, rel=1e-9)
    assert result.trace_omega == pytest.approx(sq ** 3, rel=1e-10)
    assert result.snr == pytest.approx(expected_residual / math.sqrt(6 * sq ** 3), rel=1e-9)


def test_snr_vanishes_inside_the_model_class():
    _, omega, _ = block_network(
        80, 2, model=ModelTag.DCBM, theta=ThetaSpec(law="uniform", low=0.3, high=0.6), b=0.2, seed=1
    )
    result = snr(omega, ModelTag.DCBM, 2)
    assert abs(result.snr) < 1e-8


@pytest.mark.parametrize("model", [ModelTag.DCBM, ModelTag.DCMM])
def test_snr_lower_bound_for_underfitted_k(model):
    config = experiment_preset("exp3.1", n=600).config
    omega, _ = gen_omega(config, np.random.default_rng(6))
    values = np.linalg.eigvalsh(omega)
    values = values[np.argsort(-np.abs(values), kind="stable")]
    # the eigenvalue dropped by a rank-2 fit, against the full cycle mass
    bound = values[2] ** 3 / math.sqrt(6 * np.sum(values ** 3))

    result = snr(omega, model, 2)
    assert bound > 0
    assert result.snr >= bound


def test_snr_rejects_short_cycles():
    with pytest.raises(ValueError):
        snr(np.full((4, 4), 0.2), ModelTag.SBM, 1, m=2)


@pytest.mark.parametrize("seed", range(10))
def test_nmf_leading_pair_is_trivial(seed):
    _, omega, _ = block_network(
        60, 3, model=ModelTag.DCMM, theta=ThetaSpec(law="uniform", low=0.2, high=0.5), b=0.3,
        pi=PiSpec(kind="dirichlet", pure_fraction=0.2), seed=seed,
    )
    result = nmf_feasibility(omega, 3)
    assert result.tau[0] == pytest.approx(1.0, abs=1e-9)
    assert result.omega[0] == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(result.rho_1, np.full(60, 1 / math.sqrt(60)), rtol=0, atol=1e-9)


def test_nmf_two_communities_always_feasible():
    _, omega, _ = block_network(
        60, 2, model=ModelTag.DCMM, theta=ThetaSpec(law="uniform", low=0.2, high=0.5), b=0.3,
        pi=PiSpec(kind="dirichlet", pure_fraction=0.2), seed=4,
    )
    result = nmf_feasibility(omega, 2)
    assert result.feasible
    assert result.lhs is None


def test_nmf_weak_balanced_design_is_feasible():
    _, omega, _ = block_network(60, 3, theta=ThetaSpec(law="constant", alpha_n=0.25), b=0.9, seed=5)
    result = nmf_feasibility(omega, 3)
    assert result.n_positive_eigenvalues == 3
    assert result.bound == 0.5
    assert result.lhs < result.bound
    assert result.feasible


def test_nmf_reducible_matrix():
    omega = np.kron(np.eye(2), np.full((3, 3), 0.4))
    with pytest.raises(ReducibleMatrixError):
        nmf_feasibility(omega, 2)


def test_tuning_sweep_grid(karate):
    frame = tuning_sweep(karate, 2, n_values=[3, 4], alpha_values=[5.0])
    assert frame.columns == ["n_neighbors", "alpha", "t_n", "error"]
    assert frame.height == 2
    assert frame["n_neighbors"].to_list() == [3, 4]
    assert all((t is None) != (error is None) for t, error in zip(frame["t_n"], frame["error"]))


def test_tuning_sweep_needs_triangles(path):
    with pytest.raises(UndefinedStatisticError):
        tuning_sweep(path, 1, n_values=[3], alpha_values=[5.0])


@pytest.mark.slow
def test_estimate_k_recovers_three_blocks():
    hits = 0
    for seed in range(50):
        net, _, _ = block_network(600, 3, b=0.1, seed=seed)
        hits += estimate_k(net, k_max=6).k == 3
    assert hits >= 40


@pytest.mark.slow
def test_estimate_k_erdos_renyi_is_one():
    net, _, _ = block_network(400, 1, theta=ThetaSpec(law="constant", alpha_n=0.1), seed=8)
    assert estimate_k(net, k_max=4).k == 1
