import itertools
import os
import tempfile
from pathlib import Path

# Keep rotating log files out of the working tree; must run before netgof reads its env config.
os.environ.setdefault("LOG_DIR", str(Path(tempfile.gettempdir()) / "netgof-test-logs"))

import numpy as np
import pytest

from netgof.core.enums import ModelTag
from netgof.schemas.simulation import PiSpec, PSpec, SimConfig, ThetaSpec
from netgof.services.graph import Network, karate_network
from netgof.services.sim import gen_omega, sample_network


def brute_c3(adjacency: np.ndarray) -> int:
    """Ordered distinct triples (i, j, k) with A_ij A_jk A_ki = 1."""
    n = adjacency.shape[0]
    return sum(
        int(adjacency[i, j] * adjacency[j, k] * adjacency[k, i])
        for i, j, k in itertools.permutations(range(n), 3)
    )


def brute_u3(adjacency: np.ndarray, omega: np.ndarray) -> float:
    m = adjacency - omega
    n = adjacency.shape[0]
    return float(sum(m[i, j] * m[j, k] * m[k, i] for i, j, k in itertools.permutations(range(n), 3)))


def label_agreement(labels: np.ndarray, truth: np.ndarray, k: int) -> float:
    """Fraction of matching labels under the best relabeling."""
    return max(
        float(np.mean(np.asarray(perm)[labels] == truth)) for perm in itertools.permutations(range(k))
    )


def random_graph(n: int, p: float, seed: int = 0) -> Network:
    rng = np.random.default_rng(seed)
    rows, cols = np.triu_indices(n, k=1)
    hits = rng.random(len(rows)) < p
    return Network.from_edges(n, np.column_stack([rows[hits], cols[hits]]))


def complete_graph(n: int) -> Network:
    return Network.from_edges(n, list(itertools.combinations(range(n), 2)))


def block_network(
        n: int,
        k: int,
        model: ModelTag = ModelTag.SBM,
        theta: ThetaSpec | None = None,
        b: float = 0.1,
        pi: PiSpec | None = None,
        seed: int = 0,
):
    """(Network, Ω, ModelParams) drawn from the simulation generator."""
    config = SimConfig(
        n=n, k=k, model=model,
        theta=theta or ThetaSpec(law="constant", alpha_n=0.3),
        p=PSpec(off_diagonal=b),
        pi=pi or PiSpec(kind="pure"),
        seed=seed,
    )
    rng = np.random.default_rng(seed)
    omega, params = gen_omega(config, rng)
    return sample_network(omega, rng), omega, params


@pytest.fixture
def triangle() -> Network:
    return Network.from_edges(3, [(0, 1), (1, 2), (2, 0)])


@pytest.fixture
def path() -> Network:
    return Network.from_edges(4, [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def star() -> Network:
    return Network.from_edges(4, [(0, 1), (0, 2), (0, 3)])


@pytest.fixture(scope="session")
def karate() -> Network:
    return karate_network()


@pytest.fixture
def two_cliques() -> Network:
    """Disjoint cliques on nodes 0-5 and 6-10."""
    edges = list(itertools.combinations(range(6), 2)) + list(itertools.combinations(range(6, 11), 2))
    return Network.from_edges(11, edges)
