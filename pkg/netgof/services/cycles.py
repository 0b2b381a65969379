"""
Cycle-count statistics for m = 3.

C_{n,3} counts ordered distinct triples forming a triangle in A. U_{n,3}(Ω̂) is the same sum
over the residual M = A − Ω̂, evaluated through

    f(M) = tr(M³) − 3·tr(M ∘ M²) + 2·tr(M ∘ M ∘ M)

which removes every triple with a repeated index. When Ω̂ is available as F·B·F' with F of
width K, each term is assembled from n×K products and the sparse A, never from n×n ones.
"""
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from netgof.core.exceptions import UndefinedStatisticError
from netgof.services.graph import Matrix, Network, as_matrix


@dataclass(frozen=True)
class CycleStats:
    c_n3: int
    u_n3: float
    t_n: float


def count_c3(data: "Network | Matrix") -> int:
    """6 × the number of triangles, from the strictly upper triangle (each triangle once)."""
    adjacency = sp.csr_matrix(as_matrix(data))
    upper = sp.triu(adjacency, k=1, format="csr")
    triangles = (upper @ upper).multiply(upper).sum()
    return 6 * int(round(triangles))


def _u_dense(adjacency: Matrix, omega: np.ndarray) -> float:
    dense = adjacency.toarray() if sp.issparse(adjacency) else np.asarray(adjacency)
    m = dense - omega
    m2 = m @ m
    diag = np.diag(m)
    trace_m3 = float(np.sum(m2 * m))
    return trace_m3 - 3.0 * float(diag @ np.diag(m2)) + 2.0 * float(np.sum(diag ** 3))


def _u_factored(adjacency: Matrix, left: np.ndarray, core: np.ndarray) -> float:
    a = sp.csr_matrix(adjacency)
    fb = left @ core                      # F·B
    gram = left.T @ left                  # F'F
    af = np.asarray(a @ left)             # A·F

    trace_a3 = float((a @ a).multiply(a).sum())
    trace_a2o = float(np.sum((af.T @ af) * core))
    trace_ao2 = float(np.trace((left.T @ af) @ core @ gram @ core))
    bg = core @ gram
    trace_o3 = float(np.trace(bg @ bg @ bg))
    trace_m3 = trace_a3 - 3.0 * trace_a2o + 3.0 * trace_ao2 - trace_o3

    omega_diag = np.sum(fb * left, axis=1)
    coo = a.tocoo()
    a_omega = np.bincount(
        coo.row, weights=coo.data * np.sum(fb[coo.row] * left[coo.col], axis=1), minlength=a.shape[0]
    )
    omega_sq_diag = np.sum((fb @ gram) * fb, axis=1)
    # diag(A²) as squared row norms; equals the degrees only for 0/1 entries
    a_sq_diag = np.bincount(coo.row, weights=coo.data ** 2, minlength=a.shape[0])

    m_diag = a.diagonal() - omega_diag
    m2_diag = a_sq_diag - 2.0 * a_omega + omega_sq_diag
    return trace_m3 - 3.0 * float(m_diag @ m2_diag) + 2.0 * float(np.sum(m_diag ** 3))


def u_n3(data: "Network | Matrix", omega_hat) -> float:
    """
    Signed-triangle sum Σ_{i,j,k distinct} M_ij M_jk M_ki with M = A − Ω̂.

    `omega_hat` is either a dense n×n matrix or any object exposing `factors()` returning
    (F, B) or None (see `fitters.ProbMatrix`).
    """
    adjacency = as_matrix(data)
    n = adjacency.shape[0]

    factors = omega_hat.factors() if hasattr(omega_hat, "factors") else None
    if factors is not None:
        left, core = factors
        if left.shape[0] != n:
            raise ValueError(f"Ω̂ has {left.shape[0]} rows; network has {n} nodes")
        return _u_factored(adjacency, left, core)

    omega = omega_hat.dense() if hasattr(omega_hat, "dense") else np.asarray(omega_hat, dtype=np.float64)
    if omega.shape != (n, n):
        raise ValueError(f"Ω̂ has shape {omega.shape}; expected {(n, n)}")
    if not np.allclose(omega, omega.T, atol=1e-12):
        raise ValueError("Ω̂ must be symmetric")
    return _u_dense(adjacency, omega)


def cycle_stats(data: "Network | Matrix", omega_hat) -> CycleStats:
    c_n3 = count_c3(data)
    if c_n3 == 0:
        raise UndefinedStatisticError("C_{n,3} = 0: T_n is undefined on a triangle-free network")
    u = u_n3(data, omega_hat)
    return CycleStats(c_n3=c_n3, u_n3=u, t_n=u / math.sqrt(6.0 * c_n3))


def t_n(data: "Network | Matrix", omega_hat) -> float:
    """T_n(Ω̂) = U_{n,3}(Ω̂) / sqrt(6·C_{n,3})."""
    return cycle_stats(data, omega_hat).t_n
