import numpy as np
import pytest

from prmi import BipartiteState, HermitianOperator, random_density


def random_state(d_a: int, d_b: int, rng: np.random.Generator) -> BipartiteState:
    """Random full-rank bipartite state (Ginibre)."""
    return BipartiteState.from_operator(random_density(d_a * d_b, rng), d_a, d_b)


def random_product_state(d_a: int, d_b: int, rng: np.random.Generator) -> BipartiteState:
    a = random_density(d_a, rng)
    b = random_density(d_b, rng)
    return BipartiteState.from_matrix(np.kron(a.entries, b.entries), d_a, d_b)


def maximally_correlated(d: int) -> BipartiteState:
    """(1/d) sum_x |xx><xx| in the computational product basis."""
    mat = np.zeros((d * d, d * d))
    for x in range(d):
        idx = x * d + x
        mat[idx, idx] = 1.0 / d
    return BipartiteState.from_matrix(mat, d, d)


def random_pmf(shape, rng: np.random.Generator, full_support: bool = True) -> np.ndarray:
    p = rng.random(shape)
    if full_support:
        p += 0.05
    p /= p.sum()
    return p


def uniform_state(d_a: int, d_b: int) -> BipartiteState:
    return BipartiteState.from_matrix(np.eye(d_a * d_b) / (d_a * d_b), d_a, d_b)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
