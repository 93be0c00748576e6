import numpy as np
import pytest

from prmi import (
    BipartiteState,
    DimMismatch,
    HermitianOperator,
    InvalidExponent,
    InvalidOperator,
    SupportCutoff,
    SupportRelation,
    ZeroOperator,
    eig_hermitian,
    min_nonzero_eig,
    partial_trace,
    power_on_support,
    random_density,
    schatten_norm,
    support_relation,
)


def rand_hermitian(dim, rng):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return HermitianOperator.from_entries((g + g.conj().T) / 2)


class TestHermitianOperator:
    def test_symmetrizes_roundtrip_noise(self):
        mat = np.eye(2, dtype=complex)
        mat[0, 1] = 1e-15
        op = HermitianOperator.from_entries(mat)
        assert np.allclose(op.entries, op.entries.conj().T)

    def test_rejects_gross_asymmetry(self):
        mat = np.eye(2, dtype=complex)
        mat[0, 1] = 0.3
        with pytest.raises(InvalidOperator):
            HermitianOperator.from_entries(mat)

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidOperator):
            HermitianOperator.from_entries(np.array([[np.nan, 0], [0, 1.0]]))

    def test_entries_read_only(self):
        op = HermitianOperator.identity(2)
        with pytest.raises(ValueError):
            op.entries[0, 0] = 2.0


class TestEig:
    def test_identity(self):
        w, v = eig_hermitian(HermitianOperator.identity(2))
        assert np.allclose(w, [1.0, 1.0])
        assert np.allclose(v @ v.conj().T, np.eye(2))

    def test_already_diagonal(self):
        w, v = eig_hermitian(HermitianOperator.diagonal([3.0, 1.0]))
        assert np.allclose(w, [3.0, 1.0])
        assert np.allclose(np.abs(v), np.eye(2))

    def test_reconstruction_residual(self, rng):
        x = rand_hermitian(4, rng)
        w, v = eig_hermitian(x)
        recon = (v * w) @ v.conj().T
        scale = np.max(np.abs(x.entries))
        assert np.max(np.abs(recon - x.entries)) <= 1e-10 * scale * x.dim
        assert np.all(np.diff(w) <= 0)


class TestPowerOnSupport:
    def test_diagonal_sqrt(self):
        out = power_on_support(HermitianOperator.diagonal([4.0, 0.0]), 0.5)
        assert np.allclose(out.entries, np.diag([2.0, 0.0]))

    def test_identity_inverse(self):
        out = power_on_support(HermitianOperator.identity(3), -1.0)
        assert np.allclose(out.entries, np.eye(3))

    def test_square_matches_product(self, rng):
        x = random_density(3, rng, rank=2)
        sq = power_on_support(x, 2.0)
        assert np.max(np.abs(sq.entries - x.entries @ x.entries)) <= 1e-10

    def test_zero_power_is_support_projector(self, rng):
        x = random_density(3, rng, rank=2)
        proj = power_on_support(x, 0.0)
        assert np.allclose(proj.entries @ proj.entries, proj.entries, atol=1e-12)
        assert abs(proj.trace() - 2.0) < 1e-9

    def test_negative_power_of_zero_raises(self):
        with pytest.raises(ZeroOperator):
            power_on_support(HermitianOperator.diagonal([0.0, 0.0]), -1.0)

    @pytest.mark.parametrize("p", [-1.0, -0.5, 0.25, 1.0])
    @pytest.mark.parametrize("q", [-1.0, -0.5, 0.25, 1.0])
    def test_power_addition_on_support(self, rng, p, q):
        x = random_density(3, rng)
        lhs = power_on_support(x, p).entries @ power_on_support(x, q).entries
        rhs = power_on_support(x, p + q).entries
        assert np.max(np.abs(lhs - rhs)) <= 1e-9


class TestPartialTrace:
    def test_product_case(self, rng):
        a = random_density(2, rng)
        b = random_density(3, rng)
        joint = HermitianOperator.from_entries(np.kron(a.entries, b.entries))
        out = partial_trace(joint, 2, 3, "A")
        assert np.allclose(out.entries, b.entries, atol=1e-12)
        out_b = partial_trace(joint, 2, 3, "B")
        assert np.allclose(out_b.entries, a.entries, atol=1e-12)

    def test_maximally_mixed(self):
        out = partial_trace(HermitianOperator.from_entries(np.eye(4) / 4), 2, 2, "B")
        assert np.allclose(out.entries, np.eye(2) / 2)

    def test_trace_preserving(self, rng):
        x = rand_hermitian(6, rng)
        out = partial_trace(x, 2, 3, "A")
        assert abs(out.trace() - x.trace()) <= 1e-12

    def test_linearity(self, rng):
        x, y = rand_hermitian(6, rng), rand_hermitian(6, rng)
        a, b = 0.3, -1.7
        combo = HermitianOperator.from_entries(a * x.entries + b * y.entries)
        lhs = partial_trace(combo, 2, 3, "A").entries
        rhs = a * partial_trace(x, 2, 3, "A").entries + b * partial_trace(y, 2, 3, "A").entries
        assert np.max(np.abs(lhs - rhs)) <= 1e-12

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            partial_trace(HermitianOperator.identity(5), 2, 3, "A")


class TestSchattenNorm:
    def test_trace_norm_identity(self):
        assert schatten_norm(HermitianOperator.identity(3), 1.0) == pytest.approx(3.0)

    def test_sup_norm(self):
        assert schatten_norm(HermitianOperator.diagonal([3.0, -4.0]), np.inf) == pytest.approx(4.0)

    def test_quasi_norm_hand_value(self):
        assert schatten_norm(HermitianOperator.diagonal([1.0, 1.0]), 0.5) == pytest.approx(4.0)

    def test_monotone_in_p(self, rng):
        x = random_density(4, rng)
        grid = [0.5, 1.0, 2.0, np.inf]
        vals = [schatten_norm(x, p) for p in grid]
        assert all(vals[i] >= vals[i + 1] - 1e-12 for i in range(len(vals) - 1))

    def test_invalid_exponent(self):
        with pytest.raises(InvalidExponent):
            schatten_norm(HermitianOperator.identity(2), -1.0)


class TestMinNonzeroEig:
    def test_simple(self):
        assert min_nonzero_eig(HermitianOperator.diagonal([0.7, 0.3])) == pytest.approx(0.3)

    def test_cutoff_absorbs_kernel(self):
        op = HermitianOperator.diagonal([1.0, 1e-16])
        assert min_nonzero_eig(op, SupportCutoff(1e-12)) == pytest.approx(1.0)

    def test_marginal_of_state_power(self):
        rho = HermitianOperator.from_entries(np.eye(4) / 4)
        out = partial_trace(power_on_support(rho, 0.75), 2, 2, "B")
        assert min_nonzero_eig(out) == pytest.approx(2.0 ** -0.5, abs=1e-12)

    def test_zero_raises(self):
        with pytest.raises(ZeroOperator):
            min_nonzero_eig(HermitianOperator.diagonal([0.0, 0.0]))


class TestSupportRelation:
    def test_dominated(self):
        rel = support_relation(
            HermitianOperator.diagonal([1.0, 0.0]), HermitianOperator.diagonal([1.0, 1.0])
        )
        assert rel is SupportRelation.DOMINATED

    def test_orthogonal(self):
        rel = support_relation(
            HermitianOperator.diagonal([1.0, 0.0]), HermitianOperator.diagonal([0.0, 1.0])
        )
        assert rel is SupportRelation.ORTHOGONAL

    def test_equal_support(self):
        rel = support_relation(
            HermitianOperator.diagonal([0.5, 0.5]), HermitianOperator.diagonal([0.9, 0.1])
        )
        assert rel is SupportRelation.EQUAL_SUPPORT

    def test_none(self):
        x = HermitianOperator.diagonal([0.5, 0.5, 0.0])
        y = HermitianOperator.diagonal([0.0, 0.5, 0.5])
        assert support_relation(x, y) is SupportRelation.NONE


class TestBipartiteState:
    def test_accepts_valid(self, rng):
        BipartiteState.from_operator(random_density(6, rng), 2, 3)

    def test_rejects_bad_trace(self):
        with pytest.raises(InvalidOperator, match="trace"):
            BipartiteState.from_matrix(np.eye(4) * 0.9 / 4, 2, 2)

    def test_rejects_negative(self):
        mat = np.diag([0.6, 0.5, -0.1, 0.0])
        with pytest.raises(InvalidOperator, match="PSD"):
            BipartiteState.from_matrix(mat, 2, 2)

    def test_rejects_dim_mismatch(self, rng):
        with pytest.raises(DimMismatch):
            BipartiteState.from_operator(random_density(4, rng), 2, 3)

    def test_marginals(self, rng):
        a = random_density(2, rng)
        b = random_density(3, rng)
        state = BipartiteState.from_matrix(np.kron(a.entries, b.entries), 2, 3)
        assert np.allclose(state.marginal_a().entries, a.entries, atol=1e-12)
        assert np.allclose(state.marginal_b().entries, b.entries, atol=1e-12)
