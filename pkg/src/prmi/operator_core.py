"""Dense Hermitian linear algebra with support-aware semantics.

Everything downstream (divergences, projective metric, iteration maps) is
built on eigendecompositions of small dense Hermitian matrices.  Powers of
positive semidefinite operators are always taken on the support: eigenvalues
below a relative cutoff count as kernel and map to zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

HERMITICITY_RTOL = 1e-12


class OperatorError(Exception):
    """Base class for operator-level failures."""


class InvalidOperator(OperatorError):
    """Entries are non-finite or too far from self-adjoint / PSD."""


class ZeroOperator(OperatorError):
    """Operation undefined for the zero operator."""


class DimMismatch(OperatorError):
    """Dimensions are inconsistent with the requested tensor factorization."""


class InvalidExponent(OperatorError):
    """Schatten exponent outside (0, inf]."""


@dataclass(frozen=True)
class SupportCutoff:
    """Relative eigenvalue threshold: lam < rel_tol * lam_max counts as kernel."""

    rel_tol: float = 1e-12

    def __post_init__(self) -> None:
        if not 0.0 <= self.rel_tol < 1.0:
            raise ValueError(f"rel_tol must lie in [0, 1), got {self.rel_tol}")


DEFAULT_CUT = SupportCutoff()


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class HermitianOperator:
    """Immutable dense self-adjoint operator.

    Build through :meth:`from_entries` (validates and symmetrizes) or the
    convenience constructors; ``entries`` is a read-only complex array.
    """

    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_entries(cls, entries, *, rtol: float = HERMITICITY_RTOL) -> "HermitianOperator":
        mat = np.asarray(entries, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
            raise InvalidOperator(f"expected a square matrix, got shape {mat.shape}")
        if not np.all(np.isfinite(mat.real)) or not np.all(np.isfinite(mat.imag)):
            raise InvalidOperator("entries contain non-finite values")
        scale = np.max(np.abs(mat)) if mat.size else 0.0
        asym = np.max(np.abs(mat - mat.conj().T))
        if asym > rtol * max(scale, 1e-300):
            raise InvalidOperator(
                f"matrix is not self-adjoint: asymmetry {asym:.3e} exceeds {rtol:.1e} * {scale:.3e}"
            )
        return cls(_readonly((mat + mat.conj().T) / 2.0))

    @classmethod
    def _wrap(cls, mat: np.ndarray) -> "HermitianOperator":
        """Trusted constructor for matrices already Hermitian by construction."""
        return cls(_readonly((mat + mat.conj().T) / 2.0))

    @classmethod
    def identity(cls, dim: int) -> "HermitianOperator":
        return cls(_readonly(np.eye(dim)))

    @classmethod
    def diagonal(cls, values) -> "HermitianOperator":
        return cls(_readonly(np.diag(np.asarray(values, dtype=np.float64))))

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def __matmul__(self, other: "HermitianOperator") -> np.ndarray:
        return self.entries @ other.entries


class SupportRelation(Enum):
    DOMINATED = "dominated"        # X << Y
    EQUAL_SUPPORT = "equal_support"  # X ~ Y
    ORTHOGONAL = "orthogonal"      # X ⊥ Y
    NONE = "none"


def eig_hermitian(x: HermitianOperator) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition with eigenvalues sorted in descending order.

    Returns ``(w, v)`` with ``x = v @ diag(w) @ v.conj().T``.
    """
    if not np.all(np.isfinite(x.entries)):
        raise InvalidOperator("entries contain non-finite values")
    w, v = np.linalg.eigh(x.entries)
    return w[::-1].copy(), v[:, ::-1].copy()


def _supported_spectrum(x: HermitianOperator, cut: SupportCutoff):
    """Eigendecomposition plus the support mask at the cutoff.

    Eigenvalues at or below ``rel_tol * lam_max`` are kernel.  A clearly
    negative eigenvalue (relative to the spectral radius) is rejected since
    every caller requires a PSD argument.
    """
    w, v = np.linalg.eigh(x.entries)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if scale > 0.0 and float(w[0]) < -1e-8 * scale:
        raise InvalidOperator(f"operator is not PSD: min eigenvalue {w[0]:.3e}")
    lam_max = max(float(w[-1]), 0.0)
    mask = w > cut.rel_tol * lam_max if lam_max > 0.0 else np.zeros_like(w, dtype=bool)
    return w, v, mask


def power_on_support(
    x: HermitianOperator, p: float, cut: SupportCutoff = DEFAULT_CUT
) -> HermitianOperator:
    """PSD power taken on the support: kernel eigenvalues map to zero.

    ``x**0`` is the support projector.  A negative power of the zero operator
    raises :class:`ZeroOperator`.
    """
    w, v, mask = _supported_spectrum(x, cut)
    if not mask.any():
        if p < 0:
            raise ZeroOperator("negative power of the zero operator")
        return HermitianOperator._wrap(np.zeros_like(x.entries))
    vs = v[:, mask]
    wp = np.power(w[mask], p)
    return HermitianOperator._wrap((vs * wp) @ vs.conj().T)


def support_projector(x: HermitianOperator, cut: SupportCutoff = DEFAULT_CUT) -> HermitianOperator:
    return power_on_support(x, 0.0, cut)


def partial_trace(
    x: HermitianOperator, d_a: int, d_b: int, which: str
) -> HermitianOperator:
    """Trace out subsystem ``which`` of an operator on A⊗B (B index fastest)."""
    if x.dim != d_a * d_b:
        raise DimMismatch(f"dim {x.dim} != d_a*d_b = {d_a * d_b}")
    t = x.entries.reshape(d_a, d_b, d_a, d_b)
    w = which.upper()
    if w == "A":
        return HermitianOperator._wrap(np.einsum("abac->bc", t))
    if w == "B":
        return HermitianOperator._wrap(np.einsum("abcb->ac", t))
    raise ValueError(f"which must be 'A' or 'B', got {which!r}")


def schatten_norm(x: HermitianOperator, p: float) -> float:
    """Schatten p-(quasi-)norm from the eigenvalues; p = inf gives max |lam|."""
    w = np.linalg.eigvalsh(x.entries)
    if p == np.inf:
        return float(np.max(np.abs(w))) if w.size else 0.0
    if not p > 0:
        raise InvalidExponent(f"p must be positive or inf, got {p}")
    return float(np.sum(np.abs(w) ** p) ** (1.0 / p))


def min_nonzero_eig(x: HermitianOperator, cut: SupportCutoff = DEFAULT_CUT) -> float:
    """Smallest eigenvalue above the support cutoff."""
    w, _, mask = _supported_spectrum(x, cut)
    if not mask.any():
        raise ZeroOperator("operator vanishes at the cutoff")
    return float(np.min(w[mask]))


def support_relation(
    x: HermitianOperator, y: HermitianOperator, cut: SupportCutoff = DEFAULT_CUT
) -> SupportRelation:
    """Classify the support relation of two PSD operators at the cutoff."""
    if x.dim != y.dim:
        raise DimMismatch(f"dims differ: {x.dim} vs {y.dim}")
    tol = cut.rel_tol

    def dominated(a: HermitianOperator, b: HermitianOperator) -> bool:
        # a << b  iff  || (1 - b^0) a (1 - b^0) ||_inf <= tol * ||a||_inf
        proj = np.eye(b.dim) - support_projector(b, cut).entries
        resid = proj @ a.entries @ proj
        norm_a = schatten_norm(a, np.inf)
        return float(np.max(np.abs(np.linalg.eigvalsh(resid)))) <= tol * norm_a

    x_in_y = dominated(x, y)
    y_in_x = dominated(y, x)
    if x_in_y and y_in_x:
        return SupportRelation.EQUAL_SUPPORT
    if x_in_y:
        return SupportRelation.DOMINATED
    proj_y = support_projector(y, cut).entries
    overlap = proj_y @ x.entries @ proj_y
    if float(np.max(np.abs(np.linalg.eigvalsh(overlap)))) <= tol * schatten_norm(x, np.inf):
        return SupportRelation.ORTHOGONAL
    return SupportRelation.NONE


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> HermitianOperator:
    """Random density matrix from the Ginibre ensemble (full rank by default)."""
    r = dim if rank is None else rank
    g = rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))
    m = g @ g.conj().T
    return HermitianOperator._wrap(m / np.trace(m).real)


@dataclass(frozen=True)
class BipartiteState:
    """Density operator on A⊗B with recorded subsystem dimensions."""

    d_a: int
    d_b: int
    op: HermitianOperator

    PSD_TOL = 1e-10
    TRACE_TOL = 1e-10

    @classmethod
    def from_operator(cls, op: HermitianOperator, d_a: int, d_b: int) -> "BipartiteState":
        if d_a < 1 or d_b < 1 or op.dim != d_a * d_b:
            raise DimMismatch(f"op dim {op.dim} incompatible with {d_a}x{d_b}")
        w = np.linalg.eigvalsh(op.entries)
        if float(w[0]) < -cls.PSD_TOL:
            raise InvalidOperator(f"state is not PSD: min eigenvalue {w[0]:.3e}")
        tr = float(np.sum(w))
        if abs(tr - 1.0) > cls.TRACE_TOL:
            raise InvalidOperator(f"state trace {tr} differs from 1 beyond {cls.TRACE_TOL}")
        return cls(d_a, d_b, op)

    @classmethod
    def from_matrix(cls, entries, d_a: int, d_b: int) -> "BipartiteState":
        return cls.from_operator(HermitianOperator.from_entries(entries), d_a, d_b)

    @property
    def dim(self) -> int:
        return self.op.dim

    def marginal_a(self) -> HermitianOperator:
        return partial_trace(self.op, self.d_a, self.d_b, "B")

    def marginal_b(self) -> HermitianOperator:
        return partial_trace(self.op, self.d_a, self.d_b, "A")
