"""Alternating minimization for the doubly minimized Petz-Renyi mutual information.

The iteration alternates the two closed-form partial minimizers.  For
alpha in (1, 2] the maps contract Hilbert's projective metric with ratio
gamma = 1 - 1/alpha, which yields an a-priori epsilon schedule (linear rate);
for alpha in (1/2, 1) the certificate is the a-posteriori bound
c0 * sqrt(x_{n-1} - x_n) (sublinear rate).  Both certified loops, the raw
iteration, and the stopping constants live here.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .hilbert_metric import d_h
from .operator_core import (
    DEFAULT_CUT,
    BipartiteState,
    HermitianOperator,
    SupportCutoff,
    power_on_support,
    random_density,
)
from .petz_divergence import (
    DomainViolation,
    partial_min_sigma,
    partial_min_tau,
)


class OrthogonalInitializer(Exception):
    """Initializer has no overlap with the support of the A marginal."""


class MonotonicityViolation(Exception):
    """Objective increased beyond numerical slack; the run is unreliable."""


class NotStrictlyPositive(Exception):
    """Diagnostic requires a strictly positive input state."""


TERMINATED_CERTIFICATE = "certificate"
TERMINATED_MAX_ITER = "max_iter"

_INIT_CHOICES = ("marginal", "uniform", "explicit")


@dataclass(frozen=True)
class AmConfig:
    """Run parameters: order alpha, target accuracy, initializer, caps."""

    alpha: float
    eps0: float = 1e-6
    init: str = "marginal"
    sigma0: HermitianOperator | None = None
    max_iter: int = 100_000
    cut: SupportCutoff = DEFAULT_CUT
    record_states: bool = False

    def __post_init__(self) -> None:
        if not self.alpha > 0 or self.alpha == 1.0:
            raise ValueError(f"alpha must be positive and not 1, got {self.alpha}")
        if not self.eps0 > 0:
            raise ValueError(f"eps0 must be positive, got {self.eps0}")
        if self.init not in _INIT_CHOICES:
            raise ValueError(f"init must be one of {_INIT_CHOICES}, got {self.init!r}")
        if self.init == "explicit" and self.sigma0 is None:
            raise ValueError("init='explicit' requires sigma0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass(frozen=True)
class TraceRecord:
    n: int
    x_n: float
    eps_n: float | None
    q_n: float
    wall_time: float


@dataclass
class ConvergenceTrace:
    """Per-iteration record of one run plus the final iterates."""

    alpha: float
    records: list[TraceRecord]
    final_x: float
    final_sigma_a: HermitianOperator
    final_tau_b: HermitianOperator
    terminated_by: str
    sigma_states: list[HermitianOperator] | None = None
    tau_states: list[HermitianOperator] | None = None

    @property
    def x_values(self) -> np.ndarray:
        return np.array([r.x_n for r in self.records])

    @property
    def iterations(self) -> int:
        return self.records[-1].n


@dataclass(frozen=True)
class LinearConstants:
    """Stopping constants for the linear-rate certificate (alpha in (1, 2])."""

    gamma: float
    c0: float
    lambda_a: float
    q0: float
    c_a: float


@dataclass(frozen=True)
class SublinearConstants:
    """Stopping constants for the sublinear certificate (alpha in (1/2, 1))."""

    lambda_a: float
    lambda_b: float
    lambda_a0: float
    c0: float


@dataclass(frozen=True)
class ContractionReport:
    gamma: float
    max_ratio: float
    trials: int


def n_a_to_b(
    rho_ab: BipartiteState,
    sigma_a: HermitianOperator,
    alpha: float,
    cut: SupportCutoff = DEFAULT_CUT,
) -> HermitianOperator:
    """A-to-B iteration map: the optimal B factor for a fixed A factor."""
    return partial_min_tau(rho_ab, sigma_a, alpha, cut)


def n_b_to_a(
    rho_ab: BipartiteState,
    tau_b: HermitianOperator,
    alpha: float,
    cut: SupportCutoff = DEFAULT_CUT,
) -> HermitianOperator:
    """B-to-A iteration map, mirror of :func:`n_a_to_b`."""
    return partial_min_sigma(rho_ab, tau_b, alpha, cut)


def restrict_initializer(
    sigma0: HermitianOperator,
    rho_a: HermitianOperator,
    cut: SupportCutoff = DEFAULT_CUT,
) -> HermitianOperator:
    """Compress an initializer to the support of the A marginal and renormalize.

    The iteration map is invariant under this restriction, so any initializer
    with nonzero overlap can be replaced by its compressed version.
    """
    w, v = np.linalg.eigh(rho_a.entries)
    lam_max = max(float(w[-1]), 0.0)
    mask = w > cut.rel_tol * lam_max if lam_max > 0 else np.zeros_like(w, dtype=bool)
    vs = v[:, mask]
    proj = vs @ vs.conj().T
    compressed = proj @ sigma0.entries @ proj
    tr = float(np.trace(compressed).real)
    if tr <= cut.rel_tol:
        raise OrthogonalInitializer(
            f"initializer overlap {tr:.3e} with the A-marginal support is below the cutoff"
        )
    return HermitianOperator._wrap(compressed / tr)


class _AmRun:
    """Mutable state of one run; caches the rho^alpha tensor and eigenfactors.

    States are carried as (support eigenvalues, eigenvector block) pairs so
    each half-step costs one contraction and one small eigendecomposition; the
    objective value comes from the closed form for the partial minimum.
    """

    def __init__(
        self,
        rho_ab: BipartiteState,
        alpha: float,
        cut: SupportCutoff,
        sigma0: HermitianOperator,
    ) -> None:
        self.alpha = alpha
        self.cut = cut
        self.d_a = rho_ab.d_a
        self.d_b = rho_ab.d_b
        w, v = np.linalg.eigh(rho_ab.op.entries)
        lam_max = max(float(w[-1]), 0.0)
        mask = w > cut.rel_tol * lam_max
        wa = np.zeros_like(w)
        wa[mask] = w[mask] ** alpha
        ra = (v * wa) @ v.conj().T
        self.r4 = np.ascontiguousarray(ra.reshape(self.d_a, self.d_b, self.d_a, self.d_b))
        self.sigma_vals, self.sigma_vecs = self._factor(sigma0.entries)
        self.tau_vals: np.ndarray | None = None
        self.tau_vecs: np.ndarray | None = None
        self.x = math.nan
        self.q = math.nan

    def _factor(self, mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        w, v = np.linalg.eigh((mat + mat.conj().T) / 2.0)
        lam_max = max(float(w[-1]), 0.0)
        mask = w > self.cut.rel_tol * lam_max
        if not mask.any():
            raise DomainViolation("iterate collapsed to the zero operator")
        return w[mask], v[:, mask]

    @staticmethod
    def _power(vals: np.ndarray, vecs: np.ndarray, p: float) -> np.ndarray:
        return (vecs * vals**p) @ vecs.conj().T

    def a_to_b(self) -> None:
        """Update tau from sigma; refresh the objective via the closed form."""
        s = self._power(self.sigma_vals, self.sigma_vecs, 1.0 - self.alpha)
        w_mat = np.einsum("abcd,ca->bd", self.r4, s)
        vals, vecs = self._factor(w_mat)
        t = vals ** (1.0 / self.alpha)
        ssum = float(np.sum(t))
        self.tau_vals = t / ssum
        self.tau_vecs = vecs
        self.x = (self.alpha / (self.alpha - 1.0)) * math.log(ssum)
        self.q = ssum**self.alpha

    def b_to_a(self) -> None:
        """Update sigma from tau."""
        t = self._power(self.tau_vals, self.tau_vecs, 1.0 - self.alpha)
        w_mat = np.einsum("abcd,db->ac", self.r4, t)
        vals, vecs = self._factor(w_mat)
        s = vals ** (1.0 / self.alpha)
        self.sigma_vals = s / float(np.sum(s))
        self.sigma_vecs = vecs

    def full_step(self) -> None:
        self.b_to_a()
        self.a_to_b()

    def sigma_op(self) -> HermitianOperator:
        return HermitianOperator._wrap(self._power(self.sigma_vals, self.sigma_vecs, 1.0))

    def tau_op(self) -> HermitianOperator:
        return HermitianOperator._wrap(self._power(self.tau_vals, self.tau_vecs, 1.0))

    def marginal_a_of_rho_alpha(self) -> np.ndarray:
        return np.einsum("abcb->ac", self.r4)

    def marginal_b_of_rho_alpha(self) -> np.ndarray:
        return np.einsum("abac->bc", self.r4)


def _min_supported_eig(mat: np.ndarray, cut: SupportCutoff) -> float:
    w = np.linalg.eigvalsh((mat + mat.conj().T) / 2.0)
    lam_max = max(float(w[-1]), 0.0)
    mask = w > cut.rel_tol * lam_max
    if not mask.any():
        raise DomainViolation("operator vanishes at the cutoff")
    return float(np.min(w[mask]))


def _initial_sigma(rho_ab: BipartiteState, config: AmConfig) -> HermitianOperator:
    if config.init == "marginal":
        raw = rho_ab.marginal_a()
    elif config.init == "uniform":
        raw = HermitianOperator._wrap(np.eye(rho_ab.d_a) / rho_ab.d_a)
    else:
        raw = config.sigma0
        if raw.dim != rho_ab.d_a:
            raise ValueError(f"sigma0 has dim {raw.dim}, expected {rho_ab.d_a}")
    return restrict_initializer(raw, rho_ab.marginal_a(), config.cut)


def _linear_constants_from_run(
    run: _AmRun, sigma0_min_eig: float, alpha: float, cut: SupportCutoff
) -> LinearConstants:
    lam_a = _min_supported_eig(run.marginal_a_of_rho_alpha(), cut)
    q0 = run.q
    c_a = (lam_a / q0) ** (1.0 / alpha)
    c0 = -2.0 * math.log(min(sigma0_min_eig, c_a))
    return LinearConstants(gamma=1.0 - 1.0 / alpha, c0=c0, lambda_a=lam_a, q0=q0, c_a=c_a)


def _sublinear_constants_from_run(
    run: _AmRun, sigma0_min_eig: float, alpha: float, cut: SupportCutoff
) -> SublinearConstants:
    lam_a = _min_supported_eig(run.marginal_a_of_rho_alpha(), cut)
    lam_b = _min_supported_eig(run.marginal_b_of_rho_alpha(), cut)
    bulk = max(
        lam_b**-1.0,
        lam_a ** (alpha * (1.0 - alpha) / (1.0 - 2.0 * alpha))
        * lam_b ** (alpha**2 / (1.0 - 2.0 * alpha)),
    )
    c0 = 2.0 * math.sqrt(5.0) * bulk * sigma0_min_eig ** (alpha - 1.0)
    return SublinearConstants(lambda_a=lam_a, lambda_b=lam_b, lambda_a0=sigma0_min_eig, c0=c0)


def linear_constants(
    rho_ab: BipartiteState,
    sigma0: HermitianOperator,
    alpha: float,
    cut: SupportCutoff = DEFAULT_CUT,
) -> LinearConstants:
    """Initializer-only bound feeding the linear-rate epsilon schedule.

    lambda_A is the smallest nonzero eigenvalue of the A marginal of
    rho^alpha; q0 the objective trace term after the first half-step from the
    restricted initializer; c_A = (lambda_A/q0)^(1/alpha) floors the spectrum
    of the unknown minimizer, so c0 = -2 log min(min spec sigma0~, c_A) bounds
    the projective distance from the initializer to the minimizer.
    """
    if not 1.0 < alpha <= 2.0:
        raise ValueError(f"linear-rate constants require alpha in (1, 2], got {alpha}")
    sig = restrict_initializer(sigma0, rho_ab.marginal_a(), cut)
    run = _AmRun(rho_ab, alpha, cut, sig)
    s0_min = float(np.min(run.sigma_vals))
    run.a_to_b()
    return _linear_constants_from_run(run, s0_min, alpha, cut)


def sublinear_constants(
    rho_ab: BipartiteState,
    sigma0: HermitianOperator,
    alpha: float,
    cut: SupportCutoff = DEFAULT_CUT,
) -> SublinearConstants:
    """Constant c0 in the a-posteriori bound c0 * sqrt(x_{n-1} - x_n)."""
    if not 0.5 < alpha < 1.0:
        raise ValueError(f"sublinear constants require alpha in (1/2, 1), got {alpha}")
    sig = restrict_initializer(sigma0, rho_ab.marginal_a(), cut)
    run = _AmRun(rho_ab, alpha, cut, sig)
    s0_min = float(np.min(run.sigma_vals))
    return _sublinear_constants_from_run(run, s0_min, alpha, cut)


def _eps_linear(alpha: float, gamma: float, c0: float, n: int) -> float:
    arg = (alpha - 1.0) * (1.0 + gamma) * gamma ** (2 * n) * c0
    if arg > 700.0:
        return math.inf
    return math.expm1(arg) / (alpha - 1.0)


def algorithm1(rho_ab: BipartiteState, config: AmConfig) -> ConvergenceTrace:
    """Certified run for alpha in (1, 2] with the a-priori epsilon schedule.

    Stops once eps_n = (exp((alpha-1)(1+gamma) gamma^(2n) c0) - 1)/(alpha-1)
    drops below eps0; the output then lies within eps0 of the infimum.
    """
    alpha = config.alpha
    if not 1.0 < alpha <= 2.0:
        raise ValueError(f"algorithm1 requires alpha in (1, 2], got {alpha}")
    t_start = time.perf_counter()
    sigma0 = _initial_sigma(rho_ab, config)
    run = _AmRun(rho_ab, alpha, config.cut, sigma0)
    s0_min = float(np.min(run.sigma_vals))
    run.a_to_b()
    consts = _linear_constants_from_run(run, s0_min, alpha, config.cut)

    records: list[TraceRecord] = []
    sigmas: list[HermitianOperator] | None = [] if config.record_states else None
    taus: list[HermitianOperator] | None = [] if config.record_states else None

    def record(n: int, eps: float | None) -> None:
        records.append(TraceRecord(n, run.x, eps, run.q, time.perf_counter() - t_start))
        if sigmas is not None:
            sigmas.append(run.sigma_op())
            taus.append(run.tau_op())

    n = 0
    eps = _eps_linear(alpha, consts.gamma, consts.c0, n)
    record(n, eps)
    terminated = TERMINATED_CERTIFICATE
    while eps >= config.eps0:
        if n >= config.max_iter:
            terminated = TERMINATED_MAX_ITER
            break
        run.full_step()
        n += 1
        eps = _eps_linear(alpha, consts.gamma, consts.c0, n)
        record(n, eps)
    return ConvergenceTrace(
        alpha=alpha,
        records=records,
        final_x=run.x,
        final_sigma_a=run.sigma_op(),
        final_tau_b=run.tau_op(),
        terminated_by=terminated,
        sigma_states=sigmas,
        tau_states=taus,
    )


def algorithm2(rho_ab: BipartiteState, config: AmConfig) -> ConvergenceTrace:
    """Certified run for alpha in (1/2, 1) with the a-posteriori certificate.

    After each full iteration eps = c0 * sqrt(x_prev - x) bounds the distance
    of the current objective value from the infimum; the loop exits once
    eps < eps0.
    """
    alpha = config.alpha
    if not 0.5 < alpha < 1.0:
        raise ValueError(f"algorithm2 requires alpha in (1/2, 1), got {alpha}")
    t_start = time.perf_counter()
    sigma0 = _initial_sigma(rho_ab, config)
    run = _AmRun(rho_ab, alpha, config.cut, sigma0)
    s0_min = float(np.min(run.sigma_vals))
    consts = _sublinear_constants_from_run(run, s0_min, alpha, config.cut)
    run.a_to_b()

    records: list[TraceRecord] = []
    sigmas: list[HermitianOperator] | None = [] if config.record_states else None
    taus: list[HermitianOperator] | None = [] if config.record_states else None

    def record(n: int, eps: float | None) -> None:
        records.append(TraceRecord(n, run.x, eps, run.q, time.perf_counter() - t_start))
        if sigmas is not None:
            sigmas.append(run.sigma_op())
            taus.append(run.tau_op())

    record(0, None)
    x_prev = run.x
    n = 0
    terminated = TERMINATED_MAX_ITER
    while True:
        if n >= config.max_iter:
            break
        run.full_step()
        n += 1
        drop = x_prev - run.x
        if drop < -1e-10:
            raise MonotonicityViolation(
                f"objective increased by {-drop:.3e} at iteration {n}"
            )
        eps = consts.c0 * math.sqrt(max(drop, 0.0))
        record(n, eps)
        x_prev = run.x
        if eps < config.eps0:
            terminated = TERMINATED_CERTIFICATE
            break
    return ConvergenceTrace(
        alpha=alpha,
        records=records,
        final_x=run.x,
        final_sigma_a=run.sigma_op(),
        final_tau_b=run.tau_op(),
        terminated_by=terminated,
        sigma_states=sigmas,
        tau_states=taus,
    )


def run_uncertified(
    rho_ab: BipartiteState, config: AmConfig, num_iter: int
) -> ConvergenceTrace:
    """Plain alternating minimization for exactly ``num_iter`` full iterations.

    No stopping certificate is attached (eps_n is None); valid for any
    alpha in (0, 1) or (1, inf).  Used for long-run reference values and for
    orders outside the certified ranges.
    """
    if num_iter < 0:
        raise ValueError("num_iter must be nonnegative")
    t_start = time.perf_counter()
    sigma0 = _initial_sigma(rho_ab, config)
    run = _AmRun(rho_ab, config.alpha, config.cut, sigma0)
    run.a_to_b()

    records: list[TraceRecord] = []
    sigmas: list[HermitianOperator] | None = [] if config.record_states else None
    taus: list[HermitianOperator] | None = [] if config.record_states else None
    for n in range(num_iter + 1):
        if n > 0:
            run.full_step()
        records.append(TraceRecord(n, run.x, None, run.q, time.perf_counter() - t_start))
        if sigmas is not None:
            sigmas.append(run.sigma_op())
            taus.append(run.tau_op())
    return ConvergenceTrace(
        alpha=config.alpha,
        records=records,
        final_x=run.x,
        final_sigma_a=run.sigma_op(),
        final_tau_b=run.tau_op(),
        terminated_by=TERMINATED_MAX_ITER,
        sigma_states=sigmas,
        tau_states=taus,
    )


def spectrum_floors(
    rho_ab: BipartiteState,
    sigma0: HermitianOperator,
    alpha: float,
    cut: SupportCutoff = DEFAULT_CUT,
) -> tuple[float, float]:
    """Guaranteed lower bounds (c_A, c_B) on the nonzero spectra of all iterates.

    For alpha > 1 the floors are (lambda/q0)^(1/alpha) with q0 the initial
    objective trace term (they apply to sigma from iteration 1 on and to every
    tau); for alpha in (1/2, 1) they depend on the initializer spectrum and
    apply to every iterate.
    """
    sig = restrict_initializer(sigma0, rho_ab.marginal_a(), cut)
    run = _AmRun(rho_ab, alpha, cut, sig)
    s0_min = float(np.min(run.sigma_vals))
    lam_a = _min_supported_eig(run.marginal_a_of_rho_alpha(), cut)
    lam_b = _min_supported_eig(run.marginal_b_of_rho_alpha(), cut)
    if alpha > 1.0:
        run.a_to_b()
        q0 = run.q
        return (lam_a / q0) ** (1.0 / alpha), (lam_b / q0) ** (1.0 / alpha)
    if not 0.5 < alpha < 1.0:
        raise ValueError(f"spectrum floors require alpha in (1/2, 1) or (1, inf), got {alpha}")
    exp1 = alpha / (2.0 * alpha - 1.0)
    exp2 = (1.0 - alpha) / (2.0 * alpha - 1.0)
    c_a = min(1.0, lam_a**exp1 * lam_b**exp2) * s0_min
    c_b = lam_b ** (1.0 / alpha) * c_a ** ((1.0 - alpha) / alpha)
    return c_a, c_b


def contraction_probe(
    rho_ab: BipartiteState,
    alpha: float,
    trials: int,
    rng: np.random.Generator | None = None,
    cut: SupportCutoff = DEFAULT_CUT,
) -> ContractionReport:
    """Sample the contraction ratio of the A-to-B map in the projective metric.

    Draws random pairs of states with the support of the A marginal and
    returns the largest observed ratio d_H(N(s), N(s')) / d_H(s, s'); for
    alpha in (1, 2] the ratio is bounded by gamma = 1 - 1/alpha.
    """
    if not 1.0 < alpha <= 2.0:
        raise ValueError(f"contraction probe requires alpha in (1, 2], got {alpha}")
    rng = np.random.default_rng(0) if rng is None else rng
    rho_a = rho_ab.marginal_a()
    gamma = 1.0 - 1.0 / alpha
    max_ratio = 0.0
    done = 0
    while done < trials:
        s1 = restrict_initializer(random_density(rho_ab.d_a, rng), rho_a, cut)
        s2 = restrict_initializer(random_density(rho_ab.d_a, rng), rho_a, cut)
        base = d_h(s1, s2, cut)
        if not math.isfinite(base) or base < 1e-12:
            continue
        mapped = d_h(n_a_to_b(rho_ab, s1, alpha, cut), n_a_to_b(rho_ab, s2, alpha, cut), cut)
        max_ratio = max(max_ratio, mapped / base)
        done += 1
    return ContractionReport(gamma=gamma, max_ratio=max_ratio, trials=trials)


def projective_diameter_from_vectors(
    rho_ab: BipartiteState,
    alpha: float,
    vectors: np.ndarray,
    cut: SupportCutoff = DEFAULT_CUT,
) -> float:
    """Largest d_H between compressions <v| rho^alpha |v> over the given A vectors.

    The compressions are operators on B; their pairwise projective distances
    lower-bound the projective diameter of the contraction map.
    """
    r4 = power_on_support_tensor(rho_ab, alpha, cut)
    mats = []
    for v in vectors:
        v = np.asarray(v, dtype=np.complex128)
        m = np.einsum("abcd,a,c->bd", r4, v.conj(), v)
        mats.append(HermitianOperator._wrap(m))
    delta = 0.0
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            delta = max(delta, d_h(mats[i], mats[j], cut))
    return delta


def power_on_support_tensor(
    rho_ab: BipartiteState, alpha: float, cut: SupportCutoff = DEFAULT_CUT
) -> np.ndarray:
    """rho^alpha reshaped to (d_a, d_b, d_a, d_b)."""
    ra = power_on_support(rho_ab.op, alpha, cut)
    return ra.entries.reshape(rho_ab.d_a, rho_ab.d_b, rho_ab.d_a, rho_ab.d_b)


def kappa_estimate(
    rho_ab: BipartiteState,
    alpha: float,
    samples: int,
    rng: np.random.Generator | None = None,
    cut: SupportCutoff = DEFAULT_CUT,
) -> float:
    """Sampled Birkhoff contraction ratio tanh(delta/4) for strictly positive states.

    delta is estimated by maximizing the pairwise projective distance of
    compressions over the coordinate basis plus Haar-random unit vectors, so
    the estimate is a lower bound; it is diagnostic only and never used to
    tighten a stopping rule.
    """
    if samples < 2:
        raise ValueError("samples must be at least 2")
    w = np.linalg.eigvalsh(rho_ab.op.entries)
    if float(w[0]) <= cut.rel_tol * max(float(w[-1]), 0.0):
        raise NotStrictlyPositive("kappa estimate requires a strictly positive state")
    rng = np.random.default_rng(0) if rng is None else rng
    vectors = [np.eye(rho_ab.d_a)[i] for i in range(rho_ab.d_a)]
    for _ in range(samples):
        v = rng.standard_normal(rho_ab.d_a) + 1j * rng.standard_normal(rho_ab.d_a)
        vectors.append(v / np.linalg.norm(v))
    delta = projective_diameter_from_vectors(rho_ab, alpha, np.array(vectors), cut)
    return math.tanh(delta / 4.0)
