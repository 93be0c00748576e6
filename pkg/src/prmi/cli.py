"""Command-line front end: load states or PMFs, run certified minimization, emit traces.

State files are JSON objects ``{"d_a": int, "d_b": int, "matrix": [[{"re": x,
"im": y}, ...], ...]}`` row-major in the product basis with the B index
fastest; PMFs are CSV matrices of nonnegative floats.  One JSON trace
document is written per alpha.

Exit codes: 0 when every run terminated on its certificate, 2 on validation
or range errors, 3 when an iteration cap was hit without a certificate.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .am_engine import (
    AmConfig,
    ConvergenceTrace,
    MonotonicityViolation,
    OrthogonalInitializer,
    TERMINATED_CERTIFICATE,
    algorithm1,
    algorithm2,
    run_uncertified,
)
from .classical_rmi import (
    JointPmf,
    Pmf,
    algorithm_classical,
    run_uncertified_classical,
)
from .operator_core import (
    DEFAULT_CUT,
    BipartiteState,
    DimMismatch,
    HermitianOperator,
    InvalidOperator,
    SupportCutoff,
)
from .petz_divergence import DomainViolation, UnsupportedOrder

SUPPORT_TOL_ENV = "PRMI_SUPPORT_TOL"

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NO_CERTIFICATE = 3


class ParseError(Exception):
    """Input file could not be parsed into the expected structure."""


class ValidationError(Exception):
    """Input parsed but violates a named invariant."""

    def __init__(self, invariant: str, detail: str = "") -> None:
        self.invariant = invariant
        super().__init__(f"{invariant}: {detail}" if detail else invariant)


@dataclass
class RunSpec:
    """Everything one invocation needs; mirrors the command-line flags."""

    mode: str
    alpha_list: list[float]
    eps0: float
    input_path: str
    trace_path: str
    init_path: str | None = None
    init: str = "marginal"
    record_states: bool = False
    max_iter: int = 100_000
    uncertified: bool = False

    def __post_init__(self) -> None:
        if not self.alpha_list:
            raise ValueError("alpha_list must be nonempty")
        if not self.eps0 > 0:
            raise ValueError("eps0 must be positive")


def _matrix_from_json(obj) -> np.ndarray:
    try:
        rows = [
            [complex(cell["re"], cell.get("im", 0.0)) for cell in row] for row in obj
        ]
    except (TypeError, KeyError) as exc:
        raise ParseError(f"matrix entries must be objects with 're'/'im': {exc}")
    return np.array(rows, dtype=np.complex128)


def load_state(path: str | Path) -> BipartiteState:
    """Read and validate a bipartite state file."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read state file {path}: {exc}")
    if not isinstance(data, dict) or not {"d_a", "d_b", "matrix"} <= set(data):
        raise ParseError("state file must contain d_a, d_b and matrix")
    d_a, d_b = int(data["d_a"]), int(data["d_b"])
    mat = _matrix_from_json(data["matrix"])
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ParseError(f"matrix must be square, got shape {mat.shape}")
    try:
        op = HermitianOperator.from_entries(mat)
    except InvalidOperator as exc:
        raise ValidationError("hermiticity", str(exc))
    try:
        return BipartiteState.from_operator(op, d_a, d_b)
    except DimMismatch as exc:
        raise ValidationError("dim", str(exc))
    except InvalidOperator as exc:
        invariant = "trace" if "trace" in str(exc) else "psd"
        raise ValidationError(invariant, str(exc))


def save_state(state: BipartiteState, path: str | Path) -> None:
    """Write a state in the same JSON schema that :func:`load_state` reads."""
    mat = state.op.entries
    doc = {
        "d_a": state.d_a,
        "d_b": state.d_b,
        "matrix": [
            [{"re": float(z.real), "im": float(z.imag)} for z in row] for row in mat
        ],
    }
    Path(path).write_text(json.dumps(doc))


def load_operator(path: str | Path) -> HermitianOperator:
    """Read a Hermitian operator (initializer) from the state JSON schema."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read operator file {path}: {exc}")
    if not isinstance(data, dict) or "matrix" not in data:
        raise ParseError("operator file must contain a matrix")
    mat = _matrix_from_json(data["matrix"])
    try:
        return HermitianOperator.from_entries(mat)
    except InvalidOperator as exc:
        raise ValidationError("hermiticity", str(exc))


def load_pmf(path: str | Path) -> JointPmf:
    """Read a joint PMF from a CSV matrix of nonnegative floats."""
    try:
        raw = np.loadtxt(path, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ParseError(f"cannot read PMF file {path}: {exc}")
    try:
        return JointPmf.from_weights(raw)
    except ValueError as exc:
        invariant = "normalization" if "sum" in str(exc) else "nonnegativity"
        raise ValidationError(invariant, str(exc))


def load_init_pmf(path: str | Path) -> Pmf:
    try:
        raw = np.loadtxt(path, delimiter=",")
    except (OSError, ValueError) as exc:
        raise ParseError(f"cannot read PMF file {path}: {exc}")
    try:
        return Pmf.from_weights(np.atleast_1d(raw))
    except ValueError as exc:
        raise ValidationError("normalization", str(exc))


def _trace_document(trace: ConvergenceTrace) -> dict:
    def clean(eps: float | None) -> float | None:
        if eps is None or not math.isfinite(eps):
            return None
        return eps

    return {
        "alpha": trace.alpha,
        "final_x": trace.final_x,
        "terminated_by": trace.terminated_by,
        "records": [
            {
                "n": r.n,
                "x_n": r.x_n,
                "eps_n": clean(r.eps_n),
                "q_n": r.q_n,
                "wall_ms": r.wall_time * 1000.0,
            }
            for r in trace.records
        ],
    }


def _trace_path_for(base: str, alpha: float, multiple: bool) -> Path:
    path = Path(base)
    if "{alpha}" in base:
        return Path(base.replace("{alpha}", f"{alpha:g}"))
    if not multiple:
        return path
    return path.with_name(f"{path.stem}-alpha-{alpha:g}{path.suffix or '.json'}")


def _dispatch_quantum(
    rho: BipartiteState, alpha: float, spec: RunSpec, config: AmConfig
) -> ConvergenceTrace:
    if 1.0 < alpha <= 2.0:
        return algorithm1(rho, config)
    if 0.5 < alpha < 1.0:
        return algorithm2(rho, config)
    if spec.uncertified and alpha > 0 and alpha != 1.0:
        return run_uncertified(rho, config, spec.max_iter)
    raise ValidationError(
        "alpha_range",
        f"alpha={alpha:g} has no certificate (quantum: (1/2,1) or (1,2]); "
        "pass --uncertified to iterate anyway",
    )


def _dispatch_classical(
    pmf: JointPmf, alpha: float, spec: RunSpec, config: AmConfig, init_pmf: Pmf | None
) -> ConvergenceTrace:
    if alpha == 1.0 or not alpha > 0:
        raise ValidationError("alpha_range", f"alpha={alpha:g} is not supported")
    if alpha > 1.0 or 0.5 < alpha < 1.0:
        return algorithm_classical(pmf, config, q0=init_pmf)
    if spec.uncertified:
        return run_uncertified_classical(pmf, config, spec.max_iter, q0=init_pmf)
    raise ValidationError(
        "alpha_range",
        f"alpha={alpha:g} has no classical certificate ((1/2,1) or (1,inf)); "
        "pass --uncertified to iterate anyway",
    )


def _support_cutoff() -> SupportCutoff:
    raw = os.environ.get(SUPPORT_TOL_ENV)
    if raw is None:
        return DEFAULT_CUT
    try:
        return SupportCutoff(float(raw))
    except ValueError as exc:
        raise ValidationError("support_tol", f"{SUPPORT_TOL_ENV}={raw!r}: {exc}")


def run(spec: RunSpec) -> int:
    """Execute each requested alpha; returns the process exit code."""
    try:
        cut = _support_cutoff()
        init_kind, sigma0, init_pmf = spec.init, None, None
        if spec.init_path is not None:
            init_kind = "explicit"
            if spec.mode == "quantum":
                sigma0 = load_operator(spec.init_path)
            else:
                init_pmf = load_init_pmf(spec.init_path)
        if spec.mode == "quantum":
            rho = load_state(spec.input_path)
        else:
            pmf = load_pmf(spec.input_path)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    multiple = len(spec.alpha_list) > 1
    all_certified = True
    for alpha in spec.alpha_list:
        try:
            config = AmConfig(
                alpha=alpha,
                eps0=spec.eps0,
                init=init_kind if spec.mode == "quantum" else spec.init,
                sigma0=sigma0,
                max_iter=spec.max_iter,
                cut=cut,
                record_states=spec.record_states,
            )
            if spec.mode == "quantum":
                trace = _dispatch_quantum(rho, alpha, spec, config)
            else:
                trace = _dispatch_classical(pmf, alpha, spec, config, init_pmf)
        except (
            ValidationError,
            ValueError,
            UnsupportedOrder,
            DomainViolation,
            OrthogonalInitializer,
            MonotonicityViolation,
        ) as exc:
            print(f"error: alpha={alpha:g}: {exc}", file=sys.stderr)
            return EXIT_INVALID

        out = _trace_path_for(spec.trace_path, alpha, multiple)
        out.write_text(json.dumps(_trace_document(trace), indent=1))
        last = trace.records[-1]
        eps_str = "n/a" if last.eps_n is None else f"{last.eps_n:.3e}"
        print(
            f"alpha={alpha:g} final_x={trace.final_x:.9g} eps={eps_str} "
            f"iterations={last.n} terminated_by={trace.terminated_by}"
        )
        all_certified &= trace.terminated_by == TERMINATED_CERTIFICATE
    return EXIT_OK if all_certified else EXIT_NO_CERTIFICATE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="prmi",
        description=(
            "Compute the doubly minimized Petz-Renyi mutual information of a "
            "bipartite state (or joint PMF) by alternating minimization with "
            "certified stopping rules."
        ),
    )
    p.add_argument("input", help="state JSON (quantum mode) or PMF CSV (classical mode)")
    p.add_argument("--mode", choices=("quantum", "classical"), default="quantum")
    p.add_argument(
        "--alpha",
        type=float,
        action="append",
        required=True,
        help="Renyi order; repeat the flag for a sweep",
    )
    p.add_argument("--eps", type=float, default=1e-6, help="target accuracy eps0")
    p.add_argument(
        "--init",
        default="marginal",
        help="initializer: marginal | uniform | file:PATH",
    )
    p.add_argument("--trace-out", default="trace.json", help="trace output path")
    p.add_argument("--record-states", action="store_true")
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument(
        "--uncertified",
        action="store_true",
        help="allow plain iteration for orders without a certificate",
    )
    return p


def spec_from_args(args: argparse.Namespace) -> RunSpec:
    init = args.init
    init_path = None
    if init.startswith("file:"):
        init_path = init[len("file:") :]
        init = "explicit"
    elif init not in ("marginal", "uniform"):
        raise ValidationError("init", f"unknown initializer {args.init!r}")
    return RunSpec(
        mode=args.mode,
        alpha_list=list(args.alpha),
        eps0=args.eps,
        input_path=args.input,
        trace_path=args.trace_out,
        init_path=init_path,
        init=init,
        record_states=args.record_states,
        max_iter=args.max_iter,
        uncertified=args.uncertified,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = spec_from_args(args)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(spec)


if __name__ == "__main__":
    raise SystemExit(main())
