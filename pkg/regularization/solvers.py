"""
Iterative regularizing solvers for A·x = b with x₀ = 0.

GMRES and QMR minimize over K_m(A, b); their range-restricted variants
minimize over K_m(A, A^ℓ b) through a chain of QR factorizations of the
projected matrix. All four share one driver and differ only in the basis
builder (Arnoldi or bi-Lanczos) and the shift ℓ. Every solver stops on the
explicit residual ||b − A·x_m|| through the discrepancy principle.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .exceptions import ArgumentError, SingularSystemError
from .krylov import ArnoldiProcess, BiLanczosProcess
from .linalg import (
    LinearOperator,
    SVDResult,
    Vector,
    as_matrix,
    as_vector,
    frozen,
    householder_qr,
    operator_svd,
    solve_upper_triangular,
)

logger = logging.getLogger(__name__)


class StopReason(str, Enum):
    DISCREPANCY = "Discrepancy"
    MAX_ITERATIONS = "MaxIterations"
    BREAKDOWN = "Breakdown"


@dataclass(frozen=True)
class StoppingRule:
    epsilon: float
    eta: float = 1.01
    max_iter: int = 100

    def __post_init__(self):
        if not self.epsilon >= 0.0:
            raise ArgumentError(f"epsilon must be non-negative, got {self.epsilon}")
        if not self.eta > 1.0:
            raise ArgumentError(f"eta must exceed 1, got {self.eta}")
        if self.max_iter < 1:
            raise ArgumentError(f"max_iter must be at least 1, got {self.max_iter}")

    @property
    def threshold(self):
        return self.eta * self.epsilon


def discrepancy_stop(residual_norm, rule):
    return residual_norm <= rule.eta * rule.epsilon


@dataclass(frozen=True)
class QRChain:
    """
    Successive QR factors Q^(1)R^(1), ..., Q^(ℓ+1)R^(ℓ+1) of the projected
    matrix P. Q^(j) is (j+m)×(j+m); R^(j) is (j+m)×m upper trapezoidal.
    """

    ell: int
    m: int
    Q_factors: tuple
    R_factors: tuple

    @property
    def top_block(self):
        return self.R_factors[-1][:self.m, :self.m]

    def coefficients(self):
        """Map from y to basis coefficients: Q^(ℓ)[:, :m], or I when ℓ = 0."""
        if self.ell == 0:
            return np.eye(self.m)
        return self.Q_factors[self.ell - 1][:, :self.m]

    def reduced_solve(self, beta):
        """Solve min ||R^(ℓ+1)·y − β·(Q^(ℓ+1))ᵀe₁||; returns (y, residual)."""
        rhs = beta * self.Q_factors[-1][0, :]
        y = solve_upper_triangular(self.top_block, rhs[:self.m])
        return y, float(np.linalg.norm(rhs[self.m:]))


def build_qr_chain(P, ell, m):
    P = as_matrix(P, "P")
    if ell < 0 or m < 1:
        raise ArgumentError(f"build_qr_chain needs ell >= 0 and m >= 1, got ell={ell}, m={m}")
    if P.shape[0] < ell + m + 1 or P.shape[1] < ell + m:
        raise ArgumentError(
            f"projected matrix {P.shape} too small for ell={ell}, m={m}: "
            f"need at least {ell + m + 1}x{ell + m}"
        )

    Q, R = householder_qr(P[:m + 1, :m])
    Q_factors, R_factors = [Q], [R]
    for j in range(1, ell + 1):
        Q, R = householder_qr(P[:j + m + 1, :j + m] @ Q_factors[-1][:, :m])
        Q_factors.append(Q)
        R_factors.append(R)
    return QRChain(ell=ell, m=m, Q_factors=tuple(Q_factors), R_factors=tuple(R_factors))


@dataclass(frozen=True)
class SolveResult:
    solution: Vector
    iterations: int
    residual_history: tuple
    stop_reason: StopReason
    error_history: Optional[tuple] = None
    iterates: Optional[tuple] = None
    projected_residual_history: tuple = ()
    label: str = ""
    ell: int = 0

    @property
    def final_residual(self):
        return self.residual_history[-1] if self.residual_history else None

    @property
    def final_error(self):
        return self.error_history[-1] if self.error_history else None


class _History:
    """Mutable per-iteration record a solve fills in before freezing."""

    def __init__(self, operator, b, x_true, keep_iterates):
        self.operator = operator
        self.b = b
        self.x_true = x_true
        self.x_true_norm = float(np.linalg.norm(x_true)) if x_true is not None else None
        self.keep_iterates = keep_iterates
        self.solution = np.zeros(operator.n_cols)
        self.residuals = []
        self.projected = []
        self.errors = []
        self.iterates = []

    def record(self, x, projected_residual=None):
        residual = float(np.linalg.norm(self.b - self.operator.apply(x)))
        self.solution = x
        self.residuals.append(residual)
        if projected_residual is not None:
            self.projected.append(projected_residual)
        if self.x_true is not None:
            self.errors.append(float(np.linalg.norm(self.x_true - x)) / self.x_true_norm)
        if self.keep_iterates:
            self.iterates.append(frozen(x))
        return residual

    def result(self, reason, label, ell):
        return SolveResult(
            solution=frozen(self.solution),
            iterations=len(self.residuals),
            residual_history=tuple(self.residuals),
            stop_reason=reason,
            error_history=tuple(self.errors) if self.x_true is not None else None,
            iterates=tuple(self.iterates) if self.keep_iterates else None,
            projected_residual_history=tuple(self.projected),
            label=label,
            ell=ell,
        )


def _validate_system(A, b, x_true):
    if not isinstance(A, LinearOperator):
        raise ArgumentError(f"expected a LinearOperator, got {type(A).__name__}")
    if not A.is_square:
        raise ArgumentError(f"solvers need a square operator, got {A.shape}")
    b = as_vector(b, "b")
    if b.shape[0] != A.n_rows:
        raise ArgumentError(f"b has length {b.shape[0]}, operator is {A.shape}")
    if not np.any(b):
        raise ArgumentError("right-hand side b must be nonzero")
    if x_true is not None:
        x_true = as_vector(x_true, "x_true")
        if x_true.shape[0] != A.n_cols:
            raise ArgumentError(f"x_true has length {x_true.shape[0]}, operator is {A.shape}")
        if not np.any(x_true):
            raise ArgumentError("x_true must be nonzero to report relative errors")
    return b, x_true


def _restricted_iterate(process, ell, m):
    """Iterate m over K_m(A, A^ℓ b): returns (x, projected residual)."""
    P = process.projection(ell + m + 1, ell + m)
    chain = build_qr_chain(P, ell, m)
    y, projected_residual = chain.reduced_solve(process.beta)
    x = process.basis(ell + m) @ (chain.coefficients() @ y)
    return x, projected_residual


def _restricted_krylov_solve(process_cls, label, A, b, ell, stop, x_true, keep_iterates):
    if ell < 0:
        raise ArgumentError(f"shift ell must be non-negative, got {ell}")
    b, x_true = _validate_system(A, b, x_true)
    process = process_cls(A, b)
    history = _History(A, b, x_true, keep_iterates)
    reason = StopReason.MAX_ITERATIONS

    for m in range(1, stop.max_iter + 1):
        if not process.extend_to(ell + m):
            if m == 1:
                # not even one restricted iterate fits: use the zero-padded basis
                try:
                    history.record(*_restricted_iterate(process, ell, 1))
                except SingularSystemError as exc:
                    logger.warning(f"{label}(ell={ell}) has no usable iterate: {exc}")
            logger.warning(f"{label}(ell={ell}) basis broke down after {process.steps} steps")
            reason = StopReason.BREAKDOWN
            break

        try:
            x, projected_residual = _restricted_iterate(process, ell, m)
        except SingularSystemError as exc:
            logger.warning(f"{label}(ell={ell}) projected system singular at m={m}: {exc}")
            reason = StopReason.BREAKDOWN
            break

        residual = history.record(x, projected_residual)
        logger.debug(f"{label}(ell={ell}) m={m} residual={residual:.6e}")
        if discrepancy_stop(residual, stop):
            reason = StopReason.DISCREPANCY
            break
        if process.breakdown and process.steps == ell + m:
            reason = StopReason.BREAKDOWN
            break

    result = history.result(reason, label, ell)
    logger.info(
        f"{label}(ell={ell}) stopped: {reason.value} after {result.iterations} iterations, "
        f"residual={result.final_residual}"
    )
    return result


def gmres(A, b, stop, x_true=None, keep_iterates=False):
    return _restricted_krylov_solve(ArnoldiProcess, "gmres", A, b, 0, stop, x_true, keep_iterates)


def qmr(A, b, stop, x_true=None, keep_iterates=False):
    return _restricted_krylov_solve(BiLanczosProcess, "qmr", A, b, 0, stop, x_true, keep_iterates)


def rr_gmres(A, b, ell, stop, x_true=None, keep_iterates=False):
    return _restricted_krylov_solve(ArnoldiProcess, "rrgmres", A, b, ell, stop, x_true, keep_iterates)


def rr_qmr(A, b, ell, stop, x_true=None, keep_iterates=False):
    return _restricted_krylov_solve(BiLanczosProcess, "rrqmr", A, b, ell, stop, x_true, keep_iterates)


def tsvd(A_svd, b, m):
    """x_m = Σ_{i<=m} (u_iᵀb / σ_i)·v_i."""
    b = as_vector(b, "b")
    if b.shape[0] != A_svd.U.shape[0]:
        raise ArgumentError(f"b has length {b.shape[0]}, SVD has {A_svd.U.shape[0]} rows")
    positive = A_svd.positive_count
    if not 1 <= m <= positive:
        raise ArgumentError(f"truncation index must lie in [1, {positive}], got {m}")
    coefficients = (A_svd.U[:, :m].T @ b) / A_svd.singular_values[:m]
    return A_svd.V[:, :m] @ coefficients


def tsvd_solve(A, A_svd, b, stop, x_true=None, keep_iterates=False):
    """TSVD swept over m = 1, 2, ... with the truncation index as iteration count."""
    b, x_true = _validate_system(A, b, x_true)
    history = _History(A, b, x_true, keep_iterates)
    coefficients = (A_svd.U.T @ b)
    limit = min(stop.max_iter, A_svd.positive_count)
    reason = StopReason.MAX_ITERATIONS

    x = np.zeros(A.n_cols)
    for m in range(1, limit + 1):
        x = x + (coefficients[m - 1] / A_svd.singular_values[m - 1]) * A_svd.V[:, m - 1]
        residual = history.record(x)
        if discrepancy_stop(residual, stop):
            reason = StopReason.DISCREPANCY
            break

    result = history.result(reason, "tsvd", 0)
    logger.info(f"tsvd stopped: {reason.value} at m={result.iterations}")
    return result


SOLVERS = {
    "gmres": gmres,
    "qmr": qmr,
    "rrgmres": rr_gmres,
    "rrqmr": rr_qmr,
    "tsvd": tsvd_solve,
}

SOLVER_NAMES = tuple(SOLVERS)

KRYLOV_PROCESSES = {
    "gmres": ArnoldiProcess,
    "rrgmres": ArnoldiProcess,
    "qmr": BiLanczosProcess,
    "rrqmr": BiLanczosProcess,
}


def run_solver(name, A, b, ell, stop, x_true=None, keep_iterates=False, svd: SVDResult = None):
    """Dispatch by solver name, as used by the experiment grid and CLI."""
    if name not in SOLVERS:
        raise ArgumentError(f'unknown solver "{name}"')
    if name == "tsvd":
        if ell != 0:
            raise ArgumentError(f"tsvd takes no shift, got ell={ell}")
        if svd is None:
            svd = operator_svd(A)
        return tsvd_solve(A, svd, b, stop, x_true, keep_iterates)
    if name in ("gmres", "qmr"):
        if ell != 0:
            raise ArgumentError(f"{name} takes no shift; use rr{name} for ell={ell}")
        return SOLVERS[name](A, b, stop, x_true, keep_iterates)
    return SOLVERS[name](A, b, ell, stop, x_true, keep_iterates)
