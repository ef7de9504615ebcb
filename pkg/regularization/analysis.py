import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import ArgumentError
from .linalg import as_vector, jacobi_svd
from .solvers import KRYLOV_PROCESSES, build_qr_chain, tsvd

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectrumReport:
    """Singular values of a projected matrix: H_m, T_m, or the top block of R^(ℓ+1)."""

    method: str
    ell: int
    m: int
    singular_values: tuple
    breakdown: bool = False

    @property
    def label(self):
        return f"{self.method} (ell={self.ell})"


class SemiconvergenceSummary(NamedTuple):
    argmin: int
    min_error: float
    final_error: float


def relative_error(x, x_true):
    x = as_vector(x, "x")
    x_true = as_vector(x_true, "x_true")
    if x.shape != x_true.shape:
        raise ArgumentError(f"length mismatch: x {x.shape}, x_true {x_true.shape}")
    reference = np.linalg.norm(x_true)
    if reference == 0.0:
        raise ArgumentError("x_true must be nonzero")
    return float(np.linalg.norm(x_true - x) / reference)


def relative_residual(A, x, b, b_exact):
    """||b − A·x|| / ||b_exact||."""
    b = as_vector(b, "b")
    b_exact = as_vector(b_exact, "b_exact")
    if b.shape != b_exact.shape or b.shape[0] != A.n_rows:
        raise ArgumentError(f"dimension mismatch: A {A.shape}, b {b.shape}, b_exact {b_exact.shape}")
    reference = np.linalg.norm(b_exact)
    if reference == 0.0:
        raise ArgumentError("b_exact must be nonzero")
    return float(np.linalg.norm(b - A.apply(x)) / reference)


def projected_spectrum(solver_kind, A, b, m, ell=0):
    if solver_kind not in KRYLOV_PROCESSES:
        raise ArgumentError(f'unknown solver "{solver_kind}"')
    if m < 1 or ell < 0:
        raise ArgumentError(f"projected_spectrum needs m >= 1 and ell >= 0, got m={m}, ell={ell}")

    process = KRYLOV_PROCESSES[solver_kind](A, b)
    complete = process.extend_to(ell + m)
    achieved = m if complete else max(process.steps - ell, 0)
    if not complete:
        logger.warning(f"{solver_kind} spectrum: basis broke down, reporting m={achieved} instead of {m}")
    if achieved == 0:
        return SpectrumReport(method=solver_kind, ell=ell, m=0, singular_values=(), breakdown=True)

    if ell == 0:
        matrix = process.projection(achieved + 1, achieved)
    else:
        P = process.projection(ell + achieved + 1, ell + achieved)
        matrix = build_qr_chain(P, ell, achieved).top_block

    values = jacobi_svd(matrix).singular_values
    return SpectrumReport(
        method=solver_kind,
        ell=ell,
        m=achieved,
        singular_values=tuple(float(value) for value in values),
        breakdown=not complete,
    )


def decay_index(values, threshold=1e-8):
    """First 1-based index with σ_i/σ₁ below threshold; len(values) + 1 if none."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0 or values[0] == 0.0:
        return 1
    below = np.flatnonzero(values / values[0] < threshold)
    return int(below[0]) + 1 if below.size else values.size + 1


def semiconvergence_curve(result):
    history = result.error_history
    if not history:
        raise ArgumentError("semiconvergence needs an error history; solve with x_true")
    index = int(np.argmin(history))
    return SemiconvergenceSummary(
        argmin=index + 1, min_error=float(history[index]), final_error=float(history[-1])
    )


def tsvd_error_curve(A_svd, b, x_true, max_m):
    """Relative error of the TSVD solution for m = 1..max_m."""
    limit = min(max_m, A_svd.positive_count)
    return [relative_error(tsvd(A_svd, b, m), x_true) for m in range(1, limit + 1)]
