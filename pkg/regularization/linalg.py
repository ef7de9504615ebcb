"""
Dense linear algebra kernels used by every solver in the package.

Vectors and matrices are plain float64 numpy arrays. Matrices produced here are
small (projected Hessenberg/tridiagonal systems, Toeplitz factors, desk-scale
test operators), so everything is materialized densely.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import ArgumentError, NumericalError, SingularSystemError

logger = logging.getLogger(__name__)

Vector = np.ndarray
DenseMatrix = np.ndarray

EPS = np.finfo(np.float64).eps

# |R_ii| <= TRIANGULAR_TOL * max|R| counts as a zero pivot
TRIANGULAR_TOL = 1e-14

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 50


def frozen(array):
    """Return a read-only float64 copy of ``array``."""
    out = np.array(array, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


def as_vector(value, name="vector"):
    vector = np.asarray(value, dtype=np.float64)
    if vector.ndim != 1:
        raise ArgumentError(f"{name} must be one-dimensional, got shape {vector.shape}")
    if not np.all(np.isfinite(vector)):
        raise ArgumentError(f"{name} has non-finite entries")
    return vector


def as_matrix(value, name="matrix"):
    matrix = np.asarray(value, dtype=np.float64)
    if matrix.ndim != 2:
        raise ArgumentError(f"{name} must be two-dimensional, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ArgumentError(f"{name} has non-finite entries")
    return matrix


class LinearOperator:
    """
    Matrix-free stand-in for A: dimensions plus forward and transpose products.

    Subclasses implement ``_apply`` and ``_apply_transpose``; the public
    methods validate lengths so a solver never silently broadcasts.
    """

    kind = None

    def __init__(self, n_rows, n_cols):
        if n_rows < 1 or n_cols < 1:
            raise ArgumentError(f"operator dimensions must be positive, got {n_rows}x{n_cols}")
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)

    def __repr__(self):
        return f"{type(self).__name__}(kind={self.kind!r}, shape={self.shape})"

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    @property
    def is_square(self):
        return self.n_rows == self.n_cols

    def apply(self, vector):
        vector = as_vector(vector)
        if vector.shape[0] != self.n_cols:
            raise ArgumentError(f"apply expects length {self.n_cols}, got {vector.shape[0]}")
        return self._apply(vector)

    def apply_transpose(self, vector):
        vector = as_vector(vector)
        if vector.shape[0] != self.n_rows:
            raise ArgumentError(f"apply_transpose expects length {self.n_rows}, got {vector.shape[0]}")
        return self._apply_transpose(vector)

    def _apply(self, vector):
        raise NotImplementedError

    def _apply_transpose(self, vector):
        raise NotImplementedError

    def to_dense(self):
        columns = [self._apply(unit) for unit in np.eye(self.n_cols)]
        return np.column_stack(columns)

    def frobenius_norm(self):
        return float(np.linalg.norm(self.to_dense()))


class DenseOperator(LinearOperator):
    kind = "dense"

    def __init__(self, matrix):
        matrix = as_matrix(matrix)
        super().__init__(*matrix.shape)
        self.matrix = frozen(matrix)

    def _apply(self, vector):
        return self.matrix @ vector

    def _apply_transpose(self, vector):
        return self.matrix.T @ vector

    def to_dense(self):
        return np.array(self.matrix)

    def frobenius_norm(self):
        return float(np.linalg.norm(self.matrix))


class KroneckerBlurOperator(LinearOperator):
    """
    A = row_factor ⊗ col_factor acting on column-major flattened images.

    For an image X of shape (col_factor.cols, row_factor.cols) this computes
    vec(col_factor · X · row_factorᵀ) without forming the Kronecker product.
    """

    kind = "kronecker-blur"

    def __init__(self, row_factor, col_factor):
        row_factor = as_matrix(row_factor, "row_factor")
        col_factor = as_matrix(col_factor, "col_factor")
        super().__init__(row_factor.shape[0] * col_factor.shape[0],
                         row_factor.shape[1] * col_factor.shape[1])
        self.row_factor = frozen(row_factor)
        self.col_factor = frozen(col_factor)

    def _apply(self, vector):
        image = vector.reshape((self.col_factor.shape[1], self.row_factor.shape[1]), order="F")
        blurred = self.col_factor @ image @ self.row_factor.T
        return blurred.ravel(order="F")

    def _apply_transpose(self, vector):
        image = vector.reshape((self.col_factor.shape[0], self.row_factor.shape[0]), order="F")
        blurred = self.col_factor.T @ image @ self.row_factor
        return blurred.ravel(order="F")

    def to_dense(self):
        return np.kron(self.row_factor, self.col_factor)

    def frobenius_norm(self):
        return float(np.linalg.norm(self.row_factor) * np.linalg.norm(self.col_factor))


@dataclass(frozen=True)
class SVDResult:
    U: DenseMatrix
    singular_values: Vector
    V: DenseMatrix

    @property
    def positive_count(self):
        return int(np.count_nonzero(self.singular_values > 0.0))

    def reconstruct(self):
        return (self.U * self.singular_values) @ self.V.T


def householder_qr(M):
    """
    Full QR factorization M = Q·R of a tall (rows >= cols) matrix.

    Q is square orthogonal, R upper trapezoidal with a non-negative diagonal,
    so the factorization is unique for full-rank M.
    """
    R = as_matrix(M).copy()
    rows, cols = R.shape
    if cols < 1 or rows < cols:
        raise ArgumentError(f"householder_qr needs rows >= cols >= 1, got {rows}x{cols}")

    Q = np.eye(rows)
    for k in range(min(rows - 1, cols)):
        x = R[k:, k]
        norm_x = np.linalg.norm(x)
        if norm_x == 0.0:
            continue
        v = x.copy()
        v[0] += np.copysign(norm_x, x[0])
        v /= np.linalg.norm(v)
        R[k:, k:] -= 2.0 * np.outer(v, v @ R[k:, k:])
        Q[:, k:] -= 2.0 * np.outer(Q[:, k:] @ v, v)
        R[k + 1:, k] = 0.0

    signs = np.where(np.diag(R) < 0.0, -1.0, 1.0)
    R[:cols, :] *= signs[:, None]
    Q[:, :cols] *= signs
    return Q, np.triu(R)


def solve_upper_triangular(R, c):
    R = as_matrix(R, "R")
    c = as_vector(c, "c")
    m = R.shape[0]
    if R.shape != (m, m) or c.shape[0] != m:
        raise ArgumentError(f"triangular solve shape mismatch: R {R.shape}, c {c.shape}")

    scale = float(np.max(np.abs(R))) if m else 0.0
    pivots = np.abs(np.diag(R))
    if scale == 0.0 or np.any(pivots <= TRIANGULAR_TOL * scale):
        index = int(np.argmin(pivots)) if m else 0
        raise SingularSystemError(
            f"upper triangular system is singular: |R[{index},{index}]| = "
            f"{pivots[index] if m else 0.0:.3e}, max|R| = {scale:.3e}"
        )

    y = np.zeros(m)
    for i in range(m - 1, -1, -1):
        y[i] = (c[i] - R[i, i + 1:] @ y[i + 1:]) / R[i, i]
    return y


def _round_robin(n):
    """Pairings of n columns into rounds of disjoint (p, q) pairs."""
    players = list(range(n + (n % 2)))
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        pairs = [
            (min(players[i], players[size - 1 - i]), max(players[i], players[size - 1 - i]))
            for i in range(size // 2)
        ]
        pairs = [pair for pair in pairs if pair[1] < n]
        if pairs:
            p, q = zip(*pairs)
            rounds.append((np.array(p), np.array(q)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_svd(M):
    """
    Thin SVD by one-sided (Hestenes) Jacobi rotations.

    Disjoint column pairs are rotated together, one round-robin round at a
    time. A pair is rotated while |u_pᵀu_q| exceeds the tolerance relative to
    ||u_p||·||u_q||, which keeps tiny singular values accurate.
    """
    A = as_matrix(M)
    rows, cols = A.shape
    if min(rows, cols) < 1:
        raise ArgumentError(f"jacobi_svd needs a non-empty matrix, got {rows}x{cols}")
    if rows < cols:
        flipped = jacobi_svd(A.T)
        return SVDResult(U=flipped.V, singular_values=flipped.singular_values, V=flipped.U)

    U = A.copy()
    V = np.eye(cols)
    tol = max(JACOBI_TOL, rows * EPS)
    schedule = _round_robin(cols)

    converged = False
    off = 0.0
    for sweep in range(1, JACOBI_MAX_SWEEPS + 1):
        off = 0.0
        for p, q in schedule:
            Up, Uq = U[:, p], U[:, q]
            alpha = np.einsum("ij,ij->j", Up, Up)
            beta = np.einsum("ij,ij->j", Uq, Uq)
            gamma = np.einsum("ij,ij->j", Up, Uq)
            scale = np.sqrt(alpha * beta)
            active = np.abs(gamma) > tol * scale
            if not np.any(active):
                continue
            off = max(off, float(np.max(np.abs(gamma[active]) / scale[active])))

            p, q = p[active], q[active]
            alpha, beta, gamma = alpha[active], beta[active], gamma[active]
            zeta = (beta - alpha) / (2.0 * gamma)
            t = np.where(zeta >= 0.0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t

            Up, Uq = U[:, p], U[:, q]
            U[:, p] = c * Up - s * Uq
            U[:, q] = s * Up + c * Uq
            Vp, Vq = V[:, p], V[:, q]
            V[:, p] = c * Vp - s * Vq
            V[:, q] = s * Vp + c * Vq
        logger.debug(f"jacobi sweep {sweep}: max relative off-diagonal {off:.3e}")
        if off == 0.0:
            converged = True
            break

    if not converged:
        raise NumericalError(
            f"jacobi_svd did not converge in {JACOBI_MAX_SWEEPS} sweeps",
            diagnostic={"shape": (rows, cols), "max_relative_off_diagonal": off},
        )

    sigma = np.linalg.norm(U, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma, U, V = sigma[order], U[:, order], V[:, order]

    nonzero = sigma > np.finfo(np.float64).tiny
    rank = int(np.count_nonzero(nonzero))
    U[:, :rank] /= sigma[:rank]
    if rank < cols:
        # exact zero columns carry no direction; complete the basis instead
        if rank:
            completion, _ = householder_qr(U[:, :rank])
        else:
            completion = np.eye(rows)
        U[:, rank:] = completion[:, rank:cols]
        sigma[rank:] = 0.0

    return SVDResult(U=frozen(U), singular_values=frozen(sigma), V=frozen(V))


def operator_svd(operator):
    """SVD of a LinearOperator, exploiting Kronecker structure when present."""
    if isinstance(operator, KroneckerBlurOperator):
        rows = jacobi_svd(operator.row_factor)
        cols = jacobi_svd(operator.col_factor)
        sigma = np.kron(rows.singular_values, cols.singular_values)
        order = np.argsort(-sigma, kind="stable")
        return SVDResult(
            U=frozen(np.kron(rows.U, cols.U)[:, order]),
            singular_values=frozen(sigma[order]),
            V=frozen(np.kron(rows.V, cols.V)[:, order]),
        )
    return jacobi_svd(operator.to_dense())
