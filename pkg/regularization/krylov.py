"""
Krylov basis builders: Arnoldi and Lanczos bi-orthogonalization.

Both are exposed twice: as incremental processes (one ``step()`` at a time,
which the solvers drive) and as one-shot functions returning an immutable
decomposition.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import ArgumentError
from .linalg import DenseMatrix, LinearOperator, as_vector, frozen

logger = logging.getLogger(__name__)

BREAKDOWN_TOL = 1e-12


@dataclass(frozen=True)
class ArnoldiDecomposition:
    """
    A·V[:, :m] = V·H.

    V is n×(m+1) and H is (m+1)×m upper Hessenberg. After an invariant-subspace
    breakdown there is no next basis vector: V is n×m and H is m×m.
    """

    V: DenseMatrix
    H: DenseMatrix
    m: int
    beta: float
    breakdown: bool

    def truncate(self, k):
        if not 1 <= k <= self.m:
            raise ArgumentError(f"cannot truncate {self.m} Arnoldi steps to {k}")
        if k == self.m:
            return self
        return ArnoldiDecomposition(
            V=self.V[:, :k + 1], H=self.H[:k + 1, :k], m=k, beta=self.beta, breakdown=False
        )


@dataclass(frozen=True)
class BiLanczosDecomposition:
    """
    A·V[:, :m] = V·T with Wᵀ·V = I in exact arithmetic.

    T is tridiagonal: alphas on the diagonal, deltas below it, betas above.
    ``betas[j]`` and ``deltas[j]`` hold β_{j+2} and δ_{j+2} (0-based j), the
    couplings between basis vectors j and j+1.
    """

    V: DenseMatrix
    W: DenseMatrix
    T: DenseMatrix
    alphas: tuple
    betas: tuple
    deltas: tuple
    m: int
    beta: float
    breakdown: bool

    def truncate(self, k):
        if not 1 <= k <= self.m:
            raise ArgumentError(f"cannot truncate {self.m} bi-Lanczos steps to {k}")
        if k == self.m:
            return self
        return BiLanczosDecomposition(
            V=self.V[:, :k + 1], W=self.W[:, :k + 1], T=self.T[:k + 1, :k],
            alphas=self.alphas[:k], betas=self.betas[:k], deltas=self.deltas[:k],
            m=k, beta=self.beta, breakdown=False,
        )


class KrylovProcess:
    """Shared bookkeeping for the incremental basis builders."""

    label = None

    def __init__(self, operator, start):
        if not isinstance(operator, LinearOperator):
            raise ArgumentError(f"expected a LinearOperator, got {type(operator).__name__}")
        if not operator.is_square:
            raise ArgumentError(f"{self.label} needs a square operator, got {operator.shape}")
        start = as_vector(start, "starting vector")
        if start.shape[0] != operator.n_cols:
            raise ArgumentError(
                f"starting vector has length {start.shape[0]}, operator is {operator.shape}"
            )
        beta = float(np.linalg.norm(start))
        if beta == 0.0:
            raise ArgumentError(f"{self.label} starting vector must be nonzero")

        self.operator = operator
        self.beta = beta
        self.breakdown = False
        self._basis = [start / beta]
        self._columns = []

    @property
    def n(self):
        return self.operator.n_rows

    @property
    def steps(self):
        return len(self._columns)

    def step(self):
        raise NotImplementedError

    def extend_to(self, steps):
        """Step until ``steps`` steps exist; False if a breakdown came first."""
        while self.steps < steps and not self.breakdown:
            self.step()
        return self.steps >= steps

    def basis(self, k):
        """First k basis vectors as columns; zero columns past a breakdown."""
        out = np.zeros((self.n, k))
        available = min(k, len(self._basis))
        if available:
            out[:, :available] = np.column_stack(self._basis[:available])
        return out

    def projection(self, rows, cols):
        """Leading rows×cols block of the projected matrix, zero padded."""
        out = np.zeros((rows, cols))
        for j, column in enumerate(self._columns[:cols]):
            k = min(len(column), rows)
            out[:k, j] = column[:k]
        return out

    def _mark_breakdown(self, reason):
        self.breakdown = True
        logger.debug(f"{self.label} breakdown after {self.steps} steps: {reason}")


class ArnoldiProcess(KrylovProcess):
    label = "arnoldi"

    def __init__(self, operator, r0):
        super().__init__(operator, r0)
        self._norm_estimate = 0.0

    def step(self):
        if self.breakdown:
            return False
        j = self.steps
        v = self._basis[j]
        w = self.operator.apply(v)
        self._norm_estimate = max(self._norm_estimate, float(np.linalg.norm(w)))

        h = np.zeros(j + 2)
        # modified Gram-Schmidt, then one full reorthogonalization pass
        for _ in range(2):
            for i, basis_vector in enumerate(self._basis):
                coefficient = basis_vector @ w
                h[i] += coefficient
                w = w - coefficient * basis_vector

        h_next = float(np.linalg.norm(w))
        if h_next <= BREAKDOWN_TOL * self._norm_estimate * float(np.linalg.norm(v)):
            self._columns.append(h[:j + 1])
            self._mark_breakdown(f"h_{{j+1,j}} = {h_next:.3e}")
            return False

        h[j + 1] = h_next
        self._columns.append(h)
        self._basis.append(w / h_next)
        return True

    def decomposition(self):
        if not self.steps:
            raise ArgumentError("no Arnoldi steps have been taken")
        basis_count = len(self._basis)
        return ArnoldiDecomposition(
            V=frozen(self.basis(basis_count)),
            H=frozen(self.projection(basis_count, self.steps)),
            m=self.steps,
            beta=self.beta,
            breakdown=self.breakdown,
        )


class BiLanczosProcess(KrylovProcess):
    """
    Two-sided Lanczos with w₁ = v₁, so (v₁, w₁) = 1 and the process reduces
    to symmetric Lanczos when A is symmetric. No look-ahead and no
    reorthogonalization.
    """

    label = "bi-lanczos"

    def __init__(self, operator, b):
        super().__init__(operator, b)
        self._dual = [self._basis[0].copy()]
        self.alphas = []
        self.betas = []
        self.deltas = []

    def step(self):
        if self.breakdown:
            return False
        j = self.steps
        v, w = self._basis[j], self._dual[j]
        Av = self.operator.apply(v)
        Atw = self.operator.apply_transpose(w)

        alpha = float(Av @ w)
        v_hat = Av - alpha * v
        w_hat = Atw - alpha * w
        if j > 0:
            v_hat -= self.betas[j - 1] * self._basis[j - 1]
            w_hat -= self.deltas[j - 1] * self._dual[j - 1]

        column = np.zeros(j + 2)
        column[j] = alpha
        if j > 0:
            column[j - 1] = self.betas[j - 1]

        v_norm = float(np.linalg.norm(v_hat))
        w_norm = float(np.linalg.norm(w_hat))
        if v_norm <= BREAKDOWN_TOL * float(np.linalg.norm(Av)):
            # A·V_j ⊂ span(V_j): keep the step with a square projection
            self.alphas.append(alpha)
            self._columns.append(column[:j + 1])
            self._mark_breakdown(f"invariant subspace, ||v_hat|| = {v_norm:.3e}")
            return False

        inner = float(v_hat @ w_hat)
        if w_norm == 0.0 or abs(inner) <= BREAKDOWN_TOL * v_norm * w_norm:
            self._mark_breakdown(f"serious breakdown, (v_hat, w_hat) = {inner:.3e}")
            return False

        delta = float(np.sqrt(abs(inner)))
        beta_next = inner / delta
        column[j + 1] = delta
        self.alphas.append(alpha)
        self.deltas.append(delta)
        self.betas.append(beta_next)
        self._columns.append(column)
        self._basis.append(v_hat / delta)
        self._dual.append(w_hat / beta_next)
        return True

    def dual_basis(self, k):
        out = np.zeros((self.n, k))
        available = min(k, len(self._dual))
        if available:
            out[:, :available] = np.column_stack(self._dual[:available])
        return out

    def decomposition(self):
        # a serious breakdown in the first step leaves m = 0: V = W = v₁, T is 1×0
        if not self.steps and not self.breakdown:
            raise ArgumentError("no bi-Lanczos steps have been taken")
        basis_count = min(len(self._basis), self.steps + 1)
        return BiLanczosDecomposition(
            V=frozen(self.basis(basis_count)),
            W=frozen(self.dual_basis(basis_count)),
            T=frozen(self.projection(basis_count, self.steps)),
            alphas=tuple(self.alphas[:self.steps]),
            betas=tuple(self.betas[:self.steps]),
            deltas=tuple(self.deltas[:self.steps]),
            m=self.steps,
            beta=self.beta,
            breakdown=self.breakdown,
        )


def _run(process, m):
    if m < 1:
        raise ArgumentError(f"step count must be at least 1, got {m}")
    process.extend_to(m)
    if process.breakdown and process.steps < m:
        logger.warning(f"{process.label} stopped after {process.steps} of {m} steps")
    return process.decomposition()


def arnoldi(A, r0, m):
    return _run(ArnoldiProcess(A, r0), m)


def bilanczos(A, b, m):
    return _run(BiLanczosProcess(A, b), m)
