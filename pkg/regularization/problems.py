"""
Test problems for discrete ill-posed systems and deterministic noise.

The 1D problems are first-kind Fredholm integral equations discretized by a
Nyström rule on a uniform grid that includes both endpoints, with uniform
weights h = (interval length)/(n − 1) so the kernel's symmetry carries over to
A. The 2D problem is Gaussian blurring with zero boundary conditions.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .exceptions import ArgumentError
from .linalg import DenseOperator, KroneckerBlurOperator, LinearOperator, Vector, frozen

logger = logging.getLogger(__name__)

MIN_SIZE = 8


@dataclass(frozen=True)
class ProblemInstance:
    A: LinearOperator
    x_true: Vector
    b_exact: Vector
    name: str
    image_dims: Optional[Tuple[int, int]] = None

    @property
    def n(self):
        return self.A.n_cols


@dataclass(frozen=True)
class NoisyData:
    b: Vector
    e: Vector
    noise_level_percent: float
    seed: int

    @property
    def noise_norm(self):
        return float(np.linalg.norm(self.e))


def _instance(name, A, x_true, image_dims=None):
    x_true = frozen(x_true)
    return ProblemInstance(
        A=A, x_true=x_true, b_exact=frozen(A.apply(x_true)), name=name, image_dims=image_dims
    )


def _grid(lower, upper, n):
    if n < MIN_SIZE:
        raise ArgumentError(f"problem size must be at least {MIN_SIZE}, got {n}")
    return np.linspace(lower, upper, n), (upper - lower) / (n - 1)


def phillips(n):
    """Phillips' test problem on [−6, 6]: kernel and solution 1 + cos(π·u/3) on |u| < 3."""
    t, h = _grid(-6.0, 6.0, n)
    distance = np.abs(t[:, None] - t[None, :])
    kernel = np.where(distance < 3.0, 1.0 + np.cos(np.pi * distance / 3.0), 0.0)
    x_true = np.where(np.abs(t) < 3.0, 1.0 + np.cos(np.pi * t / 3.0), 0.0)
    return _instance("phillips", DenseOperator(h * kernel), x_true)


def shaw(n):
    """Shaw's 1D image restoration problem on [−π/2, π/2]."""
    t, h = _grid(-np.pi / 2.0, np.pi / 2.0, n)
    s, u = t[:, None], t[None, :]
    # sin(w)/w with w = π(sin s + sin t) is np.sinc(sin s + sin t)
    kernel = (np.cos(s) + np.cos(u)) ** 2 * np.sinc(np.sin(s) + np.sin(u)) ** 2
    x_true = 2.0 * np.exp(-6.0 * (t - 0.8) ** 2) + np.exp(-2.0 * (t + 0.5) ** 2)
    return _instance("shaw", DenseOperator(h * kernel), x_true)


def gaussian_toeplitz(N, band, sigma):
    """Symmetric banded Toeplitz factor of a normalized 1D Gaussian PSF."""
    taps = np.exp(-(np.arange(band) ** 2) / (2.0 * sigma ** 2))
    taps /= taps[0] + 2.0 * taps[1:].sum()
    offsets = np.abs(np.arange(N)[:, None] - np.arange(N)[None, :])
    padded = np.zeros(N)
    padded[:band] = taps
    return padded[offsets]


def phantom_image(N):
    """Piecewise-constant N×N test image in [0, 1]: two rectangles and a dot grid."""
    image = np.zeros((N, N))
    e = max(N // 8, 1)
    image[e:3 * e, e:4 * e] = 1.0
    image[4 * e:7 * e, 5 * e:7 * e] = 0.6
    step = max(N // 16, 2)
    image[5 * e:7 * e:step, e:4 * e:step] = 0.8
    return image


def blur2d(N, band=6, sigma=1.5):
    """Gaussian deblurring of an N×N image; A = T ⊗ T on column-major vectors."""
    if N < MIN_SIZE:
        raise ArgumentError(f"image side must be at least {MIN_SIZE}, got {N}")
    if not 1 <= band <= N:
        raise ArgumentError(f"band must lie in [1, {N}], got {band}")
    if not sigma > 0.0:
        raise ArgumentError(f"sigma must be positive, got {sigma}")
    factor = gaussian_toeplitz(N, band, sigma)
    x_true = phantom_image(N).ravel(order="F")
    return _instance("blur2d", KroneckerBlurOperator(factor, factor), x_true, image_dims=(N, N))


def add_noise(problem, level_percent, seed):
    """
    Gaussian white noise scaled so ||e|| = (v/100)·||b_exact|| exactly.

    Samples come from numpy's PCG64 generator seeded with ``seed``.
    """
    if not level_percent >= 0.0:
        raise ArgumentError(f"noise level must be non-negative, got {level_percent}")
    b_exact = problem.b_exact
    if level_percent == 0.0:
        e = np.zeros_like(b_exact)
    else:
        raw = np.random.default_rng(seed).standard_normal(b_exact.shape[0])
        e = raw * (level_percent / 100.0 * np.linalg.norm(b_exact) / np.linalg.norm(raw))
    logger.debug(f"noise for {problem.name}: v={level_percent}%, seed={seed}, ||e||={np.linalg.norm(e):.6e}")
    return NoisyData(b=frozen(b_exact + e), e=frozen(e), noise_level_percent=float(level_percent), seed=int(seed))


PROBLEMS = {
    "phillips": phillips,
    "shaw": shaw,
    "blur2d": blur2d,
}


def build_problem(name, **params):
    if name not in PROBLEMS:
        raise ArgumentError(f'unknown problem "{name}"')
    return PROBLEMS[name](**params)
