"""Dense real-matrix kernels shared by the analysis modules.

Matrices are plain ``numpy`` float arrays. :func:`as_matrix` is the single
entry point that validates shape and finiteness; every public kernel routes
its inputs through it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DimensionMismatch, InputError, NoConvergence, SingularMatrix

logger = logging.getLogger(__name__)

PIVOT_RTOL = 1e-12


def as_matrix(m, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a 2-D float array, rejecting NaN/inf and empty shapes."""
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} contains non-finite entries")
    return a


def lu_factor(m) -> tuple[np.ndarray, np.ndarray]:
    """Doolittle LU factorisation with partial pivoting.

    Returns ``(lu, perm)`` with ``m[perm] = L @ U``. ``lu`` packs the
    unit-diagonal L factor below its diagonal and U on and above it.

    A pivot whose magnitude drops below ``1e-12`` times the largest initial
    magnitude of its column raises :class:`SingularMatrix`.
    """
    lu = as_matrix(m, square=True).copy()
    n = lu.shape[0]
    perm = np.arange(n)
    col_scale = np.abs(lu).max(axis=0)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        pivot = lu[p, k]
        if col_scale[k] == 0.0 or abs(pivot) < PIVOT_RTOL * col_scale[k]:
            raise SingularMatrix(f"pivot {pivot:.3e} in column {k} is below the singularity threshold")
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        lu[k + 1 :, k] /= pivot
        lu[k + 1 :, k + 1 :] -= np.outer(lu[k + 1 :, k], lu[k, k + 1 :])
    return lu, perm


def lu_solve(lu: np.ndarray, perm: np.ndarray, b) -> np.ndarray:
    """Solve ``m x = b`` given the output of :func:`lu_factor`. ``b`` may be 1-D or 2-D."""
    x = np.array(b, dtype=float)[perm]
    n = lu.shape[0]
    for i in range(1, n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] -= lu[i, i + 1 :] @ x[i + 1 :]
        x[i] /= lu[i, i]
    return x


def lu_invert(m) -> np.ndarray:
    """Inverse of a square matrix via LU with partial pivoting."""
    lu, perm = lu_factor(m)
    return lu_solve(lu, perm, np.eye(lu.shape[0]))


@dataclass(frozen=True)
class PerronResult:
    root: float
    vector: np.ndarray
    iterations: int
    residual: float


def perron_root(m, tol: float = 1e-12, max_iter: int = 10_000) -> PerronResult:
    """Spectral radius and Perron vector of a nonnegative square matrix.

    Power iteration from the uniform vector ``1/n``. A nilpotent matrix is
    recognised within ``n`` plain products (its iterate vanishes). Otherwise
    the iteration runs on ``m + s I`` with ``s`` the largest row sum, which
    leaves the Perron pair unchanged but breaks the tie between the Perron
    root and the other eigenvalues of equal modulus that periodic (cyclic)
    structures produce.

    The iteration stops once the root change and its extrapolated remaining
    drift both fall below ``tol``. The residual ``max|m v - root v|`` must
    also be at most ``tol * max(1, root)``.
    """
    a = as_matrix(m, square=True)
    if np.any(a < 0):
        raise InputError("perron_root requires a nonnegative matrix")
    n = a.shape[0]
    v = np.full(n, 1.0 / n)

    shift = float(a.sum(axis=1).max())
    if shift == 0.0:
        return PerronResult(0.0, v, 0, 0.0)

    # nilpotent test: m^n v0 == 0 iff m^n == 0 for a positive start vector
    w = v
    for k in range(1, n + 1):
        nxt = a @ w
        total = nxt.sum()
        if total == 0.0:
            return PerronResult(0.0, w, k, 0.0)
        w = nxt / total

    root = float((a @ v).sum())
    residual = np.inf
    prev_step = 0.0
    for it in range(1, max_iter + 1):
        mv = a @ v
        nxt = mv + shift * v
        v = nxt / nxt.sum()
        mv = a @ v
        new_root = float(mv.sum())
        residual = float(np.abs(mv - new_root * v).max())
        step = abs(new_root - root)
        # geometric tail of the remaining steps, from the observed contraction
        ratio = step / prev_step if prev_step > 0 else 0.0
        tail = step * ratio / (1.0 - ratio) if ratio < 1.0 else np.inf
        if max(step, tail) < tol and residual <= tol * max(1.0, new_root):
            return PerronResult(new_root, v, it, residual)
        root, prev_step = new_root, step
    raise NoConvergence(
        f"power iteration did not converge in {max_iter} iterations (residual {residual:.3e})",
        estimate=root,
        residual=residual,
        iterations=max_iter,
    )


def hadamard(m1, m2) -> np.ndarray:
    a = as_matrix(m1, name="m1")
    b = as_matrix(m2, name="m2")
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return a * b


@dataclass(frozen=True)
class StochasticityClass:
    kind: Literal["stochastic", "substochastic", "neither"]
    tolerance: float

    @property
    def is_stochastic(self) -> bool:
        return self.kind == "stochastic"

    @property
    def is_substochastic(self) -> bool:
        return self.kind in ("stochastic", "substochastic")


def clamp_near_zero(a: np.ndarray, tol: float, what: str = "matrix") -> tuple[np.ndarray, list[str]]:
    """Set entries in ``[-tol, 0)`` to exactly zero and describe each change."""
    notes = []
    tiny = (a < 0) & (a >= -tol)
    if tiny.any():
        for i, j in zip(*np.nonzero(tiny)):
            notes.append(f"{what}[{i},{j}] = {a[i, j]:.3e} clamped to 0")
        a = np.where(tiny, 0.0, a)
        for note in notes:
            logger.warning(note)
    return a, notes


def classify_stochasticity(m, tol: float = 1e-9, axis: Literal["rows", "cols"] = "rows") -> StochasticityClass:
    """Stochastic if every row (or column) sums to 1 within ``tol``; substochastic if every sum is at most ``1 + tol``."""
    a = as_matrix(m, square=True)
    a, _ = clamp_near_zero(a, tol)
    if np.any(a < 0):
        return StochasticityClass("neither", tol)
    sums = a.sum(axis=1 if axis == "rows" else 0)
    if np.all(np.abs(sums - 1.0) <= tol):
        return StochasticityClass("stochastic", tol)
    if np.all(sums <= 1.0 + tol):
        return StochasticityClass("substochastic", tol)
    return StochasticityClass("neither", tol)


def neumann_partial_sum(m, k: int) -> np.ndarray:
    """``I + m + m**2 + ... + m**k`` by repeated multiplication."""
    a = as_matrix(m, square=True)
    total = np.eye(a.shape[0])
    term = np.eye(a.shape[0])
    for _ in range(k):
        term = term @ a
        total += term
    return total
