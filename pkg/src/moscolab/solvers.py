"""Preconditioned conjugate gradients for symmetric positive-definite systems."""

from __future__ import annotations

from typing import Callable

import numpy as np


class SolverError(RuntimeError):
    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (relative residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


def conjugate_gradient(matvec: Callable[[np.ndarray], np.ndarray], b: np.ndarray,
                       diag: np.ndarray | None = None, rtol: float = 1e-10,
                       maxiter: int | None = None, x0: np.ndarray | None = None):
    """Solve ``A x = b`` for SPD ``A`` given as a matrix-vector product.

    ``diag`` enables Jacobi preconditioning. The stopping test uses the true
    residual ``||b - A x|| <= rtol ||b||``, re-checked after the recursive
    residual converges, restarting when the two disagree.

    Returns ``(x, relative_residual, iterations)``.
    """
    b = np.asarray(b, dtype=float)
    n = b.size
    maxiter = maxiter or 20 * n
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros_like(b), 0.0, 0
    inv_d = 1.0 / diag if diag is not None else None
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    it = 0
    # aim the recursion slightly below rtol so the true residual also passes
    target = 0.1 * rtol * bnorm
    while True:
        r = b - matvec(x)
        true_res = np.linalg.norm(r)
        if true_res <= rtol * bnorm:
            return x, true_res / bnorm, it
        if it >= maxiter:
            raise SolverError("conjugate gradients did not converge", true_res / bnorm, it)
        z = r * inv_d if inv_d is not None else r
        p = z.copy()
        rz = r @ z
        while it < maxiter:
            ap = matvec(p)
            step = rz / (p @ ap)
            x += step * p
            r -= step * ap
            it += 1
            if np.linalg.norm(r) <= target:
                break
            z = r * inv_d if inv_d is not None else r
            rz_new = r @ z
            p = z + (rz_new / rz) * p
            rz = rz_new
