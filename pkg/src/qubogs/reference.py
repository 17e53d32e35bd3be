"""Classical ground-truth solvers: direct elimination, point Gauss-Seidel, condition number."""

from dataclasses import dataclass

import numpy as np

from .linear import LinearSystem
from .trace import IterationRecord, IterationTrace

_PIVOT_RTOL = 1e-14


class SingularMatrixError(ValueError):
    pass


class LUFactors:
    """LU decomposition with partial pivoting of a dense square matrix."""

    def __init__(self, a):
        a = np.array(a, dtype=float)
        n = a.shape[0]
        if a.shape != (n, n):
            raise ValueError("matrix must be square")
        perm = np.arange(n)
        # singularity threshold is relative to each original row's magnitude
        scale = np.max(np.abs(a), axis=1)
        for k in range(n):
            p = k + int(np.argmax(np.abs(a[k:, k])))
            if abs(a[p, k]) <= _PIVOT_RTOL * scale[perm[p]]:
                raise SingularMatrixError(f"pivot {k} vanishes (matrix singular to working precision)")
            if p != k:
                a[[k, p]] = a[[p, k]]
                perm[[k, p]] = perm[[p, k]]
            a[k + 1 :, k] /= a[k, k]
            a[k + 1 :, k + 1 :] -= np.outer(a[k + 1 :, k], a[k, k + 1 :])
        self.lu = a
        self.perm = perm
        self.n = n

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        squeeze = b.ndim == 1
        y = b.reshape(self.n, -1)[self.perm].copy()
        for k in range(1, self.n):
            y[k] -= self.lu[k, :k] @ y[:k]
        for k in range(self.n - 1, -1, -1):
            y[k] -= self.lu[k, k + 1 :] @ y[k + 1 :]
            y[k] /= self.lu[k, k]
        return y[:, 0] if squeeze else y


def solve_dense(a, b) -> np.ndarray:
    """Gaussian elimination with partial pivoting on a dense matrix."""
    return LUFactors(a).solve(b)


def direct_solve(system: LinearSystem) -> np.ndarray:
    """Exact solution of the system (dense elimination; raises SingularMatrixError)."""
    return solve_dense(system.to_dense(), system.b)


def classical_gauss_seidel(
    system: LinearSystem,
    tol: float = 1e-10,
    max_iters: int = 1000,
    exact_solution=None,
) -> IterationTrace:
    """Element-wise Gauss-Seidel from x = 0, tracing residual (and error) per sweep."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    diag = system.diagonal()
    if np.any(diag == 0.0):
        raise ValueError("Gauss-Seidel requires nonzero diagonal entries")
    b = system.b
    b_norm = float(np.linalg.norm(b))
    is_absolute = b_norm == 0.0
    denom = 1.0 if is_absolute else b_norm
    x = np.zeros(system.n)
    records = []
    converged = False
    for k in range(1, max_iters + 1):
        for i, row in enumerate(system.rows):
            s = 0.0
            for j, v in row:
                if j != i:
                    s += v * x[j]
            x[i] = (b[i] - s) / diag[i]
        r = float(np.linalg.norm(system.matvec(x) - b)) / denom
        err = None
        if exact_solution is not None:
            err = relative_error(x, exact_solution)
        records.append(IterationRecord(k=k, x=x.copy(), residual=r, relative_error=err))
        if r <= tol:
            converged = True
            break
    return IterationTrace(records, converged, residual_is_absolute=is_absolute)


def relative_error(x, x_exact) -> float:
    """||x - x_exact|| / ||x_exact|| in the Euclidean norm."""
    x = np.asarray(x, dtype=float)
    x_exact = np.asarray(x_exact, dtype=float)
    denom = float(np.linalg.norm(x_exact))
    if denom == 0.0:
        raise ValueError("exact solution has zero norm, relative error undefined")
    return float(np.linalg.norm(x - x_exact)) / denom


def spectral_norm(m, rtol: float = 1e-13, max_iters: int = 20000) -> tuple[float, bool]:
    """Largest singular value of a dense matrix via power iteration on M^T M.

    Returns (estimate, converged). A zero matrix reports (0.0, True).
    """
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 0.0, True
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(m.shape[1])
    v /= np.linalg.norm(v)
    sigma_sq = 0.0
    for _ in range(max_iters):
        w = m.T @ (m @ v)
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            return 0.0, True
        new_sigma_sq = float(v @ w)
        v = w / norm_w
        if abs(new_sigma_sq - sigma_sq) <= rtol * abs(new_sigma_sq):
            return float(np.sqrt(new_sigma_sq)), True
        sigma_sq = new_sigma_sq
    return float(np.sqrt(sigma_sq)), False


@dataclass
class ConditionEstimate:
    kappa: float
    sigma_max: float
    sigma_min: float
    converged: bool


def condition_number(system: LinearSystem, rtol: float = 1e-13, max_iters: int = 20000) -> ConditionEstimate:
    """2-norm condition number estimate.

    Power iteration on A^T A gives sigma_max; inverse iteration through the LU
    factors of A and A^T gives sigma_min. ``converged`` is False when either
    iteration hits the cap before its Rayleigh quotient settles.
    """
    a = system.to_dense()
    sigma_max, ok_max = spectral_norm(a, rtol=rtol, max_iters=max_iters)
    lu = LUFactors(a)
    lu_t = LUFactors(a.T)
    rng = np.random.default_rng(0x5EED + 1)
    v = rng.standard_normal(system.n)
    v /= np.linalg.norm(v)
    inv_sq = 0.0
    ok_min = False
    for _ in range(max_iters):
        y = lu.solve(lu_t.solve(v))
        norm_y = float(np.linalg.norm(y))
        if norm_y == 0.0:
            raise SingularMatrixError("inverse iteration collapsed to zero")
        new_inv_sq = float(v @ y)
        v = y / norm_y
        if abs(new_inv_sq - inv_sq) <= rtol * abs(new_inv_sq):
            inv_sq = new_inv_sq
            ok_min = True
            break
        inv_sq = new_inv_sq
    sigma_min = 1.0 / float(np.sqrt(inv_sq))
    return ConditionEstimate(
        kappa=sigma_max / sigma_min,
        sigma_max=sigma_max,
        sigma_min=sigma_min,
        converged=ok_max and ok_min,
    )
