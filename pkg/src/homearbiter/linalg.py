"""Small dense-matrix kernel: full SVD and energy-controlled truncation.

The decomposition is a one-sided Jacobi orthogonalization: plane rotations
are applied from the right until all column pairs of the work matrix are
mutually orthogonal to the requested tolerance.  For the tiny matrices this
package deals in (a handful of residents by a handful of items) the method
is simple, accurate to near machine precision, and needs no external
factorization routine.

Sign convention: the entry of largest magnitude in each right singular
vector is made nonnegative, and the mirror flip is applied to the paired
left vector.  SVD signs are otherwise arbitrary; fixing them keeps golden
outputs stable.  Downstream consumers are provably sign-invariant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

DEFAULT_TOL = 1e-10
MAX_SWEEPS = 60


def as_matrix(data) -> np.ndarray:
    """Validate and return a finite float64 2-D array."""
    m = np.asarray(data, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}")
    return a @ b


def transpose(m) -> np.ndarray:
    return as_matrix(m).T.copy()


def l2_norm(v) -> float:
    arr = np.asarray(v, dtype=np.float64).ravel()
    return float(np.sqrt(np.dot(arr, arr)))


@dataclass(frozen=True)
class SvdResult:
    """Full factorization ``M = A @ D @ V.T``.

    ``A`` is m-by-m, ``V`` is n-by-n, and ``D`` is the m-by-n diagonal
    carrying ``singular_values`` (length min(m, n), nonincreasing).
    """

    A: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return (self.A.shape[0], self.V.shape[0])

    def diagonal_matrix(self) -> np.ndarray:
        m, n = self.shape
        d = np.zeros((m, n))
        k = len(self.singular_values)
        d[:k, :k] = np.diag(self.singular_values)
        return d

    def reconstruct(self) -> np.ndarray:
        return self.A @ self.diagonal_matrix() @ self.V.T


@dataclass(frozen=True)
class TruncatedSvd:
    """Leading-``rank`` factors of an :class:`SvdResult`."""

    A_w: np.ndarray
    singular_values: np.ndarray
    V_w: np.ndarray
    rank: int

    def diagonal_matrix(self) -> np.ndarray:
        return np.diag(self.singular_values)


def _orthonormal_completion(q: np.ndarray, dim: int) -> np.ndarray:
    """Extend the orthonormal columns of ``q`` to a full ``dim``-by-``dim`` basis."""
    cols = [q[:, j] for j in range(q.shape[1])]
    for i in range(dim):
        if len(cols) == dim:
            break
        v = np.zeros(dim)
        v[i] = 1.0
        for _ in range(2):  # re-orthogonalize for stability
            for c in cols:
                v -= np.dot(c, v) * c
        norm = np.sqrt(np.dot(v, v))
        if norm > 1e-8:
            cols.append(v / norm)
    if len(cols) != dim:
        raise ConvergenceError("failed to complete orthonormal basis", residual=float(dim - len(cols)))
    return np.column_stack(cols)


def _dead_threshold(work: np.ndarray) -> float:
    # Columns this far below the matrix scale are numerically zero; pairs of
    # them stay mutually correlated at round-off level and would cycle forever
    # under a purely relative criterion.
    return float(np.sqrt(np.sum(work * work))) * 1e-14


def _one_sided_jacobi(work: np.ndarray, tol: float, dead: float) -> tuple[np.ndarray, np.ndarray, float]:
    """Orthogonalize the columns of ``work`` in place; returns (work, V, residual)."""
    n = work.shape[1]
    v = np.eye(n)
    residual = 0.0
    for _ in range(MAX_SWEEPS):
        residual = 0.0
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                app = float(np.dot(work[:, p], work[:, p]))
                aqq = float(np.dot(work[:, q], work[:, q]))
                apq = float(np.dot(work[:, p], work[:, q]))
                if np.sqrt(app) <= dead or np.sqrt(aqq) <= dead:
                    continue
                scale = np.sqrt(app * aqq)
                if abs(apq) <= tol * scale:
                    continue
                residual = max(residual, abs(apq) / scale)
                rotated = True
                tau = (aqq - app) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau)) if tau != 0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                wp = work[:, p].copy()
                work[:, p] = c * wp - s * work[:, q]
                work[:, q] = s * wp + c * work[:, q]
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
        if not rotated:
            return work, v, residual
    raise ConvergenceError(f"Jacobi SVD did not converge in {MAX_SWEEPS} sweeps", residual=residual)


def svd(matrix, tol: float = DEFAULT_TOL) -> SvdResult:
    """Full singular value decomposition of a real matrix.

    Parameters
    ----------
    matrix:
        Any 2-D array-like with finite entries.
    tol:
        Relative off-diagonal threshold at which column pairs count as
        orthogonal.  Must be positive.

    Raises
    ------
    ConvergenceError
        If the rotation sweeps do not reach ``tol`` within the sweep budget.
    """
    m_in = as_matrix(matrix)
    if tol <= 0:
        raise ValueError("tol must be positive")
    m, n = m_in.shape
    transposed = m < n
    work = (m_in.T if transposed else m_in).copy()
    big, small = work.shape

    dead = _dead_threshold(work)
    work, v_small, _ = _one_sided_jacobi(work, tol, dead)

    norms = np.sqrt(np.sum(work * work, axis=0))
    order = np.argsort(-norms, kind="stable")
    sigma = norms[order]
    sigma[sigma <= dead] = 0.0
    v_small = v_small[:, order]
    u_cols = np.zeros((big, small))
    for j in range(small):
        if sigma[j] > 0:
            u_cols[:, j] = work[:, order[j]] / sigma[j]
    u_thin = u_cols[:, sigma > 0]
    u_big = _orthonormal_completion(u_thin, big)

    if transposed:
        a_full, v_full = v_small, u_big
    else:
        a_full, v_full = u_big, v_small

    # Fix signs: dominant entry of each right vector nonnegative, mirrored
    # onto the paired left vector; unpaired basis columns fixed independently.
    k = min(m, n)
    for j in range(n):
        i = int(np.argmax(np.abs(v_full[:, j])))
        if v_full[i, j] < 0:
            v_full[:, j] = -v_full[:, j]
            if j < k:
                a_full[:, j] = -a_full[:, j]
    for j in range(k, m):
        i = int(np.argmax(np.abs(a_full[:, j])))
        if a_full[i, j] < 0:
            a_full[:, j] = -a_full[:, j]

    return SvdResult(A=a_full, singular_values=sigma, V=v_full)


def truncate(result: SvdResult, alpha: float) -> TruncatedSvd:
    """Keep the smallest leading rank whose energy share strictly exceeds ``alpha``.

    ``alpha`` in (0, 1) controls smoothing: the rank ``w`` is the least index
    with ``sum(sigma[:w]) / sum(sigma) > alpha``.  A zero spectrum keeps one
    factor.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    sigma = result.singular_values
    total = float(np.sum(sigma))
    if total == 0.0:
        w = 1
    else:
        ratios = np.cumsum(sigma) / total
        above = ratios > alpha
        w = int(np.argmax(above)) + 1 if above.any() else len(sigma)
    return TruncatedSvd(
        A_w=result.A[:, :w].copy(),
        singular_values=sigma[:w].copy(),
        V_w=result.V[:, :w].copy(),
        rank=w,
    )
