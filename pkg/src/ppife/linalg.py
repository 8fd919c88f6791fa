"""Sparse storage and Krylov solvers.

CSR storage and the matrix-vector product come from ``scipy.sparse``;
the Jacobi-preconditioned CG and BiCGStab iterations are implemented here
so iteration counts, restarts and stopping rules are under our control.
"""
import logging

import numpy as np
import scipy.io
import scipy.sparse as sp

from .exceptions import NoConvergence

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10


class TripletBuffer:
    """Growable (row, col, value) store for an ``n x n`` matrix."""

    def __init__(self, n):
        self.n = int(n)
        self._rows, self._cols, self._vals = [], [], []

    def add(self, rows, cols, vals):
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=float).ravel()
        if rows.size and (rows.min() < 0 or rows.max() >= self.n
                          or cols.min() < 0 or cols.max() >= self.n):
            raise IndexError("triplet index outside matrix dimension")
        self._rows.append(rows)
        self._cols.append(cols)
        self._vals.append(vals)

    def add_block(self, dofs_row, dofs_col, block):
        dofs_row = np.asarray(dofs_row)
        dofs_col = np.asarray(dofs_col)
        R, C = np.meshgrid(dofs_row, dofs_col, indexing="ij")
        self.add(R, C, block)

    def arrays(self):
        if not self._rows:
            e = np.empty(0, dtype=np.int64)
            return e, e, np.empty(0)
        return (np.concatenate(self._rows), np.concatenate(self._cols),
                np.concatenate(self._vals))

    def __len__(self):
        return sum(len(r) for r in self._rows)


def compress(buf):
    """CSR matrix with duplicates summed and column indices sorted per row."""
    rows, cols, vals = buf.arrays()
    A = sp.coo_matrix((vals, (rows, cols)), shape=(buf.n, buf.n)).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return A


def spmv(A, x):
    return A @ np.asarray(x, dtype=float)


def transpose_spmv(A, x):
    return A.T @ np.asarray(x, dtype=float)


def is_symmetric(A, tol=0.0):
    D = (A - A.T).tocoo()
    if D.nnz == 0:
        return True
    return bool(np.max(np.abs(D.data)) <= tol)


def _jacobi(A):
    d = A.diagonal().astype(float)
    d[d == 0] = 1.0
    return 1.0 / d


def cg(A, b, tol=DEFAULT_TOL, max_iter=None, x0=None, callback=None, check_symmetric=False):
    """Jacobi-preconditioned conjugate gradients.

    Stops when ``||b - A x|| <= tol * ||b||``.  Returns ``(x, iterations)``.
    """
    if check_symmetric and not is_symmetric(A, tol=1e-12 * abs(A).max()):
        raise ValueError("cg needs a symmetric matrix")
    b = np.asarray(b, dtype=float)
    n = len(b)
    max_iter = 10 * n if max_iter is None else max_iter
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), 0
    target = tol * bnorm
    dinv = _jacobi(A)
    r = b - A @ x
    if np.linalg.norm(r) <= target:
        return x, 0
    z = dinv * r
    p = z.copy()
    rz = r @ z
    for it in range(1, max_iter + 1):
        Ap = A @ p
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        if callback is not None:
            callback(x)
        rnorm = np.linalg.norm(r)
        if rnorm <= target:
            return x, it
        z = dinv * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise NoConvergence(f"cg did not converge in {max_iter} iterations "
                        f"(relative residual {rnorm / bnorm:.3e})",
                        iterations=max_iter, residual=rnorm / bnorm)


def bicgstab(A, b, tol=DEFAULT_TOL, max_iter=None, x0=None, max_restarts=3):
    """Jacobi-preconditioned BiCGStab with restart on breakdown.

    Returns ``(x, iterations)``; iterations are summed over restarts.
    """
    b = np.asarray(b, dtype=float)
    n = len(b)
    max_iter = 10 * n if max_iter is None else max_iter
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), 0
    target = tol * bnorm
    dinv = _jacobi(A)
    total = 0
    restarts = 0
    tiny = np.finfo(float).tiny * 1e10
    while True:
        r = b - A @ x
        rnorm = np.linalg.norm(r)
        if rnorm <= target:
            return x, total
        r_hat = r.copy()
        rho = alpha = omega = 1.0
        v = np.zeros(n)
        p = np.zeros(n)
        broke = False
        while total < max_iter:
            total += 1
            rho_new = r_hat @ r
            if abs(rho_new) < tiny * max(1.0, rnorm**2):
                broke = True
                break
            beta = (rho_new / rho) * (alpha / omega)
            p = r + beta * (p - omega * v)
            y = dinv * p
            v = A @ y
            denom = r_hat @ v
            if abs(denom) < tiny:
                broke = True
                break
            alpha = rho_new / denom
            s = r - alpha * v
            if np.linalg.norm(s) <= target:
                return x + alpha * y, total
            zz = dinv * s
            t = A @ zz
            tt = t @ t
            if tt == 0.0:
                broke = True
                x = x + alpha * y
                break
            omega = (t @ s) / tt
            x = x + alpha * y + omega * zz
            r = s - omega * t
            rnorm = np.linalg.norm(r)
            if rnorm <= target:
                return x, total
            if omega == 0.0:
                broke = True
                break
            rho = rho_new
        if broke and restarts < max_restarts:
            restarts += 1
            log.debug("bicgstab breakdown at iteration %d, restarting", total)
            continue
        raise NoConvergence(f"bicgstab did not converge in {total} iterations "
                            f"(relative residual {rnorm / bnorm:.3e})",
                            iterations=total, residual=rnorm / bnorm)


def condition_estimate(A, n_power=200, tol=DEFAULT_TOL, max_inverse=200, seed=0):
    """Spectral condition number estimate of a symmetric positive definite matrix.

    Largest eigenvalue by power iteration, smallest by inverse iteration
    with CG solves.
    """
    n = A.shape[0]
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    lam_max = 0.0
    for _ in range(n_power):
        y = A @ x
        lam_max = float(x @ y)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            break
        x = y / ny

    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    lam_min = np.inf
    for _ in range(max_inverse):
        y, _ = cg(A, x, tol=tol)
        ny = np.linalg.norm(y)
        x_new = y / ny
        lam = float(x_new @ (A @ x_new))
        done = abs(lam - lam_min) <= 1e-8 * abs(lam)
        lam_min, x = lam, x_new
        if done:
            break
    return lam_max / lam_min


def write_matrix_market(path, A, comment=""):
    scipy.io.mmwrite(str(path), sp.coo_matrix(A), comment=comment)
