"""Dense symmetric eigendecomposition for graph Laplacians.

The reference solver is cyclic Jacobi.  Large matrices (the full core plus
tails graphs run to a few hundred vertices) are routed to LAPACK through
``numpy.linalg.eigh`` when ``method="auto"``; both paths share the same
post-processing so outputs are interchangeable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph_core import WeightedGraph, build_laplacian

__all__ = [
    "SpectralDecomposition",
    "DisconnectedGraphError",
    "ConvergenceError",
    "eig_sym",
    "jacobi_eig",
    "lambda2",
]

SYM_TOL = 1e-12
MAX_SWEEPS = 100
JACOBI_MAX_N = 64
CLUSTER_TOL = 1e-9
CONNECTED_TOL = 1e-9


class DisconnectedGraphError(ValueError):
    """lambda_2 vanished: the graph is not connected through positive weights."""


class ConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SpectralDecomposition:
    values: np.ndarray  # ascending
    vectors: np.ndarray  # column i pairs with values[i]

    @property
    def n(self) -> int:
        return len(self.values)

    def residual(self, m: np.ndarray) -> float:
        return float(np.max(np.abs(m @ self.vectors - self.vectors * self.values)))


def _check_symmetric(m: np.ndarray) -> np.ndarray:
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a - a.T)) > SYM_TOL * scale:
        raise ValueError("matrix is not symmetric")
    return 0.5 * (a + a.T)


def jacobi_eig(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = MAX_SWEEPS):
    """Cyclic Jacobi: returns (unsorted eigenvalues, eigenvector columns)."""
    a = a.copy()
    n = a.shape[0]
    v = np.eye(n)
    norm = np.linalg.norm(a)
    if n < 2 or norm == 0.0:
        return np.diag(a).copy(), v
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < tol * norm:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * norm:
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # rotate rows/cols p and q
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")


def _orthonormalize_clusters(w: np.ndarray, v: np.ndarray, scale: float) -> np.ndarray:
    n = len(w)
    i = 0
    while i < n:
        j = i + 1
        while j < n and w[j] - w[j - 1] <= CLUSTER_TOL * scale:
            j += 1
        if j - i > 1:
            q, _ = np.linalg.qr(v[:, i:j])  # Gram-Schmidt in Householder form
            v[:, i:j] = q
        i = j
    return v


def _fix_signs(v: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(v), axis=0)
    s = np.sign(v[idx, np.arange(v.shape[1])])
    s[s == 0] = 1.0
    return v * s


def eig_sym(m, method: str = "auto") -> SpectralDecomposition:
    """Ascending eigenvalues with orthonormal eigenvector columns.

    ``method`` is "jacobi", "lapack" or "auto" (Jacobi up to 64 rows).
    Within a degenerate cluster the basis is arbitrary but orthonormal; each
    vector's largest-magnitude entry is made positive.
    """
    a = _check_symmetric(m)
    n = a.shape[0]
    if method == "auto":
        method = "jacobi" if n <= JACOBI_MAX_N else "lapack"
    if method == "jacobi":
        w, v = jacobi_eig(a)
    elif method == "lapack":
        w, v = np.linalg.eigh(a)
    else:
        raise ValueError(f"unknown method {method!r}")
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]
    scale = max(1.0, float(np.max(np.abs(w)))) if n else 1.0
    v = _orthonormalize_clusters(w, v, scale)
    if n:
        v = _fix_signs(v)
    return SpectralDecomposition(w, v)


def lambda2(g: WeightedGraph, method: str = "auto") -> float:
    if g.n < 2:
        raise ValueError("lambda_2 needs at least two vertices")
    vals = eig_sym(build_laplacian(g), method=method).values
    scale = max(1.0, float(vals[-1]))
    if vals[1] < CONNECTED_TOL * scale:
        raise DisconnectedGraphError(f"graph is disconnected (lambda_2 = {vals[1]:.3e})")
    return float(vals[1])
