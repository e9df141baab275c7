"""Hot numeric kernels with numba and pure-numpy implementations.

Every kernel below exists in two interchangeable versions. The numpy ones are
vectorised; the numba ones are explicit loops compiled with ``@njit`` and
exploit Hermitian symmetry where it applies. ``get_kernels`` hands out either
set by name; the module-level names are bound to the backend selected in
:mod:`crfkit._accel` so the rest of the package never branches.

All kernels take C-contiguous arrays: complex128 matrices, float64 vectors.
"""
from __future__ import annotations

from types import SimpleNamespace

import numpy as np

from ._accel import NUMBA_AVAILABLE, NUMBA_ENABLED

# Squared-norm floor below which an angle direction counts as zero length.
DEGENERATE_NORM_SQ = 1e-24


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------


def _np_row_stats(mat: np.ndarray, absent_tol: float):
    """Row squared norms of ``mat`` and the unit-normalised rows.

    Rows whose squared norm is <= ``absent_tol`` come back as zero rows.
    """
    weights = np.einsum("ij,ij->i", mat, mat.conj()).real.copy()
    scale = np.zeros_like(weights)
    defined = weights > absent_tol
    scale[defined] = 1.0 / np.sqrt(weights[defined])
    return weights, mat * scale[:, None]


def _np_gram_abs_sq(vertices: np.ndarray) -> np.ndarray:
    """Squared overlap magnitudes |<v_i|v_j>|^2 for unit rows, clipped to [0, 1]."""
    overlap = vertices @ vertices.conj().T
    gram = (overlap * overlap.conj()).real
    np.fill_diagonal(gram, 1.0)
    return np.clip(gram, 0.0, 1.0)


def _np_partial_trace_mat(mat: np.ndarray) -> np.ndarray:
    """rho[s, t] = sum_i mat[i, s] * conj(mat[i, t]) for a unit-Frobenius matrix."""
    return mat.T @ mat.conj()


def _np_angle_cos_matrix(weights: np.ndarray, gram: np.ndarray) -> np.ndarray:
    """Cosines between all point-to-vertex directions via the Gram lift.

    Entry (k, l) is cos of the angle between the directions toward vertices
    k and l; pairs where either direction has squared length below
    ``DEGENERATE_NORM_SQ`` are NaN.
    """
    g = gram @ weights
    q = float(weights @ g)
    norms_sq = np.maximum(q - 2.0 * g + np.diag(gram), 0.0)
    inner = q - g[:, None] - g[None, :] + gram
    ok = norms_sq > DEGENERATE_NORM_SQ
    out = np.full_like(gram, np.nan)
    pair_ok = ok[:, None] & ok[None, :]
    denom = np.sqrt(np.outer(norms_sq, norms_sq))
    out[pair_ok] = inner[pair_ok] / denom[pair_ok]
    return np.clip(out, -1.0, 1.0)


# ---------------------------------------------------------------------------
# numba implementations (loop bodies; decorated below when enabled)
# ---------------------------------------------------------------------------


def _nb_row_stats(mat, absent_tol):
    n, m = mat.shape
    weights = np.zeros(n)
    vertices = np.zeros((n, m), dtype=np.complex128)
    for i in range(n):
        acc = 0.0
        for j in range(m):
            v = mat[i, j]
            acc += v.real * v.real + v.imag * v.imag
        weights[i] = acc
        if acc > absent_tol:
            inv = 1.0 / np.sqrt(acc)
            for j in range(m):
                vertices[i, j] = mat[i, j] * inv
    return weights, vertices


def _nb_gram_abs_sq(vertices):
    n, m = vertices.shape
    gram = np.empty((n, n))
    for i in range(n):
        gram[i, i] = 1.0
        for j in range(i + 1, n):
            re = 0.0
            im = 0.0
            for k in range(m):
                a = vertices[i, k]
                b = vertices[j, k]
                re += a.real * b.real + a.imag * b.imag
                im += a.real * b.imag - a.imag * b.real
            val = re * re + im * im
            if val > 1.0:
                val = 1.0
            gram[i, j] = val
            gram[j, i] = val
    return gram


def _nb_partial_trace_mat(mat):
    n, m = mat.shape
    rho = np.empty((m, m), dtype=np.complex128)
    for s in range(m):
        for t in range(s, m):
            re = 0.0
            im = 0.0
            for i in range(n):
                a = mat[i, s]
                b = mat[i, t]
                re += a.real * b.real + a.imag * b.imag
                im += a.imag * b.real - a.real * b.imag
            rho[s, t] = complex(re, im)
            rho[t, s] = complex(re, -im)
    return rho


def _nb_angle_cos_matrix(weights, gram):
    n = weights.shape[0]
    g = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += gram[i, j] * weights[j]
        g[i] = acc
    q = 0.0
    for i in range(n):
        q += weights[i] * g[i]
    norms_sq = np.empty(n)
    for i in range(n):
        v = q - 2.0 * g[i] + gram[i, i]
        norms_sq[i] = v if v > 0.0 else 0.0
    out = np.full((n, n), np.nan)
    for k in range(n):
        if norms_sq[k] <= DEGENERATE_NORM_SQ:
            continue
        for l in range(n):
            if norms_sq[l] <= DEGENERATE_NORM_SQ:
                continue
            val = (q - g[k] - g[l] + gram[k, l]) / np.sqrt(norms_sq[k] * norms_sq[l])
            if val > 1.0:
                val = 1.0
            elif val < -1.0:
                val = -1.0
            out[k, l] = val
    return out


_NUMPY_KERNELS = SimpleNamespace(
    backend="numpy",
    row_stats=_np_row_stats,
    gram_abs_sq=_np_gram_abs_sq,
    partial_trace_mat=_np_partial_trace_mat,
    angle_cos_matrix=_np_angle_cos_matrix,
)

_NUMBA_KERNELS = None
if NUMBA_AVAILABLE:
    from numba import njit

    _NUMBA_KERNELS = SimpleNamespace(
        backend="numba",
        row_stats=njit(cache=True)(_nb_row_stats),
        gram_abs_sq=njit(cache=True)(_nb_gram_abs_sq),
        partial_trace_mat=njit(cache=True)(_nb_partial_trace_mat),
        angle_cos_matrix=njit(cache=True)(_nb_angle_cos_matrix),
    )


def available_backends() -> tuple[str, ...]:
    return ("numpy", "numba") if _NUMBA_KERNELS is not None else ("numpy",)


def get_kernels(backend: str) -> SimpleNamespace:
    """Return the kernel set for ``backend`` ("numpy" or "numba")."""
    if backend == "numpy":
        return _NUMPY_KERNELS
    if backend == "numba":
        if _NUMBA_KERNELS is None:
            raise ValueError("numba backend requested but numba is not importable")
        return _NUMBA_KERNELS
    raise ValueError(f"unknown kernel backend {backend!r}")


_ACTIVE = _NUMBA_KERNELS if NUMBA_ENABLED else _NUMPY_KERNELS

ACTIVE_BACKEND = _ACTIVE.backend
row_stats = _ACTIVE.row_stats
gram_abs_sq = _ACTIVE.gram_abs_sq
partial_trace_mat = _ACTIVE.partial_trace_mat
angle_cos_matrix = _ACTIVE.angle_cos_matrix
