"""Hilbert-Schmidt geometry of frames: Gram and distance matrices, diameter,
Cayley-Menger simplex volume, and the angle cosines between point-to-vertex
directions.

Vertices are rank-1 projectors, so every quantity reduces to the weights and
the squared overlap magnitudes G_ij = |<phi_i|phi_j>|^2 = tr(sigma_i sigma_j):
distances are d_ij = sqrt(2 - 2 G_ij), and inner products of direction
vectors sum a_i b_j G_ij (the Gram lift) without materializing any matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import (
    DegenerateAngleError,
    DegenerateFrameError,
    NumericalError,
    UndefinedVertexError,
    ValidationError,
)
from .frames import ConvexRigidFrame, build_frame, defined_vertex_matrix
from .tensor import Bipartition, HermitianMatrix, PureState, pack_index

# Relative cutoff for treating singular values / determinants as zero.
RANK_REL_TOL = 1e-10

# H-S norm below which a point-to-vertex direction is degenerate.
DIRECTION_NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FrameGeometry:
    """Intrinsic geometric data of a frame's defined vertices, label order."""

    n_defined: int
    labels: tuple[tuple[int, ...], ...]
    gram: np.ndarray
    dist: np.ndarray
    diameter: float
    affine_rank: int
    volume: float


@dataclass(frozen=True)
class VolumePair:
    """Simplex volumes of the two frames across a bipartition."""

    left_volume: float
    right_volume: float


def _entries(mat) -> np.ndarray:
    if isinstance(mat, HermitianMatrix):
        return mat.entries
    return np.asarray(mat, dtype=np.complex128)


def hs_inner(a, b) -> float:
    """Hilbert-Schmidt inner product tr(a^t b), real for Hermitian inputs."""
    am, bm = _entries(a), _entries(b)
    if am.shape != bm.shape:
        raise ValidationError(f"dimension mismatch: {am.shape} vs {bm.shape}")
    return float(np.vdot(am, bm).real)


def hs_distance(a, b) -> float:
    """Hilbert-Schmidt (Frobenius) distance between two operators."""
    am, bm = _entries(a), _entries(b)
    if am.shape != bm.shape:
        raise ValidationError(f"dimension mismatch: {am.shape} vs {bm.shape}")
    return float(np.linalg.norm(am - bm))


def cayley_menger_volume(dist: Sequence[Sequence[float]]) -> tuple[int, float]:
    """Affine rank and (n-1)-simplex content of n points given their distances.

    The rank is that of the doubly centered squared-distance Gram matrix
    (singular values below RANK_REL_TOL of the largest count as zero). When
    the points are affinely dependent (rank < n-1) the volume is 0;
    otherwise it comes from the bordered Cayley-Menger determinant. A single
    point reports (0, 0.0); two distinct points report (1, d01).
    """
    d = np.asarray(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValidationError(f"distance matrix must be square, got shape {d.shape}")
    if float(np.max(np.abs(d - d.T), initial=0.0)) > 1e-12:
        raise ValidationError("distance matrix must be symmetric")
    if float(np.max(np.abs(np.diag(d)), initial=0.0)) > 1e-12:
        raise ValidationError("distance matrix must have a zero diagonal")
    n = d.shape[0]
    if n == 1:
        return 0, 0.0
    d2 = d * d
    centering = np.eye(n) - np.full((n, n), 1.0 / n)
    gram = -0.5 * (centering @ d2 @ centering)
    sv = np.linalg.svd(gram, compute_uv=False)
    rank = int(np.sum(sv > RANK_REL_TOL * sv[0])) if sv[0] > 0 else 0
    if rank < n - 1:
        return rank, 0.0
    bordered = np.ones((n + 1, n + 1))
    bordered[0, 0] = 0.0
    bordered[1:, 1:] = d2
    det = float(np.linalg.det(bordered))
    j = n - 1
    vol_sq = ((-1.0) ** n) * det / (2.0**j * math.factorial(j) ** 2)
    scale = float(np.max(d)) ** (2 * j)
    if abs(det) <= RANK_REL_TOL * scale or vol_sq <= 0.0:
        return rank, 0.0
    return rank, math.sqrt(vol_sq)


def frame_geometry(frame: ConvexRigidFrame) -> FrameGeometry:
    """Gram, distances, diameter, affine rank, and volume over the defined
    vertices of ``frame``, in label order."""
    labels, vmat = defined_vertex_matrix(frame)
    n = len(labels)
    if n == 0:
        raise DegenerateFrameError("frame has no defined vertex")
    gram = _kernels.gram_abs_sq(vmat)
    dist = np.sqrt(np.maximum(2.0 - 2.0 * gram, 0.0))
    np.fill_diagonal(dist, 0.0)
    diameter = float(dist.max()) if n > 1 else 0.0
    rank, volume = cayley_menger_volume(dist)
    return FrameGeometry(n, tuple(labels), gram, dist, diameter, rank, volume)


def volume_pair(state: PureState, bp: Bipartition) -> VolumePair:
    """Volumes of the frames on both sides of a bipartition."""
    left = frame_geometry(build_frame(state, bp.left))
    right = frame_geometry(build_frame(state, bp.right))
    return VolumePair(left.volume, right.volume)


def _defined_position(frame: ConvexRigidFrame, label: Sequence[int]) -> int:
    """Index of ``label`` among the frame's defined vertices."""
    flat = pack_index(label, frame.local_dim, frame.subset.size)
    defined = frame.defined_indices
    if flat not in defined:
        raise UndefinedVertexError(
            f"vertex {tuple(label)} has weight below threshold in this frame"
        )
    return defined.index(flat)


def direction_coeffs(frame: ConvexRigidFrame, k: Sequence[int]) -> np.ndarray:
    """Coefficients, over defined vertices, of the direction from the frame
    point to vertex ``k``: weight_i minus 1 at i = k. They sum to ~0 and the
    represented operator is never materialized."""
    pos = _defined_position(frame, k)
    coeffs = np.array([frame.vertices[i].weight for i in frame.defined_indices])
    coeffs[pos] -= 1.0
    return coeffs


def vertex_angle_cos(frame: ConvexRigidFrame, k: Sequence[int], l: Sequence[int]) -> float:
    """Cosine of the angle between the point-to-vertex directions k and l,
    computed through the Gram lift and clamped to [-1, 1]."""
    if tuple(k) == tuple(l):
        raise ValidationError("vertex labels must differ")
    pk = _defined_position(frame, k)
    pl = _defined_position(frame, l)
    weights = np.array([frame.vertices[i].weight for i in frame.defined_indices])
    _, vmat = defined_vertex_matrix(frame)
    gram = _kernels.gram_abs_sq(vmat)
    g = gram @ weights
    q = float(weights @ g)
    norm_sq_k = max(q - 2.0 * g[pk] + 1.0, 0.0)
    norm_sq_l = max(q - 2.0 * g[pl] + 1.0, 0.0)
    if min(norm_sq_k, norm_sq_l) <= DIRECTION_NORM_TOL**2:
        raise DegenerateAngleError(
            "frame point coincides with a vertex; the direction has no angle"
        )
    value = (q - g[pk] - g[pl] + gram[pk, pl]) / math.sqrt(norm_sq_k * norm_sq_l)
    if abs(value) > 1.0 + 1e-12:
        raise NumericalError(f"angle cosine {value!r} exceeds [-1, 1] beyond tolerance")
    return float(min(1.0, max(-1.0, value)))


def pairwise_angle_cosines(frame: ConvexRigidFrame) -> np.ndarray:
    """Matrix of angle cosines between all defined-vertex directions; NaN
    where a direction is degenerate."""
    weights = np.array([frame.vertices[i].weight for i in frame.defined_indices])
    _, vmat = defined_vertex_matrix(frame)
    gram = _kernels.gram_abs_sq(vmat)
    return _kernels.angle_cos_matrix(weights, gram)
