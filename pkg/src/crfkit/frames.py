"""Convex rigid frames: slice a state over a party subset into weighted
vertex states on the complement, compare frames, and rebuild states.

For a subset of P parties, the N^P slices of the amplitude tensor (subset
digits fixed, complement digits free) give the frame: each slice's squared
norm is a vertex weight, the normalized slice is the vertex state. Vertices
whose weight falls below ``ABSENT_WEIGHT_TOL`` are absent and carry no state.
As a matrix, the weighted sum of vertex projectors equals the partial trace
over the sliced parties.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ValidationError
from .tensor import (
    Bipartition,
    HermitianMatrix,
    PartySubset,
    PureState,
    inverse_permutation,
    pack_index,
    reorder_parties,
    reshape_bipartite,
    validate_proper_subset,
)

# Below this squared slice norm a vertex is declared absent.
ABSENT_WEIGHT_TOL = 1e-14

# Default absolute tolerance for frame identity on weights and distances.
IDENTICAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Vertex:
    """One frame vertex: its subset digit label, weight, and unit state on
    the complement subsystem (None when the weight is below threshold)."""

    label: tuple[int, ...]
    weight: float
    state: np.ndarray | None

    @property
    def defined(self) -> bool:
        return self.state is not None


@dataclass(frozen=True, eq=False)
class ConvexRigidFrame:
    """All N^P vertices of a state sliced over ``subset``, in label order."""

    subset: PartySubset
    vertices: tuple[Vertex, ...]
    parties: int
    local_dim: int

    @property
    def weights(self) -> np.ndarray:
        return np.array([v.weight for v in self.vertices])

    @property
    def defined_indices(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.vertices) if v.defined)

    def vertex(self, label: Sequence[int]) -> Vertex:
        idx = pack_index(label, self.local_dim, self.subset.size)
        return self.vertices[idx]


def _subset_labels(local_dim: int, size: int):
    return itertools.product(range(local_dim), repeat=size)


def _freeze(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def build_frame(state: PureState, subset: PartySubset) -> ConvexRigidFrame:
    """Construct the frame of ``state`` over ``subset``.

    Weights sum to 1 and the weighted vertex projectors reproduce the
    partial trace over ``subset``.
    """
    validate_proper_subset(subset, state.parties)
    mat = reshape_bipartite(state, Bipartition.from_left(subset, state.parties))
    weights, vmat = _kernels.row_stats(np.ascontiguousarray(mat), ABSENT_WEIGHT_TOL)
    vertices = []
    for row, label in enumerate(_subset_labels(state.local_dim, subset.size)):
        w = float(weights[row])
        if w > ABSENT_WEIGHT_TOL:
            vertices.append(Vertex(label, w, _freeze(vmat[row].copy())))
        else:
            vertices.append(Vertex(label, w, None))
    return ConvexRigidFrame(subset, tuple(vertices), state.parties, state.local_dim)


def slice_component(state: PureState, subset: PartySubset, label: Sequence[int]) -> Vertex:
    """Single vertex of the frame: weight and normalized slice at ``label``."""
    validate_proper_subset(subset, state.parties)
    row = pack_index(label, state.local_dim, subset.size)
    mat = reshape_bipartite(state, Bipartition.from_left(subset, state.parties))
    slice_vec = mat[row]
    weight = float(np.vdot(slice_vec, slice_vec).real)
    if weight > ABSENT_WEIGHT_TOL:
        return Vertex(tuple(int(d) for d in label), weight, _freeze(slice_vec / math.sqrt(weight)))
    return Vertex(tuple(int(d) for d in label), weight, None)


def defined_vertex_matrix(frame: ConvexRigidFrame) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """Labels of the defined vertices and their states stacked as rows."""
    labels = [v.label for v in frame.vertices if v.defined]
    dim = frame.local_dim ** (frame.parties - frame.subset.size)
    states = [v.state for v in frame.vertices if v.defined]
    if states:
        mat = np.ascontiguousarray(np.stack(states))
    else:
        mat = np.zeros((0, dim), dtype=np.complex128)
    return labels, mat


def frame_point(frame: ConvexRigidFrame) -> HermitianMatrix:
    """Weighted sum of vertex projectors; equals the partial trace over the
    sliced parties."""
    _, vmat = defined_vertex_matrix(frame)
    weights = np.array([v.weight for v in frame.vertices if v.defined])
    point = np.einsum("i,is,it->st", weights, vmat, vmat.conj())
    point = 0.5 * (point + point.conj().T)
    return HermitianMatrix(point)


@dataclass(frozen=True)
class FrameDiff:
    """Elementwise discrepancy between two label-matched frames."""

    max_weight_diff: float
    max_distance_diff: float
    definedness_mismatch: bool

    def within(self, tol: float) -> bool:
        return (
            not self.definedness_mismatch
            and self.max_weight_diff <= tol
            and self.max_distance_diff <= tol
        )


def _distance_matrix(vmat: np.ndarray) -> np.ndarray:
    gram = _kernels.gram_abs_sq(vmat)
    return np.sqrt(np.maximum(2.0 - 2.0 * gram, 0.0))


def frame_diff(f: ConvexRigidFrame, g: ConvexRigidFrame) -> FrameDiff:
    """Label-matched comparison data: max weight gap, max gap between
    pairwise vertex distances (over labels defined in both frames), and
    whether any label is defined in one frame but absent in the other."""
    if (f.parties, f.local_dim, f.subset.size) != (g.parties, g.local_dim, g.subset.size):
        raise ValidationError(
            "frames are not comparable: "
            f"(M,N,P)=({f.parties},{f.local_dim},{f.subset.size}) vs "
            f"({g.parties},{g.local_dim},{g.subset.size})"
        )
    weight_diff = float(np.max(np.abs(f.weights - g.weights)))
    f_def = set(f.defined_indices)
    g_def = set(g.defined_indices)
    mismatch = f_def != g_def
    common = sorted(f_def & g_def)
    if len(common) < 2:
        return FrameDiff(weight_diff, 0.0, mismatch)
    f_rows = np.ascontiguousarray(np.stack([f.vertices[i].state for i in common]))
    g_rows = np.ascontiguousarray(np.stack([g.vertices[i].state for i in common]))
    dist_diff = float(np.max(np.abs(_distance_matrix(f_rows) - _distance_matrix(g_rows))))
    return FrameDiff(weight_diff, dist_diff, mismatch)


def frames_identical(
    f: ConvexRigidFrame, g: ConvexRigidFrame, tol: float = IDENTICAL_TOL
) -> bool:
    """True when label-matched weights and pairwise vertex distances agree
    within ``tol``. A vertex defined in one frame but absent in the other
    counts as a mismatch; labels absent in both are skipped."""
    return frame_diff(f, g).within(tol)


def _phase_fixed(vec: np.ndarray) -> np.ndarray:
    """Rotate a global phase so the first non-negligible entry is real positive."""
    for x in vec:
        if abs(x) > 1e-12:
            return vec * (abs(x) / x)
    raise ValidationError("vertex state has no entry above 1e-12; cannot fix its phase")


def assemble_state(
    subset: PartySubset,
    weighted_states: Sequence[tuple[float, Sequence[complex] | None]],
    parties: int,
    local_dim: int,
) -> PureState:
    """Rebuild a state from frame data: one (weight, complement-state) pair
    per subset label, in label order.

    The amplitude at a merged multi-index is sqrt(weight) times the vertex
    state's entry, with the subset digits at the subset's party positions.
    Each vertex state's global phase is first fixed to make its leading
    entry real positive, so rebuilding the frame of the result reproduces
    the input frame (frame identity, not amplitude identity).
    """
    validate_proper_subset(subset, parties)
    p = subset.size
    n_rows = local_dim**p
    n_cols = local_dim ** (parties - p)
    if len(weighted_states) != n_rows:
        raise ValidationError(
            f"expected {n_rows} (weight, state) pairs for subset {subset}, got {len(weighted_states)}"
        )
    weights = np.array([float(w) for w, _ in weighted_states])
    if np.any(weights < -ABSENT_WEIGHT_TOL):
        raise ValidationError("vertex weights must be non-negative")
    total = float(weights.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValidationError(f"vertex weights sum to {total!r}, expected 1 within 1e-9")
    rows = np.zeros((n_rows, n_cols), dtype=np.complex128)
    for r, (w, vec) in enumerate(weighted_states):
        if w <= ABSENT_WEIGHT_TOL:
            continue
        if vec is None:
            raise ValidationError(f"vertex {r} has weight {w} but no state")
        vec = np.asarray(vec, dtype=np.complex128).reshape(-1)
        if vec.size != n_cols:
            raise ValidationError(
                f"vertex {r} state has length {vec.size}, expected {n_cols}"
            )
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > 1e-9:
            raise ValidationError(f"vertex {r} state norm {norm!r} deviates from 1 beyond 1e-9")
        rows[r] = math.sqrt(w) * _phase_fixed(vec)
    flat = rows.reshape(-1)
    flat = flat / np.linalg.norm(flat)
    ordered = PureState(parties, local_dim, flat)
    order = subset.indices + subset.complement(parties).indices
    return reorder_parties(ordered, inverse_permutation(order))
