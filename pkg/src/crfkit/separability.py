"""Geometric separability decisions, the independent SVD oracle, full
profiles over all bipartitions, and factor extraction.

A state factors across a bipartition exactly when its frame on either side
shrinks to a point, so the decision statistic is the frame diameter (max
pairwise vertex distance). The SVD oracle answers the same question from the
rank of the bipartite coefficient matrix and never touches the frame path.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    NumericalError,
    PreconditionError,
    ResourceLimitError,
    ValidationError,
)
from .frames import build_frame, defined_vertex_matrix
from .tensor import (
    Bipartition,
    PartySubset,
    PureState,
    reshape_bipartite,
)

DEFAULT_TOL = 1e-8

# Profile/signature enumeration bound on the party count.
MAX_ENUMERATION_PARTIES = 12


@dataclass(frozen=True)
class SeparabilityVerdict:
    """Decision for one bipartition. ``diameter`` is set by the frame method,
    ``oracle_second_singular`` by the SVD oracle; ``agreement`` compares the
    two when both ran."""

    bipartition: Bipartition
    separable: bool
    diameter: float | None = None
    oracle_second_singular: float | None = None
    agreement: bool | None = None


@dataclass(frozen=True)
class SeparabilityProfile:
    """One verdict per unordered bipartition, plus the all-of-them summary."""

    verdicts: dict[Bipartition, SeparabilityVerdict]
    fully_separable: bool


def frame_diameter(state: PureState, subset: PartySubset) -> float:
    """Max pairwise vertex distance of the frame over ``subset``; 0.0 when
    at most one vertex is defined."""
    frame = build_frame(state, subset)
    _, vmat = defined_vertex_matrix(frame)
    if vmat.shape[0] < 2:
        return 0.0
    gram = _kernels.gram_abs_sq(vmat)
    off = gram[~np.eye(gram.shape[0], dtype=bool)]
    return float(np.sqrt(max(2.0 - 2.0 * float(off.min()), 0.0)))


def is_separable_crf(
    state: PureState,
    bp: Bipartition,
    tol: float = DEFAULT_TOL,
    check_complement: bool = False,
) -> SeparabilityVerdict:
    """Frame-shrink decision: separable iff the left frame's diameter is at
    most ``tol``.

    With ``check_complement`` the right frame is evaluated too and a
    disagreement (which the shrink criterion rules out) raises
    NumericalError; tests run with this on.
    """
    if tol <= 0:
        raise PreconditionError(f"tolerance must be positive, got {tol}")
    if bp.parties != state.parties:
        raise ValidationError(
            f"bipartition {bp} covers {bp.parties} parties, state has {state.parties}"
        )
    diameter = frame_diameter(state, bp.left)
    separable = diameter <= tol
    if check_complement:
        right = frame_diameter(state, bp.right)
        if (right <= tol) != separable:
            raise NumericalError(
                f"frame verdicts disagree across {bp}: diameters {diameter!r} vs {right!r}"
            )
    return SeparabilityVerdict(bp, separable, diameter=diameter)


def svd_oracle(state: PureState, bp: Bipartition, tol: float = DEFAULT_TOL) -> SeparabilityVerdict:
    """Rank-1 test on the bipartite coefficient matrix: separable iff the
    second-largest singular value is at most ``tol``. Independent of the
    frame construction."""
    mat = reshape_bipartite(state, bp)
    try:
        singulars = np.linalg.svd(mat, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed on the {bp} reshape: {exc}") from exc
    second = float(singulars[1]) if singulars.size > 1 else 0.0
    return SeparabilityVerdict(bp, second <= tol, oracle_second_singular=second)


def canonical_bipartitions(parties: int) -> tuple[Bipartition, ...]:
    """All 2^(M-1) - 1 unordered bipartitions, represented with party 1 on
    the left, ordered by left size then lexicographically."""
    if parties > MAX_ENUMERATION_PARTIES:
        raise ResourceLimitError(
            f"bipartition enumeration is capped at M={MAX_ENUMERATION_PARTIES}, got {parties}"
        )
    out = []
    rest = range(2, parties + 1)
    for size in range(1, parties):
        for extra in itertools.combinations(rest, size - 1):
            out.append(Bipartition.from_left((1,) + extra, parties))
    return tuple(out)


def separability_profile(state: PureState, tol: float = DEFAULT_TOL) -> SeparabilityProfile:
    """Frame verdict for every unordered bipartition, and whether all of
    them are separable."""
    verdicts: dict[Bipartition, SeparabilityVerdict] = {}
    for bp in canonical_bipartitions(state.parties):
        verdicts[bp] = is_separable_crf(state, bp, tol)
    fully = all(v.separable for v in verdicts.values())
    return SeparabilityProfile(verdicts, fully)


def _phase_fixed(vec: np.ndarray) -> np.ndarray:
    for x in vec:
        if abs(x) > 1e-12:
            return vec * (abs(x) / x)
    return vec


def factorize(
    state: PureState, bp: Bipartition, tol: float = DEFAULT_TOL
) -> tuple[PureState, PureState]:
    """Split a separable state into its two factors across ``bp``.

    The factors are the leading singular vectors of the bipartite reshape,
    phases fixed so each factor's first non-negligible amplitude is real
    positive; their product reproduces the input up to a global phase.
    """
    verdict = is_separable_crf(state, bp, tol)
    if not verdict.separable:
        raise PreconditionError(
            f"state is not separable across {bp}: frame diameter {verdict.diameter!r} > {tol}"
        )
    mat = reshape_bipartite(state, bp)
    try:
        u, _, vh = np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed on the {bp} reshape: {exc}") from exc
    left_vec = _phase_fixed(u[:, 0])
    right_vec = _phase_fixed(vh[0, :])
    left = PureState(bp.left.size, state.local_dim, left_vec / np.linalg.norm(left_vec))
    right = PureState(bp.right.size, state.local_dim, right_vec / np.linalg.norm(right_vec))
    return left, right
