"""Motion-equivalence classification and the local-unitary audit instrument.

Two states are motion-equivalent when, for every proper party subset, their
frames have identical weights and identical pairwise vertex distances. That
relation is computed exactly from frame data. Whether it coincides with
local-unitary equivalence is treated as an empirical question: the audit
runs random local unitaries of a chosen kind against a state and records,
per trial, whether the transformed state stays in the class. Diagonal-phase
unitaries and unitaries restricted to the complement of a subset are
invariance directions by construction; generic (haar) factors are only
observed, never asserted.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError, ValidationError
from .frames import ConvexRigidFrame, FrameDiff, build_frame, frame_diff
from .geometry import FrameGeometry, VolumePair, frame_geometry, pairwise_angle_cosines
from .separability import MAX_ENUMERATION_PARTIES, canonical_bipartitions
from .tensor import (
    LocalUnitary,
    PartySubset,
    PureState,
    apply_local_unitary,
    random_diag_phase_lu,
    random_haar_unitary,
    validate_proper_subset,
)

DEFAULT_TOL = 1e-9

LU_KINDS = ("haar", "diag-phase", "complement-restricted")


def canonical_subsets(parties: int) -> tuple[PartySubset, ...]:
    """All 2^M - 2 proper subsets, ascending size then lexicographic."""
    if parties > MAX_ENUMERATION_PARTIES:
        raise ResourceLimitError(
            f"subset enumeration is capped at M={MAX_ENUMERATION_PARTIES}, got {parties}"
        )
    out = []
    for size in range(1, parties):
        for combo in itertools.combinations(range(1, parties + 1), size):
            out.append(PartySubset(combo))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class SubsetRecord:
    """Frame fingerprint for one subset: weights over all labels, then the
    geometry of the defined vertices."""

    subset: PartySubset
    weights: np.ndarray
    geometry: FrameGeometry
    angle_cosines: np.ndarray  # NaN where a direction is degenerate


@dataclass(frozen=True, eq=False)
class InvariantSignature:
    """Per-subset frame geometry for every proper subset plus the volume
    pair of every bipartition; the motion-equivalence fingerprint."""

    parties: int
    local_dim: int
    records: tuple[SubsetRecord, ...]
    volume_pairs: tuple[tuple[object, VolumePair], ...]


def signature(state: PureState) -> InvariantSignature:
    """Full invariant fingerprint of a state, deterministically ordered."""
    volumes: dict[PartySubset, float] = {}
    records = []
    for subset in canonical_subsets(state.parties):
        frame = build_frame(state, subset)
        geo = frame_geometry(frame)
        volumes[subset] = geo.volume
        records.append(
            SubsetRecord(subset, frame.weights, geo, pairwise_angle_cosines(frame))
        )
    pairs = tuple(
        (bp, VolumePair(volumes[bp.left], volumes[bp.right]))
        for bp in canonical_bipartitions(state.parties)
    )
    return InvariantSignature(state.parties, state.local_dim, tuple(records), pairs)


@dataclass(frozen=True)
class SubsetMismatch:
    """One subset where two states' frames differ, with the gap sizes."""

    subset: PartySubset
    max_weight_diff: float
    max_distance_diff: float
    definedness_mismatch: bool


@dataclass(frozen=True)
class MotionComparison:
    """Verdict of a motion-equivalence check plus the per-subset diffs for
    every subset that violated the tolerance."""

    equivalent: bool
    tol: float
    mismatches: tuple[SubsetMismatch, ...]

    def __bool__(self) -> bool:
        return self.equivalent


def motion_equivalent(a: PureState, b: PureState, tol: float = DEFAULT_TOL) -> MotionComparison:
    """Compare two states' frames over every proper subset at ``tol``."""
    if (a.parties, a.local_dim) != (b.parties, b.local_dim):
        raise ValidationError(
            f"states have different shapes: (M,N)=({a.parties},{a.local_dim})"
            f" vs ({b.parties},{b.local_dim})"
        )
    mismatches = []
    for subset in canonical_subsets(a.parties):
        diff = frame_diff(build_frame(a, subset), build_frame(b, subset))
        if not diff.within(tol):
            mismatches.append(
                SubsetMismatch(
                    subset,
                    diff.max_weight_diff,
                    diff.max_distance_diff,
                    diff.definedness_mismatch,
                )
            )
    return MotionComparison(not mismatches, tol, tuple(mismatches))


def random_frame_preserving_lu(parties: int, local_dim: int, seed: int) -> LocalUnitary:
    """Local unitary guaranteed to be a motion for every subset: all factors
    diagonal with unit-modulus entries."""
    return random_diag_phase_lu(parties, local_dim, seed)


def random_complement_restricted_lu(
    parties: int, local_dim: int, subset: PartySubset, seed: int
) -> LocalUnitary:
    """Local unitary acting as the identity on ``subset`` and haar-randomly
    on every other party; it rigidly rotates that subset's frame."""
    validate_proper_subset(subset, parties)
    rng = np.random.default_rng(int(seed) & (2**64 - 1))
    inside = set(subset.indices)
    factors = []
    for p in range(1, parties + 1):
        if p in inside:
            factors.append(np.eye(local_dim, dtype=np.complex128))
        else:
            factors.append(random_haar_unitary(local_dim, int(rng.integers(2**63))))
    return LocalUnitary(tuple(factors))


@dataclass(frozen=True)
class AuditTrial:
    """Outcome of one audit trial."""

    trial: int
    equivalent: bool
    max_weight_diff: float
    max_distance_diff: float


@dataclass(frozen=True)
class AuditReport:
    """Per-trial outcomes of a local-unitary audit."""

    trials: int
    lu_kind: str
    subset: PartySubset | None
    records: tuple[AuditTrial, ...]
    equivalent_count: int

    @property
    def all_equivalent(self) -> bool:
        return self.equivalent_count == self.trials


def _comparison_diffs(mc: MotionComparison) -> tuple[float, float]:
    if not mc.mismatches:
        return 0.0, 0.0
    return (
        max(m.max_weight_diff for m in mc.mismatches),
        max(m.max_distance_diff for m in mc.mismatches),
    )


def audit_local_unitary(
    state: PureState,
    lu: LocalUnitary,
    tol: float = DEFAULT_TOL,
    subset: PartySubset | None = None,
    trial: int = 0,
) -> AuditTrial:
    """Apply one local unitary and test class membership.

    With ``subset`` given, only that subset's frame is compared (the
    complement-restricted invariance direction); otherwise the full
    motion-equivalence over all subsets is evaluated.
    """
    transformed = apply_local_unitary(state, lu)
    if subset is not None:
        diff: FrameDiff = frame_diff(
            build_frame(state, subset), build_frame(transformed, subset)
        )
        return AuditTrial(trial, diff.within(tol), diff.max_weight_diff, diff.max_distance_diff)
    mc = motion_equivalent(state, transformed, tol)
    wdiff, ddiff = _comparison_diffs(mc)
    return AuditTrial(trial, mc.equivalent, wdiff, ddiff)


def audit_theorem_lu(
    state: PureState,
    trials: int,
    lu_kind: str,
    seed: int,
    tol: float = DEFAULT_TOL,
    subset: PartySubset | None = None,
) -> AuditReport:
    """Run ``trials`` random local unitaries of ``lu_kind`` against a state
    and record, per trial, whether the result stays motion-equivalent.

    Kinds: ``haar`` (independent haar factor per party; outcomes are
    recorded, nothing is asserted), ``diag-phase`` (must always be
    equivalent), ``complement-restricted`` (identity on ``subset``, haar on
    the rest; that subset's frame must always be identical). Per-trial draws
    are deterministic functions of (seed, trial index).
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if lu_kind not in LU_KINDS:
        raise ValidationError(f"unknown lu_kind {lu_kind!r}; expected one of {LU_KINDS}")
    if lu_kind == "complement-restricted":
        if subset is None:
            raise ValidationError("complement-restricted audits need a subset")
        validate_proper_subset(subset, state.parties)
    else:
        subset = None
    master = np.random.default_rng(int(seed) & (2**64 - 1))
    trial_seeds = [int(s) for s in master.integers(2**63, size=trials)]
    records = []
    for t, trial_seed in enumerate(trial_seeds):
        if lu_kind == "haar":
            rng = np.random.default_rng(trial_seed)
            factors = tuple(
                random_haar_unitary(state.local_dim, int(rng.integers(2**63)))
                for _ in range(state.parties)
            )
            lu = LocalUnitary(factors)
        elif lu_kind == "diag-phase":
            lu = random_diag_phase_lu(state.parties, state.local_dim, trial_seed)
        else:
            lu = random_complement_restricted_lu(
                state.parties, state.local_dim, subset, trial_seed
            )
        records.append(audit_local_unitary(state, lu, tol, subset=subset, trial=t))
    count = sum(1 for r in records if r.equivalent)
    return AuditReport(trials, lu_kind, subset, tuple(records), count)
