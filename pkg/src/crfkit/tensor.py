"""Dense multi-party state tensors and the operations that move them around.

States are flat complex128 vectors of length N^M in row-major order over the
party indices (i_1, ..., i_M), i_1 slowest. Party labels are 1-based in every
public interface; flat indices and digit tuples are 0-based.

All functions are pure: they never mutate their inputs, and random generators
are deterministic functions of their seed.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import (
    DegenerateStateError,
    ResourceLimitError,
    ValidationError,
)

DEFAULT_MAX_AMPLITUDES = 2**20
MAX_AMPLITUDES_ENV = "CRFKIT_MAX_AMPLITUDES"

# Input states are accepted when their squared norm is within this of 1;
# anything the package computes itself is normalized far tighter.
NORM_ACCEPT_TOL = 1e-9
UNITARY_TOL = 1e-10
HERMITIAN_TOL = 1e-12


def _amplitude_cap() -> int:
    raw = os.environ.get(MAX_AMPLITUDES_ENV)
    if raw is None:
        return DEFAULT_MAX_AMPLITUDES
    try:
        return int(raw)
    except ValueError as exc:
        raise ValidationError(f"{MAX_AMPLITUDES_ENV} must be an integer, got {raw!r}") from exc


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized pure state of ``parties`` systems with local dimension ``local_dim``.

    ``amplitudes`` is the flat coefficient vector c_{i_1...i_M}, row-major with
    i_1 slowest. The squared amplitudes must sum to 1 within 1e-9.
    """

    parties: int
    local_dim: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.parties < 1:
            raise ValidationError(f"parties must be >= 1, got {self.parties}")
        if self.local_dim < 2:
            raise ValidationError(f"local_dim must be >= 2, got {self.local_dim}")
        size = self.local_dim**self.parties
        cap = _amplitude_cap()
        if size > cap:
            raise ResourceLimitError(
                f"dense state of {size} amplitudes exceeds the cap of {cap}"
                f" (override with {MAX_AMPLITUDES_ENV})"
            )
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != size:
            raise ValidationError(
                f"expected {size} amplitudes for (M={self.parties}, N={self.local_dim}),"
                f" got {amps.size}"
            )
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > NORM_ACCEPT_TOL:
            raise ValidationError(
                f"state is not normalized: sum |c|^2 = {norm_sq!r} deviates from 1"
                f" by more than {NORM_ACCEPT_TOL}"
            )
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def dim(self) -> int:
        return self.local_dim**self.parties

    @property
    def tensor(self) -> np.ndarray:
        """The amplitudes as an M-way view of shape (N, ..., N)."""
        return self.amplitudes.reshape((self.local_dim,) * self.parties)


@dataclass(frozen=True)
class PartySubset:
    """Non-empty set of party labels, strictly increasing, 1-based."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(idx) == 0:
            raise ValidationError("party subset must be non-empty")
        if any(i < 1 for i in idx):
            raise ValidationError(f"party labels are 1-based, got {idx}")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise ValidationError(f"party labels must be strictly increasing, got {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, *labels: int) -> "PartySubset":
        return cls(tuple(labels))

    @property
    def size(self) -> int:
        return len(self.indices)

    def complement(self, parties: int) -> "PartySubset":
        missing = tuple(p for p in range(1, parties + 1) if p not in set(self.indices))
        return PartySubset(missing)

    def __str__(self) -> str:
        return "{" + ",".join(str(i) for i in self.indices) + "}"


def validate_proper_subset(subset: PartySubset, parties: int) -> None:
    """Check ``subset`` is a proper, non-full subset of {1..parties}."""
    if subset.indices[-1] > parties:
        raise ValidationError(f"party label {subset.indices[-1]} exceeds M={parties}")
    if subset.size >= parties:
        raise ValidationError(
            f"subset {subset} is not proper for M={parties}: need 1 <= P <= M-1"
        )


@dataclass(frozen=True)
class Bipartition:
    """Two-block split of {1..M} into complementary ordered subsets."""

    left: PartySubset
    right: PartySubset

    def __post_init__(self):
        overlap = set(self.left.indices) & set(self.right.indices)
        if overlap:
            raise ValidationError(f"bipartition blocks overlap on parties {sorted(overlap)}")
        union = sorted(self.left.indices + self.right.indices)
        if union != list(range(1, len(union) + 1)):
            raise ValidationError(
                f"bipartition blocks must cover 1..M exactly, got {union}"
            )

    @classmethod
    def from_left(cls, left: PartySubset | Iterable[int], parties: int) -> "Bipartition":
        if not isinstance(left, PartySubset):
            left = PartySubset(tuple(left))
        validate_proper_subset(left, parties)
        return cls(left, left.complement(parties))

    @property
    def parties(self) -> int:
        return self.left.size + self.right.size

    def __str__(self) -> str:
        return f"{self.left}|{self.right}"


@dataclass(frozen=True, eq=False)
class LocalUnitary:
    """One N x N unitary factor per party, applied as u_1 (x) ... (x) u_M."""

    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        factors = []
        for k, u in enumerate(self.factors, start=1):
            u = np.asarray(u, dtype=np.complex128)
            if u.ndim != 2 or u.shape[0] != u.shape[1]:
                raise ValidationError(f"factor {k} is not a square matrix: shape {u.shape}")
            defect = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
            if defect > UNITARY_TOL:
                raise ValidationError(
                    f"factor {k} is not unitary: max |u^t u - I| = {defect:.3e}"
                )
            factors.append(_frozen(u))
        object.__setattr__(self, "factors", tuple(factors))

    @property
    def parties(self) -> int:
        return len(self.factors)


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Square complex matrix equal to its conjugate transpose within 1e-12."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"expected a square matrix, got shape {m.shape}")
        defect = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if defect > HERMITIAN_TOL:
            raise ValidationError(f"matrix is not Hermitian: max |A - A^t| = {defect:.3e}")
        object.__setattr__(self, "entries", _frozen(m))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


# ---------------------------------------------------------------------------
# Index arithmetic
# ---------------------------------------------------------------------------


def pack_index(digits: Sequence[int], local_dim: int, parties: int) -> int:
    """Flat row-major index of a digit tuple, first digit slowest-varying."""
    if len(digits) != parties:
        raise ValidationError(f"expected {parties} digits, got {len(digits)}")
    flat = 0
    for d in digits:
        d = int(d)
        if not 0 <= d < local_dim:
            raise ValidationError(f"digit {d} out of range 0..{local_dim - 1}")
        flat = flat * local_dim + d
    return flat


def unpack_index(flat: int, local_dim: int, parties: int) -> tuple[int, ...]:
    """Inverse of :func:`pack_index`."""
    flat = int(flat)
    if not 0 <= flat < local_dim**parties:
        raise ValidationError(f"flat index {flat} out of range for N^M = {local_dim**parties}")
    digits = []
    for _ in range(parties):
        flat, d = divmod(flat, local_dim)
        digits.append(d)
    return tuple(reversed(digits))


def inverse_permutation(order: Sequence[int]) -> tuple[int, ...]:
    """Inverse of a 1-based permutation given as a sequence."""
    inv = [0] * len(order)
    for pos, p in enumerate(order, start=1):
        inv[int(p) - 1] = pos
    return tuple(inv)


# ---------------------------------------------------------------------------
# Core operations
# ---------------------------------------------------------------------------


def normalize_state(amplitudes: Sequence[complex], parties: int, local_dim: int) -> PureState:
    """Scale a coefficient vector to unit norm and wrap it as a PureState."""
    amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    norm = float(np.linalg.norm(amps))
    if norm == 0.0:
        raise DegenerateStateError("cannot normalize the all-zero vector")
    return PureState(parties, local_dim, amps / norm)


def reorder_parties(state: PureState, order: Sequence[int]) -> PureState:
    """Reindex so that slot k of the output carries input party ``order[k]``.

    Applying the inverse permutation recovers the input amplitudes exactly;
    only data movement happens here.
    """
    order = tuple(int(p) for p in order)
    if sorted(order) != list(range(1, state.parties + 1)):
        raise ValidationError(f"{order} is not a permutation of 1..{state.parties}")
    axes = tuple(p - 1 for p in order)
    tensor = state.tensor.transpose(axes)
    return PureState(state.parties, state.local_dim, np.ascontiguousarray(tensor).reshape(-1))


def apply_local_unitary(state: PureState, lu: LocalUnitary) -> PureState:
    """Amplitudes of (u_1 (x) ... (x) u_M)|psi>, contracted one party at a time."""
    if lu.parties != state.parties:
        raise ValidationError(
            f"local unitary has {lu.parties} factors for a {state.parties}-party state"
        )
    n = state.local_dim
    for k, u in enumerate(lu.factors):
        if u.shape != (n, n):
            raise ValidationError(f"factor {k + 1} has shape {u.shape}, expected ({n}, {n})")
    tensor = state.tensor
    for k, u in enumerate(lu.factors):
        tensor = np.moveaxis(np.tensordot(u, tensor, axes=([1], [k])), 0, k)
    return PureState(state.parties, state.local_dim, tensor.reshape(-1))


def reshape_bipartite(state: PureState, bp: Bipartition) -> np.ndarray:
    """Coefficient matrix across a bipartition: rows over left multi-indices,
    columns over right multi-indices, both row-major with the first listed
    party slowest. Frobenius norm 1.
    """
    if bp.parties != state.parties:
        raise ValidationError(
            f"bipartition covers {bp.parties} parties, state has {state.parties}"
        )
    n = state.local_dim
    axes = tuple(p - 1 for p in bp.left.indices + bp.right.indices)
    tensor = state.tensor.transpose(axes)
    return np.ascontiguousarray(tensor).reshape(n**bp.left.size, n**bp.right.size)


def partial_trace(state: PureState, traced: PartySubset) -> HermitianMatrix:
    """Reduced density matrix after tracing out the parties in ``traced``.

    The result acts on the complement subsystem with parties in ascending
    label order: positive semidefinite, trace 1, dimension N^(M-P).
    """
    validate_proper_subset(traced, state.parties)
    mat = reshape_bipartite(state, Bipartition.from_left(traced, state.parties))
    rho = _kernels.partial_trace_mat(np.ascontiguousarray(mat))
    # zgemm leaves ~eps asymmetry; the Hermitian wrapper expects 1e-12.
    rho = 0.5 * (rho + rho.conj().T)
    return HermitianMatrix(rho)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed) & (2**64 - 1))


def random_haar_unitary(dim: int, seed: int) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix with the
    triangular factor's diagonal rotated to be real positive."""
    if dim < 2:
        raise ValidationError(f"unitary dimension must be >= 2, got {dim}")
    rng = _rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diag(r).copy()
    diag[diag == 0] = 1.0
    return q * (diag / np.abs(diag))


def random_pure_state(parties: int, local_dim: int, seed: int) -> PureState:
    """Haar-random pure state: normalized standard complex Gaussian vector."""
    rng = _rng(seed)
    dim = local_dim**parties
    if dim > _amplitude_cap():
        raise ResourceLimitError(
            f"dense state of {dim} amplitudes exceeds the cap of {_amplitude_cap()}"
        )
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return normalize_state(z, parties, local_dim)


def random_diag_phase_lu(parties: int, local_dim: int, seed: int) -> LocalUnitary:
    """Local unitary with every factor diagonal and unit-modulus."""
    rng = _rng(seed)
    factors = []
    for _ in range(parties):
        phases = np.exp(2j * np.pi * rng.random(local_dim))
        factors.append(np.diag(phases))
    return LocalUnitary(tuple(factors))


def _basis_vector(local_dim: int, level: int) -> np.ndarray:
    v = np.zeros(local_dim, dtype=np.complex128)
    v[level] = 1.0
    return v


def _plus_vector(local_dim: int) -> np.ndarray:
    return np.full(local_dim, 1.0 / math.sqrt(local_dim), dtype=np.complex128)


# Fixed generic coefficients for the three-qutrit middle-party-separable
# family c_{ijk} = a_j * b_{ik}.
_BAC_DEFAULT_A = np.array([1.0, -0.5 + 0.5j, 0.25j], dtype=np.complex128)
_BAC_DEFAULT_B = np.array(
    [
        [0.9, 0.1, 0.4j],
        [0.2, -0.7, 0.3],
        [0.5j, 0.6, -0.1],
    ],
    dtype=np.complex128,
)


def named_state(
    name: str,
    parties: int,
    local_dim: int,
    *,
    factors: Sequence[Sequence[complex]] | None = None,
    middle_coeffs: Sequence[complex] | None = None,
    outer_coeffs: Sequence[Sequence[complex]] | None = None,
) -> PureState:
    """Closed-form fixture states.

    Supported names:

    - ``ghz``: (|0...0> + |(N-1)...(N-1)>) / sqrt(2), any M >= 2, N >= 2.
    - ``w``: equal superposition of the M single-excitation basis states
      (N = 2 only).
    - ``product``: tensor product of single-party factors; defaults to
      |0>, |+>, |0>, |+>, ... when ``factors`` is omitted.
    - ``qutrit-bac-separable``: M = 3, N = 3 family with c_{ijk} = a_j b_{ik}
      (party 2 factors out); ``middle_coeffs`` supplies a (length 3),
      ``outer_coeffs`` supplies b (3 x 3), both defaulting to fixed generic
      complex values.
    """
    if parties < 2:
        raise ValidationError("named states need at least two parties")
    if name == "ghz":
        dim = local_dim**parties
        amps = np.zeros(dim, dtype=np.complex128)
        amps[0] = amps[-1] = 1.0 / math.sqrt(2)
        return PureState(parties, local_dim, amps)
    if name == "w":
        if local_dim != 2:
            raise ValidationError("the w state is defined for local_dim = 2")
        amps = np.zeros(2**parties, dtype=np.complex128)
        for k in range(1, parties + 1):
            amps[2 ** (parties - k)] = 1.0 / math.sqrt(parties)
        return PureState(parties, local_dim, amps)
    if name == "product":
        if factors is None:
            factors = [
                _basis_vector(local_dim, 0) if k % 2 == 0 else _plus_vector(local_dim)
                for k in range(parties)
            ]
        if len(factors) != parties:
            raise ValidationError(f"expected {parties} product factors, got {len(factors)}")
        mats = []
        for k, f in enumerate(factors, start=1):
            f = np.asarray(f, dtype=np.complex128).reshape(-1)
            if f.size != local_dim:
                raise ValidationError(f"factor {k} has length {f.size}, expected {local_dim}")
            norm = np.linalg.norm(f)
            if norm == 0:
                raise DegenerateStateError(f"factor {k} is the zero vector")
            mats.append(f / norm)
        return PureState(parties, local_dim, reduce(np.kron, mats))
    if name == "qutrit-bac-separable":
        if parties != 3 or local_dim != 3:
            raise ValidationError("qutrit-bac-separable requires M = 3, N = 3")
        a = np.asarray(_BAC_DEFAULT_A if middle_coeffs is None else middle_coeffs, np.complex128)
        b = np.asarray(_BAC_DEFAULT_B if outer_coeffs is None else outer_coeffs, np.complex128)
        if a.shape != (3,) or b.shape != (3, 3):
            raise ValidationError("middle_coeffs must have shape (3,), outer_coeffs (3, 3)")
        amps = np.einsum("j,ik->ijk", a, b).reshape(-1)
        return normalize_state(amps, 3, 3)
    raise ValidationError(f"unknown state name {name!r}")
