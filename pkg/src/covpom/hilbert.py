"""Core linear-algebra substrate: operators, states, effects and POMs.

Everything lives on a finite-dimensional Hilbert space.  Operators are dense
complex matrices; Hermiticity, positivity and unitarity are tolerance-gated
predicates rather than assumptions.  A ``Pom`` is a finite family of effects
labelled by disjoint outcome cells; ``check_pom_axioms`` verifies positivity
and normalisation with explicit witnesses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

__all__ = [
    "Operator",
    "State",
    "Effect",
    "Pom",
    "Outcome",
    "PointCell",
    "IntervalCell",
    "RectCell",
    "AxiomReport",
    "ProbVector",
    "make_state",
    "check_pom_axioms",
    "outcome_distribution",
    "effect_is_regular",
    "commutator_norm",
    "spectral_norm",
    "eigh_fixed",
]

# Tolerance for algebraically exact constructions (finite groups, closed-form
# integrals); grid-discretised objects use 1e-6 instead.
EXACT_TOL = 1e-10
GRID_TOL = 1e-6


def _as_complex_matrix(entries) -> np.ndarray:
    mat = np.asarray(entries, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    mat = mat.copy()
    mat.setflags(write=False)
    return mat


def spectral_norm(mat: np.ndarray) -> float:
    """Largest singular value of a dense matrix."""
    mat = np.asarray(mat, dtype=complex)
    if mat.size == 0:
        return 0.0
    herm_defect = np.linalg.norm(mat - mat.conj().T)
    if herm_defect < 1e-13 * max(1.0, np.linalg.norm(mat)):
        return float(np.max(np.abs(np.linalg.eigvalsh(mat))))
    return float(np.linalg.norm(mat, 2))


def eigh_fixed(mat: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition with a reproducible gauge.

    Eigenvalues ascend; each eigenvector is rephased so its
    largest-magnitude component is real and positive.
    """
    vals, vecs = np.linalg.eigh(np.asarray(mat, dtype=complex))
    for i in range(vecs.shape[1]):
        col = vecs[:, i]
        j = int(np.argmax(np.abs(col)))
        pivot = col[j]
        if abs(pivot) > 0:
            vecs[:, i] = col * (abs(pivot) / pivot)
    return vals, vecs


@dataclass(frozen=True)
class Operator:
    """Dense complex square matrix acting on a finite-dimensional space."""

    entries: np.ndarray

    def __init__(self, entries):
        object.__setattr__(self, "entries", _as_complex_matrix(entries))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def mat(self) -> np.ndarray:
        return self.entries

    def is_hermitian(self, tol: float = EXACT_TOL) -> bool:
        return bool(np.linalg.norm(self.entries - self.entries.conj().T, 2) <= tol)

    def is_positive(self, tol: float = EXACT_TOL) -> bool:
        if not self.is_hermitian(tol):
            return False
        return bool(np.linalg.eigvalsh(self.entries).min() >= -tol)

    def is_unitary(self, tol: float = EXACT_TOL) -> bool:
        eye = np.eye(self.dim)
        return bool(spectral_norm(self.entries.conj().T @ self.entries - eye) <= tol)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))


@dataclass(frozen=True)
class State:
    """Positive trace-one operator, optionally with spectral data.

    ``spectral`` is a tuple of ``(weight, vector)`` pairs with orthonormal
    vectors and weights summing to one; when present it must reproduce
    ``op`` as a convex combination of rank-one projectors.
    """

    op: Operator
    spectral: Optional[Tuple[Tuple[float, np.ndarray], ...]] = None

    @property
    def dim(self) -> int:
        return self.op.dim

    def validate(self, tol: float = EXACT_TOL) -> None:
        if not self.op.is_hermitian(tol):
            raise ValueError("state operator is not Hermitian")
        eigs = np.linalg.eigvalsh(self.op.mat)
        if eigs.min() < -tol:
            raise ValueError(f"state operator has negative eigenvalue {eigs.min():.3e}")
        tr = self.op.trace()
        if abs(tr - 1.0) > tol:
            raise ValueError(f"state trace {tr} is not 1")
        if self.spectral is not None:
            weights = np.array([w for w, _ in self.spectral])
            if abs(weights.sum() - 1.0) > tol:
                raise ValueError("spectral weights do not sum to 1")
            rebuilt = sum(w * np.outer(v, v.conj()) for w, v in self.spectral)
            if spectral_norm(rebuilt - self.op.mat) > tol:
                raise ValueError("spectral data does not reproduce the operator")


@dataclass(frozen=True)
class Effect:
    """Hermitian operator with spectrum in [0, 1] (within tolerance)."""

    op: Operator

    @property
    def dim(self) -> int:
        return self.op.dim

    def validate(self, tol: float = EXACT_TOL) -> None:
        if not self.op.is_hermitian(tol):
            raise ValueError("effect is not Hermitian")
        eigs = np.linalg.eigvalsh(self.op.mat)
        if eigs.min() < -tol or eigs.max() > 1.0 + tol:
            raise ValueError(
                f"effect spectrum [{eigs.min():.3e}, {eigs.max():.3e}] leaves [0, 1]"
            )


# --- outcome cells -------------------------------------------------------


@dataclass(frozen=True)
class PointCell:
    """Single group element (or coset representative) as an outcome cell."""

    value: Tuple[int, ...]


@dataclass(frozen=True)
class IntervalCell:
    """Half-open interval [lo, hi) on the line or the circle."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError(f"degenerate interval [{self.lo}, {self.hi})")


@dataclass(frozen=True)
class RectCell:
    """Phase-space rectangle [q_lo, q_hi) x [p_lo, p_hi)."""

    q_lo: float
    q_hi: float
    p_lo: float
    p_hi: float

    def __post_init__(self):
        if not (self.q_hi > self.q_lo and self.p_hi > self.p_lo):
            raise ValueError("degenerate phase-space rectangle")


Cell = Union[PointCell, IntervalCell, RectCell]


@dataclass(frozen=True)
class Outcome:
    label: str
    cell: Cell


@dataclass(frozen=True)
class Pom:
    """Finite indexed family of effects over a declared outcome partition."""

    space_tag: str
    outcomes: Tuple[Outcome, ...]
    effects: Tuple[Effect, ...]

    def __post_init__(self):
        if len(self.outcomes) != len(self.effects):
            raise ValueError("outcomes and effects must have the same length")
        if not self.effects:
            raise ValueError("empty POM")
        dims = {e.dim for e in self.effects}
        if len(dims) != 1:
            raise ValueError(f"effects have mixed dimensions {dims}")

    @property
    def dim(self) -> int:
        return self.effects[0].dim

    def effect_sum(self) -> np.ndarray:
        return sum(e.op.mat for e in self.effects)

    def labels(self) -> Tuple[str, ...]:
        return tuple(o.label for o in self.outcomes)


@dataclass(frozen=True)
class AxiomReport:
    passed: bool
    worst_negativity: float
    normalization_defect: float


@dataclass(frozen=True)
class ProbVector:
    """Outcome distribution with the raw trace values kept for auditing.

    ``probs`` is clamped to [0, 1] and renormalised; ``raw`` holds the
    unadjusted Re tr(T E_i) values.
    """

    probs: np.ndarray
    raw: np.ndarray
    negativity_defect: float
    normalization_defect: float

    def __len__(self) -> int:
        return len(self.probs)


# --- operations ----------------------------------------------------------


def make_state(spectral: Sequence[Tuple[float, Iterable[complex]]]) -> State:
    """Build a state from (weight, vector) pairs.

    Vectors are orthonormalised by modified Gram-Schmidt and weights are
    renormalised to sum to one.  Raises on zero total weight, dimension
    mismatch, or linearly dependent vectors.
    """
    if not spectral:
        raise ValueError("empty spectral data")
    weights = np.array([float(w) for w, _ in spectral])
    if np.any(weights < 0):
        raise ValueError("negative weight")
    total = weights.sum()
    if total <= 0:
        raise ValueError("zero total weight")
    weights = weights / total

    vectors = [np.asarray(v, dtype=complex) for _, v in spectral]
    dims = {v.shape for v in vectors}
    if len(dims) != 1 or vectors[0].ndim != 1:
        raise ValueError(f"vectors must share one dimension, got shapes {dims}")

    ortho: list[np.ndarray] = []
    for v in vectors:
        if np.linalg.norm(v) == 0:
            raise ValueError("zero vector in spectral data")
        w = v.copy()
        for u in ortho:
            w = w - np.vdot(u, w) * u
        norm = np.linalg.norm(w)
        if norm < 1e-12 * np.linalg.norm(v):
            raise ValueError("linearly dependent vectors in spectral data")
        ortho.append(w / norm)

    # positivity and unit trace hold by construction (convex combination of
    # orthonormal projectors); the full eigen-based validate stays available
    # but would cost O(dim^3) on large grids
    op = sum(w * np.outer(v, v.conj()) for w, v in zip(weights, ortho))
    if abs(np.trace(op).real - 1.0) > 1e-10:
        raise AssertionError("constructed state trace deviates from 1")
    return State(Operator(op), tuple((float(w), v) for w, v in zip(weights, ortho)))


def pure_state(vector: Iterable[complex]) -> State:
    """Rank-one state |v><v| / ||v||^2."""
    return make_state([(1.0, vector)])


def check_pom_axioms(pom: Pom, tol: float = EXACT_TOL) -> AxiomReport:
    """Verify positivity of every effect and normalisation of their sum.

    ``worst_negativity`` is the largest eigenvalue deficit below zero over
    all effects; ``normalization_defect`` is the spectral norm of
    (sum of effects - identity).
    """
    worst = 0.0
    for eff in pom.effects:
        mat = eff.op.mat
        herm = np.linalg.norm(mat - mat.conj().T, 2)
        eigs = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))
        worst = max(worst, -float(eigs.min()), float(herm))
    defect = spectral_norm(pom.effect_sum() - np.eye(pom.dim))
    return AxiomReport(
        passed=bool(worst <= tol and defect <= tol),
        worst_negativity=worst,
        normalization_defect=float(defect),
    )


def outcome_distribution(state: State, pom: Pom) -> ProbVector:
    """Probability of each outcome: Re tr(T E_i)."""
    if state.dim != pom.dim:
        raise ValueError(f"dimension mismatch: state {state.dim}, pom {pom.dim}")
    raw = np.array([np.trace(state.op.mat @ e.op.mat).real for e in pom.effects])
    negativity = float(max(0.0, -raw.min()))
    norm_defect = float(abs(raw.sum() - 1.0))
    clipped = np.clip(raw, 0.0, 1.0)
    total = clipped.sum()
    probs = clipped / total if total > 0 else clipped
    return ProbVector(probs, raw, negativity, norm_defect)


def effect_is_regular(effect: Effect, tol: float = EXACT_TOL) -> bool:
    """True iff the effect's spectrum extends both above and below 1/2."""
    eigs = np.linalg.eigvalsh(effect.op.mat)
    return bool(eigs.max() > 0.5 + tol and eigs.min() < 0.5 - tol)


def commutator_norm(a: Operator, b: Operator) -> float:
    """Spectral norm of the commutator ab - ba."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    comm = a.mat @ b.mat - b.mat @ a.mat
    return float(np.linalg.norm(comm, 2))
