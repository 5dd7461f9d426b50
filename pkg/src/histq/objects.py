"""Validated quantum structures.

Each ``validate_*`` function either returns the validated object or raises
:class:`~histq.errors.ValidationFailure` whose ``report`` names the first
violated identity.  The ``check_*`` twins return the report without raising.
Checks run in a fixed order so the reported violation is deterministic:
hermiticity, then idempotence (or positivity), then pairwise orthogonality,
then completeness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatch, NotHermitian, ShapeError, ValidationFailure
from .linalg import NUMERIC_TOL, EigenSystem, dagger, max_abs


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    condition: str | None = None
    magnitude: float = 0.0
    index: int | tuple[int, int] | None = None
    detail: str = ""

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        where = f" at {self.index}" if self.index is not None else ""
        msg = f"{self.condition} violated{where} (magnitude {self.magnitude:.3e})"
        return f"{msg}: {self.detail}" if self.detail else msg


_VALID = ValidationReport(ok=True)


def _fail(condition: str, magnitude: float, index=None, detail: str = "") -> ValidationReport:
    return ValidationReport(False, condition, float(magnitude), index, detail)


def _square_family(matrices: Sequence) -> list[np.ndarray]:
    if len(matrices) == 0:
        raise DimensionMismatch("expected at least one operator")
    mats = [linalg.as_matrix(m) for m in matrices]
    dim = mats[0].shape[0]
    for m in mats:
        if m.shape != (dim, dim):
            raise DimensionMismatch(f"operators must all be {dim}x{dim}, got {m.shape}")
    return mats


def _unique_labels(labels, n: int) -> tuple[str, ...]:
    labels = tuple(str(x) for x in labels) if labels is not None else tuple(str(k) for k in range(1, n + 1))
    if len(labels) != n:
        raise ValueError(f"{len(labels)} labels for {n} elements")
    if len(set(labels)) != n:
        raise ValueError(f"labels must be unique: {labels}")
    return labels


@dataclass(frozen=True)
class Projector:
    matrix: np.ndarray
    rank: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def check_projector(m, tol: float = NUMERIC_TOL) -> ValidationReport:
    m = linalg.as_matrix(m)
    linalg.require_square(m)
    asym = linalg.hermitian_asymmetry(m)
    if asym > tol:
        return _fail("hermiticity", asym)
    idem = max_abs(m @ m - m)
    if idem > tol:
        return _fail("idempotence", idem)
    return _VALID


def validate_projector(m, tol: float = NUMERIC_TOL) -> Projector:
    report = check_projector(m, tol)
    if not report.ok:
        raise ValidationFailure(report)
    m = linalg.as_matrix(m)
    trace = float(np.real(np.trace(m)))
    return Projector(m, int(round(trace)))


@dataclass(frozen=True)
class PDI:
    """Projective decomposition of the identity: orthogonal projectors summing to I."""

    labels: tuple[str, ...]
    projectors: tuple[Projector, ...]

    @property
    def dim(self) -> int:
        return self.projectors[0].dim

    @property
    def matrices(self) -> list[np.ndarray]:
        return [p.matrix for p in self.projectors]

    def __getitem__(self, label: str) -> np.ndarray:
        return self.projectors[self.labels.index(label)].matrix

    def __len__(self) -> int:
        return len(self.labels)

    def items(self):
        return zip(self.labels, self.matrices)


def check_pdi(projectors: Sequence, tol: float = NUMERIC_TOL) -> ValidationReport:
    mats = _square_family(projectors)
    for j, m in enumerate(mats):
        asym = linalg.hermitian_asymmetry(m)
        if asym > tol:
            return _fail("hermiticity", asym, j)
    for j, m in enumerate(mats):
        idem = max_abs(m @ m - m)
        if idem > tol:
            return _fail("idempotence", idem, j)
    for j in range(len(mats)):
        for k in range(j + 1, len(mats)):
            overlap = max_abs(mats[j] @ mats[k])
            if overlap > tol:
                return _fail("orthogonality", overlap, (j, k))
    deficit = max_abs(sum(mats) - np.eye(mats[0].shape[0]))
    if deficit > tol:
        return _fail("completeness", deficit)
    return _VALID


def validate_pdi(projectors: Sequence, labels: Sequence[str] | None = None, tol: float = NUMERIC_TOL) -> PDI:
    report = check_pdi(projectors, tol)
    if not report.ok:
        raise ValidationFailure(report)
    mats = _square_family(projectors)
    labels = _unique_labels(labels, len(mats))
    projs = tuple(Projector(m, int(round(float(np.real(np.trace(m)))))) for m in mats)
    return PDI(labels, projs)


@dataclass(frozen=True)
class POVM:
    labels: tuple[str, ...]
    elements: tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __getitem__(self, label: str) -> np.ndarray:
        return self.elements[self.labels.index(label)]

    def __len__(self) -> int:
        return len(self.labels)

    def items(self):
        return zip(self.labels, self.elements)


def check_povm(elements: Sequence, tol: float = NUMERIC_TOL) -> ValidationReport:
    mats = _square_family(elements)
    for k, m in enumerate(mats):
        asym = linalg.hermitian_asymmetry(m)
        if asym > tol:
            return _fail("hermiticity", asym, k)
    for k, m in enumerate(mats):
        lowest = float(np.min(np.linalg.eigvalsh((m + dagger(m)) / 2)))
        if lowest < -tol:
            return _fail("positivity", -lowest, k, f"min eigenvalue {lowest:.3e}")
    deficit = max_abs(sum(mats) - np.eye(mats[0].shape[0]))
    if deficit > tol:
        return _fail("completeness", deficit)
    return _VALID


def validate_povm(elements: Sequence, labels: Sequence[str] | None = None, tol: float = NUMERIC_TOL) -> POVM:
    report = check_povm(elements, tol)
    if not report.ok:
        raise ValidationFailure(report)
    mats = _square_family(elements)
    return POVM(_unique_labels(labels, len(mats)), tuple(mats))


@dataclass(frozen=True)
class Isometry:
    matrix: np.ndarray

    @property
    def source_dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def target_dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other):
        return self.matrix @ other


def check_isometry(matrix, tol: float = NUMERIC_TOL) -> ValidationReport:
    j = linalg.as_matrix(matrix)
    if j.shape[0] < j.shape[1]:
        raise ShapeError(f"isometry target dim {j.shape[0]} is smaller than source dim {j.shape[1]}")
    deficit = max_abs(dagger(j) @ j - np.eye(j.shape[1]))
    if deficit > tol:
        return _fail("isometry", deficit, detail="J^dagger J != I")
    return _VALID


def validate_isometry(matrix, tol: float = NUMERIC_TOL) -> Isometry:
    report = check_isometry(matrix, tol)
    if not report.ok:
        raise ValidationFailure(report)
    return Isometry(linalg.as_matrix(matrix))


@dataclass(frozen=True)
class Observable:
    matrix: np.ndarray
    spectral: EigenSystem = field(repr=False)

    @property
    def eigenvalues(self) -> list[float]:
        return self.spectral.values

    def pdi(self, labels: Sequence[str] | None = None) -> PDI:
        return validate_pdi(self.spectral.projectors, labels, tol=10 * NUMERIC_TOL)


def observable_from_matrix(m, group_tol: float = linalg.GROUP_TOL, tol: float = NUMERIC_TOL) -> Observable:
    m = linalg.as_matrix(m)
    linalg.require_square(m)
    asym = linalg.hermitian_asymmetry(m)
    if asym > tol:
        raise NotHermitian(asym)
    spectral = linalg.hermitian_eigendecomposition(m, group_tol=group_tol, numeric_tol=tol)
    return Observable(m, spectral)
