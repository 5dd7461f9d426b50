"""Dense complex linear algebra helpers.

Operators are 2-D ``complex128`` numpy arrays and kets are 1-D ``complex128``
arrays.  Everything here is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotSquare, NumericalFailure

NUMERIC_TOL = 1e-10
GROUP_TOL = 1e-8


def as_matrix(m) -> np.ndarray:
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionMismatch(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def as_ket(v) -> np.ndarray:
    a = np.array(v, dtype=complex)
    if a.ndim == 2 and 1 in a.shape:
        a = a.reshape(-1)
    if a.ndim != 1 or a.size < 1:
        raise DimensionMismatch(f"expected a non-empty vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("ket has non-finite amplitudes")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(m))


def max_abs(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def hermitian_asymmetry(m: np.ndarray) -> float:
    return max_abs(m - dagger(m))


def require_square(m: np.ndarray) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {m.shape}")


def basis_ket(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def normalize(v) -> np.ndarray:
    v = as_ket(v)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


def is_normalized(v, tol: float = NUMERIC_TOL) -> bool:
    return abs(np.linalg.norm(v) - 1.0) <= tol


def dyad(a, b=None) -> np.ndarray:
    """Return ``|a><b|``; with one argument the projector-style ``|a><a|``."""
    a = as_ket(a)
    b = a if b is None else as_ket(b)
    return np.outer(a, np.conj(b))


def ket_projector(v) -> np.ndarray:
    """Projector ``[v]`` onto the ray of ``v`` (``v`` need not be normalized)."""
    return dyad(normalize(v))


def tensor_product(*factors):
    """Kronecker product of kets or operators; the left factor varies slowest.

    Kets and operators may not be mixed.
    """
    if not factors:
        raise ValueError("tensor_product needs at least one factor")
    arrays = [np.asarray(f, dtype=complex) for f in factors]
    ndims = {a.ndim for a in arrays}
    if len(ndims) != 1 or ndims.pop() not in (1, 2):
        raise DimensionMismatch("tensor_product operands must be all kets or all matrices")
    return reduce(np.kron, arrays)


def commutator_norm(a, b) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    require_square(a)
    require_square(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"cannot commute {a.shape} with {b.shape}")
    return max_abs(a @ b - b @ a)


@dataclass(frozen=True)
class EigenGroup:
    value: float
    projector: np.ndarray
    multiplicity: int


@dataclass(frozen=True)
class EigenSystem:
    """Spectral decomposition with degenerate eigenvalues merged into one projector."""

    groups: tuple[EigenGroup, ...]

    @property
    def values(self) -> list[float]:
        return [g.value for g in self.groups]

    @property
    def projectors(self) -> list[np.ndarray]:
        return [g.projector for g in self.groups]

    def reconstruct(self) -> np.ndarray:
        return sum(g.value * g.projector for g in self.groups)

    def __len__(self) -> int:
        return len(self.groups)


def hermitian_eigendecomposition(
    m, group_tol: float = GROUP_TOL, numeric_tol: float = NUMERIC_TOL
) -> EigenSystem:
    m = np.asarray(m, dtype=complex)
    require_square(m)
    asym = hermitian_asymmetry(m)
    if asym > numeric_tol:
        raise NotHermitian(asym)
    h = (m + dagger(m)) / 2
    try:
        values, vectors = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver failed: {exc}") from exc

    # eigh returns ascending order; walk descending and cut wherever the gap exceeds group_tol
    order = np.argsort(values)[::-1]
    clusters: list[list[int]] = []
    for idx in order:
        if clusters and values[clusters[-1][0]] - values[idx] <= group_tol:
            clusters[-1].append(idx)
        else:
            clusters.append([idx])

    groups = []
    for cluster in clusters:
        vecs = vectors[:, cluster]
        groups.append(
            EigenGroup(
                value=float(np.mean(values[cluster])),
                projector=vecs @ dagger(vecs),
                multiplicity=len(cluster),
            )
        )
    return EigenSystem(tuple(groups))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_isometry(target_dim: int, source_dim: int, rng: np.random.Generator) -> np.ndarray:
    return random_unitary(target_dim, rng)[:, :source_dim]


def random_ket(dim: int, rng: np.random.Generator) -> np.ndarray:
    return normalize(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (z + dagger(z)) / 2


def random_pdi(dim: int, rng: np.random.Generator, parts: int | None = None) -> list[np.ndarray]:
    """Random PDI: a random orthonormal basis split into ``parts`` contiguous blocks."""
    u = random_unitary(dim, rng)
    parts = parts if parts is not None else int(rng.integers(1, dim + 1))
    cuts = sorted(rng.choice(np.arange(1, dim), size=parts - 1, replace=False)) if parts > 1 else []
    bounds = [0, *cuts, dim]
    return [u[:, lo:hi] @ dagger(u[:, lo:hi]) for lo, hi in zip(bounds[:-1], bounds[1:])]


def partial_inner(bra_factor: np.ndarray, v: np.ndarray, dims: Sequence[int], slot: int) -> np.ndarray:
    """Contract ``<bra_factor|`` against tensor slot ``slot`` of ``v`` (a ket on prod(dims))."""
    t = np.asarray(v).reshape(tuple(dims))
    t = np.tensordot(np.conj(bra_factor), t, axes=([0], [slot]))
    return t.reshape(-1)
