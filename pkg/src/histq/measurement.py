"""Measurement models built from isometries and pointer projectors.

A model is an isometry ``J: H_s -> H_M`` plus a set of orthogonal pointer
projectors ``M^k`` on ``H_M``.  Whatever the pointers leave uncovered is the
remainder ``M^0 = I - sum_k M^k`` ("the apparatus broke"), carried under the
label ``remainder_label``.  The backwards map ``Q^k = J^dagger M^k J`` turns
pointer projectors into POVM elements on ``H_s``; the spectral projectors of
each ``Q^k`` are the candidate prior properties revealed by outcome ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .errors import (
    ClosureViolation,
    CoarseGrainMismatch,
    DimensionMismatch,
    InconsistentFamily,
    NonOrthonormalBasis,
    PointerMismatch,
    ProbabilityDeficit,
    UnknownOutcome,
)
from .histories import (
    CONSISTENCY_TOL,
    ConsistencyReport,
    Event,
    HistoryFamily,
    LinkedSlot,
    PDISlot,
    ProbabilityTable,
    TimeGrid,
    as_ensemble,
    assign_probabilities,
    check_consistency,
    expectation,
)
from .linalg import NUMERIC_TOL, dagger, max_abs
from .objects import PDI, POVM, Isometry, validate_isometry, validate_pdi, validate_povm

REMAINDER = "0"


@dataclass(frozen=True)
class MeasurementModel:
    J: Isometry
    labels: tuple[str, ...]
    pointers: tuple[np.ndarray, ...] = field(repr=False)
    remainder_label: str = REMAINDER
    # set when H_M = H_s (x) H_m with explicit pointer states on H_m (Kraus, preparation)
    split: tuple[int, int] | None = None
    pointer_states: tuple[np.ndarray, ...] | None = field(default=None, repr=False)
    # property each outcome is designed to reveal (calibration contract); projective models only
    designated: Mapping[str, np.ndarray] | None = field(default=None, repr=False)
    ready_state: np.ndarray | None = field(default=None, repr=False)

    @property
    def system_dim(self) -> int:
        return self.J.source_dim

    @property
    def measurement_dim(self) -> int:
        return self.J.target_dim

    @property
    def remainder(self) -> np.ndarray:
        return np.eye(self.measurement_dim) - sum(self.pointers)

    @property
    def outcomes(self) -> tuple[str, ...]:
        """Pointer labels followed by the remainder label."""
        return (*self.labels, self.remainder_label)

    def pointer(self, k: str) -> np.ndarray:
        if k == self.remainder_label:
            return self.remainder
        try:
            return self.pointers[self.labels.index(k)]
        except ValueError:
            raise UnknownOutcome(f"unknown outcome {k!r}; model has {self.outcomes}") from None

    def pointer_pdi(self, include_empty_remainder: bool = False) -> PDI:
        mats = list(self.pointers)
        labels = list(self.labels)
        rem = self.remainder
        if include_empty_remainder or np.real(np.trace(rem)) > 0.5:
            mats.append(rem)
            labels.append(self.remainder_label)
        return validate_pdi(mats, labels, tol=10 * NUMERIC_TOL)


def make_model(
    J,
    pointers: Mapping[str, np.ndarray] | Sequence[tuple[str, np.ndarray]],
    remainder_label: str = REMAINDER,
    tol: float = NUMERIC_TOL,
    **extra,
) -> MeasurementModel:
    """Validate ``J`` and the pointer projectors and bundle them into a model."""
    iso = J if isinstance(J, Isometry) else validate_isometry(J, tol)
    items = list(pointers.items()) if isinstance(pointers, Mapping) else list(pointers)
    if not items:
        raise ValueError("a measurement model needs at least one pointer outcome")
    labels = tuple(str(k) for k, _ in items)
    if remainder_label in labels:
        raise ValueError(f"pointer label {remainder_label!r} is reserved for the remainder")
    mats = [linalg.as_matrix(m) for _, m in items]
    for m in mats:
        if m.shape != (iso.target_dim, iso.target_dim):
            raise DimensionMismatch(f"pointer projector {m.shape} does not act on H_M of dim {iso.target_dim}")
    remainder = np.eye(iso.target_dim) - sum(mats)
    # M^0 must itself be a projector, i.e. {M^k} + M^0 is a PDI
    validate_pdi([*mats, remainder], [*labels, remainder_label], tol)
    return MeasurementModel(iso, labels, tuple(mats), remainder_label, **extra)


def _orthonormal(vectors: Sequence[np.ndarray], what: str, tol: float) -> None:
    v = np.array(vectors, dtype=complex)
    gram = np.conj(v) @ v.T
    dev = max_abs(gram - np.eye(len(vectors)))
    if dev > tol:
        raise NonOrthonormalBasis(f"{what} are not orthonormal (max |<a|b> - delta| = {dev:.3e})")


def projective_model(
    basis_images: Sequence[tuple[np.ndarray, np.ndarray]],
    pointers: PDI | Sequence[np.ndarray],
    labels: Sequence[str] | None = None,
    tol: float = NUMERIC_TOL,
) -> MeasurementModel:
    """Model with ``J|s^j> = |Phi^j>`` and ``M^k|Phi^j> = delta_jk |Phi^j>``.

    ``pointers[j]`` is the pointer projector paired with ``basis_images[j]``.
    """
    if isinstance(pointers, PDI):
        labels = pointers.labels if labels is None else labels
        pointers = pointers.matrices
    pointers = [linalg.as_matrix(m) for m in pointers]
    if len(pointers) != len(basis_images):
        raise ValueError(f"{len(basis_images)} basis states but {len(pointers)} pointer projectors")
    labels = tuple(labels) if labels is not None else tuple(str(j) for j in range(1, len(pointers) + 1))
    s = [linalg.as_ket(a) for a, _ in basis_images]
    phi = [linalg.as_ket(b) for _, b in basis_images]
    if len(s) != len(s[0]):
        raise NonOrthonormalBasis(f"{len(s)} states cannot form a basis of a {len(s[0])}-dimensional space")
    _orthonormal(s, "system basis states", tol)
    _orthonormal(phi, "pointer states", tol)
    for j, state in enumerate(phi):
        for k, m in enumerate(pointers):
            if m.shape[0] != state.shape[0]:
                raise DimensionMismatch(f"pointer projector {labels[k]!r} does not act on the pointer states")
            expected = state if j == k else np.zeros_like(state)
            dev = max_abs(m @ state - expected)
            if dev > tol:
                raise PointerMismatch(j, labels[k], dev)
    J = sum(np.outer(b, np.conj(a)) for a, b in zip(s, phi))
    designated = {lab: linalg.dyad(a) for lab, a in zip(labels, s)}
    return make_model(J, list(zip(labels, pointers)), tol=tol, designated=designated)


def model_from_unitary(
    T, ready_state, system_dim: int, pointers, tol: float = NUMERIC_TOL, **extra
) -> MeasurementModel:
    """``J|psi> = T (|psi> (x) |Omega_0>)`` for a unitary ``T`` on ``H_s (x) H_m``."""
    T = linalg.as_matrix(T)
    omega = linalg.as_ket(ready_state)
    embed = linalg.tensor_product(np.eye(system_dim), omega.reshape(-1, 1))
    if T.shape[1] != embed.shape[0]:
        raise DimensionMismatch(f"unitary of shape {T.shape} does not act on H_s (x) H_m of dim {embed.shape[0]}")
    return make_model(T @ embed, pointers, tol=tol, ready_state=omega, **extra)


def backwards_map(model: MeasurementModel, k: str) -> np.ndarray:
    """``Q^k = J^dagger M^k J``."""
    J = model.J.matrix
    return dagger(J) @ model.pointer(k) @ J


def derive_povm(model: MeasurementModel, tol: float = NUMERIC_TOL) -> POVM:
    labels = model.outcomes
    return validate_povm([backwards_map(model, k) for k in labels], labels, tol=10 * tol)


# ---------------------------------------------------------------------------
# inference families


@dataclass(frozen=True)
class InferenceResult:
    outcome: str
    povm_element: np.ndarray = field(repr=False)
    eigenvalues: tuple[float, ...]
    inference_pdi: PDI = field(repr=False)
    probability: float
    # conditional probability of each spectral projector given this outcome; None if unreachable
    prior_distribution: dict[str, float] | None
    support: np.ndarray = field(repr=False)
    certain: bool  # exactly one spectral projector carries non-zero weight in Q^k

    @property
    def reachable(self) -> bool:
        return self.prior_distribution is not None

    def most_likely(self) -> str | None:
        if not self.prior_distribution:
            return None
        return max(self.prior_distribution, key=self.prior_distribution.get)


@dataclass(frozen=True)
class InferenceAnalysis:
    family: HistoryFamily = field(repr=False)
    consistency: ConsistencyReport = field(repr=False)
    table: ProbabilityTable
    results: tuple[InferenceResult, ...]

    def __getitem__(self, outcome: str) -> InferenceResult:
        for r in self.results:
            if r.outcome == outcome:
                return r
        raise UnknownOutcome(f"unknown outcome {outcome!r}")

    @property
    def marginals(self) -> dict[str, float]:
        return {r.outcome: r.probability for r in self.results}


def spectral_labels(n: int) -> list[str]:
    return [f"xi{j}" for j in range(1, n + 1)]


def inference_family(
    model: MeasurementModel,
    initial,
    tol: float = NUMERIC_TOL,
    consistency_tol: float = CONSISTENCY_TOL,
    group_tol: float = linalg.GROUP_TOL,
) -> InferenceAnalysis:
    """Histories ``[Psi_0] (.) xi^{jk} (.) M^k`` on the grid ``(t0, t1, t2)``.

    The first interval is taken as instantaneous (identity propagator), the
    second is ``J``.  For each outcome ``k`` the events at ``t1`` are the
    spectral projectors of ``Q^k``, labelled ``xi1, xi2, ...`` by descending
    eigenvalue.
    """
    initial = as_ensemble(initial)
    if initial.dim != model.system_dim:
        raise DimensionMismatch(f"initial state has dim {initial.dim}, model system dim is {model.system_dim}")
    final = model.pointer_pdi()
    grid = TimeGrid.build([np.eye(model.system_dim), model.J.matrix], ("t0", "t1", "t2"))

    spectra = {}
    bound = {}
    for k in final.labels:
        q = backwards_map(model, k)
        spec = linalg.hermitian_eigendecomposition(q, group_tol=group_tol, numeric_tol=10 * tol)
        spectra[k] = (q, spec)
        bound[k] = tuple(Event(lab, p) for lab, p in zip(spectral_labels(len(spec)), spec.projectors))
    family = HistoryFamily.build(
        initial, grid, [LinkedSlot("t2", bound), PDISlot(tuple(Event(k, m) for k, m in final.items()))], tol=10 * tol
    )
    report = check_consistency(family, consistency_tol)
    if not report.consistent:
        raise InconsistentFamily(report)
    table = assign_probabilities(family, consistency_tol)

    results = []
    for k in model.outcomes:
        if k in spectra:
            q, spec = spectra[k]
        else:  # empty remainder: Q^0 = 0, a single group spanning H_s
            q = backwards_map(model, k)
            spec = linalg.hermitian_eigendecomposition(q, group_tol=group_tol, numeric_tol=10 * tol)
        labels = spectral_labels(len(spec))
        pdi = validate_pdi(spec.projectors, labels, tol=10 * tol)
        if k in spectra:
            prob = table.probability({"t2": k})
        else:
            prob = expectation(initial, q)
        prior = None
        if prob > tol:
            prior = {lab: table.conditional({"t1": lab}, {"t2": k}, tol) for lab in labels}
        nonzero = [g for g in spec.groups if g.value > group_tol]
        support = sum((g.projector for g in nonzero), np.zeros_like(q))
        results.append(
            InferenceResult(
                outcome=k,
                povm_element=q,
                eigenvalues=tuple(spec.values),
                inference_pdi=pdi,
                probability=prob,
                prior_distribution=prior,
                support=support,
                certain=len(nonzero) == 1,
            )
        )
    return InferenceAnalysis(family, report, table, tuple(results))


# ---------------------------------------------------------------------------
# Kraus, nondestructive and preparation models


@dataclass(frozen=True)
class KrausSet:
    labels: tuple[str, ...]
    operators: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[1]


def kraus_set(operators: Sequence, labels: Sequence[str] | None = None, tol: float = NUMERIC_TOL) -> KrausSet:
    ops = [linalg.as_matrix(k) for k in operators]
    dim = ops[0].shape[1]
    for k in ops:
        if k.shape != (dim, dim):
            raise DimensionMismatch(f"Kraus operators must all be {dim}x{dim}")
    deficit = max_abs(sum(dagger(k) @ k for k in ops) - np.eye(dim))
    if deficit > tol:
        raise ClosureViolation(deficit)
    labels = tuple(labels) if labels is not None else tuple(str(j) for j in range(1, len(ops) + 1))
    if len(labels) != len(ops) or len(set(labels)) != len(labels):
        raise ValueError("Kraus labels must be unique, one per operator")
    return KrausSet(labels, tuple(ops))


def _pointer_states(pointer_states, n: int, tol: float) -> list[np.ndarray]:
    if pointer_states is None:
        return [linalg.basis_ket(n, j) for j in range(n)]
    states = [linalg.as_ket(p) for p in pointer_states]
    if len(states) != n:
        raise ValueError(f"{n} outcomes need {n} pointer states, got {len(states)}")
    if len({len(s) for s in states}) != 1:
        raise DimensionMismatch("pointer states have different dimensions")
    _orthonormal(states, "pointer states", tol)
    return states


def kraus_model(
    kraus: KrausSet | Sequence,
    pointer_states: Sequence | None = None,
    labels: Sequence[str] | None = None,
    tol: float = NUMERIC_TOL,
) -> MeasurementModel:
    """``J|psi> = sum_j K^j|psi> (x) |Phi^j>`` on ``H_s (x) H_m``; pointers ``I (x) [Phi^j]``."""
    ks = kraus if isinstance(kraus, KrausSet) else kraus_set(kraus, labels, tol)
    states = _pointer_states(pointer_states, len(ks.operators), tol)
    s_dim, m_dim = ks.dim, len(states[0])
    J = sum(linalg.tensor_product(k, phi.reshape(-1, 1)) for k, phi in zip(ks.operators, states))
    pointers = [(lab, linalg.tensor_product(np.eye(s_dim), linalg.dyad(phi))) for lab, phi in zip(ks.labels, states)]
    return make_model(J, pointers, tol=tol, split=(s_dim, m_dim), pointer_states=tuple(states))


def luders_model(pdi: PDI, pointer_states: Sequence | None = None, tol: float = NUMERIC_TOL) -> MeasurementModel:
    model = kraus_model(pdi.matrices, pointer_states, pdi.labels, tol)
    return replace(model, designated=dict(pdi.items()))


def post_measurement_state(model: MeasurementModel, psi, k: str) -> tuple[float, np.ndarray | None]:
    """Probability of outcome ``k`` and the normalized particle state left behind.

    Needs a model whose measurement space is ``H_s (x) H_m`` with pointer states.
    """
    if model.split is None or model.pointer_states is None:
        raise ValueError("post-measurement states need a model with explicit pointer states")
    if k not in model.labels:
        raise UnknownOutcome(f"unknown outcome {k!r}; model has {model.labels}")
    phi = model.pointer_states[model.labels.index(k)]
    out = model.J.matrix @ linalg.as_ket(psi)
    v = linalg.partial_inner(phi, out, model.split, 1)
    prob = float(np.real(np.vdot(v, v)))
    if prob <= NUMERIC_TOL:
        return prob, None
    return prob, v / np.sqrt(prob)


def preparation_model(
    targets: Sequence[tuple[float, np.ndarray]],
    pointer_states: Sequence | None = None,
    labels: Sequence[str] | None = None,
    tol: float = NUMERIC_TOL,
) -> MeasurementModel:
    """``J|psi_1> = sum_k sqrt(p_k) |s_k> (x) |Phi^k>`` for a fixed input ``|psi_1>``.

    The input space is the one-dimensional span of ``|psi_1>``.  Targets must be
    normalized but need not be orthogonal.
    """
    probs = [float(p) for p, _ in targets]
    if any(p < -tol for p in probs):
        raise ProbabilityDeficit(f"negative preparation probability in {probs}")
    if abs(sum(probs) - 1.0) > tol:
        raise ProbabilityDeficit(f"preparation probabilities sum to {sum(probs):.12g}, not 1")
    states = [linalg.as_ket(s) for _, s in targets]
    if len({len(s) for s in states}) != 1:
        raise DimensionMismatch("target states have different dimensions")
    for s in states:
        if not linalg.is_normalized(s, tol):
            raise ValueError("preparation targets must be normalized")
    phis = _pointer_states(pointer_states, len(states), tol)
    column = sum(np.sqrt(max(p, 0.0)) * linalg.tensor_product(s, phi) for p, s, phi in zip(probs, states, phis))
    labels = tuple(labels) if labels is not None else tuple(str(k) for k in range(1, len(states) + 1))
    s_dim, m_dim = len(states[0]), len(phis[0])
    pointers = [(lab, linalg.tensor_product(np.eye(s_dim), linalg.dyad(phi))) for lab, phi in zip(labels, phis)]
    return make_model(column.reshape(-1, 1), pointers, tol=tol, split=(s_dim, m_dim), pointer_states=tuple(phis))


def prepared_state(model: MeasurementModel, k: str) -> tuple[float, np.ndarray | None]:
    """Occurrence probability of outcome ``k`` and the particle state it certifies."""
    if model.system_dim != 1:
        raise ValueError("prepared_state expects a preparation model (one-dimensional input)")
    return post_measurement_state(model, [1.0], k)


# ---------------------------------------------------------------------------
# noncontextuality


@dataclass(frozen=True)
class ProbeComparison:
    distribution_beta: dict[str, float]
    distribution_gamma: dict[str, float]
    max_difference: float


@dataclass(frozen=True)
class NoncontextualityReport:
    groups: tuple[str, ...]
    rows: tuple[ProbeComparison, ...]
    tol: float

    @property
    def max_difference(self) -> float:
        return max((r.max_difference for r in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_difference <= self.tol


def _group_distribution(model, groups, psi) -> dict[str, float]:
    return {
        name: float(sum(expectation(psi, backwards_map(model, k)) for k in members))
        for name, members in groups.items()
    }


def _check_partition(model: MeasurementModel, groups: Mapping[str, Sequence[str]], which: str) -> None:
    seen: list[str] = []
    for members in groups.values():
        seen.extend(members)
    if len(seen) != len(set(seen)):
        raise CoarseGrainMismatch(f"an outcome appears in more than one group for {which}")
    if set(seen) != set(model.labels):
        missing = sorted(set(model.labels) - set(seen))
        extra = sorted(set(seen) - set(model.labels))
        raise CoarseGrainMismatch(f"groups do not partition the outcomes of {which}: missing {missing}, unknown {extra}")


def noncontextuality_check(
    model_beta: MeasurementModel,
    model_gamma: MeasurementModel,
    groups: Mapping[str, Sequence[str]] | tuple[Mapping, Mapping],
    probes: Sequence,
    tol: float = 10 * NUMERIC_TOL,
) -> NoncontextualityReport:
    """Compare the coarse-grained outcome distribution under two apparatus settings.

    ``groups`` maps a label (an eigenvalue of the co-measured observable) to the
    pointer outcomes that report it; pass a pair of mappings when the two
    settings use different outcome labels.
    """
    if model_beta.system_dim != model_gamma.system_dim:
        raise DimensionMismatch("both settings must measure the same system space")
    g_beta, g_gamma = groups if isinstance(groups, tuple) else (groups, groups)
    if list(g_beta) != list(g_gamma):
        raise CoarseGrainMismatch("both settings must use the same group names")
    _check_partition(model_beta, g_beta, "setting beta")
    _check_partition(model_gamma, g_gamma, "setting gamma")
    rows = []
    for psi in probes:
        psi = linalg.normalize(psi)
        db = _group_distribution(model_beta, g_beta, psi)
        dg = _group_distribution(model_gamma, g_gamma, psi)
        rows.append(ProbeComparison(db, dg, max(abs(db[g] - dg[g]) for g in db)))
    return NoncontextualityReport(tuple(g_beta), tuple(rows), tol)


# ---------------------------------------------------------------------------
# EPR-Bohm


def epr_model(measured_axis: str = "z") -> MeasurementModel:
    """Spin measurement on particle ``a`` of a pair; ``J = J_a (x) I_b``.

    ``H_s = H_a (x) H_b``; the measurement space is the two-outcome pointer space
    of ``a`` tensored with ``H_b``.  Outcomes are labelled ``+`` and ``-``.
    """
    from .catalog import spin_half

    kets = spin_half()
    if measured_axis not in ("z", "x"):
        raise ValueError(f"measured_axis must be 'z' or 'x', got {measured_axis!r}")
    up, down = (kets["z+"], kets["z-"]) if measured_axis == "z" else (kets["x+"], kets["x-"])
    a_plus, a_minus = linalg.basis_ket(2, 0), linalg.basis_ket(2, 1)
    J_a = np.outer(a_plus, np.conj(up)) + np.outer(a_minus, np.conj(down))
    J = linalg.tensor_product(J_a, np.eye(2))
    pointers = [
        ("+", linalg.tensor_product(linalg.dyad(a_plus), np.eye(2))),
        ("-", linalg.tensor_product(linalg.dyad(a_minus), np.eye(2))),
    ]
    designated = {
        "+": linalg.tensor_product(linalg.dyad(up), np.eye(2)),
        "-": linalg.tensor_product(linalg.dyad(down), np.eye(2)),
    }
    return make_model(J, pointers, designated=designated)
