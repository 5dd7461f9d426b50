"""History families on a discrete time grid, chain kets, consistency and probabilities.

A family is described by its *slots*: one set of events per grid time after
``t_0``.  A :class:`PDISlot` is a projective decomposition of the identity at
that time; a :class:`LinkedSlot` binds a different decomposition to each
outcome of a later slot (the pointer-linked inference families).  Histories are
the outcome product set generated by the slots, so completeness of the family
reduces to every slot (and every bound decomposition) being a PDI.

Propagators between grid times only have to satisfy ``T^dagger T = I``; they
may be rectangular, which lets a measurement isometry ``J: H_s -> H_M`` act as
the last step of a grid directly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np

from . import linalg
from .errors import DimensionMismatch, InconsistentFamily, ZeroConditioningEvent
from .linalg import NUMERIC_TOL
from .objects import validate_isometry, validate_pdi

CONSISTENCY_TOL = 1e-8

Label = Union[str, tuple]


def render_label(label: Label) -> str:
    if isinstance(label, tuple):
        return "&".join(render_label(x) for x in label)
    return str(label)


def render_history(labels: Sequence[Label]) -> str:
    return ",".join(render_label(x) for x in labels)


# ---------------------------------------------------------------------------
# initial states


@dataclass(frozen=True)
class Ensemble:
    """Probability-weighted pure states standing in for a density operator."""

    weights: tuple[float, ...]
    states: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        if len(self.weights) != len(self.states) or not self.weights:
            raise ValueError("ensemble needs matching, non-empty weights and states")
        if any(w < -NUMERIC_TOL for w in self.weights):
            raise ValueError("ensemble weights must be non-negative")
        if abs(sum(self.weights) - 1.0) > NUMERIC_TOL:
            raise ValueError(f"ensemble weights sum to {sum(self.weights)}, not 1")
        dims = {len(s) for s in self.states}
        if len(dims) != 1:
            raise DimensionMismatch("ensemble states have different dimensions")
        for s in self.states:
            if not linalg.is_normalized(s):
                raise ValueError("ensemble states must be normalized")

    @property
    def dim(self) -> int:
        return len(self.states[0])

    def density_matrix(self) -> np.ndarray:
        return sum(w * linalg.dyad(s) for w, s in zip(self.weights, self.states))


def as_ensemble(initial) -> Ensemble:
    if isinstance(initial, Ensemble):
        return initial
    psi = linalg.as_ket(initial)
    if not linalg.is_normalized(psi):
        raise ValueError(f"initial state must be normalized (norm {np.linalg.norm(psi):.12g})")
    return Ensemble((1.0,), (psi,))


# ---------------------------------------------------------------------------
# grid and events


@dataclass(frozen=True)
class TimeGrid:
    times: tuple[str, ...]
    propagators: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        if len(self.times) < 2:
            raise ValueError("a time grid needs at least two times")
        if len(self.propagators) != len(self.times) - 1:
            raise ValueError(f"{len(self.times)} times need {len(self.times) - 1} propagators")
        if len(set(self.times)) != len(self.times):
            raise ValueError(f"time labels must be distinct: {self.times}")
        for a, b in zip(self.propagators, self.propagators[1:]):
            if b.shape[1] != a.shape[0]:
                raise DimensionMismatch(f"propagator chain breaks: {a.shape} followed by {b.shape}")

    @classmethod
    def build(cls, propagators: Sequence, times: Sequence[str] | None = None, tol: float = NUMERIC_TOL) -> "TimeGrid":
        props = tuple(validate_isometry(t, tol).matrix for t in propagators)
        if times is None:
            times = tuple(f"t{i}" for i in range(len(props) + 1))
        return cls(tuple(str(t) for t in times), props)

    @classmethod
    def identity(cls, dim: int, n: int = 1, times: Sequence[str] | None = None) -> "TimeGrid":
        return cls.build([np.eye(dim)] * n, times)

    @property
    def n(self) -> int:
        return len(self.propagators)

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.propagators[0].shape[1], *(t.shape[0] for t in self.propagators))

    def index(self, time: str) -> int:
        try:
            return self.times.index(time)
        except ValueError:
            raise KeyError(f"unknown time {time!r}; grid has {self.times}") from None


@dataclass(frozen=True)
class Event:
    """A projector event at one grid time.

    ``local`` acts on factor ``slot`` of a composite space with factor
    dimensions ``dims``; when ``dims`` is None it already acts on the full space.
    The promotion to the full space (tensoring with identities) happens in
    :meth:`full`.
    """

    label: Label
    local: np.ndarray = field(repr=False)
    dims: tuple[int, ...] | None = None
    slot: int = 0

    def full(self) -> np.ndarray:
        if self.dims is None:
            return self.local
        parts = [np.eye(d) for d in self.dims]
        parts[self.slot] = self.local
        return linalg.tensor_product(*parts)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims)) if self.dims is not None else self.local.shape[0]


def events_from(items: Mapping[Label, np.ndarray] | Iterable[tuple[Label, np.ndarray]]) -> tuple[Event, ...]:
    pairs = items.items() if isinstance(items, Mapping) else items
    return tuple(Event(label, linalg.as_matrix(m)) for label, m in pairs)


def product_events(*factors: Sequence[Event]) -> tuple[Event, ...]:
    """Events on a tensor product space from one event set per factor; labels become tuples."""
    out = []
    for combo in itertools.product(*factors):
        label = tuple(e.label for e in combo)
        out.append(Event(label, linalg.tensor_product(*[e.full() for e in combo])))
    return tuple(out)


@dataclass(frozen=True)
class PDISlot:
    events: tuple[Event, ...]

    @property
    def labels(self) -> tuple[Label, ...]:
        return tuple(e.label for e in self.events)


@dataclass(frozen=True)
class LinkedSlot:
    """Event sets chosen by the outcome of the later slot at grid time ``target``."""

    target: str
    bound: Mapping[Label, tuple[Event, ...]]


Slot = Union[PDISlot, LinkedSlot]


def _check_slot_pdi(events: Sequence[Event], dim: int, where: str, tol: float) -> None:
    for e in events:
        if e.dim != dim:
            raise DimensionMismatch(f"event {render_label(e.label)!r} at {where} acts on dim {e.dim}, grid has {dim}")
    labels = [e.label for e in events]
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate event labels at {where}: {labels}")
    validate_pdi([e.full() for e in events], labels=[render_label(x) for x in labels], tol=tol)


@dataclass(frozen=True)
class History:
    labels: tuple[Label, ...]
    events: tuple[Event, ...] = field(repr=False)

    @property
    def key(self) -> str:
        return render_history(self.labels)


@dataclass(frozen=True)
class HistoryFamily:
    """Histories ``[Psi_0] (.) F_1 (.) ... (.) F_n`` sharing one initial state.

    The zero-weight complement history ``(I - [Psi_0]) (.) I (.) ...`` is only
    recorded by ``include_complement``; it is never evaluated.
    """

    initial: Ensemble
    grid: TimeGrid
    slots: tuple[Slot, ...]
    include_complement: bool = True
    histories: tuple[History, ...] = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "histories", tuple(self._expand()))

    @classmethod
    def build(
        cls,
        initial,
        grid: TimeGrid,
        slots: Sequence[Slot | Sequence[Event] | Mapping],
        include_complement: bool = True,
        tol: float = NUMERIC_TOL,
    ) -> "HistoryFamily":
        initial = as_ensemble(initial)
        if initial.dim != grid.dims[0]:
            raise DimensionMismatch(f"initial state has dim {initial.dim}, grid starts in dim {grid.dims[0]}")
        normalized: list[Slot] = []
        for s in slots:
            if isinstance(s, (PDISlot, LinkedSlot)):
                normalized.append(s)
            elif isinstance(s, Mapping):
                normalized.append(PDISlot(events_from(s)))
            else:
                normalized.append(PDISlot(tuple(s)))
        if len(normalized) != grid.n:
            raise ValueError(f"grid has {grid.n} times after t0 but {len(normalized)} slots were given")
        for i, slot in enumerate(normalized, start=1):
            where = grid.times[i]
            dim = grid.dims[i]
            if isinstance(slot, PDISlot):
                _check_slot_pdi(slot.events, dim, where, tol)
                continue
            target = grid.index(slot.target)
            if target <= i:
                raise ValueError(f"linked slot at {where} must bind to a later time, got {slot.target}")
            target_slot = normalized[target - 1]
            if not isinstance(target_slot, PDISlot):
                raise ValueError(f"linked slot at {where} must bind to a plain slot")
            if set(slot.bound) != set(target_slot.labels):
                raise ValueError(
                    f"linked slot at {where} binds {sorted(map(render_label, slot.bound))}, "
                    f"but {slot.target} has outcomes {sorted(map(render_label, target_slot.labels))}"
                )
            for key, events in slot.bound.items():
                _check_slot_pdi(events, dim, f"{where} (linked to {render_label(key)})", tol)
        return cls(initial, grid, tuple(normalized), include_complement)

    def _expand(self) -> Iterable[History]:
        plain = [i for i, s in enumerate(self.slots) if isinstance(s, PDISlot)]
        linked = [i for i, s in enumerate(self.slots) if isinstance(s, LinkedSlot)]
        for combo in itertools.product(*(self.slots[i].events for i in plain)):
            chosen: dict[int, Event] = dict(zip(plain, combo))
            options = []
            for i in linked:
                slot = self.slots[i]
                target_label = chosen[self.grid.index(slot.target) - 1].label
                options.append(slot.bound[target_label])
            for extra in itertools.product(*options):
                full = dict(chosen)
                full.update(zip(linked, extra))
                events = tuple(full[i] for i in range(len(self.slots)))
                yield History(tuple(e.label for e in events), events)

    @property
    def times(self) -> tuple[str, ...]:
        return self.grid.times

    def __len__(self) -> int:
        return len(self.histories)


# ---------------------------------------------------------------------------
# chain kets and consistency


def chain_ket(family: HistoryFamily, history: History, state=None) -> np.ndarray:
    """``F_n T(t_n,t_{n-1}) ... F_1 T(t_1,t_0) |Psi_0>`` for one history.

    ``state`` defaults to the family's initial state (the first ensemble member).
    """
    v = linalg.as_ket(family.initial.states[0] if state is None else state)
    for t, event in zip(family.grid.propagators, history.events):
        full = event.full()
        if t.shape[1] != v.shape[0] or full.shape[0] != t.shape[0]:
            raise DimensionMismatch(f"event {render_label(event.label)!r} does not fit the grid")
        v = full @ (t @ v)
    return v


@dataclass(frozen=True)
class ChainKetTable:
    labels: tuple[tuple[Label, ...], ...]
    weights: tuple[float, ...]
    kets: np.ndarray = field(repr=False)  # (members, histories, final_dim)

    @property
    def gram(self) -> np.ndarray:
        """Weighted Gram matrix ``G[a, b] = sum_m w_m <Y_m^a|Y_m^b>``."""
        g = np.zeros((len(self.labels),) * 2, dtype=complex)
        for w, kets in zip(self.weights, self.kets):
            g += w * (np.conj(kets) @ kets.T)
        return g


def chain_kets(family: HistoryFamily) -> ChainKetTable:
    members = []
    for psi in family.initial.states:
        members.append([chain_ket(family, h, psi) for h in family.histories])
    kets = np.array(members, dtype=complex)
    return ChainKetTable(tuple(h.labels for h in family.histories), family.initial.weights, kets)


@dataclass(frozen=True)
class ConsistencyReport:
    labels: tuple[tuple[Label, ...], ...]
    gram: np.ndarray = field(repr=False)
    max_off_diagonal: float
    max_diagonal: float
    verdict: str  # "consistent" | "trivially consistent" | "inconsistent"
    worst_pair: tuple[str, str] | None
    tol: float

    @property
    def consistent(self) -> bool:
        return self.verdict != "inconsistent"


def check_consistency(family: HistoryFamily, tol: float = CONSISTENCY_TOL) -> ConsistencyReport:
    table = chain_kets(family)
    gram = table.gram
    n = len(table.labels)
    diag = np.real(np.diag(gram))
    max_diag = float(np.max(diag)) if n else 0.0
    off = np.abs(gram - np.diag(np.diag(gram)))
    worst = None
    max_off = 0.0
    if n > 1:
        a, b = np.unravel_index(int(np.argmax(off)), off.shape)
        max_off = float(off[a, b])
        if max_off > 0:
            a, b = sorted((int(a), int(b)))
            worst = (render_history(table.labels[a]), render_history(table.labels[b]))
    if max_diag <= tol:
        verdict = "trivially consistent"
    elif max_off <= tol * max_diag:
        verdict = "consistent"
    else:
        verdict = "inconsistent"
    return ConsistencyReport(table.labels, gram, max_off, max_diag, verdict, worst, tol)


# ---------------------------------------------------------------------------
# probabilities

Matcher = Union[str, tuple, frozenset, set, list, Callable[[Label], bool]]
Pattern = Mapping[str, Matcher]


def _match_one(label: Label, matcher: Matcher) -> bool:
    if callable(matcher):
        return bool(matcher(label))
    if isinstance(matcher, (set, frozenset, list)):
        return any(_match_one(label, m) for m in matcher)
    if matcher == "*":
        return True
    if isinstance(matcher, tuple):
        if not isinstance(label, tuple) or len(label) != len(matcher):
            return False
        return all(_match_one(part, m) for part, m in zip(label, matcher))
    return label == matcher


@dataclass(frozen=True)
class ProbabilityTable:
    """Extended-Born-rule probabilities keyed by per-time label tuples."""

    times: tuple[str, ...]
    entries: dict[tuple[Label, ...], float]
    normative: bool = True

    def __post_init__(self):
        total = sum(self.entries.values())
        if total > 1 + 10 * NUMERIC_TOL * max(1, len(self.entries)):
            raise ValueError(f"probabilities sum to {total} > 1")

    def _matches(self, key: tuple[Label, ...], pattern: Pattern) -> bool:
        for time, matcher in pattern.items():
            if time not in self.times:
                raise KeyError(f"unknown time {time!r}; table has {self.times}")
            if not _match_one(key[self.times.index(time)], matcher):
                return False
        return True

    def probability(self, pattern: Pattern) -> float:
        return float(sum(p for key, p in self.entries.items() if self._matches(key, pattern)))

    def conditional(self, target: Pattern, given: Pattern, tol: float = NUMERIC_TOL) -> float:
        denom = self.probability(given)
        if denom <= tol:
            raise ZeroConditioningEvent(f"conditioning event has probability {denom:.3e}")
        both = {**given}
        for time, matcher in target.items():
            if time in both:
                prev = both[time]
                both[time] = lambda lab, a=prev, b=matcher: _match_one(lab, a) and _match_one(lab, b)
            else:
                both[time] = matcher
        return min(1.0, max(0.0, self.probability(both) / denom))

    def marginalize(self, keep: Sequence[str]) -> "ProbabilityTable":
        for t in keep:
            if t not in self.times:
                raise KeyError(f"unknown time {t!r}; table has {self.times}")
        idx = [self.times.index(t) for t in self.times if t in keep]
        out: dict[tuple[Label, ...], float] = {}
        for key, p in self.entries.items():
            sub = tuple(key[i] for i in idx)
            out[sub] = out.get(sub, 0.0) + p
        return ProbabilityTable(tuple(self.times[i] for i in idx), out, self.normative)

    def total(self) -> float:
        return float(sum(self.entries.values()))

    def rows(self) -> list[tuple[str, float]]:
        return [(render_history(k), p) for k, p in self.entries.items()]

    def __getitem__(self, key) -> float:
        if not isinstance(key, tuple):
            key = (key,)
        return self.entries[key]


def assign_probabilities(
    family: HistoryFamily, tol: float = CONSISTENCY_TOL, force: bool = False
) -> ProbabilityTable:
    """Probabilities ``<Y|Y>`` for a consistent family.

    With ``force=True`` an inconsistent family still gets a table, marked
    ``normative=False``; such numbers are diagnostics only.
    """
    report = check_consistency(family, tol)
    if not report.consistent and not force:
        raise InconsistentFamily(report)
    diag = np.real(np.diag(report.gram))
    entries = {labels: float(min(1.0, max(0.0, p))) for labels, p in zip(report.labels, diag)}
    return ProbabilityTable(family.times[1:], entries, normative=report.consistent)


def pure_probability(psi: np.ndarray, op: np.ndarray) -> float:
    return float(np.real(np.vdot(psi, op @ psi)))


def expectation(initial, op: np.ndarray) -> float:
    """``<psi|op|psi>`` or ``Tr(rho op)`` for an ensemble."""
    ens = as_ensemble(initial)
    return float(sum(w * pure_probability(s, op) for w, s in zip(ens.weights, ens.states)))

