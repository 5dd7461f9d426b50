import numpy as np
import pytest

from histq import catalog, linalg
from histq.errors import DimensionMismatch, InconsistentFamily, ValidationFailure, ZeroConditioningEvent
from histq.histories import (
    Ensemble,
    Event,
    HistoryFamily,
    LinkedSlot,
    PDISlot,
    TimeGrid,
    assign_probabilities,
    check_consistency,
)
from histq.measurement import epr_model

import oracles as o


def spin_family(initial, slots):
    return catalog.measurement_family(catalog.spin_model("z"), initial, slots)


def test_ordered_family_consistent():
    k = catalog.spin_half()
    fam = spin_family(k["x+"], [catalog.spin_slot("x"), catalog.spin_slot("z")])
    report = check_consistency(fam)
    assert report.verdict == "consistent"
    table = assign_probabilities(fam)
    assert table.total() == pytest.approx(1.0)
    assert table.probability({"t1": "x+"}) == pytest.approx(1.0)
    assert table.conditional({"t2": "z+"}, {"t3": "+"}) == pytest.approx(1.0)


def test_swapped_family_matches_brute_force_gram():
    k = catalog.spin_half()
    fam = spin_family(k["x+"], [catalog.spin_slot("z"), catalog.spin_slot("x")])
    report = check_consistency(fam)
    labels, gram = o.swapped_family_gram()
    assert report.verdict == "inconsistent"
    assert report.max_off_diagonal == pytest.approx(o.SWAPPED_MAX_OFF_DIAGONAL, abs=1e-12)
    assert report.worst_pair == o.SWAPPED_WORST_PAIR
    order = [",".join(x) for x in report.labels]
    reordered = np.array([[gram[labels.index(a)][labels.index(b)] for b in order] for a in order])
    assert np.max(np.abs(report.gram - reordered)) < 1e-12
    with pytest.raises(InconsistentFamily):
        assign_probabilities(fam)
    forced = assign_probabilities(fam, force=True)
    assert not forced.normative


def test_trivially_consistent():
    grid = TimeGrid.identity(2, 1)
    fam = HistoryFamily.build([1, 0], grid, [{"a": np.eye(2)}])
    assert check_consistency(fam).verdict == "consistent"
    report = check_consistency(fam, tol=2.0)
    assert report.verdict == "trivially consistent"


def test_slot_must_be_pdi():
    k = catalog.spin_half()
    grid = TimeGrid.identity(2, 1)
    with pytest.raises(ValidationFailure):
        HistoryFamily.build(k["z+"], grid, [{"a": linalg.dyad(k["z+"]), "b": linalg.dyad(k["x+"])}])


def test_initial_dimension_checked():
    with pytest.raises(DimensionMismatch):
        HistoryFamily.build([1, 0, 0], TimeGrid.identity(2, 1), [{"a": np.eye(2)}])


def test_zero_conditioning():
    k = catalog.spin_half()
    fam = spin_family(k["z+"], [catalog.spin_slot("z")])
    table = assign_probabilities(fam)
    with pytest.raises(ZeroConditioningEvent):
        table.conditional({"t1": "z+"}, {"t2": "-"})


def test_ensemble_initial_state():
    k = catalog.spin_half()
    mix = Ensemble((0.5, 0.5), (k["z+"], k["z-"]))
    fam = spin_family(mix, [catalog.spin_slot("z")])
    table = assign_probabilities(fam)
    assert table.probability({"t2": "+"}) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        Ensemble((0.5, 0.6), (k["z+"], k["z-"]))


def test_marginalize_and_matchers():
    fam = spin_family(catalog.spin_state(0.6, 0.8j), [catalog.spin_slot("z")])
    table = assign_probabilities(fam)
    m = table.marginalize(["t2"])
    assert m["+"] == pytest.approx(0.36)
    assert table.probability({"t1": {"z+", "z-"}}) == pytest.approx(1.0)
    assert table.probability({"t1": lambda lab: lab.endswith("-")}) == pytest.approx(0.64)
    with pytest.raises(KeyError):
        table.probability({"t9": "*"})


def test_linked_slot_binds_later_time():
    k = catalog.spin_half()
    model = catalog.spin_model("z")
    z = catalog.spin_slot("z").events
    x = catalog.spin_slot("x").events
    grid = TimeGrid.build([np.eye(2), model.J.matrix])
    slots = [LinkedSlot("t2", {"+": z, "-": x}), catalog.pointer_slot(model)]
    fam = HistoryFamily.build(k["x+"], grid, slots)
    assert len(fam) == 4
    with pytest.raises(ValueError):
        HistoryFamily.build(k["x+"], grid, [LinkedSlot("t2", {"+": z}), catalog.pointer_slot(model)])


def test_product_labels_on_pair():
    fam = catalog.measurement_family(epr_model("z"), catalog.singlet(), [catalog.pair_slot("z")])
    table = assign_probabilities(fam)
    assert table.probability({"t1": ("z+", "z-")}) == pytest.approx(0.5)
    assert table.probability({"t1": ("z+", "z+")}) == pytest.approx(0.0, abs=1e-12)
    assert table.probability({"t1": ("z+", "*")}) == pytest.approx(0.5)


def test_event_on_factor():
    e = Event("a", np.diag([1.0, 0.0]), dims=(2, 3), slot=0)
    assert e.full().shape == (6, 6)
    assert e.dim == 6


@pytest.mark.parametrize("seed", range(200))
def test_two_time_families_consistent(seed):
    rng = np.random.default_rng(1000 + seed)
    dim = int(rng.integers(2, 6))
    psi = linalg.random_ket(dim, rng)
    pdi = linalg.random_pdi(dim, rng)
    fam = HistoryFamily.build(psi, TimeGrid.build([linalg.random_unitary(dim, rng)]), [PDISlot(tuple(Event(str(j), p) for j, p in enumerate(pdi)))])
    assert check_consistency(fam).consistent
    assert assign_probabilities(fam).total() == pytest.approx(1.0, abs=1e-9)
