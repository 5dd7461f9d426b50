"""The frozen reference constants agree with the pure-Python oracles that produced them."""

import math

import pytest

import oracles as o


def test_commutator():
    assert o.commutator_bc() == pytest.approx(o.COMMUTATOR_BC, abs=1e-15)


def test_spin_overlap():
    assert o.overlap_sq(o.ZP, o.XP) == pytest.approx(o.ZP_XP_OVERLAP_SQ, abs=1e-15)


def test_diag_isometry_deficit():
    assert o.isometry_deficit([[1, 0], [0, 0.5]]) == pytest.approx(o.DIAG_ISOMETRY_DEFICIT, abs=1e-15)


def test_trine_overlap():
    u = o.trine()
    for j in range(3):
        for k in range(3):
            expected = 1.0 if j == k else o.TRINE_OVERLAP_ABS
            assert abs(o.inner(u[j], u[k])) == pytest.approx(expected, abs=1e-15)


def test_swapped_gram():
    labels, gram = o.swapped_family_gram()
    assert o.max_off_diagonal(gram) == pytest.approx(o.SWAPPED_MAX_OFF_DIAGONAL, abs=1e-15)
    a, b = (labels.index(x) for x in o.SWAPPED_WORST_PAIR)
    assert abs(gram[a][b]) == pytest.approx(o.SWAPPED_MAX_OFF_DIAGONAL, abs=1e-15)


def test_uniform_probe():
    assert o.born([1 / math.sqrt(3)] * 3, [1, 0, 0]) == pytest.approx(o.PROBE_UNIFORM_PLUS, abs=1e-15)


def test_trine_preparation_norm():
    assert o.trine_preparation_norm([1 / 3] * 3) == pytest.approx(o.TRINE_PREP_NORM, abs=1e-15)


def test_c_spectrum_eigenpairs():
    for value, vec in o.c_spectrum():
        image = o.matvec(o.C, vec)
        assert all(abs(x - value * y) < 1e-15 for x, y in zip(image, vec))


def test_weak_povm_sums_to_identity():
    s = math.sqrt(0.5)
    total = [[sum(m[i][j] for m in o.weak_povm(0.1, s, s, -s, s).values()) for j in range(2)] for i in range(2)]
    assert o.max_entry(o.sub(total, o.identity(2))) < 1e-15
