"""Built-in scenarios and the values each one is expected to produce."""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from typing import Any

import numpy as np

from .. import catalog
from ..errors import HistqError
from ..histories import CONSISTENCY_TOL
from ..linalg import NUMERIC_TOL, dyad
from ..dsl import ResultSet, parse_scenario, run_scenario

EXPECT_TOL = 1e-9


class UnknownExample(HistqError, KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"unknown example {self.name!r}; choose one of: {', '.join(EXAMPLES)}"


@dataclass(frozen=True)
class Expect:
    qid: str
    path: tuple
    value: Any
    tol: float = EXPECT_TOL


@dataclass(frozen=True)
class Check:
    expect: Expect
    actual: Any
    ok: bool

    def describe(self) -> str:
        where = "/".join(str(p) for p in (self.expect.qid, *self.expect.path))
        if self.ok:
            return f"{where}: ok"
        return f"{where}: expected {_show(self.expect.value)}, got {_show(self.actual)}"


@dataclass(frozen=True)
class Example:
    name: str
    summary: str
    expectations: tuple[Expect, ...]

    @property
    def filename(self) -> str:
        return f"{self.name}.hqs"

    def source(self) -> str:
        return resources.files(__package__).joinpath(self.filename).read_text(encoding="utf-8")


def _show(v) -> str:
    if isinstance(v, np.ndarray):
        return np.array2string(v, precision=6)
    return repr(v)


def _matrix(payload) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in payload])


def _povm_expect(qid: str, elements: dict[str, np.ndarray]) -> tuple[Expect, ...]:
    return tuple(Expect(qid, ("elements", k), np.asarray(m, dtype=complex)) for k, m in elements.items())


def _trine_elements() -> dict[str, np.ndarray]:
    return {str(k + 1): (2 / 3) * dyad(u) for k, u in enumerate(catalog.trine_kets())}


def _weak_elements() -> dict[str, np.ndarray]:
    s = math.sqrt(0.5)
    return catalog.weak_povm_closed_form(0.1, s, s, -s, s)


def _cond(qid: str, value: float) -> Expect:
    return Expect(qid, ("value",), value)


EXAMPLES: dict[str, Example] = {
    e.name: e
    for e in [
        Example(
            "spin-z",
            "S_z measurement reveals S_z just before it (alpha = 0.6, beta = 0.8i)",
            (
                Expect("consistent", ("verdict",), "consistent"),
                Expect("joint", ("table", "z+,+"), 0.36),
                Expect("joint", ("table", "z+,-"), 0.0),
                Expect("joint", ("table", "z-,+"), 0.0),
                Expect("joint", ("table", "z-,-"), 0.64),
                Expect("outcomes", ("table", "+"), 0.36),
                Expect("outcomes", ("table", "-"), 0.64),
                _cond("up_given_plus", 1.0),
                _cond("down_given_minus", 1.0),
            ),
        ),
        Example(
            "spin-x-prep",
            "x+ preparation, S_z measurement; S_x then S_z is consistent, the swap is not",
            (
                Expect("prep_consistent", ("verdict",), "consistent"),
                Expect("prep_joint", ("table", "x+,+"), 0.5),
                Expect("prep_joint", ("table", "x+,-"), 0.5),
                Expect("prep_joint", ("table", "x-,+"), 0.0),
                Expect("prep_joint", ("table", "x-,-"), 0.0),
                _cond("xp_given_plus", 1.0),
                _cond("xp_given_minus", 1.0),
                _cond("xm_given_plus", 0.0),
                _cond("xm_given_minus", 0.0),
                Expect("ordered_consistent", ("verdict",), "consistent"),
                Expect("ordered_t1", ("table", "x+"), 1.0),
                _cond("zp_given_plus", 1.0),
                _cond("zm_given_minus", 1.0),
                Expect("swapped_consistent", ("verdict",), "inconsistent"),
                Expect("swapped_consistent", ("max_off_diagonal",), 0.125),
            ),
        ),
        Example(
            "mz-open",
            "interferometer without the second beamsplitter: detectors reveal the arm",
            (
                Expect("arms_consistent", ("verdict",), "consistent"),
                _cond("upper_given_dplus", 1.0),
                _cond("lower_given_dminus", 1.0),
                Expect("refined_consistent", ("verdict",), "consistent"),
                _cond("refined_upper", 1.0),
            ),
        ),
        Example(
            "mz-closed",
            "interferometer with the second beamsplitter: detectors reveal the phase",
            (
                Expect("phase_consistent", ("verdict",), "consistent"),
                _cond("xp_given_dplus", 1.0),
                _cond("xm_given_dminus", 1.0),
                Expect("arms_consistent", ("verdict",), "inconsistent"),
            ),
        ),
        Example(
            "trine",
            "trine POVM from a three-dimensional toy apparatus",
            (
                *_povm_expect("povm", _trine_elements()),
                Expect("povm", ("elements", "0"), np.zeros((2, 2), dtype=complex)),
                Expect("from_u1", ("outcomes", "1", "probability"), 2 / 3),
                # Tr([u1] (2/3)[u2]) = (2/3) |<u1|u2>|^2 = (2/3)(1/4)
                Expect("from_u1", ("outcomes", "2", "probability"), 1 / 6),
                Expect("from_u1", ("outcomes", "3", "probability"), 1 / 6),
                Expect("from_u1", ("outcomes", "2", "certain"), True),
                Expect("from_xm", ("outcomes", "1", "probability"), 0.0),
                Expect("from_xm", ("outcomes", "2", "probability"), 0.5),
                Expect("from_xm", ("outcomes", "3", "probability"), 0.5),
                Expect("linked_consistent", ("verdict",), "consistent"),
                _cond("u_given_2", 1.0),
            ),
        ),
        Example(
            "weak",
            "weak probe coupling (eps = 0.1) followed by strong readouts",
            (
                *_povm_expect("povm", _weak_elements()),
                Expect("povm", ("elements", "0"), np.zeros((2, 2), dtype=complex)),
                Expect("from_psi0", ("outcomes", "E1", "probability"), 0.1 * 0.5 * 0.36),
                Expect("from_psi0", ("outcomes", "F2", "probability"), 0.1 * 0.5 * 0.64),
            ),
        ),
        Example(
            "contextuality",
            "switch apparatus: the A distribution is the same with B or with C",
            (
                Expect("noncontextual", ("passed",), True),
                Expect("noncontextual", ("max_difference",), 0.0),
                Expect("noncontextual", ("rows", 2, "first", "+1"), 0.36),
                Expect("noncontextual", ("rows", 2, "second", "+1"), 0.36),
            ),
        ),
        Example(
            "epr-z",
            "singlet, S_z of a measured, S_z properties of a and b before",
            (
                Expect("consistent", ("verdict",), "consistent"),
                Expect("outcomes", ("table", "+"), 0.5),
                Expect("outcomes", ("table", "-"), 0.5),
                _cond("a_given_plus", 1.0),
                _cond("b_given_plus", 1.0),
                _cond("a_given_minus", 1.0),
                _cond("b_given_minus", 1.0),
            ),
        ),
        Example(
            "epr-x",
            "singlet, S_z of a measured, S_x properties of a and b before",
            (
                Expect("consistent", ("verdict",), "consistent"),
                Expect("outcomes", ("table", "+"), 0.5),
                Expect("outcomes", ("table", "-"), 0.5),
                _cond("pm_given_plus", 0.5),
                _cond("pm_given_minus", 0.5),
                _cond("mp_given_plus", 0.5),
                _cond("mp_given_minus", 0.5),
            ),
        ),
    ]
}


def get_example(name: str) -> Example:
    try:
        return EXAMPLES[name]
    except KeyError:
        raise UnknownExample(name) from None


def run_example(
    name: str, consistency_tol: float = CONSISTENCY_TOL, numeric_tol: float = NUMERIC_TOL
) -> ResultSet:
    ex = get_example(name)
    scenario = parse_scenario(ex.source(), origin=f"<example {name}>", tol=numeric_tol)
    return run_scenario(scenario, consistency_tol, numeric_tol)


def _lookup(results: ResultSet, e: Expect):
    try:
        r = results[e.qid]
    except KeyError:
        return None
    if not r.ok:
        return r.error
    value = r.payload
    for key in e.path:
        try:
            value = value[key]
        except (KeyError, IndexError, TypeError):
            return None
    return value


def _matches(expected, actual, tol: float) -> bool:
    if actual is None:
        return False
    if isinstance(expected, np.ndarray):
        try:
            got = _matrix(actual)
        except (TypeError, ValueError):
            return False
        return got.shape == expected.shape and bool(np.max(np.abs(got - expected), initial=0.0) <= tol)
    if isinstance(expected, (bool, str)):
        return actual == expected
    if isinstance(actual, bool) or not isinstance(actual, (int, float)):
        return False
    return abs(actual - expected) <= tol


def check_example(name: str, results: ResultSet) -> list[Check]:
    checks = []
    for e in get_example(name).expectations:
        actual = _lookup(results, e)
        if isinstance(e.value, np.ndarray) and actual is not None and not isinstance(actual, str):
            shown = _matrix(actual)
        else:
            shown = actual
        checks.append(Check(e, shown, _matches(e.value, actual, e.tol)))
    return checks
