"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (printed in the terminal summary) before
asserting, so every criterion reports even when an earlier one fails.
"""

import math
import random

import numpy as np

from histq import catalog, linalg
from histq.dsl import ParseError, ScenarioError, format_program, parse_program, parse_scenario
from histq.errors import HistqError
from histq.histories import (
    Event,
    HistoryFamily,
    PDISlot,
    TimeGrid,
    assign_probabilities,
    check_consistency,
)
from histq.measurement import (
    backwards_map,
    derive_povm,
    epr_model,
    inference_family,
    kraus_model,
    make_model,
    noncontextuality_check,
)
from histq.objects import check_povm
from histq.scenarios import EXAMPLES

import oracles as o
from fuzz import mutate, within_bounds

# pinned tolerances
TOL = 1e-9
PROB_FLOOR = 1e-6
GRAM_FLOOR = 0.1
SQRT_HALF = math.sqrt(0.5)


def close(a, b, tol=TOL) -> bool:
    return abs(a - b) <= tol


def entrywise(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def spin_family(initial, *axes):
    return catalog.measurement_family(catalog.spin_model("z"), initial, [catalog.spin_slot(a) for a in axes])


def test_criterion_01_projective_inference(record):
    checks = []
    for seed in range(20):
        psi = linalg.random_ket(2, np.random.default_rng(seed))
        table = assign_probabilities(spin_family(psi, "z"))
        for k, outcome in (("z+", "+"), ("z-", "-")):
            if table.probability({"t2": outcome}) <= PROB_FLOOR:
                continue
            for j in ("z+", "z-"):
                got = table.conditional({"t1": j}, {"t2": outcome})
                want = 1.0 if j == k else 0.0
                checks.append((f"seed {seed} Pr({j}|{outcome})", close(got, want), f"{got!r} != {want}"))
    assert record(1, "projective inference, 20 random states", checks)


def test_criterion_02_spin_half_tables(record):
    checks = []
    for n in range(10):
        theta = n * (math.pi / 2) / 9
        alpha, beta = math.cos(theta), 1j * math.sin(theta) * np.exp(0.3j * n)
        table = assign_probabilities(spin_family(np.array([alpha, beta]), "z"))
        a2, b2 = abs(alpha) ** 2, abs(beta) ** 2
        want = {("z+", "+"): a2, ("z+", "-"): 0.0, ("z-", "+"): 0.0, ("z-", "-"): b2}
        for key, value in want.items():
            checks.append((f"grid {n} Pr{key}", close(table[key], value), f"{table[key]!r} != {value}"))
        if a2 > PROB_FLOOR:
            got = table.conditional({"t1": "z+"}, {"t2": "+"})
            checks.append((f"grid {n} Pr(z+|+)", close(got, 1.0), repr(got)))
        if b2 > PROB_FLOOR:
            got = table.conditional({"t1": "z-"}, {"t2": "-"})
            checks.append((f"grid {n} Pr(z-|-)", close(got, 1.0), repr(got)))
        checks.append((f"grid {n} Pr(+)", close(table.probability({"t2": "+"}), a2), ""))

    xp = catalog.spin_half()["x+"]
    table = assign_probabilities(spin_family(xp, "x"))
    want = {("x+", "+"): 0.5, ("x+", "-"): 0.5, ("x-", "+"): 0.0, ("x-", "-"): 0.0}
    for key, value in want.items():
        checks.append((f"x+ prep Pr{key}", close(table[key], value), f"{table[key]!r} != {value}"))
    for j, value in (("x+", 1.0), ("x-", 0.0)):
        for outcome in "+-":
            got = table.conditional({"t1": j}, {"t2": outcome})
            checks.append((f"x+ prep Pr({j}|{outcome})", close(got, value), repr(got)))
    assert record(2, "spin-half joint and conditional tables", checks)


def test_criterion_03_intermediate_ordering(record):
    xp = catalog.spin_half()["x+"]
    ordered = check_consistency(spin_family(xp, "x", "z"))
    swapped = check_consistency(spin_family(xp, "z", "x"))
    checks = [
        ("ordered family consistent", ordered.consistent, ordered.verdict),
        ("swapped family inconsistent", not swapped.consistent, swapped.verdict),
        (f"swapped max off-diagonal > {GRAM_FLOOR}", swapped.max_off_diagonal > GRAM_FLOOR, repr(swapped.max_off_diagonal)),
        (
            "swapped max off-diagonal equals brute-force Gram",
            close(swapped.max_off_diagonal, o.SWAPPED_MAX_OFF_DIAGONAL),
            repr(swapped.max_off_diagonal),
        ),
    ]
    assert record(3, "intermediate-time ordering", checks)


def test_criterion_04_mach_zehnder(record):
    k = catalog.spin_half()
    a = k["z+"]
    b = k["z-"]
    entering = (a + b) * SQRT_HALF  # first beamsplitter output
    checks = []
    for closed, axis, arm in ((False, "z", "z+"), (True, "x", "x+")):
        model = catalog.mach_zehnder(closed)
        table = assign_probabilities(catalog.measurement_family(model, entering, [catalog.spin_slot(axis)]))
        got = table.conditional({"t1": arm}, {"t2": "D+"})
        name = "closed" if closed else "open"
        checks.append((f"{name} Pr({arm}|D+)", close(got, 1.0), repr(got)))
    assert record(4, "Mach-Zehnder open and closed", checks)


def test_criterion_05_trine(record):
    model = catalog.trine_model()
    povm = derive_povm(model)
    checks = []
    for k, expected in enumerate(o.trine_povm(), start=1):
        dev = entrywise(povm[str(k)], expected)
        checks.append((f"POVM element {k}", dev <= TOL, f"max deviation {dev:.3e}"))
    u1 = catalog.trine_kets()[0]
    xm = catalog.spin_half()["x-"]
    for name, state, want in (("[u1]", u1, (2 / 3, 1 / 3, 1 / 3)), ("[x-]", xm, (0.0, 0.5, 0.5))):
        marg = inference_family(model, state).marginals
        got = tuple(marg[str(k)] for k in (1, 2, 3))
        ok = all(close(g, w) for g, w in zip(got, want))
        checks.append((f"marginals for {name}", ok, f"got {tuple(round(g, 12) for g in got)}, want {want}"))
    assert record(5, "trine POVM and outcome marginals", checks)


def test_criterion_06_weak(record):
    eps = 0.1
    args = (SQRT_HALF, SQRT_HALF, -SQRT_HALF, SQRT_HALF)
    povm = derive_povm(catalog.weak_model(eps, *args))
    reference = o.weak_povm(eps, *args)
    checks = []
    for label, expected in reference.items():
        dev = entrywise(povm[label], expected)
        checks.append((f"element {label}", dev <= TOL, f"max deviation {dev:.3e}"))
    total = sum(povm[label] for label in reference)
    dev = entrywise(total, np.eye(2))
    checks.append(("six elements sum to I", dev <= TOL, f"max deviation {dev:.3e}"))
    assert record(6, "weak measurement POVM", checks)


def test_criterion_07_epr(record):
    model = epr_model("z")
    psi = catalog.singlet()
    checks = []
    z = assign_probabilities(catalog.measurement_family(model, psi, [catalog.pair_slot("z")]))
    x = assign_probabilities(catalog.measurement_family(model, psi, [catalog.pair_slot("x")]))
    for outcome in "+-":
        got = z.probability({"t2": outcome})
        checks.append((f"Pr({outcome})", close(got, 0.5), repr(got)))
    for outcome, pair in (("+", ("z+", "z-")), ("-", ("z-", "z+"))):
        got = z.conditional({"t1": pair}, {"t2": outcome})
        checks.append((f"z family Pr({pair}|{outcome})", close(got, 1.0), repr(got)))
        for a in ("z+", "z-"):
            got = z.conditional({"t1": (a, "*")}, {"t2": outcome})
            want = 1.0 if a == pair[0] else 0.0
            checks.append((f"z family Pr(a={a}|{outcome})", close(got, want), repr(got)))
    for outcome in "+-":
        for pair in (("x+", "x-"), ("x-", "x+")):
            got = x.conditional({"t1": pair}, {"t2": outcome})
            checks.append((f"x family Pr({pair}|{outcome})", close(got, 0.5), repr(got)))
    assert record(7, "EPR-Bohm singlet families", checks)


def test_criterion_08_noncontextuality(record):
    rng = np.random.default_rng(88)
    probes = [linalg.random_ket(3, rng) for _ in range(25)]
    report = noncontextuality_check(
        catalog.switch_model("beta"), catalog.switch_model("gamma"), catalog.A_GROUPS, probes, tol=TOL
    )
    checks = [
        (f"probe {n}", row.max_difference <= TOL, f"difference {row.max_difference:.3e}")
        for n, row in enumerate(report.rows)
    ]
    checks.append(("25 probes", len(report.rows) == 25, str(len(report.rows))))
    assert record(8, "noncontextuality over 25 random probes", checks)


def _random_model(rng):
    s = int(rng.integers(1, 5))
    m = s + int(rng.integers(0, 5))
    pdi = linalg.random_pdi(m, rng)
    keep = int(rng.integers(1, len(pdi) + 1))
    return make_model(linalg.random_isometry(m, s, rng), [(f"k{j}", p) for j, p in enumerate(pdi[:keep])])


def test_criterion_09_property_suites(record):
    failures = {"a": 0, "b": 0, "c": 0, "d": 0}
    rng = np.random.default_rng(909)
    for _ in range(200):
        model = _random_model(rng)
        if not check_povm([backwards_map(model, k) for k in model.outcomes], tol=TOL).ok:
            failures["a"] += 1
    for _ in range(200):
        dim = int(rng.integers(2, 6))
        pdi = linalg.random_pdi(dim, rng)
        slot = PDISlot(tuple(Event(str(j), p) for j, p in enumerate(pdi)))
        fam = HistoryFamily.build(linalg.random_ket(dim, rng), TimeGrid.build([linalg.random_unitary(dim, rng)]), [slot])
        if not check_consistency(fam).consistent:
            failures["b"] += 1
    for _ in range(100):
        model = _random_model(rng)
        try:
            inference_family(model, linalg.random_ket(model.system_dim, rng))
        except HistqError:
            failures["c"] += 1
    for _ in range(100):
        dim, n = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        stacked = linalg.random_isometry(n * dim, dim, rng)
        ops = [stacked[j * dim : (j + 1) * dim, :] for j in range(n)]
        model = kraus_model(ops)
        povm = derive_povm(model)
        if any(entrywise(povm[lab], linalg.dagger(k) @ k) > TOL for lab, k in zip(model.labels, ops)):
            failures["d"] += 1
    names = {"a": "backwards map gives POVM (200)", "b": "two-time families (200)", "c": "inference families (100)", "d": "Kraus POVM (100)"}
    checks = [(names[k], v == 0, f"{v} failures") for k, v in failures.items()]
    assert record(9, "property suites", checks)


def _projective_models():
    models = {
        "spin z": catalog.spin_model("z"),
        "spin x": catalog.spin_model("x"),
        "interferometer open": catalog.mach_zehnder(False),
        "interferometer closed": catalog.mach_zehnder(True),
        "pair z": epr_model("z"),
        "pair x": epr_model("x"),
        "switch beta": catalog.switch_model("beta"),
        "switch gamma": catalog.switch_model("gamma"),
    }
    for name, ex in EXAMPLES.items():
        for mname, model in parse_scenario(ex.source()).models.items():
            if model.designated is not None:
                models[f"{name}/{mname}"] = model
    return models


def test_criterion_10_calibration(record):
    rng = np.random.default_rng(10)
    checks = []
    for name, model in _projective_models().items():
        for k, proj in model.designated.items():
            values, vectors = np.linalg.eigh(proj)
            basis = vectors[:, values > 0.5]
            inputs = [basis[:, j] for j in range(basis.shape[1])]
            inputs.append(linalg.normalize(basis @ (rng.standard_normal(basis.shape[1]) + 1j * rng.standard_normal(basis.shape[1]))))
            q = backwards_map(model, k)
            worst = max(abs(1.0 - float(np.real(np.vdot(v, q @ v)))) for v in inputs)
            checks.append((f"{name} outcome {k}", worst <= TOL, f"Pr deficit {worst:.3e}"))
    assert record(10, "calibration of every built-in projective model", checks)


def test_criterion_11_dsl_round_trip_and_fuzz(record):
    checks = []
    sources = {name: ex.source() for name, ex in EXAMPLES.items()}
    for name, text in sources.items():
        program = parse_program(text)
        checks.append((f"round trip {name}", parse_program(format_program(program)) == program, "AST differs"))
    rng = random.Random(1011)
    names = sorted(sources)
    out_of_bounds = crashes = parse_errors = 0
    for case in range(1000):
        text = mutate(sources[names[case % len(names)]], rng)
        try:
            parse_scenario(text)
        except ParseError as err:
            parse_errors += 1
            out_of_bounds += not within_bounds(text, err.line, err.col)
        except ScenarioError as err:
            out_of_bounds += not within_bounds(text, err.line, err.col)
        except Exception:  # anything unpositioned escaping the front end is a defect
            crashes += 1
    checks.append(("fuzz positions in bounds", out_of_bounds == 0, f"{out_of_bounds} out of bounds"))
    checks.append(("fuzz raises only scenario errors", crashes == 0, f"{crashes} other exceptions"))
    checks.append(("fuzz exercises the parser", parse_errors > 100, f"{parse_errors} parse errors"))
    assert record(11, "DSL round trip and mutation fuzz", checks)
