import json
import random
import re
from pathlib import Path

import pytest

from histq.dsl import (
    ParseError,
    ResolutionError,
    ScenarioError,
    ValidationError,
    format_program,
    parse_program,
    parse_scenario,
    run_scenario,
    to_csv,
    to_json,
    to_table,
)
from histq.dsl.run import fnum
from histq.scenarios import EXAMPLES, check_example, get_example, run_example

from fuzz import mutate, within_bounds

SOURCES = {name: ex.source() for name, ex in EXAMPLES.items()}

SPIN = """
space S dim 2; space D dim 2
ket zp in S = [1, 0]; ket zm in S = [0, 1]
ket up in D = [1, 0]; ket down in D = [0, 1]
ket psi0 in S = 0.6 * zp + 0.8 * i * zm
model sz = projective { "+": zp -> up, "-": zm -> down }
family before on sz = [psi0] (.) {"z+": zp, "z-": zm} (.) pointer
query consistency before
query conditional before target (t1: "z+") given (t2: "+")
"""


@pytest.mark.parametrize("name", sorted(SOURCES))
def test_round_trip(name):
    program = parse_program(SOURCES[name])
    printed = format_program(program)
    assert parse_program(printed) == program
    assert format_program(parse_program(printed)) == printed


@pytest.mark.parametrize("name", sorted(SOURCES))
def test_builtin_examples_meet_expectations(name):
    results = run_example(name)
    assert results.ok
    assert all(c.ok for c in check_example(name, results)), [c.describe() for c in check_example(name, results)]


def test_inline_scenario():
    results = run_scenario(parse_scenario(SPIN))
    assert results["q1"].payload["verdict"] == "consistent"
    assert results["q2"].payload["value"] == pytest.approx(1.0)


def test_grammar_doc_example_parses():
    doc = (Path(__file__).parent.parent / "docs" / "grammar.md").read_text()
    block = re.search(r"## Example\n\n```\n(.*?)```", doc, re.S).group(1)
    results = run_scenario(parse_scenario(block))
    assert results.ok


def test_sqrt_forms_agree():
    text = "space S dim 2\nket a in S = [sqrt(2)/2, 0]\nket b in S = [1/sqrt(2), 0]\n"
    sc = parse_scenario(text + "ket c in S = [1, 0]\n")
    a, b = sc.kets["a"][1], sc.kets["b"][1]
    assert abs(a[0] - b[0]) <= 1e-15


def test_empty_query_list():
    results = run_scenario(parse_scenario("space S dim 2\n"))
    assert results.results == []
    assert results.ok
    assert json.loads(to_json(results))["queries"] == []


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse_program("space S dim 2\nket a in S = [1, 0]]\n")
    err = info.value
    assert (err.line, err.col) == (2, 20)
    assert str(err).startswith("<inline>:2:20: ")
    # newlines inside brackets are skipped, so an unclosed bracket fails at end of input
    with pytest.raises(ParseError, match="end of input") as info:
        parse_program("space S dim 2\nket a in S = [1, 0\n")
    assert (info.value.line, info.value.col) == (3, 1)


def test_resolution_error():
    with pytest.raises(ResolutionError) as info:
        parse_scenario("ket a in T = [1, 0]\n")
    assert "undefined" in str(info.value)
    assert info.value.line == 1
    assert "'T'" in str(info.value)


def test_validation_errors_are_positioned():
    with pytest.raises(ValidationError) as info:
        parse_scenario("space S dim 2\nket bad in S = [1, 0, 0]\n")
    assert info.value.line == 2
    with pytest.raises(ValidationError, match="division by zero"):
        parse_scenario("space S dim 2\nket bad in S = [1, 0] / 0\n")
    with pytest.raises(ValidationError):
        parse_scenario("space S dim 2\nket bad in S = [10^10^10, 0]\n")


def test_reserved_words_rejected():
    with pytest.raises(ParseError):
        parse_program("space omega dim 2\n")


def test_duplicate_names_rejected():
    with pytest.raises(ScenarioError):
        parse_scenario("space S dim 2\nspace S dim 3\n")


def test_query_failures_do_not_stop_later_queries():
    text = SPIN + 'query conditional before target (t1: "z+") given (t2: "0")\nquery consistency before\n'
    results = run_scenario(parse_scenario(text))
    assert not results["q3"].ok
    assert results["q4"].ok
    assert not results.ok


def test_number_formatting():
    assert fnum(8e-32) == 0.0
    assert fnum(-2.2e-16) == 0.0
    assert fnum(1 / 3) == 0.333333333333
    assert fnum(2 / 3) == 0.666666666667


def test_json_is_stable():
    sc = parse_scenario(SOURCES["trine"])
    assert to_json(run_scenario(sc)) == to_json(run_scenario(sc))
    doc = json.loads(to_json(run_scenario(sc)))
    assert all("query_id" in r for r in doc["queries"])
    assert "elapsed" not in to_json(run_scenario(sc))


def test_csv_and_table():
    results = run_scenario(parse_scenario(SPIN))
    csv = to_csv(results)
    assert csv.splitlines()[0] == "query_id,kind,key,value"
    table = to_table(results)
    assert "q1" in table and "\033[" not in table


def test_example_lookup():
    with pytest.raises(KeyError):
        get_example("nosuch")


def test_mutation_fuzz_small():
    rng = random.Random(7)
    for _ in range(200):
        text = mutate(SPIN, rng)
        try:
            parse_scenario(text)
        except ScenarioError as err:
            assert within_bounds(text, err.line, err.col), str(err)
