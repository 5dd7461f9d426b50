"""Scenario language: parse, print, build and run ``.hqs`` files."""

from .ast import Program
from .build import Scenario, build_scenario, parse_scenario
from .errors import ParseError, ResolutionError, ScenarioError, ValidationError
from .parser import parse_program
from .printer import format_expr, format_program
from .run import FORMATTERS, QueryResult, ResultSet, run_scenario, to_csv, to_json, to_table

__all__ = [
    "FORMATTERS",
    "ParseError",
    "Program",
    "QueryResult",
    "ResolutionError",
    "ResultSet",
    "Scenario",
    "ScenarioError",
    "ValidationError",
    "build_scenario",
    "format_expr",
    "format_program",
    "parse_program",
    "parse_scenario",
    "run_scenario",
    "to_csv",
    "to_json",
    "to_table",
]
