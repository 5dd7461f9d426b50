"""Execute scenario queries and render their results as table, JSON or CSV."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .. import linalg
from ..errors import HistqError
from ..histories import CONSISTENCY_TOL, assign_probabilities, check_consistency
from ..measurement import derive_povm, inference_family, noncontextuality_check
from . import ast as A
from .build import Builder, Scenario

SIGNIFICANT = 12
# magnitudes below this are floating-point residue and print as zero
ZERO_SNAP = 1e-14


@dataclass
class QueryResult:
    qid: str
    kind: str
    target: str
    ok: bool
    payload: dict[str, Any] = field(default_factory=dict)
    error: str | None = None
    elapsed: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        out = {"query_id": self.qid, "kind": self.kind, "target": self.target, "ok": self.ok}
        if self.ok:
            out["result"] = self.payload
        else:
            out["error"] = self.error
        return out


@dataclass
class ResultSet:
    origin: str
    results: list[QueryResult]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def __getitem__(self, qid: str) -> QueryResult:
        for r in self.results:
            if r.qid == qid:
                return r
        raise KeyError(qid)

    def to_dict(self) -> dict[str, Any]:
        return {"scenario": self.origin, "ok": self.ok, "queries": [r.to_dict() for r in self.results]}


# --- number formatting --------------------------------------------------------


def fnum(x: float) -> float:
    """Round to 12 significant digits; residue below ``ZERO_SNAP`` and ``-0.0`` become ``0.0``."""
    x = float(x)
    if abs(x) < ZERO_SNAP:
        return 0.0
    v = float(f"{x:.{SIGNIFICANT}g}")
    return 0.0 if v == 0 else v


def fmatrix(m: np.ndarray) -> list:
    """Complex matrix as nested ``[re, im]`` pairs."""
    return [[[fnum(z.real), fnum(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


# --- query execution ------------------------------------------------------------


def _matcher(m: A.Matcher):
    if m.kind == "any":
        return "*"
    if m.kind == "label":
        return m.label
    if m.kind == "set":
        return frozenset(p.label for p in m.parts)
    return tuple(_matcher(p) for p in m.parts)


def _pattern(pattern) -> dict:
    return {t: _matcher(m) for t, m in pattern}


def _consistency(sc: Scenario, q: A.QueryDecl, ctol: float, ntol: float) -> dict:
    r = check_consistency(sc.families[q.target], ctol)
    max_off = fnum(r.max_off_diagonal)
    return {
        "verdict": r.verdict,
        "consistent": r.consistent,
        "histories": len(r.labels),
        "max_off_diagonal": max_off,
        "max_diagonal": fnum(r.max_diagonal),
        "worst_pair": list(r.worst_pair) if r.worst_pair and max_off > 0 else None,
        "tol": ctol,
    }


def _probabilities(sc: Scenario, q: A.QueryDecl, ctol: float, ntol: float) -> dict:
    table = assign_probabilities(sc.families[q.target], ctol)
    if q.keep:
        table = table.marginalize(q.keep)
    return {
        "times": list(table.times),
        "table": {key: fnum(p) for key, p in table.rows()},
        "total": fnum(table.total()),
    }


def _conditional(sc: Scenario, q: A.QueryDecl, ctol: float, ntol: float) -> dict:
    table = assign_probabilities(sc.families[q.target], ctol)
    value = table.conditional(_pattern(q.target_pattern), _pattern(q.given_pattern), ntol)
    return {"value": fnum(value)}


def _povm(sc: Scenario, q: A.QueryDecl, ctol: float, ntol: float) -> dict:
    povm = derive_povm(sc.models[q.target], ntol)
    return {"elements": {label: fmatrix(m) for label, m in povm.items()}}


def _inference(sc: Scenario, q: A.QueryDecl, ctol: float, ntol: float, builder: Builder) -> dict:
    model = sc.models[q.target]
    initial = builder.initial(q.initial, model.system_dim)
    analysis = inference_family(model, initial, tol=ntol, consistency_tol=ctol)
    outcomes = {}
    for r in analysis.results:
        outcomes[r.outcome] = {
            "probability": fnum(r.probability),
            "eigenvalues": [fnum(v) for v in r.eigenvalues],
            "prior": None if r.prior_distribution is None else {k: fnum(v) for k, v in r.prior_distribution.items()},
            "certain": r.certain,
            "most_likely": r.most_likely(),
        }
    return {"outcomes": outcomes}


def _noncontextuality(sc: Scenario, q: A.QueryDecl, ctol: float, ntol: float) -> dict:
    groups = {g: list(members) for g, members in q.groups}
    probes = [sc.kets[name][1] for name in q.probes]
    report = noncontextuality_check(sc.models[q.target], sc.models[q.second], groups, probes, tol=10 * ntol)
    rows = [
        {
            "probe": name,
            "first": {g: fnum(p) for g, p in row.distribution_beta.items()},
            "second": {g: fnum(p) for g, p in row.distribution_gamma.items()},
            "difference": fnum(row.max_difference),
        }
        for name, row in zip(q.probes, report.rows)
    ]
    return {"passed": report.passed, "max_difference": fnum(report.max_difference), "rows": rows}


HANDLERS = {
    "consistency": _consistency,
    "probabilities": _probabilities,
    "conditional": _conditional,
    "povm": _povm,
    "noncontextuality": _noncontextuality,
}


def run_scenario(
    scenario: Scenario,
    consistency_tol: float = CONSISTENCY_TOL,
    numeric_tol: float = linalg.NUMERIC_TOL,
) -> ResultSet:
    """Run every query; a failing query records its error and the rest still run."""
    builder = Builder(scenario.origin, numeric_tol)
    builder.sc = scenario
    results = []
    for query in scenario.queries:
        q = query.decl
        target = q.target if q.second is None else f"{q.target},{q.second}"
        start = time.perf_counter()
        try:
            if q.kind == "inference":
                payload = _inference(scenario, q, consistency_tol, numeric_tol, builder)
            else:
                payload = HANDLERS[q.kind](scenario, q, consistency_tol, numeric_tol)
            result = QueryResult(query.qid, q.kind, target, True, payload)
        except (HistqError, ValueError, KeyError) as exc:
            msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
            result = QueryResult(query.qid, q.kind, target, False, error=f"{type(exc).__name__}: {msg}")
        result.elapsed = time.perf_counter() - start
        results.append(result)
    return ResultSet(scenario.origin, results)


# --- output formats ---------------------------------------------------------------


def to_json(results: ResultSet) -> str:
    return json.dumps(results.to_dict(), indent=2, ensure_ascii=False) + "\n"


def _flatten(prefix: str, value, out: list):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}/{k}" if prefix else str(k), v, out)
    elif isinstance(value, list) and value and isinstance(value[0], (dict, list)):
        for i, v in enumerate(value):
            _flatten(f"{prefix}/{i}" if prefix else str(i), v, out)
    elif isinstance(value, list):
        out.append((prefix, " ".join(_scalar(v) for v in value)))
    else:
        out.append((prefix, _scalar(value)))


def _scalar(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def to_csv(results: ResultSet) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["query_id", "kind", "key", "value"])
    for r in results.results:
        rows: list = []
        if r.ok:
            _flatten("", r.payload, rows)
        else:
            rows.append(("error", r.error))
        for key, value in rows:
            w.writerow([r.qid, r.kind, key, value])
    return buf.getvalue()


def _paint(text: str, code: str, color: bool) -> str:
    return f"\033[{code}m{text}\033[0m" if color else text


def _fmt(x) -> str:
    return f"{x:.{SIGNIFICANT}g}" if isinstance(x, float) else str(x)


def _table_body(r: QueryResult) -> list[str]:
    p = r.payload
    if r.kind == "consistency":
        lines = [f"verdict: {p['verdict']} ({p['histories']} histories, tol {p['tol']:g})"]
        lines.append(f"max |off-diagonal|: {_fmt(p['max_off_diagonal'])}   max diagonal: {_fmt(p['max_diagonal'])}")
        if p["worst_pair"]:
            lines.append(f"worst pair: {p['worst_pair'][0]}  vs  {p['worst_pair'][1]}")
        return lines
    if r.kind == "probabilities":
        width = max((len(k) for k in p["table"]), default=0)
        lines = [f"{'(' + ','.join(p['times']) + ')':<{width}}  probability"]
        lines += [f"{k:<{width}}  {_fmt(v)}" for k, v in p["table"].items()]
        lines.append(f"{'total':<{width}}  {_fmt(p['total'])}")
        return lines
    if r.kind == "conditional":
        return [f"value: {_fmt(p['value'])}"]
    if r.kind == "povm":
        lines = []
        for label, m in p["elements"].items():
            lines.append(f"{label}:")
            for row in m:
                lines.append("  " + "  ".join(_complex(re, im) for re, im in row))
        return lines
    if r.kind == "inference":
        lines = []
        for k, o in p["outcomes"].items():
            eig = ", ".join(_fmt(v) for v in o["eigenvalues"])
            head = f"outcome {k}: Pr = {_fmt(o['probability'])}  eigenvalues [{eig}]"
            if o["prior"] is None:
                lines.append(head + "  (unreachable)")
                continue
            prior = ", ".join(f"{x}: {_fmt(v)}" for x, v in o["prior"].items())
            lines.append(head + ("  certain" if o["certain"] else ""))
            lines.append(f"  prior: {prior}")
        return lines
    if r.kind == "noncontextuality":
        lines = [f"passed: {p['passed']}   max difference: {_fmt(p['max_difference'])}"]
        for row in p["rows"]:
            a = ", ".join(f"{g}: {_fmt(v)}" for g, v in row["first"].items())
            b = ", ".join(f"{g}: {_fmt(v)}" for g, v in row["second"].items())
            lines.append(f"  {row['probe']}: [{a}] vs [{b}]")
        return lines
    return [json.dumps(p)]


def _complex(re: float, im: float) -> str:
    if im == 0:
        return f"{re:>10.6g}"
    return f"{complex(re, im):>10.6g}"


def to_table(results: ResultSet, color: bool = False, timing: bool = False) -> str:
    out = []
    for r in results.results:
        status = _paint("ok", "32", color) if r.ok else _paint("FAILED", "31", color)
        head = f"[{r.qid}] {r.kind} {r.target}: {status}"
        if timing:
            head += f" ({r.elapsed * 1000:.1f} ms)"
        out.append(head)
        body = _table_body(r) if r.ok else [r.error]
        out.extend("    " + line for line in body)
        out.append("")
    return "\n".join(out)


FORMATTERS = {"table": to_table, "json": to_json, "csv": to_csv}

