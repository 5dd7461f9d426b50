"""Resolve a parsed scenario into engine objects.

Every declared name is checked when it is defined, so a scenario that builds
has dimension-consistent kets, valid isometries, measurement models whose
pointers form a PDI, and complete history families.  Errors carry the source
position of the offending node.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .. import linalg
from ..catalog import OMEGA
from ..errors import HistqError
from ..histories import Ensemble, Event, HistoryFamily, LinkedSlot, PDISlot, TimeGrid, product_events
from ..measurement import (
    MeasurementModel,
    kraus_model,
    luders_model,
    make_model,
    preparation_model,
    projective_model,
)
from ..objects import validate_isometry, validate_pdi
from . import ast as A
from .errors import ResolutionError, ScenarioError, ValidationError
from .parser import parse_program

MAX_DIM = 1024
CONSTANTS = {"i": 1j, "pi": math.pi, "omega": OMEGA}


@dataclass
class Query:
    qid: str
    decl: A.QueryDecl


@dataclass
class Scenario:
    origin: str = "<inline>"
    spaces: dict[str, tuple[int, ...]] = field(default_factory=dict)
    kets: dict[str, tuple[str, np.ndarray]] = field(default_factory=dict)
    operators: dict[str, np.ndarray] = field(default_factory=dict)
    models: dict[str, MeasurementModel] = field(default_factory=dict)
    families: dict[str, HistoryFamily] = field(default_factory=dict)
    queries: list[Query] = field(default_factory=list)

    def dim(self, space: str) -> int:
        return int(np.prod(self.spaces[space]))


class Builder:
    def __init__(self, origin: str = "<inline>", tol: float = linalg.NUMERIC_TOL):
        self.sc = Scenario(origin)
        self.tol = tol

    # --- errors -------------------------------------------------------------

    def fail(self, node, message: str) -> ValidationError:
        pos = getattr(node, "pos", A.NOPOS)
        return ValidationError(message, pos.line, pos.col, self.sc.origin)

    def unknown(self, node, name: str, what: str) -> ResolutionError:
        pos = getattr(node, "pos", A.NOPOS)
        return ResolutionError(name, pos.line, pos.col, what, self.sc.origin)

    def declared(self, name: str) -> bool:
        sc = self.sc
        return any(name in d for d in (sc.spaces, sc.kets, sc.operators, sc.models, sc.families))

    def define(self, node, name: str) -> None:
        if self.declared(name):
            raise self.fail(node, f"name {name!r} is already defined")

    def space_dim(self, node, name: str) -> int:
        if name not in self.sc.spaces:
            raise self.unknown(node, name, "space")
        return self.sc.dim(name)

    # --- expressions --------------------------------------------------------

    def eval(self, e):
        try:
            value = self._eval(e)
        except ScenarioError:
            raise
        except (HistqError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            raise self.fail(e, f"{type(exc).__name__}: {exc}") from None
        if isinstance(value, np.ndarray):
            if value.ndim == 2 and max(value.shape) > MAX_DIM:
                raise self.fail(e, f"matrix of shape {value.shape} exceeds the dimension limit {MAX_DIM}")
            if not np.all(np.isfinite(value)):
                raise self.fail(e, "expression produced a non-finite value")
        elif not cmath.isfinite(complex(value)):
            raise self.fail(e, "expression produced a non-finite value")
        return value

    def _eval(self, e):
        if isinstance(e, A.Num):
            v = int(e.text) if e.text.isdigit() else float(e.text)
            if isinstance(v, float) and not math.isfinite(v):
                raise self.fail(e, f"number {e.text} is out of range")
            return v
        if isinstance(e, A.Const):
            return CONSTANTS[e.name]
        if isinstance(e, A.Ref):
            if e.name in self.sc.kets:
                return self.sc.kets[e.name][1]
            if e.name in self.sc.operators:
                return self.sc.operators[e.name]
            if self.declared(e.name):
                raise self.fail(e, f"{e.name!r} is not a ket or operator")
            raise self.unknown(e, e.name, "ket or operator")
        if isinstance(e, A.Proj):
            return linalg.ket_projector(self.ket(e, e.name))
        if isinstance(e, A.Dyad):
            return linalg.dyad(self.ket(e, e.ket), self.ket(e, e.bra))
        if isinstance(e, A.ListLit):
            return self.list_value(e)
        if isinstance(e, A.Call):
            return self.call(e)
        if isinstance(e, A.Unary):
            v = self.eval(e.operand)
            return -v if e.op == "-" else v
        if isinstance(e, A.Binary):
            return self.binary(e, self.eval(e.left), self.eval(e.right))
        raise self.fail(e, f"unsupported expression {type(e).__name__}")

    def ket(self, node, name: str) -> np.ndarray:
        if name not in self.sc.kets:
            raise self.unknown(node, name, "ket")
        return self.sc.kets[name][1]

    def list_value(self, e: A.ListLit) -> np.ndarray:
        values = [self.eval(x) for x in e.items]
        if all(np.isscalar(v) for v in values):
            return np.array(values, dtype=complex)
        if all(isinstance(v, np.ndarray) and v.ndim == 1 for v in values):
            if len({len(v) for v in values}) != 1:
                raise self.fail(e, "matrix rows have different lengths")
            return np.array(values, dtype=complex)
        raise self.fail(e, "a list must hold only numbers (a ket) or only rows (a matrix)")

    def call(self, e: A.Call):
        args = e.args
        if e.func == "I":
            if len(args) != 1:
                raise self.fail(e, "I() takes one space name or dimension")
            a = args[0]
            if isinstance(a, A.Ref):
                return np.eye(self.space_dim(a, a.name), dtype=complex)
            n = self.eval(a)
            if not isinstance(n, int) or not 1 <= n <= MAX_DIM:
                raise self.fail(a, f"identity dimension must be an integer in 1..{MAX_DIM}")
            return np.eye(n, dtype=complex)
        if len(args) != 1:
            raise self.fail(e, f"{e.func}() takes one argument")
        v = self.eval(args[0])
        if e.func == "sqrt":
            if not np.isscalar(v):
                raise self.fail(e, "sqrt() takes a number")
            if complex(v).imag == 0 and complex(v).real >= 0:
                return math.sqrt(complex(v).real)
            return cmath.sqrt(v)
        if e.func == "conj":
            return np.conj(v) if isinstance(v, np.ndarray) else complex(v).conjugate()
        if e.func == "dag":
            if np.isscalar(v):
                return complex(v).conjugate()
            return linalg.dagger(v.reshape(-1, 1) if v.ndim == 1 else v)
        if e.func == "proj":
            if not (isinstance(v, np.ndarray) and v.ndim == 1):
                raise self.fail(e, "proj() takes a ket")
            if np.linalg.norm(v) <= self.tol:
                raise self.fail(e, "proj() of a zero ket")
            return linalg.ket_projector(v)
        raise self.fail(e, f"unknown function {e.func}")

    def binary(self, e: A.Binary, a, b):
        op = e.op
        scalar_a, scalar_b = np.isscalar(a), np.isscalar(b)
        if op in "+-":
            if scalar_a != scalar_b or (not scalar_a and a.shape != b.shape):
                raise self.fail(e, f"cannot apply {op!r} to {_kind(a)} and {_kind(b)}")
            return a + b if op == "+" else a - b
        if op == "*":
            if scalar_a or scalar_b:
                return a * b
            if a.ndim == 1 and b.ndim == 1:
                raise self.fail(e, "product of two kets is ambiguous; use dag(a) * b or |a><b|")
            left = a.reshape(-1, 1) if a.ndim == 1 else a
            if left.shape[1] != b.shape[0]:
                raise self.fail(e, f"shape mismatch in product: {_kind(a)} times {_kind(b)}")
            out = left @ b
            if out.ndim == 1 and out.shape == (1,):
                return complex(out[0])
            if out.ndim == 2 and out.shape == (1, 1):
                return complex(out[0, 0])
            return out
        if op == "/":
            if not scalar_b:
                raise self.fail(e, "can only divide by a number")
            if b == 0:
                raise self.fail(e, "division by zero")
            return a / b
        if op == "^":
            if scalar_a and scalar_b:
                if isinstance(a, int) and isinstance(b, int) and 0 <= b <= 64 and abs(a) < 2**16:
                    return a**b
                return complex(a) ** complex(b)
            if not scalar_a and scalar_b and a.ndim == 2 and isinstance(b, int) and b >= 0:
                if a.shape[0] != a.shape[1]:
                    raise self.fail(e, "matrix power needs a square matrix")
                return np.linalg.matrix_power(a, b)
            raise self.fail(e, "'^' needs a number or a square matrix with a non-negative integer exponent")
        if op == "(x)":
            if scalar_a or scalar_b:
                raise self.fail(e, "tensor product needs kets or matrices")
            if a.ndim != b.ndim:
                a = a.reshape(-1, 1) if a.ndim == 1 else a
                b = b.reshape(-1, 1) if b.ndim == 1 else b
            size = a.size * b.size
            if size > MAX_DIM * MAX_DIM:
                raise self.fail(e, f"tensor product of {_kind(a)} and {_kind(b)} exceeds the dimension limit {MAX_DIM}")
            return np.kron(a, b)
        raise self.fail(e, f"unknown operator {op}")

    def ket_value(self, e, dim: int | None = None) -> np.ndarray:
        v = self.eval(e)
        if not (isinstance(v, np.ndarray) and v.ndim == 1):
            raise self.fail(e, f"expected a ket, got {_kind(v)}")
        if dim is not None and len(v) != dim:
            raise self.fail(e, f"ket has dimension {len(v)}, expected {dim}")
        return v

    def matrix_value(self, e, shape: tuple[int, int] | None = None) -> np.ndarray:
        v = self.eval(e)
        if not (isinstance(v, np.ndarray) and v.ndim == 2):
            raise self.fail(e, f"expected a matrix, got {_kind(v)}")
        if shape is not None and v.shape != shape:
            raise self.fail(e, f"matrix has shape {v.shape[0]}x{v.shape[1]}, expected {shape[0]}x{shape[1]}")
        return v

    def real_value(self, e) -> float:
        v = self.eval(e)
        if not np.isscalar(v) or abs(complex(v).imag) > self.tol:
            raise self.fail(e, "expected a real number")
        return float(complex(v).real)

    # --- statements ---------------------------------------------------------

    def build(self, program: A.Program) -> Scenario:
        for s in program.statements:
            getattr(self, "do_" + type(s).__name__)(s)
        return self.sc

    def do_SpaceDecl(self, s: A.SpaceDecl):
        self.define(s, s.name)
        if s.factors:
            dims = []
            for f in s.factors:
                if f not in self.sc.spaces:
                    raise self.unknown(s, f, "space")
                dims.extend(self.sc.spaces[f])
            dims = tuple(dims)
        else:
            dims = (s.dim,)
        total = int(np.prod(dims))
        if not 1 <= total <= MAX_DIM:
            raise self.fail(s, f"space dimension must be between 1 and {MAX_DIM}, got {total}")
        self.sc.spaces[s.name] = dims

    def do_KetDecl(self, s: A.KetDecl):
        self.define(s, s.name)
        dim = self.space_dim(s, s.space)
        v = self.ket_value(s.expr, dim)
        if np.linalg.norm(v) <= self.tol:
            raise self.fail(s.expr, "ket is zero")
        self.sc.kets[s.name] = (s.space, v)

    def do_OperatorDecl(self, s: A.OperatorDecl):
        self.define(s, s.name)
        n_in = self.space_dim(s, s.source)
        n_out = self.space_dim(s, s.target)
        m = self.matrix_value(s.expr, (n_out, n_in))
        if s.kind == "isometry":
            m = self.checked(s.expr, lambda: validate_isometry(m, self.tol).matrix)
        self.sc.operators[s.name] = m

    def checked(self, node, fn):
        """Run an engine constructor, turning its exceptions into positioned errors."""
        try:
            return fn()
        except (HistqError, ValueError, KeyError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
            raise self.fail(node, f"{type(exc).__name__}: {msg}") from None

    def pointer_states(self, s: A.ModelDecl):
        if not s.pointer_states:
            return None
        return [self.ket_value(e) for e in s.pointer_states]

    def do_ModelDecl(self, s: A.ModelDecl):
        self.define(s, s.name)
        labels = [e.label for e in s.entries]
        if len(set(labels)) != len(labels):
            raise self.fail(s, f"duplicate outcome labels in model {s.name!r}")
        if s.kind == "projective":
            images, pointers = [], []
            for e in s.entries:
                src, img = self.ket_value(e.exprs[0]), self.ket_value(e.exprs[1])
                images.append((src, img))
                if len(e.exprs) > 2:
                    pointers.append(self.matrix_value(e.exprs[2], (len(img), len(img))))
                else:
                    pointers.append(linalg.ket_projector(img))
            model = self.checked(s, lambda: projective_model(images, pointers, labels, self.tol))
        elif s.kind == "isometry":
            J = self.matrix_value(s.isometry)
            pointers = [(e.label, self.matrix_value(e.exprs[0])) for e in s.entries]
            model = self.checked(s, lambda: make_model(J, pointers, tol=self.tol))
        elif s.kind == "kraus":
            ops = [self.matrix_value(e.exprs[0]) for e in s.entries]
            states = self.pointer_states(s)
            model = self.checked(s, lambda: kraus_model(ops, states, labels, self.tol))
        elif s.kind == "luders":
            mats = [self.matrix_value(e.exprs[0]) for e in s.entries]
            states = self.pointer_states(s)
            model = self.checked(s, lambda: luders_model(validate_pdi(mats, labels, self.tol), states, self.tol))
        else:  # preparation
            targets = [(self.real_value(e.exprs[1]), self.ket_value(e.exprs[0])) for e in s.entries]
            states = self.pointer_states(s)
            model = self.checked(s, lambda: preparation_model(targets, states, labels, self.tol))
        self.sc.models[s.name] = model

    def initial(self, init: A.Initial, dim: int):
        if init.state is not None:
            psi = self.ket(init, init.state)
            if len(psi) != dim:
                raise self.fail(init, f"initial state has dimension {len(psi)}, expected {dim}")
            if not linalg.is_normalized(psi, self.tol):
                raise self.fail(init, f"initial state {init.state!r} is not normalized")
            return psi
        weights, states = [], []
        for w, name in init.mixture:
            weights.append(self.real_value(w))
            psi = self.ket(init, name)
            if len(psi) != dim:
                raise self.fail(init, f"state {name!r} has dimension {len(psi)}, expected {dim}")
            states.append(psi)
        return self.checked(init, lambda: Ensemble(tuple(weights), tuple(states)))

    def events(self, items, dim: int | None = None) -> tuple[Event, ...]:
        out = []
        for it in items:
            label = it.label
            if label is None:
                if isinstance(it.expr, (A.Ref, A.Proj)):
                    label = it.expr.name
                else:
                    raise self.fail(it, "this event needs an explicit label (label: expression)")
            v = self.eval(it.expr)
            if isinstance(v, np.ndarray) and v.ndim == 1:
                if np.linalg.norm(v) <= self.tol:
                    raise self.fail(it.expr, "event ket is zero")
                v = linalg.ket_projector(v)
            if not (isinstance(v, np.ndarray) and v.ndim == 2 and v.shape[0] == v.shape[1]):
                raise self.fail(it.expr, f"event must be a ket or a square matrix, got {_kind(v)}")
            if dim is not None and v.shape[0] != dim:
                raise self.fail(it.expr, f"event acts on dimension {v.shape[0]}, expected {dim}")
            out.append(Event(label, v))
        return tuple(out)

    def do_FamilyDecl(self, s: A.FamilyDecl):
        self.define(s, s.name)
        model = None
        if s.model is not None:
            if s.model not in self.sc.models:
                raise self.unknown(s, s.model, "model")
            model = self.sc.models[s.model]
            dim = model.system_dim
        elif s.space is not None:
            dim = self.space_dim(s, s.space)
        else:
            first = s.initial.state if s.initial.state is not None else s.initial.mixture[0][1]
            dim = len(self.ket(s.initial, first))
        n = len(s.slots)
        for k, slot in enumerate(s.slots):
            if isinstance(slot, A.PointerSlot) and (model is None or k != n - 1):
                raise self.fail(slot, "'pointer' must be the last slot of a family declared 'on' a model")
            if isinstance(slot, A.LinkedSlotNode) and k == n - 1:
                raise self.fail(slot, "a linked slot binds to the last slot and cannot be last itself")
        if model is not None and not isinstance(s.slots[-1], A.PointerSlot):
            raise self.fail(s, "a family declared 'on' a model must end with the 'pointer' slot")

        n_free = n - 1 if model is not None else n
        if s.evolve:
            if len(s.evolve) != n_free:
                raise self.fail(s, f"evolve needs {n_free} propagators, got {len(s.evolve)}")
            props = [self.matrix_value(e) for e in s.evolve]
        else:
            props = [np.eye(dim)] * n_free
        if model is not None:
            props.append(model.J.matrix)
        if s.times and len(s.times) != n + 1:
            raise self.fail(s, f"{n} slots need {n + 1} time labels, got {len(s.times)}")
        times = s.times or tuple(f"t{k}" for k in range(n + 1))
        grid = self.checked(s, lambda: TimeGrid.build(props, times, self.tol))

        slots = []
        for k, slot in enumerate(s.slots):
            where = grid.dims[k + 1]
            if isinstance(slot, A.PointerSlot):
                slots.append(PDISlot(tuple(Event(lab, m) for lab, m in model.pointer_pdi().items())))
            elif isinstance(slot, A.LinkedSlotNode):
                bound = {}
                for label, items in slot.bound:
                    if label in bound:
                        raise self.fail(slot, f"outcome {label!r} is bound twice")
                    bound[label] = self.events(items, where)
                slots.append(LinkedSlot(times[-1], bound))
            elif len(slot.factors) == 1:
                slots.append(PDISlot(self.events(slot.factors[0], where)))
            else:
                factor_sets = [self.events(f) for f in slot.factors]
                slots.append(PDISlot(product_events(*factor_sets)))
        initial = self.initial(s.initial, grid.dims[0])
        self.sc.families[s.name] = self.checked(s, lambda: HistoryFamily.build(initial, grid, slots, tol=10 * self.tol))

    def do_QueryDecl(self, q: A.QueryDecl):
        qid = q.qid or f"q{len(self.sc.queries) + 1}"
        if any(x.qid == qid for x in self.sc.queries):
            raise self.fail(q, f"duplicate query id {qid!r}")
        if q.kind in ("consistency", "probabilities", "conditional"):
            if q.target not in self.sc.families:
                raise self.unknown(q, q.target, "family")
            times = self.sc.families[q.target].times[1:]
            used = list(q.keep) + [t for t, _ in q.target_pattern] + [t for t, _ in q.given_pattern]
            for t in used:
                if t not in times:
                    raise self.fail(q, f"unknown time {t!r}; family {q.target!r} has {', '.join(times)}")
        else:
            for name in filter(None, (q.target, q.second)):
                if name not in self.sc.models:
                    raise self.unknown(q, name, "model")
            if q.kind == "inference":
                self.initial(q.initial, self.sc.models[q.target].system_dim)
            if q.kind == "noncontextuality":
                dim = self.sc.models[q.target].system_dim
                for name in q.probes:
                    psi = self.ket(q, name)
                    if len(psi) != dim:
                        raise self.fail(q, f"probe {name!r} has dimension {len(psi)}, expected {dim}")
        self.sc.queries.append(Query(qid, q))


def _kind(v) -> str:
    if np.isscalar(v):
        return "a number"
    if v.ndim == 1:
        return f"a ket of dimension {len(v)}"
    return f"a {v.shape[0]}x{v.shape[1]} matrix"


def build_scenario(program: A.Program, origin: str = "<inline>", tol: float = linalg.NUMERIC_TOL) -> Scenario:
    return Builder(origin, tol).build(program)


def parse_scenario(text: str, origin: str = "<inline>", tol: float = linalg.NUMERIC_TOL) -> Scenario:
    return build_scenario(parse_program(text, origin), origin, tol)
