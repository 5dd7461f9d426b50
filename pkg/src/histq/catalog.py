"""Ready-made kets, models and families for the standard spin-half, interferometer,
trine, weak-measurement and switch-apparatus examples.
"""

from __future__ import annotations

import cmath
import math
from typing import Sequence

import numpy as np

from . import linalg
from .histories import Event, HistoryFamily, PDISlot, TimeGrid, product_events
from .linalg import dyad, ket_projector
from .measurement import MeasurementModel, kraus_model, make_model, projective_model
from .objects import observable_from_matrix

OMEGA = cmath.exp(2j * math.pi / 3)
SQRT_HALF = math.sqrt(0.5)


def spin_half() -> dict[str, np.ndarray]:
    zp = np.array([1, 0], dtype=complex)
    zm = np.array([0, 1], dtype=complex)
    return {
        "z+": zp,
        "z-": zm,
        "x+": (zp + zm) * SQRT_HALF,
        "x-": (zp - zm) * SQRT_HALF,
    }


def spin_state(alpha: complex, beta: complex) -> np.ndarray:
    return linalg.normalize([alpha, beta])


def _basis_pointers(dim: int, labels: Sequence[str]) -> list[tuple[np.ndarray, np.ndarray]]:
    return [linalg.dyad(linalg.basis_ket(dim, j)) for j in range(len(labels))]


def spin_model(axis: str = "z") -> MeasurementModel:
    """Stern-Gerlach style measurement of S_axis with outcomes ``+`` and ``-``."""
    k = spin_half()
    phis = [linalg.basis_ket(2, 0), linalg.basis_ket(2, 1)]
    images = [(k[f"{axis}+"], phis[0]), (k[f"{axis}-"], phis[1])]
    return projective_model(images, [dyad(p) for p in phis], labels=("+", "-"))


def mach_zehnder(closed: bool) -> MeasurementModel:
    """Detectors D+ / D- behind the interferometer.

    Open (second beamsplitter removed): arm ``z+`` reaches D+ and ``z-`` reaches
    D-.  Closed: the beamsplitter maps ``x+`` to D+ and ``x-`` to D-.
    """
    k = spin_half()
    d_plus, d_minus = linalg.basis_ket(2, 0), linalg.basis_ket(2, 1)
    src = ("x+", "x-") if closed else ("z+", "z-")
    images = [(k[src[0]], d_plus), (k[src[1]], d_minus)]
    return projective_model(images, [dyad(d_plus), dyad(d_minus)], labels=("D+", "D-"))


def pdi_slot(labels_kets: Sequence[tuple[str, np.ndarray]]) -> PDISlot:
    return PDISlot(tuple(Event(lab, ket_projector(v)) for lab, v in labels_kets))


def pointer_slot(model: MeasurementModel) -> PDISlot:
    return PDISlot(tuple(Event(lab, m) for lab, m in model.pointer_pdi().items()))


def measurement_family(
    model: MeasurementModel,
    initial,
    intermediate: Sequence[PDISlot],
    times: Sequence[str] | None = None,
) -> HistoryFamily:
    """``[psi0] (.) slot_1 (.) ... (.) pointer`` with identity propagators before ``J``."""
    n = len(intermediate)
    props = [np.eye(model.system_dim)] * n + [model.J.matrix]
    times = times or tuple(f"t{i}" for i in range(n + 2))
    grid = TimeGrid.build(props, times)
    return HistoryFamily.build(initial, grid, [*intermediate, pointer_slot(model)])


def spin_slot(axis: str) -> PDISlot:
    k = spin_half()
    return pdi_slot([(f"{axis}+", k[f"{axis}+"]), (f"{axis}-", k[f"{axis}-"])])


# --- trine POVM -------------------------------------------------------------


def trine_kets() -> list[np.ndarray]:
    return [
        np.array([1, 1], dtype=complex) * SQRT_HALF,
        np.array([OMEGA, OMEGA**2], dtype=complex) * SQRT_HALF,
        np.array([OMEGA**2, OMEGA], dtype=complex) * SQRT_HALF,
    ]


def trine_model() -> MeasurementModel:
    """Toy apparatus space of dim 3: ``J|u^k> = sqrt(3/2)|k> - sqrt(1/2)|w>``."""
    u = trine_kets()
    basis = [linalg.basis_ket(3, j) for j in range(3)]
    w = sum(basis) / math.sqrt(3)
    v = [math.sqrt(1.5) * b - SQRT_HALF * w for b in basis]
    # J is fixed by its action on the basis |z+>, |z->; solve from the (overcomplete) trine images
    U = np.column_stack(u[:2])
    V = np.column_stack(v[:2])
    J = V @ np.linalg.inv(U)
    return make_model(J, [(str(j + 1), dyad(b)) for j, b in enumerate(basis)])


# --- weak measurement -------------------------------------------------------

WEAK_OUTCOMES = ("E0", "E1", "E2", "F0", "F1", "F2")


def weak_model(eps: float, alpha_e: complex, alpha_f: complex, beta_e: complex, beta_f: complex) -> MeasurementModel:
    """Particle (A, B) weakly coupled to a probe (0, 1, 2), then both measured strongly.

    The particle is read out in the basis E, F where ``|A> = alpha_e|E> + alpha_f|F>``
    and ``|B> = beta_e|E> + beta_f|F>``; the probe in its 0, 1, 2 basis.
    """
    zeta, eta = math.sqrt(1 - eps), math.sqrt(eps)
    A, B = linalg.basis_ket(2, 0), linalg.basis_ket(2, 1)
    r = [linalg.basis_ket(3, j) for j in range(3)]
    # particle-probe interaction restricted to probe input |0>
    V = np.column_stack(
        [
            linalg.tensor_product(A, zeta * r[0] + eta * r[1]),
            linalg.tensor_product(B, zeta * r[0] + eta * r[2]),
        ]
    )
    # coordinates of A and B in the E, F readout basis
    R = np.array([[alpha_e, beta_e], [alpha_f, beta_f]], dtype=complex)
    J = linalg.tensor_product(R, np.eye(3)) @ V
    pointers = []
    for c, name in enumerate("EF"):
        for j in range(3):
            pointers.append((f"{name}{j}", linalg.tensor_product(dyad(linalg.basis_ket(2, c)), dyad(r[j]))))
    return make_model(J, pointers)


def weak_povm_closed_form(eps, alpha_e, alpha_f, beta_e, beta_f) -> dict[str, np.ndarray]:
    """The six POVM elements written out entry by entry in the (A, B) basis."""
    ae, af, be, bf = alpha_e, alpha_f, beta_e, beta_f
    c = np.conj
    return {
        "E0": (1 - eps) * np.array([[abs(ae) ** 2, c(ae) * be], [ae * c(be), abs(be) ** 2]]),
        "F0": (1 - eps) * np.array([[abs(af) ** 2, c(af) * bf], [af * c(bf), abs(bf) ** 2]]),
        "E1": eps * np.array([[abs(ae) ** 2, 0], [0, 0]]),
        "E2": eps * np.array([[0, 0], [0, abs(be) ** 2]]),
        "F1": eps * np.array([[abs(af) ** 2, 0], [0, 0]]),
        "F2": eps * np.array([[0, 0], [0, abs(bf) ** 2]]),
    }


# --- switch apparatus (A with B, or A with C) --------------------------------


def three_level_observables() -> dict[str, np.ndarray]:
    e = [linalg.basis_ket(3, j) for j in range(3)]
    return {
        "A": dyad(e[0]) - dyad(e[1]) - dyad(e[2]),
        "B": 0.5 * dyad(e[0]) + dyad(e[1]) - dyad(e[2]),
        "C": 2 * dyad(e[0]) + dyad(e[1], e[2]) + dyad(e[2], e[1]),
    }


def u_gamma() -> np.ndarray:
    """Switch unitary for setting gamma on span{|2>, |3>}; identity on |1>."""
    e = [linalg.basis_ket(3, j) for j in range(3)]
    block = SQRT_HALF * (dyad(e[1]) + dyad(e[1], e[2]) + dyad(e[2], e[1]) - dyad(e[2]))
    return dyad(e[0]) + block


def switch_model(setting: str) -> MeasurementModel:
    """Apparatus that measures A and then B (``beta``) or C (``gamma``).

    The path splitter and the nondestructive detector on the lower path are a
    Lüders measurement of ``{[1], I - [1]}`` with a two-state path record; the
    switch unitary acts on the lower path only; the final detectors D1, D2, D3
    read out the particle in the |1>, |2>, |3> basis together with the record.
    """
    if setting not in ("beta", "gamma"):
        raise ValueError(f"setting must be 'beta' or 'gamma', got {setting!r}")
    e = [linalg.basis_ket(3, j) for j in range(3)]
    p1 = dyad(e[0])
    luders = kraus_model([p1, np.eye(3) - p1], labels=("upper", "lower"))
    rec = [linalg.basis_ket(2, 0), linalg.basis_ket(2, 1)]
    U = np.eye(3) if setting == "beta" else u_gamma()
    switch = linalg.tensor_product(np.eye(3), dyad(rec[0])) + linalg.tensor_product(U, dyad(rec[1]))
    J = switch @ luders.J.matrix
    pointers = [
        ("D1", linalg.tensor_product(dyad(e[0]), dyad(rec[0]))),
        ("D2", linalg.tensor_product(dyad(e[1]), dyad(rec[1]))),
        ("D3", linalg.tensor_product(dyad(e[2]), dyad(rec[1]))),
    ]
    observable = three_level_observables()["B" if setting == "beta" else "C"]
    spec = observable_from_matrix(observable).spectral
    # detector j fires for the input U^dagger|j>; it reports the eigenvalue whose projector holds that state
    designated = {}
    for name, ej in zip(("D1", "D2", "D3"), e):
        source = U.conj().T @ ej
        designated[name] = max(spec.projectors, key=lambda p: float(np.real(np.vdot(source, p @ source))))
    return make_model(J, pointers, designated=designated)


A_GROUPS = {"+1": ["D1"], "-1": ["D2", "D3"]}


# --- EPR-Bohm ---------------------------------------------------------------


def singlet() -> np.ndarray:
    k = spin_half()
    return (linalg.tensor_product(k["z+"], k["z-"]) - linalg.tensor_product(k["z-"], k["z+"])) * SQRT_HALF


def pair_slot(axis: str) -> PDISlot:
    k = spin_half()
    single = [Event(f"{axis}{s}", ket_projector(k[f"{axis}{s}"])) for s in "+-"]
    return PDISlot(product_events(single, single))
