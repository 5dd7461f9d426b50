"""Reference values computed with plain Python complex arithmetic.

Nothing here imports numpy or histq, so these numbers are independent of the
code under test.  The frozen constants at the bottom were produced by running
this module and are asserted against the oracle functions in test_oracles.py.
"""

from __future__ import annotations

import cmath
import math

S = math.sqrt(0.5)
OMEGA = cmath.exp(2j * math.pi / 3)


def matmul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return [[sum(a[i][k] * b[k][j] for k in range(m)) for j in range(p)] for i in range(n)]


def matvec(a, v):
    return [sum(a[i][k] * v[k] for k in range(len(v))) for i in range(len(a))]


def sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def max_entry(a):
    return max(abs(x) for row in a for x in row)


def inner(a, b):
    return sum(x.conjugate() * y for x, y in zip(a, b))


def outer(a, b):
    return [[x * y.conjugate() for y in b] for x in a]


def dagger(a):
    return [[a[j][i].conjugate() for j in range(len(a))] for i in range(len(a[0]))]


def identity(n):
    return [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]


# --- three-level observables ----------------------------------------------------

B = [[0.5, 0, 0], [0, 1, 0], [0, 0, -1]]
C = [[2, 0, 0], [0, 0, 1], [0, 1, 0]]


def commutator_bc() -> float:
    return max_entry(sub(matmul(B, C), matmul(C, B)))


def swap_block_eigensystem():
    """Eigenpairs of [[0, 1], [1, 0]] by hand: +1 on (1, 1)/sqrt2, -1 on (1, -1)/sqrt2."""
    pairs = [(1.0, [S, S]), (-1.0, [S, -S])]
    m = [[0, 1], [1, 0]]
    for value, vec in pairs:
        image = matvec(m, vec)
        assert all(abs(x - value * y) < 1e-15 for x, y in zip(image, vec))
    return pairs


def c_spectrum():
    """C = 2|1><1| + (|2><3| + |3><2|): the 2x2 swap block gives +1 and -1."""
    out = [(2.0, [1, 0, 0])]
    for value, (a, b) in swap_block_eigensystem():
        out.append((value, [0, a, b]))
    return out


# --- spin half -------------------------------------------------------------------

ZP, ZM = [1 + 0j, 0j], [0j, 1 + 0j]
XP, XM = [S + 0j, S + 0j], [S + 0j, -S + 0j]


def overlap_sq(a, b) -> float:
    return abs(inner(a, b)) ** 2


def isometry_deficit(j) -> float:
    return max_entry(sub(matmul(dagger(j), j), identity(len(j[0]))))


def trine():
    return [
        [S + 0j, S + 0j],
        [OMEGA * S, OMEGA**2 * S],
        [OMEGA**2 * S, OMEGA * S],
    ]


def chain_ket(psi, steps):
    """Apply (propagator, projector) pairs in turn to psi."""
    v = list(psi)
    for t, p in steps:
        v = matvec(p, matvec(t, v))
    return v


def swapped_family_gram():
    """Brute-force Gram matrix for [x+] (.) {z+-} (.) {x+-} (.) {M+-} with J|z+> = |up>, J|z-> = |down>."""
    eye = identity(2)
    J = [[1, 0], [0, 1]]  # pointer basis |up>, |down> coincides with z+, z- coordinates
    z = {"z+": outer(ZP, ZP), "z-": outer(ZM, ZM)}
    x = {"x+": outer(XP, XP), "x-": outer(XM, XM)}
    m = {"+": outer(ZP, ZP), "-": outer(ZM, ZM)}
    labels, kets = [], []
    for a, pa in z.items():
        for b, pb in x.items():
            for c, pc in m.items():
                labels.append(f"{a},{b},{c}")
                kets.append(chain_ket(XP, [(eye, pa), (eye, pb), (J, pc)]))
    gram = [[inner(u, v) for v in kets] for u in kets]
    return labels, gram


def max_off_diagonal(gram) -> float:
    n = len(gram)
    return max(abs(gram[i][j]) for i in range(n) for j in range(n) if i != j)


def born(psi, phi) -> float:
    """|<phi|psi>|^2 for a normalized psi."""
    return abs(inner(phi, psi)) ** 2


def trine_preparation_norm(probs) -> float:
    """J^dagger J for J|psi1> = sum_k sqrt(p_k) |u_k> (x) |k> with orthonormal |k>: a 1x1 Gram."""
    u = trine()
    total = 0j
    for j in range(3):
        for k in range(3):
            pointer_overlap = 1.0 if j == k else 0.0
            total += math.sqrt(probs[j] * probs[k]) * inner(u[j], u[k]) * pointer_overlap
    return total.real


def trine_povm():
    """(2/3)[u^k] entry by entry."""
    return [[[2 / 3 * x * y.conjugate() for y in u] for x in u] for u in trine()]


def weak_povm(eps, ae, af, be, bf):
    """Q^{cj}_{ab} = conj(R_ca) R_cb conj(w_a[j]) w_b[j] for the weak probe coupling.

    Particle |a> couples the probe to w_a: w_A = (zeta, eta, 0), w_B = (zeta, 0, eta);
    R holds the coordinates of A and B in the E, F readout basis.
    """
    zeta, eta = math.sqrt(1 - eps), math.sqrt(eps)
    w = [[zeta, eta, 0.0], [zeta, 0.0, eta]]
    R = [[complex(ae), complex(be)], [complex(af), complex(bf)]]
    out = {}
    for c, name in enumerate("EF"):
        for j in range(3):
            out[f"{name}{j}"] = [
                [R[c][a].conjugate() * R[c][b] * w[a][j] * w[b][j] for b in range(2)] for a in range(2)
            ]
    return out


# --- frozen values --------------------------------------------------------------

COMMUTATOR_BC = 2.0
ZP_XP_OVERLAP_SQ = 0.5
DIAG_ISOMETRY_DEFICIT = 0.75
TRINE_OVERLAP_ABS = 0.5
SWAPPED_MAX_OFF_DIAGONAL = 0.125
SWAPPED_WORST_PAIR = ("z+,x+,+", "z+,x-,+")
PROBE_UNIFORM_PLUS = 1 / 3
TRINE_PREP_NORM = 1.0


if __name__ == "__main__":
    labels, gram = swapped_family_gram()
    print("[B, C] max entry", commutator_bc())
    print("|<z+|x+>|^2", overlap_sq(ZP, XP))
    print("diag(1, 0.5) deficit", isometry_deficit([[1, 0], [0, 0.5]]))
    print("|<u1|u2>|", abs(inner(trine()[0], trine()[1])))
    print("swapped max off-diagonal", max_off_diagonal(gram))
    print("uniform probe Pr(|1>)", born([1 / math.sqrt(3)] * 3, [1, 0, 0]))
    print("trine preparation J^dagger J", trine_preparation_norm([1 / 3] * 3))
