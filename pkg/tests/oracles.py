"""Hand-rolled reference computations used by the tests.

Nothing here imports from pmbits: operators are written out as nested lists
of Python complex numbers and applied to basis kets by their definition.
"""

import itertools

I2 = [[1, 0], [0, 1]]
SX = [[1, 0], [0, -1]]
SY = [[0, 1], [1, 0]]
SZ = [[0, -1j], [1j, 0]]
SINGLE = {"i": I2, "x": SX, "y": SY, "z": SZ}


def matmul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return [[sum(a[i][k] * b[k][j] for k in range(m)) for j in range(p)] for i in range(n)]


def kron(a, b):
    return [
        [a[i // 2][j // 2] * b[i % 2][j % 2] for j in range(4)]
        for i in range(4)
    ]


def two_spin(axis1, axis2):
    """sigma_axis1 (x) sigma_axis2 as a 4x4 nested list; 'i' for identity."""
    return kron(SINGLE[axis1], SINGLE[axis2])


def apply(op, vec):
    return [sum(op[i][k] * vec[k] for k in range(len(vec))) for i in range(len(op))]


# Peres-Mermin layout, label -> (row, col)
LAYOUT = {
    "X1": (1, 1), "X2": (1, 2), "X1X2": (1, 3),
    "Y2": (2, 1), "Y1": (2, 2), "Y1Y2": (2, 3),
    "X1Y2": (3, 1), "Y1X2": (3, 2), "Z1Z2": (3, 3),
}
ORDER = list(LAYOUT)


def lines():
    out = []
    for r in (1, 2, 3):
        out.append(([lab for lab in ORDER if LAYOUT[lab][0] == r], 1))
    for c in (1, 2, 3):
        out.append(([lab for lab in ORDER if LAYOUT[lab][1] == c], -1 if c == 3 else 1))
    return out


def brute_force_scores():
    """Score histogram over all 512 assignments, by integer bit pattern."""
    lns = lines()
    scores = []
    for bits in range(512):
        vals = {lab: (-1 if bits >> i & 1 else 1) for i, lab in enumerate(ORDER)}
        s = 0
        for labs, target in lns:
            prod = 1
            for lab in labs:
                prod *= vals[lab]
            s += prod == target
        scores.append(s)
    return scores


def all_pm1(n):
    return list(itertools.product((1, -1), repeat=n))
