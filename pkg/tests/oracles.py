"""Independent reference computations used by the tests.

Nothing here calls the package's counting, fitting or algebra code.  The
oracles work from explicit formulas, exhaustive enumeration, exact rational
arithmetic or sympy.
"""

import math
from fractions import Fraction
from itertools import combinations, product

import numpy as np
import sympy

CAT = ((2, 1), (1, 1))
GOLDEN_STRETCH = (3 + math.sqrt(5)) / 2
LOG_CAT = math.log(GOLDEN_STRETCH)


def torus_sup(a, b):
    return max(min(abs(x - y), 1 - abs(x - y)) for x, y in zip(a, b))


def cat_step(p):
    x, y = p
    return ((2 * x + y) % 1.0, (x + y) % 1.0)


def standard_step(p, K):
    x, y = p
    yn = y + K / (2 * math.pi) * math.sin(2 * math.pi * x)
    return ((x + yn) % 1.0, yn % 1.0)


def henon_step(p, a=1.4, b=0.3):
    x, y = p
    return (1 - a * x * x + y, b * x)


# ---------------------------------------------------------------------------
# exhaustive spanning / separated sets on finite point sets


def orbits_of(step, pts, n):
    out = []
    for p in pts:
        seq = [tuple(p)]
        for _ in range(n - 1):
            seq.append(tuple(step(seq[-1])))
        out.append(seq)
    return out


def closeness(orbs_a, orbs_b, eps, dist=torus_sup):
    """``C[i][j]`` true iff orbit ``j`` of B stays within ``eps`` of orbit ``i`` of A."""
    return [[all(dist(p, q) <= eps for p, q in zip(oa, ob)) for ob in orbs_b] for oa in orbs_a]


def true_max_separated(C):
    """Largest subset with no member inside another's ball (brute force, decreasing size)."""
    N = len(C)
    for size in range(N, 0, -1):
        for S in combinations(range(N), size):
            if all(not C[i][j] for i, j in combinations(S, 2)):
                return size
    return 0


def true_min_spanning(C):
    """Smallest set of centres (rows of ``C``) whose balls cover every column."""
    M, N = len(C), len(C[0])
    full = (1 << N) - 1
    masks = [sum(1 << j for j in range(N) if C[i][j]) for i in range(M)]
    for size in range(1, M + 1):
        for S in combinations(range(M), size):
            acc = 0
            for i in S:
                acc |= masks[i]
            if acc == full:
                return size
    raise ValueError("no spanning set")


def compositions(n):
    """All time partitions ``0 = t_0 < ... < t_r = n``."""
    for cuts in product((0, 1), repeat=n - 1):
        ts = [0] + [i + 1 for i, c in enumerate(cuts) if c] + [n]
        yield ts


# ---------------------------------------------------------------------------
# Pliss times


def pliss_bruteforce(a, c1):
    """Indices ``k`` with ``sum(a[n+1..k]) <= c1 (k - n)`` for every ``0 <= n < k`` (exact)."""
    a = [Fraction(v) for v in a]
    c1 = Fraction(c1)
    out = []
    for k in range(1, len(a) + 1):
        if all(sum(a[n:k]) <= c1 * (k - n) for n in range(k)):
            out.append(k)
    return out


# ---------------------------------------------------------------------------
# algebra


def sympy_exterior_power(A, k):
    M = sympy.Matrix(A)
    m = M.shape[0]
    subs = list(combinations(range(m), k))
    if k == 0:
        return np.array([[1]], dtype=object)
    return np.array([[M.extract(list(I), list(J)).det() for J in subs] for I in subs], dtype=object)


def charpoly_root_moduli(A):
    """Moduli of the roots of ``det(tI - A)`` via sympy's exact polynomial, numerically rooted."""
    t = sympy.symbols("t")
    poly = sympy.Matrix(A).charpoly(t)
    coeffs = [float(c) for c in poly.all_coeffs()]
    roots = np.roots(coeffs) if len(coeffs) > 1 else np.array([])
    return np.sort(np.abs(roots))[::-1]


def least_squares_slope(xs, ys):
    xs = [Fraction(x) for x in xs]
    ys = [Fraction(y) for y in ys]
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    return float(sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs))
