"""Integer homology actions of toral maps and the entropy-conjecture report.

For the torus ``T^m`` the action on ``H_k`` is the ``k``-th exterior power
of the lift matrix.  Exterior-power indices are ``k``-subsets of
``range(m)`` in lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Tuple

import mpmath
import numpy as np

from .exceptions import PreconditionError

POWER_MAX_ITER = 10_000
RESIDUAL_TOL = 1e-10
ROOT_FALLBACK_MAX_SIZE = 6


def _as_int_rows(A):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise PreconditionError("expected a square matrix")
    rows = [[v for v in row] for row in A]
    if not all(float(v).is_integer() if not isinstance(v, (int, np.integer)) else True
               for row in rows for v in row):
        raise PreconditionError("expected an integer matrix")
    return [[int(v) for v in row] for row in rows]


def integer_det(rows):
    """Exact determinant of an integer matrix (fraction-free Bareiss elimination)."""
    M = [list(r) for r in rows]
    n = len(M)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def _pack(rows):
    flat = [v for r in rows for v in r]
    big = any(abs(v) >= 2**62 for v in flat)
    return np.array(rows, dtype=object if big else np.int64).reshape(len(rows), -1)


def exterior_power(A, k):
    """Matrix of ``k x k`` minors of ``A`` (rows and columns in lexicographic subset order)."""
    rows = _as_int_rows(A)
    m = len(rows)
    k = int(k)
    if not 0 <= k <= m:
        raise PreconditionError(f"k must lie in [0, {m}], got {k}")
    subsets = list(combinations(range(m), k))
    out = [[integer_det([[rows[i][j] for j in J] for i in I]) for J in subsets]
           for I in subsets]
    return _pack(out)


def integer_charpoly(A):
    """Coefficients of ``det(tI - A)``, highest degree first (Faddeev-LeVerrier, exact)."""
    rows = _as_int_rows(A)
    n = len(rows)
    coeffs = [1]
    M = [[0] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{k-1} I
        M = [[sum(rows[i][t] * M[t][j] for t in range(n)) + (coeffs[-1] if i == j else 0)
              for j in range(n)] for i in range(n)]
        tr = sum(sum(rows[i][t] * M[t][i] for t in range(n)) for i in range(n))
        coeffs.append(-tr // k)
    return coeffs


def _power_iteration(B, v):
    nrm = np.linalg.norm(v)
    v = v / nrm
    scale = max(np.abs(B).max(), 1.0)
    last = np.inf
    mu, res = 0.0, np.inf
    for it in range(1, POWER_MAX_ITER + 1):
        w = B @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0, 0.0
        v = w / nw
        if it % 16 and it != POWER_MAX_ITER:
            continue
        w = B @ v
        mu = float(v @ w) / float(v @ v)
        res = float(np.linalg.norm(w - mu * v)) / scale
        if res <= RESIDUAL_TOL:
            break
        # no dominant eigenvalue (complex pair, Jordan block, ...): stop early
        if it % 256 == 0:
            if res > 0.5 * last:
                break
            last = res
    return abs(mu), res


def _root_radius(B):
    n = B.shape[0]
    if n <= ROOT_FALLBACK_MAX_SIZE:
        if np.all(B == np.round(B)):
            coeffs = integer_charpoly(np.round(B).astype(np.int64))
        else:
            coeffs = list(np.poly(B))
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()  # zero roots do not affect the radius
        if len(coeffs) == 1:
            return 0.0
        try:
            with mpmath.workdps(50):
                roots = mpmath.polyroots(coeffs, maxsteps=500, extraprec=200)
                return float(max(abs(r) for r in roots))
        except mpmath.libmp.NoConvergence:
            pass
    return float(np.max(np.abs(np.linalg.eigvals(B))))


def spectral_radius(B):
    """Largest eigenvalue modulus.

    Power iteration runs from the all-ones vector and again from a fixed
    pseudo-random vector (guarding a start orthogonal to the dominant
    direction).  When either run leaves a Rayleigh residual above
    ``RESIDUAL_TOL`` or the runs disagree, the radius comes from the roots of
    the characteristic polynomial (``size <= 6``) or a dense eigensolver.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise PreconditionError("expected a square matrix")
    n = B.shape[0]
    if n == 0 or not np.any(B):
        return 0.0
    r1, res1 = _power_iteration(B, np.ones(n))
    r2, res2 = _power_iteration(B, np.random.default_rng(12345).standard_normal(n))
    if max(res1, res2) <= RESIDUAL_TOL and abs(r1 - r2) <= 1e-9 * max(1.0, r1):
        return max(r1, r2)
    return _root_radius(B)


@dataclass(frozen=True)
class HomologyAction:
    m: int
    matrices: Tuple[np.ndarray, ...]
    spectral_radii: Tuple[float, ...]

    @property
    def sp_f_star(self):
        return max(self.spectral_radii)

    @property
    def log_sp(self):
        return float(np.log(self.sp_f_star))


def homology_action(m):
    """All exterior powers of the lift matrix and their spectral radii.

    Only toral maps have a lift; other maps raise ``UnavailableError``.
    """
    A = m.lift_matrix()
    d = A.shape[0]
    mats = tuple(exterior_power(A, k) for k in range(d + 1))
    radii = tuple(spectral_radius(M.astype(float)) for M in mats)
    return HomologyAction(d, mats, radii)


VERDICTS = ("holds_within_tolerance", "violated_beyond_tolerance", "inconclusive")


@dataclass(frozen=True)
class ConjectureReport:
    log_sp: float
    entropy: object
    margin: float
    verdict: str
    tolerance: float


def conjecture_report(m, h, tolerance=0.15):
    """Compare ``log sp(f_*)`` with an entropy estimate ``h``.

    ``h`` is an :class:`~entrolab.entropy.EntropyEstimate` (or a bare number,
    treated as a lower bound).  A lower bound that falls short of ``log sp``
    is reported as inconclusive, never as a violation.
    """
    action = homology_action(m)
    log_sp = action.log_sp
    value = float(getattr(h, "value", h))
    bound = getattr(h, "bound", "lower")
    margin = value - log_sp
    if margin >= -tolerance:
        verdict = "holds_within_tolerance"
    elif bound == "lower":
        verdict = "inconclusive"
    else:
        verdict = "violated_beyond_tolerance"
    return ConjectureReport(log_sp, h, margin, verdict, float(tolerance))
