"""Finite-time Lyapunov analysis, Pliss times and dominated splittings.

Cocycles are products of map Jacobians along orbits.  Long products are
kept in QR-factored form so growth of order ``e^{±steps}`` stays
representable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .exceptions import EscapedError, NotInvertibleError, NotPeriodicError, PreconditionError

REORTHO_EVERY = 8
_SAFE_LOG_NORM = 600.0


def _step(m, x, backward=False):
    y = m.inverse(x) if backward else m(x)
    if not np.all(np.isfinite(y)):
        raise EscapedError(f"orbit of {np.asarray(x).tolist()} escaped the domain box")
    return y


def _check_start(m, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (m.dim,):
        raise PreconditionError(f"expected a point of dimension {m.dim}")
    if not m.periodic and not np.all(m.contains(x)):
        raise EscapedError(f"point {x.tolist()} is outside the domain box")
    return x


def _backward_jacobian(m, y):
    """Jacobian of the inverse at ``y`` and the preimage ``f^{-1}(y)``."""
    x = _step(m, y, backward=True)
    return np.linalg.inv(m.jacobian(x)), x


@dataclass(frozen=True)
class FactoredCocycle:
    """Product ``q @ r_factors[-1] @ ... @ r_factors[0]`` of a long cocycle."""

    q: np.ndarray
    r_factors: Tuple[np.ndarray, ...]

    @property
    def log_diagonal(self):
        """Sum over factors of ``log |diag R|`` (the QR growth bookkeeping)."""
        return sum(np.log(np.abs(np.diag(r))) for r in self.r_factors)

    def matrix(self):
        """Multiply the factors out; may overflow for very long products."""
        out = np.eye(self.q.shape[0])
        for r in self.r_factors:
            out = r @ out
        return self.q @ out


def _qr_pos(M):
    Q, R = np.linalg.qr(M)
    s = np.sign(np.diag(R))
    s[s == 0] = 1.0
    return Q * s, (R.T * s).T


def cocycle_product(m, x, steps, direction="forward", factored=False):
    """Product of Jacobians along ``steps`` iterates of ``x``.

    ``direction="backward"`` multiplies Jacobians of the inverse map.  The
    raw matrix is returned while its entries stay representable; longer
    products (or ``factored=True``) come back as a :class:`FactoredCocycle`
    re-orthonormalized every ``REORTHO_EVERY`` steps.
    """
    if direction not in ("forward", "backward"):
        raise PreconditionError(f"unknown direction {direction!r}")
    backward = direction == "backward"
    if backward and not m.invertible:
        raise NotInvertibleError("backward cocycle needs an invertible map")
    x = _check_start(m, x)
    steps = int(steps)
    d = m.dim

    if not factored:
        P = np.eye(d)
        cur = x
        for _ in range(steps):
            if backward:
                J, cur = _backward_jacobian(m, cur)
            else:
                J = m.jacobian(cur)
                cur = _step(m, cur)
            P = J @ P
            if not np.all(np.isfinite(P)) or np.max(np.abs(P)) > np.exp(_SAFE_LOG_NORM):
                break
        else:
            return P

    Q = np.eye(d)
    block = np.eye(d)
    factors = []
    cur = x
    for k in range(steps):
        if backward:
            J, cur = _backward_jacobian(m, cur)
        else:
            J = m.jacobian(cur)
            cur = _step(m, cur)
        block = J @ block
        if (k + 1) % REORTHO_EVERY == 0 or k + 1 == steps:
            Q, R = _qr_pos(block @ Q)
            factors.append(R)
            block = np.eye(d)
    return FactoredCocycle(Q, tuple(factors))


@dataclass(frozen=True)
class LyapunovRun:
    exponents: np.ndarray  # sorted descending, nats per iterate
    log_det: float  # mean log|det Df| over the same iterates
    start: np.ndarray  # first measured orbit point (after the transient)
    iterates: int


def lyapunov_run(m, x, N, L=1, transient=16):
    """QR (Benettin) exponents over ``N * L`` iterates after ``transient`` warm-up steps.

    The warm-up aligns the orthonormal frame with the Oseledets filtration so
    the measured average is not biased by the initial frame.
    """
    x = _check_start(m, x)
    total = int(N) * int(L)
    if total < 1:
        raise PreconditionError("N * L must be >= 1")
    d = m.dim
    Q = np.eye(d)
    cur = x
    for _ in range(int(transient)):
        Q, _ = _qr_pos(m.jacobian(cur) @ Q)
        cur = _step(m, cur)
    start = cur.copy()
    acc = np.zeros(d)
    log_det = 0.0
    block = np.eye(d)
    for k in range(total):
        J = m.jacobian(cur)
        log_det += np.log(abs(np.linalg.det(J)))
        block = J @ block
        cur = _step(m, cur)
        if (k + 1) % REORTHO_EVERY == 0 or k + 1 == total or np.max(np.abs(block)) > 1e6:
            Q, R = _qr_pos(block @ Q)
            acc += np.log(np.abs(np.diag(R)))
            block = np.eye(d)
    ex = np.sort(acc / total)[::-1]
    return LyapunovRun(ex, log_det / total, start, total)


def finite_time_exponents(m, x, N, L=1, transient=16):
    """Finite-time Lyapunov exponents (per iterate, descending) over ``N`` blocks of ``L`` steps."""
    return lyapunov_run(m, x, N, L, transient).exponents


# ---------------------------------------------------------------------------
# Pliss times


@dataclass(frozen=True)
class PlissParams:
    a_star: float
    c1: float
    c2: float

    def __post_init__(self):
        if not (self.a_star <= self.c2 < self.c1):
            raise PreconditionError(
                f"need a_star <= c2 < c1, got {self.a_star}, {self.c2}, {self.c1}"
            )

    @property
    def theta(self):
        return (self.c1 - self.c2) / (self.c1 - self.a_star)


def pliss_theta(a_star, c1, c2):
    """Guaranteed density ``(c1 - c2) / (c1 - a_star)`` of Pliss times."""
    return PlissParams(a_star, c1, c2).theta


@dataclass(frozen=True)
class PlissResult:
    times: Tuple[int, ...]
    N: int
    theta: float
    hypothesis_holds: bool

    @property
    def count_l(self):
        return len(self.times)

    @property
    def hypothesis_violated(self):
        return not self.hypothesis_holds


def pliss_times(a, params):
    """All indices ``k`` in ``1..N`` such that every partial sum ending at ``k`` obeys the ``c1`` slack.

    ``k`` qualifies iff ``sum(a[n+1..k]) <= c1 * (k - n)`` for every
    ``0 <= n < k``, i.e. the prefix sum of ``a_i - c1`` at ``k`` is no larger
    than any earlier prefix sum (equality accepted).
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise PreconditionError("sequence must be one-dimensional")
    if np.any(a < params.a_star):
        raise PreconditionError("some a_i lies below a_star")
    N = a.size
    times = []
    prefix = 0.0
    running_min = 0.0
    for k in range(N):
        prefix += a[k] - params.c1
        if prefix <= running_min:
            times.append(k + 1)
            running_min = prefix
    holds = bool(a.sum() <= params.c2 * N)
    return PlissResult(tuple(times), N, params.theta, holds)


# ---------------------------------------------------------------------------
# domination


def _as_frames(frames, npts, d):
    F = np.asarray(frames, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    if F.ndim == 2:
        F = np.broadcast_to(F, (npts,) + F.shape)
    if F.shape[0] != npts or F.shape[1] != d:
        raise PreconditionError(f"frames must have shape ({npts}, {d}, k)")
    k = F.shape[2]
    if k == 0:
        raise PreconditionError("degenerate frame: empty subspace")
    gram = np.einsum("nik,nil->nkl", F, F)
    if not np.allclose(gram, np.eye(k), atol=1e-8):
        raise PreconditionError("degenerate frame: columns are not orthonormal")
    return F


def _unit_samples(k, n_random, rng):
    """Frame basis vectors plus ``n_random`` random unit combinations, as columns."""
    if k == 1:
        return np.ones((1, 1))
    R = rng.standard_normal((k, n_random))
    R /= np.linalg.norm(R, axis=0)
    return np.hstack([np.eye(k), R])


def domination_margin(m, orbit_points, L, low_frames, high_frames, method="sampled",
                      n_random=32, seed=0):
    """Worst ratio ``(|D^L u|/|u|) / (|D^L v|/|v|)`` over orbit points, ``u`` low, ``v`` high.

    Domination at scale ``L`` holds empirically iff the result is below 1/2.

    ``method="sampled"`` uses the frame vectors plus ``n_random`` seeded unit
    combinations in each subspace, a lower bound on the true sup;
    ``"frame"`` uses the frame vectors only and ``"exact"`` uses the extreme
    singular values of the restricted cocycle.
    """
    P = np.atleast_2d(np.asarray(orbit_points, dtype=float))
    npts, d = P.shape
    Fl = _as_frames(low_frames, npts, d)
    Fh = _as_frames(high_frames, npts, d)
    rng = np.random.default_rng(seed)
    Ul = _unit_samples(Fl.shape[2], n_random, rng)
    Uh = _unit_samples(Fh.shape[2], n_random, rng)
    if method == "frame":
        Ul, Uh = np.eye(Fl.shape[2]), np.eye(Fh.shape[2])
    worst = -np.inf
    for i in range(npts):
        D = cocycle_product(m, P[i], L)
        if isinstance(D, FactoredCocycle):
            D = D.matrix()
        A, B = D @ Fl[i], D @ Fh[i]
        if method == "exact":
            up = np.linalg.svd(A, compute_uv=False)[0]
            down = np.linalg.svd(B, compute_uv=False)[-1]
        else:
            up = np.max(np.linalg.norm(A @ Ul, axis=0) / np.linalg.norm(Fl[i] @ Ul, axis=0))
            down = np.min(np.linalg.norm(B @ Uh, axis=0) / np.linalg.norm(Fh[i] @ Uh, axis=0))
        worst = max(worst, up / down)
    return float(worst)


def _orth(M):
    Q, _ = _qr_pos(M)
    return Q


def _intersection(F12, F23, k):
    if k == 0:
        return np.zeros((F12.shape[0], 0))
    U, s, Vt = np.linalg.svd(F12.T @ F23)
    return _orth(F23 @ Vt[:k].T)


@dataclass
class SplittingEstimate:
    dims: Tuple[int, int, int]
    bundles: Dict[str, np.ndarray]  # name -> (npts, d, k) frames along the orbit
    orbit: np.ndarray  # (npts, d)
    L: int
    margin: float
    margins: Dict[str, float]
    lambda0: float
    L0: int
    exponents: np.ndarray
    failed: bool = False

    @property
    def center_at_most_one(self):
        """Splitting succeeded with a centre bundle of dimension 0 or 1."""
        return (not self.failed) and self.dims[1] <= 1

    @property
    def dominated(self):
        return bool(np.isfinite(self.margin) and self.margin < 0.5)


def _sweeps(m, x, total, padding, d1, d3):
    """Forward and backward QR sweeps; frames at orbit indices ``0..total``."""
    d = m.dim
    pts = [x]
    cur = x
    for _ in range(total + padding):
        cur = _step(m, cur)
        pts.append(cur)
    # backward sweep from the far future gives the most contracted directions
    Qb = np.eye(d)
    back = [None] * (total + 1)
    for k in range(total + padding, 0, -1):
        Jinv = np.linalg.inv(m.jacobian(pts[k - 1]))
        Qb = _orth(Jinv @ Qb)
        if k - 1 <= total:
            back[k - 1] = Qb
    # forward sweep from the far past gives the most expanded directions
    Qf = np.eye(d)
    if m.invertible:
        cur = x
        past = []
        for _ in range(padding):
            cur = _step(m, cur, backward=True)
            past.append(cur)
        for p in reversed(past):
            Qf = _orth(m.jacobian(p) @ Qf)
    fwd = [None] * (total + 1)
    for k in range(total + 1):
        fwd[k] = Qf
        Qf = _orth(m.jacobian(pts[k]) @ Qf)
    return np.array(pts[: total + 1]), np.array(back), np.array(fwd)


def estimate_splitting(m, x, N, L=1, threshold=None, padding=64, transient=16):
    """Numerical stable/centre/unstable splitting along the orbit of ``x``.

    Dimensions come from thresholding finite-time exponents at
    ``±threshold`` (default ``0.1 / L``).  ``E1`` is spanned by the leading
    vectors of a QR sweep run backward from the far future, ``E3`` by those
    of a forward sweep from the far past, and ``E2`` by the intersection of
    the complementary sweep spans.  Margins are reported for the pairs
    ``(E1, E2+E3)`` and ``(E1+E2, E3)`` at scale ``L``.  An exponent within
    ``threshold / 2`` of the cut marks the classification as failed and puts
    everything in ``E2``.
    """
    x = _check_start(m, x)
    N, L = int(N), int(L)
    thr = 0.1 / L if threshold is None else float(threshold)
    d = m.dim
    ex = finite_time_exponents(m, x, N, L, transient)
    failed = bool(np.any(np.abs(np.abs(ex) - thr) < thr / 2))
    if failed:
        d1, d2, d3 = 0, d, 0
    else:
        d1 = int(np.sum(ex < -thr))
        d3 = int(np.sum(ex > thr))
        d2 = d - d1 - d3
    total = N * L
    pts, back, fwd = _sweeps(m, x, total, padding, d1, d3)
    E1 = back[:, :, :d1]
    E3 = fwd[:, :, :d3]
    E12 = back[:, :, : d1 + d2]
    E23 = fwd[:, :, : d2 + d3]
    E2 = np.array([_intersection(E12[i], E23[i], d2) for i in range(len(pts))])
    bundles = {"E1": E1, "E2": E2, "E3": E3}

    block_idx = np.arange(0, total, L)
    margins = {}
    if d1 > 0 and d2 + d3 > 0:
        margins["E1|E23"] = domination_margin(m, pts[block_idx], L, E1[block_idx],
                                              E23[block_idx])
    if d3 > 0 and d1 + d2 > 0:
        margins["E12|E3"] = domination_margin(m, pts[block_idx], L, E12[block_idx],
                                              E3[block_idx])
    margin = max(margins.values()) if margins else float("nan")
    rates = []
    if d1:
        rates.append(-ex[d - d1])
    if d3:
        rates.append(ex[d3 - 1])
    lambda0 = float(min(rates) * L) if rates else 0.0
    return SplittingEstimate((d1, d2, d3), bundles, pts, L, float(margin), margins,
                             lambda0, L, ex, failed)


def stable_frame(m, p, k, padding=64):
    """Leading ``k`` directions at ``p`` of a QR sweep run backward from ``f^padding(p)``."""
    pts = [np.asarray(p, dtype=float)]
    for _ in range(padding):
        pts.append(_step(m, pts[-1]))
    Q = np.eye(m.dim)
    for q in reversed(pts[:-1]):
        Q = _orth(np.linalg.inv(m.jacobian(q)) @ Q)
    return Q[:, :k]


def unstable_frame(m, p, k, padding=64):
    """Leading ``k`` directions at ``p`` of a QR sweep run forward from ``f^{-padding}(p)``."""
    if not m.invertible:
        raise NotInvertibleError("unstable frames need the backward orbit")
    pts = [np.asarray(p, dtype=float)]
    for _ in range(padding):
        pts.append(_step(m, pts[-1], backward=True))
    Q = np.eye(m.dim)
    for q in reversed(pts[1:]):
        Q = _orth(m.jacobian(q) @ Q)
    return Q[:, :k]


def _frame_at(frames, i, point):
    if callable(frames):
        return np.asarray(frames(point, i), dtype=float)
    F = np.asarray(frames, dtype=float)
    if F.ndim == 1:
        return F[:, None]
    if F.ndim == 2:
        return F
    if i - 1 >= F.shape[0]:
        raise PreconditionError(f"missing frame for orbit point {i}")
    return F[i - 1]


def bundle_log_norms(m, x, frames, L0, N, direction):
    """``log ||D g^{±L0} | E||`` at the ``N`` orbit points the averaged criterion samples.

    ``forward_on_E1`` evaluates ``D g^{L0}`` on frames at ``g^{-i L0}(x)``;
    ``backward_on_E3`` evaluates ``D g^{-L0}`` on frames at ``g^{i L0}(x)``,
    for ``i = 1..N``.  ``frames`` is a constant frame, an ``(N, d, k)`` stack
    indexed by ``i - 1``, or a callable ``(point, i) -> frame``.
    """
    x = _check_start(m, x)
    if direction not in ("forward_on_E1", "backward_on_E3"):
        raise PreconditionError(f"unknown direction {direction!r}")
    if direction == "forward_on_E1" and not m.invertible:
        raise NotInvertibleError("forward_on_E1 samples the backward orbit")
    back = direction == "forward_on_E1"
    out = np.empty(int(N))
    cur = x
    for i in range(1, int(N) + 1):
        for _ in range(int(L0)):
            cur = _step(m, cur, backward=back)
        F = _frame_at(frames, i, cur)
        if F.ndim != 2 or F.shape[0] != m.dim or F.shape[1] == 0:
            raise PreconditionError(f"frame at orbit point {i} must have shape ({m.dim}, k >= 1)")
        if not np.allclose(F.T @ F, np.eye(F.shape[1]), atol=1e-8):
            raise PreconditionError(f"degenerate frame at orbit point {i}")
        D = cocycle_product(m, cur, L0, "forward" if back else "backward")
        if isinstance(D, FactoredCocycle):
            D = D.matrix()
        out[i - 1] = np.log(np.linalg.svd(D @ F, compute_uv=False)[0])
    return out


def averaged_contraction(m, x, frames, L0, lambda0, N, direction):
    """True iff the mean of :func:`bundle_log_norms` is at most ``-lambda0``."""
    return bool(np.mean(bundle_log_norms(m, x, frames, L0, N, direction)) <= -lambda0)


# ---------------------------------------------------------------------------
# periodic orbits


@dataclass(frozen=True)
class PeriodicAnalysis:
    period: int
    exponents: np.ndarray  # descending
    eigenvalues: np.ndarray
    gamma_gap: float
    center_count: int
    passes_gap: bool
    dims: Tuple[int, int, int]  # (below -gamma, within, above gamma)


def periodic_orbit_analysis(m, p, claimed_period, gamma, tol=1e-9):
    """Exponents of a periodic orbit and the single-centre-exponent gap test.

    Passes iff at most one exponent lies in ``[-gamma, gamma]`` and, when one
    does, its eigenvalue is real and simple.
    """
    p = _check_start(m, p)
    period = int(claimed_period)
    if period < 1:
        raise PreconditionError("period must be >= 1")
    q = p
    for _ in range(period):
        q = _step(m, q)
    if float(m.distance(q, p)) > tol:
        raise NotPeriodicError(f"f^{period}(p) misses p by {float(m.distance(q, p)):.3g}")
    P = cocycle_product(m, p, period)
    if isinstance(P, FactoredCocycle):
        P = P.matrix()
    eig = np.linalg.eigvals(P)
    ex = np.log(np.abs(eig)) / period
    order = np.argsort(-ex, kind="stable")
    eig, ex = eig[order], ex[order]
    center = np.flatnonzero(np.abs(ex) <= gamma)
    passes = len(center) <= 1
    if len(center) == 1:
        lam = eig[center[0]]
        scale = max(1.0, abs(lam))
        real = abs(lam.imag) <= 1e-9 * scale
        others = np.delete(eig, center[0])
        simple = bool(np.all(np.abs(others - lam) > 1e-9 * scale))
        passes = real and simple
    dims = (int(np.sum(ex < -gamma)), int(len(center)), int(np.sum(ex > gamma)))
    return PeriodicAnalysis(period, ex, eig, float(gamma), int(len(center)), bool(passes), dims)
