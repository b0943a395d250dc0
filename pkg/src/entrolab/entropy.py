"""Topological entropy from finite point clouds.

Dynamical balls, greedy spanning and separated counts, cover entropy,
growth-rate fits, tail entropy and expansiveness profiles.  Every greedy
routine breaks ties by point-cloud index, so results depend only on the
cloud's provenance.
"""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .dynamics import orbit, two_sided_orbit
from .exceptions import NotInvertibleError, PreconditionError

BALL_MODES = ("forward", "two_sided", "forward_infinite", "two_sided_infinite")


@dataclass(frozen=True)
class BallSpec:
    """Time window and radius of a dynamical ball.

    ``forward`` uses times ``0..n-1`` and ``two_sided`` uses ``|j| < n``.
    The ``*_infinite`` modes stand in for infinite horizons, truncated at
    ``horizon`` (times ``0..T`` or ``|j| <= T``).
    """

    epsilon: float
    n: int = 1
    mode: str = "forward"
    horizon: Optional[int] = None

    def __post_init__(self):
        if self.mode not in BALL_MODES:
            raise PreconditionError(f"unknown ball mode {self.mode!r}")
        if not self.epsilon > 0:
            raise PreconditionError("epsilon must be positive")
        if self.n < 1:
            raise PreconditionError("n must be >= 1")
        if self.mode.endswith("infinite") and (self.horizon is None or self.horizon < 1):
            raise PreconditionError("infinite modes need a horizon T >= 1")

    @property
    def two_sided(self):
        return self.mode.startswith("two_sided")

    def times(self):
        if self.mode == "forward":
            return range(self.n)
        if self.mode == "two_sided":
            return range(-(self.n - 1), self.n)
        if self.mode == "forward_infinite":
            return range(self.horizon + 1)
        return range(-self.horizon, self.horizon + 1)


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Finite sample of phase space with a reproducible provenance."""

    points: np.ndarray
    provenance: dict = field(default_factory=lambda: {"kind": "explicit"})

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.points, dtype=float))
        P.setflags(write=False)
        object.__setattr__(self, "points", P)

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def mesh(self):
        return self.provenance.get("mesh")

    @classmethod
    def grid(cls, m, per_axis):
        """Regular grid with ``per_axis`` points per coordinate, lexicographic order.

        On the torus the nodes are ``j / per_axis``; on a planar box they are
        cell centres.
        """
        per_axis = int(per_axis)
        if per_axis < 1:
            raise PreconditionError("per_axis must be >= 1")
        lo, hi = m.bounds()
        axes = []
        for k in range(m.dim):
            j = np.arange(per_axis, dtype=float)
            if m.periodic:
                axes.append(j / per_axis)
            else:
                axes.append(lo[k] + (j + 0.5) * (hi[k] - lo[k]) / per_axis)
        P = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m.dim)
        mesh = float(np.max((hi - lo) / per_axis))
        return cls(P, {"kind": "grid", "per_axis": per_axis, "mesh": mesh})

    @classmethod
    def random(cls, m, count, seed):
        """``count`` uniform points from a seeded PCG64 stream."""
        if seed is None:
            raise PreconditionError("random point clouds need a seed")
        rng = np.random.default_rng(seed)
        lo, hi = m.bounds()
        P = lo + (hi - lo) * rng.random((int(count), m.dim))
        return cls(P, {"kind": "random", "seed": int(seed), "count": int(count)})

    def subset(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        return PointCloud(self.points[idx], {"kind": "subset", "parent": dict(self.provenance),
                                             "size": int(idx.size)})


@dataclass(frozen=True)
class CountCurve:
    """Counts ``(n, count)`` against orbit length for one radius."""

    entries: Tuple[Tuple[int, int], ...]
    kind: str
    epsilon: Optional[float] = None

    def __post_init__(self):
        ns = [e[0] for e in self.entries]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise PreconditionError("curve lengths must be strictly increasing")
        if any(c < 1 for _, c in self.entries):
            raise PreconditionError("counts must be >= 1")

    @property
    def ns(self):
        return np.array([e[0] for e in self.entries], dtype=np.int64)

    @property
    def counts(self):
        return np.array([e[1] for e in self.entries], dtype=np.int64)


@dataclass(frozen=True)
class GrowthFit:
    rate: float
    residual: float
    max_increment: float
    window: Tuple[int, int]


@dataclass(frozen=True)
class EntropyEstimate:
    """Entropy value in nats per iterate plus everything needed to audit it."""

    value: float
    epsilon_schedule: Tuple[float, ...]
    n_window: Tuple[int, int]
    fit_residual: float
    bound: str = "lower"
    per_epsilon: Tuple[dict, ...] = ()
    curves: Tuple[CountCurve, ...] = ()

    def __post_init__(self):
        if self.bound not in ("upper", "lower", "point"):
            raise PreconditionError(f"unknown bound direction {self.bound!r}")
        if self.value < 0 or self.fit_residual < 0:
            raise PreconditionError("entropy value and residual must be nonnegative")


# ---------------------------------------------------------------------------
# dynamical balls


def _orbit_over(m, X, spec):
    if spec.two_sided:
        if not m.invertible:
            raise NotInvertibleError("two-sided balls need an invertible map")
        T = spec.horizon if spec.mode == "two_sided_infinite" else spec.n - 1
        return two_sided_orbit(m, X, T)
    T = spec.horizon + 1 if spec.mode == "forward_infinite" else spec.n
    return orbit(m, X, T)


def in_dynamical_ball(m, x, y, spec):
    """True iff ``d(f^j x, f^j y) <= epsilon`` at every time of ``spec``.

    An escaped iterate of either point makes the test fail.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.array_equal(x, y) and np.all(np.isfinite(x)):
        if spec.two_sided and not m.invertible:
            raise NotInvertibleError("two-sided balls need an invertible map")
        return True
    ox = _orbit_over(m, x, spec)
    oy = _orbit_over(m, y, spec)
    d = m.distance(ox, oy)
    return bool(np.all(d <= spec.epsilon))


# ---------------------------------------------------------------------------
# separated and spanning counts


def _periodic_flags(m):
    return np.full(m.dim, bool(m.periodic))


def _finite_rows(orb):
    return np.all(np.isfinite(orb), axis=(0, 2))


def _separated_from_orbit(m, orb, eps):
    """Greedy separated count on an orbit array; returns (count, chosen_idx, isolated)."""
    keep = _finite_rows(orb)
    idx = np.flatnonzero(keep)
    if idx.size == 0:
        return 0, idx, True
    sub = np.ascontiguousarray(orb[:, idx, :])
    lo, _ = m.bounds()
    _, cells, ncell, rad, skeys, order = _kernels.build_index(sub, eps, _periodic_flags(m), lo)
    offs = _kernels.offset_table(cells.shape[1])
    count, chosen, isolated = _kernels.greedy_separated(
        sub, float(eps), _periodic_flags(m), cells, ncell, rad, skeys, order, offs
    )
    return int(count), idx[chosen], bool(isolated)


def separated_count(m, K, n, eps):
    """Size of the greedy maximal ``(n, eps)``-separated subset of ``K``.

    Points are scanned in index order and accepted unless they fall in the
    Bowen ball of an already accepted point, so the result is a lower bound
    on ``s_n(K, eps)``.  Escaped planar orbits are left out.
    """
    if len(K) == 0:
        raise PreconditionError("K must be nonempty")
    orb = orbit(m, K.points, int(n))
    return _separated_from_orbit(m, orb, eps)[0]


def separated_curve(m, K, n_max, eps):
    """Greedy separated counts for ``n = 1..n_max``.

    Once no Bowen ball contains two points every longer horizon gives the
    same count, so the remaining entries are filled without recomputation.
    """
    if len(K) == 0:
        raise PreconditionError("K must be nonempty")
    orb = orbit(m, K.points, int(n_max))
    entries = []
    isolated = False
    last = None
    for n in range(1, n_max + 1):
        if isolated and m.periodic:
            entries.append((n, last))
            continue
        count, _, isolated = _separated_from_orbit(m, orb[:n], eps)
        if count == 0:
            break
        entries.append((n, count))
        last = count
    return CountCurve(tuple(entries), "separated_lower", float(eps))


def _cross_index(m, orbA, orbB, eps):
    both = np.concatenate([orbA, orbB], axis=1)
    lo, _ = m.bounds()
    key_times = _kernels.choose_key_times(both.shape[0])
    cells, ncell, rad = _kernels.cell_index(both, eps, _periodic_flags(m), lo, key_times)
    if rad is None:
        cells, ncell, rad = _kernels.cell_index(both, eps, _periodic_flags(m), lo, [0])
    na = orbA.shape[1]
    cellsA = np.ascontiguousarray(cells[:na])
    keysB = _kernels._keys(np.ascontiguousarray(cells[na:]), rad)
    order = np.argsort(keysB, kind="mergesort").astype(np.int64)
    return cellsA, ncell, rad, keysB[order], order


def ball_membership(m, centers, K, n, eps):
    """For each centre, the sorted indices of ``K`` inside its ``(n, eps)`` Bowen ball.

    Returned as CSR arrays ``(indptr, indices)``.
    """
    orbA = np.ascontiguousarray(orbit(m, centers.points, int(n)))
    orbB = np.ascontiguousarray(orbit(m, K.points, int(n)))
    cellsA, ncell, rad, skeys, order = _cross_index(m, orbA, orbB, eps)
    offs = _kernels.offset_table(cellsA.shape[1])
    return _kernels.ball_members(orbA, orbB, float(eps), _periodic_flags(m), cellsA,
                                 ncell, rad, skeys, order, offs)


def greedy_set_cover(indptr, indices, n_items, weights=None):
    """Greedy set cover over CSR sets; ties go to the lowest set index.

    Returns the chosen set indices in pick order.  Items no set covers are
    ignored.
    """
    n_sets = len(indptr) - 1
    w = np.ones(n_items, dtype=np.int64) if weights is None else np.asarray(weights, np.int64)
    covered = np.zeros(n_items, dtype=bool)
    reachable = np.zeros(n_items, dtype=bool)
    reachable[indices] = True
    remaining = int(w[reachable].sum())
    heap = []
    for s in range(n_sets):
        gain = int(w[indices[indptr[s]:indptr[s + 1]]].sum())
        if gain:
            heap.append((-gain, s))
    heapq.heapify(heap)
    chosen = []
    while remaining > 0 and heap:
        neg, s = heapq.heappop(heap)
        members = indices[indptr[s]:indptr[s + 1]]
        fresh = members[~covered[members]]
        gain = int(w[fresh].sum())
        if gain == 0:
            continue
        if gain != -neg:
            heapq.heappush(heap, (-gain, s))
            continue
        chosen.append(s)
        covered[fresh] = True
        remaining -= gain
    return chosen


def spanning_count(m, K, n, eps, centers=None):
    """Size of a greedy ``(n, eps)``-spanning set for ``K``.

    Centres are drawn from ``centers`` (default: ``K`` itself); the greedy
    set cover picks, at each step, the centre whose Bowen ball holds the most
    uncovered points of ``K``.  Any spanning set bounds the minimum from
    above, so this is an upper bound on ``r_n(K, eps)`` with centres
    restricted to the candidate cloud.
    """
    if len(K) == 0:
        raise PreconditionError("K must be nonempty")
    centers = K if centers is None else centers
    indptr, indices = ball_membership(m, centers, K, n, eps)
    covered = np.zeros(len(K), dtype=bool)
    covered[indices] = True
    if m.periodic and not covered.all():
        raise PreconditionError("candidate centres do not span K")
    return len(greedy_set_cover(indptr, indices, len(K)))


# ---------------------------------------------------------------------------
# growth rates and entropy estimates


def growth_rate(curve, window=None):
    """Least-squares slope of ``log count`` against ``n`` over ``window``.

    ``window`` is an inclusive ``(n_lo, n_hi)`` pair; the default is the
    whole curve.  Also reports the RMS residual and the largest successive
    increment of ``log count``.
    """
    ns, counts = curve.ns, curve.counts
    if window is None:
        window = (int(ns[0]), int(ns[-1])) if len(ns) else (0, -1)
    lo, hi = window
    sel = (ns >= lo) & (ns <= hi)
    if sel.sum() < 2:
        raise PreconditionError(f"window {window} holds fewer than two curve entries")
    n = ns[sel].astype(float)
    y = np.log(counts[sel].astype(float))
    y = y - y[0]
    nc = n - n.mean()
    slope = float(np.dot(nc, y - y.mean()) / np.dot(nc, nc)) if np.any(y) else 0.0
    resid = y - (y.mean() + slope * nc)
    rms = float(np.sqrt(np.mean(resid**2))) if np.any(y) else 0.0
    inc = np.diff(y) / np.diff(n)
    return GrowthFit(slope, rms, float(inc.max()), (int(n[0]), int(n[-1])))


def fit_window(curve, n_points, n_min=2, saturation=0.1):
    """Tail window ``[n_min, n_hi]`` ending before counts reach ``saturation * n_points``.

    Counts on a finite cloud stop growing once they approach the cloud size,
    so the fit is restricted to the unsaturated range.  Falls back to the
    first two admissible entries when saturation is immediate.
    """
    ns, counts = curve.ns, curve.counts
    ok = ns >= n_min
    if ok.sum() < 2:
        ok = np.ones_like(ns, dtype=bool)
    if ok.sum() < 2:
        raise PreconditionError("curve needs at least two entries for a fit")
    cand = ns[ok]
    below = counts[ok] <= saturation * n_points
    hi_idx = 0
    while hi_idx + 1 < len(cand) and below[hi_idx + 1]:
        hi_idx += 1
    if hi_idx < 1:
        hi_idx = 1
    return int(cand[0]), int(cand[hi_idx])


def _map_ordered(fn, items, workers):
    items = list(items)
    if workers is None or workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=int(workers)) as ex:
        return list(ex.map(fn, items))


def entropy_estimate(m, K, epsilon_schedule, n_max, *, n_min=2, saturation=0.1, workers=1):
    """Separated-set entropy estimate (a lower-bound surrogate).

    For each radius, builds the greedy separated curve for ``n = 1..n_max``
    and fits its growth over the unsaturated tail window.  The headline value
    is the rate at the smallest radius; the whole schedule is kept for
    convergence inspection.
    """
    schedule = tuple(float(e) for e in epsilon_schedule)
    if not schedule:
        raise PreconditionError("epsilon schedule is empty")
    if any(e <= 0 for e in schedule):
        raise PreconditionError("epsilon values must be positive")
    mesh = K.mesh
    if mesh is not None and mesh > min(schedule) / 4 + 1e-15:
        raise PreconditionError(
            f"grid mesh {mesh:g} is coarser than min(epsilon)/4 = {min(schedule) / 4:g}"
        )
    if n_max < 2:
        raise PreconditionError("n_max must be >= 2")

    curves = _map_ordered(lambda e: separated_curve(m, K, n_max, e), schedule, workers)
    per = []
    for e, curve in zip(schedule, curves):
        win = fit_window(curve, len(K), n_min=n_min, saturation=saturation)
        fit = growth_rate(curve, win)
        per.append({"epsilon": e, "rate": fit.rate, "window": list(fit.window),
                    "residual": fit.residual, "max_increment": fit.max_increment})
    best = int(np.argmin(schedule))
    head = per[best]
    return EntropyEstimate(
        value=max(head["rate"], 0.0),
        epsilon_schedule=schedule,
        n_window=tuple(head["window"]),
        fit_residual=head["residual"],
        bound="lower",
        per_epsilon=tuple(per),
        curves=tuple(curves),
    )


# ---------------------------------------------------------------------------
# open covers


@dataclass(frozen=True)
class OpenBox:
    """Product of open arcs ``(lo_k, hi_k)`` on the circle factors of the torus.

    An arc may wrap (``hi > 1``); an arc of length >= 1 is the whole circle.
    """

    lows: Tuple[float, ...]
    highs: Tuple[float, ...]

    def contains(self, X):
        X = np.asarray(X, dtype=float)
        inside = np.ones(X.shape[:-1], dtype=bool)
        for k, (lo, hi) in enumerate(zip(self.lows, self.highs)):
            if hi - lo >= 1.0:
                continue
            r = np.mod(X[..., k] - lo, 1.0)
            inside &= (r > 0.0) & (r < hi - lo)
        return inside

    @property
    def diameter(self):
        return max(min(hi - lo, 0.5) for lo, hi in zip(self.lows, self.highs))


def box_cover(d, per_axis, overlap=1e-9, axes=None):
    """Regular cover by open boxes slightly fattened past the ``1/per_axis`` grid.

    ``axes`` restricts the subdivision to some coordinates; the others are
    left whole.
    """
    axes = range(d) if axes is None else list(axes)
    arcs = []
    for k in range(d):
        if k in axes:
            arcs.append([(j / per_axis - overlap, (j + 1) / per_axis + overlap)
                         for j in range(per_axis)])
        else:
            arcs.append([(0.0, 1.0)])
    cover = []
    for combo in np.ndindex(*[len(a) for a in arcs]):
        lows = tuple(arcs[k][c][0] for k, c in enumerate(combo))
        highs = tuple(arcs[k][c][1] for k, c in enumerate(combo))
        cover.append(OpenBox(lows, highs))
    return cover


def cover_entropy(m, cover, n, grid_per_axis=256):
    """Greedy subcover size of the join ``beta^n`` and its rate ``log(count)/n``.

    The phase space is replaced by an evaluation grid.  A join element
    ``A_0 ∩ f^{-1}A_1 ∩ ... ∩ f^{-n+1}A_{n-1}`` is named by its word of
    box indices; candidate elements are the words obtained by sending every
    grid point to its lowest-index box at each time, and a greedy set cover
    picks a subcover of the grid among them.
    """
    if not m.periodic:
        raise PreconditionError("cover entropy needs a toral map")
    n = int(n)
    if n < 1:
        raise PreconditionError("n must be >= 1")
    G = PointCloud.grid(m, grid_per_axis)
    orb = orbit(m, G.points, n)
    B = len(cover)
    member = np.stack([np.stack([box.contains(orb[t]) for box in cover], axis=-1)
                       for t in range(n)], axis=1)  # (N, n, B)
    if not member[:, 0, :].any(axis=1).all():
        raise PreconditionError("cover does not cover the evaluation grid")

    # collapse grid points with identical membership patterns
    packed = np.packbits(member.reshape(member.shape[0], -1), axis=1)
    patterns, inverse, multiplicity = np.unique(packed, axis=0, return_inverse=True,
                                                return_counts=True)
    inverse = np.asarray(inverse).reshape(-1)
    first = np.zeros(len(patterns), dtype=np.int64)
    first[inverse[::-1]] = np.arange(len(inverse))[::-1]
    pat_member = member[first]  # (P, n, B)

    canon = np.argmax(pat_member, axis=2)  # lowest box index at each time
    words, word_of_pattern = np.unique(canon, axis=0, return_inverse=True)
    word_id = {tuple(w): i for i, w in enumerate(words.tolist())}
    prefixes = [set() for _ in range(n + 1)]
    for w in words.tolist():
        for t in range(n + 1):
            prefixes[t].add(tuple(w[:t]))

    # words covering each pattern, by depth-first search pruned on prefixes
    word_members = [[] for _ in range(len(words))]
    for p in range(len(patterns)):
        opts = [np.flatnonzero(pat_member[p, t]).tolist() for t in range(n)]
        stack = [()]
        while stack:
            pre = stack.pop()
            t = len(pre)
            if t == n:
                word_members[word_id[pre]].append(p)
                continue
            for b in opts[t]:
                nxt = pre + (b,)
                if nxt in prefixes[t + 1]:
                    stack.append(nxt)
    indptr = np.zeros(len(words) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(wm) for wm in word_members])
    indices = np.array([p for wm in word_members for p in sorted(wm)], dtype=np.int64)
    chosen = greedy_set_cover(indptr, indices, len(patterns), weights=multiplicity)
    count = len(chosen)
    return count, math.log(count) / n


# ---------------------------------------------------------------------------
# tail entropy and expansiveness


@dataclass(frozen=True)
class TailEstimate:
    rate: float
    candidates: int
    curve: CountCurve
    horizon: int


def candidate_set(m, x, K, eps, T, two_sided=True):
    """Indices of ``K`` in the truncated infinite ball of ``x`` (times ``|j| <= T``).

    Forward-only when ``two_sided`` is false.  Filtering is progressive, so
    only survivors are iterated.
    """
    x = np.asarray(x, dtype=float)
    P = K.points
    idx = np.flatnonzero(m.distance(P, x) <= eps)
    directions = [m, m.inverse] if two_sided else [m]
    if two_sided and not m.invertible:
        raise NotInvertibleError("two-sided candidate sets need an invertible map")
    for step in directions:
        cur_y = P[idx]
        cur_x = x
        for _ in range(T):
            if idx.size == 0:
                break
            cur_y = step(cur_y)
            cur_x = step(cur_x)
            keep = m.distance(cur_y, cur_x) <= eps
            idx = idx[keep]
            cur_y = cur_y[keep]
    return idx


def _tail(m, x, eps, T, beta, K):
    if beta > eps / 4 + 1e-15:
        raise PreconditionError("beta must be <= epsilon / 4")
    x = np.asarray(x, dtype=float)
    idx = candidate_set(m, x, K, eps, T, two_sided=m.invertible)
    Y = K.points[idx]
    Y = Y[np.any(Y != x, axis=1)]
    Yc = PointCloud(np.vstack([x[None, :], Y]), {"kind": "candidates", "size": len(Y) + 1})
    if len(Yc) == 1:
        curve = CountCurve(tuple((n, 1) for n in range(1, T + 1)), "separated_lower", beta)
        return TailEstimate(0.0, 1, curve, T)
    curve = separated_curve(m, Yc, T, beta)
    if len(curve.entries) < 2:
        return TailEstimate(0.0, len(Yc), curve, T)
    return TailEstimate(max(growth_rate(curve).rate, 0.0), len(Yc), curve, T)


def tail_entropy(m, x, eps, T, beta, K):
    """Growth rate of separated counts inside the truncated two-sided ball of ``x``.

    The candidate set is ``{x}`` together with the points of ``K`` that stay
    ``eps``-close to ``x`` for ``|j| <= T`` (forward times only for
    non-invertible maps); its ``(n, beta)``-separated counts for
    ``n = 1..T`` are fitted by :func:`growth_rate`.
    """
    return _tail(m, x, eps, T, beta, K).rate


def expansiveness_profile(m, epsilon_list, samples, K, *, T=20, beta=None,
                          weighting="sup", workers=1, return_details=False):
    """Aggregate tail entropy over sample points for each radius.

    ``weighting="sup"`` takes the maximum over ``samples`` (a point cloud);
    ``"empirical_measure"`` expects an orbit-supported empirical measure and
    takes the maximum over its atoms, which is the essential supremum for
    that measure.  Values are reported raw, without monotone smoothing.
    ``beta`` defaults to ``min(epsilon_list) / 4`` and is shared by every
    radius so candidate sets are nested.
    """
    eps_list = [float(e) for e in epsilon_list]
    if any(b > a for a, b in zip(eps_list, eps_list[1:])):
        raise PreconditionError("epsilon_list must be decreasing")
    if weighting == "sup":
        pts = samples.points if isinstance(samples, PointCloud) else np.asarray(samples, float)
    elif weighting == "empirical_measure":
        if not hasattr(samples, "support_orbit"):
            raise PreconditionError("empirical_measure weighting needs an EmpiricalMeasure")
        pts = samples.support_orbit
    else:
        raise PreconditionError(f"unknown weighting {weighting!r}")
    beta = min(eps_list) / 4 if beta is None else float(beta)

    tasks = [(e, i) for e in eps_list for i in range(len(pts))]
    results = _map_ordered(lambda t: _tail(m, pts[t[1]], t[0], T, beta, K), tasks, workers)
    profile, details = [], []
    for j, e in enumerate(eps_list):
        block = results[j * len(pts):(j + 1) * len(pts)]
        h = max(r.rate for r in block)
        profile.append((e, h))
        details.append({"epsilon": e, "h_star": h, "beta": beta, "horizon": T,
                        "max_candidates": max(r.candidates for r in block),
                        "mean_candidates": float(np.mean([r.candidates for r in block]))})
    if return_details:
        return profile, details
    return profile
