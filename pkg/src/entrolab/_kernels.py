"""Compiled inner loops for Bowen-ball neighbour search.

Orbits are passed as ``(T, N, d)`` float arrays.  Points are bucketed by a
mixed-radix key built from their epsilon-cells at a few "key times"; two
points in a common Bowen ball always have keys that differ by at most one
cell per key coordinate, so only ``3**D`` buckets are probed per query.
"""

import itertools

import numba as nb
import numpy as np

_UNBOUNDED = -1


def cell_index(orb, eps, periodic, lo, key_times):
    """Cell coordinates (N, D), per-coordinate cell counts and radices.

    Periodic axes get ``floor(1/eps)`` cells (cell side >= eps); fewer than
    three cells collapse to a single cell so wrapped offsets never alias.
    Planar axes get cells of side ``eps`` from the lower corner.  Returns
    ``None`` for the radix product when it would overflow int64.
    """
    T, N, d = orb.shape
    cols, ncell, rad = [], [], []
    for t in key_times:
        for k in range(d):
            x = orb[t, :, k]
            if periodic[k]:
                c = int(np.floor(1.0 / eps))
                if c < 3:
                    c = 1
                q = np.clip(np.floor(x * c).astype(np.int64), 0, c - 1)
                cols.append(q)
                ncell.append(c)
                rad.append(c)
            else:
                q = np.floor((x - lo[k]) / eps).astype(np.int64)
                q = np.maximum(q, 0)
                cols.append(q)
                ncell.append(_UNBOUNDED)
                rad.append(int(q.max(initial=0)) + 2)
    cells = np.stack(cols, axis=1) if cols else np.zeros((N, 0), np.int64)
    total = 1.0
    for r in rad:
        total *= r
    if total >= 2.0**62:
        return cells, np.array(ncell, np.int64), None
    return cells, np.array(ncell, np.int64), np.array(rad, np.int64)


def choose_key_times(T):
    return [0] if T == 1 else [0, T - 1]


def build_index(orb, eps, periodic, lo):
    """Pick key times whose radix fits in int64 and return the sorted index."""
    T = orb.shape[0]
    for key_times in (choose_key_times(T), [0]):
        cells, ncell, rad = cell_index(orb, eps, periodic, lo, key_times)
        if rad is not None:
            keys = _keys(cells, rad)
            order = np.argsort(keys, kind="mergesort")
            return key_times, cells, ncell, rad, keys[order], order.astype(np.int64)
    raise OverflowError("cell index does not fit in int64")


@nb.njit(cache=True, nogil=True)
def _keys(cells, rad):
    N, D = cells.shape
    out = np.empty(N, np.int64)
    for i in range(N):
        kk = 0
        for j in range(D):
            kk = kk * rad[j] + cells[i, j]
        out[i] = kk
    return out


@nb.njit(cache=True, nogil=True)
def _close(orbA, i, orbB, j, eps, periodic):
    T = orbA.shape[0]
    d = orbA.shape[2]
    for t in range(T):
        for k in range(d):
            a = abs(orbA[t, i, k] - orbB[t, j, k])
            if periodic[k]:
                b = 1.0 - a
                if b < a:
                    a = b
            if not (a <= eps):
                return False
    return True


def offset_table(D):
    """All ``3**D`` neighbour offsets in {-1, 0, 1}^D."""
    return np.array(list(itertools.product((-1, 0, 1), repeat=D)), dtype=np.int64).reshape(-1, D)


@nb.njit(cache=True, nogil=True)
def _probe_key(cell_row, offs, ncell, rad):
    """Key of the neighbouring bucket at ``offs``, or -1 if it falls off the grid."""
    D = cell_row.shape[0]
    kk = 0
    for j in range(D):
        c = cell_row[j] + offs[j]
        if ncell[j] == _UNBOUNDED:
            if c < 0 or c >= rad[j]:
                return -1
        elif ncell[j] == 1:
            if offs[j] != 0:
                return -1
            c = 0
        else:
            c = c % ncell[j]
        kk = kk * rad[j] + c
    return kk


@nb.njit(cache=True, nogil=True)
def greedy_separated(orb, eps, periodic, cells, ncell, rad, sorted_keys, order, offsets):
    """Greedy maximal (T, eps)-separated subset in index order.

    Returns ``(count, chosen_mask, isolated)`` where ``isolated`` is true when
    no accepted ball contained a second point, i.e. every point is its own
    ball at this horizon (and, by monotonicity, at every longer one).
    """
    N = orb.shape[1]
    marked = np.zeros(N, np.bool_)
    chosen = np.zeros(N, np.bool_)
    count = 0
    isolated = True
    noff = offsets.shape[0]
    for i in range(N):
        if marked[i]:
            continue
        count += 1
        marked[i] = True
        chosen[i] = True
        for o in range(noff):
            kk = _probe_key(cells[i], offsets[o], ncell, rad)
            if kk < 0:
                continue
            a = np.searchsorted(sorted_keys, kk)
            while a < N and sorted_keys[a] == kk:
                j = order[a]
                a += 1
                if marked[j]:
                    continue
                if _close(orb, i, orb, j, eps, periodic):
                    marked[j] = True
                    isolated = False
    return count, chosen, isolated


@nb.njit(cache=True, nogil=True)
def ball_members(orbA, orbB, eps, periodic, cellsA, ncell, rad, sorted_keysB, orderB, offsets):
    """CSR lists of the points of B inside the Bowen ball of each point of A."""
    NA = orbA.shape[1]
    NB = orbB.shape[1]
    noff = offsets.shape[0]
    indptr = np.zeros(NA + 1, np.int64)
    cap = max(16, NA * 4)
    idx = np.empty(cap, np.int64)
    n = 0
    for i in range(NA):
        start = n
        for o in range(noff):
            kk = _probe_key(cellsA[i], offsets[o], ncell, rad)
            if kk < 0:
                continue
            a = np.searchsorted(sorted_keysB, kk)
            while a < NB and sorted_keysB[a] == kk:
                j = orderB[a]
                a += 1
                if _close(orbA, i, orbB, j, eps, periodic):
                    if n == cap:
                        cap *= 2
                        grown = np.empty(cap, np.int64)
                        grown[:n] = idx[:n]
                        idx = grown
                    idx[n] = j
                    n += 1
        idx[start:n] = np.sort(idx[start:n])
        indptr[i + 1] = n
    return indptr, idx[:n].copy()
