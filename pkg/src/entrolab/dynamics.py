"""Phase spaces, metrics and the map zoo.

Every map is a frozen dataclass that evaluates on arrays of shape ``(..., d)``
so whole point clouds can be iterated at once.  Toral points live in
``[0, 1)^d``; planar points live in an axis-aligned domain box and are
replaced by ``nan`` once they leave it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .exceptions import EscapedError, NotInvertibleError, PreconditionError, UnavailableError

TWO_PI = 2.0 * np.pi


def wrap_unit(y):
    """Reduce ``y`` mod 1 into ``[0, 1)``.

    ``np.mod`` returns exactly 1.0 for tiny negative inputs; those are folded
    back to 0.0 so the half-open invariant holds.
    """
    r = np.mod(y, 1.0)
    return np.where(r >= 1.0, 0.0, r)


def torus_distance(x, y):
    """Sup quotient metric on the torus.

    Broadcasts over leading axes; the last axis holds coordinates.

    >>> float(torus_distance([0.1, 0.0], [0.9, 0.0]))
    0.2
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise PreconditionError(
            f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}"
        )
    a = np.abs(x - y)
    return np.max(np.minimum(a, 1.0 - a), axis=-1)


def plane_distance(x, y):
    """Sup metric on the plane; ``nan`` (escaped) coordinates give ``nan``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise PreconditionError(
            f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}"
        )
    return np.max(np.abs(x - y), axis=-1)


def _frozen_array(a, dtype):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


class MapSpec:
    """Common interface of the map zoo.

    Subclasses provide ``__call__``, ``jacobian`` and (when invertible)
    ``inverse``, all on arrays of shape ``(..., d)``.
    """

    dim: int
    periodic = True
    invertible = True
    label = "map"

    def __call__(self, X):
        raise NotImplementedError

    def jacobian(self, X):
        raise NotImplementedError

    def inverse(self, X):
        raise NotInvertibleError(f"{type(self).__name__} has no inverse")

    def lift_matrix(self):
        raise UnavailableError(f"{type(self).__name__} has no toral lift")

    def distance(self, x, y):
        if self.periodic:
            return torus_distance(x, y)
        return plane_distance(x, y)

    def contains(self, X):
        """Boolean mask of points inside the phase space."""
        X = np.asarray(X, dtype=float)
        return np.all((X >= 0.0) & (X < 1.0), axis=-1)

    def bounds(self):
        """Lower and upper corners of the phase space."""
        return np.zeros(self.dim), np.ones(self.dim)

    def to_config(self):
        """Flat dict describing the map, used in report echoes."""
        raise NotImplementedError


def _check_unimodular(matrix):
    A = np.asarray(matrix)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise PreconditionError("toral matrix must be square")
    if not np.all(np.equal(np.round(A), A)):
        raise PreconditionError("toral matrix must have integer entries")
    A = np.round(A).astype(np.int64)
    det = int(round(np.linalg.det(A)))
    if abs(det) != 1:
        raise PreconditionError(f"toral matrix must have |det| = 1, got det = {det}")
    return A


@dataclass(frozen=True, eq=False)
class ToralAutomorphism(MapSpec):
    """Linear automorphism ``x -> A x mod 1`` for an integer ``A`` with ``|det A| = 1``."""

    matrix: np.ndarray
    label: str = "toral"

    def __post_init__(self):
        A = _check_unimodular(self.matrix)
        object.__setattr__(self, "matrix", _frozen_array(A, np.int64))
        inv = np.round(np.linalg.inv(A)).astype(np.int64)
        object.__setattr__(self, "_inv", _frozen_array(inv, np.int64))
        object.__setattr__(self, "_Af", self.matrix.astype(float))
        object.__setattr__(self, "_invf", inv.astype(float))

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        return wrap_unit(X @ self._Af.T)

    def jacobian(self, X):
        X = np.asarray(X, dtype=float)
        return np.broadcast_to(self._Af, X.shape[:-1] + self._Af.shape).copy()

    def inverse(self, X):
        X = np.asarray(X, dtype=float)
        return wrap_unit(X @ self._invf.T)

    def lift_matrix(self):
        return self.matrix.copy()

    def to_config(self):
        return {"kind": "toral", "matrix": self.matrix.tolist()}


@dataclass(frozen=True, eq=False)
class Rotation(MapSpec):
    """Translation ``x -> x + angles mod 1``."""

    angles: np.ndarray
    label: str = "rotation"

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.angles, dtype=float))
        object.__setattr__(self, "angles", _frozen_array(a, float))

    @property
    def dim(self):
        return self.angles.shape[0]

    def __call__(self, X):
        return wrap_unit(np.asarray(X, dtype=float) + self.angles)

    def jacobian(self, X):
        X = np.asarray(X, dtype=float)
        return np.broadcast_to(np.eye(self.dim), X.shape[:-1] + (self.dim, self.dim)).copy()

    def inverse(self, X):
        return wrap_unit(np.asarray(X, dtype=float) - self.angles)

    def lift_matrix(self):
        return np.eye(self.dim, dtype=np.int64)

    def to_config(self):
        return {"kind": "rotation", "angles": self.angles.tolist()}


@dataclass(frozen=True, eq=False)
class StandardMap(MapSpec):
    """Chirikov standard map on the two-torus.

    ``x' = x + y + (K/2pi) sin(2 pi x)``, ``y' = y + (K/2pi) sin(2 pi x)``.
    """

    K: float
    label: str = "standard"

    @property
    def dim(self):
        return 2

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        x, y = X[..., 0], X[..., 1]
        kick = self.K / TWO_PI * np.sin(TWO_PI * x)
        yn = y + kick
        return wrap_unit(np.stack([x + yn, yn], axis=-1))

    def jacobian(self, X):
        X = np.asarray(X, dtype=float)
        s = self.K * np.cos(TWO_PI * X[..., 0])
        J = np.empty(X.shape[:-1] + (2, 2))
        J[..., 0, 0] = 1.0 + s
        J[..., 0, 1] = 1.0
        J[..., 1, 0] = s
        J[..., 1, 1] = 1.0
        return J

    def inverse(self, X):
        X = np.asarray(X, dtype=float)
        xp, yp = X[..., 0], X[..., 1]
        x = wrap_unit(xp - yp)
        y = yp - self.K / TWO_PI * np.sin(TWO_PI * x)
        return wrap_unit(np.stack([x, y], axis=-1))

    def lift_matrix(self):
        # the lift satisfies F(p + e1) = F(p) + (1, 0), F(p + e2) = F(p) + (1, 1)
        return np.array([[1, 1], [0, 1]], dtype=np.int64)

    def to_config(self):
        return {"kind": "standard", "K": float(self.K)}


@dataclass(frozen=True, eq=False)
class Henon(MapSpec):
    """Hénon map ``(x, y) -> (1 - a x^2 + y, b x)`` on a domain box.

    Points outside ``domain_box`` are escaped; the vectorized evaluators
    return ``nan`` rows for them.
    """

    a: float = 1.4
    b: float = 0.3
    domain_box: Tuple[Tuple[float, float], Tuple[float, float]] = ((-1.8, 1.8), (-1.8, 1.8))
    label: str = "henon"
    periodic = False

    def __post_init__(self):
        box = tuple(tuple(float(v) for v in side) for side in self.domain_box)
        if len(box) != 2 or any(lo >= hi for lo, hi in box):
            raise PreconditionError("domain_box must be two (lo, hi) pairs with lo < hi")
        object.__setattr__(self, "domain_box", box)

    @property
    def dim(self):
        return 2

    @property
    def invertible(self):
        return self.b != 0.0

    def bounds(self):
        box = np.array(self.domain_box)
        return box[:, 0].copy(), box[:, 1].copy()

    def contains(self, X):
        X = np.asarray(X, dtype=float)
        lo, hi = self.bounds()
        return np.all((X >= lo) & (X <= hi), axis=-1)

    def escaped(self, X):
        return ~self.contains(X)

    def _mask(self, X, out):
        bad = ~self.contains(X)
        if np.any(bad):
            out = np.array(out, dtype=float)
            out[bad] = np.nan
        return out

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        x, y = X[..., 0], X[..., 1]
        out = np.stack([1.0 - self.a * x * x + y, self.b * x], axis=-1)
        return self._mask(X, out)

    def jacobian(self, X):
        X = np.asarray(X, dtype=float)
        J = np.empty(X.shape[:-1] + (2, 2))
        J[..., 0, 0] = -2.0 * self.a * X[..., 0]
        J[..., 0, 1] = 1.0
        J[..., 1, 0] = self.b
        J[..., 1, 1] = 0.0
        J[~self.contains(X)] = np.nan
        return J

    def inverse(self, X):
        if not self.invertible:
            raise NotInvertibleError("Hénon map with b = 0 is not invertible")
        X = np.asarray(X, dtype=float)
        xp, yp = X[..., 0], X[..., 1]
        x = yp / self.b
        y = xp - 1.0 + self.a * x * x
        return self._mask(X, np.stack([x, y], axis=-1))

    def to_config(self):
        return {"kind": "henon", "a": float(self.a), "b": float(self.b),
                "domain_box": [list(s) for s in self.domain_box]}


@dataclass(frozen=True, eq=False)
class PerturbedToral(MapSpec):
    """Toral automorphism plus the additive kick ``eta * sin(2 pi x_{i+1})``.

    In two dimensions the kick is ``eta * (sin 2 pi x2, sin 2 pi x1)``; in
    general coordinate ``i`` is kicked by coordinate ``(i + 1) mod d``.
    With ``eta == 0`` the map is bit-for-bit the base automorphism.
    """

    matrix: np.ndarray
    eta: float = 0.0
    shape: str = "sin_swap"
    label: str = "perturbed"
    inverse_tol: float = 1e-15

    def __post_init__(self):
        if self.shape != "sin_swap":
            raise PreconditionError(f"unknown perturbation shape {self.shape!r}")
        object.__setattr__(self, "_base", ToralAutomorphism(self.matrix))
        object.__setattr__(self, "matrix", self._base.matrix)
        object.__setattr__(self, "eta", float(self.eta))
        d = self.matrix.shape[0]
        object.__setattr__(self, "_shift", np.roll(np.arange(d), -1))

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def base(self):
        return self._base

    def _kick(self, X):
        return self.eta * np.sin(TWO_PI * X[..., self._shift])

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        if self.eta == 0.0:
            return self._base(X)
        return wrap_unit(X @ self._base._Af.T + self._kick(X))

    def jacobian(self, X):
        X = np.asarray(X, dtype=float)
        J = self._base.jacobian(X)
        if self.eta == 0.0:
            return J
        d = self.dim
        c = self.eta * TWO_PI * np.cos(TWO_PI * X[..., self._shift])
        rows = np.arange(d)
        J[..., rows, self._shift] += c
        return J

    def inverse(self, X):
        X = np.asarray(X, dtype=float)
        if self.eta == 0.0:
            return self._base.inverse(X)
        # solve A y + kick(y) = X (mod 1): contraction y -> A^{-1}(X - kick(y))
        Ainv = self._base._invf
        y = wrap_unit(X @ Ainv.T)
        for _ in range(200):
            resid = X - (y @ self._base._Af.T + self._kick(y))
            resid = resid - np.round(resid)
            step = resid @ Ainv.T
            y = y + step
            if np.max(np.abs(step), initial=0.0) < self.inverse_tol:
                break
        # Newton polish removes the linear-rate tail of the fixed-point iteration
        for _ in range(3):
            resid = X - (y @ self._base._Af.T + self._kick(y))
            resid = resid - np.round(resid)
            J = self.jacobian(y)
            y = y + np.linalg.solve(J, resid[..., None])[..., 0]
        return wrap_unit(y)

    def lift_matrix(self):
        return self.matrix.copy()

    def to_config(self):
        return {"kind": "perturbed", "matrix": self.matrix.tolist(), "eta": self.eta,
                "shape": self.shape}


def cat_map():
    """Arnold's cat map ``[[2, 1], [1, 1]]``."""
    return ToralAutomorphism([[2, 1], [1, 1]], label="cat")


def identity_map(d=2):
    return ToralAutomorphism(np.eye(d, dtype=np.int64), label="identity")


def make_map(kind, **params):
    """Build a zoo map from a kind name and keyword parameters."""
    kind = kind.lower()
    if kind in ("toral", "toral_automorphism"):
        return ToralAutomorphism(params["matrix"])
    if kind == "cat":
        return cat_map()
    if kind == "identity":
        return identity_map(int(params.get("dim", 2)))
    if kind == "rotation":
        return Rotation(params["angles"])
    if kind == "standard":
        return StandardMap(float(params["K"]))
    if kind == "henon":
        kw = {k: params[k] for k in ("a", "b", "domain_box") if k in params}
        return Henon(**kw)
    if kind == "perturbed":
        return PerturbedToral(params["matrix"], eta=float(params.get("eta", 0.0)))
    raise PreconditionError(f"unknown map kind {kind!r}")


def _check_point(m, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != m.dim:
        raise PreconditionError(f"point has dimension {x.shape[-1]}, map has {m.dim}")
    if not m.periodic and not np.all(m.contains(x)):
        raise EscapedError(f"point {x.tolist()} is outside the domain box")
    return x


def map_eval(m, x):
    """Apply ``m`` once.  Escaped planar inputs raise :class:`EscapedError`."""
    return m(_check_point(m, x))


def map_jacobian(m, x):
    """Analytic Jacobian of ``m`` at ``x``."""
    return m.jacobian(_check_point(m, x))


def map_inverse(m, x):
    if not m.invertible:
        raise NotInvertibleError(f"{type(m).__name__} is not invertible")
    return m.inverse(_check_point(m, x))


def lift_matrix(m):
    """Integer matrix of the induced action on the first homology of the torus."""
    return m.lift_matrix()


def orbit(m, X, n, backward=False):
    """Stack ``X, f(X), ..., f^{n-1}(X)`` into an array of shape ``(n, *X.shape)``.

    With ``backward=True`` iterates the inverse instead.  Escaped planar
    points become ``nan`` from the first time they sit outside the box.
    """
    X = np.asarray(X, dtype=float)
    step = m.inverse if backward else m
    if backward and not m.invertible:
        raise NotInvertibleError(f"{type(m).__name__} is not invertible")
    out = np.empty((n,) + X.shape)
    cur = X
    if not m.periodic:
        cur = np.where(m.contains(cur)[..., None], cur, np.nan)
    for t in range(n):
        out[t] = cur
        if t + 1 < n:
            cur = step(cur)
            if not m.periodic:
                cur = np.where(m.contains(cur)[..., None], cur, np.nan)
    return out


def two_sided_orbit(m, X, horizon):
    """Orbit over times ``-horizon..horizon``; index ``horizon`` is time 0."""
    fwd = orbit(m, X, horizon + 1)
    if horizon == 0:
        return fwd
    bwd = orbit(m, X, horizon + 1, backward=True)
    return np.concatenate([bwd[:0:-1], fwd], axis=0)
