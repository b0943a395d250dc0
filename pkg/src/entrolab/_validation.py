"""Input checks shared by the estimator wrappers."""

import numpy as np
from sklearn.utils.validation import check_array

from .dynamics import MapSpec
from .exceptions import EscapedError, PreconditionError


def check_map(m):
    if not isinstance(m, MapSpec):
        raise PreconditionError(f"expected a MapSpec, got {type(m).__name__}")
    return m


def check_points(X, m):
    """2-D float array of phase-space points for map ``m``; planar points must lie in the box."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != m.dim:
        raise PreconditionError(f"points have {X.shape[1]} coordinates, map has dimension {m.dim}")
    if not m.periodic and not np.all(m.contains(X)):
        raise EscapedError("some points lie outside the domain box")
    return X


def check_window(window):
    lo, hi = (int(v) for v in window)
    if not 1 <= lo < hi:
        raise PreconditionError(f"invalid window {window!r}")
    return lo, hi
