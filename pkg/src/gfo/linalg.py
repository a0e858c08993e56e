"""Dense symmetric-matrix core: skew maps, Jacobi eigenvalues, PSD tests."""

from dataclasses import dataclass

import numpy as np

from . import _backend

# iterative eigen-solver is meant for toolkit-sized problems only
MAX_EIG_N = 64


class ConvergenceError(RuntimeError):
    """An iterative solve stopped before reaching its threshold."""


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def as_array(self):
        return np.array([self.x, self.y, self.z], dtype=float)


def vec3(v):
    """Coerce a Vec3 or any length-3 sequence to a finite float array."""
    if isinstance(v, Vec3):
        a = v.as_array()
    else:
        a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValueError("expected 3 components, got shape %s" % (a.shape,))
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite vector %s" % a)
    return a


class SymMatrix:
    """Square matrix kept exactly symmetric by mirroring on construction.

    Asymmetric input is averaged with its transpose, so only the symmetric
    part is ever observable.
    """

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("expected a square matrix, got shape %s" % (a.shape,))
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite entries")
        self.a = 0.5 * (a + a.T)
        self.n = a.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is not None:
            return self.a.astype(dtype)
        return self.a

    def __repr__(self):
        return "SymMatrix(%r)" % (self.a.tolist(),)


def _sym_array(m):
    if isinstance(m, SymMatrix):
        return m.a
    return SymMatrix(m).a


def skew(x):
    """Cross-product matrix of x: skew(x) @ v == cross(x, v)."""
    x1, x2, x3 = vec3(x)
    return np.array([[0.0, -x3, x2],
                     [x3, 0.0, -x1],
                     [-x2, x1, 0.0]])


def sym_eigvals(m):
    """All eigenvalues of a symmetric matrix, descending.

    Cyclic Jacobi rotations, run until the off-diagonal Frobenius norm
    drops below 1e-12 relative to max(1, |M|_F), at most 100 sweeps.
    """
    a = _sym_array(m)
    if a.shape[0] > MAX_EIG_N:
        raise ValueError("matrix order %d exceeds the supported %d"
                         % (a.shape[0], MAX_EIG_N))
    diag, ok = _backend.jacobi_eigvals(a)
    if not ok:
        raise ConvergenceError("Jacobi sweep cap hit before the off-diagonal "
                               "threshold; matrix order %d" % a.shape[0])
    return np.sort(diag)[::-1].copy()


def is_psd(m, tol=None):
    """Nonstrict PSD test: smallest eigenvalue >= -tol.

    Default tol is 1e-9 * (1 + max |entry|).
    """
    a = _sym_array(m)
    if tol is None:
        tol = 1e-9 * (1.0 + float(np.abs(a).max(initial=0.0)))
    if not np.isfinite(tol) or tol < 0.0:
        raise ValueError("tol must be finite and >= 0")
    vals = sym_eigvals(a)
    return bool(vals[-1] >= -tol)
