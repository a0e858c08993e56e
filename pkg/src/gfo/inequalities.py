"""Linear and bilinear matrix inequalities, SDP lifting, rank-1 recovery."""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .linalg import SymMatrix, is_psd, sym_eigvals


class RankDeficit(RuntimeError):
    """Lifted solution is not rank-1; carries the spectral ratio."""

    def __init__(self, residual):
        super().__init__("lifted block is not rank-1: ratio %.3e" % residual)
        self.residual = residual


def _coerce(m):
    return m if isinstance(m, SymMatrix) else SymMatrix(m)


class Lmi:
    """F0 + sum_i x_i * Fi, constrained PSD ('geq') or NSD ('leq')."""

    def __init__(self, f0, fi, sense="geq"):
        if sense not in ("geq", "leq"):
            raise ValueError("sense must be 'geq' or 'leq', got %r" % (sense,))
        self.f0 = _coerce(f0)
        self.fi = [_coerce(f) for f in fi]
        self.sense = sense
        self.n = self.f0.n
        self.n_vars = len(self.fi)
        for f in self.fi:
            if f.n != self.n:
                raise ValueError("coefficient order %d does not match F0 order %d"
                                 % (f.n, self.n))


class Bmi:
    """F0 + sum_i x_i Fi + sum_ij x_i x_j Fij, PSD sense.

    Only the symmetric part of the Fij grid is observable through the double
    sum, so (Fij, Fji) pairs are folded to their average on construction.
    """

    def __init__(self, f0, fi, fij):
        self.f0 = _coerce(f0)
        self.fi = [_coerce(f) for f in fi]
        self.n = self.f0.n
        self.n_vars = len(self.fi)
        if len(fij) != self.n_vars or any(len(row) != self.n_vars for row in fij):
            raise ValueError("Fij grid must be %d x %d" % (self.n_vars, self.n_vars))
        raw = [[_coerce(m).a for m in row] for row in fij]
        self.fij = [[SymMatrix(0.5 * (raw[i][j] + raw[j][i]))
                     for j in range(self.n_vars)] for i in range(self.n_vars)]
        for f in self.fi + [m for row in self.fij for m in row]:
            if f.n != self.n:
                raise ValueError("coefficient order %d does not match F0 order %d"
                                 % (f.n, self.n))


def m_block(x, big_x=None):
    """The lifted block [[X, x], [x^T, 1]]; X defaults to the outer product."""
    x = np.asarray(x, dtype=float)
    big_x = np.outer(x, x) if big_x is None else np.asarray(big_x, dtype=float)
    n = x.shape[0]
    m = np.empty((n + 1, n + 1))
    m[:n, :n] = big_x
    m[:n, n] = x
    m[n, :n] = x
    m[n, n] = 1.0
    return SymMatrix(m)


@dataclass(frozen=True)
class LiftedSdp:
    """LMI over (x, vec(X)) plus the rule building the PSD block M.

    The rank-1 condition on M is dropped; recovery is attempted after the
    fact with rank_one_recover.
    """

    base: Lmi
    n_vars: int
    m_block_builder: Callable = field(default=m_block)

    def extended(self, x, big_x=None):
        """Concatenate (x, vec(X)) into the lifted variable vector."""
        x = np.asarray(x, dtype=float)
        big_x = np.outer(x, x) if big_x is None else np.asarray(big_x, dtype=float)
        return np.concatenate([x, big_x.ravel()])


def lmi_eval(lmi, x):
    """Evaluate F0 + sum x_i Fi at x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (lmi.n_vars,):
        raise ValueError("expected %d variables, got shape %s"
                         % (lmi.n_vars, x.shape))
    acc = lmi.f0.a.copy()
    for xi, f in zip(x, lmi.fi):
        acc += xi * f.a
    return SymMatrix(acc)


def lmi_feasible(lmi, x, tol=None):
    """Whether the evaluated LMI satisfies its PSD or NSD sense."""
    ev = lmi_eval(lmi, x).a
    if lmi.sense == "leq":
        ev = -ev
    return is_psd(ev, tol)


def bmi_eval(bmi, x):
    """Evaluate F0 + sum x_i Fi + sum x_i x_j Fij at x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (bmi.n_vars,):
        raise ValueError("expected %d variables, got shape %s"
                         % (bmi.n_vars, x.shape))
    acc = bmi.f0.a.copy()
    for xi, f in zip(x, bmi.fi):
        acc += xi * f.a
    for i in range(bmi.n_vars):
        for j in range(bmi.n_vars):
            acc += x[i] * x[j] * bmi.fij[i][j].a
    return SymMatrix(acc)


def bmi_to_sdp(bmi):
    """Lift a BMI to an LMI over (x, vec(X)) with the rank constraint dropped.

    Each x_i x_j occurrence becomes the lifted variable X_ij; tightness of a
    candidate (x, X) is judged on the M block, not re-imposed here.
    """
    slots = list(bmi.fi)
    for i in range(bmi.n_vars):
        for j in range(bmi.n_vars):
            slots.append(bmi.fij[i][j])
    base = Lmi(bmi.f0, slots, sense="geq")
    return LiftedSdp(base=base, n_vars=bmi.n_vars)


def rank_one_recover(m, tol=1e-6):
    """Read x off a numerically rank-1 lifted block.

    Expects the (N+1)x(N+1) block with unit bottom-right corner. Accepts when
    the second-largest eigenvalue magnitude is at most tol times the largest,
    then returns the last column's first N rows; raises RankDeficit otherwise.
    """
    a = np.asarray(m, dtype=float)
    n = a.shape[0] - 1
    if n < 1:
        raise ValueError("block must be at least 2 x 2")
    if abs(a[n, n] - 1.0) > 1e-6:
        raise ValueError("bottom-right entry must be 1, got %r" % a[n, n])
    vals = sym_eigvals(a)
    mags = np.sort(np.abs(vals))[::-1]
    residual = mags[1] / mags[0] if mags[0] > 0.0 else 1.0
    if residual > tol:
        raise RankDeficit(residual)
    return a[:n, n] / a[n, n]
