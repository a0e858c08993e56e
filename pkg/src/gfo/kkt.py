"""Inequality-constrained LP, its KKT residuals, and the KKT flow.

The flow's equilibria are exactly the KKT points of the LP, so a classical
fixed-step integration of it doubles as the reference solver that the
neural ansatz is checked against.
"""

from dataclasses import dataclass

import numpy as np

DIVERGENCE_CAP = 1e9


class DivergenceError(RuntimeError):
    """State blew past the divergence guard; carries the last valid time."""

    def __init__(self, msg, t_last):
        super().__init__(msg)
        self.t_last = t_last


class LpProblem:
    """min cost.x subject to A x - b <= 0."""

    def __init__(self, cost, A, b):
        self.cost = np.asarray(cost, dtype=float).ravel()
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.b = np.asarray(b, dtype=float).ravel()
        n, m = self.cost.shape[0], self.b.shape[0]
        if self.A.shape != (m, n):
            raise ValueError("A is %s, expected (%d, %d)" % (self.A.shape, m, n))
        for name, arr in (("cost", self.cost), ("A", self.A), ("b", self.b)):
            if not np.all(np.isfinite(arr)):
                raise ValueError("non-finite entries in %s" % name)
        self.n_vars = n
        self.n_cons = m

    def objective(self, x):
        return float(self.cost @ np.asarray(x, dtype=float))


@dataclass(frozen=True)
class KktState:
    """Primal point x and multipliers u, one slot per constraint row."""

    x: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).ravel())
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float).ravel())
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.u))):
            raise ValueError("non-finite state")

    def as_vector(self):
        return np.concatenate([self.x, self.u])

    @classmethod
    def zero(cls, lp):
        return cls(np.zeros(lp.n_vars), np.zeros(lp.n_cons))

    @classmethod
    def from_vector(cls, lp, y):
        y = np.asarray(y, dtype=float).ravel()
        if y.shape[0] != lp.n_vars + lp.n_cons:
            raise ValueError("state length %d, expected %d"
                             % (y.shape[0], lp.n_vars + lp.n_cons))
        return cls(y[:lp.n_vars], y[lp.n_vars:])


class Trajectory:
    """Time grid plus one stacked (x, u) row per grid point."""

    def __init__(self, times, states):
        self.times = np.asarray(times, dtype=float)
        self.states = np.asarray(states, dtype=float)
        if self.times.ndim != 1 or self.states.shape[0] != self.times.shape[0]:
            raise ValueError("times and states disagree")
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return self.times.shape[0]

    def state(self, lp, i):
        return KktState.from_vector(lp, self.states[i])

    def endpoint(self, lp):
        return self.state(lp, len(self) - 1)


@dataclass(frozen=True)
class KktResidual:
    stationarity: float
    complementarity: float
    primal_violation: float
    dual_violation: float

    def max(self):
        return max(self.stationarity, self.complementarity,
                   self.primal_violation, self.dual_violation)


def lagrangian(lp, x, u):
    """cost.x + u.(Ax - b)."""
    x = np.asarray(x, dtype=float).ravel()
    u = np.asarray(u, dtype=float).ravel()
    if x.shape[0] != lp.n_vars or u.shape[0] != lp.n_cons:
        raise ValueError("dimension mismatch")
    return float(lp.cost @ x + u @ (lp.A @ x - lp.b))


def kkt_residual(lp, x, u):
    """Euclidean norms of the four KKT conditions at (x, u)."""
    x = np.asarray(x, dtype=float).ravel()
    u = np.asarray(u, dtype=float).ravel()
    if x.shape[0] != lp.n_vars or u.shape[0] != lp.n_cons:
        raise ValueError("dimension mismatch")
    slack = lp.A @ x - lp.b
    return KktResidual(
        stationarity=float(np.linalg.norm(lp.cost + lp.A.T @ u)),
        complementarity=abs(float(u @ slack)),
        primal_violation=float(np.linalg.norm(np.maximum(slack, 0.0))),
        dual_violation=float(np.linalg.norm(np.maximum(-u, 0.0))),
    )


def _phi_vec(lp, y):
    n = lp.n_vars
    x, u = y[:n], y[n:]
    p = np.maximum(u + lp.A @ x - lp.b, 0.0)
    out = np.empty_like(y)
    out[:n] = -(lp.cost + lp.A.T @ p)
    out[n:] = p - u
    return out


def phi(lp, y):
    """KKT flow: dx/dt = -(cost + A.(u+Ax-b)+), du/dt = (u+Ax-b)+ - u."""
    if y.x.shape[0] != lp.n_vars or y.u.shape[0] != lp.n_cons:
        raise ValueError("dimension mismatch")
    return KktState.from_vector(lp, _phi_vec(lp, y.as_vector()))


def integrate(lp, y0, t_end, dt=0.001, method="euler"):
    """Fixed-step integration of the KKT flow from t=0 to t_end.

    Returns the full trajectory including both endpoints; the last step is
    shortened when dt does not divide t_end. Aborts with DivergenceError
    once any component passes 1e9 in magnitude.
    """
    if dt <= 0.0 or t_end <= 0.0:
        raise ValueError("dt and t_end must be positive")
    if method not in ("euler", "rk4"):
        raise ValueError("method must be 'euler' or 'rk4', got %r" % (method,))
    y = y0.as_vector()
    if y.shape[0] != lp.n_vars + lp.n_cons:
        raise ValueError("dimension mismatch")
    n_full = int(np.floor(t_end / dt + 1e-12))
    times = [0.0]
    states = [y.copy()]
    t = 0.0
    for k in range(n_full + 1):
        h = dt if k < n_full else t_end - n_full * dt
        if h <= 0.0:
            break
        if method == "euler":
            y = y + h * _phi_vec(lp, y)
        else:
            k1 = _phi_vec(lp, y)
            k2 = _phi_vec(lp, y + 0.5 * h * k1)
            k3 = _phi_vec(lp, y + 0.5 * h * k2)
            k4 = _phi_vec(lp, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = (k + 1) * dt if k < n_full else t_end
        if np.abs(y).max() > DIVERGENCE_CAP:
            raise DivergenceError("state diverged at t=%.6g" % t, times[-1])
        times.append(t)
        states.append(y.copy())
    return Trajectory(np.array(times), np.array(states))
