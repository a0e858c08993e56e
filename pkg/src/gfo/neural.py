"""Neural ansatz for the KKT flow, trained by ODE-residual collocation.

The ansatz y0 + (1 - exp(-t)) * NN(t) pins the initial condition exactly,
so training only has to match the time derivative of the ansatz to the
flow field on a uniform grid. Time derivatives of the network are exact
(forward chain rule through the scalar input), never finite differences.
"""

from dataclasses import dataclass

import numpy as np

from . import _backend
from .kkt import KktState, kkt_residual

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class TrainingDivergence(RuntimeError):
    """Loss left the finite range mid-run; carries the 1-based epoch."""

    def __init__(self, epoch, loss):
        super().__init__("non-finite loss %r at epoch %d" % (loss, epoch))
        self.epoch = epoch


def param_count(layer_sizes):
    return sum((layer_sizes[l] + 1) * layer_sizes[l + 1]
               for l in range(len(layer_sizes) - 1))


class Mlp:
    """Feed-forward (1, hidden..., out) net; tanh hidden, linear output.

    Parameters live in one flat vector: each layer's weight matrix
    (fan_in x fan_out, row major) followed by its bias.
    """

    def __init__(self, layer_sizes, theta):
        self.layer_sizes = tuple(int(s) for s in layer_sizes)
        if len(self.layer_sizes) < 2:
            raise ValueError("need at least input and output layers")
        if self.layer_sizes[0] != 1:
            raise ValueError("input width must be 1, got %d" % self.layer_sizes[0])
        if any(s < 1 for s in self.layer_sizes):
            raise ValueError("layer sizes must be positive")
        self.theta = np.asarray(theta, dtype=float).ravel()
        expect = param_count(self.layer_sizes)
        if self.theta.shape[0] != expect:
            raise ValueError("theta has %d entries, expected %d"
                             % (self.theta.shape[0], expect))

    @classmethod
    def init(cls, layer_sizes, seed):
        """Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases."""
        rng = np.random.default_rng(seed)
        parts = []
        for l in range(len(layer_sizes) - 1):
            fi, fo = layer_sizes[l], layer_sizes[l + 1]
            lim = np.sqrt(6.0 / (fi + fo))
            parts.append(rng.uniform(-lim, lim, size=fi * fo))
            parts.append(np.zeros(fo))
        return cls(layer_sizes, np.concatenate(parts))

    def weights(self):
        """Per-layer (W, b) views into theta."""
        out = []
        off = 0
        for l in range(len(self.layer_sizes) - 1):
            fi, fo = self.layer_sizes[l], self.layer_sizes[l + 1]
            w = self.theta[off:off + fi * fo].reshape(fi, fo)
            off += fi * fo
            b = self.theta[off:off + fo]
            off += fo
            out.append((w, b))
        return out

    @property
    def out_dim(self):
        return self.layer_sizes[-1]


@dataclass(frozen=True)
class TrainConfig:
    t0: float = 0.0
    t_end: float = 10.0
    dt: float = 0.01
    epochs: int = 1000
    learning_rate: float = 1e-3
    seed: int = 0
    hidden_sizes: tuple = (100,)
    optimizer: str = "adam"

    def __post_init__(self):
        if not self.t_end > self.t0:
            raise ValueError("t_end must exceed t0")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if self.optimizer not in ("adam", "gd"):
            raise ValueError("optimizer must be 'adam' or 'gd', got %r"
                             % (self.optimizer,))
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if any(h < 1 for h in self.hidden_sizes):
            raise ValueError("hidden sizes must be positive")

    def grid(self):
        """Uniform collocation grid t0, t0+dt, ..., up to t_end."""
        n_steps = int(np.floor((self.t_end - self.t0) / self.dt + 1e-9))
        return self.t0 + self.dt * np.arange(n_steps + 1)


@dataclass(frozen=True)
class LossHistory:
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.shape[0] == 0:
            raise ValueError("loss history must be a nonempty sequence")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0.0):
            raise ValueError("loss values must be finite and nonnegative")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, i):
        return self.values[i]

    @property
    def final(self):
        return float(self.values[-1])


def _forward_tangent(mlp, ts):
    """Network output and its exact d/dt on a batch of times."""
    layers = mlp.weights()
    a = np.asarray(ts, dtype=float)[:, None]
    v = np.ones_like(a)
    for l, (w, b) in enumerate(layers):
        z = a @ w + b
        s = v @ w
        if l < len(layers) - 1:
            a = np.tanh(z)
            v = s * (1.0 - a * a)
        else:
            a, v = z, s
    return a, v


def mlp_forward(mlp, t):
    """Network output at scalar time t."""
    out, _ = _forward_tangent(mlp, np.array([float(t)]))
    return out[0]


def ansatz(mlp, t, y0):
    """y0 + (1 - exp(-t)) * NN(t) as a KktState shaped like y0."""
    out, _ = _forward_tangent(mlp, np.array([float(t)]))
    y = y0.as_vector() + (1.0 - np.exp(-float(t))) * out[0]
    n = y0.x.shape[0]
    return KktState(y[:n], y[n:])


def ansatz_dt(mlp, t, y0):
    """Exact time derivative of the ansatz at scalar time t."""
    t = float(t)
    out, dout = _forward_tangent(mlp, np.array([t]))
    dy = np.exp(-t) * out[0] + (1.0 - np.exp(-t)) * dout[0]
    n = y0.x.shape[0]
    return KktState(dy[:n], dy[n:])


def _check_shapes(mlp, lp, y0, times):
    times = np.asarray(times, dtype=float).ravel()
    if times.shape[0] == 0:
        raise ValueError("times must be nonempty")
    if np.any(times < 0.0) or not np.all(np.isfinite(times)):
        raise ValueError("times must be finite and >= 0")
    d = lp.n_vars + lp.n_cons
    if mlp.out_dim != d:
        raise ValueError("network output %d does not match state size %d"
                         % (mlp.out_dim, d))
    if y0.x.shape[0] != lp.n_vars or y0.u.shape[0] != lp.n_cons:
        raise ValueError("y0 does not match the problem")
    return times


def collocation_loss(mlp, lp, y0, times):
    """Mean squared ODE residual of the ansatz over the time grid."""
    times = _check_shapes(mlp, lp, y0, times)
    sizes = np.asarray(mlp.layer_sizes, dtype=np.int64)
    loss, _ = _backend.collocation_pass(
        mlp.theta, sizes, times, lp.cost, lp.A, lp.b, y0.as_vector(), False)
    return loss


def collocation_loss_grad(mlp, lp, y0, times):
    """Loss plus its exact gradient in theta (flat, layer order)."""
    times = _check_shapes(mlp, lp, y0, times)
    sizes = np.asarray(mlp.layer_sizes, dtype=np.int64)
    return _backend.collocation_pass(
        mlp.theta, sizes, times, lp.cost, lp.A, lp.b, y0.as_vector(), True)


def train(lp, y0, config):
    """Full-batch gradient training of the ansatz against the KKT flow.

    Deterministic for a given seed and backend. Loss is recorded at the
    parameters each epoch starts from.
    """
    sizes = (1, *config.hidden_sizes, lp.n_vars + lp.n_cons)
    mlp = Mlp.init(sizes, config.seed)
    theta = mlp.theta.copy()
    sizes_arr = np.asarray(sizes, dtype=np.int64)
    times = config.grid()
    y0vec = y0.as_vector()
    losses = np.empty(config.epochs)
    mom = np.zeros_like(theta)
    sq = np.zeros_like(theta)
    for ep in range(config.epochs):
        loss, grad = _backend.collocation_pass(
            theta, sizes_arr, times, lp.cost, lp.A, lp.b, y0vec, True)
        if not np.isfinite(loss):
            raise TrainingDivergence(ep + 1, loss)
        losses[ep] = loss
        if config.optimizer == "adam":
            mom = ADAM_BETA1 * mom + (1.0 - ADAM_BETA1) * grad
            sq = ADAM_BETA2 * sq + (1.0 - ADAM_BETA2) * grad * grad
            mhat = mom / (1.0 - ADAM_BETA1 ** (ep + 1))
            shat = sq / (1.0 - ADAM_BETA2 ** (ep + 1))
            theta = theta - config.learning_rate * mhat / (np.sqrt(shat) + ADAM_EPS)
        else:
            theta = theta - config.learning_rate * grad
    return Mlp(sizes, theta), LossHistory(losses)


@dataclass(frozen=True)
class NnSolution:
    x: np.ndarray
    u: np.ndarray
    residuals: object
    loss_history: LossHistory
    mlp: Mlp


def solve_lp_nn(lp, config=None, y0=None):
    """Train on the LP's KKT flow and read the solution at t_end."""
    config = config or TrainConfig()
    y0 = y0 or KktState.zero(lp)
    mlp, history = train(lp, y0, config)
    end = ansatz(mlp, config.t_end, y0)
    res = kkt_residual(lp, end.x, end.u)
    return NnSolution(x=end.x, u=end.u, residuals=res,
                      loss_history=history, mlp=mlp)
