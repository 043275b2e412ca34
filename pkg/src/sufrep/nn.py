"""Small dense ReLU networks with exact reverse-mode gradients, plus Adam.

Everything is plain float64 numpy.  Samples are rows: a network mapping
R^p -> R^d consumes an (n, p) matrix and returns an (n, d) matrix.  The
backward pass returns gradients with respect to every parameter *and* with
respect to the input rows; the input gradient is what the particle-push
step consumes.

The ReLU subgradient at 0 is fixed to 0, so the backward pass is a
deterministic function of (net, input, upstream gradient).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError, TrainingError


class Mlp:
    """Feed-forward network: ReLU hidden layers, linear output layer.

    Parameters are held as per-layer weight matrices of shape
    (fan_in, fan_out) and bias vectors of shape (fan_out,).
    """

    def __init__(self, widths, weights, biases):
        self.widths = list(widths)
        self.weights = weights
        self.biases = biases

    @property
    def n_layers(self):
        return len(self.weights)

    @property
    def in_dim(self):
        return self.widths[0]

    @property
    def out_dim(self):
        return self.widths[-1]

    def params(self):
        """Flat parameter list [W0, b0, W1, b1, ...]; arrays are live views."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def num_params(self):
        return sum(p.size for p in self.params())

    def copy(self):
        return Mlp(
            self.widths,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
        )

    def to_dict(self):
        return {
            "widths": self.widths,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, d):
        weights = [np.asarray(w, dtype=np.float64) for w in d["weights"]]
        biases = [np.asarray(b, dtype=np.float64) for b in d["biases"]]
        return cls(list(d["widths"]), weights, biases)


def mlp_init(widths, seed) -> Mlp:
    """He-normal initialized network: W ~ N(0, 2/fan_in), biases zero.

    Deterministic given ``seed``.  ``widths`` lists the input, hidden and
    output dimensions, so it needs at least two entries.
    """
    widths = [int(w) for w in widths]
    if len(widths) < 2:
        raise ConfigError(f"need at least input and output widths, got {widths}")
    if any(w <= 0 for w in widths):
        raise ConfigError(f"all layer widths must be positive, got {widths}")
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        std = np.sqrt(2.0 / fan_in)
        weights.append(rng.standard_normal((fan_in, fan_out)) * std)
        biases.append(np.zeros(fan_out))
    return Mlp(widths, weights, biases)


def mlp_forward(net: Mlp, x: np.ndarray) -> np.ndarray:
    """Apply the network row-wise: (n, in_dim) -> (n, out_dim)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.in_dim:
        raise ShapeError(
            f"input has shape {x.shape}, network expects (n, {net.in_dim})"
        )
    h = x
    last = net.n_layers - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ w + b
        h = z if i == last else np.maximum(z, 0.0)
    return h


def mlp_backward(net: Mlp, x: np.ndarray, upstream: np.ndarray):
    """Reverse-mode gradients of sum(upstream * output).

    Returns ``(param_grads, input_grad)`` where ``param_grads`` matches the
    layout of ``net.params()`` and ``input_grad`` has the shape of ``x``.
    The forward activations are recomputed here; networks are small enough
    that caching buys nothing.
    """
    x = np.asarray(x, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.in_dim:
        raise ShapeError(f"input has shape {x.shape}, expected (n, {net.in_dim})")
    if upstream.shape != (x.shape[0], net.out_dim):
        raise ShapeError(
            f"upstream gradient has shape {upstream.shape}, "
            f"expected {(x.shape[0], net.out_dim)}"
        )
    last = net.n_layers - 1
    inputs = [x]  # h_i fed to layer i
    preacts = []
    h = x
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ w + b
        preacts.append(z)
        h = z if i == last else np.maximum(z, 0.0)
        inputs.append(h)

    grads_w = [None] * net.n_layers
    grads_b = [None] * net.n_layers
    delta = upstream
    for i in range(last, -1, -1):
        if i < last:
            delta = delta * (preacts[i] > 0.0)
        grads_w[i] = inputs[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        delta = delta @ net.weights[i].T

    param_grads = []
    for gw, gb in zip(grads_w, grads_b):
        param_grads.append(gw)
        param_grads.append(gb)
    return param_grads, delta


@dataclass
class AdamState:
    """Adam moment accumulators for one flat parameter list."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def adam_init(params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8) -> AdamState:
    if lr <= 0:
        raise ConfigError(f"learning rate must be positive, got {lr}")
    return AdamState(
        lr=lr,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
        step=0,
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
    )


def adam_step(state: AdamState, params, grads) -> AdamState:
    """One Adam update; mutates ``params`` in place and returns the state."""
    if len(params) != len(state.m) or len(grads) != len(params):
        raise ShapeError("parameter/gradient lists do not match optimizer state")
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient at optimizer step {state.step + 1}")
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1**t
    c2 = 1.0 - state.beta2**t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return state
