"""Small MLPs with leaky-ReLU activations, exact reverse-mode gradients,
Fourier feature expansion, and an Adam optimizer.

All arithmetic is in double precision. Forward/backward operate on batches:
inputs are (n, width_in) arrays, one row per evaluation point.
"""

from dataclasses import dataclass, field

import numpy as np

DEFAULT_SLOPE = 0.03


@dataclass(frozen=True)
class FeatureMapConfig:
    """Fourier feature expansion with m modes per spatial direction.

    1D features of x: [x] ++ [cos(2*pi*k*x) for k=0..m] ++ [sin(2*pi*k*x) for k=1..m].
    2D features of (x, y): [x, y] ++ [cos(2*pi*(i*x+j*y)), sin(2*pi*(i*x+j*y))
    for i in 1..m, j in 1..m], cosine/sine interleaved, i-major order.
    """

    d: int
    modes: int

    @property
    def width(self):
        if self.d == 1:
            return 2 * self.modes + 2
        return 2 + 2 * self.modes**2


def fourier_features(x, cfg):
    """Feature matrix (n, cfg.width) for points x of shape (n, d)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    m = cfg.modes
    if cfg.d == 1:
        k = np.arange(m + 1)
        phase = 2.0 * np.pi * x[:, :1] * k  # (n, m+1)
        return np.concatenate([x, np.cos(phase), np.sin(phase[:, 1:])], axis=1)
    ii, jj = np.meshgrid(np.arange(1, m + 1), np.arange(1, m + 1), indexing="ij")
    freq = np.column_stack([ii.ravel(), jj.ravel()])  # (m^2, 2)
    phase = 2.0 * np.pi * x @ freq.T  # (n, m^2)
    trig = np.empty((x.shape[0], 2 * m * m))
    trig[:, 0::2] = np.cos(phase)
    trig[:, 1::2] = np.sin(phase)
    return np.concatenate([x, trig], axis=1)


@dataclass
class MLPParams:
    """Affine layers interleaved with leaky-ReLU on hidden layers; final layer linear."""

    layers: list  # list of (W, b) with W: (fan_in, fan_out), b: (fan_out,)
    slope: float = DEFAULT_SLOPE

    @property
    def widths(self):
        return [self.layers[0][0].shape[0]] + [W.shape[1] for W, _ in self.layers]

    def flat(self):
        """All parameter arrays in a fixed order (W0, b0, W1, b1, ...)."""
        out = []
        for W, b in self.layers:
            out.append(W)
            out.append(b)
        return out

    def copy(self):
        return MLPParams(
            layers=[(W.copy(), b.copy()) for W, b in self.layers], slope=self.slope
        )


def init_mlp(widths, seed, slope=DEFAULT_SLOPE):
    """Uniform(-a, a) weights with a = 1/sqrt(fan_in); zero biases; deterministic."""
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        a = 1.0 / np.sqrt(fan_in)
        W = rng.uniform(-a, a, size=(fan_in, fan_out))
        b = np.zeros(fan_out)
        layers.append((W, b))
    return MLPParams(layers=layers, slope=slope)


def mlp_forward(p, x):
    """Batched forward pass: x (n, width_in) -> (n, width_out)."""
    return _forward_cached(p, x)[0]


def _forward_cached(p, x):
    """Forward pass keeping pre-activations and activations for the backward pass."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != p.widths[0]:
        raise ValueError(f"input width {x.shape[1]} != first layer width {p.widths[0]}")
    acts = [x]
    pres = []
    h = x
    last = len(p.layers) - 1
    for i, (W, b) in enumerate(p.layers):
        z = h @ W + b
        pres.append(z)
        if i < last:
            h = np.where(z >= 0, z, p.slope * z)
        else:
            h = z
        acts.append(h)
    return h, (acts, pres)


def mlp_backward(p, cache, upstream):
    """Reverse-mode gradients for a batched forward pass.

    upstream: (n, width_out) cotangent. Returns (param_grads, input_grad) where
    param_grads is a list of (dW, db) summed over the batch and input_grad is
    (n, width_in). The leaky-ReLU derivative at exactly 0 is taken as 1.
    """
    acts, pres = cache
    upstream = np.atleast_2d(np.asarray(upstream, dtype=float))
    grads = [None] * len(p.layers)
    delta = upstream
    for i in range(len(p.layers) - 1, -1, -1):
        W, _ = p.layers[i]
        if i < len(p.layers) - 1:
            delta = delta * np.where(pres[i] >= 0, 1.0, p.slope)
        dW = acts[i].T @ delta
        db = delta.sum(axis=0)
        grads[i] = (dW, db)
        delta = delta @ W.T
    return grads, delta


def mlp_gradient(p, x, upstream):
    """Gradients of mlp_forward at x with the given output cotangent."""
    _, cache = _forward_cached(p, x)
    return mlp_backward(p, cache, upstream)


@dataclass
class AdamState:
    """First/second moment accumulators mirroring a list of parameter arrays."""

    m: list
    v: list
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params, beta1=0.9, beta2=0.999, eps=1e-8):
        return cls(
            m=[np.zeros_like(a) for a in params],
            v=[np.zeros_like(a) for a in params],
            beta1=beta1,
            beta2=beta2,
            eps=eps,
        )


def adam_step(state, params, grads, lr):
    """One in-place Adam update with bias correction.

    params and grads are flat lists of arrays matching state's accumulators.
    """
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise FloatingPointError("non-finite gradient (training diverged)")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**state.step
    c2 = 1.0 - b2**state.step
    for theta, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        theta -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state


# --- serialization ---------------------------------------------------------
# A network is stored as a plain-text header followed by a flat little-endian
# float64 stream of all parameters in (W0, b0, W1, b1, ...) order, with W
# matrices flattened row-major.

def mlp_to_bytes(p):
    stream = np.concatenate([a.ravel() for a in p.flat()])
    return stream.astype("<f8").tobytes()


def mlp_header_lines(name, p, feature_cfg=None, seed=None):
    lines = [
        f"{name}.widths = {' '.join(str(w) for w in p.widths)}",
        f"{name}.slope = {p.slope!r}",
    ]
    if feature_cfg is not None:
        lines.append(f"{name}.feature_d = {feature_cfg.d}")
        lines.append(f"{name}.feature_modes = {feature_cfg.modes}")
    if seed is not None:
        lines.append(f"{name}.seed = {seed}")
    return lines


def mlp_from_bytes(widths, slope, raw):
    vals = np.frombuffer(raw, dtype="<f8").astype(float)
    layers = []
    pos = 0
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        W = vals[pos : pos + fan_in * fan_out].reshape(fan_in, fan_out)
        pos += fan_in * fan_out
        b = vals[pos : pos + fan_out]
        pos += fan_out
        layers.append((W.copy(), b.copy()))
    if pos != vals.size:
        raise ValueError("parameter stream length does not match layer widths")
    return MLPParams(layers=layers, slope=slope)


def n_params(widths):
    return sum(i * o + o for i, o in zip(widths[:-1], widths[1:]))
