"""Encode-approximate-reconstruct operator model.

The encoder is a quadrature projection of the input sample onto learned basis
functions; the reconstructor is a linear combination of learned basis
functions evaluated at arbitrary output nodes. Nothing in the model stores a
grid size, so any input/output discretization can be used at inference time.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from .grid import FunctionSample, trapezoid_weights
from .nets import (
    FeatureMapConfig,
    MLPParams,
    fourier_features,
    init_mlp,
    mlp_backward,
    mlp_from_bytes,
    mlp_to_bytes,
    _forward_cached,
    mlp_forward,
)

CHECKPOINT_MAGIC = "oplearn-model"
CHECKPOINT_VERSION = 1


@dataclass
class OperatorModel:
    encoder_net: MLPParams
    approximator_net: MLPParams
    reconstructor_net: MLPParams
    encoder_features: FeatureMapConfig
    reconstructor_features: FeatureMapConfig
    problem: str = ""
    seed: int = 0

    @property
    def p(self):
        return self.encoder_net.widths[-1]

    @property
    def q(self):
        return self.reconstructor_net.widths[-1]

    def parameters(self):
        """All trainable arrays: encoder, then approximator, then reconstructor."""
        return (
            self.encoder_net.flat()
            + self.approximator_net.flat()
            + self.reconstructor_net.flat()
        )

    def copy(self):
        return OperatorModel(
            encoder_net=self.encoder_net.copy(),
            approximator_net=self.approximator_net.copy(),
            reconstructor_net=self.reconstructor_net.copy(),
            encoder_features=self.encoder_features,
            reconstructor_features=self.reconstructor_features,
            problem=self.problem,
            seed=self.seed,
        )


def make_model(d, modes, p, q, encoder_hidden, approximator_hidden,
               reconstructor_hidden, seed, problem="", reconstructor_modes=None):
    """Build a model with fresh random weights; deterministic given seed.

    reconstructor_modes lets the output basis carry more (or fewer) Fourier
    features than the encoder; by default both use the same count.
    """
    enc_cfg = FeatureMapConfig(d=d, modes=modes)
    rec_cfg = FeatureMapConfig(
        d=d, modes=modes if reconstructor_modes is None else reconstructor_modes
    )
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2**63 - 1, size=3)
    enc = init_mlp([enc_cfg.width] + list(encoder_hidden) + [p], seeds[0])
    app = init_mlp([p] + list(approximator_hidden) + [q], seeds[1])
    rec = init_mlp([rec_cfg.width] + list(reconstructor_hidden) + [q], seeds[2])
    return OperatorModel(
        encoder_net=enc,
        approximator_net=app,
        reconstructor_net=rec,
        encoder_features=enc_cfg,
        reconstructor_features=rec_cfg,
        problem=problem,
        seed=seed,
    )


def _check_dim(grid, cfg, what):
    if grid.d != cfg.d:
        raise ValueError(f"{what}: grid dimension {grid.d} != feature map dimension {cfg.d}")


def encoder_basis_values(m, grid):
    """Encoder basis functions evaluated at all grid nodes: (n_nodes, p)."""
    _check_dim(grid, m.encoder_features, "encode")
    feats = fourier_features(grid.points, m.encoder_features)
    return mlp_forward(m.encoder_net, feats)


def reconstructor_basis_values(m, grid):
    """Reconstructor basis functions evaluated at all grid nodes: (n_nodes, q)."""
    _check_dim(grid, m.reconstructor_features, "reconstruct")
    feats = fourier_features(grid.points, m.reconstructor_features)
    return mlp_forward(m.reconstructor_net, feats)


def encode(m, s):
    """Quadrature approximation of the inner products of the input with each
    encoder basis function; a length-p vector."""
    phi = encoder_basis_values(m, s.grid)
    w = trapezoid_weights(s.grid).weights
    return phi.T @ (w * s.values)


def approximate(m, z):
    z = np.asarray(z, dtype=float)
    return mlp_forward(m.approximator_net, z[None, :])[0]


def reconstruct(m, w_coef, out):
    """Linear combination of reconstructor basis functions sampled on out."""
    basis = reconstructor_basis_values(m, out)
    return FunctionSample(grid=out, values=basis @ np.asarray(w_coef, dtype=float))


def forward(m, s, out):
    return reconstruct(m, approximate(m, encode(m, s)), out)


def forward_batch(m, values, in_grid, out_grid):
    """Forward pass for a batch of samples sharing one input/output grid.

    values: (B, n_in) array. Returns predictions (B, n_out).
    """
    _check_dim(in_grid, m.encoder_features, "encode")
    _check_dim(out_grid, m.reconstructor_features, "reconstruct")
    phi_e = encoder_basis_values(m, in_grid)
    w = trapezoid_weights(in_grid).weights
    Z = (values * w) @ phi_e  # (B, p)
    W = mlp_forward(m.approximator_net, Z)  # (B, q)
    phi_r = reconstructor_basis_values(m, out_grid)
    return W @ phi_r.T


def forward_batch_with_backward(m, values, in_grid, out_grid):
    """Batched forward pass that also returns a reverse-mode closure.

    values: (B, n_in) samples sharing one input grid. Returns (preds, backward)
    where preds is (B, n_out) and backward(upstream) maps a (B, n_out)
    cotangent to a flat gradient list matching m.parameters(), summed over
    the batch.
    """
    _check_dim(in_grid, m.encoder_features, "encode")
    _check_dim(out_grid, m.reconstructor_features, "reconstruct")
    feats_in = fourier_features(in_grid.points, m.encoder_features)
    phi_e, enc_cache = _forward_cached(m.encoder_net, feats_in)
    wq = trapezoid_weights(in_grid).weights
    weighted = values * wq  # (B, n_in)
    Z = weighted @ phi_e
    W, app_cache = _forward_cached(m.approximator_net, Z)
    feats_out = fourier_features(out_grid.points, m.reconstructor_features)
    phi_r, rec_cache = _forward_cached(m.reconstructor_net, feats_out)
    preds = W @ phi_r.T
    if not np.all(np.isfinite(preds)):
        raise FloatingPointError("non-finite model output")

    def backward(upstream):
        up = np.asarray(upstream, dtype=float)
        d_W = up @ phi_r  # (B, q)
        d_phi_r = up.T @ W  # (n_out, q)
        rec_grads, _ = mlp_backward(m.reconstructor_net, rec_cache, d_phi_r)
        app_grads, d_Z = mlp_backward(m.approximator_net, app_cache, d_W)
        d_phi_e = weighted.T @ d_Z  # (n_in, p)
        enc_grads, _ = mlp_backward(m.encoder_net, enc_cache, d_phi_e)
        grads = []
        for pair in enc_grads + app_grads + rec_grads:
            grads.extend(pair)
        return grads

    return preds, backward


def forward_gradient_batch(m, values, in_grid, out_grid, upstream):
    """Predictions plus parameter gradients for a given output cotangent."""
    preds, backward = forward_batch_with_backward(m, values, in_grid, out_grid)
    return preds, backward(upstream)


def forward_gradient(m, s, out, upstream):
    """Gradients of a single forward pass w.r.t. all three networks' parameters."""
    _, grads = forward_gradient_batch(
        m, s.values[None, :], s.grid, out, np.asarray(upstream, dtype=float)[None, :]
    )
    return grads


# --- checkpoint format -----------------------------------------------------
# Plain-text header terminated by a line of three dashes, then the three
# parameter streams (encoder, approximator, reconstructor) concatenated as
# little-endian float64.

def save_model(m, path):
    header = [
        f"magic = {CHECKPOINT_MAGIC}",
        f"version = {CHECKPOINT_VERSION}",
        f"problem = {m.problem}",
        f"seed = {m.seed}",
        f"p = {m.p}",
        f"q = {m.q}",
        "encoder.widths = " + " ".join(str(w) for w in m.encoder_net.widths),
        f"encoder.slope = {m.encoder_net.slope!r}",
        f"encoder.feature_d = {m.encoder_features.d}",
        f"encoder.feature_modes = {m.encoder_features.modes}",
        "approximator.widths = " + " ".join(str(w) for w in m.approximator_net.widths),
        f"approximator.slope = {m.approximator_net.slope!r}",
        "reconstructor.widths = " + " ".join(str(w) for w in m.reconstructor_net.widths),
        f"reconstructor.slope = {m.reconstructor_net.slope!r}",
        f"reconstructor.feature_d = {m.reconstructor_features.d}",
        f"reconstructor.feature_modes = {m.reconstructor_features.modes}",
        "---",
    ]
    with open(path, "wb") as f:
        f.write("\n".join(header).encode() + b"\n")
        f.write(mlp_to_bytes(m.encoder_net))
        f.write(mlp_to_bytes(m.approximator_net))
        f.write(mlp_to_bytes(m.reconstructor_net))


def _parse_header(f):
    fields = {}
    while True:
        line = f.readline()
        if not line:
            raise ValueError("truncated header")
        line = line.decode().strip()
        if line == "---":
            return fields
        key, _, value = line.partition(" = ")
        fields[key] = value


def load_model(path):
    with open(path, "rb") as f:
        fields = _parse_header(f)
        raw = f.read()
    if fields.get("magic") != CHECKPOINT_MAGIC:
        raise ValueError("not a model checkpoint")
    if int(fields["version"]) != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {fields['version']}")
    nets = {}
    pos = 0
    for name in ("encoder", "approximator", "reconstructor"):
        widths = [int(w) for w in fields[f"{name}.widths"].split()]
        slope = float(fields[f"{name}.slope"])
        size = 8 * sum(i * o + o for i, o in zip(widths[:-1], widths[1:]))
        nets[name] = mlp_from_bytes(widths, slope, raw[pos : pos + size])
        pos += size
    if pos != len(raw):
        raise ValueError("checkpoint payload length mismatch")
    return OperatorModel(
        encoder_net=nets["encoder"],
        approximator_net=nets["approximator"],
        reconstructor_net=nets["reconstructor"],
        encoder_features=FeatureMapConfig(
            d=int(fields["encoder.feature_d"]), modes=int(fields["encoder.feature_modes"])
        ),
        reconstructor_features=FeatureMapConfig(
            d=int(fields["reconstructor.feature_d"]),
            modes=int(fields["reconstructor.feature_modes"]),
        ),
        problem=fields.get("problem", ""),
        seed=int(fields.get("seed", 0)),
    )


def model_digest(m):
    """Short hash of the serialized parameters, for report metadata."""
    h = hashlib.sha256()
    for a in m.parameters():
        h.update(a.tobytes())
    return h.hexdigest()[:16]
