"""Error metrics, cross-resolution evaluation, the performance-gap statistic,
and spectral diagnostics of the encoder.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .grid import grids_overlap, trapezoid_weights
from .model import encoder_basis_values, forward_batch, model_digest
from .training import l1_riemann_loss


def relative_l1_error(pred, truth):
    denom = float(np.dot(trapezoid_weights(truth.grid).weights, np.abs(truth.values)))
    if denom == 0:
        raise ValueError("truth has zero L1 norm")
    return l1_riemann_loss(pred, truth) / denom


@dataclass
class ResolutionResult:
    R: int
    errors: list  # per-sample relative L1 errors
    n_failed: int = 0

    @property
    def mean(self):
        return float(np.mean(self.errors))

    @property
    def median(self):
        return float(np.median(self.errors))


@dataclass
class EvalReport:
    results: list  # one ResolutionResult per test dataset
    model_digest: str = ""
    dataset_digests: list = field(default_factory=list)

    def errors_by_resolution(self, statistic="mean"):
        return {r.R: getattr(r, statistic) for r in self.results}


def evaluate_model(model, test_datasets, batch_size=64):
    """Per-sample relative L1 errors for each single-fidelity test dataset.

    Samples whose forward pass fails are counted and excluded from the
    statistics.
    """
    from .dataset import dataset_digest

    results = []
    digests = []
    for ds in test_datasets:
        if ds.d != model.encoder_features.d:
            raise ValueError("dataset dimension does not match model")
        Rs = ds.resolutions_present()
        if len(Rs) != 1:
            raise ValueError("test datasets must be single-fidelity")
        grid = ds.samples[0][0].grid
        w = trapezoid_weights(grid).weights
        errors = []
        n_failed = 0
        for i in range(0, ds.N, batch_size):
            chunk = ds.samples[i : i + batch_size]
            U = np.stack([inp.values for inp, _ in chunk])
            V = np.stack([out.values for _, out in chunk])
            try:
                preds = forward_batch(model, U, grid, grid)
            except FloatingPointError:
                n_failed += len(chunk)
                continue
            num = np.abs(preds - V) @ w
            den = np.abs(V) @ w
            ok = np.isfinite(num) & (den > 0)
            n_failed += int(np.sum(~ok))
            errors.extend((num[ok] / den[ok]).tolist())
        results.append(ResolutionResult(R=Rs[0], errors=errors, n_failed=n_failed))
        digests.append(dataset_digest(ds))
    return EvalReport(
        results=results, model_digest=model_digest(model), dataset_digests=digests
    )


def classify_overlap(test_R, train_resolutions):
    """A test resolution counts as overlapping if its grid nests with any
    training grid."""
    return any(grids_overlap(test_R, R) for R in train_resolutions)


def performance_gap(report, train_resolutions, statistic="mean"):
    """Mean per-dataset error over overlapping test resolutions minus the mean
    over non-overlapping ones (signed)."""
    same, diff = [], []
    for r in report.results:
        e = getattr(r, statistic)
        (same if classify_overlap(r.R, train_resolutions) else diff).append(e)
    if not same or not diff:
        raise ValueError("performance gap needs both overlap classes non-empty")
    return float(np.mean(same) - np.mean(diff))


# --- POD / encoding-error diagnostics --------------------------------------

@dataclass
class PodSpectrum:
    eigenvalues: np.ndarray  # decreasing, >= 0
    eigenfunctions: np.ndarray  # (n_modes, n_nodes), orthonormal under quadrature
    grid: object


def empirical_pod_spectrum(input_values, ref_grid):
    """Eigendecomposition of the quadrature-weighted empirical uncentered
    second-moment operator of the inputs.

    input_values: (N, n_nodes) samples on ref_grid.
    """
    U = np.asarray(input_values, dtype=float)
    N = U.shape[0]
    w = trapezoid_weights(ref_grid).weights
    sw = np.sqrt(w)
    A = (U * sw).T @ (U * sw) / N
    lam, vec = np.linalg.eigh(A)
    order = np.argsort(lam)[::-1]
    lam = np.clip(lam[order], 0.0, None)
    phi = (vec[:, order] / sw[:, None]).T
    return PodSpectrum(eigenvalues=lam, eigenfunctions=phi, grid=ref_grid)


def quadrature_encoder(functions, ref_grid):
    """Encoder that projects samples onto the given functions (rows, sampled
    on ref_grid) with trapezoidal quadrature; returns values (N, n) -> (N, p)."""
    w = trapezoid_weights(ref_grid).weights
    mat = (np.asarray(functions) * w).T  # (n, p)

    def encode_fn(values):
        return np.asarray(values) @ mat

    return encode_fn


def network_encoder(model, ref_grid):
    """The model's quadrature encoder specialized to one grid, as a batch map."""
    phi = encoder_basis_values(model, ref_grid)
    w = trapezoid_weights(ref_grid).weights

    def encode_fn(values):
        return (np.asarray(values) * w) @ phi

    return encode_fn


def encoding_error_diagnostic(encode_fn, input_values, p, ref_grid,
                              spectrum=None, pinv_cutoff=1e-10):
    """Empirical encoding error of an encoder with its least-squares-optimal
    linear decoder, split against the spectral-tail lower bound.

    Returns (encoding_error_sq, aliasing_estimate, tail) where
    encoding_error_sq is the mean squared quadrature-norm reconstruction
    error, tail is the sum of second-moment eigenvalues beyond p, and
    aliasing_estimate = encoding_error_sq - tail clamped at 0.
    """
    U = np.asarray(input_values, dtype=float)
    if p > U.shape[0]:
        raise ValueError("latent dimension exceeds number of samples")
    Z = np.asarray(encode_fn(U), dtype=float)[:, :p]
    # least-squares decoder fit on the same samples; the quadrature weights
    # drop out of the normal equations (constant per node across samples)
    D = np.linalg.pinv(Z, rcond=pinv_cutoff) @ U  # (p, n_nodes)
    resid = Z @ D - U
    w = trapezoid_weights(ref_grid).weights
    err_sq = float(np.mean((resid**2) @ w))
    if spectrum is None:
        spectrum = empirical_pod_spectrum(U, ref_grid)
    tail = float(np.sum(spectrum.eigenvalues[p:]))
    aliasing = max(err_sq - tail, 0.0)
    return err_sq, aliasing, tail


# --- report output ---------------------------------------------------------

def report_to_csv(report, train_resolutions, path, statistic="mean"):
    lines = ["R,n_samples,n_failed,mean,median,overlaps_training"]
    for r in report.results:
        flag = int(classify_overlap(r.R, train_resolutions)) if train_resolutions else ""
        lines.append(f"{r.R},{len(r.errors)},{r.n_failed},{r.mean!r},{r.median!r},{flag}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def report_summary(report, train_resolutions, statistic="mean"):
    summary = {
        "model_digest": report.model_digest,
        "dataset_digests": report.dataset_digests,
        "statistic": statistic,
        "errors": {str(r.R): getattr(r, statistic) for r in report.results},
    }
    if train_resolutions:
        try:
            summary["performance_gap"] = performance_gap(
                report, train_resolutions, statistic
            )
        except ValueError:
            summary["performance_gap"] = None
        summary["train_resolutions"] = list(train_resolutions)
    return json.dumps(summary, indent=2, sort_keys=True)
