"""Ground-truth data generators: random input sampling and spectral solvers.

Fields are represented by truncated spectral series so that they can be
evaluated exactly on any target grid, nested or not. Two bases are used:
periodic Fourier on [0,1]^d (complex coefficients with Hermitian symmetry,
centered index k = -K..K) and Dirichlet sine on [0,1]^2 (real coefficients
for modes sin(pi*i*x)*sin(pi*j*y), i, j = 1..K).

The time steppers operate on a leading batch axis internally; the public
solver functions take a single field.
"""

from dataclasses import dataclass

import numpy as np

from .grid import FunctionSample

BLOWUP_LIMIT = 1e8


@dataclass(frozen=True)
class SpectralField:
    d: int
    basis: str  # "fourier" (periodic) or "sine" (Dirichlet)
    coeffs: np.ndarray
    K: int

    def __post_init__(self):
        if self.basis == "fourier":
            n = 2 * self.K + 1
            expected = (n,) if self.d == 1 else (n, n)
        elif self.basis == "sine":
            if self.d != 2:
                raise ValueError("sine basis is implemented for d=2 only")
            expected = (self.K, self.K)
        else:
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.coeffs.shape != expected:
            raise ValueError(f"coefficient shape {self.coeffs.shape} != {expected}")


def field_l2_norm(field):
    """L2 norm over [0,1]^d, exact in coefficient space."""
    if field.basis == "fourier":
        return float(np.sqrt(np.sum(np.abs(field.coeffs) ** 2)))
    return float(np.sqrt(np.sum(field.coeffs**2) / 2**field.d))


@dataclass(frozen=True)
class GrfSpec:
    """Gaussian random field with covariance sigma^2 (-Laplacian + tau^2)^(-alpha/2),
    periodic on [0,1]^d."""

    d: int
    sigma: float
    tau: float
    alpha: float
    K: int

    def __post_init__(self):
        if self.sigma <= 0 or self.tau <= 0:
            raise ValueError("sigma and tau must be positive")
        if self.alpha <= self.d / 2:
            raise ValueError(f"alpha must exceed d/2 = {self.d / 2} for continuity")
        if self.K < 1:
            raise ValueError("mode cutoff K must be >= 1")


def _centered_wavenumbers(K):
    return np.arange(-K, K + 1)


def grf_coefficient_std(spec, ksq):
    """Standard deviation of the coefficient at squared wavenumber |k|^2."""
    return spec.sigma * (4.0 * np.pi**2 * ksq + spec.tau**2) ** (-spec.alpha / 4.0)


def sample_grf_periodic(spec, seed):
    """Draw one real GRF: independent Gaussian coefficients per wavevector with
    the covariance-determined std, Hermitian symmetry, zero mean coefficient."""
    return sample_grf_periodic_batch(spec, seed, 1)[0]


def sample_grf_periodic_batch(spec, seed, count):
    rng = np.random.default_rng(seed)
    k = _centered_wavenumbers(spec.K)
    if spec.d == 1:
        ksq = k.astype(float) ** 2
        shape = (count, 2 * spec.K + 1)
    else:
        kx, ky = np.meshgrid(k, k, indexing="ij")
        ksq = (kx**2 + ky**2).astype(float)
        shape = (count, 2 * spec.K + 1, 2 * spec.K + 1)
    g = rng.normal(0.0, np.sqrt(0.5), size=shape) + 1j * rng.normal(
        0.0, np.sqrt(0.5), size=shape
    )
    # Hermitian-symmetrize: c(-k) = conj(c(k)); preserves unit coefficient variance.
    flip = tuple(slice(None, None, -1) for _ in range(spec.d))
    c = (g + np.conj(g[(slice(None),) + flip])) / np.sqrt(2.0)
    std = grf_coefficient_std(spec, ksq)
    c = c * std
    center = (spec.K,) * spec.d
    c[(slice(None),) + center] = 0.0
    return [SpectralField(d=spec.d, basis="fourier", coeffs=c[i], K=spec.K) for i in range(count)]


def sample_random_fourier_series(decay, K, amplitude, seed):
    """Random sine series on [0,1]^2: c_ij = amplitude * xi_ij * (i^2+j^2)^(-decay/2)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    rng = np.random.default_rng(seed)
    i, j = np.meshgrid(np.arange(1, K + 1), np.arange(1, K + 1), indexing="ij")
    scale = amplitude * (i**2 + j**2) ** (-decay / 2.0)
    c = rng.standard_normal((K, K)) * scale
    return SpectralField(d=2, basis="sine", coeffs=c, K=K)


def solve_fractional_poisson_spectral(f, alpha):
    """Spectral (eigenfunction) fractional Laplacian with homogeneous Dirichlet
    conditions: divide each sine coefficient by (pi^2 (i^2+j^2))^(alpha/2)."""
    if f.basis != "sine":
        raise ValueError("fractional Poisson solver expects a sine-basis field")
    if not 0 < alpha <= 2:
        raise ValueError("fractional order must be in (0, 2]")
    i, j = np.meshgrid(np.arange(1, f.K + 1), np.arange(1, f.K + 1), indexing="ij")
    eig = (np.pi**2 * (i**2 + j**2)) ** (alpha / 2.0)
    return SpectralField(d=2, basis="sine", coeffs=f.coeffs / eig, K=f.K)


# --- time-dependent solvers ------------------------------------------------

def _fourier_to_fft_order(field, n):
    """Centered coefficients -> length-n complex spectrum in numpy FFT order."""
    if 2 * field.K >= n:
        raise ValueError(f"solver resolution {n} too small for mode cutoff {field.K}")
    spec = np.zeros(n, dtype=complex)
    k = _centered_wavenumbers(field.K)
    spec[k % n] = field.coeffs
    return spec


def _fft_order_to_fourier(spec_batch, K):
    """Length-n FFT-order spectra (B, n) -> centered coefficients (B, 2K+1)."""
    n = spec_batch.shape[-1]
    k = _centered_wavenumbers(K)
    return spec_batch[..., k % n]


def burgers_default_dt(u_hat_batch, nu, n):
    """Time step from an advective CFL number of 0.5 at t=0, capped by the
    explicit diffusion stability limit of classical RK4."""
    u0 = np.fft.ifft(u_hat_batch * n, axis=-1).real
    umax = max(float(np.max(np.abs(u0))), 1e-8)
    dt_cfl = 0.5 / (n * umax)
    k_max = n // 3
    dt_diff = 2.5 / (nu * (2.0 * np.pi * k_max) ** 2)
    return min(dt_cfl, dt_diff)


def _burgers_integrate(u_hat, nu, T, n, dt):
    """RK4 integration of the dealiased pseudospectral viscous Burgers equation.

    u_hat: (B, n) series coefficients in FFT order. Nonlinear term 0.5*(u^2)_x
    computed in physical space with 2/3-rule dealiasing.
    """
    k = np.fft.fftfreq(n, d=1.0 / n)
    ik = 2j * np.pi * k
    visc = nu * (2.0 * np.pi * k) ** 2
    dealias = np.abs(k) <= n // 3

    def rhs(v):
        u = np.fft.ifft(v * n, axis=-1).real
        flux = np.fft.fft(0.5 * u * u, axis=-1) / n
        return -ik * (flux * dealias) - visc * v

    n_steps = max(1, int(np.ceil(T / dt)))
    h = T / n_steps
    v = u_hat.copy()
    for _ in range(n_steps):
        k1 = rhs(v)
        k2 = rhs(v + 0.5 * h * k1)
        k3 = rhs(v + 0.5 * h * k2)
        k4 = rhs(v + h * k3)
        v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if np.max(np.abs(v)) > BLOWUP_LIMIT:
            raise FloatingPointError("Burgers solve blew up (coefficient > 1e8)")
    return v


def solve_burgers(u0, nu, T, K_solver=256, dt=None):
    if u0.basis != "fourier" or u0.d != 1:
        raise ValueError("Burgers solver expects a 1D periodic field")
    if nu <= 0:
        raise ValueError("viscosity must be positive")
    n = K_solver
    u_hat = _fourier_to_fft_order(u0, n)[None, :]
    if dt is None:
        dt = burgers_default_dt(u_hat, nu, n)
    v = _burgers_integrate(u_hat, nu, T, n, dt)
    K_out = n // 3
    return SpectralField(d=1, basis="fourier", coeffs=_fft_order_to_fourier(v, K_out)[0], K=K_out)


def default_ns_forcing():
    """0.1*(sin(2*pi*(x+y)) + cos(2*pi*(x+y))) as a periodic spectral field."""
    c = np.zeros((3, 3), dtype=complex)
    # centered index 2 is wavevector (1,1); sin -> -+0.05i, cos -> 0.05
    c[2, 2] = 0.05 - 0.05j
    c[0, 0] = np.conj(c[2, 2])
    return SpectralField(d=2, basis="fourier", coeffs=c, K=1)


def _fourier2d_to_fft_order(field, n):
    if 2 * field.K >= n:
        raise ValueError(f"solver resolution {n} too small for mode cutoff {field.K}")
    spec = np.zeros((n, n), dtype=complex)
    k = _centered_wavenumbers(field.K)
    spec[np.ix_(k % n, k % n)] = field.coeffs
    return spec


def _fft2_order_to_fourier(spec_batch, K):
    n = spec_batch.shape[-1]
    k = _centered_wavenumbers(K)
    return spec_batch[..., (k % n)[:, None], (k % n)[None, :]]


def ns_default_dt(w_hat_batch, n):
    """Advective CFL number 0.5 from the initial velocity field."""
    kx, ky, ksq = _ns_wavenumbers(n)
    psi = np.where(ksq > 0, w_hat_batch / np.where(ksq > 0, ksq, 1.0), 0.0)
    u = np.fft.ifft2(1j * 2 * np.pi * ky * psi * n * n, axes=(-2, -1)).real
    v = np.fft.ifft2(-1j * 2 * np.pi * kx * psi * n * n, axes=(-2, -1)).real
    umax = max(float(np.max(np.abs(u))), float(np.max(np.abs(v))), 1e-8)
    return 0.5 / (n * umax)


def _ns_wavenumbers(n):
    k = np.fft.fftfreq(n, d=1.0 / n)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    ksq = (2.0 * np.pi) ** 2 * (kx**2 + ky**2)
    return kx, ky, ksq


def _ns_integrate(w_hat, nu, T, f_hat, n, dt, energy_trace=None):
    """Crank-Nicolson diffusion with explicit (dealiased) advection + forcing.

    w_hat: (B, n, n) vorticity series coefficients in FFT order.
    """
    kx, ky, ksq = _ns_wavenumbers(n)
    ksq_safe = np.where(ksq > 0, ksq, 1.0)
    k_lim = n // 3
    dealias = (np.abs(kx) <= k_lim) & (np.abs(ky) <= k_lim)

    n_steps = max(1, int(np.ceil(T / dt)))
    h = T / n_steps
    num_visc = 1.0 - 0.5 * h * nu * ksq
    den_visc = 1.0 + 0.5 * h * nu * ksq

    w = w_hat.copy()
    for _ in range(n_steps):
        psi = np.where(ksq > 0, w / ksq_safe, 0.0)  # laplacian(psi) = -omega
        u = np.fft.ifft2(1j * 2 * np.pi * ky * psi * n * n, axes=(-2, -1)).real
        v = np.fft.ifft2(-1j * 2 * np.pi * kx * psi * n * n, axes=(-2, -1)).real
        wx = np.fft.ifft2(1j * 2 * np.pi * kx * w * n * n, axes=(-2, -1)).real
        wy = np.fft.ifft2(1j * 2 * np.pi * ky * w * n * n, axes=(-2, -1)).real
        adv = np.fft.fft2(u * wx + v * wy, axes=(-2, -1)) / (n * n)
        adv *= dealias
        w = (num_visc * w - h * adv + h * f_hat) / den_visc
        if np.max(np.abs(w)) > BLOWUP_LIMIT:
            raise FloatingPointError("Navier-Stokes solve blew up (coefficient > 1e8)")
        if energy_trace is not None:
            energy_trace.append(float(np.sqrt(np.sum(np.abs(w) ** 2))))
    return w


def solve_navier_stokes_vorticity(w0, nu, T, forcing=None, K_solver=64, dt=None,
                                  energy_trace=None):
    if w0.basis != "fourier" or w0.d != 2:
        raise ValueError("Navier-Stokes solver expects a 2D periodic field")
    if nu <= 0:
        raise ValueError("viscosity must be positive")
    n = K_solver
    w_hat = _fourier2d_to_fft_order(w0, n)[None, :, :]
    if forcing is None:
        f_hat = np.zeros((n, n), dtype=complex)
    else:
        f_hat = _fourier2d_to_fft_order(forcing, n)
        if abs(f_hat[0, 0]) > 1e-14:
            raise ValueError("forcing must have zero mean")
    if dt is None:
        dt = ns_default_dt(w_hat, n)
    w = _ns_integrate(w_hat, nu, T, f_hat, n, dt, energy_trace=energy_trace)
    K_out = n // 3
    return SpectralField(d=2, basis="fourier", coeffs=_fft2_order_to_fourier(w, K_out)[0], K=K_out)


# --- evaluation ------------------------------------------------------------

def evaluate_on_grid(field, g):
    """Pointwise evaluation of the truncated series at all grid nodes, using
    the tensor-product structure of the grid."""
    if field.d != g.d:
        raise ValueError("dimension mismatch")
    x = g.axis_nodes()
    if field.basis == "fourier":
        k = _centered_wavenumbers(field.K)
        E = np.exp(2j * np.pi * np.outer(x, k))  # (R, 2K+1)
        if field.d == 1:
            values = (E @ field.coeffs).real
        else:
            values = (E @ field.coeffs @ E.T).real.ravel()
    else:
        i = np.arange(1, field.K + 1)
        S = np.sin(np.pi * np.outer(x, i))  # (R, K)
        values = (S @ field.coeffs @ S.T).ravel()
    return FunctionSample(grid=g, values=values)


# --- problem generators ----------------------------------------------------

class PoissonProblem:
    """Nonlocal Poisson with Dirichlet sine eigenfunctions: random sine-series
    inputs mapped through the spectral fractional inverse Laplacian.

    The input-series law (decay, K, amplitude) is not pinned down by the data
    protocol this mirrors; the defaults give O(1) fields with visible
    multiscale structure.
    """

    d = 2
    name = "poisson"

    def __init__(self, alpha=1.0, decay=2.0, K=12, amplitude=10.0):
        self.alpha = alpha
        self.decay = decay
        self.K = K
        self.amplitude = amplitude

    def config_items(self):
        return {"alpha": self.alpha, "decay": self.decay, "K": self.K,
                "amplitude": self.amplitude}

    def generate_pairs(self, master_seed, count):
        pairs = []
        for i in range(count):
            f = sample_random_fourier_series(
                self.decay, self.K, self.amplitude, seed=[master_seed, i]
            )
            pairs.append((f, solve_fractional_poisson_spectral(f, self.alpha)))
        return pairs


class BurgersProblem:
    """Viscous Burgers on the periodic unit interval: GRF initial conditions
    advanced to time T by the dealiased RK4 pseudospectral solver."""

    d = 1
    name = "burgers"

    def __init__(self, nu=0.005, T=1.0, sigma=5.0, tau=5.0, alpha=2.0, K=64,
                 K_solver=256, dt=None):
        self.nu = nu
        self.T = T
        self.grf = GrfSpec(d=1, sigma=sigma, tau=tau, alpha=alpha, K=K)
        self.K_solver = K_solver
        self.dt = dt

    def config_items(self):
        return {"nu": self.nu, "T": self.T, "sigma": self.grf.sigma,
                "tau": self.grf.tau, "alpha": self.grf.alpha, "K": self.grf.K,
                "K_solver": self.K_solver,
                "dt": self.dt if self.dt is not None else "auto"}

    def generate_pairs(self, master_seed, count):
        """All initial conditions are drawn per-sample (seeded by index) and
        integrated together with one shared time step, so a sample's truth
        depends only on (master_seed, index)."""
        n = self.K_solver
        fields = [
            sample_grf_periodic(self.grf, seed=[master_seed, i]) for i in range(count)
        ]
        u_hat = np.stack([_fourier_to_fft_order(f, n) for f in fields])
        dt = self.dt if self.dt is not None else burgers_default_dt(u_hat, self.nu, n)
        v = _burgers_integrate(u_hat, self.nu, self.T, n, dt)
        K_out = n // 3
        out_coeffs = _fft_order_to_fourier(v, K_out)
        return [
            (fields[i], SpectralField(d=1, basis="fourier", coeffs=out_coeffs[i], K=K_out))
            for i in range(count)
        ]


class NavierStokesProblem:
    """2D incompressible Navier-Stokes in vorticity form on the periodic unit
    square: GRF initial vorticity advanced to time T."""

    d = 2
    name = "navier_stokes"

    def __init__(self, nu=0.001, T=2.2, sigma=7.0**0.75, tau=7.0, alpha=2.5,
                 K=20, K_solver=64, dt=None, forcing="default"):
        self.nu = nu
        self.T = T
        self.grf = GrfSpec(d=2, sigma=sigma, tau=tau, alpha=alpha, K=K)
        self.K_solver = K_solver
        self.dt = dt
        self.forcing = default_ns_forcing() if forcing == "default" else forcing

    def config_items(self):
        return {"nu": self.nu, "T": self.T, "sigma": self.grf.sigma,
                "tau": self.grf.tau, "alpha": self.grf.alpha, "K": self.grf.K,
                "K_solver": self.K_solver, "dt": self.dt if self.dt is not None else "auto",
                "forcing": "none" if self.forcing is None else "default"}

    def generate_pairs(self, master_seed, count):
        n = self.K_solver
        fields = [
            sample_grf_periodic(self.grf, seed=[master_seed, i]) for i in range(count)
        ]
        w_hat = np.stack([_fourier2d_to_fft_order(f, n) for f in fields])
        if self.forcing is None:
            f_hat = np.zeros((n, n), dtype=complex)
        else:
            f_hat = _fourier2d_to_fft_order(self.forcing, n)
        dt = self.dt if self.dt is not None else ns_default_dt(w_hat, n)
        w = _ns_integrate(w_hat, self.nu, self.T, f_hat, n, dt)
        K_out = n // 3
        out_coeffs = _fft2_order_to_fourier(w, K_out)
        return [
            (fields[i], SpectralField(d=2, basis="fourier", coeffs=out_coeffs[i], K=K_out))
            for i in range(count)
        ]


PROBLEMS = {
    "poisson": PoissonProblem,
    "burgers": BurgersProblem,
    "navier_stokes": NavierStokesProblem,
}
