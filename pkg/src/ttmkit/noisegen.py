"""Stationary colored Gaussian noise: correlation models and path sampling.

Noise enters the simulator as a vector of real classical processes B_a(t),
jointly Gaussian, zero mean, stationary. The default correlation family is
exponentially damped cosines; arbitrary correlations can be injected
through ``corr_fn``.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

# eigh of the space-time covariance scales cubically; this cap keeps a
# misconfigured grid from silently eating minutes.
_MAX_COV_SIDE = 4096


@dataclass(frozen=True)
class NoisePath:
    """One realization of the noise vector on a uniform step grid.

    values[a, k] is channel a frozen over step k, sampled at the step
    midpoint (k + 1/2) dt. Stationarity makes the sample covariance between
    steps m and n equal to C(|m - n| dt) regardless of the half-step shift.
    """

    dt: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.atleast_2d(np.asarray(self.values, dtype=float))
        if not np.all(np.isfinite(vals)):
            raise ValueError("noise path contains non-finite values")
        object.__setattr__(self, "values", vals)

    @property
    def n_channels(self):
        return self.values.shape[0]

    @property
    def n_steps(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean stationary Gaussian noise on one or more channels.

    Parameters
    ----------
    kappas : tuple of float
        Per-channel correlation decay rates.
    omegas : tuple of float
        Per-channel modulation frequencies of the correlation function.
    cross : ndarray, shape (n, n)
        Symmetric amplitude matrix. The diagonal entry ``cross[a, a]`` is
        the coupling strength (variance) of channel a; off-diagonal entries
        set equal-time cross-correlations.
    corr_fn : callable, optional
        Override ``corr_fn(tau) -> (n, n) array`` replacing the default
        damped-cosine form. ``tau`` may be any ndarray; the result must
        broadcast with shape ``tau.shape + (n, n)``.

    Notes
    -----
    With the default form the cross-channel correlation is

        C_ab(tau) = cross[a, b] exp(-kappa_ab |tau|) cos(omega_ab tau)

    where kappa_ab and omega_ab are arithmetic means of the channel rates.
    The resulting space-time covariance is not automatically positive
    semidefinite for arbitrary ``cross``; the sampler checks and refuses
    inconsistent models.
    """

    kappas: tuple
    omegas: tuple
    cross: np.ndarray
    corr_fn: Optional[Callable] = None

    def __post_init__(self):
        cross = np.atleast_2d(np.asarray(self.cross, dtype=float))
        object.__setattr__(self, "cross", cross)
        object.__setattr__(self, "kappas", tuple(float(k) for k in np.atleast_1d(self.kappas)))
        object.__setattr__(self, "omegas", tuple(float(w) for w in np.atleast_1d(self.omegas)))
        n = len(self.kappas)
        if len(self.omegas) != n or cross.shape != (n, n):
            raise ValueError("kappas, omegas and cross disagree on the channel count")
        if not np.allclose(cross, cross.T):
            raise ValueError("cross amplitude matrix must be symmetric")

    @property
    def n_channels(self):
        return len(self.kappas)

    @classmethod
    def single(cls, coupling, kappa, omega=0.0):
        """One channel with C(tau) = coupling * exp(-kappa|tau|) cos(omega tau)."""
        return cls(kappas=(kappa,), omegas=(omega,), cross=np.array([[float(coupling)]]))

    @classmethod
    def independent(cls, couplings, kappas, omegas=None):
        """Uncorrelated channels with per-channel damped-cosine correlations."""
        couplings = np.atleast_1d(np.asarray(couplings, dtype=float))
        if omegas is None:
            omegas = np.zeros_like(couplings)
        return cls(kappas=tuple(np.atleast_1d(kappas)), omegas=tuple(np.atleast_1d(omegas)),
                   cross=np.diag(couplings))

    def correlation(self, tau):
        """Correlation matrix C(tau), shape ``tau.shape + (n, n)``."""
        tau = np.asarray(tau, dtype=float)
        if self.corr_fn is not None:
            out = np.asarray(self.corr_fn(tau), dtype=float)
            want = tau.shape + (self.n_channels, self.n_channels)
            if out.shape != want:
                raise ValueError(f"corr_fn returned shape {out.shape}, expected {want}")
            return out
        k = np.asarray(self.kappas)
        w = np.asarray(self.omegas)
        kab = 0.5 * (k[:, None] + k[None, :])
        wab = 0.5 * (w[:, None] + w[None, :])
        t = tau[..., None, None]
        return self.cross * np.exp(-kab * np.abs(t)) * np.cos(wab * t)

    def correlation_entry(self, a, b, tau):
        """Scalar-channel correlation C_ab(tau) with ``tau`` any ndarray."""
        return self.correlation(tau)[..., a, b]

    def phase_variance(self, t, a=0, b=None):
        """Double time integral Phi_ab(t) = int_0^t int_0^t C_ab(s - s') ds ds'.

        Equals 2 * int_0^t (t - s) C_ab(s) ds by stationarity. Closed form
        for the damped-cosine family, numeric quadrature otherwise.
        """
        if b is None:
            b = a
        t = np.asarray(t, dtype=float)
        if self.corr_fn is None:
            amp = self.cross[a, b]
            kab = 0.5 * (self.kappas[a] + self.kappas[b])
            wab = 0.5 * (self.omegas[a] + self.omegas[b])
            mu = kab - 1.0j * wab
            if abs(mu) < 1e-300:
                return amp * t * t
            val = t / mu - (1.0 - np.exp(-mu * t)) / mu**2
            return 2.0 * amp * np.real(val)

        def one(tt):
            f = lambda s: (tt - s) * self.correlation_entry(a, b, np.asarray(s))
            val, _ = integrate.quad(f, 0.0, tt, limit=200)
            return 2.0 * val

        if t.ndim == 0:
            return one(float(t))
        return np.array([one(float(tt)) for tt in t])

    def spectral_density(self, omega, a=0, b=None):
        """S_ab(omega) = int_-inf^inf C_ab(tau) exp(i omega tau) d tau.

        Closed form (pair of Lorentzians) for the damped-cosine family.
        """
        if b is None:
            b = a
        if self.corr_fn is not None:
            raise NotImplementedError("spectral density of a custom corr_fn is not tabulated")
        omega = np.asarray(omega, dtype=float)
        amp = self.cross[a, b]
        kab = 0.5 * (self.kappas[a] + self.kappas[b])
        wab = 0.5 * (self.omegas[a] + self.omegas[b])
        return amp * kab * (1.0 / (kab**2 + (omega - wab) ** 2)
                            + 1.0 / (kab**2 + (omega + wab) ** 2))


class GaussianPathSampler:
    """Exact sampler for jointly Gaussian channel values on a fixed time grid.

    Builds the full space-time covariance over (channel, time) pairs and
    factorizes it once; each draw is then a matrix product. Exactness on
    the grid matters more here than asymptotic cost because the grids are
    short (hundreds of points) while the path counts are large.
    """

    def __init__(self, model, times, tol=1e-10):
        self.model = model
        self.times = np.asarray(times, dtype=float)
        n = model.n_channels
        m = self.times.size
        if n * m > _MAX_COV_SIDE:
            raise ValueError(
                f"covariance side {n * m} exceeds {_MAX_COV_SIDE}; coarsen the grid")
        # cov[(a, i), (b, j)] = C_ab(t_i - t_j)
        lags = self.times[:, None] - self.times[None, :]
        cmat = model.correlation(lags)  # (m, m, n, n)
        cov = cmat.transpose(2, 0, 3, 1).reshape(n * m, n * m)
        cov = 0.5 * (cov + cov.T)
        w, v = np.linalg.eigh(cov)
        scale = max(w[-1], 1.0)
        if w[0] < -tol * scale:
            raise ValueError(
                f"noise model covariance is not positive semidefinite "
                f"(min eigenvalue {w[0]:.3e}); check the cross matrix")
        w = np.clip(w, 0.0, None)
        self._factor = v * np.sqrt(w)
        self._shape = (n, m)

    def sample(self, rng, n_paths):
        """Draw paths, returned with shape (n_paths, n_channels, n_times)."""
        n, m = self._shape
        z = rng.standard_normal((n_paths, n * m))
        return (z @ self._factor.T).reshape(n_paths, n, m)

    def covariance(self):
        """The exact covariance realized by :meth:`sample`, channel-major.

        Index (a, i) flattens to a * n_times + i. Equals the model covariance
        up to the PSD eigenvalue clip applied at construction.
        """
        return self._factor @ self._factor.T


def sample_paths(model, dt, n_steps, seed, n_paths=None):
    """Draw jointly Gaussian noise paths on a uniform step grid.

    Values are taken at step midpoints (k + 1/2) dt, matching how the
    propagator freezes noise within a step. Deterministic given seed.

    Returns a :class:`NoisePath` by default; with ``n_paths`` set, an
    array of shape (n_paths, n_channels, n_steps).
    """
    if dt <= 0 or n_steps < 1:
        raise ValueError("need dt > 0 and n_steps >= 1")
    times = (np.arange(n_steps) + 0.5) * dt
    sampler = GaussianPathSampler(model, times)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    if n_paths is None:
        return NoisePath(dt, sampler.sample(rng, 1)[0])
    return sampler.sample(rng, n_paths)
