"""Noise spectroscopy: second-order kernel model, correlation fits, spectra, scaling protocol."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .liouville import (
    PAULIS,
    commutator_superop,
    hamiltonian_liouvillian,
    left_multiply,
    right_multiply,
    vec,
)

__all__ = [
    "CorrelationSeries",
    "k2_model",
    "fit_correlations",
    "spectral_density",
    "combine_scaled_kernels",
]

_AXES = {"x": 0, "y": 1, "z": 2}
_AXIS_NAMES = ("x", "y", "z")


@dataclass(frozen=True)
class CorrelationSeries:
    """Fitted correlation functions C_{aa'}(t_n) on a uniform grid.

    values has shape (K, 3, 3) over the (x, y, z) channel grid; entries
    outside the active mask are zero. t0 records where the grid starts:
    0 when the first kernel sample was remapped to t = 0, dt otherwise.
    """

    dt: float
    t0: float
    values: np.ndarray
    active: np.ndarray
    residuals: np.ndarray = field(default=None)
    iterations: np.ndarray = field(default=None)

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.values.shape[0])

    def channel(self, a, b):
        return self.values[:, _AXES[a], _AXES[b]]


def _heisenberg_paulis(hs, t):
    hs = np.asarray(hs, dtype=complex)
    w, v = np.linalg.eigh(hs)
    u = v @ np.diag(np.exp(-1j * w * t)) @ v.conj().T
    return {a: u @ PAULIS[a.upper()] @ u.conj().T for a in _AXIS_NAMES}


def k2_model(corr_at_t, hs, t):
    """Second-order memory kernel for a single qubit at one time point.

    K2(t) = -sum_{aa'} [sigma^a, C_{aa'}(t) sigma^{a'}(t) (.)
                        - C*_{aa'}(t) (.) sigma^{a'}(t)]
    with sigma^{a'}(t) = e^{-iH_s t} sigma^{a'} e^{iH_s t}. The overall
    minus puts the kernel on the +int K rho side of the master equation,
    so pure z dephasing gives rhodot_12 = -4 C_zz(0) rho_12 at t = 0.
    """
    corr = np.asarray(corr_at_t, dtype=complex)
    if corr.shape != (3, 3):
        raise ValueError("corr_at_t must be a 3x3 channel matrix")
    sig_t = _heisenberg_paulis(hs, t)
    out = np.zeros((4, 4), dtype=complex)
    for a in _AXIS_NAMES:
        comm_a = commutator_superop(PAULIS[a.upper()])
        for b in _AXIS_NAMES:
            c = corr[_AXES[a], _AXES[b]]
            if c == 0:
                continue
            out -= comm_a @ (c * left_multiply(sig_t[b]) - np.conj(c) * right_multiply(sig_t[b]))
    return out


def _design_columns(hs, t, channels):
    cols = []
    for a, b in channels:
        unit = np.zeros((3, 3))
        unit[_AXES[a], _AXES[b]] = 1.0
        g = k2_model(unit, hs, t)
        cols.append(np.concatenate([vec(g).real, vec(g).imag]))
    return np.column_stack(cols)


def _solve_one(a_mat, b_vec, lam, c_prev, c_start, knee, max_iter):
    # minimize |A c - b|_2 + lam * sum_i |c_i - c_prev_i| over real c,
    # by iteratively reweighted least squares with a Huber knee on both terms.
    if lam == 0 or c_prev is None:
        c, *_ = np.linalg.lstsq(a_mat, b_vec, rcond=None)
        return c, float(np.linalg.norm(a_mat @ c - b_vec)), 1
    eps_data = 1e-12 * max(1.0, float(np.linalg.norm(b_vec)))
    c = c_start.copy()
    ata = a_mat.T @ a_mat
    atb = a_mat.T @ b_vec
    iters = 0
    for iters in range(1, max_iter + 1):
        r = float(np.linalg.norm(a_mat @ c - b_vec))
        w_data = 1.0 / max(r, eps_data)
        w_reg = lam / np.maximum(np.abs(c - c_prev), knee)
        lhs = w_data * ata + np.diag(w_reg)
        rhs = w_data * atb + w_reg * c_prev
        c_new = np.linalg.solve(lhs, rhs)
        shift = float(np.max(np.abs(c_new - c)))
        c = c_new
        if shift < 1e-12 * max(1.0, float(np.max(np.abs(c)))):
            break
    return c, float(np.linalg.norm(a_mat @ c - b_vec)), iters


def fit_correlations(
    kernels,
    hs,
    dt,
    active=(("z", "z"),),
    lambdas=None,
    correct_first_point=True,
    knee=1e-6,
    max_iter=60,
):
    """Recover real correlation functions from a sampled memory kernel.

    Solves, sequentially in n, min_C |K2(t_n; C) - K_exp(t_n)|_F
    + lambda_n * sum over active channels of |C(t_n) - C(t_{n-1})|,
    warm-starting each point at the previous solution. The continuity
    term uses a Huber knee so it stays differentiable near zero.

    Parameters
    ----------
    kernels : sequence of (4, 4) arrays
        Output of extract_kernel, i.e. samples at t_1..t_K.
    hs : (2, 2) Hermitian array
        System Hamiltonian, needed for the interaction-picture rotation
        and the first-point correction.
    active : sequence of (a, b) axis-label pairs
        Channels allowed to be nonzero; everything else is pinned to 0.
    lambdas : scalar or length-K sequence, optional
        Continuity weights. Default 0.1 |K_exp(t_1)|_F at every point.
    correct_first_point : bool
        The discrete kernel's first sample equals (K(0) + L_s^2) / 2, and
        every later sample sits one slot late. When True (default) the
        fit removes the L_s^2 half, doubles the remainder, and associates
        slot j with time j dt. When False samples are taken at face value
        at times (j + 1) dt.

    Returns
    -------
    CorrelationSeries
    """
    kernels = [np.asarray(k, dtype=complex) for k in kernels]
    n_points = len(kernels)
    hs = np.asarray(hs, dtype=complex)
    channels = [(a, b) for a, b in active]
    for a, b in channels:
        if a not in _AXES or b not in _AXES:
            raise ValueError(f"unknown channel ({a}, {b})")

    if correct_first_point:
        ls = hamiltonian_liouvillian(hs)
        data = [2.0 * kernels[0] - ls @ ls] + kernels[1:]
        t0 = 0.0
    else:
        data = kernels
        t0 = dt

    if lambdas is None:
        lambdas = 0.1 * float(np.linalg.norm(kernels[0]))
    lam_seq = np.broadcast_to(np.asarray(lambdas, dtype=float), (n_points,))

    values = np.zeros((n_points, 3, 3), dtype=complex)
    residuals = np.zeros(n_points)
    iterations = np.zeros(n_points, dtype=int)
    c_prev = None
    c_warm = np.zeros(len(channels))
    for n in range(n_points):
        t_n = t0 + n * dt
        a_mat = _design_columns(hs, t_n, channels)
        b_vec = np.concatenate([vec(data[n]).real, vec(data[n]).imag])
        lam = 0.0 if n == 0 else float(lam_seq[n])
        c, res, iters = _solve_one(a_mat, b_vec, lam, c_prev, c_warm, knee, max_iter)
        for (a, b), value in zip(channels, c):
            values[n, _AXES[a], _AXES[b]] = value
        residuals[n] = res
        iterations[n] = iters
        c_prev = c
        c_warm = c

    mask = np.zeros((3, 3), dtype=bool)
    for a, b in channels:
        mask[_AXES[a], _AXES[b]] = True
    return CorrelationSeries(dt, t0, values, mask, residuals, iterations)


def spectral_density(series, channel=("z", "z"), kind="classical", pad_factor=4):
    """Fourier transform of a fitted correlation function.

    classical: S(w) = dt * sum_n C(t_n) e^{i w t_n} over the two-sided
    extension C_ab(-t) = C_ba(t) (Wiener-Khinchin convention).
    quantum: J(w) = (1/2) dt * sum_n (C(t_n) - C*(t_n)) e^{i w t_n} over
    the extension C(-t) = C*(t); identically zero for real input.

    The grid starts at t = 0, so require series.t0 == 0. Returns
    (omega, s) with omega ascending and s real.
    """
    if isinstance(series, CorrelationSeries):
        if series.t0 != 0.0:
            raise ValueError("spectral grids need t0 = 0; fit with correct_first_point=True")
        a, b = channel
        fwd = series.channel(a, b)
        rev = series.channel(b, a)
        if not series.active[_AXES[b], _AXES[a]]:
            rev = fwd
        dt = series.dt
    else:
        fwd = np.asarray(series, dtype=complex)
        rev = fwd
        dt = channel if np.isscalar(channel) else None
        if dt is None:
            raise ValueError("pass dt as the second argument for plain arrays")

    k = len(fwd)
    if kind == "classical":
        neg = rev[1:][::-1]
        full = np.concatenate([neg, fwd])
    elif kind == "quantum":
        fwd = 0.5 * (fwd - np.conj(fwd))
        neg = np.conj(fwd[1:])[::-1]
        full = np.concatenate([neg, fwd])
    else:
        raise ValueError(f"unknown kind {kind!r}")

    n_full = 2 * k - 1
    n_pad = pad_factor * n_full
    if n_pad % 2 == 0:
        n_pad += 1  # odd grid keeps +w/-w in exact pairs
    omega = 2.0 * np.pi * np.fft.fftfreq(n_pad, dt)
    # S(w_m) = dt * sum_j full_j e^{i w_m t_j}, t_j = (j - (k-1)) dt
    spec = dt * n_pad * np.fft.ifft(full, n_pad) * np.exp(-1j * omega * (k - 1) * dt)
    order = np.argsort(omega)
    spec = spec[order]
    if np.max(np.abs(spec.imag)) > 1e-8 * max(np.max(np.abs(spec)), 1e-30):
        raise ValueError("spectral transform came out complex; check the input symmetry")
    return omega[order], spec.real


def combine_scaled_kernels(kernels, gammas=None, biases=None, dt=None):
    """Strip higher-order kernel contributions from a family of scaled runs.

    The expansion K = K2 + K4 + ... scales as K_{2n, i} = g_i^{2n} K_{2n, 0}
    across experiments indexed by i. Supplying N runs determines the first
    N even orders; the returned series is the solved K2 of run 0.

    Two ways to declare the scaling:
    - gammas: direct scale factors g_i (g_0 = 1), e.g. coupling ratios
      sqrt(lambda_i / lambda_0). All runs share the same time grid.
    - biases: system frequencies w_i with w_0 the reference; g_i = w_0/w_i.
      Runs are compared on the dimensionless grid tau = w_i t, so the
      kernels are rescaled by 1/w_i^2 and linearly interpolated onto the
      reference grid (requires dt and w_i >= w_0).

    Returns
    -------
    (k2_series, info) where info carries the Vandermonde condition number.
    """
    stack = np.asarray(kernels, dtype=complex)
    if stack.ndim != 4:
        raise ValueError("kernels must stack as (runs, times, d^2, d^2)")
    n_runs, n_times = stack.shape[:2]
    if (gammas is None) == (biases is None):
        raise ValueError("pass exactly one of gammas or biases")

    if gammas is not None:
        g = np.asarray(gammas, dtype=float)
        tilde = stack
    else:
        w = np.asarray(biases, dtype=float)
        if dt is None:
            raise ValueError("biases route needs dt to build the dimensionless grids")
        if np.any(w[1:] < w[0]):
            raise ValueError("bias frequencies must not fall below the reference w_0")
        g = w[0] / w
        t_grid = dt * np.arange(1, n_times + 1)
        tau_ref = w[0] * t_grid
        tilde = np.empty_like(stack)
        for i in range(n_runs):
            tau_i = w[i] * t_grid
            scaled = stack[i] / w[i] ** 2
            flat = scaled.reshape(n_times, -1)
            interp = np.empty_like(flat)
            for col in range(flat.shape[1]):
                interp[:, col] = np.interp(tau_ref, tau_i, flat[:, col].real) + 1j * np.interp(
                    tau_ref, tau_i, flat[:, col].imag
                )
            tilde[i] = interp.reshape(stack[i].shape)

    if len(g) != n_runs:
        raise ValueError("need one scale factor per kernel series")
    powers = np.arange(1, n_runs + 1)
    vand = g[:, None] ** (2 * powers[None, :])
    unit = np.zeros(n_runs)
    unit[0] = 1.0
    weights = np.linalg.solve(vand.T, unit)  # first row of vand^{-1}
    k2 = np.einsum("i,itab->tab", weights, tilde)
    if gammas is None:
        k2 = k2 * w[0] ** 2
    info = {"condition": float(np.linalg.cond(vand)), "gammas": g}
    return k2, info
