"""Ensemble propagation under classical colored noise.

Each trajectory evolves under H(t) = h_system + sum_a B_a(t) coupling_a
with B drawn from a :class:`~ttmkit.noisegen.NoiseModel`. Noise values are
frozen at substep midpoints, so every per-path propagator is an ordered
product of piecewise-constant steps. The ensemble-averaged dynamical maps

    E_k = < U(k dt) (x) conj(U(k dt)) >

are trace preserving for every sample size because each summand is a
unitary conjugation; no per-map renormalization is ever needed.

Purely longitudinal models (diagonal Hamiltonian and couplings) take an
exact fast path through accumulated phase integrals, which for commuting
generators reproduces the substep product to machine precision.
"""

from dataclasses import dataclass

import numpy as np

from .liouville import SIGMA_X, SIGMA_Y, SIGMA_Z, commutator_superop, unitary_superop
from .noisegen import GaussianPathSampler, NoiseModel


@dataclass(frozen=True)
class SystemModel:
    """Static system Hamiltonian plus noise channels with coupling operators.

    Parameters
    ----------
    h_system : ndarray
        Hermitian d x d system Hamiltonian.
    couplings : tuple of ndarray
        One Hermitian d x d operator per noise channel; channel a
        contributes B_a(t) * couplings[a] to the Hamiltonian.
    noise : NoiseModel
    """

    h_system: np.ndarray
    couplings: tuple
    noise: NoiseModel

    def __post_init__(self):
        h = np.asarray(self.h_system, dtype=complex)
        object.__setattr__(self, "h_system", h)
        object.__setattr__(self, "couplings",
                           tuple(np.asarray(c, dtype=complex) for c in self.couplings))
        if len(self.couplings) != self.noise.n_channels:
            raise ValueError("one coupling operator per noise channel is required")
        for op in (h,) + self.couplings:
            if op.shape != h.shape or op.ndim != 2 or op.shape[0] != op.shape[1]:
                raise ValueError("operators must share one square shape")
            if np.linalg.norm(op - op.conj().T) > 1e-12 * max(1.0, np.linalg.norm(op)):
                raise ValueError("operators must be Hermitian")

    @property
    def dim(self):
        return self.h_system.shape[0]

    @property
    def is_diagonal(self):
        ops = (self.h_system,) + self.couplings
        return all(np.allclose(op, np.diag(np.diagonal(op)), atol=1e-14) for op in ops)


def free_evolution_superop(h, t):
    """Superoperator of the noiseless evolution exp(-i h t) rho exp(+i h t)."""
    h = np.asarray(h, dtype=complex)
    w, v = np.linalg.eigh(h)
    u = (v * np.exp(-1.0j * w * t)) @ v.conj().T
    return unitary_superop(u)


def evolve_trajectory(model, path, rho0):
    """Propagate one state along one noise realization.

    Each step applies U_k = exp(-i H_k dt) with H_k the Hamiltonian frozen
    at the step midpoint value stored in ``path``; the per-path evolution is
    exactly unitary, so purity and trace survive to machine precision.

    Returns the states at t_1 .. t_n as an (n_steps, d, d) array.
    """
    values = np.asarray(path.values, dtype=float)
    if values.shape[0] != model.noise.n_channels:
        raise ValueError("path channel count does not match the model")
    if not np.all(np.isfinite(values)):
        raise ValueError("noise path contains non-finite values")
    rho = np.asarray(rho0, dtype=complex)
    d = model.dim
    if rho.shape != (d, d):
        raise ValueError("rho0 dimension does not match the model")
    ops = np.stack(model.couplings)
    out = np.empty((values.shape[1], d, d), dtype=complex)
    for k in range(values.shape[1]):
        h = model.h_system + np.einsum("a,aij->ij", values[:, k], ops)
        w, v = np.linalg.eigh(h)
        u = (v * np.exp(-1.0j * w * path.dt)) @ v.conj().T
        rho = u @ rho @ u.conj().T
        out[k] = rho
    return out


def _diag_parts(model):
    h = np.real(np.diagonal(model.h_system))
    z = np.stack([np.real(np.diagonal(c)) for c in model.couplings])
    return h, z


def _pauli_coeffs(op):
    # Hermitian 2x2 -> (a0, vx, vy, vz) with op = a0 I + v . sigma
    a0 = 0.5 * np.real(op[0, 0] + op[1, 1])
    vx = 0.5 * np.real(op[0, 1] + op[1, 0])
    vy = 0.5 * np.imag(op[1, 0] - op[0, 1])
    vz = 0.5 * np.real(op[0, 0] - op[1, 1])
    return a0, np.array([vx, vy, vz])


def _su2_steps(a0, v, dt_sub):
    """Batched exp(-i (a0 I + v . sigma) dt) for a0 (P,), v (P, 3)."""
    norm = np.linalg.norm(v, axis=1)
    theta = norm * dt_sub
    cos_t = np.cos(theta)
    # sin(theta)/norm, finite at norm -> 0
    s = dt_sub * np.sinc(theta / np.pi)
    phase = np.exp(-1.0j * a0 * dt_sub)
    u = np.empty(v.shape[:1] + (2, 2), dtype=complex)
    u[:, 0, 0] = cos_t - 1.0j * s * v[:, 2]
    u[:, 0, 1] = -1.0j * s * (v[:, 0] - 1.0j * v[:, 1])
    u[:, 1, 0] = -1.0j * s * (v[:, 0] + 1.0j * v[:, 1])
    u[:, 1, 1] = cos_t + 1.0j * s * v[:, 2]
    return phase[:, None, None] * u


def _superop_sum(u):
    """sum_p U_p (x) conj(U_p) for a batch of unitaries (P, d, d)."""
    d = u.shape[-1]
    return np.einsum("pab,pcd->acbd", u, u.conj()).reshape(d * d, d * d)


def _chunk_map_sums(model, b, dt_sub, boundary):
    """Per-chunk sums (not means) of the maps at the given substep boundaries."""
    d = model.dim
    n_steps = boundary.size
    out = np.empty((n_steps, d * d, d * d), dtype=complex)

    if model.is_diagonal:
        hdiag, zdiag = _diag_parts(model)
        w = np.cumsum(b, axis=-1) * dt_sub
        wk = w[:, :, boundary]
        tk = dt_sub * (boundary + 1.0)
        phases = hdiag[None, :, None] * tk[None, None, :] \
            + np.einsum("pak,ar->prk", wk, zdiag)
        for k in range(n_steps):
            dvals = np.exp(-1.0j * phases[:, :, k])
            g = dvals.T @ dvals.conj()
            out[k] = np.diag(g.reshape(-1))
        return out

    n_paths, _, n_sub = b.shape
    u_cum = np.broadcast_to(np.eye(d, dtype=complex), (n_paths, d, d)).copy()
    pos = 0
    if d == 2:
        a0_sys, v_sys = _pauli_coeffs(model.h_system)
        coeffs = [_pauli_coeffs(c) for c in model.couplings]
        a0_coup = np.array([c[0] for c in coeffs])
        v_coup = np.stack([c[1] for c in coeffs])
        for j in range(n_sub):
            a0 = a0_sys + b[:, :, j] @ a0_coup
            v = v_sys[None, :] + b[:, :, j] @ v_coup
            u_cum = _su2_steps(a0, v, dt_sub) @ u_cum
            if pos < n_steps and j == boundary[pos]:
                out[pos] = _superop_sum(u_cum)
                pos += 1
        return out

    ops = np.stack(model.couplings)
    for j in range(n_sub):
        h = model.h_system[None, :, :] + np.einsum("pa,aij->pij", b[:, :, j], ops)
        w, v = np.linalg.eigh(h)
        step = np.einsum("pij,pj,pkj->pik", v, np.exp(-1.0j * w * dt_sub), v.conj())
        u_cum = step @ u_cum
        if pos < n_steps and j == boundary[pos]:
            out[pos] = _superop_sum(u_cum)
            pos += 1
    return out


def _cv_generators(model, dt_sub, midpoints):
    """Interaction-picture noise generators, one per (channel, substep).

    g[a, j] = dt_sub * S_free(-s_j) (-i [sigma_a, .]) S_free(s_j) with s_j
    the substep midpoint. These are the linear-response coefficients of the
    exact per-path map with respect to the frozen noise values.
    """
    d = model.dim
    lv = [-1.0j * commutator_superop(c) for c in model.couplings]
    w, v = np.linalg.eigh(model.h_system)
    g = np.empty((len(lv), midpoints.size, d * d, d * d), dtype=complex)
    for j, s in enumerate(midpoints):
        u = (v * np.exp(-1.0j * w * s)) @ v.conj().T
        sf = unitary_superop(u)
        sb = unitary_superop(u.conj().T)
        for a in range(len(lv)):
            g[a, j] = dt_sub * (sb @ lv[a] @ sf)
    return g


def _cv_corrections(model, g, bbar, delta_m, boundary, dt):
    """Second-order map functional evaluated on the sampled-moment excess.

    Accumulates, substep by substep in time order,

        sum_J bbar_J g_J
      + sum_{j > j'} sum_{a a'} dM[(a,j),(a',j')] g_{a j} g_{a' j'}
      + (1/2) sum_j sum_{a a'} dM[(a,j),(a',j)] g_{a j} g_{a' j}

    and left-multiplies by the free map at each boundary. Subtracting this
    from the raw ensemble mean removes the sampling fluctuation of the first
    and second noise moments while leaving the expectation untouched.
    """
    n_ch, n_sub = g.shape[:2]
    d2 = g.shape[-1]
    acc = np.zeros((d2, d2), dtype=complex)
    out = np.empty((len(boundary), d2, d2), dtype=complex)
    pos = 0
    for j in range(n_sub):
        gj = g[:, j]
        if j > 0:
            inner = np.einsum("abk,bkuv->auv", delta_m[:, j, :, :j], g[:, :j])
            for a in range(n_ch):
                acc += gj[a] @ inner[a]
        inner_same = np.einsum("ab,buv->auv", delta_m[:, j, :, j], gj)
        for a in range(n_ch):
            acc += 0.5 * (gj[a] @ inner_same[a])
        acc += np.einsum("a,auv->uv", bbar[:, j], gj)
        if pos < len(boundary) and j == boundary[pos]:
            out[pos] = free_evolution_superop(model.h_system, dt * (pos + 1)) @ acc
            pos += 1
    return out


def simulate_process(model, dt, n_steps, n_traj, substeps=8, seed=0,
                     antithetic=False, chunk_size=1024, collect_chunk_means=False,
                     control_variate=False):
    """Monte Carlo estimate of the dynamical maps on a uniform step grid.

    Parameters
    ----------
    model : SystemModel
    dt : float
        Spacing of the map grid; maps are returned at dt, 2 dt, ..., n_steps dt.
    n_steps : int
    n_traj : int
        Total number of trajectories averaged (mirror paths included when
        ``antithetic`` is set, so the count must then be even).
    substeps : int
        Noise-freezing subdivisions per map step.
    seed : int
        Master seed. Each chunk derives its generator from
        ``SeedSequence((seed, chunk_index))``, so results are independent
        of ``chunk_size`` only chunk by chunk; fixing both gives bit-stable
        output across runs.
    antithetic : bool
        Pair every path with its sign-flipped noise. Exact variance kill
        for observables odd in B, typically large gains for weak coupling.
    collect_chunk_means : bool
        Also return the per-chunk map means, shaped
        (n_chunks, n_steps, d^2, d^2), for Monte Carlo error estimates.
        Chunks are equal-weight in that array; choose n_traj divisible by
        chunk_size when using it. Chunk means are raw, without the
        control-variate correction.
    control_variate : bool
        Subtract the second-order moment-matching control variate: the
        known response of the maps to the first and second sample moments
        of the noise, evaluated on (sample moments - exact moments). The
        estimator stays exactly unbiased for any sample size because the
        subtracted functional is linear in those moments; its fluctuation
        from moments up to second order is removed entirely, which is the
        dominant Monte Carlo error at weak coupling once ``antithetic``
        has killed the odd orders.

    Returns
    -------
    maps : list of ndarray
        n_steps superoperators of shape (d^2, d^2).
    chunk_means : ndarray, only when ``collect_chunk_means``
    """
    if antithetic and n_traj % 2:
        raise ValueError("antithetic sampling needs an even n_traj")
    d = model.dim
    n_sub = n_steps * substeps
    dt_sub = dt / substeps
    midpoints = (np.arange(n_sub) + 0.5) * dt_sub
    sampler = GaussianPathSampler(model.noise, midpoints)
    boundary = substeps * np.arange(1, n_steps + 1) - 1

    n_ch = model.noise.n_channels
    n_flat = n_ch * n_sub
    sum_b = np.zeros(n_flat)
    sum_gram = np.zeros((n_flat, n_flat))

    n_draw = n_traj // 2 if antithetic else n_traj
    acc = np.zeros((n_steps, d * d, d * d), dtype=complex)
    chunk_means = []
    done = 0
    chunk_idx = 0
    while done < n_draw:
        p = min(chunk_size, n_draw - done)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, chunk_idx))))
        b = sampler.sample(rng, p)
        if antithetic:
            b = np.concatenate([b, -b], axis=0)
        contrib = _chunk_map_sums(model, b, dt_sub, boundary)
        acc += contrib
        if control_variate:
            flat = b.reshape(b.shape[0], n_flat)
            sum_b += flat.sum(axis=0)
            sum_gram += flat.T @ flat
        if collect_chunk_means:
            chunk_means.append(contrib / b.shape[0])
        done += p
        chunk_idx += 1

    maps = [acc[k] / n_traj for k in range(n_steps)]
    if control_variate:
        bbar = (sum_b / n_traj).reshape(n_ch, n_sub)
        delta_m = (sum_gram / n_traj - sampler.covariance()).reshape(
            n_ch, n_sub, n_ch, n_sub)
        g = _cv_generators(model, dt_sub, midpoints)
        corrections = _cv_corrections(model, g, bbar, delta_m, boundary, dt)
        maps = [m - c for m, c in zip(maps, corrections)]
    if collect_chunk_means:
        return maps, np.array(chunk_means)
    return maps


def simulate_pulsed_process(model, segments, n_cycles, n_traj, substeps=2,
                            seed=0, chunk_size=1024):
    """Ensemble maps at cycle boundaries of a pulsed sequence.

    ``segments`` is a sequence of ``(duration, pulse)`` pairs run in order
    within each cycle: free evolution under the noisy Hamiltonian for
    ``duration``, then the instantaneous unitary ``pulse`` (or None). Only
    purely longitudinal models are supported; segment propagators are then
    exact diagonal phases given the sampled noise integrals.

    Returns a list of n_cycles superoperators, one per completed cycle.
    """
    if not model.is_diagonal:
        raise NotImplementedError("pulsed simulation expects a diagonal noise model")
    d = model.dim
    hdiag, zdiag = _diag_parts(model)
    durations = np.array([float(s[0]) for s in segments])
    pulses = [None if s[1] is None else np.asarray(s[1], dtype=complex) for s in segments]
    n_seg = len(segments)

    # Global midpoint grid: `substeps` per segment, all cycles concatenated.
    starts = np.concatenate([[0.0], np.cumsum(np.tile(durations, n_cycles))])[:-1]
    seg_durs = np.tile(durations, n_cycles)
    mids = []
    for t0, tau in zip(starts, seg_durs):
        mids.append(t0 + (np.arange(substeps) + 0.5) * (tau / substeps))
    midpoints = np.concatenate(mids)
    sampler = GaussianPathSampler(model.noise, midpoints)

    acc = np.zeros((n_cycles, d * d, d * d), dtype=complex)
    done = 0
    chunk_idx = 0
    while done < n_traj:
        p = min(chunk_size, n_traj - done)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, chunk_idx))))
        b = sampler.sample(rng, p)
        u_cum = np.broadcast_to(np.eye(d, dtype=complex), (p, d, d)).copy()
        for s in range(n_seg * n_cycles):
            tau = seg_durs[s]
            sl = slice(s * substeps, (s + 1) * substeps)
            w_seg = b[:, :, sl].sum(axis=-1) * (tau / substeps)
            phi = hdiag[None, :] * tau + w_seg @ zdiag
            u_cum = np.exp(-1.0j * phi)[:, :, None] * u_cum
            pulse = pulses[s % n_seg]
            if pulse is not None:
                u_cum = np.einsum("ab,pbc->pac", pulse, u_cum)
            if (s + 1) % n_seg == 0:
                acc[(s + 1) // n_seg - 1] += _superop_sum(u_cum)
        done += p
        chunk_idx += 1
    return [acc[k] / n_traj for k in range(n_cycles)]


def dephasing_map(model, t):
    """Exact ensemble map at time t for a purely longitudinal model.

    Gaussian averaging gives, per matrix element (r, c),

        E[(r,c),(r,c)] = exp(-i (h_r - h_c) t) exp(-Var/2),
        Var = sum_ab (z_ar - z_ac)(z_br - z_bc) Phi_ab(t),

    with Phi_ab the double time integral of the noise correlation. This is
    the closed-form counterpart of :func:`simulate_process` in the limit of
    infinitely many trajectories and substeps.
    """
    if not model.is_diagonal:
        raise ValueError("closed-form maps exist only for diagonal models")
    d = model.dim
    hdiag, zdiag = _diag_parts(model)
    n_ch = zdiag.shape[0]
    phi = np.array([[model.noise.phase_variance(t, a, b) for b in range(n_ch)]
                    for a in range(n_ch)])
    diag = np.empty(d * d, dtype=complex)
    for r in range(d):
        for c in range(d):
            dz = zdiag[:, r] - zdiag[:, c]
            var = dz @ phi @ dz
            diag[d * r + c] = np.exp(-1.0j * (hdiag[r] - hdiag[c]) * t - 0.5 * var)
    return np.diag(diag)


def dephasing_map_series(model, dt, n_steps):
    """Closed-form maps at dt, 2 dt, ..., n_steps dt. See :func:`dephasing_map`."""
    return [dephasing_map(model, (k + 1) * dt) for k in range(n_steps)]
