"""Process tomography: preparation bases, measurement simulation, map reconstruction."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .liouville import all_pauli_labels, pauli_string, to_choi, from_choi, vec

__all__ = [
    "QptRecord",
    "prep_labels",
    "prep_states",
    "basis_condition",
    "simulate_qpt",
    "reconstruct_maps",
    "project_cptp",
]


def _ket(amps):
    v = np.asarray(amps, dtype=complex)
    return v / np.linalg.norm(v)


_K0 = _ket([1, 0])
_K1 = _ket([0, 1])
_KX = _ket([1, 1])
_KY = _ket([1, 1j])

_SINGLE = {
    "psi0": _K0,
    "psi1": _K1,
    "psiX": _KX,
    "psiY": _KY,
}

_TWO = {
    "psi00": np.kron(_K0, _K0),
    "psi01": np.kron(_K0, _K1),
    "psi10": np.kron(_K1, _K0),
    "psi11": np.kron(_K1, _K1),
    "psi0X": np.kron(_K0, _KX),
    "psi0Y": np.kron(_K0, _KY),
    "psi1X": np.kron(_K1, _KX),
    "psi1Y": np.kron(_K1, _KY),
    "psiX0": np.kron(_KX, _K0),
    "psiY0": np.kron(_KY, _K0),
    "psiX1": np.kron(_KX, _K1),
    "psiY1": np.kron(_KY, _K1),
    "Phi": _ket([1, 0, 0, 1]),
    "Psi": _ket([0, 1, 1, 0]),
    "PhiStar": _ket([1, 0, 0, 1j]),
    "PsiStar": _ket([0, 1, 1j, 0]),
}

_BASES = {1: _SINGLE, 2: _TWO}


@dataclass(frozen=True)
class QptRecord:
    """One tomography data point: Tr(P E_k(rho_prep)), possibly shot-sampled."""

    time_index: int
    prep_label: str
    pauli: str
    expectation: float
    shots: int


def prep_labels(n_qubits):
    """Ordered preparation-state labels for the given register size."""
    if n_qubits not in _BASES:
        raise ValueError(f"no preparation basis tabulated for {n_qubits} qubits")
    return tuple(_BASES[n_qubits])


def prep_states(n_qubits):
    """Preparation density matrices keyed by label.

    The single-qubit basis is {|0>, |1>, |+>, |+i>}; the two-qubit basis is
    the sixteen-state set combining local versions of those with the four
    maximally entangled states Phi, Psi, PhiStar, PsiStar.
    """
    labels = prep_labels(n_qubits)
    kets = _BASES[n_qubits]
    return {lab: np.outer(kets[lab], kets[lab].conj()) for lab in labels}


def _infer_qubits(dim_sq):
    d = int(round(np.sqrt(dim_sq)))
    if d * d != dim_sq:
        raise ValueError(f"superoperator side {dim_sq} is not a perfect square")
    n = int(round(np.log2(d)))
    if 2**n != d:
        raise ValueError(f"Hilbert dimension {d} is not a power of two")
    return n, d


def _design_matrix(n_qubits):
    # Row for (P, rho): expectation = vec(P^T)^T E vec(rho) = kron(vec(P^T), vec(rho)) . vec(E)
    states = prep_states(n_qubits)
    paulis = all_pauli_labels(n_qubits)
    rows = []
    keys = []
    for lab, rho in states.items():
        v = vec(rho)
        for p in paulis:
            a = vec(pauli_string(p).T)
            rows.append(np.kron(a, v))
            keys.append((lab, p))
    return np.array(rows), keys


def basis_condition(n_qubits):
    """Condition number of the linear-inversion design matrix."""
    a, _ = _design_matrix(n_qubits)
    return float(np.linalg.cond(a))


def simulate_qpt(maps, shots=0, seed=None):
    """Generate tomography records for a map series.

    Parameters
    ----------
    maps : sequence of (d^2, d^2) arrays
        Dynamical maps at time indices 1..K.
    shots : int
        0 returns exact expectations. Positive values draw a binomial
        sample of single-shot +-1 outcomes per (time, prep, Pauli) setting.
    seed : int or None
        Required when shots > 0. Randomness is consumed in the emission
        order (time, then prep, then Pauli), so records are reproducible.

    Returns
    -------
    list of QptRecord
    """
    if shots < 0:
        raise ValueError("shots must be >= 0")
    if shots > 0 and seed is None:
        raise ValueError("seed is required when shots > 0")
    n_qubits, d = _infer_qubits(np.asarray(maps[0]).shape[0])
    states = prep_states(n_qubits)
    paulis = all_pauli_labels(n_qubits)
    pmats = {p: pauli_string(p) for p in paulis}
    rng = np.random.default_rng(seed) if shots > 0 else None

    records = []
    for k, sop in enumerate(maps, start=1):
        sop = np.asarray(sop)
        for lab, rho in states.items():
            out = (sop @ vec(rho)).reshape(d, d)
            for p in paulis:
                val = float(np.real(np.trace(pmats[p] @ out)))
                if shots > 0:
                    # Clip guards non-CP inputs whose expectations spill out of [-1, 1].
                    prob = min(max((1.0 + val) / 2.0, 0.0), 1.0)
                    val = 2.0 * rng.binomial(shots, prob) / shots - 1.0
                records.append(QptRecord(k, lab, p, val, shots))
    return records


def reconstruct_maps(records):
    """Invert tomography records back into a map series.

    Expects a complete (prep, Pauli) grid for every time index and
    consecutive indices starting at 1. The inversion is least squares on
    the linear design, exact when the records came from shots=0.

    Returns
    -------
    list of (d^2, d^2) arrays ordered by time index.
    """
    if not records:
        raise ValueError("no records supplied")
    by_time = {}
    for r in records:
        by_time.setdefault(r.time_index, {})[(r.prep_label, r.pauli)] = r.expectation
    indices = sorted(by_time)
    if indices != list(range(1, len(indices) + 1)):
        raise ValueError(f"time indices must be consecutive from 1, got {indices}")

    first_label = next(iter(by_time[indices[0]]))[0]
    n_qubits = 1 if first_label in _SINGLE else 2
    a, keys = _design_matrix(n_qubits)
    d2 = int(round(np.sqrt(a.shape[1])))

    maps = []
    for k in indices:
        got = by_time[k]
        missing = [key for key in keys if key not in got]
        if missing:
            raise ValueError(
                f"time index {k}: incomplete record set, missing {missing[:8]}"
                + ("..." if len(missing) > 8 else "")
            )
        y = np.array([got[key] for key in keys])
        x, *_ = np.linalg.lstsq(a, y, rcond=None)
        maps.append(x.reshape(d2, d2))
    return maps


def _project_trace_preserving(x4, d):
    # Affine projection onto {Tr_out X = I}; output index is the first slot pair.
    t2 = np.einsum("irik->rk", x4)
    return x4 - np.einsum("ij,rk->irjk", np.eye(d) / d, t2 - np.eye(d))


def project_cptp(sop, max_iter=200, tol=1e-9):
    """Alternating projection of a superoperator onto the CPTP set.

    Alternates a positive-semidefinite clip of the Choi matrix with the
    affine trace-preservation correction, ending on the affine step so
    trace preservation is exact. Warns if the residual stays above tol.
    """
    sop = np.asarray(sop, dtype=complex)
    d2 = sop.shape[0]
    d = int(round(np.sqrt(d2)))
    x = to_choi(sop)
    residual = np.inf
    for _ in range(max_iter):
        x = 0.5 * (x + x.conj().T)
        w, v = np.linalg.eigh(x)
        neg = float(-w.min()) if w.size else 0.0
        x_psd = (v * np.clip(w, 0.0, None)) @ v.conj().T
        x4 = _project_trace_preserving(x_psd.reshape(d, d, d, d), d)
        x_new = x4.reshape(d2, d2)
        tp_shift = float(np.linalg.norm(x_new - x_psd))
        residual = max(neg, tp_shift)
        x = x_new
        if residual < tol:
            break
    else:
        warnings.warn(
            f"CPTP projection stopped at residual {residual:.3e} after {max_iter} iterations",
            stacklevel=2,
        )
    return from_choi(x)
