"""Superoperator algebra in the row-major vectorization convention.

A linear map E acting on d x d density matrices is stored as a d^2 x d^2
complex array such that vec(E(rho)) = E @ vec(rho), where vec stacks the
rows of rho: vec index m = d*r + c for matrix element rho[r, c].

Choi matrices use the same row-major convention: the Choi matrix of E is
X[(r1, r2), (c1, c2)] = E[(r1, c1), (r2, c2)], normalized so that a
trace-preserving map has Tr X = d.
"""

import numpy as np

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

PAULIS = {"I": SIGMA_I, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}

# Order matters: index 0..3 used by Bloch-vector routines.
PAULI_LABELS = ("I", "X", "Y", "Z")


def pauli_string(label):
    """Tensor product of single-qubit Paulis, e.g. ``"XZ"`` -> X (x) Z.

    Parameters
    ----------
    label : str
        One character per qubit, each in {I, X, Y, Z}.

    Returns
    -------
    ndarray
        2^n x 2^n complex matrix.
    """
    op = np.array([[1.0 + 0.0j]])
    for ch in label:
        if ch not in PAULIS:
            raise ValueError(f"unknown Pauli label {ch!r}, expected I, X, Y or Z")
        op = np.kron(op, PAULIS[ch])
    return op


def all_pauli_labels(n_qubits):
    """All 4^n Pauli-string labels in lexicographic order, identity included."""
    labels = [""]
    for _ in range(n_qubits):
        labels = [s + p for s in labels for p in PAULI_LABELS]
    return labels


def vec(rho):
    """Row-major vectorization of a matrix."""
    return np.asarray(rho, dtype=complex).reshape(-1)


def unvec(v):
    """Inverse of :func:`vec`. The length must be a perfect square."""
    v = np.asarray(v, dtype=complex)
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape(d, d)


def apply_superop(sop, rho):
    """Apply a superoperator to a density matrix, returning a matrix."""
    return unvec(np.asarray(sop) @ vec(rho))


def left_multiply(a):
    """Superoperator for rho -> a @ rho."""
    a = np.asarray(a, dtype=complex)
    return np.kron(a, np.eye(a.shape[0], dtype=complex))


def right_multiply(b):
    """Superoperator for rho -> rho @ b."""
    b = np.asarray(b, dtype=complex)
    return np.kron(np.eye(b.shape[0], dtype=complex), b.T)


def commutator_superop(h):
    """Superoperator for rho -> [h, rho]."""
    h = np.asarray(h, dtype=complex)
    eye = np.eye(h.shape[0], dtype=complex)
    return np.kron(h, eye) - np.kron(eye, h.T)


def hamiltonian_liouvillian(h):
    """Superoperator L with d rho/dt = L rho for unitary dynamics: L = -i [h, .]."""
    return -1.0j * commutator_superop(h)


def unitary_superop(u):
    """Superoperator for conjugation rho -> u rho u^dagger."""
    u = np.asarray(u, dtype=complex)
    return np.kron(u, u.conj())


def superop_dim(sop):
    """Hilbert-space dimension d of a d^2 x d^2 superoperator."""
    n = np.asarray(sop).shape[0]
    d = int(round(np.sqrt(n)))
    if d * d != n:
        raise ValueError(f"superoperator side {n} is not a perfect square")
    return d


def to_choi(sop):
    """Choi matrix of a superoperator (row-major reshuffle).

    The reshuffle X[(r1, r2), (c1, c2)] = E[(r1, c1), (r2, c2)] is an
    involution, so the same index gymnastics invert it.
    """
    sop = np.asarray(sop, dtype=complex)
    d = superop_dim(sop)
    return sop.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)


def from_choi(choi):
    """Inverse of :func:`to_choi`."""
    return to_choi(choi)


def choi_trace_defect(sop):
    """|Tr X - d| for the Choi matrix X of the map; zero for trace-preserving maps."""
    d = superop_dim(sop)
    return abs(np.trace(to_choi(sop)) - d)


def trace_preservation_defect(sop):
    """Frobenius norm of (sum of rows that should give Tr E(rho) = Tr rho).

    For a TP map, summing superoperator rows over diagonal output indices
    must reproduce the projection onto diagonal input indices.
    """
    sop = np.asarray(sop, dtype=complex)
    d = superop_dim(sop)
    rows = sop.reshape(d, d, d * d)
    # sum_i E[(i,i), (j,j')] must equal delta_{j j'}
    s = rows[np.arange(d), np.arange(d), :].sum(axis=0).reshape(d, d)
    return np.linalg.norm(s - np.eye(d))


def hermiticity_defect(sop):
    """How far the map is from preserving Hermiticity; zero iff Choi is Hermitian."""
    x = to_choi(sop)
    return np.linalg.norm(x - x.conj().T)


def min_choi_eigenvalue(sop):
    """Smallest eigenvalue of the Hermitized Choi matrix.

    Negative values quantify the complete-positivity violation.
    """
    x = to_choi(sop)
    x = 0.5 * (x + x.conj().T)
    return float(np.linalg.eigvalsh(x)[0])


def identity_superop(d):
    return np.eye(d * d, dtype=complex)


def is_density_matrix(rho, tol=1e-9):
    """Check trace one, Hermiticity, and positive semidefiniteness."""
    rho = np.asarray(rho, dtype=complex)
    if abs(np.trace(rho) - 1.0) > tol:
        return False
    if np.linalg.norm(rho - rho.conj().T) > tol:
        return False
    return bool(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] > -tol)


# ---------------------------------------------------------------------------
# Bloch (affine) representation of qubit maps
# ---------------------------------------------------------------------------

def bloch_affine(sop):
    """Affine Bloch representation (M, c) of a single-qubit map.

    E(rho) with rho = (I + v . sigma) / 2 maps v -> M v + c. Rows and
    columns are ordered (x, y, z).

    Returns
    -------
    M : ndarray, shape (3, 3)
    c : ndarray, shape (3,)
    """
    sop = np.asarray(sop, dtype=complex)
    if sop.shape != (4, 4):
        raise ValueError("Bloch representation is defined for single-qubit maps")
    paulis = [SIGMA_X, SIGMA_Y, SIGMA_Z]
    M = np.empty((3, 3))
    c = np.empty(3)
    for i, pa in enumerate(paulis):
        out_id = apply_superop(sop, SIGMA_I)
        c[i] = 0.5 * np.real(np.trace(pa @ out_id))
        for j, pb in enumerate(paulis):
            out = apply_superop(sop, pb)
            M[i, j] = 0.5 * np.real(np.trace(pa @ out))
    return M, c


def affine_to_superop(M, c):
    """Rebuild the 4 x 4 superoperator from its affine Bloch action.

    Columns of the superoperator are images of the basis matrices
    |k><l|, expanded as (delta_{kl} I + sum_b (sigma_b)_{lk} sigma_b) / 2
    and pushed through v -> M v + c.
    """
    M = np.asarray(M, dtype=float)
    c = np.asarray(c, dtype=float)
    paulis = [SIGMA_X, SIGMA_Y, SIGMA_Z]
    sop = np.zeros((4, 4), dtype=complex)
    for k in range(2):
        for l in range(2):
            # E(|k><l|) = (1/2) [ delta_kl (I + c . sigma) + sum_b (sigma_b)_{lk} sum_a M_ab sigma_a ]
            out = np.zeros((2, 2), dtype=complex)
            if k == l:
                out += SIGMA_I
                for a in range(3):
                    out += c[a] * paulis[a]
            for b in range(3):
                w = paulis[b][l, k]
                if w != 0:
                    for a in range(3):
                        if M[a, b] != 0:
                            out += w * M[a, b] * paulis[a]
            sop[:, 2 * k + l] = vec(0.5 * out)
    return sop


def bloch_volume(sop):
    """det M for the affine Bloch action: signed volume contraction factor."""
    M, _ = bloch_affine(sop)
    return float(np.linalg.det(M))


# ---------------------------------------------------------------------------
# Two-qubit index reordering and tensor factorization
# ---------------------------------------------------------------------------

def _bipartite_perm():
    # Standard superop index packs (r1 r2 | c1 c2); the reordered basis
    # packs (r1 c1 | r2 c2), grouping each qubit's row/column pair.
    perm = np.empty(16, dtype=int)
    for r1 in range(2):
        for r2 in range(2):
            for c1 in range(2):
                for c2 in range(2):
                    std = 8 * r1 + 4 * r2 + 2 * c1 + c2
                    new = 8 * r1 + 4 * c1 + 2 * r2 + c2
                    perm[new] = std
    return perm


_PERM16 = _bipartite_perm()


def reindex_bipartite(mat):
    """Reorder a 16 x 16 superoperator (or Choi) between the standard basis
    and the per-qubit-grouped basis.

    The permutation is an involution: applying it twice returns the input.
    """
    mat = np.asarray(mat, dtype=complex)
    if mat.shape != (16, 16):
        raise ValueError("reindexing is defined for two-qubit superoperators")
    return mat[np.ix_(_PERM16, _PERM16)]


def kron_superop(sop1, sop2):
    """Tensor product of two single-qubit superoperators, in the standard basis."""
    s1 = np.asarray(sop1, dtype=complex)
    s2 = np.asarray(sop2, dtype=complex)
    if s1.shape != (4, 4) or s2.shape != (4, 4):
        raise ValueError("expected single-qubit superoperators")
    return reindex_bipartite(np.kron(s1, s2))


def factorize_bipartite(sop):
    """Split a two-qubit map into local parts and a correlated remainder.

    Returns (sop1, sop2, delta) with
    ``sop == kron_superop(sop1, sop2) + delta`` exactly. The local parts
    are partial traces of the reordered Choi matrix, normalized so each is
    trace preserving when the input is.
    """
    sop = np.asarray(sop, dtype=complex)
    x = to_choi(sop)
    xr = reindex_bipartite(x).reshape(4, 4, 4, 4)
    # Partial traces over the other qubit's (row, col) block; the factor
    # 1/2 restores Choi normalization Tr x_i = 2.
    x1 = np.einsum("abcb->ac", xr) / 2.0
    x2 = np.einsum("abad->bd", xr) / 2.0
    product = reindex_bipartite(np.kron(x1, x2))
    delta_choi = x - product
    return from_choi(x1), from_choi(x2), from_choi(delta_choi)
