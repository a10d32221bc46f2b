"""Benchmark Hamiltonians and an exact-diagonalization reference.

Both models live on an open-boundary square lattice and use sigma-matrix
(eigenvalue +-1) conventions.  The eigensolver applies the Hamiltonian
matrix-free with bit arithmetic and feeds an implicitly restarted Krylov
method, so lattices up to 20 sites are in reach.
"""

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .pauli import PauliTerm, Hamiltonian, hamiltonian_dense

CACHE_ENV = "ISOQC_CACHE_DIR"
_CACHE_VERSION = 1


def nn_bonds(rows, cols):
    """Open-boundary nearest-neighbor pairs, rows first then columns."""
    bonds = []
    for m in range(rows):
        for n in range(cols - 1):
            bonds.append(((m, n), (m, n + 1)))
    for m in range(rows - 1):
        for n in range(cols):
            bonds.append(((m, n), (m + 1, n)))
    return bonds


def nnn_bonds(rows, cols):
    """Open-boundary next-nearest (diagonal) pairs, both orientations."""
    bonds = []
    for m in range(rows - 1):
        for n in range(cols - 1):
            bonds.append(((m, n), (m + 1, n + 1)))
            bonds.append(((m + 1, n), (m, n + 1)))
    return bonds


def build_tfi(rows, cols, lam, delta=1.0):
    """Transverse-field Ising model: lam * X_i + delta * Z_i Z_j on bonds."""
    terms = [PauliTerm({(m, n): "X"}, lam)
             for m in range(rows) for n in range(cols)]
    terms += [PauliTerm({a: "Z", b: "Z"}, delta)
              for a, b in nn_bonds(rows, cols)]
    return Hamiltonian(rows, cols, terms)


def build_j1j2(rows, cols, j1, j2):
    """Heisenberg model with nearest (j1) and diagonal (j2) couplings."""
    terms = []
    for coupling, bonds in ((j1, nn_bonds(rows, cols)),
                            (j2, nnn_bonds(rows, cols))):
        for a, b in bonds:
            for letter in "XYZ":
                terms.append(PauliTerm({a: letter, b: letter}, coupling))
    return Hamiltonian(rows, cols, terms)


def _term_masks(h):
    """Per-term (xmask, phasemask, prefactor) for bit-arithmetic matvec.

    A Pauli string maps |b> to ``i**nY * (-1)^popcount(b & phasemask)``
    times |b ^ xmask>, with site ``(m, n)`` on bit ``m*cols + n`` counted
    from the most significant end.
    """
    n = h.n_sites
    masks = []
    for t in h.terms:
        xmask = 0
        phasemask = 0
        n_y = 0
        for site, letter in t.ops:
            bit = 1 << (n - 1 - h.site_index(site))
            if letter in ("X", "Y"):
                xmask |= bit
            if letter in ("Y", "Z"):
                phasemask |= bit
            if letter == "Y":
                n_y += 1
        masks.append((xmask, phasemask, t.coefficient * (1j ** n_y)))
    return masks


def apply_hamiltonian(h, vec, masks=None):
    """Matrix-free H @ vec over the full 2**n_sites register."""
    if masks is None:
        masks = _term_masks(h)
    vec = np.asarray(vec)
    dim = 2 ** h.n_sites
    if vec.shape != (dim,):
        raise ValueError(f"vector must have dimension {dim}")
    idx = np.arange(dim, dtype=np.uint64)
    out = np.zeros(dim, dtype=complex)
    for xmask, phasemask, pref in masks:
        src = idx ^ np.uint64(xmask)
        signs = 1 - 2 * (np.bitwise_count(src & np.uint64(phasemask))
                         & np.uint64(1)).astype(np.int64)
        out += (pref * signs) * vec[src]
    return out


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray   # ascending, k lowest
    eigenvectors: np.ndarray  # columns, matching order
    degeneracy_tol: float

    def levels(self):
        """Eigenvalues grouped into (energy, multiplicity) levels."""
        out = []
        for e in self.eigenvalues:
            if out and abs(e - out[-1][0]) <= self.degeneracy_tol:
                out[-1] = (out[-1][0], out[-1][1] + 1)
            else:
                out.append((float(e), 1))
        return out

    def ground_subspace(self):
        """Orthonormal basis of the lowest level within tolerance."""
        _, mult = self.levels()[0]
        basis = self.eigenvectors[:, :mult]
        q, _ = np.linalg.qr(basis)
        return q


def ground_eigenpairs(h, k=4, tol=0.0, degeneracy_tol=1e-8, maxiter=None,
                      ncv=None, seed=7, cache_dir=None):
    """k lowest eigenpairs of a Pauli-sum Hamiltonian.

    Uses an implicitly restarted Lanczos iteration with a matrix-free
    operator; results are optionally cached on disk keyed by the model.
    Residuals are verified to 1e-8 before returning.
    """
    if h.n_sites > 20:
        raise ValueError("eigensolver limited to 20 sites")
    cached = _cache_load(h, k, cache_dir)
    if cached is not None:
        return cached
    dim = 2 ** h.n_sites
    masks = _term_masks(h)
    if dim <= 64 or k >= dim - 1:
        dense = hamiltonian_dense(h)
        vals, vecs = np.linalg.eigh(dense)
        vals, vecs = vals[:k], vecs[:, :k]
    else:
        op = spla.LinearOperator(
            (dim, dim), matvec=lambda v: apply_hamiltonian(h, v, masks),
            dtype=complex)
        v0 = np.random.default_rng(seed).normal(size=dim)
        vals, vecs = spla.eigsh(op, k=k, which="SA", v0=v0, tol=tol,
                                maxiter=maxiter, ncv=ncv)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    for i in range(len(vals)):
        res = np.linalg.norm(apply_hamiltonian(h, vecs[:, i], masks)
                             - vals[i] * vecs[:, i])
        if res > 1e-8:
            raise RuntimeError(f"eigenpair {i} residual {res:.2e} > 1e-8")
    result = SpectrumResult(eigenvalues=np.asarray(vals, dtype=float),
                            eigenvectors=vecs,
                            degeneracy_tol=degeneracy_tol)
    _cache_store(h, k, result, cache_dir)
    return result


def _cache_key(h, k):
    payload = {
        "version": _CACHE_VERSION,
        "rows": h.rows, "cols": h.cols, "k": k,
        "terms": [[list(map(list, t.ops)), t.coefficient] for t in h.terms],
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:24]


def _cache_path(h, k, cache_dir):
    cache_dir = cache_dir or os.environ.get(CACHE_ENV)
    if not cache_dir:
        return None
    os.makedirs(cache_dir, exist_ok=True)
    return os.path.join(cache_dir, f"spectrum-{_cache_key(h, k)}.npz")


def _cache_load(h, k, cache_dir):
    path = _cache_path(h, k, cache_dir)
    if path and os.path.exists(path):
        data = np.load(path)
        return SpectrumResult(eigenvalues=data["eigenvalues"],
                              eigenvectors=data["eigenvectors"],
                              degeneracy_tol=float(data["degeneracy_tol"]))
    return None


def _cache_store(h, k, result, cache_dir):
    path = _cache_path(h, k, cache_dir)
    if path:
        np.savez(path, eigenvalues=result.eigenvalues,
                 eigenvectors=result.eigenvectors,
                 degeneracy_tol=result.degeneracy_tol)
