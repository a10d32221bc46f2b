"""Independent reference implementations used as test oracles.

These deliberately avoid the frontier machinery: the state oracle keeps
every emitted wire alive in one flat statevector (no tracing, no causal
cones, no density operators) and measures observables with dense Pauli
matrices at the very end.
"""

import numpy as np

from isoqc.gates import PAULI
from isoqc.network import site_block


class DenseState:
    """Full pure state over (physical + dangling) wires of a network."""

    def __init__(self, network, params):
        vec = np.ones(1, dtype=complex)
        labels = []
        for coord in network.order:
            node = network.site(coord)
            # Append fresh |0> wires for every block input not yet present.
            n_new = node.n_fresh
            grown = np.zeros(vec.shape + (2 ** n_new,), dtype=complex)
            grown[..., 0] = vec
            vec = grown.reshape(-1)
            labels = labels + [("fresh", coord, i) for i in range(n_new)]
            # Relabel the wires the block consumes/produces.
            for old, new in zip(
                    list(node.in_wires) + [("fresh", coord, i)
                                           for i in range(n_new)],
                    node.out_wires):
                labels[labels.index(old)] = new
            wire_pos = [labels.index(w) for w in node.out_wires]
            U = site_block(network, params, coord).unitary
            vec = self._apply(vec, len(labels), U, wire_pos)
        self.network = network
        self.labels = labels
        self.vec = vec

    @staticmethod
    def _apply(vec, n_wires, U, positions):
        w = len(positions)
        arr = vec.reshape((2,) * n_wires)
        rest = [a for a in range(n_wires) if a not in positions]
        arr = arr.transpose(positions + rest).reshape(2 ** w, -1)
        arr = U @ arr
        arr = arr.reshape([2] * n_wires)
        inverse = np.argsort(positions + rest)
        return arr.transpose(inverse).reshape(-1)

    def _phys_first(self):
        """Statevector permuted to (physical row-major, dangling) order."""
        sites = tuple(sorted(self.network.order))
        phys = []
        for c in sites:
            (w,) = [x for x in self.labels if x.kind == "p" and x.site == c]
            phys.append(w)
        dangling = [x for x in self.labels if x.kind != "p"]
        order = [self.labels.index(w) for w in phys + dangling]
        arr = self.vec.reshape((2,) * len(self.labels)).transpose(order)
        return arr.reshape(2 ** len(phys), -1), sites

    def expect(self, term):
        """<psi| P x 1_dangling |psi> for one Pauli string (no coefficient)."""
        n = len(self.labels)
        out = self.vec
        for site, letter in term.ops:
            (w,) = [x for x in self.labels
                    if x.kind == "p" and x.site == site]
            out = self._apply(out, n, PAULI[letter], [self.labels.index(w)])
        return float(np.vdot(self.vec, out).real)

    def energy(self, hamiltonian):
        return float(sum(t.coefficient * self.expect(t)
                         for t in hamiltonian.terms))

    def probabilities(self):
        mat, _ = self._phys_first()
        return np.sum(np.abs(mat) ** 2, axis=1)

    def reduced_density(self):
        mat, _ = self._phys_first()
        return mat @ mat.conj().T

    def fidelity(self, reference):
        mat, _ = self._phys_first()
        ref = np.asarray(reference, dtype=complex)
        if ref.ndim == 1:
            ref = ref[:, None]
        return float(np.sum(np.abs(ref.conj().T @ mat) ** 2))


def finite_difference_gradient(f, params, step=1e-5, indices=None):
    params = np.asarray(params, dtype=float)
    if indices is None:
        indices = range(params.size)
    grad = np.zeros(params.size)
    for i in indices:
        up = params.copy()
        up[i] += step
        dn = params.copy()
        dn[i] -= step
        grad[i] = (f(up) - f(dn)) / (2 * step)
    return grad


def total_variation(p, q):
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))


def empirical_distribution(bits, n_sites):
    idx = np.zeros(len(bits), dtype=np.int64)
    for c in range(n_sites):
        idx = (idx << 1) | bits[:, c].astype(np.int64)
    return np.bincount(idx, minlength=2 ** n_sites) / len(bits)
