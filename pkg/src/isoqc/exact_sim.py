"""Exact observable evaluation by frontier contraction.

Expectation values run a density-operator frontier over the causal cone of
the observable: blocks are swept in schedule order, each physical wire
receives its Pauli factor at emission and is traced immediately, and bond
wires that nothing downstream consumes are traced as soon as they appear.
Pure-state sweeps (for full physical states, fidelities and sampling) keep
physical wires live until the end instead.
"""

from dataclasses import dataclass

import numpy as np

from .frontier import DensityFrontier, PureFrontier, BudgetError
from .gates import PAULI
from .network import causal_cone, evaluation_order, site_block
from .pauli import PauliTerm

DENSITY_BUDGET = 13
PURE_BUDGET = 26


__all__ = [
    "expect_pauli", "energy", "physical_state", "fidelity", "sample",
    "PhysicalState", "BudgetError",
]


def _unitaries(network, params, coords, dtype):
    return {c: site_block(network, params, c).unitary.astype(dtype)
            for c in coords}


def _fresh_labels(node):
    return [("t", node.coord, i) for i in range(node.n_fresh)]


def _site_events(network, node, letters, keep):
    """Per-wire fate after a block: Pauli factor to insert and trace flag."""
    events = []
    for wire in node.out_wires:
        if wire.kind == "p":
            op = letters.get(wire.site)
            events.append((wire, op, True))
        elif network.consumer.get(wire) not in keep:
            events.append((wire, None, True))
        else:
            events.append((wire, None, False))
    return events


def forward_sweep(network, unitaries, letters, order, dtype=np.complex128,
                  budget=DENSITY_BUDGET, snapshot_sites=()):
    """Density sweep; returns the final scalar and per-site prefix states.

    A snapshot for site ``s`` is the frontier immediately before the block
    unitary of ``s`` is applied, with its fresh wires already attached and
    relabeled to the block's output wire names.
    """
    keep = set(order)
    rho = DensityFrontier.scalar(dtype=dtype, budget=budget)
    snapshots = {}
    snapshot_sites = set(snapshot_sites)
    for coord in order:
        node = network.site(coord)
        fresh = _fresh_labels(node)
        rho.add_fresh(fresh)
        ins = list(node.in_wires) + fresh
        rho.relabel(ins, node.out_wires)
        if coord in snapshot_sites:
            snapshots[coord] = rho.copy()
        rho.apply_unitary(unitaries[coord], node.out_wires)
        for wire, op, traced in _site_events(network, node, letters, keep):
            if op is not None:
                rho.insert_ket_op(wire, PAULI[op])
            if traced:
                rho.trace_out([wire])
    return rho.trace_scalar(), snapshots


def backward_sweep(network, unitaries, letters, order, dtype=np.complex128,
                   budget=DENSITY_BUDGET, snapshot_sites=()):
    """Heisenberg sweep; returns per-site suffix functionals.

    The functional for site ``s`` acts on the frontier right after the
    block of ``s``: pairing it with the forward state reproduces the
    expectation value.
    """
    keep = set(order)
    G = DensityFrontier.scalar(dtype=dtype, budget=budget)
    snapshots = {}
    snapshot_sites = set(snapshot_sites)
    for coord in reversed(order):
        node = network.site(coord)
        for wire, op, traced in reversed(
                _site_events(network, node, letters, keep)):
            if traced:
                G.tensor_factor(wire, PAULI[op] if op else PAULI["I"])
        if coord in snapshot_sites:
            snapshots[coord] = G.copy()
        G.apply_conjugation_dag(unitaries[coord], node.out_wires)
        fresh = _fresh_labels(node)
        G.relabel(node.out_wires, list(node.in_wires) + fresh)
        G.project_zero(fresh)
    return snapshots


def _expect_complex(network, params, term, dtype, budget):
    letters = term.letters
    if not letters:
        return 1.0 + 0.0j
    cone = causal_cone(network, term.support)
    order = evaluation_order(network, cone)
    unitaries = _unitaries(network, params, order, dtype)
    value, _ = forward_sweep(network, unitaries, letters, order,
                             dtype=dtype, budget=budget)
    return value


def expect_pauli(network, params, term, dtype=np.complex128,
                 budget=DENSITY_BUDGET):
    """Expectation of one Pauli string on the physical reduced state.

    Only blocks inside the causal cone of the term's support are
    evaluated; the coefficient of the term is not applied.
    """
    return float(_expect_complex(network, params, term, dtype,
                                 budget).real)


def energy(network, params, hamiltonian, dtype=np.complex128,
           budget=DENSITY_BUDGET, threads=1):
    """Sum of weighted Pauli expectations, in fixed term order."""
    from .parallel import parallel_map

    def one(term):
        return term.coefficient * expect_pauli(network, params, term,
                                               dtype=dtype, budget=budget)

    return float(sum(parallel_map(one, hamiltonian.terms, threads)))


@dataclass
class PhysicalState:
    """Pure amplitudes over (physical, dangling) wires of a full sweep."""

    amplitudes: np.ndarray  # (2**n_sites, 2**n_dangling)
    sites: tuple
    n_dangling: int

    @property
    def n_sites(self):
        return len(self.sites)

    def trace(self):
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def probabilities(self):
        """Exact outcome distribution over physical bitstrings."""
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def purity(self):
        gram = self.amplitudes.conj().T @ self.amplitudes
        return float(np.sum(np.abs(gram) ** 2).real)

    def density(self, max_sites=12):
        if self.n_sites > max_sites:
            raise BudgetError(
                f"density matrix on {self.n_sites} sites refused "
                f"(max_sites={max_sites})")
        return self.amplitudes @ self.amplitudes.conj().T

    def fidelity(self, reference):
        """Overlap with a state vector or a subspace basis.

        ``reference`` is either a vector of dimension ``2**n_sites`` or a
        matrix whose columns span a subspace; the result is
        ``<ref| rho |ref>`` resp. ``Tr(Pi rho)``.
        """
        ref = np.asarray(reference, dtype=complex)
        dim = 2 ** self.n_sites
        if ref.ndim == 1:
            ref = ref[:, None]
        if ref.shape[0] != dim:
            raise ValueError(
                f"reference dimension {ref.shape[0]} != 2**sites = {dim}")
        overlaps = ref.conj().T @ self.amplitudes
        return float(np.sum(np.abs(overlaps) ** 2))


def physical_state(network, params, dtype=np.complex128,
                   budget=PURE_BUDGET):
    """Pure sweep retaining all physical wires; dangling traced at the end.

    The returned amplitudes are ordered with physical sites row-major
    (site (0,0) is the most significant bit).
    """
    psi = PureFrontier.vacuum(dtype=dtype, budget=budget)
    order = network.order
    keep = set(order)
    for coord in order:
        node = network.site(coord)
        fresh = _fresh_labels(node)
        psi.add_fresh(fresh)
        psi.relabel(list(node.in_wires) + fresh, node.out_wires)
        psi.apply_unitary(site_block(network, params, coord).unitary,
                          node.out_wires)
    sites = tuple(sorted(network.order))
    phys = [("P", c) for c in sites]
    dangling = []
    for w in list(psi.wires):
        if w.kind == "p":
            psi.relabel([w], [("P", w.site)])
        else:
            dangling.append(w)
    vec = psi.canonical_vector(phys + dangling)
    amps = vec.reshape(2 ** len(sites), -1)
    return PhysicalState(amplitudes=amps, sites=sites,
                         n_dangling=len(dangling))


def fidelity(network, params, reference, dtype=np.complex128,
             budget=PURE_BUDGET):
    """``<ref| rho_phys |ref>`` (or ``Tr(Pi rho)`` for a subspace basis)."""
    return physical_state(network, params, dtype=dtype,
                          budget=budget).fidelity(reference)


def sample(network, params, n_shots, seed, dtype=np.complex128,
           chunk=4096, budget=PURE_BUDGET):
    """Ancestral sampling of all physical wires in the computational basis.

    Sweeps a batched pure frontier; each physical wire is Born-sampled from
    its marginal conditioned on everything already measured, and dangling
    wires are sampled and dropped.  Returns an array of bits with shape
    ``(n_shots, n_sites)``; columns follow row-major site order.
    """
    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    rng = np.random.default_rng(seed)
    sites = tuple(sorted(network.order))
    col = {c: i for i, c in enumerate(sites)}
    order = network.order
    keep = set(order)
    unitaries = _unitaries(network, params, order, dtype)
    out = np.empty((n_shots, len(sites)), dtype=np.uint8)
    done = 0
    while done < n_shots:
        b = min(chunk, n_shots - done)
        psi = PureFrontier.vacuum(dtype=dtype, n_batch=b, budget=budget)
        for coord in order:
            node = network.site(coord)
            fresh = _fresh_labels(node)
            psi.add_fresh(fresh)
            psi.relabel(list(node.in_wires) + fresh, node.out_wires)
            psi.apply_unitary(unitaries[coord], node.out_wires)
            for wire in node.out_wires:
                if wire.kind == "p":
                    bits = psi.sample_and_drop(wire, rng)
                    out[done:done + b, col[wire.site]] = bits
                elif network.consumer.get(wire) not in keep:
                    psi.sample_and_drop(wire, rng)
        done += b
    return out, sites
