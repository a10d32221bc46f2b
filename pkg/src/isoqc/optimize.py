"""Gradients, AMSgrad, the VQE driver and gradient-variance experiments.

Gradients use the parameter-shift rule: every rotation angle is evaluated
at +-pi/2 and the two exact expectations are differenced.  The shifted
evaluations share their surroundings, so each term is swept once forward
(prefix states) and once backward (suffix functionals); pairing the two
across a site reproduces the shifted expectation with only that site's
block rebuilt.  Parameters of blocks outside a term's causal cone are
never evaluated; their contribution is an exact zero.
"""

import time
from dataclasses import dataclass, replace

import numpy as np

from .blocks import n_block_params
from .exact_sim import (DENSITY_BUDGET, forward_sweep, backward_sweep,
                        energy, physical_state)
from .gates import block_gate_sequence, gate_matrix, u3
from .network import (LatticeSpec, build_network, causal_cone,
                      evaluation_order, mask_from_sites, random_params,
                      site_block)
from .frontier import _apply_tensor
from .hamiltonians import build_tfi
from .pauli import Hamiltonian, PauliTerm
from .parallel import parallel_map

SHIFT = np.pi / 2


class _ShiftedBlock:
    """Block unitaries with one rotation angle shifted.

    Precomputes cumulative gate products so each shifted unitary costs two
    small matrix products instead of a full recomposition.
    """

    def __init__(self, signature, n_bl, params):
        self.w = signature.n_wires
        self.params = np.asarray(params, dtype=float)
        self.gates = block_gate_sequence(self.w, n_bl, self.params)
        dim = 2 ** self.w
        prefix = [np.eye(dim, dtype=complex)]
        for gate in self.gates:
            prefix.append(self._apply_gate(prefix[-1], gate))
        suffix = [np.eye(dim, dtype=complex)]
        for gate in reversed(self.gates):
            # product of the remaining gates: G_last ... G_i
            suffix.append(suffix[-1] @ (self._apply_gate(
                np.eye(dim, dtype=complex), gate)))
        self.prefix = prefix
        self.suffix = suffix[::-1]
        self.rotations = [i for i, g in enumerate(self.gates)
                          if g[0] == "u3"]
        self.unitary = prefix[-1]

    def _apply_gate(self, mat, gate):
        name, wires, gparams = gate
        g = gate_matrix(name, gparams)
        arr = mat.reshape((2,) * self.w + (mat.shape[1],))
        arr = _apply_tensor(arr, g.reshape((2,) * (2 * len(wires))),
                            list(wires), arr.ndim)
        return arr.reshape(mat.shape)

    def shifted(self, angle_index, delta):
        """Block unitary with one of the 3*w*n_bl angles shifted."""
        rot = angle_index // 3
        pos = self.rotations[rot]
        _, wires, gparams = self.gates[pos]
        new = list(gparams)
        new[angle_index % 3] += delta
        mid = self._apply_gate(self.prefix[pos], ("u3", wires, tuple(new)))
        return self.suffix[pos + 1] @ mid


def _cross_tensor(state, functional, block_wires):
    """Reduced pairing of a prefix state with a suffix functional.

    Returns ``M[b, e, c, a]`` over the block's wire space such that
    ``Tr[(U x 1) state (U^dag x 1) functional]`` equals
    ``sum U[a,b] conj(U[c,e]) M[b,e,c,a]`` for any block unitary ``U``.
    """
    arr_a, rest_a = state.canonical_array(block_wires)
    arr_b, rest_b = functional.canonical_array(block_wires)
    if rest_a != rest_b:
        raise AssertionError("prefix/suffix spectator mismatch")
    d = 2 ** len(block_wires)
    rdim = int(round(arr_a.size ** 0.5)) // d
    a4 = arr_a.reshape(d, rdim, d, rdim)
    b4 = arr_b.reshape(d, rdim, d, rdim)
    a2 = a4.transpose(0, 2, 1, 3).reshape(d * d, rdim * rdim)
    b2 = b4.transpose(3, 1, 0, 2).reshape(rdim * rdim, d * d)
    return (a2 @ b2).reshape(d, d, d, d)


def _pair_values(M, unitaries):
    """``Tr[(U x 1) A (U^dag x 1) B]`` for a batch of block unitaries."""
    d = M.shape[0]
    # M'[(a,b),(c,e)] = M[b,e,c,a]
    mp = M.transpose(3, 0, 2, 1).reshape(d * d, d * d)
    V = np.stack([U.reshape(-1) for U in unitaries])
    W = V.conj() @ mp.T
    return np.einsum("vi,vi->v", V, W).real


def gradient(network, params, hamiltonian, mask=None, dtype=np.complex128,
             budget=DENSITY_BUDGET, threads=1):
    """Parameter-shift gradient of the energy.

    Masked entries are exactly zero, as are entries for blocks outside the
    causal cone of every Hamiltonian term.
    """
    params = np.asarray(params, dtype=float)
    if mask is None:
        mask = np.ones(network.n_params, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (network.n_params,):
        raise ValueError("mask length must equal the parameter count")

    site_masks = {}
    factories = {}
    unitaries = {}
    for coord in network.order:
        sl = network.param_slice(coord)
        sm = mask[sl]
        if sm.any():
            site_masks[coord] = sm
            factories[coord] = _ShiftedBlock(
                network.site(coord).signature, network.spec.n_bl,
                params[sl])
            unitaries[coord] = factories[coord].unitary.astype(dtype)
        else:
            unitaries[coord] = site_block(network, params,
                                          coord).unitary.astype(dtype)

    def term_gradient(term):
        g = np.zeros(network.n_params)
        if not term.ops:
            return g
        cone = causal_cone(network, term.support)
        order = evaluation_order(network, cone)
        grad_sites = [c for c in order if c in site_masks]
        if not grad_sites:
            return g
        letters = term.letters
        _, prefixes = forward_sweep(network, unitaries, letters, order,
                                    dtype=dtype, budget=budget,
                                    snapshot_sites=grad_sites)
        suffixes = backward_sweep(network, unitaries, letters, order,
                                  dtype=dtype, budget=budget,
                                  snapshot_sites=grad_sites)
        for coord in grad_sites:
            node = network.site(coord)
            M = _cross_tensor(prefixes[coord], suffixes[coord],
                              list(node.out_wires))
            factory = factories[coord]
            sm = site_masks[coord]
            angle_idx = np.nonzero(sm)[0]
            shifted = []
            for a in angle_idx:
                shifted.append(factory.shifted(a, +SHIFT))
                shifted.append(factory.shifted(a, -SHIFT))
            vals = _pair_values(M, shifted)
            start = network.param_slice(coord).start
            g[start + angle_idx] += term.coefficient * (
                vals[0::2] - vals[1::2]) / 2.0
        return g

    parts = parallel_map(term_gradient, hamiltonian.terms, threads)
    total = np.zeros(network.n_params)
    for p in parts:
        total += p
    return total


@dataclass(frozen=True)
class OptimizerState:
    """AMSgrad moments; ``v_hat`` is the running maximum of ``v``."""

    step: int
    m: np.ndarray
    v: np.ndarray
    v_hat: np.ndarray
    alpha: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def amsgrad_init(n_params, alpha=0.01, beta1=0.9, beta2=0.999, eps=1e-8):
    zeros = np.zeros(n_params)
    return OptimizerState(step=0, m=zeros, v=zeros.copy(),
                          v_hat=zeros.copy(), alpha=alpha, beta1=beta1,
                          beta2=beta2, eps=eps)


def amsgrad_step(state, grads):
    """One AMSgrad update; returns the new state and the parameter delta."""
    g = np.asarray(grads, dtype=float)
    if not np.all(np.isfinite(g)):
        raise ValueError("non-finite gradient")
    m = state.beta1 * state.m + (1 - state.beta1) * g
    v = state.beta2 * state.v + (1 - state.beta2) * g ** 2
    v_hat = np.maximum(state.v_hat, v)
    delta = -state.alpha * m / (np.sqrt(v_hat) + state.eps)
    new = replace(state, step=state.step + 1, m=m, v=v, v_hat=v_hat)
    return new, delta


@dataclass
class VqeTrace:
    energies: np.ndarray       # length steps + 1, energies[0] at init
    params: np.ndarray         # final parameters
    fidelities: np.ndarray | None = None
    wall_time: float = 0.0

    @property
    def final_energy(self):
        return float(self.energies[-1])

    @property
    def min_energy(self):
        return float(np.min(self.energies))

    @property
    def final_fidelity(self):
        if self.fidelities is None:
            return None
        return float(self.fidelities[-1])


def run_vqe(network, hamiltonian, steps, seed, mask=None, reference=None,
            fidelity_every=0, optimizer=None, init_params=None,
            dtype=np.complex128, budget=DENSITY_BUDGET, threads=1,
            callback=None):
    """AMSgrad minimization of the energy from a random start.

    ``reference`` (a state vector or subspace basis on the physical
    register) enables fidelity recording: every ``fidelity_every`` steps
    and always at the start and end.  Deterministic for a fixed seed.
    """
    opts = dict(optimizer or {})
    state = amsgrad_init(network.n_params, **opts)
    if init_params is None:
        params = random_params(network, np.random.default_rng(seed))
    else:
        params = np.asarray(init_params, dtype=float).copy()
    if mask is None:
        mask = np.ones(network.n_params, dtype=bool)

    record_fid = reference is not None
    t0 = time.perf_counter()

    def measure_fidelity():
        return physical_state(network, params, dtype=dtype).fidelity(
            reference)

    energies = [energy(network, params, hamiltonian, dtype=dtype,
                       budget=budget, threads=threads)]
    fids = [measure_fidelity()] if record_fid else None
    for step in range(steps):
        g = gradient(network, params, hamiltonian, mask=mask, dtype=dtype,
                     budget=budget, threads=threads)
        state, delta = amsgrad_step(state, g)
        params = params + delta
        energies.append(energy(network, params, hamiltonian, dtype=dtype,
                               budget=budget, threads=threads))
        if record_fid:
            last = step == steps - 1
            due = fidelity_every and (step + 1) % fidelity_every == 0
            fids.append(measure_fidelity() if (due or last) else np.nan)
        if callback is not None:
            callback(step, params, energies[-1])
    return VqeTrace(energies=np.asarray(energies), params=params,
                    fidelities=None if fids is None else np.asarray(fids),
                    wall_time=time.perf_counter() - t0)


@dataclass
class VarianceReport:
    """Sample variance of gradient components over random initializations."""

    key: dict
    var_mean: float     # variance averaged over the grouped parameters
    var_max: float      # worst single-parameter variance
    n_samples: int
    n_params: int

    def row(self):
        out = dict(self.key)
        out.update(var_mean=self.var_mean, var_max=self.var_max,
                   n_samples=self.n_samples, n_params=self.n_params)
        return out


def _variance_over_inits(network, hamiltonian, n_samples, seed, subset=None,
                         dtype=np.complex128, budget=DENSITY_BUDGET,
                         threads=1):
    """Per-parameter gradient variance over random initializations."""
    if n_samples < 2:
        raise ValueError("need at least 2 samples for a variance")
    seeds = np.random.SeedSequence(seed).spawn(n_samples)
    grads = []
    for s in seeds:
        params = random_params(network, np.random.default_rng(s))
        grads.append(gradient(network, params, hamiltonian, dtype=dtype,
                              budget=budget, threads=threads))
    grads = np.asarray(grads)
    var = np.var(grads, axis=0, ddof=1)
    if subset is not None:
        var = var[np.asarray(subset, dtype=bool)]
    return var


def gradient_variance(sweep, n_samples, seed, dtype=np.complex128,
                      threads=1, **kwargs):
    """Gradient-variance sweeps over random initializations.

    ``sweep`` selects the experiment: ``"n_bl"`` varies the block layer
    count at fixed n_bq=1 across system sizes, ``"n_bq"`` varies the bond
    qubit count at fixed geometry, and ``"column"`` measures a single
    last-row ZZ term at increasing column on a wide strip.  TFI couplings
    default to delta=1, lambda=3.5.
    """
    lam = kwargs.pop("lam", 3.5)
    delta = kwargs.pop("delta", 1.0)
    reports = []

    if sweep == "n_bl":
        sizes = kwargs.pop("sizes", ((2, 2), (3, 3), (4, 4)))
        n_bls = kwargs.pop("n_bls", tuple(range(2, 9)))
        n_bq = kwargs.pop("n_bq", 1)
        for rows, cols in sizes:
            h = build_tfi(rows, cols, lam, delta)
            for n_bl in n_bls:
                net = build_network(LatticeSpec("square", rows, cols,
                                                n_bq=n_bq, n_bl=n_bl))
                var = _variance_over_inits(net, h, n_samples, seed,
                                           dtype=dtype, threads=threads,
                                           **kwargs)
                reports.append(VarianceReport(
                    key={"sweep": "n_bl", "rows": rows, "cols": cols,
                         "n_bq": n_bq, "n_bl": n_bl},
                    var_mean=float(var.mean()), var_max=float(var.max()),
                    n_samples=n_samples, n_params=net.n_params))
    elif sweep == "n_bq":
        rows = kwargs.pop("rows", 4)
        cols = kwargs.pop("cols", 4)
        n_bqs = kwargs.pop("n_bqs", (1, 2, 3))
        n_bl = kwargs.pop("n_bl", 4)
        h = build_tfi(rows, cols, lam, delta)
        for n_bq in n_bqs:
            net = build_network(LatticeSpec("square", rows, cols,
                                            n_bq=n_bq, n_bl=n_bl))
            var = _variance_over_inits(net, h, n_samples, seed,
                                       dtype=dtype, threads=threads,
                                       **kwargs)
            reports.append(VarianceReport(
                key={"sweep": "n_bq", "rows": rows, "cols": cols,
                     "n_bq": n_bq, "n_bl": n_bl},
                var_mean=float(var.mean()), var_max=float(var.max()),
                n_samples=n_samples, n_params=net.n_params))
    elif sweep == "column":
        rows = kwargs.pop("rows", 4)
        cols = kwargs.pop("cols", 20)
        n_bq = kwargs.pop("n_bq", 1)
        n_bl = kwargs.pop("n_bl", 4)
        xs = kwargs.pop("xs", tuple(range(cols - 1)))
        net = build_network(LatticeSpec("square", rows, cols, n_bq=n_bq,
                                        n_bl=n_bl))
        for x in xs:
            h = Hamiltonian(rows, cols, [
                PauliTerm({(rows - 1, x): "Z", (rows - 1, x + 1): "Z"})])
            cone = causal_cone(net, ((rows - 1, x), (rows - 1, x + 1)))
            subset = mask_from_sites(net, cone)
            var = _variance_over_inits(net, h, n_samples, seed,
                                       subset=subset, dtype=dtype,
                                       threads=threads, **kwargs)
            reports.append(VarianceReport(
                key={"sweep": "column", "rows": rows, "cols": cols,
                     "n_bq": n_bq, "n_bl": n_bl, "x": x},
                var_mean=float(var.mean()), var_max=float(var.max()),
                n_samples=n_samples, n_params=int(subset.sum())))
    else:
        raise ValueError(f"unknown sweep {sweep!r}")
    return reports


def _column_variances(network, grads):
    """Mean per-parameter variance grouped by lattice column."""
    grads = np.asarray(grads)
    var = np.var(grads, axis=0, ddof=1)
    out = {}
    for coord in network.order:
        sl = network.param_slice(coord)
        out.setdefault(coord[1], []).append(var[sl])
    return {col: float(np.concatenate(vs).mean())
            for col, vs in sorted(out.items())}


def pretrain_experiment(seed, rows=4, cols=10, lam=3.5, delta=1.0, n_bq=1,
                        n_bl=4, n_seeds=30, pretrain_steps=150,
                        optimizer=None, dtype=np.complex128, threads=1):
    """Masked training of the columns nearest the center, before/after.

    For each of ``n_seeds`` random initializations: measure the gradient of
    the full Hamiltonian, train only the parameters of columns 0..3 against
    Hamiltonian terms fully contained there, and measure again.  Returns
    per-column VarianceReports for the untrained and pretrained ensembles.
    """
    net = build_network(LatticeSpec("square", rows, cols, n_bq=n_bq,
                                    n_bl=n_bl))
    h_full = build_tfi(rows, cols, lam, delta)
    trained_cols = range(4)
    mask_sites = [c for c in net.order if c[1] in trained_cols]
    mask = mask_from_sites(net, mask_sites)
    h_sub = Hamiltonian(rows, cols, [
        t for t in h_full.terms
        if all(n in trained_cols for _, n in t.support)])

    seeds = np.random.SeedSequence(seed).spawn(n_seeds)
    before, after = [], []
    for s in seeds:
        rng = np.random.default_rng(s)
        params = random_params(net, rng)
        before.append(gradient(net, params, h_full, dtype=dtype,
                               threads=threads))
        trace = run_vqe(net, h_sub, pretrain_steps, seed=None, mask=mask,
                        optimizer=optimizer, init_params=params,
                        dtype=dtype, threads=threads)
        after.append(gradient(net, trace.params, h_full, dtype=dtype,
                              threads=threads))

    reports = {"before": [], "after": []}
    for label, grads in (("before", before), ("after", after)):
        for col, var in _column_variances(net, grads).items():
            reports[label].append(VarianceReport(
                key={"experiment": "pretrain", "phase": label,
                     "rows": rows, "cols": cols, "column": col},
                var_mean=var, var_max=var, n_samples=n_seeds,
                n_params=0))
    return reports
