"""Frontier contraction kernels.

A frontier holds the running contraction state over the live wires of a
sweep: either a density operator (axes ordered ket..., bra...) or a pure
amplitude tensor (optionally with a leading batch axis for vectorized
sampling).  Wires are addressed by label; the axis order is an internal
detail.
"""

import numpy as np


class BudgetError(MemoryError):
    """Raised when a sweep would exceed the configured memory budget."""


def _apply_tensor(arr, T, positions, n_axes):
    """Contract tensor ``T`` (out axes then in axes) into ``arr``.

    ``positions`` are the axes of ``arr`` the gate inputs attach to; the
    outputs land back on the same axes.
    """
    k = len(positions)
    arr = np.tensordot(T, arr, axes=(list(range(k, 2 * k)), positions))
    untouched = [a for a in range(n_axes) if a not in positions]
    pos = {axis: k + i for i, axis in enumerate(untouched)}
    for i, p in enumerate(positions):
        pos[p] = i
    return arr.transpose([pos[a] for a in range(n_axes)])


class DensityFrontier:
    """Operator over live wires; supports states and Heisenberg functionals."""

    def __init__(self, array, wires, budget=13):
        self.array = array
        self.wires = list(wires)
        self.budget = budget

    @classmethod
    def scalar(cls, value=1.0, dtype=np.complex128, budget=13):
        return cls(np.asarray(value, dtype=dtype), [], budget=budget)

    @property
    def n_wires(self):
        return len(self.wires)

    def copy(self):
        return DensityFrontier(self.array.copy(), list(self.wires),
                               self.budget)

    def _check_budget(self, n):
        if n > self.budget:
            raise BudgetError(
                f"frontier of {n} wires exceeds the budget of "
                f"{self.budget} (density payload 4**wires)")

    def _positions(self, wires):
        return [self.wires.index(w) for w in wires]

    def add_fresh(self, wires):
        """Extend with |0><0| factors on new wires."""
        self._extend(wires, np.array([[1, 0], [0, 0]]))

    def tensor_factor(self, wire, op):
        """Extend with an arbitrary single-wire operator factor."""
        self._extend([wire], np.asarray(op))

    def _extend(self, wires, op):
        f = len(wires)
        self._check_budget(self.n_wires + f)
        F = self.n_wires
        factor = np.asarray(1.0, dtype=self.array.dtype)
        for _ in range(f):
            factor = np.multiply.outer(factor, op.astype(self.array.dtype))
        big = np.multiply.outer(self.array, factor)
        # big axes: old kets, old bras, then (ket, bra) per new wire.
        order = list(range(F)) + [2 * F + 2 * i for i in range(f)] \
            + list(range(F, 2 * F)) + [2 * F + 2 * i + 1 for i in range(f)]
        self.array = big.transpose(order)
        self.wires = self.wires + list(wires)

    def apply_unitary(self, U, wires):
        """Conjugation: rho -> U rho U^dag on the given wires."""
        w = len(wires)
        F = self.n_wires
        T = np.ascontiguousarray(
            U.reshape((2,) * (2 * w)).astype(self.array.dtype, copy=False))
        pos = self._positions(wires)
        arr = _apply_tensor(self.array, T, pos, 2 * F)
        bra = [p + F for p in pos]
        self.array = _apply_tensor(arr, T.conj(), bra, 2 * F)

    def apply_conjugation_dag(self, U, wires):
        """Heisenberg step: G -> U^dag G U."""
        self.apply_unitary(np.ascontiguousarray(U.conj().T), wires)

    def insert_ket_op(self, wire, op):
        """Left-multiply a single-wire operator: rho -> (op x 1) rho."""
        F = self.n_wires
        T = op.astype(self.array.dtype, copy=False)
        self.array = _apply_tensor(self.array, T,
                                   self._positions([wire]), 2 * F)

    def trace_out(self, wires):
        for wire in wires:
            F = self.n_wires
            p = self.wires.index(wire)
            self.array = np.trace(self.array, axis1=p, axis2=p + F)
            self.wires.pop(p)

    def project_zero(self, wires):
        """Take the <0|..|0> slice on the given wires and drop them."""
        for wire in wires:
            F = self.n_wires
            p = self.wires.index(wire)
            idx = [slice(None)] * (2 * F)
            idx[p] = 0
            idx[p + F] = 0
            self.array = self.array[tuple(idx)]
            self.wires.pop(p)

    def relabel(self, old, new):
        for o, n in zip(old, new):
            self.wires[self.wires.index(o)] = n

    def trace_scalar(self):
        arr = self.array
        F = self.n_wires
        for _ in range(F):
            arr = np.trace(arr, axis1=0, axis2=arr.ndim // 2)
        return complex(arr)

    def canonical_array(self, leading):
        """Array permuted so ``leading`` wires come first on both sides.

        Spectator wires are sorted by label, so two frontiers over the same
        wire set canonicalize identically.
        """
        rest = sorted(w for w in self.wires if w not in leading)
        pos = self._positions(list(leading) + rest)
        F = self.n_wires
        return self.array.transpose(pos + [p + F for p in pos]), rest


class PureFrontier:
    """Amplitude tensor over live wires, optionally batched over shots."""

    def __init__(self, array, wires, n_batch=None, budget=25):
        self.array = array
        self.wires = list(wires)
        self.n_batch = n_batch
        self.budget = budget

    @classmethod
    def vacuum(cls, dtype=np.complex128, n_batch=None, budget=25):
        if n_batch is None:
            return cls(np.asarray(1.0, dtype=dtype), [], budget=budget)
        return cls(np.ones(n_batch, dtype=dtype), [], n_batch=n_batch,
                   budget=budget)

    @property
    def n_wires(self):
        return len(self.wires)

    @property
    def _offset(self):
        return 0 if self.n_batch is None else 1

    def _check_budget(self, n):
        if n > self.budget:
            raise BudgetError(
                f"pure frontier of {n} wires exceeds the budget of "
                f"{self.budget} (payload 2**wires)")

    def _positions(self, wires):
        off = self._offset
        return [self.wires.index(w) + off for w in wires]

    def add_fresh(self, wires):
        f = len(wires)
        self._check_budget(self.n_wires + f)
        e0 = np.zeros((2,) * f, dtype=self.array.dtype)
        e0[(0,) * f] = 1.0
        self.array = np.multiply.outer(self.array, e0)
        self.wires = self.wires + list(wires)

    def apply_unitary(self, U, wires):
        w = len(wires)
        T = np.ascontiguousarray(
            U.reshape((2,) * (2 * w)).astype(self.array.dtype, copy=False))
        self.array = _apply_tensor(self.array, T, self._positions(wires),
                                   self.array.ndim)

    def relabel(self, old, new):
        for o, n in zip(old, new):
            self.wires[self.wires.index(o)] = n

    def moveaxis_last(self, wire):
        p = self.wires.index(wire)
        self.array = np.moveaxis(self.array, p + self._offset, -1)
        self.wires.append(self.wires.pop(p))

    def sample_and_drop(self, wire, rng):
        """Born-sample one wire, project, renormalize and drop it.

        Returns the outcome bits (scalar for unbatched frontiers, an array
        of shape (n_batch,) otherwise).
        """
        self.moveaxis_last(wire)
        arr = self.array
        probs = np.abs(arr) ** 2
        axes = tuple(range(self._offset, arr.ndim - 1))
        p = probs.sum(axis=axes) if axes else probs
        p = p / p.sum(axis=-1, keepdims=True)
        if self.n_batch is None:
            bit = int(rng.random() < p[1])
            picked = arr[..., bit]
            self.array = picked / np.sqrt(p[bit])
        else:
            bit = (rng.random(self.n_batch) < p[:, 1]).astype(np.uint8)
            flat = arr.reshape(self.n_batch, -1, 2)
            picked = flat[np.arange(self.n_batch), :, bit]
            norm = np.sqrt(p[np.arange(self.n_batch), bit])
            picked = picked / norm[:, None]
            self.array = picked.reshape(arr.shape[:-1])
        self.wires.pop()
        return bit

    def norm_squared(self):
        probs = np.abs(self.array) ** 2
        if self.n_batch is None:
            return float(probs.sum())
        return probs.reshape(self.n_batch, -1).sum(axis=1)

    def canonical_vector(self, wire_order):
        """Flat amplitudes with axes permuted to ``wire_order``."""
        if set(wire_order) != set(self.wires):
            raise ValueError("wire_order must be a permutation of the wires")
        off = self._offset
        perm = list(range(off)) + self._positions(list(wire_order))
        arr = self.array.transpose(perm)
        if self.n_batch is None:
            return arr.reshape(-1)
        return arr.reshape(self.n_batch, -1)
