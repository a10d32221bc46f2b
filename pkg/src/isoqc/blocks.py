"""Unitary circuit blocks realizing isometric site tensors.

A block is a dense unitary on ``w`` wires.  Reading the circuit left to
right, the input wires carry the left bond, the top bond and fresh |0>
wires; the output wires carry the physical index followed by the right and
bottom bonds.  Fixing the fresh inputs to |0> turns the unitary into a site
tensor that is an isometry from the (left, top) bond space into the
(physical, right, bottom) space by construction.
"""

from dataclasses import dataclass

import numpy as np

from .gates import block_gate_sequence, compose_gates


@dataclass(frozen=True)
class WireSignature:
    """Wire counts of one block.

    Inputs are ordered (left bonds, top bonds, fresh); outputs are ordered
    (physical, right bonds, bottom bonds).  Inputs and outputs must balance
    so the block stays square.
    """

    n_left: int
    n_top: int
    n_fresh: int
    n_phys: int = 1
    n_right: int = 0
    n_bottom: int = 0

    def __post_init__(self):
        counts = (self.n_left, self.n_top, self.n_fresh,
                  self.n_phys, self.n_right, self.n_bottom)
        if any(c < 0 for c in counts):
            raise ValueError("wire counts must be nonnegative")
        if self.n_inputs != self.n_outputs:
            raise ValueError(
                f"block is not square: {self.n_inputs} input wires vs "
                f"{self.n_outputs} output wires")
        if self.n_wires == 0:
            raise ValueError("block needs at least one wire")

    @property
    def n_inputs(self):
        return self.n_left + self.n_top + self.n_fresh

    @property
    def n_outputs(self):
        return self.n_phys + self.n_right + self.n_bottom

    @property
    def n_wires(self):
        return self.n_inputs


def interior_signature(n_bq, extra_inputs=0):
    """Signature of a bulk square-lattice block with ``n_bq`` bond qubits."""
    if extra_inputs:
        raise ValueError("interior blocks take no extra inputs")
    return WireSignature(n_left=n_bq, n_top=n_bq, n_fresh=1,
                         n_phys=1, n_right=n_bq, n_bottom=n_bq)


def n_block_params(signature, n_bl):
    """Number of rotation angles in a block: 3 per wire per layer."""
    return 3 * signature.n_wires * n_bl


@dataclass(frozen=True)
class Block:
    signature: WireSignature
    n_layers: int
    params: np.ndarray
    unitary: np.ndarray

    @property
    def n_wires(self):
        return self.signature.n_wires

    def gate_count(self):
        w = self.n_wires
        per_layer = 2 * w if w >= 2 else 1
        return self.n_layers * per_layer


def build_block(signature, params, n_bl=None):
    """Compose the dense block unitary from its rotation angles.

    ``params`` has ``3 * n_wires * n_bl`` entries; when ``n_bl`` is omitted
    it is inferred from the parameter count.
    """
    params = np.asarray(params, dtype=float).reshape(-1)
    w = signature.n_wires
    if n_bl is None:
        if params.size % (3 * w) != 0 or params.size == 0:
            raise ValueError(
                f"cannot infer layer count from {params.size} angles on "
                f"{w} wires")
        n_bl = params.size // (3 * w)
    gates = block_gate_sequence(w, n_bl, params)
    U = compose_gates(w, gates)
    return Block(signature=signature, n_layers=n_bl, params=params,
                 unitary=U)


def random_block_params(signature, n_bl, rng):
    """Angles drawn independently and uniformly from [-pi, pi]."""
    return rng.uniform(-np.pi, np.pi, n_block_params(signature, n_bl))


def _fresh_zero_slice(block):
    """Columns of the unitary with every fresh input wire fixed to |0>.

    Returns the matrix ``S[(p,k,l), (i,j)]`` of shape
    ``(2**n_outputs, 2**(n_left+n_top))``.
    """
    sig = block.signature
    w = sig.n_wires
    n_bond_in = sig.n_left + sig.n_top
    cols = block.unitary.reshape(2 ** w, *(2,) * w)
    # Input axes are ordered (left, top, fresh); take fresh = 0.
    idx = (slice(None),) + (slice(None),) * n_bond_in + (0,) * sig.n_fresh
    return cols[idx].reshape(2 ** w, 2 ** n_bond_in)


def isometry_deviation(block):
    """Max-entry deviation of the bond-space contraction from identity.

    Reshapes the fresh=|0> slice into ``M[(i,j), (p,k,l)]`` and returns
    ``max |M M^dag - 1|`` on the (left, top) bond space.  Any unitary block
    satisfies this to machine precision because the slice is a set of
    orthonormal columns.
    """
    S = _fresh_zero_slice(block)
    gram = S.conj().T @ S
    return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))


def block_tensor(block):
    """Site tensor ``A[i, j, k, l, p]`` from the fresh=|0> unitary slice.

    Index dimensions are ``(2**n_left, 2**n_top, 2**n_right, 2**n_bottom,
    2**n_phys)``.
    """
    sig = block.signature
    S = _fresh_zero_slice(block)
    A = S.reshape((2 ** sig.n_phys, 2 ** sig.n_right, 2 ** sig.n_bottom,
                   2 ** sig.n_left, 2 ** sig.n_top))
    return A.transpose(3, 4, 1, 2, 0)
