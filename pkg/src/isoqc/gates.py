"""Elementary gate matrices and the block gate layout.

Conventions: wires within a register are big-endian (wire 0 is the most
significant bit of a basis index), matching ``numpy.reshape`` on a
``(2,) * n`` tensor.  All matrices are returned as complex128.
"""

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
SDG = np.array([[1, 0], [0, -1j]], dtype=complex)

PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}

# CNOT with the control on the first wire, big-endian.
CNOT = np.array(
    [[1, 0, 0, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1],
     [0, 0, 1, 0]], dtype=complex)

SWAP = np.array(
    [[1, 0, 0, 0],
     [0, 0, 1, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1]], dtype=complex)


def u3(theta, phi, lam):
    """Three-parameter single-qubit rotation.

    ``u3(0, 0, 0)`` is the identity; the matrix equals
    ``Rz(phi) @ Ry(theta) @ Rz(lam)`` up to a global phase.
    """
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array(
        [[c, -np.exp(1j * lam) * s],
         [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]])


def block_gate_sequence(n_wires, n_layers, angles):
    """Gate list realizing one unitary block.

    Each layer applies a ``u3`` rotation on every wire followed by a cyclic
    chain of CNOTs (``0->1, 1->2, ..., w-1->0``); a single-wire layer is just
    one rotation.  ``angles`` holds three entries per rotation, layer by
    layer, wire by wire.

    Returns a list of ``("u3", (wire,), (theta, phi, lam))`` and
    ``("cx", (control, target), ())`` entries.
    """
    w = int(n_wires)
    if w < 1:
        raise ValueError("block needs at least one wire")
    angles = np.asarray(angles, dtype=float).reshape(-1)
    expected = 3 * w * n_layers
    if angles.size != expected:
        raise ValueError(
            f"expected {expected} angles for {w} wires x {n_layers} layers, "
            f"got {angles.size}")
    if not np.all(np.isfinite(angles)):
        raise ValueError("angles must be finite")
    gates = []
    pos = 0
    for _ in range(n_layers):
        for q in range(w):
            gates.append(("u3", (q,), tuple(angles[pos:pos + 3])))
            pos += 3
        if w >= 2:
            for q in range(w):
                gates.append(("cx", (q, (q + 1) % w), ()))
    return gates


def gate_matrix(name, params=()):
    if name == "u3":
        return u3(*params)
    if name == "cx":
        return CNOT
    if name == "swap":
        return SWAP
    raise ValueError(f"unknown gate {name!r}")


def compose_gates(n_wires, gates):
    """Dense unitary of a gate list acting on ``n_wires`` wires."""
    dim = 2 ** n_wires
    U = np.eye(dim, dtype=complex)
    U = U.reshape((2,) * (2 * n_wires))
    for name, wires, params in gates:
        k = len(wires)
        g = gate_matrix(name, params).reshape((2,) * (2 * k))
        # Contract gate input axes with the current output axes.
        U = np.tensordot(g, U, axes=(list(range(k, 2 * k)), list(wires)))
        # tensordot puts the gate's output axes first; restore positions.
        untouched = [a for a in range(2 * n_wires) if a not in wires]
        pos = {axis: k + i for i, axis in enumerate(untouched)}
        for i, q in enumerate(wires):
            pos[q] = i
        U = U.transpose([pos[a] for a in range(2 * n_wires)])
    return U.reshape(dim, dim)
