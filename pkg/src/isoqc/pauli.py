"""Pauli strings on lattice sites and weighted sums of them."""

from dataclasses import dataclass, field

import numpy as np

from .gates import PAULI


@dataclass(frozen=True)
class PauliTerm:
    """A weighted Pauli string, e.g. ``PauliTerm({(0, 0): "Z", (0, 1): "Z"})``.

    An empty operator map is the identity (times the coefficient).
    """

    ops: tuple
    coefficient: float = 1.0

    def __init__(self, ops, coefficient=1.0):
        if isinstance(ops, dict):
            ops = tuple(sorted(ops.items()))
        else:
            ops = tuple(sorted(ops))
        seen = set()
        for site, letter in ops:
            if letter not in ("X", "Y", "Z"):
                raise ValueError(f"unknown Pauli letter {letter!r}")
            if site in seen:
                raise ValueError(f"duplicate site {site} in Pauli term")
            seen.add(site)
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "coefficient", float(coefficient))

    @property
    def support(self):
        return tuple(site for site, _ in self.ops)

    @property
    def letters(self):
        return dict(self.ops)

    def matrix(self, letter_or_site):
        return PAULI[self.letters[letter_or_site]]

    def with_coefficient(self, c):
        return PauliTerm(self.ops, c)


@dataclass(frozen=True)
class Hamiltonian:
    """A list of Pauli terms on a rows x cols lattice."""

    rows: int
    cols: int
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            for (m, n) in t.support:
                if not (0 <= m < self.rows and 0 <= n < self.cols):
                    raise ValueError(f"term site {(m, n)} outside lattice")

    @property
    def n_sites(self):
        return self.rows * self.cols

    @property
    def sites(self):
        return tuple((m, n) for m in range(self.rows)
                     for n in range(self.cols))

    def site_index(self, coord):
        m, n = coord
        return m * self.cols + n


def term_dense(term, rows, cols):
    """Dense matrix of one Pauli string on the full lattice register.

    Site ``(m, n)`` occupies bit ``m * cols + n`` counted from the most
    significant end.
    """
    letters = term.letters
    out = np.ones((1, 1), dtype=complex)
    for m in range(rows):
        for n in range(cols):
            out = np.kron(out, PAULI[letters.get((m, n), "I")])
    return term.coefficient * out


def hamiltonian_dense(h):
    """Dense matrix of a Hamiltonian; use only for small lattices."""
    if h.n_sites > 14:
        raise ValueError("dense Hamiltonian limited to 14 sites")
    dim = 2 ** h.n_sites
    out = np.zeros((dim, dim), dtype=complex)
    for t in h.terms:
        out += term_dense(t, h.rows, h.cols)
    return out
