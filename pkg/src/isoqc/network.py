"""Lattice networks of unitary blocks with wire routing and causal cones.

Sites are addressed ``(m, n)`` with the orthogonality center at ``(0, 0)``;
every block consumes bond wires produced by its smaller-coordinate
neighbors, so any row-major or column-major traversal is a valid schedule.
Bond wires that leave the lattice (right/bottom edges, and the carry wires
of honeycomb two-in blocks) are dangling: they are traced out by the
simulator and reset in exported circuits.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .blocks import WireSignature, build_block, n_block_params


class Wire(NamedTuple):
    kind: str        # "p" physical, "k" right bond, "l" bottom bond,
                     # "d" diagonal bond, "x" discarded carry wire
    site: tuple
    idx: int


@dataclass(frozen=True)
class LatticeSpec:
    kind: str
    rows: int
    cols: int
    n_bq: int = 1
    n_bl: int = 2

    def __post_init__(self):
        if self.kind not in ("square", "triangular", "honeycomb"):
            raise ValueError(f"unsupported lattice kind {self.kind!r}")
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be >= 1")
        if self.n_bq < 1 or self.n_bl < 1:
            raise ValueError("n_bq and n_bl must be >= 1")

    @property
    def n_sites(self):
        return self.rows * self.cols


@dataclass(frozen=True)
class SiteNode:
    coord: tuple
    signature: WireSignature
    in_wires: tuple   # consumed bond wires, in block input order
    out_wires: tuple  # produced wires, in block output order (physical first)

    @property
    def n_wires(self):
        return self.signature.n_wires

    @property
    def n_fresh(self):
        return self.signature.n_fresh

    @property
    def phys_wires(self):
        return self.out_wires[:self.signature.n_phys]


@dataclass(frozen=True)
class Network:
    spec: LatticeSpec
    sites: tuple        # SiteNode, in canonical schedule order
    order: tuple        # coords of sites, same order
    consumer: dict      # Wire -> consuming coord, or None when dangling
    param_slices: dict  # coord -> (start, stop) into the global vector
    n_params: int

    def site(self, coord):
        return self.sites[self._index[coord]]

    @property
    def _index(self):
        idx = self.__dict__.get("_index_cache")
        if idx is None:
            idx = {s.coord: i for i, s in enumerate(self.sites)}
            self.__dict__["_index_cache"] = idx
        return idx

    def predecessors(self, coord):
        return {w.site for w in self.site(coord).in_wires}

    def param_slice(self, coord):
        start, stop = self.param_slices[coord]
        return slice(start, stop)


def _square_sites(spec, order):
    b = spec.n_bq
    w = 2 * b + 1
    sites = []
    for (m, n) in order:
        n_left = b if n > 0 else 0
        n_top = b if m > 0 else 0
        sig = WireSignature(n_left=n_left, n_top=n_top,
                            n_fresh=w - n_left - n_top,
                            n_phys=1, n_right=b, n_bottom=b)
        ins = tuple(Wire("k", (m, n - 1), t) for t in range(n_left)) + \
              tuple(Wire("l", (m - 1, n), t) for t in range(n_top))
        outs = (Wire("p", (m, n), 0),) + \
               tuple(Wire("k", (m, n), t) for t in range(b)) + \
               tuple(Wire("l", (m, n), t) for t in range(b))
        sites.append(SiteNode((m, n), sig, ins, outs))
    consumer = {}
    for s in sites:
        m, n = s.coord
        for wire in s.out_wires:
            if wire.kind == "k":
                consumer[wire] = (m, n + 1) if n + 1 < spec.cols else None
            elif wire.kind == "l":
                consumer[wire] = (m + 1, n) if m + 1 < spec.rows else None
    return sites, consumer


def _triangular_sites(spec, order):
    # Square grid plus a (m,n) -> (m+1,n+1) diagonal: bulk sites have three
    # incoming and three outgoing bonds.
    b = spec.n_bq
    w = 3 * b + 1
    sites = []
    for (m, n) in order:
        ins = tuple(Wire("k", (m, n - 1), t) for t in range(b) if n > 0) + \
              tuple(Wire("l", (m - 1, n), t) for t in range(b) if m > 0) + \
              tuple(Wire("d", (m - 1, n - 1), t) for t in range(b)
                    if m > 0 and n > 0)
        sig = WireSignature(n_left=len(ins), n_top=0,
                            n_fresh=w - len(ins),
                            n_phys=1, n_right=3 * b, n_bottom=0)
        outs = (Wire("p", (m, n), 0),) + \
               tuple(Wire("k", (m, n), t) for t in range(b)) + \
               tuple(Wire("l", (m, n), t) for t in range(b)) + \
               tuple(Wire("d", (m, n), t) for t in range(b))
        sites.append(SiteNode((m, n), sig, ins, outs))
    consumer = {}
    for s in sites:
        m, n = s.coord
        for wire in s.out_wires:
            if wire.kind == "k":
                nxt = (m, n + 1)
            elif wire.kind == "l":
                nxt = (m + 1, n)
            elif wire.kind == "d":
                nxt = (m + 1, n + 1)
            else:
                continue
            inside = nxt[0] < spec.rows and nxt[1] < spec.cols
            consumer[wire] = nxt if inside else None
    return sites, consumer


def _honeycomb_sites(spec, order):
    # Brick-wall honeycomb: rows are chains, and a vertical bond links
    # (m, n) to (m+1, n) exactly when (m + n) is even.  Down-linked sites
    # have one incoming and two outgoing bonds; up-linked sites have two
    # incoming bonds, one outgoing bond and a carry wire that is discarded
    # (its register qubit is reset before reuse).
    b = spec.n_bq
    w = 2 * b + 1

    def down_linked(m, n):
        return (m + n) % 2 == 0 and m + 1 < spec.rows

    def up_linked(m, n):
        return (m + n) % 2 == 1 and m > 0

    sites = []
    for (m, n) in order:
        ins = tuple(Wire("k", (m, n - 1), t) for t in range(b) if n > 0)
        if up_linked(m, n):
            ins += tuple(Wire("l", (m - 1, n), t) for t in range(b))
        sig = WireSignature(n_left=len(ins), n_top=0,
                            n_fresh=w - len(ins),
                            n_phys=1, n_right=2 * b, n_bottom=0)
        outs = (Wire("p", (m, n), 0),) + \
               tuple(Wire("k", (m, n), t) for t in range(b))
        if down_linked(m, n):
            outs += tuple(Wire("l", (m, n), t) for t in range(b))
        else:
            outs += tuple(Wire("x", (m, n), t) for t in range(b))
        sites.append(SiteNode((m, n), sig, ins, outs))
    consumer = {}
    for s in sites:
        m, n = s.coord
        for wire in s.out_wires:
            if wire.kind == "k":
                consumer[wire] = (m, n + 1) if n + 1 < spec.cols else None
            elif wire.kind == "l":
                consumer[wire] = (m + 1, n)
            elif wire.kind == "x":
                consumer[wire] = None
    return sites, consumer


_BUILDERS = {"square": _square_sites,
             "triangular": _triangular_sites,
             "honeycomb": _honeycomb_sites}


def grid_order(rows, cols, column_major=False):
    if column_major:
        return tuple((m, n) for n in range(cols) for m in range(rows))
    return tuple((m, n) for m in range(rows) for n in range(cols))


def build_network(spec):
    """Assemble the block network for a lattice specification.

    The canonical schedule sweeps along the longer lattice dimension so the
    live frontier spans the shorter one (a 4x20 lattice keeps a 4-row
    frontier).
    """
    order = grid_order(spec.rows, spec.cols,
                       column_major=spec.cols > spec.rows)
    sites, consumer = _BUILDERS[spec.kind](spec, order)
    slices = {}
    pos = 0
    for s in sites:
        count = n_block_params(s.signature, spec.n_bl)
        slices[s.coord] = (pos, pos + count)
        pos += count
    return Network(spec=spec, sites=tuple(sites), order=order,
                   consumer=consumer, param_slices=slices, n_params=pos)


def random_params(network, rng):
    """Global parameter vector with angles uniform on [-pi, pi]."""
    if not hasattr(rng, "uniform"):
        rng = np.random.default_rng(rng)
    return rng.uniform(-np.pi, np.pi, network.n_params)


def site_params(network, params, coord):
    params = np.asarray(params)
    if params.shape != (network.n_params,):
        raise ValueError(
            f"expected {network.n_params} parameters, got {params.shape}")
    return params[network.param_slice(coord)]


def site_block(network, params, coord):
    node = network.site(coord)
    return build_block(node.signature, site_params(network, params, coord),
                       n_bl=network.spec.n_bl)


def network_blocks(network, params):
    """All blocks of the network for one global parameter vector."""
    return {c: site_block(network, params, c) for c in network.order}


def total_gate_count(network):
    w_counts = [s.n_wires for s in network.sites]
    n_bl = network.spec.n_bl
    return sum(n_bl * (2 * w if w >= 2 else 1) for w in w_counts)


def mask_from_sites(network, coords):
    """Boolean trainability mask selecting all parameters of some sites."""
    mask = np.zeros(network.n_params, dtype=bool)
    for c in coords:
        mask[network.param_slice(c)] = True
    return mask


def causal_cone(network, sites):
    """All sites whose outputs can reach the given sites' physical wires.

    Reverse reachability over the wire DAG; for the square lattice this is
    the union of rectangles anchored at the orthogonality center.
    """
    for c in sites:
        if c not in network._index:
            raise ValueError(f"site {c} not in lattice")
    seen = set()
    stack = list(sites)
    while stack:
        c = stack.pop()
        if c in seen:
            continue
        seen.add(c)
        stack.extend(network.predecessors(c))
    return seen


def evaluation_order(network, cone=None):
    """Schedule for one contraction, optionally restricted to a cone.

    Row- and column-major are both linear extensions of the wire DAG; pick
    the orientation whose frontier spans the smaller extent of the cone's
    bounding box.
    """
    if cone is None:
        return network.order
    cone = set(cone)
    n_rows = len({m for m, _ in cone})
    n_cols = len({n for _, n in cone})
    coords = grid_order(network.spec.rows, network.spec.cols,
                        column_major=n_cols > n_rows)
    return tuple(c for c in coords if c in cone)


def frontier_width(network, order=None):
    """Peak number of simultaneously-live wires under a schedule."""
    if order is None:
        order = network.order
    keep = set(order)
    live = 0
    peak = 0
    for coord in order:
        node = network.site(coord)
        spectators = live - len(node.in_wires)
        peak = max(peak, spectators + node.n_wires)
        live = spectators
        for wire in node.out_wires:
            if wire.kind != "p" and network.consumer.get(wire) in keep:
                live += 1
    return peak


def wire_census(network):
    """Counts of produced bond wires split by consumed vs dangling."""
    produced = consumed = dangling = 0
    for s in network.sites:
        for wire in s.out_wires:
            if wire.kind == "p":
                continue
            produced += 1
            if network.consumer.get(wire) is None:
                dangling += 1
            else:
                consumed += 1
    return {"produced": produced, "consumed": consumed,
            "dangling": dangling}
