"""Radiality and all-node-traversal checks, plus rooted-tree utilities."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ConstraintError
from .grid_model import Configuration, Network


@dataclass(frozen=True)
class IncidenceMatrix:
    """Reduced node-branch incidence matrix over GF(2).

    One row per non-root bus, one column per closed branch. Each row is an
    int bitset whose bit ``j`` is set iff column ``j`` touches that bus.
    """

    rows: tuple[int, ...]
    n_cols: int
    row_buses: tuple[int, ...] = ()
    col_branches: tuple[int, ...] = ()

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), self.n_cols

    def column_weight(self, j: int) -> int:
        return sum((r >> j) & 1 for r in self.rows)

    def to_dense(self) -> list[list[int]]:
        return [[(r >> j) & 1 for j in range(self.n_cols)] for r in self.rows]


def incidence_matrix(net: Network, cfg: Configuration) -> IncidenceMatrix:
    closed = cfg.closed_edges(net)
    row_buses = tuple(b.id for b in net.buses if b.id != net.root)
    row_of = {bus: i for i, bus in enumerate(row_buses)}
    rows = [0] * len(row_buses)
    for j, bid in enumerate(closed):
        br = net.branch(bid)
        for end in (br.from_bus, br.to_bus):
            if end != net.root:
                rows[row_of[end]] |= 1 << j
    return IncidenceMatrix(tuple(rows), len(closed), row_buses, tuple(closed))


def rank_gf2(m: IncidenceMatrix | Sequence[int]) -> int:
    """Rank over GF(2) by Gaussian elimination on int bitsets."""
    work = list(m.rows if isinstance(m, IncidenceMatrix) else m)
    rank = 0
    while work:
        pivot_row = work.pop()
        if pivot_row == 0:
            continue
        rank += 1
        low = pivot_row & -pivot_row
        work = [r ^ pivot_row if r & low else r for r in work]
    return rank


def reachable(net: Network, cfg: Configuration) -> set[int]:
    """Buses reachable from the root through closed branches."""
    open_ = cfg.open_edges
    seen = {net.root}
    queue = deque([net.root])
    while queue:
        v = queue.popleft()
        for w, bid in net.adjacency[v]:
            if bid not in open_ and w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def all_nodes_traversed(net: Network, cfg: Configuration) -> bool:
    return len(reachable(net, cfg)) == net.n_buses


def is_radial(net: Network, cfg: Configuration) -> bool:
    """Closed branches form a spanning tree: full-rank incidence and N-1 edges.

    Rank alone cannot tell a spanning tree from a connected graph with
    loops, hence the explicit edge count.
    """
    n_closed = net.n_branches - len(cfg.open_edges)
    if n_closed != net.n_buses - 1:
        return False
    return rank_gf2(incidence_matrix(net, cfg)) == net.n_buses - 1


@dataclass
class RootedTree:
    root: int
    parent: dict[int, tuple[int, int]]
    order: list[int] = field(default_factory=list)

    def path_to_root(self, bus: int) -> list[int]:
        """Branch ids from ``bus`` up to the root."""
        path = []
        while bus != self.root:
            bus, branch_id = self.parent[bus]
            path.append(branch_id)
        return path

    def children(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {b: [] for b in self.order}
        for child, (par, _) in self.parent.items():
            out[par].append(child)
        return out


def build_rooted_tree(net: Network, cfg: Configuration) -> RootedTree:
    if not all_nodes_traversed(net, cfg):
        raise ConstraintError("traversal")
    if not is_radial(net, cfg):
        raise ConstraintError("radiality")
    open_ = cfg.open_edges
    parent: dict[int, tuple[int, int]] = {}
    order = [net.root]
    seen = {net.root}
    queue = deque([net.root])
    while queue:
        v = queue.popleft()
        for w, bid in net.adjacency[v]:
            if bid not in open_ and w not in seen:
                seen.add(w)
                parent[w] = (v, bid)
                order.append(w)
                queue.append(w)
    return RootedTree(net.root, parent, order)


class UnionFind:
    """Disjoint sets over 0..n-1 with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.components = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        """Merge the sets of ``a`` and ``b``; False if already joined."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.components -= 1
        return True


def is_spanning_tree_uf(net: Network, cfg: Configuration) -> bool:
    """Union-find test equivalent to ``all_nodes_traversed and is_radial``."""
    closed = cfg.closed_edges(net)
    if len(closed) != net.n_buses - 1:
        return False
    uf = UnionFind(net.n_buses)
    for bid in closed:
        br = net.branch(bid)
        if not uf.union(br.from_bus - 1, br.to_bus - 1):
            return False
    return True
