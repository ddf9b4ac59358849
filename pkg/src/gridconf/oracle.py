"""Exhaustive enumeration of open-edge sets: the exact optimum baseline.

Combinations are split into fixed-size rank ranges, so chunk boundaries and
therefore results never depend on the worker count. Per-chunk top-k lists
are merged in chunk order with ties broken by the open set itself.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from . import kernels
from .errors import GridconfError
from .grid_model import Configuration, Network
from .reliability import ReliabilityModel, average_curtailed_power
from .topology import all_nodes_traversed, is_radial

CHUNK_SIZE = 1 << 17


@dataclass
class KernelInputs:
    n_bus: int
    root: int
    eu: np.ndarray
    ev: np.ndarray
    weight: np.ndarray
    demand: np.ndarray
    adj_ptr: np.ndarray
    adj_nbr: np.ndarray
    adj_edge: np.ndarray

    def args(self):
        return (self.n_bus, self.root, self.eu, self.ev, self.weight, self.demand,
                self.adj_ptr, self.adj_nbr, self.adj_edge)


def kernel_inputs(net: Network, model: ReliabilityModel | None = None) -> KernelInputs:
    """Flatten a network into 0-based CSR arrays for the kernels."""
    n = net.n_buses
    eu = np.array([br.from_bus - 1 for br in net.branches], dtype=np.int32)
    ev = np.array([br.to_bus - 1 for br in net.branches], dtype=np.int32)
    if model is None:
        weight = np.zeros(net.n_branches)
    else:
        weight = np.array(model.outage_vector(net), dtype=np.float64)
    demand = np.array([b.demand_kw for b in net.buses], dtype=np.float64)
    ptr = [0]
    nbr: list[int] = []
    edge: list[int] = []
    for bus in net.buses:
        for w, bid in net.adjacency[bus.id]:
            nbr.append(w - 1)
            edge.append(bid - 1)
        ptr.append(len(nbr))
    return KernelInputs(n, net.root - 1, eu, ev, weight, demand,
                        np.array(ptr, dtype=np.int32), np.array(nbr, dtype=np.int32),
                        np.array(edge, dtype=np.int32))


@dataclass
class EnumerationReport:
    dataset: str
    n_edges: int
    open_count: int
    total: int
    feasible: int
    best_open_edges: list[int]
    best_acp: float
    top_k: list[dict] = field(default_factory=list)
    rank_verified: bool = False
    backend: str = kernels.BACKEND
    wall_time_s: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EnumerationReport":
        return cls(**data)


def _run_chunk(task):
    args, k, start, count, top_k, compute_acp, use_python = task
    fn = kernels.evaluate_range_py if use_python else kernels.evaluate_range
    return fn(*args, k, start, count, top_k, compute_acp)


def _chunks(total: int, chunk_size: int):
    start = 0
    while start < total:
        yield start, min(chunk_size, total - start)
        start += chunk_size


def _scan(inputs: KernelInputs, k: int, top_k: int, compute_acp: bool, workers: int,
          use_python: bool = False, chunk_size: int = CHUNK_SIZE):
    total = comb(len(inputs.eu), k)
    tasks = [(inputs.args(), k, s, c, top_k, compute_acp, use_python)
             for s, c in _chunks(total, chunk_size)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, tasks))
    else:
        results = [_run_chunk(t) for t in tasks]
    feasible = sum(r[0] for r in results)
    merged = [entry for r in results for entry in r[1]]
    merged.sort(key=lambda e: (e[0], e[1]))
    return total, feasible, merged[:top_k]


def enumerate_optimal(
    net: Network,
    model: ReliabilityModel,
    T: int | None = None,
    top_k: int = 10,
    workers: int = 1,
    *,
    verify: bool = True,
    use_python: bool = False,
) -> EnumerationReport:
    """Evaluate every ``T``-subset of branches and return the ACP minimiser.

    With ``verify`` the top-k configurations are re-checked with the
    rank-based radiality test and re-evaluated through the reliability
    module; any disagreement with the kernel raises GridconfError.
    """
    T = net.n_ties if T is None else T
    top_k = max(1, top_k)
    t0 = time.perf_counter()
    inputs = kernel_inputs(net, model)
    total, feasible, best = _scan(inputs, T, top_k, True, workers, use_python)
    if not best:
        raise GridconfError(f"no feasible configuration among {total} open sets")

    table = []
    for acp, combo in best:
        open_ids = [net.branch_ids[i] for i in combo]
        table.append({"open_edges": open_ids, "acp": acp})

    if verify:
        for row in table:
            cfg = Configuration.of(net, row["open_edges"])
            if not (all_nodes_traversed(net, cfg) and is_radial(net, cfg)):
                raise GridconfError(f"kernel marked {cfg} feasible but the rank test rejects it")
            again = average_curtailed_power(net, model, cfg)
            if again != row["acp"]:
                raise GridconfError(f"kernel ACP {row['acp']!r} != re-evaluated {again!r} for {cfg}")

    return EnumerationReport(
        dataset=net.name,
        n_edges=net.n_branches,
        open_count=T,
        total=total,
        feasible=feasible,
        best_open_edges=table[0]["open_edges"],
        best_acp=table[0]["acp"],
        top_k=table,
        rank_verified=verify,
        backend="python" if use_python else kernels.BACKEND,
        wall_time_s=time.perf_counter() - t0,
    )


def feasible_count(net: Network, T: int | None = None, workers: int = 1) -> int:
    """Number of ``T``-subsets whose complement is a spanning tree."""
    T = net.n_ties if T is None else T
    _, feasible, _ = _scan(kernel_inputs(net), T, 0, False, workers)
    return feasible


def laplacian(net: Network) -> list[list[int]]:
    n = net.n_buses
    lap = [[0] * n for _ in range(n)]
    for br in net.branches:
        a, b = br.from_bus - 1, br.to_bus - 1
        lap[a][a] += 1
        lap[b][b] += 1
        lap[a][b] -= 1
        lap[b][a] -= 1
    return lap


def integer_determinant(m: list[list[int]]) -> int:
    """Exact determinant by Gaussian elimination over the rationals."""
    a = [[Fraction(x) for x in row] for row in m]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        pivot = next((r for r in range(c, n) if a[r][c] != 0), None)
        if pivot is None:
            return 0
        if pivot != c:
            a[c], a[pivot] = a[pivot], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            if a[r][c] != 0:
                f = a[r][c] / a[c][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    assert det.denominator == 1
    return int(det)


def matrix_tree_count(net: Network) -> int:
    """Spanning-tree count: determinant of the Laplacian with the root removed."""
    lap = laplacian(net)
    r = net.root - 1
    reduced = [row[:r] + row[r + 1:] for i, row in enumerate(lap) if i != r]
    return integer_determinant(reduced)
