"""Network data model and dataset loading.

A dataset is a directory holding three files::

    manifest.json   {"name", "root_bus", "format_version"}
    buses.csv       id,demand_kw
    branches.csv    id,from,to,r_ohm,x_ohm,is_tie

Two feeders are bundled: ``ieee33`` (33 buses, 37 branches) and ``ieee69``
(69 buses, 73 branches). Tie lines are numbered after the feeder branches.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable

from .errors import DatasetParseError, ValidationError

FORMAT_VERSION = 1
BUS_HEADER = ["id", "demand_kw"]
BRANCH_HEADER = ["id", "from", "to", "r_ohm", "x_ohm", "is_tie"]

BUNDLED_DIR = Path(__file__).parent / "data"
DATASET_ALIASES = {"33": "ieee33", "69": "ieee69"}


@dataclass(frozen=True)
class Bus:
    id: int
    demand_kw: float


@dataclass(frozen=True)
class Branch:
    id: int
    from_bus: int
    to_bus: int
    resistance_ohm: float
    reactance_ohm: float
    is_tie: bool

    @property
    def impedance(self) -> float:
        return math.hypot(self.resistance_ohm, self.reactance_ohm)


@dataclass(frozen=True)
class Network:
    """Immutable undirected multigraph of buses and switchable branches."""

    name: str
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    root: int = 1

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    @property
    def n_branches(self) -> int:
        return len(self.branches)

    @cached_property
    def tie_ids(self) -> tuple[int, ...]:
        return tuple(br.id for br in self.branches if br.is_tie)

    @property
    def n_ties(self) -> int:
        return len(self.tie_ids)

    @cached_property
    def branch_ids(self) -> tuple[int, ...]:
        return tuple(br.id for br in self.branches)

    @cached_property
    def _branch_index(self) -> dict[int, Branch]:
        return {br.id: br for br in self.branches}

    @cached_property
    def _bus_index(self) -> dict[int, Bus]:
        return {b.id: b for b in self.buses}

    def branch(self, branch_id: int) -> Branch:
        return self._branch_index[branch_id]

    def bus(self, bus_id: int) -> Bus:
        return self._bus_index[bus_id]

    @cached_property
    def adjacency(self) -> dict[int, tuple[tuple[int, int], ...]]:
        """bus id -> ((neighbour bus, branch id), ...) in branch order."""
        adj: dict[int, list[tuple[int, int]]] = {b.id: [] for b in self.buses}
        for br in self.branches:
            adj[br.from_bus].append((br.to_bus, br.id))
            adj[br.to_bus].append((br.from_bus, br.id))
        return {k: tuple(v) for k, v in adj.items()}

    @property
    def total_demand_kw(self) -> float:
        return math.fsum(b.demand_kw for b in self.buses)


@dataclass(frozen=True)
class Configuration:
    """The set of open branches; every other branch is closed."""

    open_edges: frozenset[int]

    @classmethod
    def of(cls, net: Network, open_edges: Iterable[int]) -> "Configuration":
        ids = list(open_edges)
        if len(set(ids)) != len(ids):
            raise ValidationError(f"duplicate branch ids in open set {sorted(ids)}")
        unknown = [i for i in ids if i not in net._branch_index]
        if unknown:
            raise ValidationError(f"unknown branch ids {unknown} for network {net.name}")
        return cls(frozenset(ids))

    def closed_edges(self, net: Network) -> list[int]:
        return [i for i in net.branch_ids if i not in self.open_edges]

    def status_vector(self, net: Network) -> list[int]:
        return [0 if i in self.open_edges else 1 for i in net.branch_ids]

    def sorted(self) -> list[int]:
        return sorted(self.open_edges)

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.sorted())) + "}"


def base_configuration(net: Network) -> Configuration:
    """All tie switches open, every feeder branch closed."""
    return Configuration(frozenset(net.tie_ids))


def _rows(text: str, path: str, header: list[str]):
    reader = csv.reader(io.StringIO(text))
    try:
        got = next(reader)
    except StopIteration:
        raise DatasetParseError(path, 1, "empty file") from None
    if [h.strip() for h in got] != header:
        raise DatasetParseError(path, 1, f"expected header {','.join(header)}, got {','.join(got)}")
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DatasetParseError(path, reader.line_num, f"expected {len(header)} fields, got {len(row)}")
        yield reader.line_num, [c.strip() for c in row]


def _number(kind, value, path, line, field):
    try:
        out = kind(value)
    except ValueError:
        raise DatasetParseError(path, line, f"bad {field} value {value!r}") from None
    if isinstance(out, float) and not math.isfinite(out):
        raise DatasetParseError(path, line, f"non-finite {field} value {value!r}")
    return out


def parse_network(
    buses_text: str,
    branches_text: str,
    manifest: dict,
    *,
    buses_path: str = "buses.csv",
    branches_path: str = "branches.csv",
) -> Network:
    """Build and validate a Network from the raw text of a dataset."""
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise ValidationError(f"unsupported dataset format_version {version!r}")
    for key in ("name", "root_bus"):
        if key not in manifest:
            raise ValidationError(f"manifest missing {key!r}")

    buses = []
    for line, (bid, demand) in _rows(buses_text, buses_path, BUS_HEADER):
        buses.append(Bus(_number(int, bid, buses_path, line, "id"),
                         _number(float, demand, buses_path, line, "demand_kw")))

    branches = []
    for line, row in _rows(branches_text, branches_path, BRANCH_HEADER):
        bid, frm, to, r, x, tie = row
        if tie not in ("0", "1"):
            raise DatasetParseError(branches_path, line, f"is_tie must be 0 or 1, got {tie!r}")
        branches.append(Branch(
            _number(int, bid, branches_path, line, "id"),
            _number(int, frm, branches_path, line, "from"),
            _number(int, to, branches_path, line, "to"),
            _number(float, r, branches_path, line, "r_ohm"),
            _number(float, x, branches_path, line, "x_ohm"),
            tie == "1",
        ))

    net = Network(str(manifest["name"]), tuple(buses), tuple(branches), int(manifest["root_bus"]))
    validate_network(net)
    return net


def validate_network(net: Network) -> None:
    ids = [b.id for b in net.buses]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate bus ids")
    if sorted(ids) != list(range(1, len(ids) + 1)):
        raise ValidationError("bus ids must be contiguous 1..N")
    if net.root not in set(ids):
        raise ValidationError(f"root bus {net.root} does not exist")
    if any(b.demand_kw < 0 for b in net.buses):
        raise ValidationError("negative bus demand")

    bids = [br.id for br in net.branches]
    if len(set(bids)) != len(bids):
        raise ValidationError("duplicate branch ids")
    if sorted(bids) != list(range(1, len(bids) + 1)):
        raise ValidationError("branch ids must be contiguous 1..E")
    known = set(ids)
    for br in net.branches:
        if br.from_bus == br.to_bus:
            raise ValidationError(f"branch {br.id} is a self-loop")
        if br.from_bus not in known or br.to_bus not in known:
            raise ValidationError(f"branch {br.id} references a missing bus")
        if br.resistance_ohm < 0 or br.reactance_ohm < 0:
            raise ValidationError(f"branch {br.id} has negative impedance")
    if not any(br.impedance > 0 for br in net.branches):
        raise ValidationError("all branch impedances are zero")

    if net.n_ties < 1:
        raise ValidationError("network has no tie branches")
    if net.n_branches - net.n_ties != net.n_buses - 1:
        raise ValidationError(
            f"expected {net.n_buses - 1} feeder branches for a radial base topology, "
            f"got {net.n_branches - net.n_ties}"
        )

    seen = {net.root}
    queue = deque([net.root])
    while queue:
        v = queue.popleft()
        for w, _ in net.adjacency[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    if len(seen) != net.n_buses:
        raise ValidationError(f"network is disconnected: {net.n_buses - len(seen)} buses unreachable")


def load_network(source: str | os.PathLike) -> Network:
    """Load a dataset directory (manifest.json, buses.csv, branches.csv)."""
    root = Path(source)
    manifest_path = root / "manifest.json"
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetParseError(manifest_path, exc.lineno, exc.msg) from None
    buses_path = root / "buses.csv"
    branches_path = root / "branches.csv"
    return parse_network(
        buses_path.read_text(),
        branches_path.read_text(),
        manifest,
        buses_path=str(buses_path),
        branches_path=str(branches_path),
    )


def data_dir() -> Path:
    env = os.environ.get("GRIDCONF_DATA_DIR")
    return Path(env) if env else BUNDLED_DIR


def resolve_dataset(name: str | os.PathLike) -> Path:
    """Map ``33``/``69``/dataset name/explicit path to a dataset directory."""
    text = str(name)
    candidate = Path(text)
    if candidate.is_dir():
        return candidate
    key = DATASET_ALIASES.get(text, text)
    path = data_dir() / key
    if not path.is_dir():
        raise FileNotFoundError(f"dataset {text!r} not found (looked in {data_dir()})")
    return path


def load_dataset(name: str | os.PathLike) -> Network:
    return load_network(resolve_dataset(name))


def save_network(net: Network, directory: str | os.PathLike) -> Path:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"name": net.name, "root_bus": net.root, "format_version": FORMAT_VERSION}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    with open(out / "buses.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BUS_HEADER)
        for b in net.buses:
            w.writerow([b.id, repr(b.demand_kw)])
    with open(out / "branches.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BRANCH_HEADER)
        for br in net.branches:
            w.writerow([br.id, br.from_bus, br.to_bus, repr(br.resistance_ohm),
                        repr(br.reactance_ohm), int(br.is_tie)])
    return out
