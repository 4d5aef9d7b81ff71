"""Directed qubit-coupling graphs and linear-chain selection.

A coupling graph records on which ordered qubit pairs a native CNOT is
available.  GHZ preparation only needs a simple path through the graph;
every path link whose CNOT points the wrong way costs four extra Hadamard
gates, so chain search minimizes the number of such reversed links.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence


class GraphFormatError(ValueError):
    """Raised when a coupling-graph description fails to parse or validate."""


class ChainError(ValueError):
    """Raised when a qubit sequence is not a valid chain on a graph."""


class NoChainError(LookupError):
    """Raised when no simple path of the requested length exists."""


@dataclass(frozen=True)
class CouplingGraph:
    """Directed coupling map: ``edges`` holds (control, target) pairs."""

    nodes: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    name: str = ""

    def __post_init__(self):
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise GraphFormatError("duplicate node labels in graph")
        for a, b in self.edges:
            if a == b:
                raise GraphFormatError(f"self-loop on node {a}")
            for end in (a, b):
                if end not in node_set:
                    raise GraphFormatError(
                        f"edge ({a},{b}) references undeclared node {end}"
                    )

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def has_edge(self, control: int, target: int) -> bool:
        return (control, target) in self.edges

    def connected(self, a: int, b: int) -> bool:
        """True if a CNOT exists between a and b in either direction."""
        return (a, b) in self.edges or (b, a) in self.edges

    def undirected_neighbors(self, node: int) -> list[int]:
        out = {b for a, b in self.edges if a == node}
        out |= {a for a, b in self.edges if b == node}
        return sorted(out)

    def reversed(self) -> CouplingGraph:
        """Graph with every edge direction flipped."""
        return CouplingGraph(
            self.nodes, frozenset((b, a) for a, b in self.edges), self.name
        )


@dataclass(frozen=True)
class QubitChain:
    """Simple path of physical qubits; ``reversal_count`` counts links
    (a, b) where only the (b, a) CNOT direction is available."""

    qubits: tuple[int, ...]
    reversal_count: int

    def __len__(self) -> int:
        return len(self.qubits)

    @classmethod
    def on_graph(cls, graph: CouplingGraph, qubits: Sequence[int]) -> QubitChain:
        """Validate ``qubits`` as a simple path on ``graph`` and count reversals."""
        qubits = tuple(int(q) for q in qubits)
        if not qubits:
            raise ChainError("chain must contain at least one qubit")
        if len(set(qubits)) != len(qubits):
            raise ChainError(f"chain {qubits} repeats a qubit")
        node_set = set(graph.nodes)
        for q in qubits:
            if q not in node_set:
                raise ChainError(f"chain qubit {q} is not a graph node")
        reversals = 0
        for a, b in zip(qubits, qubits[1:]):
            if graph.has_edge(a, b):
                continue
            if graph.has_edge(b, a):
                reversals += 1
            else:
                raise ChainError(f"qubits {a} and {b} are not coupled")
        return cls(qubits, reversals)


def _parse_graph_dict(data: dict, origin: str) -> CouplingGraph:
    if not isinstance(data, dict):
        raise GraphFormatError(f"{origin}: top level must be an object")
    try:
        raw_nodes = data["nodes"]
        raw_edges = data["edges"]
    except KeyError as exc:
        raise GraphFormatError(f"{origin}: missing key {exc}") from None
    nodes = []
    for i, v in enumerate(raw_nodes):
        if not isinstance(v, int) or isinstance(v, bool):
            raise GraphFormatError(f"{origin}: nodes[{i}] is not an integer")
        nodes.append(v)
    edges = []
    seen = set()
    for i, pair in enumerate(raw_edges):
        if (
            not isinstance(pair, (list, tuple))
            or len(pair) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in pair)
        ):
            raise GraphFormatError(f"{origin}: edges[{i}] must be [control, target]")
        edge = (pair[0], pair[1])
        if edge in seen:
            raise GraphFormatError(f"{origin}: edges[{i}] duplicates edge {edge}")
        seen.add(edge)
        edges.append(edge)
    try:
        return CouplingGraph(tuple(nodes), frozenset(edges), str(data.get("name", "")))
    except GraphFormatError as exc:
        raise GraphFormatError(f"{origin}: {exc}") from None


def load_graph(source: str | Path) -> CouplingGraph:
    """Load a coupling graph from a JSON file with ``nodes`` and ``edges``.

    The name of a bundled graph (currently ``"ibmqx5"``) is accepted in
    place of a path.
    """
    if isinstance(source, str) and not source.endswith(".json") and "/" not in source:
        return bundled_graph(source)
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise GraphFormatError(f"{path}: cannot read graph file: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    return _parse_graph_dict(data, str(path))


def bundled_graph(name: str = "ibmqx5") -> CouplingGraph:
    """Load one of the coupling maps shipped with the package."""
    ref = resources.files("ghzsim.data").joinpath(f"{name}.json")
    try:
        data = json.loads(ref.read_text())
    except FileNotFoundError:
        raise GraphFormatError(f"no bundled graph named {name!r}") from None
    return _parse_graph_dict(data, f"bundled:{name}")


def iter_simple_paths(graph: CouplingGraph, length: int) -> Iterable[tuple[int, ...]]:
    """Yield every simple path with ``length`` nodes, as label tuples.

    Paths are generated in lexicographic order of the label sequence.  A
    path and its reverse are distinct (their reversal counts differ).
    """
    path: list[int] = []
    in_path: set[int] = set()

    def extend():
        if len(path) == length:
            yield tuple(path)
            return
        for nxt in graph.undirected_neighbors(path[-1]):
            if nxt in in_path:
                continue
            path.append(nxt)
            in_path.add(nxt)
            yield from extend()
            path.pop()
            in_path.remove(nxt)

    for start in sorted(graph.nodes):
        path = [start]
        in_path = {start}
        yield from extend()


def find_chain(graph: CouplingGraph, n: int, anchor: int | None = None) -> QubitChain:
    """Exhaustively search for an n-qubit chain with the fewest reversed links.

    Ties are broken by the lexicographically smallest label sequence.  If
    ``anchor`` is given only chains starting there are considered.
    """
    if n < 1 or n > graph.n_nodes:
        raise NoChainError(f"no chain of length {n} on a {graph.n_nodes}-node graph")
    if anchor is not None and anchor not in set(graph.nodes):
        raise NoChainError(f"anchor {anchor} is not a graph node")

    best: QubitChain | None = None
    for qubits in iter_simple_paths(graph, n):
        if anchor is not None and qubits[0] != anchor:
            continue
        chain = QubitChain.on_graph(graph, qubits)
        if best is None or (chain.reversal_count, chain.qubits) < (
            best.reversal_count,
            best.qubits,
        ):
            best = chain
    if best is None:
        raise NoChainError(f"no simple path with {n} qubits exists")
    return best
