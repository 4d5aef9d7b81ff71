import json

import networkx as nx
import pytest

from ghzsim.refdata import STUDY_CHAINS
from ghzsim.topology import (
    ChainError,
    GraphFormatError,
    NoChainError,
    QubitChain,
    find_chain,
    iter_simple_paths,
    load_graph,
)


def write_graph(tmp_path, data):
    path = tmp_path / "graph.json"
    path.write_text(json.dumps(data))
    return path


def test_bundled_ibmqx5(ibmqx5):
    assert ibmqx5.n_nodes == 16
    assert len(ibmqx5.edges) == 22
    assert ibmqx5.has_edge(1, 0)
    assert ibmqx5.has_edge(3, 14)
    assert ibmqx5.has_edge(15, 14)
    assert not ibmqx5.has_edge(0, 1)
    # every qubit couples to at least two neighbors on the 2x8 lattice
    assert all(len(ibmqx5.undirected_neighbors(q)) >= 2 for q in ibmqx5.nodes)


def test_empty_graph_is_valid(tmp_path):
    graph = load_graph(write_graph(tmp_path, {"nodes": [], "edges": []}))
    assert graph.n_nodes == 0


def test_undeclared_edge_endpoint(tmp_path):
    path = write_graph(tmp_path, {"nodes": [0, 1], "edges": [[0, 99]]})
    with pytest.raises(GraphFormatError, match="99"):
        load_graph(path)


def test_duplicate_edge_rejected(tmp_path):
    path = write_graph(tmp_path, {"nodes": [0, 1], "edges": [[0, 1], [0, 1]]})
    with pytest.raises(GraphFormatError, match="duplicates"):
        load_graph(path)


def test_self_loop_rejected(tmp_path):
    path = write_graph(tmp_path, {"nodes": [0], "edges": [[0, 0]]})
    with pytest.raises(GraphFormatError, match="self-loop"):
        load_graph(path)


def test_parse_error_reports_location(tmp_path):
    path = tmp_path / "graph.json"
    path.write_text("{nodes: oops")
    with pytest.raises(GraphFormatError, match=str(path)):
        load_graph(path)


def test_chain_1_to_5_has_one_reversal(ibmqx5):
    chain = QubitChain.on_graph(ibmqx5, (1, 2, 3, 4, 5))
    assert chain.reversal_count == 1  # only the (4, 5) link points the wrong way
    assert QubitChain.on_graph(ibmqx5, (1, 2, 3, 4)).reversal_count == 0


def test_study_chains_are_legal(ibmqx5):
    expected_reversals = {7: 3, 8: 3, 9: 4}
    for n, qubits in STUDY_CHAINS.items():
        chain = QubitChain.on_graph(ibmqx5, qubits)
        assert len(chain) == n
        if n in expected_reversals:
            assert chain.reversal_count == expected_reversals[n]


def test_invalid_chains_rejected(ibmqx5):
    with pytest.raises(ChainError, match="not coupled"):
        QubitChain.on_graph(ibmqx5, (0, 2))
    with pytest.raises(ChainError, match="repeats"):
        QubitChain.on_graph(ibmqx5, (1, 2, 1))
    with pytest.raises(ChainError, match="not a graph node"):
        QubitChain.on_graph(ibmqx5, (1, 99))


def test_find_chain_single_qubit(ibmqx5):
    chain = find_chain(ibmqx5, 1)
    assert chain == QubitChain((0,), 0)


def test_find_chain_tie_break_is_lexicographic(ibmqx5):
    # every directed edge is a zero-reversal 2-chain; (1, 0) is the smallest
    assert find_chain(ibmqx5, 2).qubits == (1, 0)


def test_find_chain_anchor(ibmqx5):
    chain = find_chain(ibmqx5, 3, anchor=9)
    assert chain.qubits[0] == 9
    assert chain.reversal_count == 0  # 9 -> 8 -> 7 exists


def _bruteforce_min_reversals(graph, n):
    """Independent oracle: enumerate simple paths with networkx."""
    und = nx.Graph()
    und.add_nodes_from(graph.nodes)
    und.add_edges_from(graph.edges)
    best = None
    for source in graph.nodes:
        for target in graph.nodes:
            if source == target:
                continue
            for path in nx.all_simple_paths(und, source, target, cutoff=n - 1):
                if len(path) != n:
                    continue
                reversals = sum(
                    1 for a, b in zip(path, path[1:]) if (a, b) not in graph.edges
                )
                if best is None or reversals < best:
                    best = reversals
    return best


@pytest.mark.parametrize("n", range(2, 9))
def test_find_chain_matches_bruteforce(ibmqx5, n):
    assert find_chain(ibmqx5, n).reversal_count == _bruteforce_min_reversals(ibmqx5, n)


def test_reversed_graph_maps_reversal_counts(ibmqx5):
    flipped = ibmqx5.reversed()
    for n in (2, 4, 6):
        paths = list(iter_simple_paths(ibmqx5, n))
        assert paths == list(iter_simple_paths(flipped, n))
        for qubits in paths[::7]:
            fwd = QubitChain.on_graph(ibmqx5, qubits).reversal_count
            rev = QubitChain.on_graph(flipped, qubits).reversal_count
            assert rev == (n - 1) - fwd


def test_chain_links_always_adjacent(ibmqx5):
    for n in range(1, 10):
        chain = find_chain(ibmqx5, n)
        for a, b in zip(chain.qubits, chain.qubits[1:]):
            assert ibmqx5.connected(a, b)


def test_no_chain_errors(ibmqx5, tmp_path):
    with pytest.raises(NoChainError):
        find_chain(ibmqx5, 17)
    star = load_graph(
        write_graph(tmp_path, {"nodes": [0, 1, 2, 3], "edges": [[0, 1], [0, 2], [0, 3]]})
    )
    with pytest.raises(NoChainError):
        find_chain(star, 4)
    assert find_chain(star, 3).reversal_count == 1  # leaf-center-leaf
