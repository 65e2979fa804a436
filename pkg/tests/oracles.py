"""Independent brute-force oracles used by the test suite.

These deliberately avoid the library's own algorithms: path optimality is
checked by exhaustive simple-path enumeration, evaluation order by checking
against the full set of valid topological constraints, image math by plain
per-pixel loops.
"""

from __future__ import annotations

from typing import Iterator, Optional

Edge = tuple[str, str]
PathLabel = tuple[int, int, tuple[str, ...]]  # (cost, steps, node sequence)


def enumerate_simple_paths(edges: dict[Edge, int], src: str, dst: str) -> Iterator[PathLabel]:
    """Every simple path src->dst via recursive enumeration."""
    adjacency: dict[str, list[str]] = {}
    for a, b in edges:
        adjacency.setdefault(a, []).append(b)

    def walk(node: str, visited: tuple[str, ...], cost: int):
        if node == dst:
            yield (cost, len(visited) - 1, visited)
            return
        for nxt in adjacency.get(node, []):
            if nxt not in visited:
                yield from walk(nxt, visited + (nxt,), cost + edges[(node, nxt)])

    yield from walk(src, (src,), 0)


def best_path(edges: dict[Edge, int], src: str, dst: str) -> Optional[PathLabel]:
    """Minimal (cost, steps, lexicographic node sequence), or None if unreachable."""
    if src == dst:
        return (0, 0, (src,))
    labels = list(enumerate_simple_paths(edges, src, dst))
    return min(labels) if labels else None


def best_from_sources(edges: dict[Edge, int], sources: list[str], dst: str) -> Optional[tuple[str, PathLabel]]:
    """Cheapest path into dst from any source: min cost, fewer steps, then
    lexicographically smallest source id."""
    best: Optional[tuple[tuple[int, int, str], str, PathLabel]] = None
    for source in sorted(sources):
        label = best_path(edges, source, dst)
        if label is None:
            continue
        rank = (label[0], label[1], source)
        if best is None or rank < best[0]:
            best = (rank, source, label)
    return (best[1], best[2]) if best else None


def is_topological(order: list[str], dependencies: set[tuple[str, str]]) -> bool:
    """order respects every (supplier, consumer) pair that is included in it."""
    position = {identifier: i for i, identifier in enumerate(order)}
    for supplier, consumer in dependencies:
        if supplier in position and consumer in position:
            if position[supplier] >= position[consumer]:
                return False
    return True
