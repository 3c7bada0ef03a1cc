"""Exact short-cycle census and girth."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from . import kernels
from .graph import TannerGraph, tree_expand

CYCLE_LENGTHS = (4, 6, 8, 10)


@dataclass(frozen=True)
class CycleCensus:
    """Simple-cycle counts per even length; ``girth`` is ``None`` for an acyclic graph."""

    counts: dict[int, int]
    girth: int | None

    @property
    def acyclic(self) -> bool:
        return self.girth is None

    def rows(self) -> list[tuple[int, int]]:
        return sorted(self.counts.items())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["length", "count"])
        w.writerows(self.rows())
        return buf.getvalue()


def count_cycles(graph: TannerGraph, max_len: int = 10) -> CycleCensus:
    """Count simple cycles of each even length up to ``max_len`` (at most 10).

    Every cycle is counted once: the search roots each cycle at its smallest
    node and only walks through larger nodes, so a cycle is seen exactly twice
    (once per direction) and the raw count is halved.
    """
    if max_len not in CYCLE_LENGTHS:
        raise ValueError(f"max_len must be one of {CYCLE_LENGTHS}, got {max_len}")
    raw = kernels.count_cycles(*graph.arrays, max_len)
    counts = {L: int(raw[L]) for L in CYCLE_LENGTHS if L <= max_len}
    return CycleCensus(counts, girth(graph))


def girth(graph: TannerGraph) -> int | None:
    """Shortest cycle length, via per-edge expansion with the edge removed."""
    best = None
    for v, c in graph.edges():
        depth = shortest_return(graph, v, c, best)
        if depth is not None:
            length = 2 * depth + 2
            if best is None or length < best:
                best = length
                if best == 4:
                    break
    return best


def shortest_return(graph: TannerGraph, v: int, c: int, bound: int | None = None) -> int | None:
    """Check level at which ``c`` is re-reached from ``v`` without edge ``(v, c)``."""
    max_depth = None if bound is None else (bound - 2) // 2
    exp = tree_expand(graph, v, excluded_edge=(v, c), max_depth=max_depth)
    d = int(exp.chk_depth[c])
    return d if d >= 0 else None


def induced_variable_subgraph(graph: TannerGraph, variables) -> TannerGraph:
    """Subgraph on ``variables`` and every check; used for degree-2 acyclicity checks."""
    return graph.subgraph(sorted(variables))
