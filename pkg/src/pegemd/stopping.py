"""Extrinsic message degree and stopping sets."""

from __future__ import annotations

from collections import Counter
from typing import Iterable

from .graph import TannerGraph

MAX_ENUM_VARIABLES = 60
MAX_ENUM_SIZE = 8


def check_multiplicity(graph: TannerGraph, vset: Iterable[int]) -> Counter:
    """How many members of ``vset`` each check touches (the column sum of H over ``vset``)."""
    counts: Counter = Counter()
    for v in vset:
        counts.update(graph.var_nbrs(v).tolist())
    return counts


def set_emd(graph: TannerGraph, vset: Iterable[int]) -> int:
    """Number of checks connected to ``vset`` exactly once."""
    vset = set(vset)
    if not vset:
        raise ValueError("EMD of an empty set is undefined")
    for v in vset:
        if not (0 <= v < graph.n_var):
            raise ValueError(f"variable index {v} out of range")
    return sum(1 for k in check_multiplicity(graph, vset).values() if k == 1)


def is_stopping_set(graph: TannerGraph, vset: Iterable[int]) -> bool:
    vset = set(vset)
    if not vset:
        raise ValueError("stopping-set test on an empty set")
    mult = check_multiplicity(graph, vset)
    return bool(mult) and all(k >= 2 for k in mult.values())


def enumerate_stopping_sets(
    graph: TannerGraph, max_size: int, within: Iterable[int] | None = None
) -> list[frozenset[int]]:
    """All minimal stopping sets of size <= ``max_size`` inside ``within``.

    Branching search: pick a check touched exactly once by the partial set;
    any stopping set that extends the partial set must contain another of
    that check's neighbours. Refuses more than 60 candidate variables or
    ``max_size`` above 8.
    """
    allowed = set(range(graph.n_var)) if within is None else set(within)
    if len(allowed) > MAX_ENUM_VARIABLES:
        raise ValueError(f"refusing enumeration over {len(allowed)} variables (limit {MAX_ENUM_VARIABLES})")
    if max_size > MAX_ENUM_SIZE:
        raise ValueError(f"refusing max_size {max_size} (limit {MAX_ENUM_SIZE})")
    return minimal_sets(_search(graph, max_size, allowed))


def stopping_sets_containing(
    graph: TannerGraph, start: int, max_size: int, within: Iterable[int] | None = None
) -> set[frozenset[int]]:
    """Stopping sets reachable by branching from ``start`` (uncapped oracle helper)."""
    allowed = set(range(graph.n_var)) if within is None else set(within)
    found: set[frozenset[int]] = set()
    _branch(graph, frozenset([start]), max_size, allowed, found, set())
    return found


def minimal_sets(sets: Iterable[frozenset[int]]) -> list[frozenset[int]]:
    ordered = sorted(set(sets), key=lambda s: (len(s), sorted(s)))
    keep: list[frozenset[int]] = []
    for s in ordered:
        if not any(k < s for k in keep):
            keep.append(s)
    return keep


def _search(graph, max_size, allowed) -> set[frozenset[int]]:
    found: set[frozenset[int]] = set()
    seen: set[frozenset[int]] = set()
    for v in sorted(allowed):
        if graph.var_degree(v) == 0:
            continue
        # sets rooted at v never need members below v: those are found from their own minimum
        _branch(graph, frozenset([v]), max_size, {u for u in allowed if u >= v}, found, seen)
    return found


def _branch(graph, partial, max_size, allowed, found, seen) -> None:
    if partial in seen:
        return
    seen.add(partial)
    mult = check_multiplicity(graph, partial)
    single = [c for c, k in mult.items() if k == 1]
    if not single:
        if mult:
            found.add(partial)
        return
    if len(partial) >= max_size:
        return
    # branch on the deficient check with the fewest options
    best = None
    for c in single:
        opts = [int(u) for u in graph.chk_nbrs(c) if u in allowed and u not in partial]
        if best is None or len(opts) < len(best):
            best = opts
            if not opts:
                return
    for u in best:
        _branch(graph, partial | {u}, max_size, allowed, found, seen)
