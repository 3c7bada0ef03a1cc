"""Progressive edge growth with pluggable candidate-pruning stages.

Each edge placement prunes the set of all check nodes down to one survivor
by running the stages of a :class:`MetricPipeline` in order. The named
pipelines are

* ``peg``            distance, weight
* ``min-paths``      distance, weight, fewest shortest paths
* ``ipeg-ace``       distance, weight, largest minimum path ACE
* ``ace-emd``        distance, weight, path ACE, exact EMD of the union of all paths
* ``multipath-emd``  distance, weight, fewest shortest paths, largest mean path EMD

each followed by a seeded uniform tie-break.
"""

from __future__ import annotations

import csv
import io
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .graph import DegreeDistribution, TannerGraph
from .stopping import set_emd

DEFAULT_PATH_CAP = 10**6
#: paths with this many non-root variables (cycles of length >= 10) count as long
LONG_PATH_HOPS = 4


class ConstructionError(RuntimeError):
    pass


class PathLimitError(ConstructionError):
    pass


class Stage(str, Enum):
    MAX_DISTANCE = "max_distance"
    MIN_WEIGHT = "min_weight"
    MIN_PATH_COUNT = "min_path_count"
    MAX_MEAN_PATH_EMD = "max_mean_path_emd"
    MAX_PATH_ACE = "max_path_ace"
    MAX_EXACT_SET_EMD = "max_exact_set_emd"
    RANDOM_TIE_BREAK = "random_tie_break"


_HEAD = (Stage.MAX_DISTANCE, Stage.MIN_WEIGHT)
PIPELINES: dict[str, tuple[Stage, ...]] = {
    "peg": _HEAD + (Stage.RANDOM_TIE_BREAK,),
    "min-paths": _HEAD + (Stage.MIN_PATH_COUNT, Stage.RANDOM_TIE_BREAK),
    "ipeg-ace": _HEAD + (Stage.MAX_PATH_ACE, Stage.RANDOM_TIE_BREAK),
    "ace-emd": _HEAD + (Stage.MAX_PATH_ACE, Stage.MAX_EXACT_SET_EMD, Stage.RANDOM_TIE_BREAK),
    "multipath-emd": _HEAD + (Stage.MIN_PATH_COUNT, Stage.MAX_MEAN_PATH_EMD, Stage.RANDOM_TIE_BREAK),
}


@dataclass(frozen=True)
class MetricPipeline:
    stages: tuple[Stage, ...]
    rng_seed: int = 0
    name: str = "custom"

    def __post_init__(self):
        stages = tuple(Stage(s) for s in self.stages)
        object.__setattr__(self, "stages", stages)
        if not stages or stages[0] is not Stage.MAX_DISTANCE:
            raise ValueError("pipeline must start with max_distance")
        if stages[-1] is not Stage.RANDOM_TIE_BREAK:
            raise ValueError("pipeline must end with random_tie_break")
        if len(set(stages)) != len(stages):
            raise ValueError("repeated stage in pipeline")

    @classmethod
    def named(cls, name: str, seed: int = 0) -> "MetricPipeline":
        try:
            return cls(PIPELINES[name], seed, name)
        except KeyError:
            raise ValueError(f"unknown pipeline {name!r}; choose from {sorted(PIPELINES)}") from None

    def with_seed(self, seed: int) -> "MetricPipeline":
        return MetricPipeline(self.stages, seed, self.name)


@dataclass(frozen=True)
class PathSet:
    """One shortest root-to-candidate path.

    ``nodes`` are its variables (root first) and ``checks[a]`` the check
    joining ``nodes[a]`` and ``nodes[a + 1]``. Two paths through the same
    variables but different checks are distinct (they close distinct cycles).
    """

    nodes: tuple[int, ...]
    candidate: int
    checks: tuple[int, ...] = ()

    @property
    def hops(self) -> int:
        return len(self.nodes) - 1

    def walk(self) -> tuple[tuple[str, int], ...]:
        """Alternating node sequence from the root to the candidate."""
        out = [("v", self.nodes[0])]
        for c, v in zip(self.checks, self.nodes[1:]):
            out += [("c", c), ("v", v)]
        out.append(("c", self.candidate))
        return tuple(out)


@dataclass(frozen=True)
class PathMetrics:
    path_count: int
    path_emds: tuple[int, ...]

    @property
    def mean_emd(self) -> Fraction:
        return Fraction(sum(self.path_emds), self.path_count)


@dataclass
class CandidateSets:
    set_a: list[int]
    set_b: list[int] = field(default_factory=list)
    set_c: list[int] = field(default_factory=list)
    saturated: bool = False
    level: int | None = None
    survivors: list[int] = field(default_factory=list)
    chosen: int | None = None
    path_counts: dict[int, int] = field(default_factory=dict)


@dataclass
class ComplexityAudit:
    total_paths_evaluated: int = 0
    long_paths_evaluated: int = 0

    def record(self, paths: Sequence[PathSet]) -> None:
        self.total_paths_evaluated += len(paths)
        self.long_paths_evaluated += sum(1 for p in paths if p.hops >= LONG_PATH_HOPS)

    def to_csv(self, block_length: int) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["block_length", "total_paths", "long_paths"])
        w.writerow([block_length, self.total_paths_evaluated, self.long_paths_evaluated])
        return buf.getvalue()


@contextmanager
def tentative(graph: TannerGraph, edges: Iterable[tuple[int, int]]):
    """Temporarily add ``edges`` to ``graph``."""
    added = []
    try:
        for v, c in edges:
            graph.add_edge(v, c)
            added.append((v, c))
        yield graph
    finally:
        for v, c in reversed(added):
            graph.remove_edge(v, c)


# -- stages ----------------------------------------------------------------------


def _check_levels(graph: TannerGraph, root: int) -> np.ndarray:
    _, cdist = kernels.bfs(*graph.arrays, root, False, -1, -1, -1)
    return np.where(cdist >= 0, (cdist - 1) // 2, -1)


def _eligible(graph: TannerGraph, root: int, allowed: np.ndarray | None) -> np.ndarray:
    mask = np.ones(graph.n_chk, dtype=bool) if allowed is None else np.asarray(allowed, dtype=bool).copy()
    mask[graph.var_nbrs(root)] = False
    return mask


def stage_max_distance(graph: TannerGraph, root: int, allowed: np.ndarray | None = None) -> CandidateSets:
    """Checks at maximum distance from ``root``.

    Unreached eligible checks win outright (no cycle is created, ``saturated``);
    otherwise the eligible checks at the deepest level ``l`` are returned and
    a placement creates cycles of length ``2l + 2``.
    """
    eligible = _eligible(graph, root, allowed)
    if not eligible.any():
        raise ConstructionError(f"no eligible check for variable {root}")
    lvl = _check_levels(graph, root)
    far = eligible & (lvl < 0)
    if far.any():
        return CandidateSets(set_a=np.flatnonzero(far).tolist(), saturated=True)
    top = int(lvl[eligible].max())
    return CandidateSets(set_a=np.flatnonzero(eligible & (lvl == top)).tolist(), level=top)


def stage_min_weight(candidates: Iterable[int], graph: TannerGraph) -> list[int]:
    cands = sorted(candidates)
    deg = graph.chk_degrees[cands]
    return [c for c, d in zip(cands, deg.tolist()) if d == deg.min()]


def enumerate_paths(
    graph: TannerGraph,
    root: int,
    candidate: int,
    depth: int | None = None,
    cap: int = DEFAULT_PATH_CAP,
) -> list[PathSet]:
    """All distinct shortest paths from ``root`` to ``candidate``.

    A variable lies on a shortest path iff it sits at level ``a`` of the
    downward tree from ``root`` and level ``L - a`` of the upward tree from
    ``candidate``. Paths are grown level by level, joining consecutive
    variables through each check they share.
    """
    down_v, down_c = kernels.bfs(*graph.arrays, root, False, -1, -1, -1)
    d = int(down_c[candidate])
    if d < 0:
        raise ConstructionError(f"check {candidate} unreachable from variable {root}")
    L = (d - 1) // 2
    if depth is not None and depth != L:
        raise ConstructionError(f"check {candidate} is at depth {L}, not {depth}")
    up_v, _ = kernels.bfs(*graph.arrays, candidate, True, -1, -1, -1)
    levels = _path_levels(down_v, up_v, L)
    nbrs = {u: set(graph.var_nbrs(u).tolist()) for lvl in levels for u in lvl}
    paths: list[tuple[tuple[int, ...], tuple[int, ...]]] = [((root,), ())]
    for a in range(1, L + 1):
        nxt = []
        for p, cs in paths:
            here = nbrs[p[-1]]
            for y in levels[a]:
                for c in sorted(here & nbrs[y]):
                    nxt.append((p + (y,), cs + (c,)))
        if len(nxt) > cap:
            raise PathLimitError(
                f"more than {cap} paths from v{root} to c{candidate} at level {a} of {L}"
            )
        paths = nxt
    return [PathSet(p, candidate, cs) for p, cs in paths]


def _path_levels(down_v: np.ndarray, up_v: np.ndarray, L: int) -> list[list[int]]:
    # D_a: downward level a and upward level L - a (upward level m <=> distance 2m + 1)
    return [np.flatnonzero((down_v == 2 * a) & (up_v == 2 * (L - a) + 1)).tolist() for a in range(L + 1)]


def stage_min_path_count(set_b: Iterable[int], path_counts: dict[int, int]) -> list[int]:
    cands = sorted(set_b)
    best = min(path_counts[c] for c in cands)
    return [c for c in cands if path_counts[c] == best]


def path_emd(graph: TannerGraph, pathset: PathSet) -> int:
    """EMD of the path's variable set."""
    return set_emd(graph, pathset.nodes)


def path_metrics(graph: TannerGraph, paths: Sequence[PathSet]) -> PathMetrics:
    """Path count and per-path EMDs, measured with the candidate edge in place."""
    if not paths:
        raise ValueError("no paths")
    root, cand = paths[0].nodes[0], paths[0].candidate
    with tentative(graph, [(root, cand)]):
        emds = tuple(path_emd(graph, p) for p in paths)
    return PathMetrics(len(paths), emds)


def stage_max_mean_emd(set_c: Iterable[int], metrics: dict[int, PathMetrics]) -> list[int]:
    cands = sorted(set_c)
    if len(cands) == 1:
        return cands
    means = {c: metrics[c].mean_emd for c in cands}
    best = max(means.values())
    return [c for c in cands if means[c] == best]


def min_path_ace(graph: TannerGraph, root: int, candidate: int) -> int:
    """Smallest sum of (degree - 2) over the non-root variables of any shortest path."""
    down_v, down_c = kernels.bfs(*graph.arrays, root, False, -1, -1, -1)
    d = int(down_c[candidate])
    if d < 0:
        raise ConstructionError(f"check {candidate} unreachable from variable {root}")
    L = (d - 1) // 2
    up_v, _ = kernels.bfs(*graph.arrays, candidate, True, -1, -1, -1)
    levels = _path_levels(down_v, up_v, L)
    deg = graph.var_degrees
    nbrs = {u: set(graph.var_nbrs(u).tolist()) for lvl in levels for u in lvl}
    best = {root: 0}
    for a in range(1, L + 1):
        nxt = {}
        for y in levels[a]:
            prev = [best[x] for x in best if nbrs[x] & nbrs[y]]
            nxt[y] = min(prev) + int(deg[y]) - 2
        best = nxt
    return min(best.values())


def stage_max_path_ace(set_b: Iterable[int], graph: TannerGraph, root: int) -> list[int]:
    cands = sorted(set_b)
    if len(cands) == 1:
        return cands
    ace = {c: min_path_ace(graph, root, c) for c in cands}
    best = max(ace.values())
    return [c for c in cands if ace[c] == best]


def exact_set_emd(graph: TannerGraph, paths: Sequence[PathSet]) -> int:
    """EMD of the union of all path variables, with the candidate edge in place."""
    root, cand = paths[0].nodes[0], paths[0].candidate
    union = set().union(*(p.nodes for p in paths))
    with tentative(graph, [(root, cand)]):
        return set_emd(graph, union)


def stage_max_exact_set_emd(set_b: Iterable[int], graph: TannerGraph, root: int,
                            paths: dict[int, list[PathSet]] | None = None) -> list[int]:
    cands = sorted(set_b)
    if len(cands) == 1:
        return cands
    paths = paths if paths is not None else {c: enumerate_paths(graph, root, c) for c in cands}
    emd = {c: exact_set_emd(graph, paths[c]) for c in cands}
    best = max(emd.values())
    return [c for c in cands if emd[c] == best]


# -- placement engine ---------------------------------------------------------------


class PlacementConstraints:
    """Structural hooks for the engine; the base class imposes nothing.

    ``allowed`` restricts the checks an edge may join. ``companions`` lists
    edges committed together with ``(v, c)`` (circulant orbits); candidate
    metrics are then measured with the companions already present.
    """

    def allowed(self, graph: TannerGraph, v: int) -> np.ndarray | None:
        return None

    def companions(self, graph: TannerGraph, v: int, c: int) -> list[tuple[int, int]]:
        return []

    @property
    def has_companions(self) -> bool:
        return False


class _Placer:
    def __init__(self, pipeline: MetricPipeline, constraints: PlacementConstraints,
                 audit: ComplexityAudit, path_cap: int):
        self.pipeline = pipeline
        self.constraints = constraints
        self.audit = audit
        self.path_cap = path_cap
        self.rng = np.random.default_rng(pipeline.rng_seed)

    def _pick(self, cands: Sequence[int]) -> int:
        cands = sorted(cands)
        if len(cands) == 1:
            return cands[0]
        return cands[int(self.rng.integers(len(cands)))]

    def _context(self, graph, v, c):
        if self.constraints.has_companions:
            return tentative(graph, self.constraints.companions(graph, v, c))
        return tentative(graph, [])

    def _distance_sets(self, graph: TannerGraph, v: int, allowed) -> CandidateSets:
        if not self.constraints.has_companions:
            return stage_max_distance(graph, v, allowed)
        # companions only add edges, so context levels never exceed plain levels
        eligible = _eligible(graph, v, allowed)
        if not eligible.any():
            raise ConstructionError(f"no eligible check for variable {v}")
        lvl = _check_levels(graph, v)
        key = np.where(lvl < 0, np.iinfo(np.int32).max, lvl)
        cands = np.flatnonzero(eligible)
        cands = cands[np.argsort(-key[cands], kind="stable")]
        best, best_set = None, []
        for c in cands.tolist():
            if best is not None and key[c] < best:
                break
            with self._context(graph, v, c):
                l2 = int(_check_levels(graph, v)[c])
            k2 = np.iinfo(np.int32).max if l2 < 0 else l2
            if best is None or k2 > best:
                best, best_set = k2, [c]
            elif k2 == best:
                best_set.append(c)
        sat = best == np.iinfo(np.int32).max
        return CandidateSets(set_a=sorted(best_set), saturated=sat, level=None if sat else best)

    def choose(self, graph: TannerGraph, v: int) -> CandidateSets:
        allowed = self.constraints.allowed(graph, v)
        if graph.var_degree(v) == 0:
            eligible = _eligible(graph, v, allowed)
            if not eligible.any():
                raise ConstructionError(f"no eligible check for variable {v}")
            sets = CandidateSets(set_a=np.flatnonzero(eligible).tolist(), saturated=True)
        else:
            sets = self._distance_sets(graph, v, allowed)
        sets.set_b = stage_min_weight(sets.set_a, graph)
        current = sets.set_b
        paths: dict[int, list[PathSet]] = {}

        def paths_of(c):
            if c not in paths:
                with self._context(graph, v, c):
                    paths[c] = enumerate_paths(graph, v, c, cap=self.path_cap)
                self.audit.record(paths[c])
            return paths[c]

        if not sets.saturated:
            for stage in self.pipeline.stages[1:-1]:
                if len(current) == 1:
                    break
                if stage is Stage.MIN_WEIGHT:
                    continue
                if stage is Stage.MIN_PATH_COUNT:
                    sets.path_counts = {c: len(paths_of(c)) for c in current}
                    current = stage_min_path_count(current, sets.path_counts)
                    sets.set_c = current
                elif stage is Stage.MAX_MEAN_PATH_EMD:
                    metrics = {}
                    for c in current:
                        with self._context(graph, v, c):
                            metrics[c] = path_metrics(graph, paths_of(c))
                    current = stage_max_mean_emd(current, metrics)
                elif stage is Stage.MAX_PATH_ACE:
                    ace = {}
                    for c in current:
                        with self._context(graph, v, c):
                            ace[c] = min_path_ace(graph, v, c)
                    top = max(ace.values())
                    current = [c for c in current if ace[c] == top]
                elif stage is Stage.MAX_EXACT_SET_EMD:
                    emd = {}
                    for c in current:
                        pc = paths_of(c)
                        with self._context(graph, v, c):
                            emd[c] = exact_set_emd(graph, pc)
                    top = max(emd.values())
                    current = [c for c in current if emd[c] == top]
                else:
                    raise ValueError(f"stage {stage} out of place")
        if not sets.set_c:
            sets.set_c = list(current) if Stage.MIN_PATH_COUNT in self.pipeline.stages else []
        sets.survivors = list(current)
        sets.chosen = self._pick(current)
        return sets


def resolve_degrees(n_var: int, n_chk: int, degrees) -> list[int]:
    """Per-node target degrees from a distribution (degree-2 count capped at M-1) or a sequence."""
    if isinstance(degrees, DegreeDistribution):
        seq = degrees.degree_sequence(n_var, max_degree2=max(n_chk - 1, 0))
    else:
        seq = [int(d) for d in degrees]
    if len(seq) != n_var:
        raise ValueError(f"degree sequence has {len(seq)} entries for {n_var} variables")
    if any(d < 0 or d > n_chk for d in seq):
        raise ValueError(f"degree sequence not realisable with {n_chk} checks")
    return seq


def peg_construct(
    n_var: int,
    n_chk: int,
    degrees: DegreeDistribution | Sequence[int],
    pipeline: MetricPipeline,
    constraints: PlacementConstraints | None = None,
    initial: TannerGraph | None = None,
    order: Sequence[int] | None = None,
    path_cap: int = DEFAULT_PATH_CAP,
    trace: Callable[[TannerGraph, int, CandidateSets], None] | None = None,
) -> tuple[TannerGraph, ComplexityAudit]:
    """Grow a Tanner graph edge by edge.

    Variables are visited in ``order`` (default: non-decreasing target degree,
    stable) and each receives edges until it reaches its target degree.
    ``initial`` supplies pre-placed edges. ``trace`` sees the graph just before
    each placement together with the candidate sets that produced it.
    """
    if not isinstance(pipeline, MetricPipeline):
        raise TypeError("pipeline must be a MetricPipeline")
    target = resolve_degrees(n_var, n_chk, degrees)
    graph = initial.copy() if initial is not None else TannerGraph(n_var, n_chk)
    if (graph.n_var, graph.n_chk) != (n_var, n_chk):
        raise ValueError("initial graph has the wrong dimensions")
    constraints = constraints or PlacementConstraints()
    audit = ComplexityAudit()
    placer = _Placer(pipeline, constraints, audit, path_cap)
    if order is None:
        order = sorted(range(n_var), key=lambda v: target[v])
    for v in order:
        while graph.var_degree(v) < target[v]:
            sets = placer.choose(graph, v)
            if trace is not None:
                trace(graph, v, sets)
            c = sets.chosen
            graph.add_edge(v, c)
            for v2, c2 in constraints.companions(graph, v, c) if constraints.has_companions else ():
                graph.add_edge(v2, c2)
    return graph, audit


def pipeline_choice_counts(sets: CandidateSets) -> dict[int, int]:
    """Path counts recorded for a placement (empty when the stage did not run)."""
    return dict(sets.path_counts)
