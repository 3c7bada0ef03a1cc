"""Tanner graph data model, degree distributions and PEG tree expansion."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels


class GraphError(ValueError):
    """Raised for invalid graph operations (bad index, parallel edge, ...)."""


class TannerGraph:
    """Bipartite graph of ``n_var`` variable nodes and ``n_chk`` check nodes.

    Adjacency is kept on both sides in insertion order; equality ignores
    that order. Storage is a pair of
    padded integer arrays so the compiled kernels can read it without copies;
    ``var_adj``/``chk_adj`` give list views.
    """

    def __init__(self, n_var: int, n_chk: int, edges: Iterable[tuple[int, int]] = ()):
        if n_var < 0 or n_chk < 0:
            raise GraphError("node counts must be non-negative")
        self.n_var = int(n_var)
        self.n_chk = int(n_chk)
        self._vn = np.full((self.n_var, 4), -1, dtype=np.int32)
        self._vd = np.zeros(self.n_var, dtype=np.int32)
        self._cn = np.full((self.n_chk, 8), -1, dtype=np.int32)
        self._cd = np.zeros(self.n_chk, dtype=np.int32)
        self._n_edges = 0
        for v, c in edges:
            self.add_edge(v, c)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_matrix(cls, h) -> "TannerGraph":
        h = np.asarray(h)
        m, n = h.shape
        g = cls(n, m)
        for c in range(m):
            for v in np.flatnonzero(h[c]):
                g.add_edge(int(v), c)
        return g

    def copy(self) -> "TannerGraph":
        g = TannerGraph.__new__(TannerGraph)
        g.n_var, g.n_chk = self.n_var, self.n_chk
        g._vn, g._vd = self._vn.copy(), self._vd.copy()
        g._cn, g._cd = self._cn.copy(), self._cd.copy()
        g._n_edges = self._n_edges
        return g

    def _check_nodes(self, v: int, c: int) -> None:
        if not (0 <= v < self.n_var):
            raise GraphError(f"variable index {v} out of range [0, {self.n_var})")
        if not (0 <= c < self.n_chk):
            raise GraphError(f"check index {c} out of range [0, {self.n_chk})")

    def has_edge(self, v: int, c: int) -> bool:
        d = self._vd[v]
        return bool(np.any(self._vn[v, :d] == c))

    def add_edge(self, v: int, c: int) -> None:
        v, c = int(v), int(c)
        self._check_nodes(v, c)
        if self.has_edge(v, c):
            raise GraphError(f"parallel edge ({v}, {c})")
        dv, dc = self._vd[v], self._cd[c]
        if dv == self._vn.shape[1]:
            self._vn = _widen(self._vn)
        if dc == self._cn.shape[1]:
            self._cn = _widen(self._cn)
        self._vn[v, dv] = c
        self._cn[c, dc] = v
        self._vd[v] += 1
        self._cd[c] += 1
        self._n_edges += 1

    def remove_edge(self, v: int, c: int) -> None:
        v, c = int(v), int(c)
        self._check_nodes(v, c)
        if not self.has_edge(v, c):
            raise GraphError(f"no edge ({v}, {c})")
        _drop(self._vn, self._vd, v, c)
        _drop(self._cn, self._cd, c, v)
        self._n_edges -= 1

    # -- views ---------------------------------------------------------------

    @property
    def n_edges(self) -> int:
        return self._n_edges

    @property
    def var_adj(self) -> list[list[int]]:
        return [row[:d] for row, d in zip(self._vn.tolist(), self._vd.tolist())]

    @property
    def chk_adj(self) -> list[list[int]]:
        return [row[:d] for row, d in zip(self._cn.tolist(), self._cd.tolist())]

    def var_nbrs(self, v: int) -> np.ndarray:
        return self._vn[v, : self._vd[v]]

    def chk_nbrs(self, c: int) -> np.ndarray:
        return self._cn[c, : self._cd[c]]

    @property
    def var_degrees(self) -> np.ndarray:
        return self._vd.copy()

    @property
    def chk_degrees(self) -> np.ndarray:
        return self._cd.copy()

    def var_degree(self, v: int) -> int:
        return int(self._vd[v])

    def chk_degree(self, c: int) -> int:
        return int(self._cd[c])

    def edges(self) -> list[tuple[int, int]]:
        """Edges in variable-major insertion order."""
        return [(v, c) for v, row in enumerate(self.var_adj) for c in row]

    def to_matrix(self) -> np.ndarray:
        h = np.zeros((self.n_chk, self.n_var), dtype=np.uint8)
        for v, c in self.edges():
            h[c, v] = 1
        return h

    @property
    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Padded adjacency arrays ``(vn, vd, cn, cd)`` for the kernels."""
        return self._vn, self._vd, self._cn, self._cd

    def subgraph(self, variables: Sequence[int]) -> "TannerGraph":
        """Graph induced by ``variables`` (renumbered in the given order), all checks kept."""
        g = TannerGraph(len(variables), self.n_chk)
        for i, v in enumerate(variables):
            for c in self.var_nbrs(v):
                g.add_edge(i, int(c))
        return g

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TannerGraph):
            return NotImplemented
        return (
            self.n_var == other.n_var
            and self.n_chk == other.n_chk
            and [sorted(r) for r in self.var_adj] == [sorted(r) for r in other.var_adj]
        )

    def __repr__(self) -> str:
        return f"TannerGraph(n_var={self.n_var}, n_chk={self.n_chk}, n_edges={self.n_edges})"


def _widen(a: np.ndarray) -> np.ndarray:
    out = np.full((a.shape[0], 2 * a.shape[1]), -1, dtype=a.dtype)
    out[:, : a.shape[1]] = a
    return out


def _drop(nbrs: np.ndarray, deg: np.ndarray, row: int, value: int) -> None:
    d = deg[row]
    k = int(np.flatnonzero(nbrs[row, :d] == value)[0])
    nbrs[row, k : d - 1] = nbrs[row, k + 1 : d]
    nbrs[row, d - 1] = -1
    deg[row] -= 1


# -- degree distributions ------------------------------------------------------


@dataclass(frozen=True)
class DegreeDistribution:
    """Edge-perspective variable degree distribution.

    ``lambda_coeffs[d]`` is the fraction of edges attached to degree-``d``
    variable nodes. ``rho_form`` optionally records the concentrated check
    form ``(a, b)`` of ``a x^b + (1-a) x^(b-1)``; construction never imposes
    it directly, the min-weight stage produces it.
    """

    lambda_coeffs: dict[int, float]
    rho_form: tuple[float, int] | None = None

    def __post_init__(self):
        if not self.lambda_coeffs:
            raise ValueError("empty degree distribution")
        if any(d < 1 for d in self.lambda_coeffs):
            raise ValueError("degrees must be >= 1")
        if any(x < 0 for x in self.lambda_coeffs.values()):
            raise ValueError("coefficients must be non-negative")
        if abs(sum(self.lambda_coeffs.values()) - 1.0) > 1e-9:
            raise ValueError(f"coefficients sum to {sum(self.lambda_coeffs.values())!r}, not 1")

    @classmethod
    def parse(cls, text: str) -> "DegreeDistribution":
        """Parse ``"2:0.30013,3:0.28395,8:0.41592"``; coefficients are renormalised."""
        pairs = {}
        for item in text.replace(" ", "").split(","):
            if item:
                d, x = item.split(":")
                pairs[int(d)] = float(x)
        total = sum(pairs.values())
        return cls({d: x / total for d, x in sorted(pairs.items())})

    def node_fractions(self) -> dict[int, float]:
        """Node-perspective fractions: ``(lambda_d / d) / sum_k (lambda_k / k)``."""
        w = {d: x / d for d, x in self.lambda_coeffs.items()}
        s = sum(w.values())
        return {d: w[d] / s for d in sorted(w)}

    def restricted(self, min_degree: int) -> "DegreeDistribution":
        """Drop degrees below ``min_degree`` and renormalise."""
        kept = {d: x for d, x in self.lambda_coeffs.items() if d >= min_degree}
        s = sum(kept.values())
        if s <= 0:
            raise ValueError(f"no edge mass at degree >= {min_degree}")
        return DegreeDistribution({d: x / s for d, x in kept.items()}, self.rho_form)

    def node_counts(self, n_units: int, max_degree2: int | None = None) -> dict[int, int]:
        """Integer node counts summing to ``n_units``.

        The degree-2 count is rounded first and capped at ``max_degree2``; the
        remaining units go to the other degrees by largest remainder, ties to
        the higher degree.
        """
        frac = self.node_fractions()
        counts = {d: 0 for d in frac}
        rest = dict(frac)
        left = n_units
        if 2 in frac:
            n2 = int(round(frac[2] * n_units))
            if max_degree2 is not None:
                n2 = min(n2, max_degree2)
            if len(frac) == 1:
                if n2 != n_units:
                    raise ValueError("degree-2 cap leaves nodes without a degree")
            counts[2] = n2
            left -= n2
            del rest[2]
        if rest:
            s = sum(rest.values())
            ideal = {d: x / s * left for d, x in rest.items()}
            for d in ideal:
                counts[d] = int(np.floor(ideal[d]))
            short = left - sum(counts[d] for d in ideal)
            order = sorted(ideal, key=lambda d: (-(ideal[d] - np.floor(ideal[d])), -d))
            for d in order[:short]:
                counts[d] += 1
        return {d: n for d, n in counts.items() if n}

    def degree_sequence(self, n_var: int, max_degree2: int | None = None) -> list[int]:
        """Non-decreasing per-node degree list of length ``n_var``."""
        seq: list[int] = []
        for d, n in sorted(self.node_counts(n_var, max_degree2).items()):
            seq.extend([d] * n)
        return seq


#: Density-evolution optimised maximum-degree-8 ensemble used throughout.
LAMBDA_DE8 = DegreeDistribution({2: 0.30013, 3: 0.28395, 8: 0.41592})


def check_rho_form(graph: TannerGraph) -> tuple[float, int]:
    """Fit ``(a, b)`` of ``a x^b + (1-a) x^(b-1)`` to the realised check degrees.

    Requires check degrees to span at most two adjacent values.
    """
    deg = graph.chk_degrees
    deg = deg[deg > 0]
    hi, lo = int(deg.max()), int(deg.min())
    if hi - lo > 1:
        raise ValueError(f"check degrees {lo}..{hi} are not concentrated")
    # edge-perspective: exponent b = degree - 1
    edges_hi = float(deg[deg == hi].sum())
    return edges_hi / float(deg.sum()), hi - 1


# -- tree expansion -------------------------------------------------------------


@dataclass
class TreeExpansion:
    """Breadth-first expansion from a root variable node.

    ``var_levels[a]`` holds the variables first reached at level ``a``
    (``var_levels[0] == {root}``); ``chk_levels[l]`` the checks first reached at
    level ``l`` (``chk_levels[0]`` are the root's neighbours). ``termination``
    is ``"complete"`` (all checks covered), ``"saturated"`` (expansion stopped
    adding checks) or ``"max_depth"``.
    """

    root: int
    var_levels: list[set[int]]
    chk_levels: list[set[int]]
    covered_chk: set[int]
    uncovered_chk: set[int]
    termination: str
    chk_depth: np.ndarray = field(repr=False)
    var_depth: np.ndarray = field(repr=False)

    @property
    def levels(self) -> list[set[int]]:
        """Variable and check levels interleaved: V0, C0, V1, C1, ..."""
        out: list[set[int]] = []
        for a in range(max(len(self.var_levels), len(self.chk_levels))):
            if a < len(self.var_levels):
                out.append(self.var_levels[a])
            if a < len(self.chk_levels):
                out.append(self.chk_levels[a])
        return out

    @property
    def depth(self) -> int:
        """Index of the deepest non-empty check level (-1 for an isolated root)."""
        return len(self.chk_levels) - 1


def tree_expand(
    graph: TannerGraph,
    root: int,
    excluded_edge: tuple[int, int] | None = None,
    max_depth: int | None = None,
) -> TreeExpansion:
    if not (0 <= root < graph.n_var):
        raise GraphError(f"root {root} out of range")
    skip_v, skip_c = excluded_edge if excluded_edge is not None else (-1, -1)
    # one extra check level is explored to tell a depth cut from saturation
    max_dist = -1 if max_depth is None else 2 * max_depth + 3
    vdist, cdist = kernels.bfs(*graph.arrays, root, False, skip_v, skip_c, max_dist)
    # variable at edge distance 2a -> level a; check at 2l+1 -> level l
    var_depth = np.where(vdist >= 0, vdist // 2, -1)
    chk_depth = np.where(cdist >= 0, (cdist - 1) // 2, -1)
    cut = False
    if max_depth is not None:
        cut = bool(np.any(chk_depth > max_depth))
        chk_depth[chk_depth > max_depth] = -1
        var_depth[var_depth > max_depth] = -1
    n_levels = int(chk_depth.max()) + 1 if graph.n_chk else 0
    chk_levels = [set(np.flatnonzero(chk_depth == l).tolist()) for l in range(n_levels)]
    n_vlevels = int(var_depth.max()) + 1
    var_levels = [set(np.flatnonzero(var_depth == a).tolist()) for a in range(n_vlevels)]
    covered = set(np.flatnonzero(chk_depth >= 0).tolist())
    uncovered = set(range(graph.n_chk)) - covered
    if not uncovered:
        termination = "complete"
    elif cut:
        termination = "max_depth"
    else:
        termination = "saturated"
    return TreeExpansion(root, var_levels, chk_levels, covered, uncovered, termination, chk_depth, var_depth)

