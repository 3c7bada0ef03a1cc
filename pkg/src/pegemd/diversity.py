"""Reduced-structure full-diversity codes for the block-fading channel.

Variables split into F equal contiguous blocks V_1..V_F, block j seeing
fade j. Checks split into row groups R_2..R_F. Row group R_k touches only
V_1 and V_k:

* V_1 has degree 2 inside every group and forms a forest there, so once
  V_k is known the V_1 part peels completely;
* V_k hangs off R_k alone, with the degree >= 3 part of the distribution.

Every other (group, block) region is null. The message sits on V_syst,
inside V_1. If any single block V_k (k >= 2) is received, V_1 is recovered
from R_k, which is the full-diversity condition on the block erasure channel.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import kernels
from .graph import DegreeDistribution, TannerGraph
from .gf2 import SystematicEncoder
from .peg import ComplexityAudit, ConstructionError, MetricPipeline, peg_construct


class DiversityError(ConstructionError):
    def __init__(self, message: str, report: "DiversityReport | None" = None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class BlockLayout:
    fade_count: int
    n_var: int
    systematic: tuple[int, ...]
    punctured: tuple[int, ...] = ()

    def __post_init__(self):
        if self.fade_count < 1 or self.n_var % self.fade_count:
            raise ValueError(f"{self.fade_count} blocks do not divide N={self.n_var}")
        if any(not (0 <= v < self.block_size) for v in self.systematic):
            raise ValueError("systematic nodes must lie in the first block")
        if any(not (2 <= j <= self.fade_count) for j in self.punctured):
            raise ValueError("only blocks 2..F can be punctured")

    @property
    def block_size(self) -> int:
        return self.n_var // self.fade_count

    @property
    def blocks(self) -> list[range]:
        b = self.block_size
        return [range(j * b, (j + 1) * b) for j in range(self.fade_count)]

    def block(self, j: int) -> range:
        """Block ``j`` (1-based)."""
        return self.blocks[j - 1]

    def block_of(self, v: int) -> int:
        return v // self.block_size + 1

    @property
    def k(self) -> int:
        return len(self.systematic)

    @property
    def transmitted(self) -> np.ndarray:
        mask = np.ones(self.n_var, dtype=bool)
        for j in self.punctured:
            mask[list(self.block(j))] = False
        return mask

    @property
    def puncture_mask(self) -> np.ndarray:
        return ~self.transmitted

    @property
    def active_blocks(self) -> list[int]:
        return [j for j in range(1, self.fade_count + 1) if j not in self.punctured]

    @property
    def code_rate(self) -> float:
        return self.k / int(self.transmitted.sum())

    def fade_index(self) -> np.ndarray:
        """Per-variable index of the fade it sees; punctured positions get -1."""
        idx = np.repeat(np.arange(self.fade_count), self.block_size)
        active = {j: i for i, j in enumerate(self.active_blocks)}
        out = np.array([active.get(j + 1, -1) for j in idx], dtype=np.int64)
        return out


@dataclass
class DiversityGraph:
    graph: TannerGraph
    layout: BlockLayout
    row_groups: dict[int, range]
    submatrix_map: dict[tuple[int, int], str]
    audit: ComplexityAudit = field(default_factory=ComplexityAudit)

    def encoder(self) -> SystematicEncoder:
        return SystematicEncoder.with_info(self.graph.to_matrix(), self.layout.systematic)


@dataclass(frozen=True)
class DiversityReport:
    passed: bool
    patterns_checked: int
    pattern: tuple[int, ...] | None = None
    witness: frozenset[int] | None = None

    def __bool__(self) -> bool:
        return self.passed


def max_info_length(fade_count: int, n_var: int) -> int:
    """Largest message length: each of the F-1 groups needs at least N/F + 1 checks."""
    return n_var // fade_count - (fade_count - 1)


def _group_sizes(n_chk: int, fade_count: int) -> list[int]:
    g = fade_count - 1
    base, extra = divmod(n_chk, g)
    return [base + (1 if i < extra else 0) for i in range(g)]


def _is_forest(edges_per_var: list[list[int]]) -> bool:
    parent: dict[int, int] = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for checks in edges_per_var:
        a, b = (find(c) for c in checks)
        if a == b:
            return False
        parent[a] = b
    return True


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def build_full_diversity(
    fade_count: int,
    n_var: int,
    target_lambda: DegreeDistribution,
    pipeline: MetricPipeline,
    n_info: int | None = None,
    max_attempts: int = 16,
) -> DiversityGraph:
    """Construct and verify a full-diversity code for ``fade_count`` fades.

    Each row group is grown by an independent PEG run over V_1 (degree 2,
    placed first) and V_k. Degrees above a group's check count are clipped.
    Attempts with derived seeds repeat until the message positions found by
    elimination all fall in V_1.
    """
    if fade_count < 2:
        raise ValueError("need at least two fades")
    if n_var % fade_count:
        raise ValueError(f"F={fade_count} does not divide N={n_var}")
    b = n_var // fade_count
    k_max = max_info_length(fade_count, n_var)
    if n_info is None:
        n_info = k_max
    if not 1 <= n_info <= k_max:
        raise ValueError(f"message length {n_info} infeasible; must be in 1..{k_max} for F={fade_count}, N={n_var}")
    n_chk = n_var - n_info
    sizes = _group_sizes(n_chk, fade_count)
    starts = np.concatenate([[0], np.cumsum(sizes)]).tolist()
    row_groups = {k: range(starts[k - 2], starts[k - 1]) for k in range(2, fade_count + 1)}
    submap = {
        (k, j): ("constructed" if j in (1, k) else "null")
        for k in range(2, fade_count + 1)
        for j in range(1, fade_count + 1)
    }
    high = target_lambda.restricted(3)
    for attempt in range(max_attempts):
        seed = pipeline.rng_seed if attempt == 0 else _derived_seed(pipeline.rng_seed, attempt)
        graph = TannerGraph(n_var, n_chk)
        audit = ComplexityAudit()
        for k, rows in row_groups.items():
            m = len(rows)
            degrees = [2] * b + [min(d, m) for d in high.degree_sequence(b)]
            local, a = peg_construct(2 * b, m, degrees, pipeline.with_seed(_derived_seed(seed, k)))
            audit.total_paths_evaluated += a.total_paths_evaluated
            audit.long_paths_evaluated += a.long_paths_evaluated
            if not _is_forest([local.var_nbrs(v).tolist() for v in range(b)]):
                raise DiversityError(f"first block is not a forest in row group {k}")
            for v, c in local.edges():
                gv = v if v < b else (k - 1) * b + (v - b)
                graph.add_edge(gv, rows.start + c)
        h = graph.to_matrix()
        # parity pivots from the later blocks first keeps the message inside V_1
        prefer = list(range(b, n_var)) + list(range(b - 1, -1, -1))
        enc = SystematicEncoder(h, prefer)
        if enc.k == n_info and enc.info.max() < b:
            layout = BlockLayout(fade_count, n_var, tuple(enc.info.tolist()))
            dg = DiversityGraph(graph, layout, row_groups, submap, audit)
            report = verify_diversity(dg)
            if not report:
                raise DiversityError(f"verification failed on pattern {report.pattern}", report)
            return dg
    raise DiversityError(f"no information set inside the first block after {max_attempts} attempts")


def erasure_patterns(layout: BlockLayout) -> list[tuple[int, ...]]:
    """Erased block sets to check: none, and V_1 with any proper sub-collection of the rest.

    Punctured blocks are added to every pattern and are not counted among
    the blocks that may be received.
    """
    others = [j for j in layout.active_blocks if j != 1]
    pats: list[tuple[int, ...]] = [()]
    for r in range(len(others)):
        for combo in itertools.combinations(others, r):
            pats.append((1,) + combo)
    extra = tuple(layout.punctured)
    return [tuple(sorted(p + extra)) if p else p for p in pats]


def verify_diversity(dg: DiversityGraph) -> DiversityReport:
    """Peel every required block-erasure pattern; fail with a witness stopping set."""
    layout = dg.layout
    syst = np.array(layout.systematic, dtype=np.int64)
    pats = erasure_patterns(layout)
    for pat in pats:
        erased = np.zeros(layout.n_var, dtype=np.uint8)
        for j in pat:
            erased[list(layout.block(j))] = 1
        left = kernels.peel(*dg.graph.arrays, erased)
        if left[syst].any():
            return DiversityReport(False, len(pats), pat, frozenset(np.flatnonzero(left).tolist()))
    return DiversityReport(True, len(pats))


def puncture(dg: DiversityGraph, target: int) -> tuple[DiversityGraph, np.ndarray]:
    """Use the F-code on F-1 fades by never transmitting V_F."""
    f = dg.layout.fade_count - len(dg.layout.punctured)
    if target != f - 1:
        raise ValueError(f"can only puncture from {f} to {f - 1} fades, not {target}")
    last = max(dg.layout.active_blocks)
    layout = replace(dg.layout, punctured=tuple(sorted(dg.layout.punctured + (last,))))
    out = replace(dg, layout=layout)
    return out, layout.puncture_mask


def nested(dg: DiversityGraph) -> DiversityGraph:
    """Delete V_F and R_F, leaving the code for F-1 fades."""
    f = dg.layout.fade_count
    if f < 3:
        raise ValueError("nothing nested below F=2")
    b = dg.layout.block_size
    rows = dg.row_groups[f]
    keep_chk = [c for c in range(dg.graph.n_chk) if c not in rows]
    remap = {c: i for i, c in enumerate(keep_chk)}
    g = TannerGraph((f - 1) * b, len(keep_chk))
    for v, c in dg.graph.edges():
        if v < (f - 1) * b and c in remap:
            g.add_edge(v, remap[c])
    groups = {k: range(remap[r.start], remap[r.start] + len(r)) for k, r in dg.row_groups.items() if k < f}
    submap = {key: val for key, val in dg.submatrix_map.items() if key[0] < f and key[1] < f}
    layout = BlockLayout(f - 1, (f - 1) * b, dg.layout.systematic)
    return DiversityGraph(g, layout, groups, submap)


def null_region_edges(dg: DiversityGraph) -> int:
    """Edges found in regions marked null (zero for a valid graph)."""
    n = 0
    for (k, j), kind in dg.submatrix_map.items():
        if kind != "null":
            continue
        rows = dg.row_groups[k]
        for v in dg.layout.block(j):
            n += sum(1 for c in dg.graph.var_nbrs(v).tolist() if c in rows)
    return n


# -- sidecar --------------------------------------------------------------------


def layout_text(dg: DiversityGraph) -> str:
    lay = dg.layout
    lines = [
        f"fade_count={lay.fade_count}",
        f"n_var={lay.n_var}",
        "blocks=" + ",".join(f"{r.start}-{r.stop}" for r in lay.blocks),
        "row_groups=" + ",".join(f"{k}:{r.start}-{r.stop}" for k, r in sorted(dg.row_groups.items())),
        "systematic=" + ",".join(map(str, lay.systematic)),
        "punctured=" + ",".join(map(str, lay.punctured)),
    ]
    return "\n".join(lines) + "\n"


def parse_layout(text: str) -> tuple[BlockLayout, dict[int, range]]:
    kv = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected key=value")
        key, val = line.split("=", 1)
        kv[key.strip()] = val.strip()
    try:
        f, n_var = int(kv["fade_count"]), int(kv["n_var"])
        syst = tuple(int(x) for x in kv["systematic"].split(",") if x)
        punct = tuple(int(x) for x in kv.get("punctured", "").split(",") if x)
        groups = {}
        for item in kv.get("row_groups", "").split(","):
            if item:
                k, span = item.split(":")
                lo, hi = span.split("-")
                groups[int(k)] = range(int(lo), int(hi))
    except KeyError as e:
        raise ValueError(f"missing field {e.args[0]}") from None
    layout = BlockLayout(f, n_var, syst, punct)
    if "blocks" in kv:
        want = ",".join(f"{r.start}-{r.stop}" for r in layout.blocks)
        if kv["blocks"] != want:
            raise ValueError("block boundaries disagree with fade_count and n_var")
    return layout, groups


def save_layout(dg: DiversityGraph, path: str | Path) -> None:
    Path(path).write_text(layout_text(dg))


def load_diversity(graph: TannerGraph, sidecar: str | Path) -> DiversityGraph:
    layout, groups = parse_layout(Path(sidecar).read_text())
    f = layout.fade_count
    submap = {(k, j): ("constructed" if j in (1, k) else "null") for k in groups for j in range(1, f + 1)}
    return DiversityGraph(graph, layout, groups, submap)
