"""Structured constructions on top of the PEG engine.

* quasi-cyclic codes: each placement commits a whole circulant orbit;
* IRA codes: the parity part is a fixed dual-diagonal accumulator;
* the weight-2 rule: at most M-1 degree-2 variables, scheduled first so
  they never close a cycle among themselves.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import DegreeDistribution, TannerGraph
from .peg import ComplexityAudit, MetricPipeline, PlacementConstraints, peg_construct


class Weight2Error(ValueError):
    def __init__(self, count: int, limit: int):
        self.count = count
        self.limit = limit
        self.excess = count - limit
        super().__init__(f"{count} degree-2 variables exceed the limit of {limit} by {self.excess}")


@dataclass(frozen=True)
class Weight2Schedule:
    degrees: tuple[int, ...]
    order: tuple[int, ...]
    n_degree2: int


def degree2_limit(n_chk: int) -> int:
    return max(n_chk - 1, 0)


def enforce_weight2_constraint(
    target_lambda: DegreeDistribution | list[int],
    n_chk: int,
    n_var: int | None = None,
    redistribute: bool = False,
) -> Weight2Schedule:
    """Validate the degree-2 budget and put degree-2 variables first.

    ``target_lambda`` is either a distribution (then ``n_var`` is required)
    or an explicit per-node degree list. With ``redistribute`` a distribution
    whose rounded degree-2 count exceeds M-1 is capped and the excess moved
    to the other degrees instead of being rejected.
    """
    limit = degree2_limit(n_chk)
    if isinstance(target_lambda, DegreeDistribution):
        if n_var is None:
            raise ValueError("n_var is required with a degree distribution")
        cap = limit if redistribute else None
        degrees = target_lambda.degree_sequence(n_var, max_degree2=cap)
    else:
        degrees = [int(d) for d in target_lambda]
    n2 = sum(1 for d in degrees if d == 2)
    if n2 > limit:
        raise Weight2Error(n2, limit)
    order = sorted(range(len(degrees)), key=lambda v: degrees[v])
    return Weight2Schedule(tuple(degrees), tuple(order), n2)


# -- quasi-cyclic ----------------------------------------------------------------


@dataclass
class QcConstraint(PlacementConstraints):
    """Circulant tiling with ``Q x Q`` tiles; ``shift_table[r, t] = -1`` marks an empty tile."""

    circulant_size: int
    base_rows: int
    base_cols: int
    shift_table: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.circulant_size < 1:
            raise ValueError("circulant size must be positive")
        if self.shift_table is None:
            self.shift_table = np.full((self.base_rows, self.base_cols), -1, dtype=np.int64)

    @classmethod
    def for_graph(cls, n_var: int, n_chk: int, q: int) -> "QcConstraint":
        if q < 1 or n_var % q or n_chk % q:
            raise ValueError(f"circulant size {q} must divide N={n_var} and M={n_chk}")
        return cls(q, n_chk // q, n_var // q)

    @property
    def has_companions(self) -> bool:
        return self.circulant_size > 1

    def allowed(self, graph: TannerGraph, v: int) -> np.ndarray:
        q = self.circulant_size
        used = self.shift_table[:, v // q] >= 0
        return np.repeat(~used, q)

    def orbit(self, v: int, c: int) -> list[tuple[int, int]]:
        q = self.circulant_size
        t, i = divmod(v, q)
        r, j = divmod(c, q)
        s = (j - i) % q
        return [(t * q + k, r * q + (k + s) % q) for k in range(q)]

    def companions(self, graph: TannerGraph, v: int, c: int) -> list[tuple[int, int]]:
        return [e for e in self.orbit(v, c) if e != (v, c)]

    def record(self, v: int, c: int) -> None:
        q = self.circulant_size
        self.shift_table[c // q, v // q] = (c % q - v % q) % q

    def expand(self) -> TannerGraph:
        q = self.circulant_size
        g = TannerGraph(self.base_cols * q, self.base_rows * q)
        for r, t in zip(*np.nonzero(self.shift_table >= 0)):
            s = int(self.shift_table[r, t])
            for k in range(q):
                g.add_edge(int(t) * q + k, int(r) * q + (k + s) % q)
        return g

    def shift_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["base_row", "base_col", "shift"])
        for r, t in zip(*np.nonzero(self.shift_table >= 0)):
            w.writerow([int(r), int(t), int(self.shift_table[r, t])])
        return buf.getvalue()


def read_shift_csv(text: str, q: int, base_rows: int, base_cols: int) -> QcConstraint:
    qc = QcConstraint(q, base_rows, base_cols)
    rows = csv.DictReader(io.StringIO(text))
    if rows.fieldnames != ["base_row", "base_col", "shift"]:
        raise ValueError(f"unexpected shift table header {rows.fieldnames}")
    for n, row in enumerate(rows, start=2):
        r, t, s = int(row["base_row"]), int(row["base_col"]), int(row["shift"])
        if not (0 <= r < base_rows and 0 <= t < base_cols and 0 <= s < q):
            raise ValueError(f"line {n}: entry ({r}, {t}, {s}) out of range")
        if qc.shift_table[r, t] >= 0:
            raise ValueError(f"line {n}: tile ({r}, {t}) listed twice")
        qc.shift_table[r, t] = s
    return qc


def save_shift_csv(qc: QcConstraint, path: str | Path) -> None:
    Path(path).write_text(qc.shift_csv())


def is_quasi_cyclic(graph: TannerGraph, q: int) -> bool:
    """Every edge's rotation within its tile pair is also an edge."""
    if graph.n_var % q or graph.n_chk % q:
        return False
    for v, c in graph.edges():
        t, i = divmod(v, q)
        r, j = divmod(c, q)
        if not graph.has_edge(t * q + (i + 1) % q, r * q + (j + 1) % q):
            return False
    return True


def quantized_base_degrees(dist: DegreeDistribution, n_var: int, n_chk: int, q: int) -> list[int]:
    """Degrees of the base columns; the degree-2 share is capped so that Q*n2 <= M-1."""
    n_base = n_var // q
    counts = dist.node_counts(n_base, max_degree2=degree2_limit(n_chk) // q)
    seq = [d for d, n in sorted(counts.items()) for _ in range(n)]
    if max(seq) > n_chk // q:
        raise ValueError(f"degree {max(seq)} needs more than {n_chk // q} row tiles")
    return seq


def qc_peg_construct(
    n_var: int,
    n_chk: int,
    q: int,
    target_lambda: DegreeDistribution,
    pipeline: MetricPipeline,
    path_cap: int | None = None,
) -> tuple[TannerGraph, QcConstraint, ComplexityAudit]:
    """Quasi-cyclic PEG: placements on representative columns commit their orbit.

    Candidates are scored with the rest of their orbit already in place;
    rotation symmetry makes that score the same for every orbit member, so
    it is also the worst case over the orbit.
    """
    qc = QcConstraint.for_graph(n_var, n_chk, q)
    base = quantized_base_degrees(target_lambda, n_var, n_chk, q)
    degrees = [base[v // q] for v in range(n_var)]
    enforce_weight2_constraint(degrees, n_chk)
    reps = sorted(range(0, n_var, q), key=lambda v: degrees[v])

    def trace(graph, v, sets):
        qc.record(v, sets.chosen)

    kw = {} if path_cap is None else {"path_cap": path_cap}
    graph, audit = peg_construct(n_var, n_chk, degrees, pipeline, constraints=qc, order=reps, trace=trace, **kw)
    return graph, qc, audit


# -- IRA ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IraConstraint:
    parity_count: int
    n_var: int

    @property
    def n_systematic(self) -> int:
        return self.n_var - self.parity_count

    @property
    def accumulator_edges(self) -> list[tuple[int, int]]:
        k = self.n_systematic
        edges = []
        for j in range(self.parity_count):
            if j:
                edges.append((k + j, j - 1))
            edges.append((k + j, j))
        return edges


def ira_init(n_var: int, n_chk: int, parity_count: int | None = None) -> TannerGraph:
    """Graph holding only the dual-diagonal accumulator on the last ``n_chk`` variables."""
    m = n_chk if parity_count is None else parity_count
    if m != n_chk:
        raise ValueError(f"parity count {m} must equal the number of checks {n_chk}")
    if not 0 < n_chk <= n_var:
        raise ValueError("need 0 < M <= N")
    return TannerGraph(n_var, n_chk, IraConstraint(n_chk, n_var).accumulator_edges)


def ira_peg_construct(
    n_var: int,
    n_chk: int,
    target_lambda: DegreeDistribution,
    pipeline: MetricPipeline,
    path_cap: int | None = None,
) -> tuple[TannerGraph, ComplexityAudit]:
    """IRA code: accumulator fixed, systematic columns grown by PEG.

    Systematic degrees follow ``target_lambda`` restricted to degree >= 3,
    since the accumulator already supplies the weight-2 budget.
    """
    init = ira_init(n_var, n_chk)
    k = n_var - n_chk
    sys_deg = target_lambda.restricted(3).degree_sequence(k)
    degrees = sys_deg + init.var_degrees[k:].tolist()
    enforce_weight2_constraint(degrees, n_chk)
    order = sorted(range(k), key=lambda v: degrees[v])
    kw = {} if path_cap is None else {"path_cap": path_cap}
    return peg_construct(n_var, n_chk, degrees, pipeline, initial=init, order=order, **kw)


def is_ira(graph: TannerGraph) -> bool:
    """Whether the last M variables carry exactly the accumulator."""
    m, n = graph.n_chk, graph.n_var
    if m > n:
        return False
    k = n - m
    want = sorted(IraConstraint(m, n).accumulator_edges)
    have = sorted((v, c) for v, c in graph.edges() if v >= k)
    return want == have


def ira_encode(graph: TannerGraph, message: np.ndarray) -> np.ndarray:
    """Linear-time accumulation encoding; ``message`` has shape (K,) or (B, K)."""
    if not is_ira(graph):
        raise ValueError("graph lacks the accumulator structure")
    m, n = graph.n_chk, graph.n_var
    k = n - m
    msg = np.atleast_2d(np.asarray(message, dtype=np.uint8))
    if msg.shape[1] != k:
        raise ValueError(f"message length {msg.shape[1]} != {k}")
    s = np.zeros((msg.shape[0], m), dtype=np.uint8)
    for v in range(k):
        for c in graph.var_nbrs(v).tolist():
            s[:, c] ^= msg[:, v]
    # p_{M-1} = s_{M-1};  p_j = p_{j+1} ^ s_j
    parity = np.bitwise_xor.accumulate(s[:, ::-1], axis=1)[:, ::-1]
    out = np.concatenate([msg, parity], axis=1)
    return out[0] if np.ndim(message) == 1 else out
