"""Reading and writing the alist sparse-matrix format.

Layout: ``N M``; max column and row weights; the N column weights; the M
row weights; N lines of 1-based check indices per variable; M lines of
1-based variable indices per check. Short lines are zero-padded on output;
padding zeros are accepted on input but not required.
"""

from __future__ import annotations

from pathlib import Path

from .graph import TannerGraph


class AlistError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def write_alist(graph: TannerGraph) -> str:
    vadj = [sorted(r) for r in graph.var_adj]
    cadj = [sorted(r) for r in graph.chk_adj]
    dv = max((len(r) for r in vadj), default=0)
    dc = max((len(r) for r in cadj), default=0)
    lines = [
        f"{graph.n_var} {graph.n_chk}",
        f"{dv} {dc}",
        " ".join(str(len(r)) for r in vadj),
        " ".join(str(len(r)) for r in cadj),
    ]
    for rows, width in ((vadj, dv), (cadj, dc)):
        # an all-zero side still needs one placeholder per line
        width = max(width, 1)
        for r in rows:
            lines.append(" ".join(str(x + 1) for x in r + [-1] * (width - len(r))))
    return "\n".join(lines) + "\n"


def read_alist(text: str) -> TannerGraph:
    lines = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, tok) for i, tok in lines if tok]
    pos = 0

    def ints(expected: int | None, what: str) -> tuple[int, list[int]]:
        nonlocal pos
        if pos >= len(lines):
            raise AlistError(lines[-1][0] + 1 if lines else 1, f"missing {what}")
        lineno, tok = lines[pos]
        pos += 1
        try:
            vals = [int(t) for t in tok]
        except ValueError:
            raise AlistError(lineno, f"non-integer token in {what}") from None
        if expected is not None and len(vals) != expected:
            raise AlistError(lineno, f"{what}: expected {expected} values, got {len(vals)}")
        return lineno, vals

    ln, (n, m) = _header(ints(2, "header N M"))
    ln, (dv, dc) = _header(ints(2, "max degrees"))
    ln_vw, vw = ints(n, "column weights")
    ln_cw, cw = ints(m, "row weights")
    for lineno, ws, cap in ((ln_vw, vw, dv), (ln_cw, cw, dc)):
        if any(w < 0 or w > cap for w in ws):
            raise AlistError(lineno, f"weight outside [0, {cap}]")

    var_side: list[list[int]] = []
    for v in range(n):
        lineno, vals = ints(None, f"adjacency of variable {v + 1}")
        var_side.append(_adjacency(lineno, vals, vw[v], m, "check"))
    chk_side: list[tuple[int, list[int]]] = []
    for c in range(m):
        lineno, vals = ints(None, f"adjacency of check {c + 1}")
        chk_side.append((lineno, _adjacency(lineno, vals, cw[c], n, "variable")))

    edges = {(v, c) for v, row in enumerate(var_side) for c in row}
    back = {(v, c) for c, (_, row) in enumerate(chk_side) for v in row}
    for c, (lineno, row) in enumerate(chk_side):
        for v in row:
            if (v, c) not in edges:
                raise AlistError(lineno, f"edge (v{v + 1}, c{c + 1}) missing on the variable side")
    if edges != back:
        v, c = min(edges - back)
        raise AlistError(_line_of(lines, 4 + v), f"edge (v{v + 1}, c{c + 1}) missing on the check side")

    g = TannerGraph(n, m)
    for v, row in enumerate(var_side):
        for c in row:
            g.add_edge(v, c)
    return g


def _line_of(lines, idx: int) -> int:
    return lines[idx][0] if idx < len(lines) else 0


def _header(parsed: tuple[int, list[int]]) -> tuple[int, list[int]]:
    lineno, vals = parsed
    if any(x < 0 for x in vals):
        raise AlistError(lineno, "negative value in header")
    return lineno, vals


def _adjacency(lineno: int, vals: list[int], weight: int, limit: int, kind: str) -> list[int]:
    real = [x for x in vals if x != 0]
    if len(real) != weight:
        raise AlistError(lineno, f"{len(real)} {kind} indices but weight {weight}")
    if any(x < 1 or x > limit for x in real):
        raise AlistError(lineno, f"{kind} index out of range [1, {limit}]")
    if len(set(real)) != len(real):
        raise AlistError(lineno, f"repeated {kind} index")
    if any(x != 0 for x in vals[len(real):]) or any(x == 0 for x in vals[: len(real)]):
        raise AlistError(lineno, "padding zeros must trail the indices")
    return [x - 1 for x in real]


def save_alist(graph: TannerGraph, path: str | Path) -> None:
    Path(path).write_text(write_alist(graph))


def load_alist(path: str | Path) -> TannerGraph:
    return read_alist(Path(path).read_text())
