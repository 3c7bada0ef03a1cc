"""Command line entry point: ``pegemd construct|simulate|analyze``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .alist import load_alist, save_alist
from .cycles import count_cycles
from .diversity import load_diversity, save_layout, verify_diversity
from .peg import PIPELINES
from .sim import build_code, complexity_sweep, load_config, parse_config, report_complexity, report_cycles, run_experiment


def _config(args):
    overrides = {
        "seed": args.seed,
        "out": getattr(args, "out", None),
        "scope": getattr(args, "scope", None),
        "max_iter": getattr(args, "max_iter", None),
    }
    for key in ("construction", "structure", "n_var", "n_chk"):
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)
    if args.config:
        return load_config(args.config, overrides)
    return parse_config("", overrides)


def _sidecar(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


def cmd_construct(args) -> int:
    cfg = _config(args)
    code = build_code(cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_alist(code.graph, out)
    written = [out]
    if code.qc is not None:
        p = _sidecar(out, ".shifts.csv")
        p.write_text(code.qc.shift_csv())
        written.append(p)
    if code.diversity is not None:
        p = _sidecar(out, ".layout")
        save_layout(code.diversity, p)
        written.append(p)
    p = _sidecar(out, ".audit.csv")
    p.write_text(code.audit.to_csv(code.graph.n_var))
    written.append(p)
    for p in written:
        print(p)
    return 0


def cmd_simulate(args) -> int:
    cfg = _config(args)
    res = run_experiment(cfg)
    if cfg.out is None:
        for p in res.points:
            print(",".join(p.row()))
    else:
        print(cfg.out)
    return 0


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def cmd_analyze(args) -> int:
    if args.report == "cycles":
        if not args.graphs:
            raise SystemExit("analyze cycles: give at least one alist file")
        graphs = {Path(g).stem: load_alist(g) for g in args.graphs}
        if len(graphs) == 1:
            text = count_cycles(next(iter(graphs.values()))).to_csv()
        else:
            text = report_cycles(graphs)
        _write(text, args.out)
        return 0
    if args.report == "complexity":
        lengths = [int(x) for x in args.lengths.split(",")]
        algos = args.algorithms.split(",")
        _write(report_complexity(complexity_sweep(lengths, algos, seed=args.seed or 0)), args.out)
        return 0
    if len(args.graphs) != 1:
        raise SystemExit("analyze diversity: give exactly one alist file")
    g = Path(args.graphs[0])
    layout = Path(args.layout) if args.layout else _sidecar(g, ".layout")
    report = verify_diversity(load_diversity(load_alist(g), layout))
    if report:
        _write(f"pass patterns={report.patterns_checked}\n", args.out)
        return 0
    witness = " ".join(map(str, sorted(report.witness)))
    _write(f"fail pattern={','.join(map(str, report.pattern))} witness={witness}\n", args.out)
    return 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pegemd", description="PEG-family LDPC construction and simulation")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--seed", type=int, help="construction seed (also the default stream seed)")

    c = sub.add_parser("construct", help="build a graph, write alist and sidecars")
    common(c)
    c.add_argument("--out", required=True, help="alist output path")
    c.add_argument("--construction", choices=sorted(PIPELINES))
    c.add_argument("--structure", choices=["plain", "qc", "ira", "diversity"])
    c.add_argument("--n-var", dest="n_var", type=int)
    c.add_argument("--n-chk", dest="n_chk", type=int)
    c.set_defaults(func=cmd_construct)

    s = sub.add_parser("simulate", help="Monte Carlo error-rate sweep to CSV")
    common(s)
    s.add_argument("--out", help="CSV output path (resumed if it exists)")
    s.add_argument("--scope", choices=["frame", "systematic"])
    s.add_argument("--max-iter", dest="max_iter", type=int)
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("analyze", help="cycle, complexity and diversity reports")
    a.add_argument("report", choices=["cycles", "complexity", "diversity"])
    a.add_argument("graphs", nargs="*", help="alist files")
    a.add_argument("--config")
    a.add_argument("--seed", type=int)
    a.add_argument("--out")
    a.add_argument("--layout", help="block layout sidecar (default: <graph>.layout)")
    a.add_argument("--lengths", default="64,128,192,256")
    a.add_argument("--algorithms", default="multipath-emd,ace-emd")
    a.set_defaults(func=cmd_analyze)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"pegemd: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
