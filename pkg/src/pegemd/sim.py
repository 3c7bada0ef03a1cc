"""Monte Carlo experiments, configuration and CSV reports."""

from __future__ import annotations

import configparser
import csv
import io
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .channel import ChannelKind, ChannelSpec, llr_init, transmit
from .cycles import count_cycles
from .decoder import DEFAULT_MAX_ITER, make_encoder, spa_decode
from .diversity import DiversityGraph, build_full_diversity, puncture
from .graph import LAMBDA_DE8, DegreeDistribution, TannerGraph
from .peg import ComplexityAudit, MetricPipeline, peg_construct
from .structured import QcConstraint, ira_peg_construct, qc_peg_construct
from . import kernels

log = logging.getLogger(__name__)

STRUCTURES = ("plain", "qc", "ira", "diversity")
MIN_FRAME_ERRORS_FLOOR = 20
# fields that only set the trial budget; a rerun may change them and resume
BUDGET_KEYS = ("min_frame_errors", "max_trials")


@dataclass(frozen=True)
class ExperimentConfig:
    construction: str = "peg"
    structure: str = "plain"
    n_var: int = 250
    n_chk: int | None = None
    q: int = 8
    fade_count: int = 2
    n_info: int | None = None
    puncture: bool = False
    lam: str = "2:0.30013,3:0.28395,8:0.41592"
    seed: int = 0
    sim_seed: int | None = None
    channel: str = "bec"
    points: tuple[float, ...] = ()
    iteration_caps: tuple[int, ...] = ()
    max_iter: int = DEFAULT_MAX_ITER
    decoder: str = "spa"
    rayleigh_scale: float = 0.5
    min_frame_errors: int = 100
    max_trials: int = 100_000
    batch_size: int = 500
    allow_few_errors: bool = False
    scope: str = "frame"
    all_zero: bool = False
    out: str | None = None

    def __post_init__(self):
        MetricPipeline.named(self.construction)
        if self.structure not in STRUCTURES:
            raise ValueError(f"structure must be one of {STRUCTURES}")
        if self.scope not in ("frame", "systematic"):
            raise ValueError("scope must be 'frame' or 'systematic'")
        if self.decoder not in ("spa", "peel"):
            raise ValueError("decoder must be 'spa' or 'peel'")
        if self.decoder == "peel" and self.channel != "bec":
            raise ValueError("the peeling decoder needs the erasure channel")
        ChannelKind(self.channel)
        if self.min_frame_errors < MIN_FRAME_ERRORS_FLOOR and not self.allow_few_errors:
            raise ValueError(
                f"min_frame_errors below {MIN_FRAME_ERRORS_FLOOR} needs allow_few_errors=true"
            )
        if self.iteration_caps and len(self.points) != 1:
            raise ValueError("an iteration-cap sweep runs at exactly one channel point")
        if self.iteration_caps and self.decoder != "spa":
            raise ValueError("iteration-cap sweeps need the sum-product decoder")
        if self.max_iter < 1 or self.batch_size < 1 or self.max_trials < 1:
            raise ValueError("max_iter, batch_size and max_trials must be positive")

    @property
    def distribution(self) -> DegreeDistribution:
        return DegreeDistribution.parse(self.lam)

    @property
    def stream_seed(self) -> int:
        return self.seed if self.sim_seed is None else self.sim_seed

    @property
    def sweep_name(self) -> str:
        if self.iteration_caps:
            return "max_iter"
        return "epsilon" if self.channel == "bec" else "snr_db"

    def items(self) -> list[tuple[str, str]]:
        out = []
        for f in fields(self):
            val = getattr(self, f.name)
            if isinstance(val, tuple):
                val = ",".join(repr(x) if isinstance(x, float) else str(x) for x in val)
            elif isinstance(val, bool):
                val = "true" if val else "false"
            elif val is None:
                val = ""
            out.append((f.name, str(val)))
        return out


_INTS = {"n_var", "n_chk", "q", "fade_count", "n_info", "seed", "sim_seed", "max_iter",
         "min_frame_errors", "max_trials", "batch_size"}
_FLOATS = {"rayleigh_scale"}
_BOOLS = {"puncture", "allow_few_errors", "all_zero"}


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Read ``key = value`` lines (``#`` comments allowed) into a config."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        cp.read_string("[experiment]\n" + text)
    except configparser.Error as e:
        raise ValueError(f"bad configuration: {e}") from None
    raw = dict(cp["experiment"])
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    known = {f.name for f in fields(ExperimentConfig)}
    kw = {}
    for key, val in raw.items():
        if key == "lambda":
            key = "lam"
        if key not in known:
            raise ValueError(f"unknown configuration key {key!r}")
        if not isinstance(val, str):
            kw[key] = val
            continue
        val = val.strip()
        if key in _INTS:
            kw[key] = int(val) if val else None
        elif key in _FLOATS:
            kw[key] = float(val)
        elif key in _BOOLS:
            if val.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(f"{key}: expected a boolean, got {val!r}")
            kw[key] = val.lower() in ("true", "1", "yes")
        elif key == "points":
            kw[key] = tuple(float(x) for x in val.split(",") if x.strip())
        elif key == "iteration_caps":
            kw[key] = tuple(int(x) for x in val.split(",") if x.strip())
        else:
            kw[key] = val or None
    return ExperimentConfig(**kw)


def load_config(path: str | Path, overrides: dict | None = None) -> ExperimentConfig:
    return parse_config(Path(path).read_text(), overrides)


# -- codes ---------------------------------------------------------------------------


@dataclass
class CodeBundle:
    name: str
    graph: TannerGraph
    info: np.ndarray
    audit: ComplexityAudit
    diversity: DiversityGraph | None = None
    qc: QcConstraint | None = None
    puncture_mask: np.ndarray | None = None
    fade_index: np.ndarray | None = None

    @property
    def transmitted_length(self) -> int:
        return self.graph.n_var - (0 if self.puncture_mask is None else int(self.puncture_mask.sum()))

    @property
    def rate(self) -> float:
        return self.info.size / self.transmitted_length


def build_code(cfg: ExperimentConfig) -> CodeBundle:
    pipe = MetricPipeline.named(cfg.construction, cfg.seed)
    lam = cfg.distribution
    n = cfg.n_var
    m = cfg.n_chk if cfg.n_chk is not None else n // 2
    if cfg.structure == "diversity":
        dg = build_full_diversity(cfg.fade_count, n, lam, pipe, n_info=cfg.n_info)
        mask = None
        if cfg.puncture:
            dg, mask = puncture(dg, cfg.fade_count - 1)
        return CodeBundle(cfg.construction, dg.graph, np.array(dg.layout.systematic), dg.audit,
                          diversity=dg, puncture_mask=mask, fade_index=dg.layout.fade_index())
    qc = None
    if cfg.structure == "plain":
        graph, audit = peg_construct(n, m, lam, pipe)
    elif cfg.structure == "qc":
        graph, qc, audit = qc_peg_construct(n, m, cfg.q, lam, pipe)
    else:
        graph, audit = ira_peg_construct(n, m, lam, pipe)
    enc = make_encoder(graph)
    return CodeBundle(cfg.construction, graph, np.asarray(enc.info), audit, qc=qc)


# -- simulation ---------------------------------------------------------------------------


@dataclass
class PointResult:
    point: float
    trials: int = 0
    frame_errors: int = 0
    bit_errors: int = 0
    iterations: int = 0
    bits_per_frame: int = 1

    @property
    def fer(self) -> float:
        return self.frame_errors / self.trials if self.trials else float("nan")

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.trials * self.bits_per_frame) if self.trials else float("nan")

    @property
    def mean_iterations(self) -> float:
        return self.iterations / self.trials if self.trials else float("nan")

    @property
    def ci95(self) -> float:
        """Normal-approximation half-width 1.96 sqrt(p (1 - p) / n)."""
        if not self.trials:
            return float("nan")
        p = self.fer
        return 1.96 * float(np.sqrt(p * (1.0 - p) / self.trials))

    def row(self) -> list[str]:
        return [_fmt(self.point), str(self.trials), str(self.frame_errors), str(self.bit_errors),
                _fmt(self.mean_iterations), _fmt(self.fer), _fmt(self.ber), _fmt(self.ci95)]


@dataclass
class SimResult:
    config: ExperimentConfig
    points: list[PointResult] = field(default_factory=list)
    rate: float = float("nan")

    def point(self, x: float) -> PointResult:
        for p in self.points:
            if p.point == x:
                return p
        raise KeyError(x)


COLUMNS = ("trials", "frame_errors", "bit_errors", "mean_iterations", "fer", "ber", "ci95")


def _fmt(x: float) -> str:
    return repr(float(x))


def _channel(cfg: ExperimentConfig, x: float) -> ChannelSpec:
    kind = ChannelKind(cfg.channel)
    if kind is ChannelKind.BEC:
        return ChannelSpec.bec(x)
    if kind is ChannelKind.AWGN:
        return ChannelSpec.awgn(snr_db=x)
    if kind is ChannelKind.FAST_FADING:
        return ChannelSpec.fast_fading(x, cfg.rayleigh_scale)
    f = cfg.fade_count - (1 if cfg.puncture else 0)
    return ChannelSpec.block_fading(f, x, cfg.rayleigh_scale)


def _batch_rng(cfg: ExperimentConfig, point_idx: int, batch: int) -> np.random.Generator:
    return np.random.default_rng([cfg.stream_seed, point_idx, batch])


class _Trial:
    """One batch: draw words, send, decode, count errors per iteration cap."""

    def __init__(self, cfg: ExperimentConfig, code: CodeBundle):
        self.cfg = cfg
        self.code = code
        self.encoder = make_encoder(code.graph, None if code.diversity is None else code.info)
        self.scope = code.info if cfg.scope == "systematic" else np.arange(code.graph.n_var)

    def run(self, spec: ChannelSpec, rng: np.random.Generator, batch: int, caps: list[int]):
        g = self.code.graph
        k = self.encoder.k
        msg = np.zeros((batch, k), dtype=np.uint8) if self.cfg.all_zero else rng.integers(0, 2, (batch, k), dtype=np.uint8)
        cw = np.atleast_2d(self.encoder.encode(msg)).astype(np.uint8)
        rx = transmit(cw, spec, rng, rate=self.code.rate, fade_index=self.code.fade_index)
        llr = llr_init(rx, spec, self.code.puncture_mask)
        out = []
        if self.cfg.decoder == "peel":
            erased = (llr == 0)
            est_err = np.zeros_like(cw, dtype=bool)
            for f in range(batch):
                est_err[f] = kernels.peel(*g.arrays, erased[f].astype(np.uint8)).astype(bool)
            errs = est_err[:, self.scope]
            out.append((errs, np.zeros(batch, dtype=np.int64)))
            return out
        top = max(caps)
        # early-stopped frames keep their word in the history, so column c is the cap-c decoder
        res = spa_decode(g, llr, max_iter=top, history=len(caps) > 1)
        for cap in caps:
            # undecided bits (zero posterior) count as errors
            est = np.where(res.posterior == 0, 2, res.estimate) if len(caps) == 1 else res.history[:, cap]
            errs = est[:, self.scope] != cw[:, self.scope]
            out.append((errs, np.minimum(res.iterations_used, cap)))
        return out


def run_experiment(cfg: ExperimentConfig, code: CodeBundle | None = None) -> SimResult:
    """Run the sweep, writing one CSV row per finished point.

    Batch ``b`` of point ``i`` draws from ``default_rng([seed, i, b])`` and the
    stop rule is tested between batches, so results depend only on the
    configuration. An existing output with the same configuration is resumed:
    points already meeting the budget are kept and the rest are rerun and
    appended.
    """
    if not cfg.points:
        raise ValueError("no channel points to simulate")
    code = code or build_code(cfg)
    trial = _Trial(cfg, code)
    done = _resume(cfg)
    result = SimResult(cfg, rate=code.rate)
    bits = int(trial.scope.size)
    if cfg.iteration_caps:
        xs = [float(c) for c in cfg.iteration_caps]
        caps = list(cfg.iteration_caps)
        plan = [(0, cfg.points[0], xs, caps)]
    else:
        plan = [(i, x, [x], [cfg.max_iter]) for i, x in enumerate(cfg.points)]
    if cfg.out is not None and done is None:
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.out).write_text(_header_text(cfg, code))
    for idx, x, labels, caps in plan:
        prior = [done.get(lbl) if done else None for lbl in labels]
        for p in prior:
            if p is not None:
                p.bits_per_frame = bits
        if all(p is not None and _satisfied(cfg, p) for p in prior):
            result.points.extend(prior)
            continue
        spec = _channel(cfg, x)
        acc = [PointResult(lbl, bits_per_frame=bits) for lbl in labels]
        b = 0
        while not _finished(cfg, acc):
            n = min(cfg.batch_size, cfg.max_trials - acc[0].trials)
            for pr, (errs, iters) in zip(acc, trial.run(spec, _batch_rng(cfg, idx, b), n, caps)):
                pr.trials += n
                pr.frame_errors += int(errs.any(axis=1).sum())
                pr.bit_errors += int(errs.sum())
                pr.iterations += int(iters.sum())
            b += 1
        log.info("%s=%s trials=%d fer=%.3g", cfg.sweep_name, x, acc[-1].trials, acc[-1].fer)
        result.points.extend(acc)
        if cfg.out is not None:
            with open(cfg.out, "a", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                for pr in acc:
                    w.writerow(pr.row())
    return result


def _finished(cfg: ExperimentConfig, acc: list[PointResult]) -> bool:
    if acc[0].trials >= cfg.max_trials:
        return True
    return min(p.frame_errors for p in acc) >= cfg.min_frame_errors


def _satisfied(cfg: ExperimentConfig, p: PointResult) -> bool:
    return p.trials >= cfg.max_trials or p.frame_errors >= cfg.min_frame_errors


def _header_text(cfg: ExperimentConfig, code: CodeBundle) -> str:
    lines = [f"# {k}={v}" for k, v in cfg.items() if k != "out"]
    lines.append(f"# rate={code.rate!r}")
    lines.append(",".join((cfg.sweep_name,) + COLUMNS))
    return "\n".join(lines) + "\n"


def read_results(path: str | Path) -> tuple[dict[str, str], list[PointResult]]:
    """Header settings and rows of a result CSV; later rows for a point win."""
    meta: dict[str, str] = {}
    body = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta[k] = v
        elif line.strip():
            body.append(line)
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    latest: dict[float, PointResult] = {}
    for r in rows:
        x = float(next(iter(r.values())))
        trials = int(r["trials"])
        pr = PointResult(x, trials, int(r["frame_errors"]), int(r["bit_errors"]),
                         round(float(r["mean_iterations"]) * trials))
        if float(r["ber"]) > 0 and pr.bit_errors:
            pr.bits_per_frame = max(1, round(pr.bit_errors / (float(r["ber"]) * trials)))
        latest[x] = pr
    return meta, list(latest.values())


def _resume(cfg: ExperimentConfig) -> dict[float, PointResult] | None:
    if cfg.out is None or not Path(cfg.out).exists():
        return None
    meta, rows = read_results(cfg.out)
    mine = dict(cfg.items())
    for k, v in meta.items():
        if k in BUDGET_KEYS or k == "rate":
            continue
        if mine.get(k) != v:
            raise ValueError(f"{cfg.out} was written with {k}={v}, not {mine.get(k)}; choose another output")
    return {p.point: p for p in rows}


# -- reports -----------------------------------------------------------------------------


def report_cycles(graphs: dict[str, TannerGraph]) -> str:
    """Cycle counts laid out with one row per length and one column per graph."""
    census = {name: count_cycles(g).counts for name, g in graphs.items()}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["length"] + list(graphs))
    for L in (6, 8, 10):
        w.writerow([L] + [census[name][L] for name in graphs])
    return buf.getvalue()


def report_complexity(audits: list[tuple[int, str, ComplexityAudit]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["block_length", "algorithm", "total_paths", "long_paths"])
    for n, name, a in audits:
        w.writerow([n, name, a.total_paths_evaluated, a.long_paths_evaluated])
    return buf.getvalue()


def complexity_sweep(block_lengths, algorithms=("multipath-emd", "ace-emd"), seed: int = 0,
                     lam: DegreeDistribution = LAMBDA_DE8) -> list[tuple[int, str, ComplexityAudit]]:
    """Path audits for rate-1/2 constructions at each block length."""
    out = []
    for n in block_lengths:
        for name in algorithms:
            _, audit = peg_construct(n, n // 2, lam, MetricPipeline.named(name, seed))
            out.append((n, name, audit))
    return out
