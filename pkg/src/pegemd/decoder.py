"""Encoding, sum-product decoding and erasure peeling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .gf2 import SystematicEncoder
from .graph import TannerGraph
from .structured import ira_encode, is_ira

DEFAULT_MAX_ITER = 40
LLR_CLAMP = 30.0


class IraEncoder:
    """Accumulator encoder; the message occupies the first K positions."""

    def __init__(self, graph: TannerGraph):
        if not is_ira(graph):
            raise ValueError("graph lacks the accumulator structure")
        self.graph = graph
        self.n = graph.n_var
        self.info = np.arange(graph.n_var - graph.n_chk)

    @property
    def k(self) -> int:
        return int(self.info.size)

    def encode(self, message: np.ndarray) -> np.ndarray:
        return ira_encode(self.graph, message)


def make_encoder(graph: TannerGraph, info=None):
    """Accumulator encoder for IRA graphs, elimination-based otherwise.

    A rank-deficient H simply yields a longer message (``encoder.k``).
    """
    if info is None and is_ira(graph):
        return IraEncoder(graph)
    h = graph.to_matrix()
    if info is not None:
        return SystematicEncoder.with_info(h, info)
    return SystematicEncoder(h)


def encode(graph: TannerGraph, message: np.ndarray) -> np.ndarray:
    return make_encoder(graph).encode(message)


def syndrome(graph: TannerGraph, words: np.ndarray) -> np.ndarray:
    w = np.atleast_2d(np.asarray(words, dtype=np.int64))
    return (w @ graph.to_matrix().T.astype(np.int64)) & 1


@dataclass
class DecodeResult:
    estimate: np.ndarray
    converged: np.ndarray | bool
    iterations_used: np.ndarray | int
    posterior: np.ndarray
    history: np.ndarray | None = None


def spa_decode(
    graph: TannerGraph,
    llrs: np.ndarray,
    max_iter: int = DEFAULT_MAX_ITER,
    early_stop: bool = True,
    clamp: float = LLR_CLAMP,
    history: bool = False,
) -> DecodeResult:
    """Flooding sum-product decoder.

    ``llrs`` of shape (N,) gives scalar fields in the result, (B, N) gives
    per-frame arrays. A bit with posterior exactly zero is undecided: the
    estimate defaults it to 0 but the frame does not count as converged.
    With ``history`` the result also holds the hard decision after every
    iteration count 0..max_iter (undecided bits as 2; frames that stopped
    early keep their final word), which lets one run stand in for a sweep
    over iteration caps.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    x = np.atleast_2d(np.asarray(llrs, dtype=np.float64))
    if x.shape[1] != graph.n_var:
        raise ValueError(f"{x.shape[1]} LLRs for {graph.n_var} variables")
    post, iters, conv, hist = kernels.spa(*graph.arrays, x, int(max_iter), bool(early_stop), float(clamp), bool(history))
    est = (post < 0).astype(np.uint8)
    if np.ndim(llrs) == 1:
        return DecodeResult(est[0], bool(conv[0]), int(iters[0]), post[0], hist[0] if history else None)
    return DecodeResult(est, conv.astype(bool), iters, post, hist if history else None)


def bec_peel(graph: TannerGraph, erased) -> tuple[set[int], set[int]]:
    """Peel an erasure pattern; returns (recovered, residual) variable sets."""
    mask = np.zeros(graph.n_var, dtype=np.uint8)
    idx = list(erased)
    mask[idx] = 1
    left = kernels.peel(*graph.arrays, mask)
    residual = set(np.flatnonzero(left).tolist())
    return set(idx) - residual, residual
