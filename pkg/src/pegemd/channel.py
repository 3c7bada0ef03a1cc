"""Channel models and receiver LLRs.

BPSK maps bit b to 1 - 2b. Gaussian channels scale each symbol by a fade
coefficient (1 for AWGN, one Rayleigh draw per block for block fading, one
per symbol for fast fading) and add N(0, sigma^2) noise. ``snr_db`` is
Eb/N0, so sigma^2 = 1 / (2 R 10^(snr/10)).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

#: magnitude used for known bits on the erasure channel
BEC_KNOWN_LLR = 100.0


class ChannelKind(str, Enum):
    BEC = "bec"
    AWGN = "awgn"
    BLOCK_FADING = "block_fading"
    FAST_FADING = "fast_fading"


@dataclass(frozen=True)
class ChannelSpec:
    kind: ChannelKind
    epsilon: float | None = None
    snr_db: float | None = None
    sigma: float | None = None
    fade_count: int | None = None
    rayleigh_scale: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "kind", ChannelKind(self.kind))
        if self.kind is ChannelKind.BEC:
            if self.epsilon is None or not 0.0 <= self.epsilon <= 1.0:
                raise ValueError("erasure probability must lie in [0, 1]")
            return
        if (self.snr_db is None) == (self.sigma is None):
            raise ValueError("give exactly one of snr_db and sigma")
        if self.sigma is not None and self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.rayleigh_scale <= 0:
            raise ValueError("rayleigh scale must be positive")
        if self.kind is ChannelKind.BLOCK_FADING and (self.fade_count is None or self.fade_count < 1):
            raise ValueError("block fading needs a fade count")

    @classmethod
    def bec(cls, epsilon: float) -> "ChannelSpec":
        return cls(ChannelKind.BEC, epsilon=epsilon)

    @classmethod
    def awgn(cls, snr_db: float | None = None, sigma: float | None = None) -> "ChannelSpec":
        return cls(ChannelKind.AWGN, snr_db=snr_db, sigma=sigma)

    @classmethod
    def block_fading(cls, fade_count: int, snr_db: float, rayleigh_scale: float = 0.5) -> "ChannelSpec":
        return cls(ChannelKind.BLOCK_FADING, snr_db=snr_db, fade_count=fade_count, rayleigh_scale=rayleigh_scale)

    @classmethod
    def fast_fading(cls, snr_db: float, rayleigh_scale: float = 0.5) -> "ChannelSpec":
        return cls(ChannelKind.FAST_FADING, snr_db=snr_db, rayleigh_scale=rayleigh_scale)

    def noise_sigma(self, rate: float) -> float:
        if self.sigma is not None:
            return float(self.sigma)
        if self.snr_db is None:
            raise ValueError("erasure channel has no noise level")
        return float(np.sqrt(1.0 / (2.0 * rate * 10.0 ** (self.snr_db / 10.0))))


@dataclass
class Received:
    values: np.ndarray
    fades: np.ndarray
    erased: np.ndarray
    sigma: float | None
    block_fades: np.ndarray | None = None


def bpsk(codeword: np.ndarray) -> np.ndarray:
    return 1.0 - 2.0 * np.asarray(codeword, dtype=np.float64)


def block_index(n_var: int, fade_count: int) -> np.ndarray:
    if n_var % fade_count:
        raise ValueError(f"{fade_count} blocks do not divide N={n_var}")
    return np.repeat(np.arange(fade_count), n_var // fade_count)


def transmit(
    codeword: np.ndarray,
    spec: ChannelSpec,
    rng: np.random.Generator,
    rate: float = 1.0,
    fade_index: np.ndarray | None = None,
) -> Received:
    """Send codewords of shape (N,) or (B, N) through the channel.

    ``fade_index`` maps each position to its fading block (-1 for positions
    that are never sent); by default block fading uses F equal contiguous blocks.
    """
    x = np.atleast_2d(bpsk(codeword))
    b, n = x.shape
    if spec.kind is ChannelKind.BEC:
        erased = rng.random((b, n)) < spec.epsilon
        vals = np.where(erased, 0.0, x)
        return Received(vals, np.ones((b, n)), erased, None)
    sigma = spec.noise_sigma(rate)
    block_fades = None
    if spec.kind is ChannelKind.AWGN:
        alpha = np.ones((b, n))
    elif spec.kind is ChannelKind.FAST_FADING:
        alpha = rng.rayleigh(spec.rayleigh_scale, (b, n))
    else:
        idx = block_index(n, spec.fade_count) if fade_index is None else np.asarray(fade_index)
        block_fades = rng.rayleigh(spec.rayleigh_scale, (b, spec.fade_count))
        alpha = np.where(idx >= 0, block_fades[:, np.maximum(idx, 0)], 0.0)
    noise = rng.normal(0.0, sigma, (b, n))
    return Received(alpha * x + noise, alpha, np.zeros((b, n), dtype=bool), sigma, block_fades)


def llr_init(received: Received, spec: ChannelSpec, puncture_mask: np.ndarray | None = None) -> np.ndarray:
    """Coherent LLRs log p(0)/p(1); erased and punctured positions get 0."""
    if spec.kind is ChannelKind.BEC:
        if received.sigma is not None:
            raise ValueError("received record does not come from an erasure channel")
        llr = np.where(received.erased, 0.0, np.sign(received.values) * BEC_KNOWN_LLR)
    else:
        if received.sigma is None:
            raise ValueError("received record lacks a noise level")
        llr = 2.0 * received.fades * received.values / received.sigma**2
    if puncture_mask is not None:
        llr = np.where(np.asarray(puncture_mask, dtype=bool), 0.0, llr)
    return llr
