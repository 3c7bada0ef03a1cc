"""Dense GF(2) elimination for systematic encoding."""

from __future__ import annotations

from typing import Sequence

import numpy as np


def rref(h: np.ndarray, col_order: Sequence[int] | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``h`` over GF(2).

    Pivot columns are sought in ``col_order`` (default: left to right).
    Returns the reduced matrix, zero rows dropped, and its pivot columns.
    """
    a = (np.asarray(h) & 1).astype(np.uint8)
    m, n = a.shape
    order = range(n) if col_order is None else col_order
    pivots: list[int] = []
    row = 0
    for col in order:
        if row == m:
            break
        hits = np.flatnonzero(a[row:, col]) + row
        if hits.size == 0:
            continue
        p = hits[0]
        if p != row:
            a[[row, p]] = a[[p, row]]
        others = np.flatnonzero(a[:, col])
        others = others[others != row]
        a[others] ^= a[row]
        pivots.append(int(col))
        row += 1
    return a[:row], pivots


def rank(h: np.ndarray) -> int:
    return len(rref(h)[1])


class SystematicEncoder:
    """Encoder placing the message on ``info`` positions.

    ``prefer`` lists columns to try as parity pivots first; message positions
    are whatever is left, in ascending order.
    """

    def __init__(self, h: np.ndarray, prefer: Sequence[int] | None = None):
        h = np.asarray(h, dtype=np.uint8)
        self.n = h.shape[1]
        order = list(prefer or []) + [c for c in range(self.n) if c not in set(prefer or [])]
        r, piv = rref(h, order)
        self.parity = np.array(piv, dtype=np.int64)
        mask = np.ones(self.n, dtype=bool)
        mask[self.parity] = False
        self.info = np.flatnonzero(mask)
        # x_parity[i] = sum_j r[i, info_j] x_info[j]
        self._p = r[:, self.info].astype(np.int64)

    @classmethod
    def with_info(cls, h: np.ndarray, info: Sequence[int]) -> "SystematicEncoder":
        """Encoder whose message positions are exactly ``info``."""
        h = np.asarray(h, dtype=np.uint8)
        info_set = set(int(i) for i in info)
        enc = cls(h, [c for c in range(h.shape[1]) if c not in info_set])
        if set(enc.info.tolist()) != info_set:
            raise ValueError("requested message positions are not an information set")
        return enc

    @property
    def k(self) -> int:
        return int(self.info.size)

    def encode(self, message: np.ndarray) -> np.ndarray:
        msg = np.atleast_2d(np.asarray(message, dtype=np.int64))
        if msg.shape[1] != self.k:
            raise ValueError(f"message length {msg.shape[1]} != {self.k}")
        out = np.zeros((msg.shape[0], self.n), dtype=np.uint8)
        out[:, self.info] = msg
        out[:, self.parity] = (msg @ self._p.T) & 1
        return out[0] if np.ndim(message) == 1 else out
