"""Pure-numpy LSTM cell kernels (fallback backend).

The cell math lives here and in the compiled twin ``_fastcells.pyx``; both
implement exactly the same formulas.  Gate preactivations ``z`` are laid out
``[input | forget | cell | output]`` along the last axis; the forward cache
packs the activated gates plus tanh(c) as ``[i | f | g | o | tanh(c)]``.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # Stable in both tails: never exponentiates a large positive argument.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def lstm_cell_forward(z: np.ndarray, c_prev: np.ndarray):
    """One LSTM cell step over a batch.

    z: (B, 4H) gate preactivations; c_prev: (B, H).
    Returns (h, c, cache) with cache shaped (B, 5H).
    """
    hidden = c_prev.shape[1]
    i = _sigmoid(z[:, :hidden])
    f = _sigmoid(z[:, hidden:2 * hidden])
    g = np.tanh(z[:, 2 * hidden:3 * hidden])
    o = _sigmoid(z[:, 3 * hidden:])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    cache = np.concatenate([i, f, g, o, tc], axis=1)
    return h, c, cache


def lstm_cell_backward(dh: np.ndarray, dc: np.ndarray, cache: np.ndarray, c_prev: np.ndarray):
    """Backward step matching :func:`lstm_cell_forward`.

    dh, dc: (B, H) gradients flowing into h and (carried) c.
    Returns (dz, dc_prev) with dz shaped (B, 4H).
    """
    hidden = c_prev.shape[1]
    i = cache[:, :hidden]
    f = cache[:, hidden:2 * hidden]
    g = cache[:, 2 * hidden:3 * hidden]
    o = cache[:, 3 * hidden:4 * hidden]
    tc = cache[:, 4 * hidden:]
    dc_total = dc + dh * o * (1.0 - tc * tc)
    dz = np.empty((dh.shape[0], 4 * hidden), dtype=np.float64)
    dz[:, :hidden] = dc_total * g * i * (1.0 - i)
    dz[:, hidden:2 * hidden] = dc_total * c_prev * f * (1.0 - f)
    dz[:, 2 * hidden:3 * hidden] = dc_total * i * (1.0 - g * g)
    dz[:, 3 * hidden:] = dh * tc * o * (1.0 - o)
    dc_prev = dc_total * f
    return dz, dc_prev
