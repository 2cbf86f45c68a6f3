"""Backend selection for the LSTM cell kernels.

Tries the compiled extension first and falls back to the numpy
implementation when it is unavailable.  ``JOBREC_KERNEL=numpy`` or
``JOBREC_KERNEL=cython`` forces a backend; forcing the compiled one when it
was never built raises ImportError instead of silently degrading.
"""

from __future__ import annotations

import logging
import os

log = logging.getLogger(__name__)

_forced = os.environ.get("JOBREC_KERNEL", "").strip().lower()
if _forced not in ("", "numpy", "cython"):
    raise ImportError(
        f"JOBREC_KERNEL must be 'numpy' or 'cython', got {_forced!r}"
    )

_impl = None
if _forced != "numpy":
    try:
        from jobrec.kernels import _fastcells as _impl
    except ImportError:
        if _forced == "cython":
            raise ImportError(
                "JOBREC_KERNEL=cython but the compiled extension is not available"
            )
        log.info("compiled kernels unavailable, using numpy fallback")
if _impl is None:
    from jobrec.kernels import pycells as _impl

BACKEND: str = _impl.BACKEND_NAME
lstm_cell_forward = _impl.lstm_cell_forward
lstm_cell_backward = _impl.lstm_cell_backward

__all__ = ["BACKEND", "lstm_cell_forward", "lstm_cell_backward"]
