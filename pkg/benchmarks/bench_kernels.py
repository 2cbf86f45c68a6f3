"""Benchmark the LSTM cell kernels: numpy backend vs compiled extension.

Run from the repo root:

    python3 benchmarks/bench_kernels.py

Both backends compute identical values (asserted here); the interesting
number is the per-call latency at training-sized batches.
"""

import time

import numpy as np

from jobrec.kernels import pycells

try:
    from jobrec.kernels import _fastcells
except ImportError:
    _fastcells = None


def _inputs(batch: int, hidden: int, rng: np.random.Generator):
    z = rng.normal(size=(batch, 4 * hidden))
    c_prev = rng.normal(size=(batch, hidden))
    dh = rng.normal(size=(batch, hidden))
    dc = rng.normal(size=(batch, hidden))
    return z, c_prev, dh, dc


def _time(fn, repeat: int = 200) -> float:
    fn()  # warm up
    start = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - start) / repeat


def bench(batch: int, hidden: int, rng: np.random.Generator) -> None:
    z, c_prev, dh, dc = _inputs(batch, hidden, rng)

    h_np, c_np, cache_np = pycells.lstm_cell_forward(z, c_prev)
    rows = [("numpy", _time(lambda: pycells.lstm_cell_forward(z, c_prev)),
             _time(lambda: pycells.lstm_cell_backward(dh, dc, cache_np, c_prev)))]

    if _fastcells is not None:
        h_cy, c_cy, cache_cy = _fastcells.lstm_cell_forward(z, c_prev)
        assert np.allclose(h_np, h_cy, atol=1e-12)
        assert np.allclose(c_np, c_cy, atol=1e-12)
        dz_np, dcp_np = pycells.lstm_cell_backward(dh, dc, cache_np, c_prev)
        dz_cy, dcp_cy = _fastcells.lstm_cell_backward(dh, dc, cache_cy, c_prev)
        assert np.allclose(dz_np, dz_cy, atol=1e-12)
        assert np.allclose(dcp_np, dcp_cy, atol=1e-12)
        rows.append(
            ("cython", _time(lambda: _fastcells.lstm_cell_forward(z, c_prev)),
             _time(lambda: _fastcells.lstm_cell_backward(dh, dc, cache_cy, c_prev))))

    print(f"\nbatch={batch} hidden={hidden}")
    print(f"{'backend':<8} {'forward':>12} {'backward':>12} {'speedup fwd':>12}")
    base_fwd = rows[0][1]
    for name, fwd, bwd in rows:
        print(f"{name:<8} {fwd * 1e6:>10.1f}us {bwd * 1e6:>10.1f}us "
              f"{base_fwd / fwd:>11.2f}x")


def main() -> None:
    rng = np.random.default_rng(0)
    if _fastcells is None:
        print("compiled extension not available; benchmarking numpy only")
    for batch, hidden in ((16, 32), (64, 128), (256, 128), (64, 512)):
        bench(batch, hidden, rng)


if __name__ == "__main__":
    main()
