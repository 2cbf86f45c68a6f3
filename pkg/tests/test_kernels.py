import os
import subprocess
import sys

import numpy as np
import pytest

from jobrec import kernels
from jobrec.kernels import pycells

try:
    from jobrec.kernels import _fastcells
except ImportError:
    _fastcells = None

needs_compiled = pytest.mark.skipif(_fastcells is None,
                                    reason="compiled extension unavailable")


def _case(batch=5, hidden=4, seed=0):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(batch, 4 * hidden))
    c_prev = rng.normal(size=(batch, hidden))
    dh = rng.normal(size=(batch, hidden))
    dc = rng.normal(size=(batch, hidden))
    return z, c_prev, dh, dc


def test_forward_matches_direct_formula():
    z, c_prev, _, _ = _case()
    hidden = c_prev.shape[1]
    h, c, cache = pycells.lstm_cell_forward(z, c_prev)

    def sig(x):
        return 1.0 / (1.0 + np.exp(-x))

    i = sig(z[:, :hidden])
    f = sig(z[:, hidden:2 * hidden])
    g = np.tanh(z[:, 2 * hidden:3 * hidden])
    o = sig(z[:, 3 * hidden:])
    c_ref = f * c_prev + i * g
    assert np.allclose(c, c_ref, atol=1e-14)
    assert np.allclose(h, o * np.tanh(c_ref), atol=1e-14)
    assert cache.shape == (z.shape[0], 5 * hidden)


def test_backward_matches_finite_differences():
    z, c_prev, dh, dc = _case(batch=3, hidden=3, seed=1)
    _, _, cache = pycells.lstm_cell_forward(z, c_prev)
    dz, dc_prev = pycells.lstm_cell_backward(dh, dc, cache, c_prev)

    def objective(z_in, c_in):
        h, c, _ = pycells.lstm_cell_forward(z_in, c_in)
        return float(np.sum(h * dh) + np.sum(c * dc))

    eps = 1e-6
    for arr, grad in ((z, dz), (c_prev, dc_prev)):
        flat = arr.reshape(-1)
        for idx in range(0, flat.size, 7):  # probe a spread of entries
            orig = flat[idx]
            flat[idx] = orig + eps
            up = objective(z, c_prev)
            flat[idx] = orig - eps
            down = objective(z, c_prev)
            flat[idx] = orig
            numeric = (up - down) / (2 * eps)
            assert abs(numeric - grad.reshape(-1)[idx]) < 1e-6


def test_sigmoid_is_stable_at_extremes():
    z = np.zeros((1, 4))
    z[0, 0] = 800.0   # input gate saturated high
    z[0, 1] = -800.0  # forget gate saturated low
    h, c, _ = pycells.lstm_cell_forward(z, np.array([[3.0]]))
    assert np.all(np.isfinite(h)) and np.all(np.isfinite(c))
    assert c[0, 0] == pytest.approx(0.0, abs=1e-12)  # forget gate kills c_prev


@needs_compiled
def test_backends_agree_bitwise_close():
    for seed in range(5):
        z, c_prev, dh, dc = _case(batch=7, hidden=6, seed=seed)
        h_a, c_a, cache_a = pycells.lstm_cell_forward(z, c_prev)
        h_b, c_b, cache_b = _fastcells.lstm_cell_forward(z, c_prev)
        assert np.allclose(h_a, h_b, atol=1e-15, rtol=0)
        assert np.allclose(c_a, c_b, atol=1e-15, rtol=0)
        assert np.allclose(cache_a, cache_b, atol=1e-15, rtol=0)
        dz_a, dcp_a = pycells.lstm_cell_backward(dh, dc, cache_a, c_prev)
        dz_b, dcp_b = _fastcells.lstm_cell_backward(dh, dc, cache_b, c_prev)
        assert np.allclose(dz_a, dz_b, atol=1e-15, rtol=0)
        assert np.allclose(dcp_a, dcp_b, atol=1e-15, rtol=0)


@needs_compiled
def test_compiled_shape_validation():
    z, c_prev, dh, dc = _case()
    with pytest.raises(ValueError):
        _fastcells.lstm_cell_forward(z[:, :-1], c_prev)
    _, _, cache = _fastcells.lstm_cell_forward(z, c_prev)
    with pytest.raises(ValueError):
        _fastcells.lstm_cell_backward(dh[:-1], dc, cache, c_prev)


def _backend_of(env_value):
    env = dict(os.environ)
    if env_value is None:
        env.pop("JOBREC_KERNEL", None)
    else:
        env["JOBREC_KERNEL"] = env_value
    proc = subprocess.run(
        [sys.executable, "-c", "import jobrec.kernels as k; print(k.BACKEND)"],
        capture_output=True, text=True, env=env)
    return proc.returncode, proc.stdout.strip(), proc.stderr


def test_backend_env_override():
    code, backend, _ = _backend_of("numpy")
    assert code == 0 and backend == "numpy"
    code, backend, err = _backend_of("bogus")
    assert code != 0 and "JOBREC_KERNEL" in err
    code, backend, _ = _backend_of(None)
    assert code == 0 and backend in ("numpy", "cython")


def test_package_exposes_selected_backend():
    assert kernels.BACKEND in ("numpy", "cython")
    z, c_prev, dh, dc = _case()
    h, c, cache = kernels.lstm_cell_forward(z, c_prev)
    dz, dcp = kernels.lstm_cell_backward(dh, dc, cache, c_prev)
    assert dz.shape == z.shape and dcp.shape == c_prev.shape
