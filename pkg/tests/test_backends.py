"""The compiled kernels and the NumPy kernels must agree."""

import numpy as np
import pytest

from dvlaccel.nn import ArchitectureConfig, Network, available_backends, init_parameters
from dvlaccel.nn import _backend, _kernels_py

pytestmark = pytest.mark.skipif("cython" not in available_backends(), reason="extension not built")


@pytest.fixture
def kc():
    return _backend.get("cython")


def test_names(kc):
    assert kc.NAME == "cython" and _kernels_py.NAME == "python"


def test_conv_agree(kc, rng):
    x, W, b = rng.normal(size=(5, 3, 12)), rng.normal(size=(8, 3, 3)), rng.normal(size=8)
    np.testing.assert_allclose(kc.conv1d_forward(x, W, b), _kernels_py.conv1d_forward(x, W, b), rtol=1e-13, atol=1e-14)
    dy = rng.normal(size=(5, 8, 10))
    for a, b_ in zip(kc.conv1d_backward(x, W, dy), _kernels_py.conv1d_backward(x, W, dy)):
        np.testing.assert_allclose(a, b_, rtol=1e-12, atol=1e-13)


def test_pool_agree(kc, rng):
    y = rng.normal(size=(4, 6, 11))
    o1, i1 = kc.maxpool_forward(y, 3)
    o2, i2 = _kernels_py.maxpool_forward(y, 3)
    np.testing.assert_array_equal(o1, o2)
    np.testing.assert_array_equal(i1, i2)
    d = rng.normal(size=o1.shape)
    np.testing.assert_array_equal(kc.maxpool_backward(d, i1, 11), _kernels_py.maxpool_backward(d, i2, 11))


def test_lstm_agree(kc, rng):
    x, W, b = rng.normal(size=(4, 3, 6)), rng.normal(scale=0.3, size=(20, 11)), rng.normal(size=20)
    f1, f2 = kc.lstm_forward(x, W, b), _kernels_py.lstm_forward(x, W, b)
    for a, c in zip(f1, f2):
        np.testing.assert_allclose(a, c, rtol=1e-12, atol=1e-14)
    dhs = rng.normal(size=(4, 3, 5))
    for a, c in zip(kc.lstm_backward(dhs, x, W, f1[3], f1[1], f1[2], f1[0]),
                    _kernels_py.lstm_backward(dhs, x, W, f2[3], f2[1], f2[2], f2[0])):
        np.testing.assert_allclose(a, c, rtol=1e-11, atol=1e-13)


def test_network_agree(rng):
    ck = init_parameters(ArchitectureConfig(), 3)
    x, t = rng.normal(size=(16, 3, 12)), rng.normal(size=(16, 3))
    l1, g1 = Network(ck, "cython").loss_and_grad(x, t)
    l2, g2 = Network(ck, "python").loss_and_grad(x, t)
    assert l1 == pytest.approx(l2, rel=1e-13)
    np.testing.assert_allclose(g1, g2, rtol=1e-10, atol=1e-15)


def test_auto_prefers_compiled():
    assert _backend.get("auto").NAME == "cython"


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.get("fortran")
