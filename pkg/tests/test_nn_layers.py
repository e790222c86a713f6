import numpy as np
import pytest
from hypothesis import given, strategies as st

from dvlaccel.errors import DataError
from dvlaccel.nn import available_backends, conv1d_forward, leaky_relu, lstm_forward, maxpool1d_forward, stack_gates
from dvlaccel.nn import _backend

import oracles

BACKENDS = available_backends()


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def rel_close(a, b, tol=1e-12):
    a, b = np.asarray(a), np.asarray(b)
    assert np.max(np.abs(a - b)) <= tol * max(1.0, np.max(np.abs(b)))


def test_conv_zero_input_gives_bias(backend):
    b = np.array([0.5, -1.0, 2.0])
    y = conv1d_forward(np.zeros((3, 12)), np.ones((3, 3, 3)), b, backend)
    np.testing.assert_array_equal(y, np.repeat(b[:, None], 10, axis=1))


def test_conv_delta_kernel_shifts(backend):
    x = np.arange(8.0)[None]
    w = np.array([[[0.0, 1.0, 0.0]]])
    np.testing.assert_array_equal(conv1d_forward(x, w, np.zeros(1), backend)[0], x[0, 1:-1])


def test_conv_matches_loop_oracle(backend, rng):
    for _ in range(10):
        N, F = int(rng.integers(3, 20)), int(rng.integers(1, 8))
        x, w, b = rng.normal(size=(3, N)), rng.normal(size=(F, 3, 3)), rng.normal(size=F)
        rel_close(conv1d_forward(x, w, b, backend), oracles.conv1d(x.tolist(), w.tolist(), b.tolist()))


def test_conv_shape_errors():
    with pytest.raises(DataError):
        conv1d_forward(np.zeros((2, 12)), np.zeros((4, 3, 3)), np.zeros(4))
    with pytest.raises(DataError):
        conv1d_forward(np.zeros((3, 2)), np.zeros((4, 3, 3)), np.zeros(4))


@pytest.mark.parametrize("x,y", [(5.0, 5.0), (-1.0, -0.01), (0.0, 0.0)])
def test_leaky_values(x, y):
    assert leaky_relu(x) == y


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_leaky_branches(x):
    y = leaky_relu(x)
    if x >= 0:
        assert y == x
    else:
        assert y == 0.01 * x
        if x < -1e-300:  # subnormal products lose the ratio's precision
            assert y / x == pytest.approx(0.01, rel=1e-15)


def test_leaky_matches_oracle(rng):
    x = rng.normal(size=1000)
    np.testing.assert_array_equal(leaky_relu(x), [oracles.leaky_relu(v) for v in x])


def test_pool_values(backend):
    out, idx = maxpool1d_forward(np.array([[1, 5, 2, 4, 4, 4, 0, -1, -2]], dtype=float), 3, backend)
    np.testing.assert_array_equal(out, [[5, 4, 0]])
    np.testing.assert_array_equal(idx, [[1, 3, 6]])  # ties go to the first position


def test_pool_constant(backend):
    out, _ = maxpool1d_forward(np.full((2, 9), 3.5), 3, backend)
    np.testing.assert_array_equal(out, 3.5)


def test_pool_drops_remainder(backend):
    x = np.zeros((1, 10))
    x[0, 9] = 100.0
    out, _ = maxpool1d_forward(x, 3, backend)
    assert out.shape == (1, 3)
    assert out.max() == 0.0


def test_pool_matches_oracle_and_window_max(backend, rng):
    x = rng.normal(size=(6, 17))
    out, idx = maxpool1d_forward(x, 3, backend)
    np.testing.assert_array_equal(out, oracles.maxpool(x.tolist()))
    for w in range(out.shape[1]):
        assert np.all(out[:, w] >= x[:, 3 * w : 3 * w + 3].max(axis=1))
    np.testing.assert_array_equal(np.take_along_axis(x, idx, axis=1), out)


def test_pool_too_short():
    with pytest.raises(DataError):
        maxpool1d_forward(np.zeros((2, 2)))


def _random_lstm(rng, H, D, scale=0.5):
    Ws = [rng.normal(scale=scale, size=(H, H + D)) for _ in range(4)]
    bs = [rng.normal(scale=scale, size=H) for _ in range(4)]
    return Ws, bs


def test_lstm_zero_everything(backend):
    W, b = np.zeros((128, 64)), np.zeros(128)
    hs, (h, c) = lstm_forward(np.zeros((3, 32)), W, b, backend)
    np.testing.assert_array_equal(hs, 0.0)
    np.testing.assert_array_equal(c, 0.0)
    _, _, _, gates = _backend.get(backend).lstm_forward(np.zeros((1, 3, 32)), W, b)
    np.testing.assert_array_equal(gates[0, :, :32], 0.5)  # forget
    np.testing.assert_array_equal(gates[0, :, 64:96], 0.0)  # candidate


def test_lstm_single_step_matches_oracle(backend, rng):
    Ws, bs = _random_lstm(rng, 32, 32)
    y = rng.normal(size=(1, 32))
    W, b = stack_gates(*Ws, *bs)
    hs, (h, c) = lstm_forward(y, W, b, backend)
    h_ref, c_ref = oracles.lstm_step([0.0] * 32, [0.0] * 32, y[0], *[w.tolist() for w in Ws], *[v.tolist() for v in bs])
    rel_close(h, h_ref)
    rel_close(c, c_ref)


def test_lstm_sequence_matches_oracle(backend, rng):
    Ws, bs = _random_lstm(rng, 7, 5)
    seq = rng.normal(size=(6, 5))
    W, b = stack_gates(*Ws, *bs)
    hs, (h, c) = lstm_forward(seq, W, b, backend)
    hs_ref, h_ref, c_ref = oracles.lstm_sequence(seq.tolist(), [w.tolist() for w in Ws] + [v.tolist() for v in bs])
    rel_close(hs, hs_ref)
    rel_close(c, c_ref)


def _gate_ranges(backend, x, W, b):
    _, _, tc, gates = _backend.get(backend).lstm_forward(x, W, b)
    sig = np.concatenate([gates[..., :16], gates[..., 24:]], axis=-1)
    return sig, gates[..., 16:24], tc


def test_lstm_codomain(backend, rng):
    Ws, bs = _random_lstm(rng, 8, 4, scale=0.5)
    W, b = stack_gates(*Ws, *bs)
    sig, cand, tc = _gate_ranges(backend, rng.normal(size=(2, 5, 4)), W, b)
    assert np.all((sig > 0) & (sig < 1))
    assert np.all(np.abs(cand) < 1) and np.all(np.abs(tc) < 1)


def test_lstm_codomain_saturated(backend, rng):
    # double precision rounds saturated sigmoid/tanh onto the closed interval
    Ws, bs = _random_lstm(rng, 8, 4, scale=5.0)
    W, b = stack_gates(*Ws, *bs)
    sig, cand, tc = _gate_ranges(backend, rng.normal(scale=100, size=(2, 5, 4)), W, b)
    assert np.all((sig >= 0) & (sig <= 1)) and np.all(np.isfinite(sig))
    assert np.all(np.abs(cand) <= 1) and np.all(np.abs(tc) <= 1)


def test_lstm_shape_errors():
    with pytest.raises(DataError):
        lstm_forward(np.zeros((3, 5)), np.zeros((128, 64)), np.zeros(128))
