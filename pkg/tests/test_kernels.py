import numpy as np
import pytest

from dopplertrack import kernels


def make_inputs(seed=0, n_l=9, n_m=64, n_t=257):
    rng = np.random.default_rng(seed)
    amps = rng.uniform(0.05, 0.4, size=n_l)
    omegas = rng.uniform(-2500.0, 2500.0, size=(n_l, n_m))
    phases_i = rng.uniform(0, 2 * np.pi, size=(n_l, n_m))
    phases_q = rng.uniform(0, 2 * np.pi, size=(n_l, n_m))
    times = np.sort(rng.uniform(0, 0.05, size=n_t))
    return amps, omegas, phases_i, phases_q, times


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "numpy")


def test_backends_agree():
    args = make_inputs()
    active = kernels.sos_gains(*args)
    ref = kernels.reference_sos_gains(*args)
    assert active.shape == ref.shape == (9, 257)
    np.testing.assert_allclose(active, ref, rtol=1e-12, atol=1e-12)


def test_reference_chunking_consistent():
    # long series crosses the internal chunk boundary
    args = make_inputs(seed=3, n_t=5000)
    whole = kernels.reference_sos_gains(*args)
    a, w, pi_, pq, t = args
    parts = np.concatenate([kernels.reference_sos_gains(a, w, pi_, pq, t[:1234]),
                            kernels.reference_sos_gains(a, w, pi_, pq, t[1234:])],
                           axis=1)
    np.testing.assert_allclose(whole, parts, rtol=1e-13)


def test_determinism():
    args = make_inputs(seed=5)
    np.testing.assert_array_equal(kernels.sos_gains(*args), kernels.sos_gains(*args))


def test_zero_frequencies_constant():
    a, w, pi_, pq, t = make_inputs(seed=7)
    w = np.zeros_like(w)
    g = kernels.sos_gains(a, w, pi_, pq, t)
    assert np.max(np.abs(g - g[:, :1])) == 0.0
