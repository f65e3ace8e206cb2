"""NumPy reference implementation of the fading synthesis kernel."""

import numpy as np


def sos_gains(amps, omegas, phases_i, phases_q, times):
    amps = np.asarray(amps, dtype=np.float64)
    omegas = np.asarray(omegas, dtype=np.float64)
    phases_i = np.asarray(phases_i, dtype=np.float64)
    phases_q = np.asarray(phases_q, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    # arg has shape (L, M, nt); chunk over time to bound the workspace
    n_l, n_m = omegas.shape
    n_t = times.shape[0]
    out = np.empty((n_l, n_t), dtype=np.complex128)
    chunk = max(1, int(4e6 // (n_l * n_m)))
    for start in range(0, n_t, chunk):
        t = times[start:start + chunk]
        arg = omegas[:, :, None] * t[None, None, :]
        re = np.cos(arg + phases_i[:, :, None]).sum(axis=1)
        im = np.cos(arg + phases_q[:, :, None]).sum(axis=1)
        out[:, start:start + chunk] = re + 1j * im
    out *= amps[:, None]
    return out
