"""Backend selection for the fading synthesis kernel.

The compiled Cython extension is used when importable; otherwise the
NumPy reference implementation takes over. Set DOPPLERTRACK_PURE_PYTHON=1
to force the reference backend (useful for cross-checking).
"""

import os

from . import _ref

if os.environ.get("DOPPLERTRACK_PURE_PYTHON", "") == "1":
    _impl = _ref
    BACKEND = "numpy"
else:
    try:
        from . import _core as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _ref
        BACKEND = "numpy"


def sos_gains(amps, omegas, phases_i, phases_q, times):
    """Evaluate sum-of-sinusoids path gains on a time grid.

    Parameters
    ----------
    amps : (L,) float array
        Per-path amplitude sqrt(sigma_l^2 / M).
    omegas : (L, M) float array
        Oscillator angular Doppler frequencies.
    phases_i, phases_q : (L, M) float arrays
        In-phase / quadrature oscillator phases.
    times : (nt,) float array
        Evaluation instants in seconds.

    Returns
    -------
    (L, nt) complex array of path gains.
    """
    return _impl.sos_gains(amps, omegas, phases_i, phases_q, times)


def reference_sos_gains(amps, omegas, phases_i, phases_q, times):
    """The NumPy implementation regardless of selected backend."""
    return _ref.sos_gains(amps, omegas, phases_i, phases_q, times)
