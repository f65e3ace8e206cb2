"""Streaming Doppler spread estimator.

Per OFDM symbol the tracker maintains QR-based low-rank recursions for
the 0-lag and beta-lag pilot autocorrelation matrices, selects the
model order with MDL, estimates the noise floor and the correlation
ratio eta, and inverts eta into a Doppler estimate through the series
polynomial.

Two eta routes coexist:

* :func:`eta_estimate` is the diagonal-ratio form operating directly on
  the tracked R factors.
* :func:`step` evaluates eta from the eigendecomposition of low-rank
  projected covariance accumulators carried alongside the QR recursion
  (see ``_accumulate``). The projected form subtracts the noise floor
  without the bias the raw R diagonal picks up at low SNR, which is
  what makes the low-SNR operating points usable.
"""

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .channel import OfdmGeometry


class TrackerError(Exception):
    pass


class EtaUndefinedError(TrackerError):
    """No signal-subspace energy to form the eta denominator."""


@dataclass(frozen=True)
class TrackerConfig:
    alpha: float = 0.995
    beta: int = 1
    max_rank: int = 10
    series_order: int = 8
    newton: numerics.NewtonConfig = field(default_factory=numerics.NewtonConfig)
    geo: OfdmGeometry = field(default_factory=OfdmGeometry)
    warmup_symbols: int = 20

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise TrackerError("alpha must lie in (0, 1)")
        if not (1 <= self.beta <= 4):
            raise TrackerError("beta must be in {1, 2, 3, 4}")
        if self.max_rank < 1:
            raise TrackerError("max_rank must be >= 1")
        if self.series_order < 2:
            raise TrackerError("series_order must be >= 2")


@dataclass(frozen=True)
class EstimateFlags:
    warmup: bool = False
    eta_clamped: bool = False
    not_converged: bool = False

    def labels(self):
        out = []
        if self.warmup:
            out.append("warmup")
        if self.eta_clamped:
            out.append("eta_clamped")
        if self.not_converged:
            out.append("not_converged")
        return out


@dataclass(frozen=True)
class DopplerEstimate:
    n: int
    fd_hat: float
    eta_hat: float
    L_hat: int
    sigma_n2_hat: float
    newton_iters: int
    flags: EstimateFlags


class _LagState:
    """Q/A/C/R quadruple of one low-rank QR recursion."""

    __slots__ = ("q", "a", "c", "r")

    def __init__(self, dim, rank):
        self.reset(dim, rank)

    def reset(self, dim, rank):
        self.q = np.zeros((dim, rank), dtype=np.complex128)
        self.q[:rank, :rank] = np.eye(rank)
        self.a = np.zeros((dim, rank), dtype=np.complex128)
        self.c = np.eye(rank, dtype=np.complex128)
        self.r = np.zeros((rank, rank), dtype=np.complex128)


class TrackerState:
    """Mutable per-stream state; single writer, updates in symbol order."""

    def __init__(self, dim, cfg):
        self.dim = int(dim)
        self.cfg = cfg
        rank = cfg.max_rank
        self.lag0 = _LagState(self.dim, rank)
        self.lagbeta = _LagState(self.dim, rank)
        self.buffer = deque(maxlen=cfg.beta + 1)
        self.n = 0
        # projected covariance accumulators in the lag0 basis
        self.cov0 = np.zeros((rank, rank), dtype=np.complex128)
        self.covb = np.zeros((rank, rank), dtype=np.complex128)
        self.energy = 0.0
        self.last_fd = 0.0
        self._warmup_event = False


def _qr_update(lag, z_times_q, alpha, dim, rank):
    """One exponentially weighted QR recursion step.

    A <- alpha A C + (1 - alpha) (Z Q_prev); QR-factorize; rotate phases
    so diag(R) is real non-negative; C <- Q_prev^H Q_new.
    Returns True if the state had to be re-initialized (rank collapse).
    """
    a_new = alpha * (lag.a @ lag.c) + (1.0 - alpha) * z_times_q
    if not np.all(np.isfinite(a_new.view(np.float64))):
        lag.reset(dim, rank)
        return True
    q_new, r_new = np.linalg.qr(a_new)
    d = np.diagonal(r_new)
    ph = np.where(np.abs(d) > 0.0, d / np.where(np.abs(d) > 0.0, np.abs(d), 1.0), 1.0)
    q_new = q_new * ph[None, :]
    r_new = r_new * np.conj(ph)[:, None]
    lag.c = lag.q.conj().T @ q_new
    lag.q = q_new
    lag.a = a_new
    lag.r = r_new
    return False


def update_lag0(state, snap):
    """Track the 0-lag autocorrelation: Z0 = h h^H, rank-1 right product."""
    h = snap.values
    if h.shape[0] != state.dim:
        raise TrackerError("snapshot length %d != %d" % (h.shape[0], state.dim))
    cfg = state.cfg
    zq = np.outer(h, h.conj() @ state.lag0.q)
    if _qr_update(state.lag0, zq, cfg.alpha, state.dim, cfg.max_rank):
        state._warmup_event = True
    return state


def update_lagbeta(state, snap):
    """Track the beta-lag autocorrelation: Z_beta = h(n) h(n-beta)^H.

    A no-op with the warmup event set while fewer than beta prior
    snapshots are buffered.
    """
    cfg = state.cfg
    if len(state.buffer) < cfg.beta:
        state._warmup_event = True
        return state
    h = snap.values
    h_lag = state.buffer[-cfg.beta]
    zq = np.outer(h, h_lag.conj() @ state.lagbeta.q)
    if _qr_update(state.lagbeta, zq, cfg.alpha, state.dim, cfg.max_rank):
        state._warmup_event = True
    return state


def _accumulate(state, snap):
    """Advance the projected covariance accumulators in the lag0 basis.

    With y = Q0(n)^H h(n) and C0 = Q0(n-1)^H Q0(n):
    G0 <- alpha C0^H G0 C0 + (1-alpha) y y^H, and likewise for the
    beta-lag accumulator with the buffered snapshot; the C0 transport
    keeps past contributions expressed in the current basis. A scalar
    exponentially weighted ||h||^2 tracks the total energy for the
    trace-based noise floor.
    """
    cfg = state.cfg
    alpha = cfg.alpha
    h = snap.values
    c0 = state.lag0.c
    y = state.lag0.q.conj().T @ h
    state.energy = alpha * state.energy + (1.0 - alpha) * float(np.real(h.conj() @ h))
    state.cov0 = alpha * (c0.conj().T @ state.cov0 @ c0) + (1.0 - alpha) * np.outer(y, y.conj())
    if len(state.buffer) >= cfg.beta:
        y_lag = state.lag0.q.conj().T @ state.buffer[-cfg.beta]
        state.covb = alpha * (c0.conj().T @ state.covb @ c0) + (1.0 - alpha) * np.outer(y, y_lag.conj())


def mdl_order(eigs, n_eff):
    """Minimum description length model order from descending eigenvalues.

    Returns argmin over k in [0, L_m - 1] of
    -n_eff (L_m - k) ln(geoMean / arithMean of the trailing L_m - k
    eigenvalues) + k (2 L_m - k) ln(n_eff) / 2.
    """
    eigs = np.asarray(eigs, dtype=float)
    lm = eigs.size
    if n_eff < lm:
        raise TrackerError("n_eff must be >= the eigenvalue count")
    if np.any(np.diff(eigs) > 1e-12 * max(1.0, abs(eigs[0]))):
        raise TrackerError("eigenvalues must be sorted descending")
    eigs = np.maximum(eigs, 1e-15)
    logs = np.log(eigs)
    best_k, best_val = 0, math.inf
    for k in range(lm):
        tail = lm - k
        geo = logs[k:].mean()
        arith = eigs[k:].mean()
        val = -n_eff * tail * (geo - math.log(arith)) \
            + 0.5 * k * (2 * lm - k) * math.log(n_eff)
        if val < best_val:
            best_k, best_val = k, val
    return best_k


def noise_floor(eigs, l_hat):
    """Mean of the trailing tracked eigenvalues below the signal order."""
    eigs = np.asarray(eigs, dtype=float)
    if l_hat >= eigs.size:
        raise TrackerError("no trailing eigenvalues left for the noise floor")
    return float(eigs[l_hat:].mean())


def eta_estimate(state, l_hat, sigma_n2):
    """Diagonal-ratio eta over the top-L_hat tracked R entries.

    sqrt(sum |R_beta[l,l]|^2 / sum |R_0[l,l] - sigma_n2|^2); values above
    1 pass through (clamping belongs to the inversion step).
    """
    if l_hat < 1:
        raise TrackerError("l_hat must be >= 1")
    d0 = np.real(np.diagonal(state.lag0.r))[:l_hat]
    db = np.diagonal(state.lagbeta.r)[:l_hat]
    den = float(np.sum(np.abs(d0 - sigma_n2) ** 2))
    if den <= 0.0:
        raise EtaUndefinedError("no signal subspace energy in R_0")
    num = float(np.sum(np.abs(db) ** 2))
    return math.sqrt(num / den)


def _eta_subspace(state, l_hat, sigma_n2, eigs, vecs):
    """Eta from the projected covariance accumulators (see module doc)."""
    proj_b = vecs.conj().T @ state.covb @ vecs
    num = float(np.sum(np.abs(np.diagonal(proj_b))[:l_hat] ** 2))
    den = float(np.sum((eigs[:l_hat] - sigma_n2) ** 2))
    if den <= 0.0:
        raise EtaUndefinedError("no signal subspace energy")
    return math.sqrt(num / den)


def step(state, snap, cfg=None):
    """Process one snapshot and emit a per-symbol Doppler estimate.

    Inner numerics failures surface as flags, never as exceptions, so a
    stream keeps running through transient bad estimates.
    """
    cfg = cfg or state.cfg
    state._warmup_event = False
    update_lag0(state, snap)
    update_lagbeta(state, snap)
    _accumulate(state, snap)
    n = state.n
    state.buffer.append(snap.values)
    state.n = n + 1

    warmup = n < max(cfg.beta, cfg.warmup_symbols) or state._warmup_event
    if warmup:
        return DopplerEstimate(n=n, fd_hat=state.last_fd, eta_hat=math.nan,
                               L_hat=0, sigma_n2_hat=math.nan, newton_iters=0,
                               flags=EstimateFlags(warmup=True))

    herm = 0.5 * (state.cov0 + state.cov0.conj().T)
    eigs, vecs = np.linalg.eigh(herm)
    eigs = eigs[::-1]
    vecs = vecs[:, ::-1]
    n_eff = min(n + 1, int(round(1.0 / (1.0 - cfg.alpha))))
    l_hat = max(mdl_order(np.maximum(eigs, 0.0), max(n_eff, cfg.max_rank)), 1)
    sigma_n2 = max((state.energy - float(eigs[:l_hat].sum())) / (state.dim - l_hat), 0.0)

    try:
        eta = _eta_subspace(state, l_hat, sigma_n2, eigs, vecs)
    except EtaUndefinedError:
        return DopplerEstimate(n=n, fd_hat=state.last_fd, eta_hat=math.nan,
                               L_hat=l_hat, sigma_n2_hat=sigma_n2, newton_iters=0,
                               flags=EstimateFlags(not_converged=True))

    if eta >= 1.0:
        state.last_fd = 0.0
        return DopplerEstimate(n=n, fd_hat=0.0, eta_hat=eta, L_hat=l_hat,
                               sigma_n2_hat=sigma_n2, newton_iters=0,
                               flags=EstimateFlags(eta_clamped=True))

    phi = cfg.beta * (1.0 + cfg.geo.r_cp)
    try:
        poly = numerics.poly_coeffs(eta, phi, cfg.series_order)
        result = numerics.newton_solve(poly, cfg.newton)
        fd = numerics.doppler_from_root(result.root, cfg.geo.n_tones,
                                        cfg.geo.t_sample)
    except numerics.NumericsError:
        return DopplerEstimate(n=n, fd_hat=state.last_fd, eta_hat=eta,
                               L_hat=l_hat, sigma_n2_hat=sigma_n2, newton_iters=0,
                               flags=EstimateFlags(not_converged=True))
    state.last_fd = fd
    return DopplerEstimate(n=n, fd_hat=fd, eta_hat=eta, L_hat=l_hat,
                           sigma_n2_hat=sigma_n2, newton_iters=result.iterations,
                           flags=EstimateFlags(not_converged=not result.converged))
