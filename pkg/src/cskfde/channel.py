"""Diffuse optical wireless channel: exponential-decay dispersion, colour
cross-talk / insertion loss, additive white Gaussian detector noise and the
effective-responsivity band-overlap integral."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import (
    DimensionMismatch,
    EmptySupport,
    InvalidParameter,
    SingularMatrix,
)

# Cross-talk and insertion-loss (CIL) matrices of effective responsivities
# for the shipped front ends.  Rows are receive bands, columns transmit bands.
# TLED order (R, Y, B); QLED order (B, C, Y, R).
G_TLED = np.array([[0.271, 0.030, 0.0],
                   [0.0,   0.255, 0.0],
                   [0.0,   0.0,   0.200]])

G_QLED = np.array([[0.200, 0.003, 0.0,   0.0],
                   [0.007, 0.220, 0.003, 0.0],
                   [0.0,   0.002, 0.255, 0.0],
                   [0.0,   0.0,   0.030, 0.271]])

DEFAULT_N_TAPS = 8


def discretize_impulse_response(dt: float, order: int, symbol_rate: float,
                                n_taps: int = DEFAULT_N_TAPS) -> np.ndarray:
    """Symbol-spaced taps of the exponential-decay impulse response.

    ``dt`` is the rms delay spread normalised to the bit duration
    (D_rms / T_b with D_rms = tau / 2), so tau = 2 * dt * T_b and the taps
    follow h[k] proportional to exp(-k * Ts / tau), truncated to ``n_taps``
    and renormalised to unit sum.  dt = 0 collapses to the identity channel.
    """
    if order < 2:
        raise InvalidParameter(f"modulation order must be >= 2, got {order}")
    if symbol_rate <= 0:
        raise InvalidParameter(f"symbol rate must be positive, got {symbol_rate}")
    if dt < 0:
        raise InvalidParameter(f"normalised delay spread must be >= 0, got {dt}")
    if n_taps < 1:
        raise InvalidParameter(f"need at least one tap, got {n_taps}")
    taps = np.zeros(n_taps)
    if dt == 0:
        taps[0] = 1.0
        return taps
    k = np.log2(order)
    ts_over_tau = k / (2.0 * dt)  # Ts / tau with tau = 2 dt Tb, Tb = Ts / k
    taps = np.exp(-np.arange(n_taps) * ts_over_tau)
    return taps / taps.sum()


@dataclass(frozen=True)
class ChannelModel:
    """Discretised diffuse channel for one (dt, M, Rs) operating point."""

    dt: float
    taps: np.ndarray
    ts: float
    tb: float

    @classmethod
    def from_parameters(cls, dt: float, order: int, symbol_rate: float,
                        n_taps: int = DEFAULT_N_TAPS) -> "ChannelModel":
        taps = discretize_impulse_response(dt, order, symbol_rate, n_taps)
        ts = 1.0 / symbol_rate
        tb = ts / np.log2(order)
        return cls(dt, taps, ts, tb)

    @property
    def tau(self) -> float:
        return 2.0 * self.dt * self.tb


@dataclass(frozen=True)
class NoiseModel:
    """Per-detector AWGN level; sigma = sqrt(No / 2) for single-sided PSD No."""

    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise InvalidParameter(f"noise deviation must be >= 0, got {self.sigma}")

    @classmethod
    def from_psd(cls, no: float) -> "NoiseModel":
        if no < 0:
            raise InvalidParameter(f"noise PSD must be >= 0, got {no}")
        return cls(np.sqrt(no / 2.0))


def make_rng(seed) -> np.random.Generator:
    """Counter-based Philox generator so streams replicate across runs.

    ``seed`` may be an int or a (master_seed, stream_index) pair; the pair is
    used directly as the 128-bit Philox key, which keeps per-point streams
    independent and reproducible.
    """
    if isinstance(seed, tuple):
        key = np.array(seed, dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))
    return np.random.Generator(np.random.Philox(seed))


def apply_channel(tx: np.ndarray, model: ChannelModel, g_matrix: np.ndarray,
                  noise: NoiseModel, seed=0, zi=None, rng=None):
    """Propagate per-band symbol streams through the diffuse channel.

    ``tx`` is (n_samples, n_bands).  Each band sees the same dispersion taps
    (linear convolution over the running stream), the CIL matrix mixes bands
    per sample, then i.i.d. Gaussian noise is added at each detector.
    Passing ``zi`` (and reusing the returned filter state) continues one
    stream across successive calls.  Deterministic for a fixed seed.
    """
    tx = np.atleast_2d(np.asarray(tx, dtype=float))
    n_bands = tx.shape[1]
    if g_matrix.shape != (n_bands, n_bands):
        raise DimensionMismatch(
            f"CIL matrix {g_matrix.shape} does not match {n_bands} bands")
    if zi is None:
        zi = np.zeros((len(model.taps) - 1, n_bands))
    dispersed, zf = lfilter(model.taps, [1.0], tx, axis=0, zi=zi)
    rx = dispersed @ g_matrix.T
    if noise.sigma > 0:
        gen = rng if rng is not None else make_rng(seed)
        rx = rx + gen.normal(0.0, noise.sigma, size=rx.shape)
    return rx, zf


def calibrate(rx: np.ndarray, g_matrix: np.ndarray) -> np.ndarray:
    """Colour calibration: per-sample multiplication by the inverse CIL matrix."""
    rx = np.atleast_2d(np.asarray(rx, dtype=float))
    if g_matrix.shape[0] != g_matrix.shape[1] or rx.shape[1] != g_matrix.shape[0]:
        raise DimensionMismatch("CIL matrix must be square and match the band count")
    try:
        g_inv = np.linalg.inv(g_matrix)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix("CIL matrix is not invertible") from exc
    if not np.all(np.isfinite(g_inv)):
        raise SingularMatrix("CIL matrix inverse is not finite")
    return rx @ g_inv.T


def _support_slice(values) -> slice:
    nz = np.nonzero(values)[0]
    if nz.size == 0:
        return slice(0, 0)
    return slice(nz[0], nz[-1] + 1)


def effective_responsivity(wavelength_nm, spd, transmissivity, responsivity) -> float:
    """Band-overlap effective responsivity between one source and one detector.

    Trapezoidal ratio of the filtered detected power integral (S * T * R,
    integrated over the filter's passband) to the plain source power integral
    (S over the source's band), with all curves sampled on the common
    ``wavelength_nm`` grid.  The integration windows follow the curve
    supports, so a sharp-edged filter contributes no ramp outside its band.
    """
    lam = np.asarray(wavelength_nm, dtype=float)
    s = np.asarray(spd, dtype=float)
    t = np.asarray(transmissivity, dtype=float)
    re = np.asarray(responsivity, dtype=float)
    if not (lam.shape == s.shape == t.shape == re.shape):
        raise DimensionMismatch("curves must share the wavelength grid")
    src = _support_slice(s)
    denominator = np.trapezoid(s[src], lam[src])
    if denominator <= 0:
        raise EmptySupport("source SPD integrates to zero")
    band = _support_slice(t)
    numerator = np.trapezoid((s * t * re)[band], lam[band])
    return float(numerator / denominator)


def load_curve(path):
    """Two-column CSV (wavelength nm, value) -> (wavelengths, values)."""
    lam, val = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                lam.append(float(row[0]))
                val.append(float(row[1]))
            except (ValueError, IndexError) as exc:
                raise InvalidParameter(f"bad curve row {row!r}") from exc
    return np.array(lam), np.array(val)
