"""Monte Carlo experiment engine: BER curves, bisected optical power
requirements and the OOK normalisation baseline.

Optical SNR convention
----------------------
The transmitted CSK envelope is constant with total optical power P_t = 1 W,
so the operating point is written as an optical signal-to-noise ratio

    SNR_o [dB] = 10 * log10(P_t / sigma)

with ``sigma`` the per-detector noise deviation.  Optical power ratios use
10*log10, which makes the equivalent electrical (post-photodiode, square-law)
ratio twice the optical dB value.

Power requirements are reported relative to on-off keying over an AWGN
channel at the same noise level and unit responsivity: an OOK link with
levels {0, 2P} and threshold P needs average power P_ook = sigma * Qinv(ber)
(see :func:`ook_reference`), i.e. an ON-level of 2 * P_ook.  Since the CSK
envelope is constant (peak equals average), the requirement compares like
with like through the OOK ON-level:

    requirement [dB] = SNR_o* - 10 * log10(2 * Qinv(target_ber))

where SNR_o* is the bisected threshold of the scheme.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
import scipy.fft as _sfft
from scipy.signal import lfilter
from scipy.special import erfcinv

from . import channel as chan
from . import colorimetry, fde
from .errors import InvalidParameter, InvalidTarget

UNACHIEVABLE = "unachievable"

_POPCOUNT = np.array([bin(i).count("1") for i in range(1 << 12)], dtype=np.int64)


def qfunc_inv(p: float) -> float:
    """Inverse Gaussian tail function Q^-1."""
    return float(np.sqrt(2.0) * erfcinv(2.0 * p))


def ook_reference(target_ber: float, sigma: float) -> float:
    """Average optical power OOK needs for ``target_ber`` at noise ``sigma``.

    Convention: unipolar levels {0, 2P}, unit responsivity, threshold at P,
    so BER = Q(P / sigma) and the required average power is sigma * Qinv.
    """
    if not 0.0 < target_ber < 0.5:
        raise InvalidTarget(f"target BER must be in (0, 0.5), got {target_ber}")
    if sigma < 0:
        raise InvalidParameter(f"noise deviation must be >= 0, got {sigma}")
    return sigma * qfunc_inv(target_ber)


def sigma_from_snr(snr_o_db: float) -> float:
    """Noise deviation at unit transmit power for the given optical SNR."""
    return 10.0 ** (-snr_o_db / 10.0)


def ook_normalisation_db(target_ber: float) -> float:
    """SNR_o at which OOK reaches ``target_ber`` (its ON-level referenced)."""
    return 10.0 * np.log10(2.0 * qfunc_inv(target_ber))


def data_rate(order: int, n: int = 64, cp: int = 8, symbol_rate: float = 24e6) -> float:
    """Payload bit rate (N / (N + L)) * Rs * log2(M); cp = 0 gives the unframed rate."""
    if order < 2 or n < 1 or cp < 0 or symbol_rate <= 0:
        raise InvalidParameter("invalid rate parameters")
    return (n / (n + cp)) * symbol_rate * np.log2(order)


def wilson_interval(errors: int, trials: int, z: float = 1.96):
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return 0.0, 1.0
    p = errors / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = (z / denom) * np.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return max(centre - half, 0.0), min(centre + half, 1.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulated link configuration."""

    scheme: str = colorimetry.QLED
    order: int = 4
    dt: float = 0.0
    fde: bool = True
    n: int = 64
    cp: int = 8
    symbol_rate: float = 24e6
    target_ber: float = 1e-6
    min_bit_errors: int = 100
    max_bits: int = 200_000_000
    seed: int = 0
    n_taps: int = chan.DEFAULT_N_TAPS

    def __post_init__(self):
        memory = self.n_taps - 1 if self.dt > 0 else 0
        if self.cp < memory:
            raise InvalidParameter(
                f"cyclic prefix {self.cp} shorter than channel memory {memory}")
        if self.n < 2 or (self.n & (self.n - 1)) != 0:
            raise InvalidParameter(f"N must be a power of two, got {self.n}")


@dataclass(frozen=True)
class BerPoint:
    snr_o_db: float
    ber: float
    bits: int
    errors: int
    censored: bool = False  # hit max_bits before min_bit_errors


@dataclass
class BerCurve:
    config: ExperimentConfig
    points: list = field(default_factory=list)

    def is_monotone_non_increasing(self, z: float = 1.96) -> bool:
        """BER non-increasing in SNR beyond the Wilson confidence overlap.

        A later (higher-SNR) point only counts as a violation when its whole
        interval sits above the earlier point's interval.
        """
        pts = sorted(self.points, key=lambda p: p.snr_o_db)
        for a, b in zip(pts, pts[1:]):
            _, hi_a = wilson_interval(a.errors, a.bits, z)
            lo_b, _ = wilson_interval(b.errors, b.bits, z)
            if lo_b > hi_a:
                return False
        return True


@dataclass(frozen=True)
class PowerRequirement:
    config: ExperimentConfig
    target_ber: float
    achievable: bool
    snr_o_db: Optional[float]        # absolute bisected threshold
    requirement_db: Optional[float]  # relative to the OOK reference
    bracket_db: float

    @property
    def as_table_value(self) -> str:
        return f"{self.requirement_db:.2f}" if self.achievable else "inf"


class LinkSimulator:
    """Vectorised end-to-end link for one configuration.

    The chain per run: bits -> constellation mapping -> N-symbol blocks with
    a length-L cyclic prefix -> per-band linear convolution with the channel
    taps -> CIL mixing -> detector AWGN -> colour calibration -> CP removal
    -> (optional) per-block zero-forcing FDE -> ML detection -> bit errors.
    Uniform random symbol indices are drawn directly, which is equivalent to
    mapping uniform random bits.  The first block of every stream is a
    warm-up excluded from error counting.
    """

    def __init__(self, config: ExperimentConfig,
                 constellation: Optional[colorimetry.Constellation] = None,
                 g_matrix: Optional[np.ndarray] = None,
                 dtype=np.float32):
        self.config = config
        self.constellation = constellation or colorimetry.build_constellation(
            config.scheme, config.order)
        if g_matrix is None:
            g_matrix = chan.G_TLED if self.constellation.scheme == colorimetry.TLED \
                else chan.G_QLED
        self.g = np.asarray(g_matrix, dtype=dtype)
        self.g_inv = np.linalg.inv(np.asarray(g_matrix, dtype=float)).astype(dtype)
        self.taps = chan.discretize_impulse_response(
            config.dt, config.order, config.symbol_rate, config.n_taps).astype(dtype)
        self.k = self.constellation.bits_per_symbol
        self.n_bands = self.constellation.n_bands
        self.points = self.constellation.intensities.astype(dtype)
        self.ct, self.half_norms = (self.points.T.copy(),
                                    (0.5 * np.sum(self.points ** 2, axis=1)))
        self.labels = self.constellation.labels
        zfe = fde.build_zfe(self.taps.astype(float), config.n)
        # real-input FFT needs only the first N/2 + 1 bins
        ctype = np.complex64 if dtype == np.float32 else np.complex128
        self.zfe_half = zfe.coefficients[:config.n // 2 + 1].astype(ctype)
        self.dtype = dtype

    def run(self, sigma: float, n_bits: int, seed,
            stop_target: Optional[float] = None,
            min_bit_errors: Optional[int] = None,
            chunk_blocks: int = 4096):
        """Accumulate bit errors until ``n_bits``, the error floor of the
        stopping rule, or a decisive Wilson comparison against ``stop_target``.

        Returns (errors, bits, censored).
        """
        cfg = self.config
        n, cp = cfg.n, cfg.cp
        min_errors = cfg.min_bit_errors if min_bit_errors is None else min_bit_errors
        rng = chan.make_rng(seed)
        n_blocks_total = max(int(np.ceil(n_bits / (self.k * n))), 1)
        errors = 0
        bits = 0
        zi = np.zeros((len(self.taps) - 1, self.n_bands), dtype=self.dtype)
        warmup = 1  # first block of the stream is not counted
        done = 0
        while done < n_blocks_total:
            nb = int(min(chunk_blocks, n_blocks_total - done + warmup))
            tx_idx = rng.integers(0, self.constellation.order, size=nb * n)
            tx = self.points[tx_idx].reshape(nb, n, self.n_bands)
            framed = np.concatenate([tx[:, n - cp:], tx], axis=1) if cp else tx
            serial = framed.reshape(nb * (n + cp), self.n_bands)
            dispersed, zi = lfilter(self.taps, np.array([1.0], dtype=self.dtype),
                                    serial, axis=0, zi=zi)
            rx = dispersed @ self.g.T
            if sigma > 0:
                rx += sigma * rng.standard_normal(rx.shape, dtype=self.dtype)
            rx = rx @ self.g_inv.T
            payload = rx.reshape(nb, n + cp, self.n_bands)[:, cp:]
            if cfg.fde:
                spectrum = _sfft.rfft(payload, axis=1)
                spectrum *= self.zfe_half[None, :, None]
                payload = _sfft.irfft(spectrum, n=n, axis=1)
            received = payload.reshape(nb * n, self.n_bands)
            metric = received @ self.ct - self.half_norms
            det_idx = np.argmax(metric, axis=1)
            diff = self.labels[det_idx] ^ self.labels[tx_idx]
            if warmup:
                diff = diff[n:]
                counted = nb - 1
                warmup = 0
            else:
                counted = nb
            errors += int(_POPCOUNT[diff].sum())
            bits += counted * n * self.k
            done += counted
            if errors >= min_errors:
                if stop_target is None:
                    return errors, bits, False
                lo, hi = wilson_interval(errors, bits)
                if lo > stop_target:
                    return errors, bits, False
                if hi < stop_target and errors >= min_errors:
                    return errors, bits, False
            elif stop_target is not None and bits > 0:
                _, hi = wilson_interval(errors, bits)
                if hi < stop_target:
                    return errors, bits, True
        return errors, bits, errors < min_errors


def run_ber_point(config: ExperimentConfig, snr_o_db: float,
                  simulator: Optional[LinkSimulator] = None,
                  seed=None, stop_target: Optional[float] = None) -> BerPoint:
    """Measure BER at one optical SNR point.

    Runs until ``min_bit_errors`` errors or ``max_bits`` bits; a point that
    hits the bit budget first is flagged censored.  Deterministic per seed.
    """
    sim = simulator or LinkSimulator(config)
    sigma = sigma_from_snr(snr_o_db)
    errors, bits, censored = sim.run(
        sigma, config.max_bits, config.seed if seed is None else seed,
        stop_target=stop_target)
    ber = errors / bits if bits else 0.0
    return BerPoint(snr_o_db, ber, bits, errors, censored)


def run_ber_curve(config: ExperimentConfig, snr_grid: Sequence[float]) -> BerCurve:
    """BER at each SNR in the grid, one derived RNG stream per point."""
    sim = LinkSimulator(config)
    curve = BerCurve(config)
    for i, snr in enumerate(snr_grid):
        point = run_ber_point(config, snr, simulator=sim,
                              seed=(config.seed, i))
        curve.points.append(point)
    return curve


def find_power_requirement(config: ExperimentConfig, target_ber: Optional[float] = None,
                           snr_lo: float = 0.0, snr_hi: float = 40.0,
                           bracket_db: float = 0.1,
                           constellation=None, g_matrix=None) -> PowerRequirement:
    """Bisect the optical SNR threshold reaching ``target_ber``.

    If the BER at ``snr_hi`` still exceeds the target the requirement is
    reported unachievable (the irreducible-floor case).  The result is the
    threshold in dB relative to the OOK reference at the same noise level.
    """
    target = config.target_ber if target_ber is None else target_ber
    if not 0.0 < target < 0.5:
        raise InvalidTarget(f"target BER must be in (0, 0.5), got {target}")
    if snr_lo >= snr_hi:
        raise InvalidParameter("snr_lo must be below snr_hi")
    sim = LinkSimulator(config, constellation, g_matrix)
    stream = iter(range(1 << 30))

    def measure(snr):
        return run_ber_point(config, snr, simulator=sim,
                             seed=(config.seed, next(stream)),
                             stop_target=target)

    top = measure(snr_hi)
    if top.ber > target:
        return PowerRequirement(config, target, False, None, None, np.inf)
    lo, hi = snr_lo, snr_hi
    probe = measure(lo)
    while probe.ber <= target and lo > -30.0:
        hi = lo
        lo -= 10.0
        probe = measure(lo)
    while hi - lo > bracket_db:
        mid = 0.5 * (lo + hi)
        point = measure(mid)
        if point.ber > target:
            lo = mid
        else:
            hi = mid
    return PowerRequirement(config, target, True, hi,
                            hi - ook_normalisation_db(target), hi - lo)


def sweep_dt(config: ExperimentConfig, dt_values: Sequence[float],
             target_ber: Optional[float] = None,
             snr_hi: float = 40.0, constellation=None, g_matrix=None) -> list:
    """One bisected PowerRequirement per normalised delay spread."""
    out = []
    for dt in dt_values:
        cfg = replace(config, dt=float(dt))
        out.append(find_power_requirement(cfg, target_ber, snr_hi=snr_hi,
                                          constellation=constellation,
                                          g_matrix=g_matrix))
    return out


# --- result serialisation ---------------------------------------------------

def _open_out(path_or_file):
    if hasattr(path_or_file, "write"):
        return path_or_file, False
    return open(path_or_file, "w", newline=""), True


def write_curve_csv(path, curves) -> None:
    """One row per measured point: scheme, M, Dt, fde, snr_db, ber, bits, errors."""
    if isinstance(curves, BerCurve):
        curves = [curves]
    fh, close = _open_out(path)
    try:
        w = csv.writer(fh)
        w.writerow(["scheme", "order", "dt", "fde", "snr_o_db", "ber",
                    "bits", "errors", "censored"])
        for curve in curves:
            c = curve.config
            for p in curve.points:
                w.writerow([c.scheme, c.order, f"{c.dt:g}", int(c.fde),
                            f"{p.snr_o_db:.4f}", f"{p.ber:.6e}",
                            p.bits, p.errors, int(p.censored)])
    finally:
        if close:
            fh.close()


def write_requirements_csv(path, requirements) -> None:
    fh, close = _open_out(path)
    try:
        w = csv.writer(fh)
        w.writerow(["scheme", "order", "dt", "fde", "target_ber",
                    "requirement_db", "snr_o_db", "bracket_db"])
        for r in requirements:
            c = r.config
            w.writerow([c.scheme, c.order, f"{c.dt:g}", int(c.fde),
                        f"{r.target_ber:g}", r.as_table_value,
                        "" if r.snr_o_db is None else f"{r.snr_o_db:.3f}",
                        "" if not np.isfinite(r.bracket_db) else f"{r.bracket_db:.3f}"])
    finally:
        if close:
            fh.close()


def requirements_summary(requirements) -> dict:
    """JSON-ready dict mirroring the published table layout."""
    entries = []
    for r in requirements:
        c = r.config
        entries.append({
            "scheme": c.scheme,
            "order": c.order,
            "dt": c.dt,
            "fde": bool(c.fde),
            "target_ber": r.target_ber,
            "requirement_db": None if not r.achievable else round(r.requirement_db, 3),
            "achievable": r.achievable,
        })
    return {"normalisation": "OOK over AWGN at equal noise level",
            "entries": entries}


def write_requirements_json(path, requirements) -> None:
    with open(path, "w") as fh:
        json.dump(requirements_summary(requirements), fh, indent=2, sort_keys=True)
        fh.write("\n")
