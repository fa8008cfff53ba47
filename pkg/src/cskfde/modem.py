"""Bit-level modem: symbol mapping, cyclic-prefix framing and ML detection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .colorimetry import Constellation
from .errors import IndexOutOfRange, InvalidPrefix, LengthMismatch


@dataclass(frozen=True)
class FramedBlock:
    """One cyclic-prefixed block: the last ``n_prefix`` payload symbols are
    copied to the front, so ``data`` holds N + L rows of per-band samples."""

    data: np.ndarray  # (N + L, n_bands)
    n_payload: int
    n_prefix: int

    @property
    def prefix(self) -> np.ndarray:
        return self.data[:self.n_prefix]

    @property
    def payload(self) -> np.ndarray:
        return self.data[self.n_prefix:]


def bits_to_indices(bits, constellation: Constellation) -> np.ndarray:
    """Group bits into symbols and map each label to its constellation index."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    k = constellation.bits_per_symbol
    if bits.size % k:
        raise LengthMismatch(f"bit count {bits.size} not divisible by {k}")
    if bits.size == 0:
        return np.empty(0, dtype=np.int64)
    groups = bits.reshape(-1, k)
    weights = 1 << np.arange(k - 1, -1, -1)
    labels = groups @ weights
    return constellation.index_of_label()[labels]


def modulate(bits, constellation: Constellation) -> np.ndarray:
    """Map a bit sequence to intensity vectors, k = log2(M) bits per symbol."""
    idx = bits_to_indices(bits, constellation)
    return constellation.intensities[idx]


def pad_bits_to_block(bits, constellation: Constellation, block_len: int):
    """Zero-pad a bit sequence so it fills whole N-symbol blocks.

    The pad repeats the all-zeros label symbol; the returned pad length (in
    bits) lets the caller exclude padding from error counting.
    """
    bits = np.asarray(bits, dtype=np.int64).ravel()
    k = constellation.bits_per_symbol
    if bits.size % k:
        raise LengthMismatch(f"bit count {bits.size} not divisible by {k}")
    block_bits = block_len * k
    n_pad = (-bits.size) % block_bits
    if n_pad == 0:
        return bits, 0
    return np.concatenate([bits, np.zeros(n_pad, dtype=np.int64)]), n_pad


def add_cyclic_prefix(block: np.ndarray, n_prefix: int) -> FramedBlock:
    """Prepend the last ``n_prefix`` rows of the payload to its front."""
    block = np.atleast_2d(np.asarray(block))
    n = block.shape[0]
    if n_prefix > n:
        raise InvalidPrefix(f"prefix {n_prefix} exceeds payload {n}")
    if n_prefix == 0:
        framed = block
    else:
        framed = np.concatenate([block[n - n_prefix:], block], axis=0)
    return FramedBlock(framed, n, n_prefix)


def remove_cyclic_prefix(framed: np.ndarray, n_payload: int, n_prefix: int) -> np.ndarray:
    """Drop the first ``n_prefix`` rows of a received N + L block."""
    framed = np.atleast_2d(np.asarray(framed))
    if framed.shape[0] != n_payload + n_prefix:
        raise LengthMismatch(
            f"expected {n_payload + n_prefix} rows, got {framed.shape[0]}")
    return framed[n_prefix:]


def detection_metric(constellation: Constellation):
    """Precomputed (Cᵀ, ||c||²/2) pair for the argmin distance rule."""
    pts = constellation.intensities
    return pts.T.copy(), 0.5 * np.sum(pts ** 2, axis=1)


def ml_detect(received, constellation: Constellation) -> np.ndarray:
    """Minimum-Euclidean-distance detection in intensity space.

    Works on one vector or a (n, n_bands) batch; ties resolve to the lowest
    constellation index.  Total on all real inputs.
    """
    r = np.atleast_2d(np.asarray(received, dtype=float))
    if r.shape[1] != constellation.n_bands:
        raise LengthMismatch(
            f"received dimension {r.shape[1]} != {constellation.n_bands} bands")
    ct, half_norms = detection_metric(constellation)
    metric = r @ ct - half_norms
    idx = np.argmax(metric, axis=1)
    return idx if np.asarray(received).ndim > 1 else int(idx[0])


def demap(indices, constellation: Constellation) -> np.ndarray:
    """Concatenate the k-bit labels of the detected constellation points."""
    idx = np.asarray(indices, dtype=np.int64).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= constellation.order):
        raise IndexOutOfRange(f"index outside 0..{constellation.order - 1}")
    k = constellation.bits_per_symbol
    labels = constellation.labels[idx]
    shifts = np.arange(k - 1, -1, -1)
    return ((labels[:, None] >> shifts) & 1).astype(np.int64).ravel()
