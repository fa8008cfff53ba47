"""Modem tests: bit mapping, cyclic prefix framing, ML detection, demapping."""

import dataclasses

import numpy as np
import pytest

from cskfde import colorimetry as col
from cskfde import modem
from cskfde.errors import IndexOutOfRange, InvalidPrefix, LengthMismatch


@pytest.fixture(scope="module")
def q4():
    return col.build_qled_constellation(4)


@pytest.fixture(scope="module")
def q16():
    return col.build_qled_constellation(16)


class TestModulate:
    def test_corner_b_label(self, q4):
        """The all-zero label sits at grid corner B (blue LED only)."""
        out = modem.modulate([0, 0], q4)
        np.testing.assert_allclose(out, [[1, 0, 0, 0]], atol=1e-12)

    def test_empty_bits(self, q4):
        assert modem.modulate([], q4).shape == (0, 4)

    def test_random_bits_yield_constellation_members(self, q16):
        rng = np.random.default_rng(0)
        bits = rng.integers(0, 2, 24)
        out = modem.modulate(bits, q16)
        assert out.shape == (6, 4)
        table = {tuple(np.round(p, 12)) for p in q16.intensities}
        for row in out:
            assert tuple(np.round(row, 12)) in table

    def test_length_mismatch(self, q16):
        with pytest.raises(LengthMismatch):
            modem.modulate([0, 1, 0], q16)


class TestCyclicPrefix:
    def test_paper_vector_form(self):
        """N=4, L=2: payload [0,1,2,3] frames to [2,3,0,1,2,3]."""
        payload = np.arange(4.0)[:, None]
        framed = modem.add_cyclic_prefix(payload, 2)
        np.testing.assert_array_equal(framed.data.ravel(), [2, 3, 0, 1, 2, 3])
        np.testing.assert_array_equal(framed.prefix.ravel(), [2, 3])

    def test_zero_prefix_is_identity(self):
        payload = np.arange(8.0)[:, None]
        framed = modem.add_cyclic_prefix(payload, 0)
        np.testing.assert_array_equal(framed.data, payload)

    def test_default_frame_length(self):
        payload = np.zeros((64, 4))
        framed = modem.add_cyclic_prefix(payload, 8)
        assert framed.data.shape == (72, 4)

    def test_prefix_longer_than_payload(self):
        with pytest.raises(InvalidPrefix):
            modem.add_cyclic_prefix(np.zeros((4, 1)), 5)

    def test_remove_inverts_add(self):
        rng = np.random.default_rng(1)
        payload = rng.random((16, 3))
        framed = modem.add_cyclic_prefix(payload, 4)
        np.testing.assert_array_equal(
            modem.remove_cyclic_prefix(framed.data, 16, 4), payload)

    def test_remove_drops_leading_samples(self):
        framed = np.arange(72.0)[:, None]
        out = modem.remove_cyclic_prefix(framed, 64, 8)
        np.testing.assert_array_equal(out.ravel(), np.arange(8.0, 72.0))

    def test_remove_length_contract(self):
        with pytest.raises(LengthMismatch):
            modem.remove_cyclic_prefix(np.zeros((71, 4)), 64, 8)

    def test_cp_structure_head_equals_tail(self):
        rng = np.random.default_rng(2)
        payload = rng.random((64, 4))
        framed = modem.add_cyclic_prefix(payload, 8)
        np.testing.assert_array_equal(framed.data[:8], framed.data[-8:])


class TestMlDetect:
    def test_exact_point(self, q16):
        assert modem.ml_detect(q16.intensities[5], q16) == 5

    def test_midpoint_tie_breaks_low(self, q4):
        mid = 0.5 * (q4.intensities[0] + q4.intensities[1])
        assert modem.ml_detect(mid, q4) == 0

    def test_perturbation_within_half_dmin(self, q16):
        """Brute-force d_min oracle: any push below d_min/2 keeps the decision."""
        pts = q16.intensities
        dmin = min(np.linalg.norm(pts[i] - pts[j])
                   for i in range(16) for j in range(i + 1, 16))
        rng = np.random.default_rng(3)
        for _ in range(50):
            idx = rng.integers(0, 16)
            push = rng.normal(size=4)
            push *= 0.49 * dmin / np.linalg.norm(push)
            assert modem.ml_detect(pts[idx] + push, q16) == idx

    def test_common_offset_invariance(self, q16):
        """Shifting sample and alphabet together never changes the argmin."""
        rng = np.random.default_rng(4)
        offset = rng.normal(size=4)
        shifted = dataclasses.replace(q16, intensities=q16.intensities + offset)
        for _ in range(100):
            r = rng.normal(size=4)
            assert modem.ml_detect(r, q16) == modem.ml_detect(r + offset, shifted)

    def test_total_on_wild_inputs(self, q4):
        for r in ([-5, 7, 0.2, 3], [0, 0, 0, 0], [1e6, -1e6, 0, 0]):
            idx = modem.ml_detect(np.array(r, dtype=float), q4)
            assert 0 <= idx < 4

    def test_dimension_contract(self, q4):
        with pytest.raises(LengthMismatch):
            modem.ml_detect(np.zeros(3), q4)


class TestDemap:
    def test_single_symbol_label_lookup(self, q4):
        idx = int(q4.index_of_label()[0b10])
        np.testing.assert_array_equal(modem.demap([idx], q4), [1, 0])

    def test_loopback_identity_channel(self, q16):
        rng = np.random.default_rng(5)
        bits = rng.integers(0, 2, 10_000)
        idx = modem.bits_to_indices(bits, q16)
        detected = modem.ml_detect(q16.intensities[idx], q16)
        np.testing.assert_array_equal(modem.demap(detected, q16), bits)

    def test_full_sweep_256(self):
        c = col.build_qled_constellation(256)
        recovered = modem.demap(np.arange(256), c)
        labels = recovered.reshape(256, 8) @ (1 << np.arange(7, -1, -1))
        assert sorted(labels.tolist()) == list(range(256))
        np.testing.assert_array_equal(labels, c.labels)

    def test_index_out_of_range(self, q4):
        with pytest.raises(IndexOutOfRange):
            modem.demap([4], q4)


@pytest.mark.parametrize("scheme,order", [("tled", 4), ("tled", 8), ("tled", 16),
                                          ("qled", 4), ("qled", 8), ("qled", 16),
                                          ("qled", 64), ("qled", 256)])
def test_noiseless_frame_loopback(scheme, order):
    """modulate -> frame -> unframe -> detect -> demap is bit exact."""
    c = col.build_constellation(scheme, order)
    rng = np.random.default_rng(order)
    bits = rng.integers(0, 2, 64 * c.bits_per_symbol)
    symbols = modem.modulate(bits, c)
    framed = modem.add_cyclic_prefix(symbols, 8)
    payload = modem.remove_cyclic_prefix(framed.data, 64, 8)
    detected = modem.ml_detect(payload, c)
    np.testing.assert_array_equal(modem.demap(detected, c), bits)


class TestPadding:
    def test_partial_block_padded_with_zero_label(self, q4):
        bits = np.ones(10, dtype=np.int64) * 0  # 5 symbols
        padded, n_pad = modem.pad_bits_to_block(bits, q4, 4)
        assert n_pad == 6  # up to 8 symbols = 2 blocks
        assert padded.size == 16
        np.testing.assert_array_equal(padded[10:], 0)

    def test_full_block_not_padded(self, q4):
        bits = np.zeros(8, dtype=np.int64)
        padded, n_pad = modem.pad_bits_to_block(bits, q4, 4)
        assert n_pad == 0
        np.testing.assert_array_equal(padded, bits)

    def test_ragged_bits_rejected(self, q4):
        with pytest.raises(LengthMismatch):
            modem.pad_bits_to_block(np.zeros(3, dtype=np.int64), q4, 4)
