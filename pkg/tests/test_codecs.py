import struct

import numpy as np
import pytest

from hypertopo.errors import (BadMagicError, DimensionOverflowError, MalformedHeaderError,
                              TruncatedPayloadError, ValueRangeError)
from hypertopo.harness.codecs import (decode_pgm, decode_pmap, read_mask, read_prediction,
                                      read_probmap, write_mask, write_probmap)


def test_mask_round_trip(tmp_path):
    m = (np.random.default_rng(0).random((7, 11)) < 0.5).astype(np.uint8)
    write_mask(m, tmp_path / "m.pgm")
    out = read_mask(tmp_path / "m.pgm")
    np.testing.assert_array_equal(out, m)
    assert out.dtype == np.uint8


def test_pgm_all_ones():
    m = decode_pgm(b"P5 3 3 255\n" + bytes([255] * 9))
    np.testing.assert_array_equal(m, np.ones((3, 3)))


def test_pgm_threshold_and_comments():
    m = decode_pgm(b"P5\n# made by hand\n2 1\n255\n" + bytes([127, 128]))
    np.testing.assert_array_equal(m, [[0, 1]])


def test_pgm_width_before_height():
    m = decode_pgm(b"P5 3 1 255\n" + bytes([0, 255, 0]))
    assert m.shape == (1, 3)


@pytest.mark.parametrize("data,error", [
    (b"P5 3 3 65535\n" + bytes(18), MalformedHeaderError),
    (b"P2 3 3 255\n" + bytes(9), MalformedHeaderError),
    (b"P5 3 x 255\n" + bytes(9), MalformedHeaderError),
    (b"P5 3 3", MalformedHeaderError),
    (b"P5 0 3 255\n", MalformedHeaderError),
    (b"P5 99999999 3 255\n", DimensionOverflowError),
    (b"P5 3 3 255\n" + bytes(8), TruncatedPayloadError),
])
def test_pgm_errors(data, error):
    with pytest.raises(error):
        decode_pgm(data)


def test_probmap_round_trip_is_bit_identical(tmp_path):
    p = np.random.default_rng(1).random((5, 3)).astype(np.float32)
    write_probmap(p, tmp_path / "p.pmap")
    out = read_probmap(tmp_path / "p.pmap")
    assert out.astype(np.float32).tobytes() == p.tobytes()
    assert (tmp_path / "p.pmap").read_bytes()[:9] == b"PMAP1\n5 3"


def pmap_bytes(h, w, values):
    return b"PMAP1\n" + f"{h} {w}\n".encode() + struct.pack(f"<{len(values)}f", *values)


def test_probmap_example_payload():
    np.testing.assert_array_equal(decode_pmap(pmap_bytes(2, 2, [0.5] * 4)), np.full((2, 2), 0.5))


@pytest.mark.parametrize("data,error", [
    (pmap_bytes(1, 2, [0.5, 1.5]), ValueRangeError),
    (pmap_bytes(1, 2, [0.5, float("nan")]), ValueRangeError),
    (b"PMAP2\n1 1\n" + bytes(4), BadMagicError),
    (pmap_bytes(2, 2, [0.5] * 3), TruncatedPayloadError),
    (b"PMAP1\n2x2\n" + bytes(16), MalformedHeaderError),
    (b"PMAP1\n2 2", MalformedHeaderError),
    (b"PMAP1\n70000 1\n", DimensionOverflowError),
])
def test_probmap_errors(data, error):
    with pytest.raises(error):
        decode_pmap(data)


def test_read_prediction_accepts_both(tmp_path):
    m = np.eye(3, dtype=np.uint8)
    write_mask(m, tmp_path / "a.pgm")
    write_probmap(m * 0.75, tmp_path / "b.pmap")
    np.testing.assert_array_equal(read_prediction(tmp_path / "a.pgm"), m.astype(float))
    np.testing.assert_array_equal(read_prediction(tmp_path / "b.pmap"), m * 0.75)
    (tmp_path / "c.pgm").write_bytes(b"junk")
    with pytest.raises(BadMagicError):
        read_prediction(tmp_path / "c.pgm")
