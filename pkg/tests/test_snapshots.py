import struct

import numpy as np
import pytest

from snls import Field, Grid
from snls.snapshots import MAGIC, VERSION, read_snapshot, write_snapshot
from snls.spectral import white_noise


def test_round_trip_bitexact(tmp_path, grid1d):
    f = white_noise(grid1d, np.random.default_rng(1)).to_spectral()
    p = tmp_path / "snap.bin"
    write_snapshot(p, f)
    back = read_snapshot(p)
    assert back.grid == grid1d
    assert np.array_equal(back.data, f.data)


def test_header_layout(tmp_path, grid1d):
    f = Field.zero(grid1d, "spectral")
    p = tmp_path / "snap.bin"
    write_snapshot(p, f)
    raw = p.read_bytes()
    magic, version, d, n, length = struct.unpack("<4sHHId", raw[:20])
    assert magic == MAGIC and version == VERSION
    assert (d, n) == (1, 64)
    assert length == grid1d.length
    assert len(raw) == 20 + 64 * 16


def test_2d_round_trip(tmp_path, grid2d):
    f = white_noise(grid2d, np.random.default_rng(2)).to_spectral()
    p = tmp_path / "snap2.bin"
    write_snapshot(p, f)
    assert np.array_equal(read_snapshot(p).data, f.data)


def test_bad_magic_rejected(tmp_path):
    p = tmp_path / "junk.bin"
    p.write_bytes(b"XXXX" + b"\x00" * 32)
    with pytest.raises(ValueError, match="magic"):
        read_snapshot(p)


def test_truncated_payload_rejected(tmp_path, grid1d):
    f = Field.zero(grid1d, "spectral")
    p = tmp_path / "snap.bin"
    write_snapshot(p, f)
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(ValueError, match="payload"):
        read_snapshot(p)
