import dataclasses
import gzip
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flairbase.errors import (
    DecompressFailed,
    InconsistentHeader,
    NonFiniteData,
    NotNifti,
    TruncatedPayload,
    UnsupportedDatatype,
    ValueRangeError,
)
from flairbase.nifti import encode_header, parse_header, read_header, read_volume, write_volume
from flairbase.volume import Volume


def raw_header(order="<", sizeof=348, dim=(3, 4, 4, 4, 1, 1, 1, 1), code=16, bitpix=32,
               vox_offset=352.0, slope=0.0, inter=0.0, magic=b"n+1\x00"):
    buf = bytearray(348)
    struct.pack_into(order + "i", buf, 0, sizeof)
    struct.pack_into(order + "8h", buf, 40, *dim)
    struct.pack_into(order + "2h", buf, 70, code, bitpix)
    struct.pack_into(order + "8f", buf, 76, 1, 1.5, 2.0, 2.5, 1, 1, 1, 1)
    struct.pack_into(order + "3f", buf, 108, vox_offset, slope, inter)
    buf[344:348] = magic
    return bytes(buf)


def write_raw(path, header, payload, gz=False):
    blob = header + b"\x00" * 4 + payload
    path.write_bytes(gzip.compress(blob) if gz else blob)
    return path


def test_minimal_header():
    h = parse_header(raw_header())
    assert h.sizeof_hdr == 348
    assert h.dims == (4, 4, 4)
    assert h.datatype_code == 16 and h.bitpix == 32
    assert h.endianness == "little"
    assert h.magic == b"n+1\x00"
    assert h.spacing == (1.5, 2.0, 2.5)


def test_big_endian_header_matches_little():
    little = parse_header(raw_header("<"))
    big = parse_header(raw_header(">"))
    assert big.endianness == "big"
    assert dataclasses.replace(big, endianness="little") == little


def test_not_nifti():
    with pytest.raises(NotNifti):
        parse_header(raw_header(sizeof=200))
    with pytest.raises(NotNifti):
        parse_header(raw_header(magic=b"ni1\x00"))
    with pytest.raises(NotNifti, match="got 100"):
        parse_header(b"\x00" * 100)


@pytest.mark.parametrize(
    "kwargs, exc",
    [
        (dict(code=512, bitpix=16), UnsupportedDatatype),
        (dict(code=16, bitpix=16), InconsistentHeader),
        (dict(dim=(0, 4, 4, 4, 1, 1, 1, 1)), InconsistentHeader),
        (dict(dim=(3, 4, 0, 4, 1, 1, 1, 1)), InconsistentHeader),
        (dict(vox_offset=100.0), InconsistentHeader),
    ],
)
def test_header_errors(kwargs, exc):
    with pytest.raises(exc):
        parse_header(raw_header(**kwargs))


def test_read_zeros_unscaled(tmp_path):
    f = write_raw(tmp_path / "z.nii", raw_header(code=4, bitpix=16), b"\x00" * 128)
    v = read_volume(f)
    assert v.dims == (4, 4, 4)
    assert np.array_equal(v.data, np.zeros((4, 4, 4)))


def test_read_scaled_uint8(tmp_path):
    hdr = raw_header(dim=(3, 2, 2, 2, 1, 1, 1, 1), code=2, bitpix=8, slope=2.0, inter=1.0)
    f = write_raw(tmp_path / "u.nii", hdr, bytes(range(8)))
    v = read_volume(f)
    assert v.data.ravel(order="F").tolist() == [1, 3, 5, 7, 9, 11, 13, 15]


def test_linear_order_is_x_fastest(tmp_path):
    hdr = raw_header(dim=(3, 2, 3, 1, 1, 1, 1, 1), code=2, bitpix=8)
    v = read_volume(write_raw(tmp_path / "o.nii", hdr, bytes(range(6))))
    assert v.data[1, 0, 0] == 1
    assert v.data[0, 1, 0] == 2


def test_truncated_payload(tmp_path):
    f = write_raw(tmp_path / "t.nii", raw_header(), b"\x00" * 10)
    with pytest.raises(TruncatedPayload):
        read_volume(f)


def test_bad_gzip(tmp_path):
    f = tmp_path / "bad.nii.gz"
    f.write_bytes(b"\x1f\x8b" + b"garbage" * 10)
    with pytest.raises(DecompressFailed):
        read_volume(f)


def test_nan_payload_rejected(tmp_path):
    hdr = raw_header(dim=(3, 1, 1, 1, 1, 1, 1, 1))
    f = write_raw(tmp_path / "n.nii", hdr, struct.pack("<f", float("nan")))
    with pytest.raises(NonFiniteData):
        read_volume(f)


def test_gzip_detected_by_magic_not_suffix(tmp_path):
    hdr = raw_header(dim=(3, 2, 2, 2, 1, 1, 1, 1), code=2, bitpix=8)
    plain = write_raw(tmp_path / "a.nii", hdr, bytes(range(8)))
    packed = write_raw(tmp_path / "b.nii", hdr, bytes(range(8)), gz=True)
    assert np.array_equal(read_volume(plain).data, read_volume(packed).data)


def test_extension_bytes_skipped(tmp_path):
    hdr = raw_header(dim=(3, 1, 1, 2, 1, 1, 1, 1), code=2, bitpix=8, vox_offset=368.0)
    f = tmp_path / "ext.nii"
    f.write_bytes(hdr + b"\x01\x00\x00\x00" + b"\xff" * 16 + bytes([7, 9]))
    assert read_volume(f).data.ravel().tolist() == [7, 9]


def test_write_single_voxel(tmp_path):
    f = tmp_path / "one.nii"
    write_volume(Volume(np.full((1, 1, 1), 0.5)), f)
    assert f.stat().st_size == 352 + 4
    v = read_volume(f)
    assert v.data[0, 0, 0] == 0.5
    raw = f.read_bytes()
    assert raw[344:348] == b"n+1\x00"
    assert struct.unpack_from("<f", raw, 108)[0] == 352.0


def test_int_range_errors(tmp_path):
    with pytest.raises(ValueRangeError):
        write_volume(Volume(np.full((1, 1, 1), 300.0)), tmp_path / "x.nii", "uint8")
    with pytest.raises(ValueRangeError):
        write_volume(Volume(np.full((1, 1, 1), 1.5)), tmp_path / "x.nii", "int16")
    with pytest.raises(UnsupportedDatatype):
        write_volume(Volume(np.zeros((1, 1, 1))), tmp_path / "x.nii", "complex64")


def test_geometry_passthrough(tmp_path):
    buf = bytearray(raw_header())
    struct.pack_into("<2h", buf, 252, 1, 2)
    struct.pack_into("<12f", buf, 280, *range(12))
    src = write_raw(tmp_path / "g.nii", bytes(buf), b"\x00" * 256)
    v = read_volume(src)
    write_volume(v.with_data(v.data + 1), tmp_path / "out.nii.gz")
    h_in, h_out = read_header(src), read_header(tmp_path / "out.nii.gz")
    assert (h_out.qform_code, h_out.sform_code) == (1, 2)
    assert h_out.srow == h_in.srow
    assert h_out.spacing == h_in.spacing


def test_write_is_deterministic(tmp_path):
    v = Volume(np.arange(24.0).reshape(2, 3, 4))
    write_volume(v, tmp_path / "a.nii.gz")
    write_volume(v, tmp_path / "b.nii.gz")
    assert (tmp_path / "a.nii.gz").read_bytes() == (tmp_path / "b.nii.gz").read_bytes()


def test_encode_header_parses_back():
    for endianness in ("little", "big"):
        h = parse_header(encode_header((5, 6, 7), (0.5, 1.0, 2.0), 64, endianness))
        assert h.dims == (5, 6, 7) and h.datatype_code == 64 and h.bitpix == 64
        assert h.endianness == endianness and h.vox_offset == 352


@st.composite
def float32_volumes(draw):
    dims = draw(st.tuples(*[st.integers(1, 5)] * 3))
    values = draw(
        st.lists(
            st.floats(-1e6, 1e6, allow_nan=False, width=32),
            min_size=int(np.prod(dims)),
            max_size=int(np.prod(dims)),
        )
    )
    return np.array(values, dtype=np.float32).astype(np.float64).reshape(dims)


@settings(max_examples=60, deadline=None)
@given(data=float32_volumes(), endianness=st.sampled_from(["little", "big"]), gz=st.booleans())
def test_float32_round_trip_property(tmp_path_factory, data, endianness, gz):
    path = tmp_path_factory.mktemp("rt") / "v.nii"
    v = Volume(data, (1.0, 2.0, 3.0))
    write_volume(v, path, "float32", gz, endianness)
    back = read_volume(path)
    assert back.dims == v.dims
    assert back.spacing == v.spacing
    assert np.array_equal(back.data, v.data)


def test_gz_and_plain_decode_identically(tmp_path, rng):
    v = Volume(rng.normal(size=(3, 4, 5)).astype(np.float32))
    write_volume(v, tmp_path / "p.nii", "float32", False)
    write_volume(v, tmp_path / "z.nii.gz", "float32", True)
    assert np.array_equal(read_volume(tmp_path / "p.nii").data, read_volume(tmp_path / "z.nii.gz").data)
