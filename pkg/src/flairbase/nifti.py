"""Reading and writing single-file NIfTI-1 volumes (``.nii`` / ``.nii.gz``).

Only the fields needed to interpret voxels are decoded into
:class:`NiftiHeader`; orientation fields (qform/sform) are carried along
untouched so an exported anomaly map lands in the same space as its input.
Extension blocks between byte 348 and ``vox_offset`` are skipped on read and
never written.
"""
from __future__ import annotations

import gzip
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DecompressFailed,
    InconsistentHeader,
    NonFiniteData,
    NotNifti,
    TruncatedPayload,
    UnsupportedDatatype,
    ValueRangeError,
)
from .volume import Volume

HEADER_SIZE = 348
VOX_OFFSET = 352
MAGIC = b"n+1\x00"
GZIP_MAGIC = b"\x1f\x8b"

# code -> (numpy kind, bitpix)
DATATYPES = {
    2: ("u1", 8),
    4: ("i2", 16),
    8: ("i4", 32),
    16: ("f4", 32),
    64: ("f8", 64),
}
DATATYPE_NAMES = {"uint8": 2, "int16": 4, "int32": 8, "float32": 16, "float64": 64}

_ORDER = {"little": "<", "big": ">"}


@dataclass(frozen=True)
class NiftiHeader:
    sizeof_hdr: int
    dim: tuple[int, ...]
    datatype_code: int
    bitpix: int
    pixdim: tuple[float, ...]
    vox_offset: float
    scl_slope: float
    scl_inter: float
    magic: bytes
    endianness: str
    # pass-through geometry, never interpreted
    xyzt_units: int = 2
    qform_code: int = 0
    sform_code: int = 0
    quatern: tuple[float, ...] = (0.0,) * 6
    srow: tuple[float, ...] = (0.0,) * 12
    descrip: bytes = b""

    @property
    def dims(self) -> tuple[int, int, int]:
        rank = self.dim[0]
        return tuple(self.dim[i] if i <= rank else 1 for i in (1, 2, 3))

    @property
    def spacing(self) -> tuple[float, float, float]:
        rank = self.dim[0]
        return tuple(float(self.pixdim[i]) if i <= rank else 1.0 for i in (1, 2, 3))

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(_ORDER[self.endianness] + DATATYPES[self.datatype_code][0])

    @property
    def scaled(self) -> bool:
        return self.scl_slope != 0 and np.isfinite(self.scl_slope)


def datatype_code(datatype) -> int:
    if isinstance(datatype, str):
        try:
            return DATATYPE_NAMES[datatype]
        except KeyError:
            raise UnsupportedDatatype(f"unsupported datatype {datatype!r}") from None
    if datatype not in DATATYPES:
        raise UnsupportedDatatype(f"unsupported datatype code {datatype}")
    return int(datatype)


def parse_header(raw: bytes) -> NiftiHeader:
    """Decode the fixed 348-byte NIfTI-1 header, detecting byte order."""
    if len(raw) < HEADER_SIZE:
        raise NotNifti(f"need {HEADER_SIZE} header bytes, got {len(raw)}")
    for endianness, order in _ORDER.items():
        if struct.unpack_from(order + "i", raw, 0)[0] == HEADER_SIZE:
            break
    else:
        raise NotNifti("sizeof_hdr is not 348 in either byte order")

    magic = bytes(raw[344:348])
    if magic != MAGIC:
        raise NotNifti(f"bad magic {magic!r}, expected single-file {MAGIC!r}")

    dim = struct.unpack_from(order + "8h", raw, 40)
    code, bitpix = struct.unpack_from(order + "2h", raw, 70)
    pixdim = struct.unpack_from(order + "8f", raw, 76)
    vox_offset, scl_slope, scl_inter = struct.unpack_from(order + "3f", raw, 108)
    (xyzt_units,) = struct.unpack_from("B", raw, 123)
    descrip = bytes(raw[148:228]).split(b"\x00", 1)[0]
    qform_code, sform_code = struct.unpack_from(order + "2h", raw, 252)
    quatern = struct.unpack_from(order + "6f", raw, 256)
    srow = struct.unpack_from(order + "12f", raw, 280)

    if code not in DATATYPES:
        raise UnsupportedDatatype(f"datatype code {code} not in {sorted(DATATYPES)}")
    if DATATYPES[code][1] != bitpix:
        raise InconsistentHeader(
            f"bitpix {bitpix} does not match datatype {code} ({DATATYPES[code][1]} bits)"
        )
    rank = dim[0]
    if not 1 <= rank <= 7:
        raise InconsistentHeader(f"dim[0]={rank} outside [1, 7]")
    if any(d < 1 for d in dim[1 : rank + 1]):
        raise InconsistentHeader(f"non-positive extent in dim={dim}")
    if not vox_offset >= HEADER_SIZE:
        raise InconsistentHeader(f"vox_offset {vox_offset} < {HEADER_SIZE}")

    return NiftiHeader(
        sizeof_hdr=HEADER_SIZE,
        dim=tuple(int(d) for d in dim),
        datatype_code=int(code),
        bitpix=int(bitpix),
        pixdim=tuple(float(p) for p in pixdim),
        vox_offset=float(vox_offset),
        scl_slope=float(scl_slope),
        scl_inter=float(scl_inter),
        magic=magic,
        endianness=endianness,
        xyzt_units=int(xyzt_units),
        qform_code=int(qform_code),
        sform_code=int(sform_code),
        quatern=tuple(float(q) for q in quatern),
        srow=tuple(float(s) for s in srow),
        descrip=descrip,
    )


def _load_bytes(path) -> bytes:
    raw = Path(path).read_bytes()
    if raw[:2] == GZIP_MAGIC:
        try:
            raw = gzip.decompress(raw)
        except (OSError, EOFError, zlib.error) as exc:
            raise DecompressFailed(f"{path}: {exc}") from exc
    return raw


def read_header(path) -> NiftiHeader:
    return parse_header(_load_bytes(path))


def read_volume(path) -> Volume:
    """Read a NIfTI-1 file into a float64 :class:`Volume`.

    Gzip is detected from the stream magic, not the file name. Only the first
    3D frame of higher-rank images is read. Scaling ``slope * v + inter`` is
    applied when ``scl_slope`` is nonzero.
    """
    raw = _load_bytes(path)
    hdr = parse_header(raw)
    nx, ny, nz = hdr.dims
    count = nx * ny * nz
    offset = int(hdr.vox_offset)
    need = offset + count * hdr.bitpix // 8
    if len(raw) < need:
        raise TruncatedPayload(
            f"{path}: payload needs {need} bytes, file has {len(raw)}"
        )
    values = np.frombuffer(raw, dtype=hdr.dtype, count=count, offset=offset)
    data = values.astype(np.float64)
    if hdr.scaled:
        data = hdr.scl_slope * data + hdr.scl_inter
    if not np.all(np.isfinite(data)):
        raise NonFiniteData(f"{path}: NaN or Inf in voxel data")
    return Volume(data.reshape((nx, ny, nz), order="F"), hdr.spacing, hdr)


def _check_representable(data: np.ndarray, code: int) -> None:
    kind = DATATYPES[code][0]
    if kind.startswith("f"):
        if kind == "f4":
            info = np.finfo(np.float32)
            if data.size and np.abs(data).max() > info.max:
                raise ValueRangeError("values overflow float32")
        return
    info = np.iinfo(np.dtype(kind))
    if data.size == 0:
        return
    if data.min() < info.min or data.max() > info.max:
        raise ValueRangeError(
            f"values in [{data.min()}, {data.max()}] do not fit {np.dtype(kind).name}"
        )
    if not np.array_equal(data, np.round(data)):
        raise ValueRangeError(f"non-integer values cannot be stored as {np.dtype(kind).name}")


def encode_header(
    dims: tuple[int, int, int],
    spacing: tuple[float, float, float],
    code: int,
    endianness: str = "little",
    template: NiftiHeader | None = None,
) -> bytes:
    order = _ORDER[endianness]
    buf = bytearray(HEADER_SIZE)
    struct.pack_into(order + "i", buf, 0, HEADER_SIZE)
    struct.pack_into(order + "8h", buf, 40, 3, *dims, 1, 1, 1, 1)
    struct.pack_into(order + "2h", buf, 70, code, DATATYPES[code][1])
    qfac = template.pixdim[0] if template is not None and template.pixdim[0] in (-1.0, 1.0) else 1.0
    struct.pack_into(order + "8f", buf, 76, qfac, *spacing, 1.0, 1.0, 1.0, 1.0)
    struct.pack_into(order + "3f", buf, 108, float(VOX_OFFSET), 1.0, 0.0)
    if template is not None:
        struct.pack_into("B", buf, 123, template.xyzt_units)
        buf[148 : 148 + len(template.descrip[:79])] = template.descrip[:79]
        struct.pack_into(order + "2h", buf, 252, template.qform_code, template.sform_code)
        struct.pack_into(order + "6f", buf, 256, *template.quatern)
        struct.pack_into(order + "12f", buf, 280, *template.srow)
    else:
        struct.pack_into("B", buf, 123, 2)  # NIFTI_UNITS_MM
    buf[344:348] = MAGIC
    return bytes(buf)


def write_volume(
    volume: Volume,
    path,
    datatype="float32",
    gzip_output: bool | None = None,
    endianness: str = "little",
) -> None:
    """Write ``volume`` as single-file NIfTI-1.

    ``gzip_output=None`` compresses when the path ends in ``.gz``. The gzip
    member carries no timestamp, so identical volumes give identical bytes.
    """
    code = datatype_code(datatype)
    if endianness not in _ORDER:
        raise ValueError(f"endianness must be 'little' or 'big', got {endianness!r}")
    data = volume.data
    _check_representable(data, code)
    header = encode_header(volume.dims, volume.spacing, code, endianness, volume.header)
    dtype = np.dtype(_ORDER[endianness] + DATATYPES[code][0])
    payload = data.ravel(order="F").astype(dtype).tobytes()
    blob = header + b"\x00" * (VOX_OFFSET - HEADER_SIZE) + payload
    path = Path(path)
    if gzip_output is None:
        gzip_output = path.suffix == ".gz"
    if gzip_output:
        blob = gzip.compress(blob, compresslevel=6, mtime=0)
    path.write_bytes(blob)


def describe(hdr: NiftiHeader) -> list[tuple[str, str]]:
    """Header fields as (name, value) pairs for display."""
    name = {v: k for k, v in DATATYPE_NAMES.items()}[hdr.datatype_code]
    return [
        ("sizeof_hdr", str(hdr.sizeof_hdr)),
        ("endianness", hdr.endianness),
        ("magic", hdr.magic.rstrip(b"\x00").decode("ascii")),
        ("dim", " ".join(str(d) for d in hdr.dim)),
        ("dims", "x".join(str(d) for d in hdr.dims)),
        ("datatype", f"{hdr.datatype_code} ({name})"),
        ("bitpix", str(hdr.bitpix)),
        ("pixdim", " ".join(f"{p:g}" for p in hdr.pixdim)),
        ("spacing", " ".join(f"{p:g}" for p in hdr.spacing)),
        ("vox_offset", f"{hdr.vox_offset:g}"),
        ("scl_slope", f"{hdr.scl_slope:g}"),
        ("scl_inter", f"{hdr.scl_inter:g}"),
        ("qform_code", str(hdr.qform_code)),
        ("sform_code", str(hdr.sform_code)),
    ]
