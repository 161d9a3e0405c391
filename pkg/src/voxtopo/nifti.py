"""Minimal single-file NIfTI-1 reader.

Only the fields needed to recover the voxel array are interpreted: grid
dimensions, on-disk dtype, the scaling pair (scl_slope, scl_inter) and the
data offset.  Both byte orders are handled by sniffing sizeof_hdr.  Gzipped
files are detected by suffix or magic bytes.
"""

from __future__ import annotations

import gzip
from pathlib import Path

import numpy as np

HEADER_SIZE = 348

# On-disk layout of the 348-byte header.  Offsets follow the nifti1.h struct;
# fields we never look at are lumped into pad bytes.
_HEADER_DTD = np.dtype(
    [
        ("sizeof_hdr", "i4"),       # offset 0, must be 348
        ("_pad0", "V36"),           # 4
        ("dim", "i2", 8),           # 40
        ("_pad1", "V14"),           # 56
        ("datatype", "i2"),         # 70
        ("bitpix", "i2"),           # 72
        ("_pad2", "V2"),            # 74
        ("pixdim", "f4", 8),        # 76
        ("vox_offset", "f4"),       # 108
        ("scl_slope", "f4"),        # 112
        ("scl_inter", "f4"),        # 116
        ("_pad3", "V224"),          # 120
        ("magic", "S4"),            # 344
    ]
)
assert _HEADER_DTD.itemsize == HEADER_SIZE

# datatype codes from nifti1.h for the subset we support
_DTYPE_CODES = {
    2: np.dtype(np.uint8),
    4: np.dtype(np.int16),
    16: np.dtype(np.float32),
    512: np.dtype(np.uint16),
}


class NiftiError(ValueError):
    """Raised when a file is not a readable single-file NIfTI-1 image."""


def _read_bytes(path: Path) -> bytes:
    with open(path, "rb") as fh:
        head = fh.read(2)
        fh.seek(0)
        if head == b"\x1f\x8b":
            with gzip.open(fh) as gz:
                return gz.read()
        return fh.read()


def read_nifti1(path) -> np.ndarray:
    """Read a .nii or .nii.gz file and return the scaled voxel array.

    The array has the header's x/y/z dimensions (trailing singleton
    dimensions beyond the third are dropped).  When scl_slope is nonzero
    the affine scaling stored * slope + inter is applied and the result is
    float32; otherwise the on-disk dtype is preserved.
    """
    path = Path(path)
    raw = _read_bytes(path)
    if len(raw) < HEADER_SIZE:
        raise NiftiError(f"{path}: file shorter than a NIfTI-1 header")

    hdr = np.frombuffer(raw[:HEADER_SIZE], dtype=_HEADER_DTD)[0]
    swapped = False
    if hdr["sizeof_hdr"] != HEADER_SIZE:
        hdr = np.frombuffer(raw[:HEADER_SIZE], dtype=_HEADER_DTD.newbyteorder())[0]
        swapped = True
        if hdr["sizeof_hdr"] != HEADER_SIZE:
            raise NiftiError(f"{path}: sizeof_hdr is not 348 in either byte order")

    magic = bytes(hdr["magic"])
    if magic[:3] == b"ni1":
        raise NiftiError(f"{path}: two-file (.hdr/.img) NIfTI is not supported")
    if magic[:3] != b"n+1":
        raise NiftiError(f"{path}: bad magic {magic!r}")

    code = int(hdr["datatype"])
    if code not in _DTYPE_CODES:
        raise NiftiError(f"{path}: unsupported datatype code {code}")
    dtype = _DTYPE_CODES[code]
    if swapped:
        dtype = dtype.newbyteorder()

    ndim = int(hdr["dim"][0])
    if not 1 <= ndim <= 7:
        raise NiftiError(f"{path}: dim[0] = {ndim} out of range")
    shape = [int(d) for d in hdr["dim"][1 : 1 + ndim]]
    if any(d < 1 for d in shape):
        raise NiftiError(f"{path}: non-positive dimension in {shape}")
    if ndim > 3:
        if any(d != 1 for d in shape[3:]):
            raise NiftiError(f"{path}: 4D+ images are not supported (dim = {shape})")
        shape = shape[:3]

    offset = int(hdr["vox_offset"])
    if offset < HEADER_SIZE:
        raise NiftiError(f"{path}: vox_offset {offset} overlaps the header")
    n_vox = int(np.prod(shape))
    need = offset + n_vox * dtype.itemsize
    if len(raw) < need:
        raise NiftiError(
            f"{path}: payload truncated ({len(raw)} bytes, need {need})"
        )

    data = np.frombuffer(raw, dtype=dtype, count=n_vox, offset=offset)
    # x varies fastest on disk
    vol = data.reshape(shape, order="F")

    slope = float(hdr["scl_slope"])
    inter = float(hdr["scl_inter"])
    if slope != 0.0 and not np.isnan(slope):
        vol = vol.astype(np.float32) * np.float32(slope) + np.float32(inter)
    return vol
