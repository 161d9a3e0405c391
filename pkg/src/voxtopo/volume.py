"""Grayscale volume loading, slab selection and threshold quantization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .nifti import NiftiError, read_nifti1

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}

_SIDECAR_DTYPES = {
    "uint8": np.uint8,
    "int16": np.int16,
    "uint16": np.uint16,
    "int32": np.int32,
    "float32": np.float32,
    "float64": np.float64,
}


class VolumeError(ValueError):
    """Raised for unreadable files, malformed headers or invalid arrays."""


@dataclass(frozen=True, eq=False)
class GrayVolume:
    """A 3D scalar grid with shape (nx, ny, nz).  2D inputs get nz = 1."""

    voxels: np.ndarray
    source_range: tuple[float, float]

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.voxels.shape


@dataclass(frozen=True, eq=False)
class QuantizedVolume:
    """Integer bin grid, values in [1, levels], same axis order as GrayVolume."""

    bins: np.ndarray
    levels: int


def gray_volume(arr) -> GrayVolume:
    """Wrap an array as a GrayVolume, validating rank, size and finiteness."""
    arr = np.asarray(arr)
    if arr.ndim == 2:
        arr = arr[:, :, np.newaxis]
    if arr.ndim != 3:
        raise VolumeError(f"expected a 2D or 3D array, got ndim = {arr.ndim}")
    if arr.size == 0:
        raise VolumeError("volume has a zero-length dimension")
    if arr.dtype.kind not in "uif":
        raise VolumeError(f"unsupported dtype {arr.dtype}")
    if arr.dtype.kind == "f" and not np.isfinite(arr).all():
        raise VolumeError("volume contains NaN or infinite values")
    return GrayVolume(voxels=arr, source_range=(float(arr.min()), float(arr.max())))


def _load_raw(path: Path) -> np.ndarray:
    sidecar = path.with_name(path.name + ".json")
    if not sidecar.exists():
        raise VolumeError(f"{path}: raw volume needs a {sidecar.name} sidecar")
    try:
        meta = json.loads(sidecar.read_text())
    except json.JSONDecodeError as exc:
        raise VolumeError(f"{sidecar}: invalid JSON ({exc})") from exc
    try:
        dims = [int(d) for d in meta["dims"]]
        dtype_name = meta["dtype"]
    except (KeyError, TypeError, ValueError) as exc:
        raise VolumeError(f"{sidecar}: needs 'dims' (3 ints) and 'dtype'") from exc
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise VolumeError(f"{sidecar}: bad dims {dims}")
    if dtype_name not in _SIDECAR_DTYPES:
        raise VolumeError(f"{sidecar}: unsupported dtype {dtype_name!r}")
    dtype = np.dtype(_SIDECAR_DTYPES[dtype_name])
    order = meta.get("byte_order", "little")
    if order not in ("little", "big"):
        raise VolumeError(f"{sidecar}: byte_order must be 'little' or 'big'")
    dtype = dtype.newbyteorder("<" if order == "little" else ">")

    payload = path.read_bytes()
    expected = math.prod(dims) * dtype.itemsize
    if len(payload) != expected:
        raise VolumeError(
            f"{path}: payload is {len(payload)} bytes, sidecar implies {expected}"
        )
    # x varies fastest, matching the NIfTI on-disk convention
    return np.frombuffer(payload, dtype=dtype).reshape(dims, order="F")


def load_volume(path, format: str = "auto") -> GrayVolume:
    """Load a volume from NIfTI-1 (.nii/.nii.gz), NPY, or raw + JSON sidecar.

    format is one of 'auto', 'nifti', 'npy', 'raw'.  'auto' dispatches on the
    file suffix.
    """
    path = Path(path)
    if not path.exists():
        raise VolumeError(f"{path}: no such file")
    if format == "auto":
        name = path.name.lower()
        if name.endswith((".nii", ".nii.gz")):
            format = "nifti"
        elif name.endswith(".npy"):
            format = "npy"
        elif name.endswith((".raw", ".bin")):
            format = "raw"
        else:
            raise VolumeError(f"{path}: cannot infer format from suffix")

    if format == "nifti":
        try:
            arr = read_nifti1(path)
        except NiftiError as exc:
            raise VolumeError(str(exc)) from exc
    elif format == "npy":
        try:
            arr = np.load(path, allow_pickle=False)
        except ValueError as exc:
            raise VolumeError(f"{path}: {exc}") from exc
    elif format == "raw":
        arr = _load_raw(path)
    else:
        raise VolumeError(f"unknown format {format!r}")
    return gray_volume(arr)


def save_npy(vol: GrayVolume, path) -> None:
    """Write the voxel array to .npy; load_volume round-trips it exactly."""
    np.save(path, vol.voxels)


def select_middle_slices(vol: GrayVolume, count: int, axis: str = "z") -> GrayVolume:
    """Keep a centered window of `count` slices along the named axis.

    When extent - count is odd the extra discarded slice comes from the
    high-index side.  count >= extent returns the volume unchanged.
    """
    if axis not in _AXIS_INDEX:
        raise VolumeError(f"axis must be one of x, y, z, got {axis!r}")
    if count < 1:
        raise VolumeError(f"slice count must be >= 1, got {count}")
    ax = _AXIS_INDEX[axis]
    extent = vol.voxels.shape[ax]
    if count >= extent:
        return vol
    start = (extent - count) // 2
    index = [slice(None)] * 3
    index[ax] = slice(start, start + count)
    return gray_volume(vol.voxels[tuple(index)])


def quantize(
    vol: GrayVolume,
    levels: int = 100,
    fixed_range: tuple[float, float] | None = None,
) -> QuantizedVolume:
    """Map intensities to integer bins 1..levels.

    bin(v) = 1 + floor((clamp(v, lo, hi) - lo) * levels / width).  With a
    fixed range of integral bounds, width = hi - lo + 1, so an 8-bit range
    [0, 255] at 100 levels gives bin(v) = 1 + floor(v * 100 / 256).  With a
    per-volume min/max range (the default), width is hi - lo widened by one
    ulp so the maximum lands in bin `levels`.  A constant volume maps to
    bin 1.
    """
    if levels < 1:
        raise VolumeError(f"levels must be >= 1, got {levels}")
    v = vol.voxels.astype(np.float64, copy=False)
    if fixed_range is not None:
        lo, hi = float(fixed_range[0]), float(fixed_range[1])
        if not (hi > lo):
            raise VolumeError(f"fixed range needs hi > lo, got ({lo}, {hi})")
        if float(lo).is_integer() and float(hi).is_integer():
            width = hi - lo + 1.0
        else:
            width = np.nextafter(hi - lo, np.inf)
    else:
        lo, hi = vol.source_range
        if hi == lo:
            bins = np.ones(vol.voxels.shape, dtype=np.int32)
            return QuantizedVolume(bins=bins, levels=levels)
        width = np.nextafter(hi - lo, np.inf)

    clamped = np.clip(v, lo, hi)
    bins = 1 + np.floor((clamped - lo) * levels / width).astype(np.int32)
    np.clip(bins, 1, levels, out=bins)
    return QuantizedVolume(bins=bins, levels=levels)
