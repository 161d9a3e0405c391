"""Synthetic bin-valued volumes with known topology.

Shapes are carved from an implicit surface over the voxel index grid:
foreground voxels get foreground_bin, the rest background_bin, then
optional uniform integer jitter.  Ground truths hold for the noise-free
sublevel filtration on bins [foreground_bin, background_bin):

    solid_ball   (1, 0, 0)
    hollow_shell (1, 0, 1)
    solid_torus  (1, 1, 0)
    two_blobs    (2, 0, 0)

random_noise draws every voxel uniformly and has no ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .volume import QuantizedVolume

SHAPES = ("solid_ball", "hollow_shell", "solid_torus", "two_blobs", "random_noise")

_DEFAULT_DIMS = {
    "solid_ball": (16, 16, 16),
    "hollow_shell": (16, 16, 16),
    "solid_torus": (20, 20, 12),
    "two_blobs": (16, 16, 16),
    "random_noise": (16, 16, 16),
}

_DEFAULT_GEOMETRY = {
    "solid_ball": {"radius": 4.0},
    "hollow_shell": {"inner_radius": 3.0, "outer_radius": 5.0},
    "solid_torus": {"ring_radius": 5.0, "tube_radius": 2.0},
    "two_blobs": {"radius": 2.5, "separation": 8.0},
    "random_noise": {},
}

_GROUND_TRUTH = {
    "solid_ball": (1, 0, 0),
    "hollow_shell": (1, 0, 1),
    "solid_torus": (1, 1, 0),
    "two_blobs": (2, 0, 0),
}

MIN_RADIUS = 2.0
MIN_BLOB_GAP = 3.0


class PhantomError(ValueError):
    """Raised for geometry that does not fit or would not be robust."""


@dataclass(frozen=True)
class PhantomSpec:
    shape: str
    dims: tuple[int, int, int] | None = None
    levels: int = 100
    geometry: Mapping[str, float] = field(default_factory=dict)
    foreground_bin: int = 20
    background_bin: int = 80
    noise: int = 0
    seed: int | tuple[int, ...] = 0

    def resolved_dims(self) -> tuple[int, int, int]:
        return tuple(self.dims) if self.dims is not None else _DEFAULT_DIMS[self.shape]

    def resolved_geometry(self) -> dict[str, float]:
        geo = dict(_DEFAULT_GEOMETRY[self.shape])
        geo.update(self.geometry)
        return geo


def ground_truth(spec: PhantomSpec) -> tuple[int, int, int] | None:
    """(beta_0, beta_1, beta_2) on [foreground_bin, background_bin), or None."""
    return _GROUND_TRUTH.get(spec.shape)


def _center(spec: PhantomSpec, geo) -> np.ndarray:
    dims = spec.resolved_dims()
    if "center" in geo:
        c = np.asarray(geo["center"], dtype=np.float64)
        if c.shape != (3,):
            raise PhantomError(f"center must have 3 components, got {geo['center']}")
        return c
    return (np.asarray(dims, dtype=np.float64) - 1.0) / 2.0


def _check_margin(spec: PhantomSpec, lo: np.ndarray, hi: np.ndarray) -> None:
    # the outermost voxel indices the shape can reach must leave >= 1 voxel
    # of background per side
    dims = np.asarray(spec.resolved_dims(), dtype=np.float64)
    if np.any(np.ceil(lo) < 1.0) or np.any(np.floor(hi) > dims - 2.0):
        raise PhantomError(
            f"{spec.shape} spans [{lo}, {hi}], leaving less than one voxel "
            f"of margin inside dims {spec.resolved_dims()}"
        )


def _validate(spec: PhantomSpec) -> None:
    if spec.shape not in SHAPES:
        raise PhantomError(f"unknown shape {spec.shape!r}")
    dims = spec.resolved_dims()
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise PhantomError(f"bad dims {dims}")
    if spec.levels < 1:
        raise PhantomError(f"levels must be >= 1, got {spec.levels}")
    if spec.noise < 0:
        raise PhantomError(f"noise must be >= 0, got {spec.noise}")
    if spec.shape == "random_noise":
        return
    for name in ("foreground_bin", "background_bin"):
        b = getattr(spec, name)
        if not 1 <= b <= spec.levels:
            raise PhantomError(f"{name} {b} outside [1, {spec.levels}]")
    if spec.foreground_bin >= spec.background_bin:
        raise PhantomError("foreground_bin must be below background_bin")

    geo = spec.resolved_geometry()
    c = _center(spec, geo)
    if spec.shape == "solid_ball":
        r = float(geo["radius"])
        if r < MIN_RADIUS:
            raise PhantomError(f"radius {r} below the minimum {MIN_RADIUS}")
        _check_margin(spec, c - r, c + r)
    elif spec.shape == "hollow_shell":
        r_in, r_out = float(geo["inner_radius"]), float(geo["outer_radius"])
        if r_in < 1.0:
            raise PhantomError(f"inner_radius {r_in} too small to enclose a cavity")
        if r_out - r_in < 1.5:
            raise PhantomError(f"shell thickness {r_out - r_in} risks pinholes")
        _check_margin(spec, c - r_out, c + r_out)
    elif spec.shape == "solid_torus":
        R, r = float(geo["ring_radius"]), float(geo["tube_radius"])
        if r < MIN_RADIUS:
            raise PhantomError(f"tube_radius {r} below the minimum {MIN_RADIUS}")
        if R - r < 1.0:
            raise PhantomError(f"ring_radius {R} leaves no hole for tube {r}")
        ext = np.array([R + r, R + r, r])
        _check_margin(spec, c - ext, c + ext)
    elif spec.shape == "two_blobs":
        r = float(geo["radius"])
        sep = float(geo["separation"])
        if r < MIN_RADIUS:
            raise PhantomError(f"radius {r} below the minimum {MIN_RADIUS}")
        if sep - 2 * r < MIN_BLOB_GAP:
            raise PhantomError(
                f"separation {sep} leaves a gap of {sep - 2 * r} < {MIN_BLOB_GAP}"
            )
        off = np.array([sep / 2.0, 0.0, 0.0])
        _check_margin(spec, c - off - r, c + off + r)


def _foreground_mask(spec: PhantomSpec) -> np.ndarray:
    dims = spec.resolved_dims()
    geo = spec.resolved_geometry()
    c = _center(spec, geo)
    x, y, z = np.meshgrid(*(np.arange(d, dtype=np.float64) for d in dims), indexing="ij")
    dx, dy, dz = x - c[0], y - c[1], z - c[2]
    if spec.shape == "solid_ball":
        return dx * dx + dy * dy + dz * dz <= geo["radius"] ** 2
    if spec.shape == "hollow_shell":
        d2 = dx * dx + dy * dy + dz * dz
        return (d2 >= geo["inner_radius"] ** 2) & (d2 <= geo["outer_radius"] ** 2)
    if spec.shape == "solid_torus":
        ring = np.sqrt(dx * dx + dy * dy) - geo["ring_radius"]
        return ring * ring + dz * dz <= geo["tube_radius"] ** 2
    if spec.shape == "two_blobs":
        half = geo["separation"] / 2.0
        r2 = geo["radius"] ** 2
        left = (dx + half) ** 2 + dy * dy + dz * dz <= r2
        right = (dx - half) ** 2 + dy * dy + dz * dz <= r2
        return left | right
    raise PhantomError(f"no mask for shape {spec.shape!r}")


def generate(spec: PhantomSpec) -> QuantizedVolume:
    """Deterministically generate the phantom for a spec."""
    _validate(spec)
    dims = spec.resolved_dims()
    rng = np.random.default_rng(spec.seed)
    if spec.shape == "random_noise":
        bins = rng.integers(1, spec.levels + 1, size=dims).astype(np.int32)
        return QuantizedVolume(bins=bins, levels=spec.levels)
    mask = _foreground_mask(spec)
    bins = np.where(mask, spec.foreground_bin, spec.background_bin).astype(np.int32)
    if spec.noise > 0:
        bins += rng.integers(-spec.noise, spec.noise + 1, size=dims).astype(np.int32)
        np.clip(bins, 1, spec.levels, out=bins)
    return QuantizedVolume(bins=bins, levels=spec.levels)
