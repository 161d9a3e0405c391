"""Per-volume processing chain and the file formats around it.

The chain is load -> optional middle-slab selection -> quantize ->
filtration -> diagrams -> curve features.  Option values use the same
grammar as the command line: range 'minmax' or 'fixed:LO:HI', vec 'betti'
or 'silhouette:P', dims a comma list from {0,1,2}, direction 'sub' or
'super'.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filtration import build_filtration
from .persistence import PersistenceDiagram, compute_diagrams
from .vectorize import FeatureVector, assemble_features, feature_names
from .volume import GrayVolume, gray_volume, quantize, select_middle_slices

DEFAULTS = {
    "levels": 100,
    "range": "minmax",
    "slices": 0,
    "axis": "z",
    "direction": "sub",
    "vec": "betti",
    "dims": "0,1,2",
}


class OptionError(ValueError):
    """Raised for malformed option values."""


@dataclass(frozen=True)
class ExtractConfig:
    levels: int = 100
    range: str = "minmax"
    slices: int = 0
    axis: str = "z"
    direction: str = "sub"
    vec: str = "betti"
    dims: str = "0,1,2"

    def fixed_range(self) -> tuple[float, float] | None:
        return parse_range(self.range)

    def direction_name(self) -> str:
        return parse_direction(self.direction)

    def vec_kind(self) -> tuple[str, float]:
        return parse_vec(self.vec)

    def dims_tuple(self) -> tuple[int, ...]:
        return parse_dims(self.dims)

    def feature_names(self) -> tuple[str, ...]:
        kind, _ = self.vec_kind()
        return feature_names(kind, self.dims_tuple(), self.levels)


def parse_range(text: str) -> tuple[float, float] | None:
    if text == "minmax":
        return None
    if text.startswith("fixed:"):
        parts = text.split(":")
        if len(parts) == 3:
            try:
                lo, hi = float(parts[1]), float(parts[2])
            except ValueError as exc:
                raise OptionError(f"bad fixed range {text!r}") from exc
            if hi <= lo:
                raise OptionError(f"fixed range needs hi > lo, got {text!r}")
            return lo, hi
    raise OptionError(f"range must be 'minmax' or 'fixed:LO:HI', got {text!r}")


def parse_direction(text: str) -> str:
    table = {"sub": "sublevel", "super": "superlevel",
             "sublevel": "sublevel", "superlevel": "superlevel"}
    if text not in table:
        raise OptionError(f"direction must be 'sub' or 'super', got {text!r}")
    return table[text]


def parse_vec(text: str) -> tuple[str, float]:
    if text == "betti":
        return "betti", 1.0
    if text == "silhouette" or text.startswith("silhouette:"):
        power = 1.0
        if ":" in text:
            try:
                power = float(text.split(":", 1)[1])
            except ValueError as exc:
                raise OptionError(f"bad silhouette power in {text!r}") from exc
        if power < 0:
            raise OptionError(f"silhouette power must be >= 0, got {text!r}")
        return "silhouette", power
    raise OptionError(f"vec must be 'betti' or 'silhouette:P', got {text!r}")


def parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(p) for p in str(text).split(","))
    except ValueError as exc:
        raise OptionError(f"bad dims list {text!r}") from exc
    if not dims or len(set(dims)) != len(dims) or any(d not in (0, 1, 2) for d in dims):
        raise OptionError(f"dims must be distinct values from 0,1,2, got {text!r}")
    return dims


def quantized_volume(vol: GrayVolume, cfg: ExtractConfig):
    if cfg.slices > 0:
        vol = select_middle_slices(vol, cfg.slices, cfg.axis)
    return quantize(vol, levels=cfg.levels, fixed_range=cfg.fixed_range())


def diagrams_for_volume(
    vol: GrayVolume, cfg: ExtractConfig
) -> tuple[PersistenceDiagram, PersistenceDiagram, PersistenceDiagram]:
    qvol = quantized_volume(vol, cfg)
    f = build_filtration(qvol, cfg.direction_name())
    return compute_diagrams(f)


def features_for_volume(vol: GrayVolume, cfg: ExtractConfig) -> FeatureVector:
    kind, power = cfg.vec_kind()
    pds = diagrams_for_volume(vol, cfg)
    return assemble_features(pds, cfg.levels, kind=kind, power=power, dims=cfg.dims_tuple())


def features_for_array(arr, cfg: ExtractConfig | None = None) -> FeatureVector:
    return features_for_volume(gray_volume(arr), cfg or ExtractConfig())


def diagrams_to_dict(pds, cfg: ExtractConfig) -> dict:
    """JSON-ready diagram payload; essential deaths become null."""
    dims = cfg.dims_tuple()
    by_dim = {pd.dim: pd for pd in pds}
    return {
        "n_levels": cfg.levels,
        "direction": cfg.direction_name(),
        "dims": {
            str(d): [[b, dth] for b, dth in by_dim[d].pairs] for d in dims
        },
    }


def diagrams_from_dict(payload: dict) -> tuple[dict[int, PersistenceDiagram], int, str]:
    """Inverse of diagrams_to_dict; returns ({dim: diagram}, levels, direction)."""
    levels = int(payload["n_levels"])
    direction = payload["direction"]
    out = {}
    for key, pairs in payload["dims"].items():
        d = int(key)
        out[d] = PersistenceDiagram(
            dim=d,
            pairs=tuple((int(b), None if dth is None else int(dth)) for b, dth in pairs),
        )
    return out, levels, direction


def format_value(v: float) -> str:
    """Canonical CSV cell for a feature value; integral floats print bare."""
    f = float(v)
    if f.is_integer():
        return str(int(f))
    return repr(f)


def write_features_csv(path, names, rows) -> None:
    """rows is an iterable of (id, label, values)."""
    lines = ["id,label," + ",".join(names)]
    for vid, label, values in rows:
        lines.append(f"{vid},{label}," + ",".join(format_value(v) for v in values))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_features_csv(path):
    """Returns (feature_names, ids, labels, X as float64)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise OptionError(f"{path}: empty features file")
    header = lines[0].split(",")
    if len(header) < 3 or header[0] != "id" or header[1] != "label":
        raise OptionError(f"{path}: expected header id,label,<features>")
    names = tuple(header[2:])
    ids, labels, data = [], [], []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise OptionError(f"{path}: row has {len(parts)} fields, expected {len(header)}")
        ids.append(parts[0])
        labels.append(parts[1])
        data.append([float(p) for p in parts[2:]])
    X = np.asarray(data, dtype=np.float64) if data else np.empty((0, len(names)))
    return names, ids, labels, X
