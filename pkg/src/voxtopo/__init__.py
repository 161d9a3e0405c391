"""Topological feature extraction and classification for 3D grayscale volumes."""

__version__ = "0.1.0"

from .classify import (
    ClassifierConfig,
    LabeledDataset,
    cross_validate,
    make_dataset,
    merge_binary,
)
from .filtration import CubicalFiltration, build_filtration
from .gbt import GradientBoostedTrees
from .persistence import (
    PersistenceDiagram,
    compute_diagrams,
    dim0_unionfind,
    euler_profile,
    reduce_naive,
)
from .phantoms import PhantomSpec, generate, ground_truth
from .pipeline import ExtractConfig, features_for_array, features_for_volume
from .vectorize import assemble_features, betti_curve, silhouette
from .volume import (
    GrayVolume,
    QuantizedVolume,
    gray_volume,
    load_volume,
    quantize,
    save_npy,
    select_middle_slices,
)

__all__ = [
    "ClassifierConfig",
    "CubicalFiltration",
    "ExtractConfig",
    "GradientBoostedTrees",
    "GrayVolume",
    "LabeledDataset",
    "PersistenceDiagram",
    "PhantomSpec",
    "QuantizedVolume",
    "assemble_features",
    "betti_curve",
    "build_filtration",
    "compute_diagrams",
    "cross_validate",
    "dim0_unionfind",
    "euler_profile",
    "features_for_array",
    "features_for_volume",
    "generate",
    "gray_volume",
    "ground_truth",
    "load_volume",
    "make_dataset",
    "merge_binary",
    "quantize",
    "reduce_naive",
    "save_npy",
    "select_middle_slices",
    "silhouette",
]
