"""End-to-end guarantees of the toolkit, one test per promise.

Run with `pytest -v tests/test_acceptance.py` to get a pass/fail line
per guarantee.  These tests exercise the public surface only: the CLI,
the file formats, and the top-level library calls.
"""

import json
import time

import numpy as np
import pytest

from voxtopo.classify import metrics_from_confusion, roc_auc
from voxtopo.cli import main
from voxtopo.filtration import build_filtration
from voxtopo.persistence import (
    PersistenceDiagram,
    compute_diagrams,
    dim0_unionfind,
    euler_profile,
    reduce_naive,
)
from voxtopo.phantoms import PhantomSpec, generate, ground_truth
from voxtopo.pipeline import diagrams_from_dict, read_features_csv
from voxtopo.vectorize import assemble_features, betti_curve
from voxtopo.volume import QuantizedVolume

from conftest import random_qvol

DESK_SYNTH = """\
[synth]
levels = 100
seed = 2024

[[synth.classes]]
label = "ball"
shape = "solid_ball"
count = 60
noise = 1

[[synth.classes]]
label = "torus"
shape = "solid_torus"
count = 60
noise = 1

[[synth.classes]]
label = "shell"
shape = "hollow_shell"
count = 60
noise = 1
"""


def run(*argv) -> int:
    return main([str(a) for a in argv])


def test_betti_curve_reference_values():
    loops = PersistenceDiagram(dim=1, pairs=((3, 5), (3, 5), (4, 5)))
    components = PersistenceDiagram(
        dim=0, pairs=((1, None), (1, 2), (1, 3), (1, 3), (1, 4), (2, 3))
    )
    betti_curve(loops, 5)  # warm-up outside the timed region
    start = time.perf_counter()
    loop_curve = betti_curve(loops, 5)
    component_curve = betti_curve(components, 5)
    elapsed = time.perf_counter() - start

    assert loop_curve.tolist() == [0, 0, 2, 3, 0]
    # the component tabulation is sometimes quoted with 4 at n=2; under
    # the b <= n < d rule used throughout, this diagram gives 5 there
    assert component_curve.tolist() == [5, 5, 2, 1, 1]
    assert [component_curve[n - 1] for n in (1, 3, 4, 5)] == [5, 2, 1, 1]
    assert elapsed < 1e-3


def test_fast_reduction_matches_naive_oracle(random_corpus, fixture_volumes):
    start = time.perf_counter()
    for qvol in list(random_corpus) + list(fixture_volumes.values()):
        f = build_filtration(qvol)
        naive = reduce_naive(f)
        assert compute_diagrams(f, dim0="unionfind") == naive
        assert compute_diagrams(f, dim0="reduction") == naive
        assert dim0_unionfind(f) == naive[0]
    assert time.perf_counter() - start < 60.0


def test_euler_characteristic_identity(random_corpus, fixture_volumes):
    start = time.perf_counter()
    for qvol in list(random_corpus) + list(fixture_volumes.values()):
        f = build_filtration(qvol)
        pds = compute_diagrams(f)
        chi = euler_profile(f)
        betti = [betti_curve(p, qvol.levels) for p in pds[:3]]
        alternating = betti[0] - betti[1] + betti[2]
        assert np.array_equal(alternating, chi)
    assert time.perf_counter() - start < 30.0


@pytest.mark.parametrize("shape, expected", [
    ("solid_ball", (1, 0, 0)),
    ("hollow_shell", (1, 0, 1)),
    ("solid_torus", (1, 1, 0)),
    ("two_blobs", (2, 0, 0)),
])
def test_phantom_ground_truth_windows(shape, expected):
    spec = PhantomSpec(shape, levels=10, foreground_bin=3, background_bin=8)
    assert ground_truth(spec) == expected
    pds = compute_diagrams(build_filtration(generate(spec)))
    curves = [betti_curve(p, spec.levels) for p in pds[:3]]
    for n in range(spec.foreground_bin, spec.background_bin):
        assert tuple(int(c[n - 1]) for c in curves) == expected


def test_superlevel_equals_reflected_sublevel():
    rng = np.random.default_rng(77)
    for _ in range(20):
        qvol = random_qvol(rng)
        direct = compute_diagrams(build_filtration(qvol, direction="superlevel"))
        reflected = QuantizedVolume(
            bins=(qvol.levels + 1 - qvol.bins).astype(np.int32),
            levels=qvol.levels,
        )
        via_reflection = compute_diagrams(build_filtration(reflected))
        assert direct == via_reflection


@pytest.fixture(scope="module")
def desk_corpus(tmp_path_factory):
    """180 noisy phantoms (60 per class) with features extracted once."""
    root = tmp_path_factory.mktemp("desk")
    config = root / "synth.toml"
    config.write_text(DESK_SYNTH)
    start = time.perf_counter()
    assert run("synth", config, "--out", root / "vols") == 0
    assert run(
        "extract", root / "vols" / "manifest.json",
        "--out", root / "features.csv",
    ) == 0
    return root, time.perf_counter() - start


def test_feature_vector_shapes_and_io_consistency(desk_corpus, tmp_path):
    root, _ = desk_corpus
    manifest = json.loads((root / "vols" / "manifest.json").read_text())
    entries = [dict(e, path=str(root / "vols" / e["path"]))
               for e in manifest["entries"][:6]]
    plain = tmp_path / "plain.json"
    plain.write_text(json.dumps({"entries": entries}))  # no extraction table

    # defaults: three 100-level Betti curves per volume
    assert run(
        "extract", plain, "--out", tmp_path / "default.csv",
        "--diagrams", tmp_path / "diagrams",
    ) == 0
    names, ids, labels, X = read_features_csv(tmp_path / "default.csv")
    assert len(names) == 300
    assert X.shape == (6, 300)

    # restricting to dims 1,2 drops the dim-0 block
    assert run(
        "extract", plain, "--out", tmp_path / "dims12.csv", "--dims", "1,2",
    ) == 0
    names12, _, _, X12 = read_features_csv(tmp_path / "dims12.csv")
    assert len(names12) == 200
    assert X12.shape == (6, 200)

    # the diagram JSON regenerates every CSV value bit-exactly
    for row, vid in zip(X, ids):
        payload = json.loads((tmp_path / "diagrams" / f"{vid}.json").read_text())
        pds, levels, direction = diagrams_from_dict(payload)
        assert levels == 100 and direction == "sublevel"
        fv = assemble_features([pds[0], pds[1], pds[2]], levels)
        assert np.array_equal(fv.values, row)

    # a worker pool changes nothing, byte for byte
    assert run(
        "extract", plain, "--out", tmp_path / "pooled.csv",
        "--diagrams", tmp_path / "pooled_diagrams", "--workers", 4,
    ) == 0
    assert (tmp_path / "pooled.csv").read_bytes() == \
        (tmp_path / "default.csv").read_bytes()
    for vid in ids:
        assert (tmp_path / "pooled_diagrams" / f"{vid}.json").read_bytes() == \
            (tmp_path / "diagrams" / f"{vid}.json").read_bytes()


def test_desk_scale_classification_accuracy(desk_corpus, tmp_path):
    root, prep_elapsed = desk_corpus
    out = tmp_path / "report.json"
    start = time.perf_counter()
    assert run(
        "classify", root / "features.csv",
        "--folds", 10, "--n-estimators", 500, "--learning-rate", 0.2,
        "--max-depth", 7, "--colsample-bytree", 0.3,
        "--out", out,
    ) == 0
    elapsed = prep_elapsed + (time.perf_counter() - start)
    report = json.loads(out.read_text())
    assert report["n_samples"] == 180
    assert report["k"] == 10
    assert report["mean"]["accuracy"] >= 0.99
    assert elapsed < 300.0


def test_confusion_metrics_and_auc_exact():
    m = metrics_from_confusion(np.array([[95, 5], [1, 99]]))
    assert abs(m["sensitivity"] - 0.99) < 1e-12
    assert abs(m["specificity"] - 0.95) < 1e-12
    scores = np.array([0.1, 0.2, 0.3, 0.7, 0.8, 0.9])
    labels = np.array([0, 0, 0, 1, 1, 1])
    assert roc_auc(labels, scores) == 1.0


def test_repeated_runs_are_byte_identical(tmp_path):
    config = tmp_path / "synth.toml"
    config.write_text(
        "[synth]\nlevels = 10\nseed = 5\n\n"
        "[[synth.classes]]\n"
        'label = \"ball\"\nshape = \"solid_ball\"\ncount = 6\n'
        "dims = [11, 11, 11]\ngeometry = { radius = 3.0 }\n"
        "foreground_bin = 3\nbackground_bin = 8\nnoise = 1\n\n"
        "[[synth.classes]]\n"
        'label = \"blobs\"\nshape = \"two_blobs\"\ncount = 6\n'
        "dims = [14, 9, 9]\ngeometry = { radius = 2.0, separation = 7.0 }\n"
        "foreground_bin = 3\nbackground_bin = 8\nnoise = 1\n"
    )

    outputs = []
    for tag in ("first", "second"):
        base = tmp_path / tag
        assert run("synth", config, "--out", base / "vols") == 0
        assert run(
            "extract", base / "vols" / "manifest.json",
            "--out", base / "features.csv", "--diagrams", base / "diagrams",
        ) == 0
        assert run(
            "classify", base / "features.csv",
            "--folds", 3, "--n-estimators", 25, "--max-depth", 3,
            "--colsample-bytree", 1.0, "--seed", 1,
            "--out", base / "report.json",
            "--confusion", base / "confusion.csv", "--roc", base / "roc.csv",
        ) == 0
        assert run(
            "diagram", base / "vols" / "ball_000.npy",
            "--levels", 10, "--range", "fixed:1:10", "--out", base / "pd.json",
        ) == 0
        files = {}
        for path in sorted(base.rglob("*")):
            if path.is_file():
                files[str(path.relative_to(base))] = path.read_bytes()
        outputs.append(files)

    assert outputs[0].keys() == outputs[1].keys()
    for key in outputs[0]:
        assert outputs[0][key] == outputs[1][key], f"{key} differs between runs"
