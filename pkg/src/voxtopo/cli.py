"""Command line interface.

Subcommands:

  extract   volumes listed in a manifest -> features CSV (+ diagram JSONs)
  classify  features CSV -> cross-validated report JSON (+ confusion/ROC CSV)
  synth     phantom config -> volume files + manifest
  diagram   one volume -> persistence diagram JSON

Extraction settings may come from the manifest's [extraction] table;
explicit command-line flags win.  Exit status: 0 on success, 1 on fatal
errors, 2 when some volumes failed but output was produced.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .classify import (
    ClassifierConfig,
    cross_validate,
    make_dataset,
    merge_binary,
)
from .phantoms import PhantomSpec, generate
from .pipeline import (
    DEFAULTS,
    ExtractConfig,
    OptionError,
    diagrams_for_volume,
    diagrams_to_dict,
    read_features_csv,
    write_features_csv,
)
from .vectorize import assemble_features
from .volume import load_volume

_EXTRACT_KEYS = ("levels", "range", "slices", "axis", "direction", "vec", "dims")


def _load_table(path: Path) -> dict:
    raw = path.read_bytes()
    if path.suffix.lower() == ".json":
        data = json.loads(raw.decode("utf-8"))
    else:
        data = tomllib.loads(raw.decode("utf-8"))
    if not isinstance(data, dict):
        raise OptionError(f"{path}: top level must be a table/object")
    return data


def _resolve_extract_config(args, manifest_cfg: dict) -> ExtractConfig:
    values = {}
    for key in _EXTRACT_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
        elif key in manifest_cfg:
            values[key] = manifest_cfg[key]
        else:
            values[key] = DEFAULTS[key]
    values["levels"] = int(values["levels"])
    values["slices"] = int(values["slices"])
    if isinstance(values["dims"], (list, tuple)):
        values["dims"] = ",".join(str(d) for d in values["dims"])
    for key in ("range", "axis", "direction", "vec", "dims"):
        values[key] = str(values[key])
    cfg = ExtractConfig(**values)
    if cfg.levels < 1:
        raise OptionError(f"levels must be >= 1, got {cfg.levels}")
    if cfg.slices < 0:
        raise OptionError(f"slices must be >= 0, got {cfg.slices}")
    if cfg.axis not in ("x", "y", "z"):
        raise OptionError(f"axis must be x, y or z, got {cfg.axis!r}")
    cfg.fixed_range()
    cfg.direction_name()
    cfg.vec_kind()
    cfg.dims_tuple()
    return cfg


def _extract_worker(task):
    path, vid, label, cfg_values, want_diagrams = task
    cfg = ExtractConfig(**cfg_values)
    try:
        vol = load_volume(path)
        pds = diagrams_for_volume(vol, cfg)
        kind, power = cfg.vec_kind()
        fv = assemble_features(pds, cfg.levels, kind=kind, power=power,
                               dims=cfg.dims_tuple())
        payload = diagrams_to_dict(pds, cfg) if want_diagrams else None
        return vid, label, fv.values.tolist(), payload, None
    except Exception as exc:
        return vid, label, None, None, f"{type(exc).__name__}: {exc}"


def cmd_extract(args) -> int:
    manifest_path = Path(args.manifest)
    manifest = _load_table(manifest_path)
    cfg = _resolve_extract_config(args, manifest.get("extraction", {}))

    entries = manifest.get("entries", [])
    if not isinstance(entries, list):
        raise OptionError(f"{manifest_path}: 'entries' must be a list")
    classes = manifest.get("classes")
    tasks = []
    seen_ids = set()
    cfg_values = dataclasses.asdict(cfg)
    for pos, entry in enumerate(entries):
        try:
            rel = str(entry["path"])
            label = str(entry["label"])
        except (KeyError, TypeError) as exc:
            raise OptionError(
                f"{manifest_path}: entry {pos} needs 'path' and 'label'"
            ) from exc
        if classes is not None and label not in classes:
            raise OptionError(
                f"{manifest_path}: entry {pos} label {label!r} not in classes {classes}"
            )
        vid = str(entry.get("id", Path(rel).stem))
        if "/" in vid or "\\" in vid:
            raise OptionError(f"{manifest_path}: id {vid!r} contains a path separator")
        if vid in seen_ids:
            raise OptionError(f"{manifest_path}: duplicate id {vid!r}")
        seen_ids.add(vid)
        full = Path(rel)
        if not full.is_absolute():
            full = manifest_path.parent / full
        tasks.append((str(full), vid, label, cfg_values, args.diagrams is not None))

    if args.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_extract_worker, tasks))
    else:
        results = [_extract_worker(t) for t in tasks]

    diagrams_dir = None
    if args.diagrams is not None:
        diagrams_dir = Path(args.diagrams)
        diagrams_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    failures = []
    for vid, label, values, payload, err in results:
        if err is not None:
            failures.append((vid, err))
            continue
        rows.append((vid, label, values))
        if diagrams_dir is not None:
            out = diagrams_dir / f"{vid}.json"
            out.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")

    write_features_csv(args.out, cfg.feature_names(), rows)
    for vid, err in failures:
        print(f"failed: {vid}: {err}", file=sys.stderr)
    print(f"extracted {len(rows)}/{len(tasks)} volumes -> {args.out}")
    return 2 if failures else 0


def cmd_classify(args) -> int:
    names, ids, labels, X = read_features_csv(args.features)
    if args.classes is not None:
        class_names = tuple(args.classes.split(","))
    else:
        class_names = tuple(sorted(set(labels)))
    index = {c: i for i, c in enumerate(class_names)}
    try:
        y = np.array([index[lb] for lb in labels], dtype=np.int64)
    except KeyError as exc:
        raise OptionError(f"label {exc.args[0]!r} not in classes {class_names}") from exc

    ds = make_dataset(X, y, names, class_names)
    if args.task == "binary" and len(class_names) > 2:
        ds = merge_binary(ds)

    cfg = ClassifierConfig(
        n_estimators=args.n_estimators,
        learning_rate=args.learning_rate,
        max_depth=args.max_depth,
        colsample_bytree=args.colsample_bytree,
        seed=args.seed,
        feature_selection=args.selection,
        n_hist_bins=args.hist_bins,
        exact_splits=args.exact_splits,
    )
    report = cross_validate(ds, cfg, k=args.folds)
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)

    if args.confusion:
        cls = report["class_names"]
        lines = ["true\\predicted," + ",".join(cls)]
        for name, row in zip(cls, report["confusion_row_normalized"]):
            lines.append(name + "," + ",".join(repr(100.0 * v) for v in row))
        Path(args.confusion).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if args.roc:
        lines = ["fold,class,fpr,tpr"]
        for fold_id, pts in enumerate(report["roc_points"]):
            for cls_id, fpr, tpr in pts:
                lines.append(f"{fold_id},{cls_id},{repr(fpr)},{repr(tpr)}")
        Path(args.roc).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if args.out:
        acc = report["mean"]["accuracy"]
        print(f"mean accuracy {acc:.4f} over {report['k']} folds -> {args.out}")
    return 0


def cmd_synth(args) -> int:
    config = _load_table(Path(args.config))
    synth = config.get("synth", config)
    levels = int(synth.get("levels", 100))
    master_seed = int(synth.get("seed", args.seed))
    class_tables = synth.get("classes")
    if not class_tables:
        raise OptionError(f"{args.config}: no [[synth.classes]] entries")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    class_names = []
    for ci, table in enumerate(class_tables):
        try:
            label = str(table["label"])
            shape = str(table["shape"])
        except (KeyError, TypeError) as exc:
            raise OptionError(
                f"{args.config}: class {ci} needs 'label' and 'shape'"
            ) from exc
        count = int(table.get("count", 1))
        if count < 1:
            raise OptionError(f"{args.config}: class {label!r} count must be >= 1")
        class_names.append(label)
        geometry = dict(table.get("geometry", {}))
        if "center" in geometry:
            geometry["center"] = tuple(geometry["center"])
        dims = tuple(int(d) for d in table["dims"]) if "dims" in table else None
        spec_kwargs = dict(
            shape=shape,
            dims=dims,
            levels=levels,
            geometry=geometry,
            noise=int(table.get("noise", 0)),
        )
        if "foreground_bin" in table:
            spec_kwargs["foreground_bin"] = int(table["foreground_bin"])
        if "background_bin" in table:
            spec_kwargs["background_bin"] = int(table["background_bin"])
        for i in range(count):
            spec = PhantomSpec(seed=(master_seed, ci, i), **spec_kwargs)
            qvol = generate(spec)
            vid = f"{label}_{i:03d}"
            np.save(out_dir / f"{vid}.npy", qvol.bins)
            entries.append({"path": f"{vid}.npy", "label": label, "id": vid})

    manifest = {
        "classes": class_names,
        "extraction": {"levels": levels, "range": f"fixed:1:{levels}", "slices": 0},
        "entries": entries,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    per_class = ", ".join(
        f"{label} x {sum(1 for e in entries if e['label'] == label)}"
        for label in class_names
    )
    print(f"wrote {len(entries)} volumes ({per_class}) -> {out_dir}")
    return 0


def cmd_diagram(args) -> int:
    cfg = _resolve_extract_config(args, {})
    vol = load_volume(args.volume)
    pds = diagrams_for_volume(vol, cfg)
    text = json.dumps(diagrams_to_dict(pds, cfg), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _add_extract_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--levels", type=int, default=None,
                   help="filtration levels (default 100)")
    p.add_argument("--range", default=None,
                   help="'minmax' or 'fixed:LO:HI' (default minmax)")
    p.add_argument("--slices", type=int, default=None,
                   help="middle slices to keep, 0 keeps all (default 0)")
    p.add_argument("--axis", choices=("x", "y", "z"), default=None,
                   help="slab axis (default z)")
    p.add_argument("--direction", choices=("sub", "super"), default=None,
                   help="filtration direction (default sub)")
    p.add_argument("--vec", default=None,
                   help="'betti' or 'silhouette:P' (default betti)")
    p.add_argument("--dims", default=None,
                   help="comma list of homology dimensions (default 0,1,2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voxtopo",
        description="Topological feature extraction and classification "
                    "for 3D grayscale volumes",
    )
    parser.add_argument("--version", action="version", version=f"voxtopo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract features from a volume manifest")
    p.add_argument("manifest", help="TOML or JSON manifest of volumes")
    p.add_argument("--out", required=True, help="features CSV path")
    p.add_argument("--diagrams", default=None,
                   help="directory for per-volume diagram JSONs")
    p.add_argument("--workers", type=int, default=1,
                   help="parallel worker processes (default 1)")
    p.add_argument("--seed", type=int, default=0,
                   help="unused; extraction is deterministic")
    _add_extract_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("classify", help="cross-validate a classifier on features")
    p.add_argument("features", help="features CSV from extract")
    p.add_argument("--task", choices=("multi", "binary"), default="multi",
                   help="binary merges every class above the first (default multi)")
    p.add_argument("--classes", default=None,
                   help="comma list fixing class order (default sorted labels)")
    p.add_argument("--out", default=None, help="report JSON path (default stdout)")
    p.add_argument("--confusion", default=None,
                   help="aggregate row-percentage confusion CSV path")
    p.add_argument("--roc", default=None, help="per-fold ROC points CSV path")
    p.add_argument("--folds", type=int, default=10, help="fold count (default 10)")
    p.add_argument("--seed", type=int, default=0, help="shuffling/model seed")
    p.add_argument("--n-estimators", type=int, default=500)
    p.add_argument("--learning-rate", type=float, default=0.2)
    p.add_argument("--max-depth", type=int, default=7)
    p.add_argument("--colsample-bytree", type=float, default=0.3)
    p.add_argument("--selection", default="mean",
                   help="'mean', 'off' or 'absolute:<tau>' (default mean)")
    p.add_argument("--hist-bins", type=int, default=64)
    p.add_argument("--exact-splits", action="store_true",
                   help="consider every unique value as a split")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("synth", help="generate phantom volumes and a manifest")
    p.add_argument("config", help="TOML or JSON phantom config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0,
                   help="master seed when the config does not set one")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("diagram", help="print persistence diagrams for one volume")
    p.add_argument("volume", help="volume file (.nii, .nii.gz, .npy, .raw)")
    p.add_argument("--out", default=None, help="JSON path (default stdout)")
    p.add_argument("--seed", type=int, default=0,
                   help="unused; extraction is deterministic")
    _add_extract_flags(p)
    p.set_defaults(func=cmd_diagram)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
