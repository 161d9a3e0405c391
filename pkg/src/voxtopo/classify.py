"""Cross-validated classification of feature vectors, with metrics.

The evaluation protocol is stratified k-fold: within each fold an
importance model is fitted on the training split alone, features are
selected from its split gains, the final model is refitted on the
selected columns, and metrics come from the held-out split.  Selection
inside the fold keeps test rows out of every fitted quantity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gbt import GradientBoostedTrees


@dataclass(frozen=True)
class ClassifierConfig:
    n_estimators: int = 500
    learning_rate: float = 0.2
    max_depth: int = 7
    colsample_bytree: float = 0.3
    objective: str = "auto"
    seed: int = 0
    feature_selection: str = "mean"  # 'mean', 'off' or 'absolute:<tau>'
    n_hist_bins: int = 64
    exact_splits: bool = False


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    class_names: tuple[str, ...]


def make_dataset(X, y, feature_names, class_names) -> LabeledDataset:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    feature_names = tuple(feature_names)
    class_names = tuple(class_names)
    if X.ndim != 2:
        raise ValueError(f"X must be 2D, got shape {X.shape}")
    if np.isnan(X).any():
        raise ValueError("features contain NaN")
    if y.shape != (X.shape[0],):
        raise ValueError("label count does not match rows")
    if len(feature_names) != X.shape[1]:
        raise ValueError("feature name count does not match columns")
    if len(class_names) < 2:
        raise ValueError("need at least 2 classes")
    if y.size and not (0 <= y.min() and y.max() < len(class_names)):
        raise ValueError("labels outside the declared class range")
    return LabeledDataset(X=X, y=y, feature_names=feature_names, class_names=class_names)


def merge_binary(ds: LabeledDataset) -> LabeledDataset:
    """Collapse every class above 0 into a single positive class."""
    if len(ds.class_names) < 3:
        raise ValueError("merge_binary expects 3 or more classes")
    merged = "+".join(ds.class_names[1:])
    return LabeledDataset(
        X=ds.X,
        y=(ds.y > 0).astype(np.int64),
        feature_names=ds.feature_names,
        class_names=(ds.class_names[0], merged),
    )


def select_features(importances: np.ndarray, mode: str = "mean") -> np.ndarray:
    """Indices of features kept by an importance threshold, ascending.

    'mean' keeps importances strictly above the mean, 'absolute:<tau>'
    strictly above tau, 'off' keeps everything.  An empty selection falls
    back to the single highest-importance feature.
    """
    importances = np.asarray(importances, dtype=np.float64)
    if mode == "off":
        return np.arange(importances.shape[0])
    if mode == "mean":
        tau = importances.mean()
    elif mode.startswith("absolute:"):
        tau = float(mode.split(":", 1)[1])
    else:
        raise ValueError(f"unknown selection mode {mode!r}")
    keep = np.flatnonzero(importances > tau)
    if keep.size == 0:
        keep = np.array([int(np.argmax(importances))])
    return keep


def stratified_folds(y, k: int, seed: int = 0) -> list[np.ndarray]:
    """Test-index arrays for k folds with per-class round-robin assignment."""
    y = np.asarray(y)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        if idx.size < k:
            raise ValueError(
                f"class {cls} has {idx.size} samples, fewer than k = {k}"
            )
        perm = rng.permutation(idx)
        for pos, i in enumerate(perm.tolist()):
            folds[pos % k].append(i)
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true), np.asarray(y_pred)), 1)
    return cm


def metrics_from_confusion(cm: np.ndarray) -> dict:
    """Accuracy, sensitivity, specificity, precision, recall and F1.

    Binary matrices treat class 1 as positive; larger matrices report
    macro averages with specificity taken one-vs-rest.  Division by zero
    yields 0.0 and the affected metric names are listed under
    'zero_division'.
    """
    cm = np.asarray(cm, dtype=np.int64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.shape[0] < 2:
        raise ValueError(f"confusion matrix must be square K>=2, got {cm.shape}")
    total = int(cm.sum())
    flags: list[str] = []

    def ratio(num, den, name):
        if den == 0:
            flags.append(name)
            return 0.0
        return float(num) / float(den)

    accuracy = ratio(np.trace(cm), total, "accuracy")
    if cm.shape[0] == 2:
        tn, fp = int(cm[0, 0]), int(cm[0, 1])
        fn, tp = int(cm[1, 0]), int(cm[1, 1])
        sensitivity = ratio(tp, tp + fn, "sensitivity")
        specificity = ratio(tn, tn + fp, "specificity")
        precision = ratio(tp, tp + fp, "precision")
        recall = sensitivity
        f1 = ratio(2.0 * precision * recall, precision + recall, "f1")
    else:
        sens, specs, precs = [], [], []
        for k in range(cm.shape[0]):
            row = int(cm[k].sum())
            col = int(cm[:, k].sum())
            tp = int(cm[k, k])
            sens.append(ratio(tp, row, f"sensitivity[{k}]"))
            specs.append(ratio(total - row - col + tp, total - row, f"specificity[{k}]"))
            precs.append(ratio(tp, col, f"precision[{k}]"))
        sensitivity = float(np.mean(sens))
        specificity = float(np.mean(specs))
        precision = float(np.mean(precs))
        recall = sensitivity
        f1 = ratio(2.0 * precision * recall, precision + recall, "f1")
    return {
        "accuracy": accuracy,
        "sensitivity": sensitivity,
        "specificity": specificity,
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "zero_division": flags,
    }


def _rank_with_ties(scores: np.ndarray) -> np.ndarray:
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(scores.shape[0], dtype=np.float64)
    s = scores[order]
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[j + 1] == s[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def roc_auc(y_true, scores) -> float:
    """Rank-based binary AUC (ties get averaged ranks); nan if one-sided."""
    y_true = np.asarray(y_true)
    scores = np.asarray(scores, dtype=np.float64)
    pos = y_true == 1
    n_pos = int(pos.sum())
    n_neg = y_true.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        return float("nan")
    ranks = _rank_with_ties(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def roc_auc_ovr(y_true, proba) -> float:
    """Macro one-vs-rest AUC from class-probability columns."""
    proba = np.asarray(proba, dtype=np.float64)
    if proba.shape[1] == 2:
        return roc_auc(y_true, proba[:, 1])
    return float(
        np.mean([roc_auc(y_true == k, proba[:, k]) for k in range(proba.shape[1])])
    )


def roc_points(y_true, scores) -> np.ndarray:
    """(fpr, tpr) step points, descending score threshold, with endpoints."""
    y_true = np.asarray(y_true)
    scores = np.asarray(scores, dtype=np.float64)
    order = np.argsort(-scores, kind="mergesort")
    y_sorted = y_true[order]
    s_sorted = scores[order]
    tps = np.cumsum(y_sorted == 1)
    fps = np.cumsum(y_sorted == 0)
    # keep the last point of each tied-score run
    keep = np.append(s_sorted[1:] != s_sorted[:-1], True)
    tps = tps[keep]
    fps = fps[keep]
    n_pos = tps[-1] if len(tps) else 0
    n_neg = fps[-1] if len(fps) else 0
    tpr = tps / n_pos if n_pos else np.zeros(len(tps))
    fpr = fps / n_neg if n_neg else np.zeros(len(fps))
    return np.column_stack([np.concatenate([[0.0], fpr]), np.concatenate([[0.0], tpr])])


def cross_validate(ds: LabeledDataset, cfg: ClassifierConfig, k: int = 10) -> dict:
    """Stratified k-fold evaluation; returns a JSON-ready report.

    The report carries per-fold metrics, confusion counts and selected
    feature names, their across-fold means, the summed confusion matrix
    and its row-normalized form, and the evaluated configuration.
    """
    n_classes = len(ds.class_names)
    folds = stratified_folds(ds.y, k, cfg.seed)
    all_idx = np.arange(ds.y.shape[0])
    per_fold = []
    total_cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    roc_per_fold = []

    def model() -> GradientBoostedTrees:
        return GradientBoostedTrees(
            n_estimators=cfg.n_estimators,
            learning_rate=cfg.learning_rate,
            max_depth=cfg.max_depth,
            colsample_bytree=cfg.colsample_bytree,
            objective=cfg.objective,
            seed=cfg.seed,
            n_hist_bins=cfg.n_hist_bins,
            exact_splits=cfg.exact_splits,
        )

    for fold_id, test_idx in enumerate(folds):
        train_idx = np.setdiff1d(all_idx, test_idx)
        X_tr, y_tr = ds.X[train_idx], ds.y[train_idx]
        X_te, y_te = ds.X[test_idx], ds.y[test_idx]

        if cfg.feature_selection == "off":
            selected = np.arange(ds.X.shape[1])
        else:
            probe = model().fit(X_tr, y_tr)
            selected = select_features(probe.feature_importances_, cfg.feature_selection)

        clf = model().fit(X_tr[:, selected], y_tr)
        proba = clf.predict_proba(X_te[:, selected])
        pred = np.argmax(proba, axis=1)

        cm = confusion_matrix(y_te, pred, n_classes)
        total_cm += cm
        metrics = metrics_from_confusion(cm)
        metrics["roc_auc"] = roc_auc_ovr(y_te, proba)
        pts = []
        if n_classes == 2:
            for fpr, tpr in roc_points(y_te, proba[:, 1]).tolist():
                pts.append([1, fpr, tpr])
        else:
            for cls in range(n_classes):
                for fpr, tpr in roc_points(y_te == cls, proba[:, cls]).tolist():
                    pts.append([cls, fpr, tpr])
        roc_per_fold.append(pts)
        per_fold.append(
            {
                "fold": fold_id,
                "test_size": int(test_idx.shape[0]),
                "confusion": cm.tolist(),
                "selected_features": [ds.feature_names[i] for i in selected.tolist()],
                **{m: metrics[m] for m in (
                    "accuracy", "sensitivity", "specificity",
                    "precision", "recall", "f1", "roc_auc",
                )},
                "zero_division": metrics["zero_division"],
            }
        )

    scalar = ("accuracy", "sensitivity", "specificity", "precision", "recall", "f1", "roc_auc")
    mean = {m: float(np.mean([f[m] for f in per_fold])) for m in scalar}
    row_sums = total_cm.sum(axis=1, keepdims=True).astype(np.float64)
    row_norm = np.divide(
        total_cm, row_sums, out=np.zeros_like(total_cm, dtype=np.float64),
        where=row_sums > 0,
    )
    return {
        "class_names": list(ds.class_names),
        "n_samples": int(ds.y.shape[0]),
        "n_features": int(ds.X.shape[1]),
        "k": k,
        "config": {
            "n_estimators": cfg.n_estimators,
            "learning_rate": cfg.learning_rate,
            "max_depth": cfg.max_depth,
            "colsample_bytree": cfg.colsample_bytree,
            "objective": cfg.objective,
            "seed": cfg.seed,
            "feature_selection": cfg.feature_selection,
            "n_hist_bins": cfg.n_hist_bins,
            "exact_splits": cfg.exact_splits,
        },
        "per_fold": per_fold,
        "mean": mean,
        "confusion_total": total_cm.tolist(),
        "confusion_row_normalized": row_norm.tolist(),
        "roc_points": roc_per_fold,
    }
