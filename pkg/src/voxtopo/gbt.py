"""Gradient-boosted decision trees with histogram split finding.

Newton boosting on a logistic (binary) or softmax (multiclass) objective.
Split candidates come from per-feature quantile bin edges (or every unique
value in exact mode); gains use the regularized formula
0.5 * (GL^2/(HL+lam) + GR^2/(HR+lam) - G^2/(H+lam)) and leaves are
-G/(H+lam) scaled by the learning rate.  Everything is driven by numpy
with seeded generators, so fits are reproducible bit for bit.  Histogram
thresholds are interpolated order statistics, which keeps fitted trees
equivalent under strictly monotone feature transforms.
"""

from __future__ import annotations

import numpy as np

OBJECTIVES = ("auto", "logistic", "softmax")


def _expit(m: np.ndarray) -> np.ndarray:
    out = np.empty_like(m, dtype=np.float64)
    pos = m >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-m[pos]))
    em = np.exp(m[~pos])
    out[~pos] = em / (1.0 + em)
    return out


def _softmax(m: np.ndarray) -> np.ndarray:
    z = m - m.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class _Tree:
    __slots__ = ("feature", "threshold", "left", "right", "value", "root")

    def __init__(self, feature, threshold, left, right, value, root):
        self.feature = np.asarray(feature, dtype=np.int32)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int32)
        self.right = np.asarray(right, dtype=np.int32)
        self.value = np.asarray(value, dtype=np.float64)
        self.root = root

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape[0], dtype=np.float64)
        stack = [(self.root, np.arange(X.shape[0]))]
        while stack:
            nid, idx = stack.pop()
            f = self.feature[nid]
            if f < 0:
                out[idx] = self.value[nid]
                continue
            mask = X[idx, f] < self.threshold[nid]
            stack.append((self.right[nid], idx[~mask]))
            stack.append((self.left[nid], idx[mask]))
        return out


class GradientBoostedTrees:
    """Boosted tree classifier over dense float features.

    objective 'auto' picks logistic for 2 classes and softmax otherwise.
    colsample_bytree draws a fresh feature subset per tree from
    (seed, tree index), so fits are independent of call order.
    feature_importances_ holds total split gain per feature after fit.
    """

    def __init__(
        self,
        n_estimators: int = 500,
        learning_rate: float = 0.2,
        max_depth: int = 7,
        colsample_bytree: float = 0.3,
        objective: str = "auto",
        seed: int = 0,
        n_hist_bins: int = 64,
        exact_splits: bool = False,
        reg_lambda: float = 1.0,
        min_child_weight: float = 1.0,
    ):
        if objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}, got {objective!r}")
        if not 0.0 < colsample_bytree <= 1.0:
            raise ValueError(f"colsample_bytree must be in (0, 1], got {colsample_bytree}")
        if n_estimators < 1 or max_depth < 1 or n_hist_bins < 2:
            raise ValueError("n_estimators, max_depth >= 1 and n_hist_bins >= 2 required")
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.colsample_bytree = colsample_bytree
        self.objective = objective
        self.seed = seed
        self.n_hist_bins = n_hist_bins
        self.exact_splits = exact_splits
        self.reg_lambda = reg_lambda
        self.min_child_weight = min_child_weight
        self.n_classes_: int | None = None
        self.n_features_: int | None = None
        self.feature_importances_: np.ndarray | None = None
        self._trees: list[_Tree] = []
        self._resolved_objective: str | None = None

    # -- binning -------------------------------------------------------

    def _build_edges(self, X: np.ndarray) -> list[np.ndarray]:
        edges = []
        if self.exact_splits:
            for f in range(X.shape[1]):
                edges.append(np.unique(X[:, f])[1:])
        else:
            qs = np.linspace(0.0, 1.0, self.n_hist_bins + 1)[1:-1]
            for f in range(X.shape[1]):
                edges.append(np.unique(np.quantile(X[:, f], qs)))
        return edges

    @staticmethod
    def _bin_columns(X: np.ndarray, edges: list[np.ndarray]) -> np.ndarray:
        binned = np.empty(X.shape, dtype=np.int32)
        for f, e in enumerate(edges):
            binned[:, f] = np.searchsorted(e, X[:, f], side="right")
        return binned

    # -- growing -------------------------------------------------------

    def _grow_tree(self, binned, edges, g, h, feats, stride):
        lam = self.reg_lambda
        lr = self.learning_rate
        mcw = self.min_child_weight
        base = np.arange(len(feats), dtype=np.int64) * stride
        feature: list[int] = []
        threshold: list[float] = []
        left: list[int] = []
        right: list[int] = []
        value: list[float] = []
        margin_delta = np.zeros(len(g), dtype=np.float64)
        importances = self.feature_importances_

        def new_node():
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(0.0)
            return len(feature) - 1

        def grow(idx: np.ndarray, depth: int) -> int:
            nid = new_node()
            g_sub = g[idx]
            h_sub = h[idx]
            G = g_sub.sum()
            H = h_sub.sum()
            if depth < self.max_depth and idx.shape[0] >= 2:
                sub = binned[np.ix_(idx, feats)].astype(np.int64)
                codes = (sub + base[np.newaxis, :]).ravel()
                size = len(feats) * stride
                rep_g = np.repeat(g_sub, len(feats))
                rep_h = np.repeat(h_sub, len(feats))
                hist_g = np.bincount(codes, weights=rep_g, minlength=size)
                hist_h = np.bincount(codes, weights=rep_h, minlength=size)
                hist_c = np.bincount(codes, minlength=size)
                hist_g = hist_g.reshape(len(feats), stride)
                hist_h = hist_h.reshape(len(feats), stride)
                hist_c = hist_c.reshape(len(feats), stride)

                GL = np.cumsum(hist_g, axis=1)[:, :-1]
                HL = np.cumsum(hist_h, axis=1)[:, :-1]
                CL = np.cumsum(hist_c, axis=1)[:, :-1]
                GR = G - GL
                HR = H - HL
                CR = idx.shape[0] - CL
                valid = (CL > 0) & (CR > 0) & (HL >= mcw) & (HR >= mcw)
                parent_score = G * G / (H + lam)
                gains = np.where(
                    valid,
                    0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - parent_score),
                    -np.inf,
                )
                flat = int(np.argmax(gains))
                best = gains.ravel()[flat]
                if best > 0.0:
                    f_local, b = divmod(flat, stride - 1)
                    f_global = int(feats[f_local])
                    importances[f_global] += best
                    mask = binned[idx, f_global] <= b
                    lid = grow(idx[mask], depth + 1)
                    rid = grow(idx[~mask], depth + 1)
                    feature[nid] = f_global
                    threshold[nid] = float(edges[f_global][b])
                    left[nid] = lid
                    right[nid] = rid
                    return nid
            value[nid] = -G / (H + lam) * lr
            margin_delta[idx] = value[nid]
            return nid

        root = grow(np.arange(binned.shape[0]), 0)
        tree = _Tree(feature, threshold, left, right, value, root)
        return tree, margin_delta

    def _feature_subset(self, tree_index: int) -> np.ndarray:
        n_feat = self.n_features_
        n_keep = max(1, int(np.floor(self.colsample_bytree * n_feat + 0.5)))
        if n_keep >= n_feat:
            return np.arange(n_feat)
        rng = np.random.default_rng((self.seed, tree_index))
        return np.sort(rng.choice(n_feat, size=n_keep, replace=False))

    # -- public API ----------------------------------------------------

    def fit(self, X, y) -> "GradientBoostedTrees":
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 2:
            raise ValueError(f"X must be 2D, got shape {X.shape}")
        if np.isnan(X).any():
            raise ValueError("X contains NaN")
        if y.shape != (X.shape[0],):
            raise ValueError("y length does not match X rows")
        y = y.astype(np.int64)
        n_classes = int(y.max()) + 1 if y.size else 0
        if y.min() < 0:
            raise ValueError("labels must be non-negative integers")
        if len(np.unique(y)) < 2:
            raise ValueError("training set contains a single class")

        objective = self.objective
        if objective == "auto":
            objective = "logistic" if n_classes == 2 else "softmax"
        if objective == "logistic" and n_classes != 2:
            raise ValueError(f"logistic objective needs 2 classes, got {n_classes}")
        self._resolved_objective = objective
        self.n_classes_ = n_classes
        self.n_features_ = X.shape[1]
        self.feature_importances_ = np.zeros(X.shape[1], dtype=np.float64)
        self._trees = []

        edges = self._build_edges(X)
        stride = max((len(e) for e in edges), default=0) + 1
        binned = self._bin_columns(X, edges)

        if objective == "logistic":
            margins = np.zeros(X.shape[0], dtype=np.float64)
            y_f = y.astype(np.float64)
            for r in range(self.n_estimators):
                p = _expit(margins)
                grad = p - y_f
                hess = np.maximum(p * (1.0 - p), 1e-16)
                feats = self._feature_subset(r)
                tree, delta = self._grow_tree(binned, edges, grad, hess, feats, stride)
                self._trees.append(tree)
                margins += delta
        else:
            margins = np.zeros((X.shape[0], n_classes), dtype=np.float64)
            onehot = np.eye(n_classes, dtype=np.float64)[y]
            for r in range(self.n_estimators):
                P = _softmax(margins)
                for k in range(n_classes):
                    grad = P[:, k] - onehot[:, k]
                    hess = np.maximum(P[:, k] * (1.0 - P[:, k]), 1e-16)
                    feats = self._feature_subset(r * n_classes + k)
                    tree, delta = self._grow_tree(
                        binned, edges, grad, hess, feats, stride
                    )
                    self._trees.append(tree)
                    margins[:, k] += delta
        return self

    def _check_fitted(self, X: np.ndarray) -> np.ndarray:
        if self.n_classes_ is None:
            raise ValueError("model is not fitted")
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features_:
            raise ValueError(
                f"expected {self.n_features_} features, got shape {X.shape}"
            )
        return X

    def predict_margin(self, X) -> np.ndarray:
        X = self._check_fitted(X)
        if self._resolved_objective == "logistic":
            out = np.zeros(X.shape[0], dtype=np.float64)
            for tree in self._trees:
                out += tree.predict(X)
            return out
        K = self.n_classes_
        out = np.zeros((X.shape[0], K), dtype=np.float64)
        for t, tree in enumerate(self._trees):
            out[:, t % K] += tree.predict(X)
        return out

    def predict_proba(self, X) -> np.ndarray:
        m = self.predict_margin(X)
        if self._resolved_objective == "logistic":
            p = _expit(m)
            return np.column_stack([1.0 - p, p])
        return _softmax(m)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)
