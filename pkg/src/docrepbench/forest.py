"""Random forest: bagged CART trees with per-split feature subsampling.

Trees grow on seeded bootstrap samples (with replacement, size n_train);
at every node mtry feature candidates are sampled without replacement and
the split minimizing weighted Gini impurity is chosen among midpoints of
consecutive distinct values. Ties break deterministically toward the
lowest feature index, then the lowest threshold; class votes tie toward
the earliest label. Out-of-bag votes are kept for error estimation and
mtry tuning.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class ForestParams:
    n_trees: int = 500
    mtry: int | str = "auto"
    min_leaf: int = 1
    max_depth: int | None = None
    seed: int = 0


@dataclass
class _Tree:
    """Flat node arrays; feature -1 marks a leaf with class counts."""

    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    counts: list[list[int] | None] = field(default_factory=list)

    def add_leaf(self, class_counts: np.ndarray) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.counts.append([int(c) for c in class_counts])
        return len(self.feature) - 1

    def add_internal(self, feat: int, thr: float) -> int:
        self.feature.append(feat)
        self.threshold.append(thr)
        self.left.append(-1)
        self.right.append(-1)
        self.counts.append(None)
        return len(self.feature) - 1

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index for every row."""
        nodes = np.zeros(X.shape[0], dtype=int)
        feature = np.array(self.feature)
        threshold = np.array(self.threshold)
        left = np.array(self.left)
        right = np.array(self.right)
        active = feature[nodes] >= 0
        while np.any(active):
            idx = np.flatnonzero(active)
            node = nodes[idx]
            goes_left = X[idx, feature[node]] <= threshold[node]
            nodes[idx] = np.where(goes_left, left[node], right[node])
            active = feature[nodes] >= 0
        return nodes

    def predict_codes(self, X: np.ndarray) -> np.ndarray:
        leaves = self.apply(X)
        counts = np.array([self.counts[i] for i in leaves])
        return counts.argmax(axis=1)


def best_gini_split(
    X: np.ndarray,
    y_codes: np.ndarray,
    n_classes: int,
    feature_candidates: np.ndarray,
    min_leaf: int = 1,
) -> tuple[int, float, float] | None:
    """Best (feature, threshold, impurity) among the candidate features.

    Thresholds are midpoints between consecutive sorted distinct values;
    impurity is the size-weighted mean of child Gini impurities. Returns
    None when no split keeps both children at min_leaf rows.
    """
    n = X.shape[0]
    best: tuple[int, float, float] | None = None
    for feat in sorted(int(f) for f in feature_candidates):
        col = X[:, feat]
        order = np.argsort(col, kind="stable")
        sorted_col = col[order]
        cum = np.eye(n_classes)[y_codes[order]].cumsum(axis=0)
        boundaries = np.flatnonzero(sorted_col[:-1] != sorted_col[1:])
        if boundaries.size == 0:
            continue
        n_left = boundaries + 1
        n_right = n - n_left
        valid = (n_left >= min_leaf) & (n_right >= min_leaf)
        if not np.any(valid):
            continue
        boundaries = boundaries[valid]
        n_left = n_left[valid]
        n_right = n_right[valid]
        left_counts = cum[boundaries]
        right_counts = cum[-1] - left_counts
        gini_left = 1.0 - ((left_counts / n_left[:, None]) ** 2).sum(axis=1)
        gini_right = 1.0 - ((right_counts / n_right[:, None]) ** 2).sum(axis=1)
        weighted = (n_left * gini_left + n_right * gini_right) / n
        pos = int(np.argmin(weighted))
        if best is None or weighted[pos] < best[2]:
            b = boundaries[pos]
            threshold = (sorted_col[b] + sorted_col[b + 1]) / 2.0
            best = (feat, float(threshold), float(weighted[pos]))
    return best


def _grow_tree(
    X: np.ndarray,
    y_codes: np.ndarray,
    n_classes: int,
    params: ForestParams,
    mtry: int,
    rng: np.random.Generator,
) -> _Tree:
    tree = _Tree()

    def grow(rows: np.ndarray, depth: int) -> int:
        counts = np.bincount(y_codes[rows], minlength=n_classes)
        if (
            counts.max() == rows.size
            or rows.size < 2 * params.min_leaf
            or (params.max_depth is not None and depth >= params.max_depth)
        ):
            return tree.add_leaf(counts)
        candidates = rng.choice(X.shape[1], size=mtry, replace=False)
        split = best_gini_split(
            X[rows], y_codes[rows], n_classes, candidates, params.min_leaf
        )
        if split is None:
            return tree.add_leaf(counts)
        feat, threshold, _ = split
        node = tree.add_internal(feat, threshold)
        goes_left = X[rows, feat] <= threshold
        tree.left[node] = grow(rows[goes_left], depth + 1)
        tree.right[node] = grow(rows[~goes_left], depth + 1)
        return node

    grow(np.arange(X.shape[0]), 0)
    return tree


@dataclass
class ForestModel:
    trees: list[_Tree]
    labels: list[str]
    params: ForestParams
    mtry: int
    n_features: int
    bootstrap_indices: list[np.ndarray]
    oob_votes: np.ndarray
    train_codes: np.ndarray

    def parameter_hash(self) -> str:
        """Digest of every fitted parameter; must be unchanged by prediction."""
        import hashlib

        digest = hashlib.sha256()
        digest.update(json.dumps(self.labels).encode())
        digest.update(str(self.mtry).encode())
        for tree in self.trees:
            digest.update(np.array(tree.feature).tobytes())
            digest.update(np.array(tree.threshold).tobytes())
        return digest.hexdigest()


def _validate_training_input(X: np.ndarray, y: list[str]) -> None:
    if X.shape[0] != len(y):
        raise ValueError(f"{X.shape[0]} rows for {len(y)} labels")
    if not np.all(np.isfinite(X)):
        raise ValueError("features contain NaN or infinite values")
    if len(set(y)) < 2:
        raise ValueError("training labels contain a single class")


def resolve_mtry(mtry: int | str, n_features: int) -> int:
    if mtry == "auto":
        return max(1, int(math.floor(math.sqrt(n_features))))
    mtry = int(mtry)
    if not 1 <= mtry <= n_features:
        raise ValueError(f"mtry {mtry} outside [1, {n_features}]")
    return mtry


def train_forest(X: np.ndarray, y: list[str], params: ForestParams) -> ForestModel:
    """Grow the ensemble; deterministic for a fixed seed.

    Per-tree seeds spawn from a SeedSequence on params.seed, so trees are
    independent of each other and could be grown in any order.
    """
    X = np.asarray(X, dtype=float)
    _validate_training_input(X, y)
    labels = sorted(set(y))
    code_of = {lbl: i for i, lbl in enumerate(labels)}
    y_codes = np.array([code_of[lbl] for lbl in y])
    n, d = X.shape
    mtry = resolve_mtry(params.mtry, d)

    trees: list[_Tree] = []
    bootstraps: list[np.ndarray] = []
    oob_votes = np.zeros((n, len(labels)))
    for seed_seq in np.random.SeedSequence(params.seed).spawn(params.n_trees):
        rng = np.random.Generator(np.random.PCG64(seed_seq))
        sample = rng.integers(0, n, size=n)
        tree = _grow_tree(X[sample], y_codes[sample], len(labels), params, mtry, rng)
        trees.append(tree)
        bootstraps.append(sample)
        oob_rows = np.setdiff1d(np.arange(n), sample)
        if oob_rows.size:
            votes = tree.predict_codes(X[oob_rows])
            oob_votes[oob_rows, votes] += 1
    return ForestModel(
        trees=trees,
        labels=labels,
        params=params,
        mtry=mtry,
        n_features=d,
        bootstrap_indices=bootstraps,
        oob_votes=oob_votes,
        train_codes=y_codes,
    )


def predict_proba(model: ForestModel, X: np.ndarray) -> np.ndarray:
    """Per-row fraction of trees voting for each class."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(
            f"feature width {X.shape[1] if X.ndim == 2 else '?'} does not "
            f"match training width {model.n_features}"
        )
    votes = np.zeros((X.shape[0], len(model.labels)))
    for tree in model.trees:
        codes = tree.predict_codes(X)
        votes[np.arange(X.shape[0]), codes] += 1
    return votes / len(model.trees)


def predict(model: ForestModel, X: np.ndarray) -> list[str]:
    """Majority vote over trees, ties toward the earliest label."""
    proba = predict_proba(model, X)
    return [model.labels[i] for i in proba.argmax(axis=1)]


def oob_error(model: ForestModel) -> float:
    """Misclassification rate of rows judged only by their out-of-bag trees."""
    covered = model.oob_votes.sum(axis=1) > 0
    if not np.any(covered):
        raise ValueError("no OOB coverage: every row was in-bag for all trees")
    predicted = model.oob_votes[covered].argmax(axis=1)
    return float(np.mean(predicted != model.train_codes[covered]))


def tune_mtry(
    X: np.ndarray,
    y: list[str],
    params: ForestParams,
    n_tree_try: int = 50,
    step_factor: float = 2.0,
    improve: float = 0.05,
) -> int:
    """Search mtry by OOB error from floor(sqrt(n_features)) outward.

    Doubles (or halves) mtry while the relative OOB improvement over the
    previous setting exceeds the threshold; returns the best mtry seen.
    """
    X = np.asarray(X, dtype=float)
    _validate_training_input(X, y)
    d = X.shape[1]
    start = max(1, int(math.floor(math.sqrt(d))))
    evaluated: dict[int, float] = {}

    def oob_at(m: int) -> float:
        if m not in evaluated:
            trial = ForestParams(
                n_trees=n_tree_try,
                mtry=m,
                min_leaf=params.min_leaf,
                max_depth=params.max_depth,
                seed=params.seed,
            )
            evaluated[m] = oob_error(train_forest(X, y, trial))
        return evaluated[m]

    best_mtry = start
    best_error = oob_at(start)
    for direction in ("left", "right"):
        current = start
        current_error = best_error
        while True:
            if direction == "left":
                nxt = max(1, int(math.ceil(current / step_factor)))
            else:
                nxt = min(d, int(math.floor(current * step_factor)))
            if nxt == current:
                break
            error = oob_at(nxt)
            gain = 1.0 - error / current_error if current_error > 0 else 0.0
            if error < best_error:
                best_error = error
                best_mtry = nxt
            if gain <= improve:
                break
            current, current_error = nxt, error
    return best_mtry


def forest_to_json(model: ForestModel, path: str | Path) -> None:
    """Persist trees as flat node-record arrays."""
    payload = {
        "labels": model.labels,
        "mtry": model.mtry,
        "n_features": model.n_features,
        "params": {
            "n_trees": model.params.n_trees,
            "mtry": model.params.mtry,
            "min_leaf": model.params.min_leaf,
            "max_depth": model.params.max_depth,
            "seed": model.params.seed,
        },
        "trees": [
            {
                "feature": tree.feature,
                "threshold": tree.threshold,
                "left": tree.left,
                "right": tree.right,
                "counts": tree.counts,
            }
            for tree in model.trees
        ],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def forest_from_json(path: str | Path) -> ForestModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    trees = [
        _Tree(
            feature=t["feature"],
            threshold=t["threshold"],
            left=t["left"],
            right=t["right"],
            counts=t["counts"],
        )
        for t in payload["trees"]
    ]
    params = ForestParams(**payload["params"])
    return ForestModel(
        trees=trees,
        labels=payload["labels"],
        params=params,
        mtry=payload["mtry"],
        n_features=payload["n_features"],
        bootstrap_indices=[],
        oob_votes=np.zeros((0, len(payload["labels"]))),
        train_codes=np.zeros(0, dtype=int),
    )
