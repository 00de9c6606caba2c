"""Quantile regression forest built from scratch on numpy.

Trees are grown on bootstrap resamples with a fresh random feature subset at
every split, splitting by variance reduction with a minimum leaf size. A
fitted forest predicts any quantile level from one weighted empirical CDF
over the training responses: each tree gives a test point the normalized
bootstrap counts of its leaf companions, weights are averaged across trees,
and the requested level is read off the resulting CDF. Predictions are
therefore non-decreasing in the level by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["QuantileForest"]


@dataclass
class _Tree:
    feature: np.ndarray  # split feature per node, -1 for leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_cols: list  # per node: rank positions of member responses, None if internal
    leaf_w: list  # per node: matching normalized bootstrap counts

    def assign(self, x: np.ndarray) -> np.ndarray:
        """Leaf (node id) reached by each row of ``x``."""
        node = np.zeros(x.shape[0], dtype=np.int64)
        while True:
            feat = self.feature[node]
            active = feat >= 0
            if not np.any(active):
                return node
            rows = np.flatnonzero(active)
            f = feat[rows]
            go_left = x[rows, f] <= self.threshold[node[rows]]
            node[rows] = np.where(
                go_left, self.left[node[rows]], self.right[node[rows]]
            )


def _best_split(
    x: np.ndarray,
    yb: np.ndarray,
    ids: np.ndarray,
    feats: np.ndarray,
    min_leaf: int,
) -> tuple[int, float] | None:
    """Highest variance-reduction split over candidate features, or None."""
    m = ids.size
    sizes = np.arange(min_leaf, m - min_leaf + 1)
    if sizes.size == 0:
        return None
    best_score = -np.inf
    best: tuple[int, float] | None = None
    for f in feats:
        v = x[ids, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        if vs[0] == vs[-1]:
            continue
        valid = vs[sizes - 1] < vs[sizes]
        if not np.any(valid):
            continue
        left_n = sizes[valid]
        cum = np.cumsum(yb[order])
        total = cum[-1]
        sl = cum[left_n - 1]
        # maximizing sum of per-side squared-mean masses == minimizing SSE
        score = sl * sl / left_n + (total - sl) ** 2 / (m - left_n)
        j = int(np.argmax(score))
        if score[j] > best_score:
            best_score = float(score[j])
            thr = 0.5 * (vs[left_n[j] - 1] + vs[left_n[j]])
            best = (int(f), float(thr))
    return best


def grow_tree(
    x: np.ndarray,
    y: np.ndarray,
    boot: np.ndarray,
    rank_of: np.ndarray,
    rng: np.random.Generator,
    min_leaf: int,
    mtry: int,
) -> _Tree:
    """Grow one regression tree on the bootstrap positions ``boot``.

    ``rank_of`` maps an original row index to its rank in the response sort
    order; leaves store member ranks so that forest-level CDF accumulation
    never re-sorts.
    """
    d = x.shape[1]
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    leaf_cols: list = []
    leaf_w: list = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        leaf_cols.append(None)
        leaf_w.append(None)
        return len(feature) - 1

    def make_leaf(node: int, ids: np.ndarray) -> None:
        cols, counts = np.unique(rank_of[ids], return_counts=True)
        leaf_cols[node] = cols
        leaf_w[node] = counts.astype(float) / ids.size

    root = new_node()
    stack: list[tuple[np.ndarray, int]] = [(boot, root)]
    while stack:
        ids, node = stack.pop()
        yb = y[ids]
        if ids.size < 2 * min_leaf or (yb[0] == yb[-1] and np.all(yb == yb[0])):
            make_leaf(node, ids)
            continue
        feats = rng.choice(d, size=min(mtry, d), replace=False)
        split = _best_split(x, yb, ids, feats, min_leaf)
        if split is None and mtry < d:
            # candidate subset was uninformative; fall back to a full scan
            split = _best_split(x, yb, ids, np.arange(d), min_leaf)
        if split is None:
            make_leaf(node, ids)
            continue
        f, thr = split
        mask = x[ids, f] <= thr
        if not mask.any() or mask.all():  # midpoint rounding collapse
            make_leaf(node, ids)
            continue
        feature[node] = f
        threshold[node] = thr
        l, r = new_node(), new_node()
        left[node], right[node] = l, r
        stack.append((ids[~mask], r))
        stack.append((ids[mask], l))

    return _Tree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        leaf_cols=leaf_cols,
        leaf_w=leaf_w,
    )


class QuantileForest:
    """Bagged regression trees exposing weighted-CDF quantile prediction."""

    def __init__(
        self,
        n_trees: int = 100,
        min_leaf: int = 5,
        mtry: int | None = None,
        seed: int = 0,
    ) -> None:
        if n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        if min_leaf < 1:
            raise ValueError("min_leaf must be at least 1")
        if mtry is not None and mtry < 1:
            raise ValueError("mtry must be at least 1")
        self.n_trees = n_trees
        self.min_leaf = min_leaf
        self.mtry = mtry
        self.seed = seed
        self._trees: list[_Tree] = []
        self._y_sorted: np.ndarray | None = None

    def fit(self, x: np.ndarray, y: np.ndarray) -> "QuantileForest":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        n, d = x.shape
        mtry = self.mtry if self.mtry is not None else math.ceil(math.sqrt(d))
        order = np.argsort(y, kind="stable")
        self._y_sorted = y[order]
        rank_of = np.empty(n, dtype=np.int64)
        rank_of[order] = np.arange(n)
        self._trees = []
        for child in np.random.SeedSequence(self.seed).spawn(self.n_trees):
            rng = np.random.default_rng(child)
            boot = rng.integers(0, n, size=n)
            self._trees.append(
                grow_tree(x, y, boot, rank_of, rng, self.min_leaf, min(mtry, d))
            )
        return self

    def predict_quantiles(
        self, x: np.ndarray, taus: tuple[float, ...], chunk: int = 2048
    ) -> np.ndarray:
        """Quantile predictions of shape (len(x), len(taus))."""
        if self._y_sorted is None:
            raise ValueError("forest is not fitted")
        x = np.asarray(x, dtype=float)
        n_train = self._y_sorted.size
        out = np.empty((x.shape[0], len(taus)))
        for start in range(0, x.shape[0], chunk):
            rows = slice(start, min(start + chunk, x.shape[0]))
            xc = x[rows]
            w = np.zeros((xc.shape[0], n_train))
            for tree in self._trees:
                leaves = tree.assign(xc)
                uniq, inv = np.unique(leaves, return_inverse=True)
                row_order = np.argsort(inv, kind="stable")
                bounds = np.searchsorted(inv[row_order], np.arange(uniq.size + 1))
                for j, leaf in enumerate(uniq):
                    grp = row_order[bounds[j] : bounds[j + 1]]
                    w[np.ix_(grp, tree.leaf_cols[leaf])] += tree.leaf_w[leaf]
            w /= self.n_trees
            cdf = np.cumsum(w, axis=1)
            for t, tau in enumerate(taus):
                idx = np.sum(cdf < tau - 1e-12, axis=1)
                np.clip(idx, 0, n_train - 1, out=idx)
                out[rows, t] = self._y_sorted[idx]
        return out
