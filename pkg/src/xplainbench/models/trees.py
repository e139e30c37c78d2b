"""Decision-tree building blocks shared by the forest and boosting models.

Trees are grown recursively into :class:`TreeNode` records, then flattened to
parallel numpy arrays for fast vectorized prediction and for the attribution
kernels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TreeNode:
    """One tree node. Internal nodes carry (feature_index, threshold, children);
    leaves carry either a class distribution or a real leaf value."""

    feature_index: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    class_distribution: np.ndarray | None = None
    leaf_value: float = 0.0
    n_samples: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.feature_index < 0


@dataclass
class FlatTree:
    """Array form of a tree: node i splits on feature[i] at threshold[i]
    (x <= threshold goes left); feature[i] == -1 marks a leaf. ``value`` has
    one row per node (class distribution, or a single column for regression)."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)


def flatten_tree(root: TreeNode, value_width: int) -> FlatTree:
    nodes: list[TreeNode] = []

    def collect(node):
        nodes.append(node)
        if not node.is_leaf:
            collect(node.left)
            collect(node.right)

    collect(root)
    n = len(nodes)
    order = {id(node): i for i, node in enumerate(nodes)}
    feature = np.full(n, -1, dtype=np.int64)
    threshold = np.zeros(n)
    left = np.full(n, -1, dtype=np.int64)
    right = np.full(n, -1, dtype=np.int64)
    value = np.zeros((n, value_width))
    for i, node in enumerate(nodes):
        if node.is_leaf:
            if node.class_distribution is not None:
                value[i] = node.class_distribution
            else:
                value[i, 0] = node.leaf_value
        else:
            feature[i] = node.feature_index
            threshold[i] = node.threshold
            left[i] = order[id(node.left)]
            right[i] = order[id(node.right)]
    return FlatTree(feature, threshold, left, right, value)


def tree_apply(tree: FlatTree, X: np.ndarray) -> np.ndarray:
    """Leaf index reached by each row of X."""
    idx = np.zeros(len(X), dtype=np.int64)
    active = np.flatnonzero(tree.feature[idx] >= 0)
    while active.size:
        node = idx[active]
        go_left = X[active, tree.feature[node]] <= tree.threshold[node]
        idx[active] = np.where(go_left, tree.left[node], tree.right[node])
        active = active[tree.feature[idx[active]] >= 0]
    return idx


def tree_predict(tree: FlatTree, X: np.ndarray) -> np.ndarray:
    return tree.value[tree_apply(tree, X)]


def _split_candidates(col_sorted: np.ndarray, min_leaf: int):
    """Indices i such that splitting between positions i-1 and i is valid:
    the sorted values differ there and both sides hold >= min_leaf samples."""
    n = len(col_sorted)
    pos = np.arange(min_leaf, n - min_leaf + 1)
    if not pos.size:
        return pos
    return pos[col_sorted[pos] > col_sorted[pos - 1]]


def best_gini_split(X, y_onehot, feature_ids, min_leaf):
    """Best (feature, threshold) by weighted Gini impurity over the given
    features. Ties break toward the lowest feature index, then the lowest
    threshold. Returns (score, feature, threshold) or None."""
    n = X.shape[0]
    best = None
    for j in sorted(feature_ids):
        order = np.argsort(X[:, j], kind="stable")
        col = X[order, j]
        cand = _split_candidates(col, min_leaf)
        if not cand.size:
            continue
        cum = np.cumsum(y_onehot[order], axis=0)
        total = cum[-1]
        nl = cand.astype(np.float64)
        nr = n - nl
        cl = cum[cand - 1]
        cr = total - cl
        gini_l = 1.0 - np.sum((cl / nl[:, None]) ** 2, axis=1)
        gini_r = 1.0 - np.sum((cr / nr[:, None]) ** 2, axis=1)
        score = (nl * gini_l + nr * gini_r) / n
        k = int(np.argmin(score))
        thr = 0.5 * (col[cand[k] - 1] + col[cand[k]])
        key = (float(score[k]), j, float(thr))
        if best is None or key < best:
            best = key
    return best


def grow_gini_tree(X, y, n_classes, max_depth, min_samples_leaf,
                   features_per_split, rng) -> TreeNode:
    """CART classification tree with Gini impurity and per-split feature
    subsampling."""
    y_onehot = np.zeros((len(y), n_classes))
    y_onehot[np.arange(len(y)), y] = 1.0

    def leaf(idx):
        counts = y_onehot[idx].sum(axis=0)
        return TreeNode(class_distribution=counts / counts.sum(), n_samples=len(idx))

    def build(idx, depth):
        ys = y[idx]
        if (
            len(idx) < 2 * min_samples_leaf
            or (max_depth is not None and depth >= max_depth)
            or np.all(ys == ys[0])
        ):
            return leaf(idx)
        d = X.shape[1]
        m = min(features_per_split, d)
        feats = rng.choice(d, size=m, replace=False)
        found = best_gini_split(X[idx], y_onehot[idx], feats, min_samples_leaf)
        if found is None:
            return leaf(idx)
        _, j, thr = found
        mask = X[idx, j] <= thr
        node = TreeNode(feature_index=j, threshold=thr, n_samples=len(idx))
        node.left = build(idx[mask], depth + 1)
        node.right = build(idx[~mask], depth + 1)
        return node

    return build(np.arange(len(y)), 0)


def best_newton_split(X, g, h, lam, min_leaf, min_child_weight):
    """Best split by second-order gain with L2 leaf regularization.

    gain = 1/2 [GL^2/(HL+lam) + GR^2/(HR+lam) - G^2/(H+lam)]; both children
    must carry hessian mass >= min_child_weight. Ties break toward the lowest
    feature index, then the lowest threshold.
    """
    n, d = X.shape
    G, H = g.sum(), h.sum()
    parent = G * G / (H + lam)
    best = None
    for j in range(d):
        order = np.argsort(X[:, j], kind="stable")
        col = X[order, j]
        cand = _split_candidates(col, min_leaf)
        if not cand.size:
            continue
        gl = np.cumsum(g[order])[cand - 1]
        hl = np.cumsum(h[order])[cand - 1]
        gr, hr = G - gl, H - hl
        ok = (hl >= min_child_weight) & (hr >= min_child_weight)
        if not ok.any():
            continue
        gain = 0.5 * (gl**2 / (hl + lam) + gr**2 / (hr + lam) - parent)
        gain[~ok] = -np.inf
        k = int(np.argmax(gain))
        if gain[k] <= 0.0:
            continue
        thr = 0.5 * (col[cand[k] - 1] + col[cand[k]])
        key = (-float(gain[k]), j, float(thr))
        if best is None or key < best:
            best = key
    return best


def grow_newton_tree(X, g, h, max_depth, lam, min_child_weight) -> TreeNode:
    """Regression tree for one boosting round; leaf weight = -G/(H+lam)."""

    def leaf(idx):
        val = -g[idx].sum() / (h[idx].sum() + lam)
        return TreeNode(leaf_value=float(val), n_samples=len(idx))

    def build(idx, depth):
        if depth >= max_depth or len(idx) < 2:
            return leaf(idx)
        found = best_newton_split(X[idx], g[idx], h[idx], lam, 1, min_child_weight)
        if found is None:
            return leaf(idx)
        _, j, thr = found
        mask = X[idx, j] <= thr
        node = TreeNode(feature_index=j, threshold=thr, n_samples=len(idx))
        node.left = build(idx[mask], depth + 1)
        node.right = build(idx[~mask], depth + 1)
        return node

    return build(np.arange(len(g)), 0)
