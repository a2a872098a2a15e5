from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from learners.base import TrainedModel
from schemas.learner import LearnerKind


@dataclass
class Node:
    proba: float
    n_samples: int
    depth: int
    feature: Optional[int] = None
    threshold: float = 0.0
    left: Optional["Node"] = None
    right: Optional["Node"] = None

    def is_leaf(self) -> bool:
        return self.feature is None


def gini(n_pos: np.ndarray, n: np.ndarray) -> np.ndarray:
    p = n_pos / n
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def best_split(Z: np.ndarray, y: np.ndarray) -> Optional[Tuple[int, float, float]]:
    """(feature, threshold, weighted child impurity) of the best single-feature split"""
    n = len(y)
    best: Optional[Tuple[int, float, float]] = None
    for j in range(Z.shape[1]):
        order = np.argsort(Z[:, j], kind="stable")
        values = Z[order, j]
        cum_pos = np.cumsum(y[order])
        # candidate cut after position i, only between distinct values
        cuts = np.flatnonzero(values[:-1] < values[1:])
        if len(cuts) == 0:
            continue
        n_left = cuts + 1.0
        n_right = n - n_left
        pos_left = cum_pos[cuts]
        pos_right = cum_pos[-1] - pos_left
        weighted = (n_left * gini(pos_left, n_left) + n_right * gini(pos_right, n_right)) / n
        i = int(np.argmin(weighted))
        if best is None or weighted[i] < best[2]:
            cut = cuts[i]
            best = (j, 0.5 * (values[cut] + values[cut + 1]), float(weighted[i]))
    return best


class DecisionTreeModel(TrainedModel):
    """CART-style tree on Gini impurity, regularized by max_depth only"""
    kind = LearnerKind.decision_tree

    def fit(self, Z: np.ndarray, y: np.ndarray, rng: np.random.Generator) -> None:
        self.max_depth = int(self.spec.reg.value)
        self.root = self._grow(Z, y, depth=0)

    def _grow(self, Z: np.ndarray, y: np.ndarray, depth: int) -> Node:
        n_pos = float(y.sum())
        node = Node(proba=n_pos / len(y), n_samples=len(y), depth=depth)
        if depth >= self.max_depth or n_pos == 0 or n_pos == len(y):
            return node

        split = best_split(Z, y)
        parent = float(gini(np.array(n_pos), np.array(float(len(y)))))
        if split is None or split[2] >= parent - 1e-12:
            return node

        feature, threshold, _ = split
        goes_left = Z[:, feature] <= threshold
        node.feature = feature
        node.threshold = threshold
        node.left = self._grow(Z[goes_left], y[goes_left], depth + 1)
        node.right = self._grow(Z[~goes_left], y[~goes_left], depth + 1)
        return node

    def depth(self) -> int:
        """Longest root-to-leaf path, counted in questions asked"""
        def _depth(node: Node) -> int:
            if node.is_leaf():
                return 0
            return 1 + max(_depth(node.left), _depth(node.right))  # type: ignore[arg-type]
        return _depth(self.root)

    def _proba(self, Z: np.ndarray) -> np.ndarray:
        proba = np.empty(len(Z))
        stack = [(self.root, np.arange(len(Z)))]
        while stack:
            node, rows = stack.pop()
            if len(rows) == 0:
                continue
            if node.is_leaf():
                proba[rows] = node.proba
                continue
            goes_left = Z[rows, node.feature] <= node.threshold
            stack.append((node.left, rows[goes_left]))
            stack.append((node.right, rows[~goes_left]))
        return proba
