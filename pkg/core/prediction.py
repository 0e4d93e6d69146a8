"""Best-first multi-concept prediction over a trained concept tree.

Nodes are ranked by their collocation score, the log of cue validity times
category validity: ``log P(c|x) + log P(x|c)``. ``P(c|x)`` is normalised over
the candidates produced by the same expansion, with prior
``P(c) = count(c) / count(root)``.

Prediction only reads the tree.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.special import logsumexp, softmax

from .errors import ModelError, UsageError
from .stats import LOG_2PI, as_features
from .tree import CobwebTree, ConceptNode

logger = logging.getLogger(__name__)

WEIGHT_SIGNS = ("negative", "positive")
PREDICT_MODES = ("multi", "greedy-leaf")


@dataclass(frozen=True)
class PredictConfig:
    """How many nodes to expand and how to weight them.

    ``weight_sign="negative"`` weights expanded concepts by ``exp(-s)`` as the
    combination rule is usually printed; ``"positive"`` uses ``exp(+s)``.
    """

    n_max: int = 30
    weight_sign: str = "negative"
    mode: str = "multi"
    smoothing: float = 1.0

    def __post_init__(self) -> None:
        if self.n_max < 1:
            raise UsageError("n_max must be >= 1")
        if self.weight_sign not in WEIGHT_SIGNS:
            raise UsageError(f"unknown weight_sign {self.weight_sign!r}")
        if self.mode not in PREDICT_MODES:
            raise UsageError(f"unknown prediction mode {self.mode!r}")
        if self.smoothing < 0:
            raise UsageError("smoothing must be >= 0")


@dataclass(order=True)
class FrontierEntry:
    """A candidate awaiting expansion; heap order pops the best score first."""

    priority: float
    node_id: int
    log_score: float = field(compare=False)

    @classmethod
    def of(cls, node_id: int, log_score: float) -> "FrontierEntry":
        return cls(-log_score, node_id, log_score)


def _log_px(tree: CobwebTree, node: ConceptNode, x: np.ndarray) -> float:
    """log P(x|c) using per-node cached variance terms."""
    if node.count < 1:
        raise ModelError(f"node {node.id} is empty")
    cache = node._cache
    var = node.variance(tree.config.acuity)
    norm = cache.get("log_norm")
    if norm is None:
        norm = cache["log_norm"] = -0.5 * float(np.sum(LOG_2PI + np.log(var)))
    diff = x - node.stats.mean
    return norm - 0.5 * float(np.sum(diff * diff / var))


def _scores(tree: CobwebTree, nodes: Sequence[ConceptNode], x: np.ndarray) -> np.ndarray:
    """Collocation scores of `nodes`, normalising P(c|x) over the group."""
    root_count = tree.root.count
    log_px = np.array([_log_px(tree, n, x) for n in nodes])
    log_prior = np.log(np.array([n.count for n in nodes], dtype=np.float64) / root_count)
    joint = log_prior + log_px
    return (joint - logsumexp(joint)) + log_px


def collocation_log_score(
    tree: CobwebTree,
    node_id: int,
    x,
    candidates: Optional[Sequence[int]] = None,
) -> float:
    """Collocation score of one node.

    Args:
        tree: The tree to score against.
        node_id: Node to score.
        x: Feature vector.
        candidates: Ids competing for P(c|x). Defaults to the node's siblings
            (itself included); the root competes only with itself.

    Raises:
        ModelError: If the node (or a candidate) is empty.
        DimensionError: On a dimensionality mismatch.
    """
    x = as_features(x, tree.dim)
    node = tree.node(node_id)
    if candidates is None:
        candidates = [node_id] if node.parent is None else tree.node(node.parent).children
    if node_id not in candidates:
        raise UsageError(f"node {node_id} is not among its candidates")
    group = [tree.node(c) for c in candidates]
    return float(_scores(tree, group, x)[list(candidates).index(node_id)])


def _expand(tree: CobwebTree, x: np.ndarray, n_max: int, start: int) -> List[FrontierEntry]:
    first = tree.node(start)
    if first.count < 1:
        raise ModelError("cannot predict with an empty tree")
    frontier = [FrontierEntry.of(start, float(_scores(tree, [first], x)[0]))]
    expanded: List[FrontierEntry] = []
    while frontier and len(expanded) < n_max:
        entry = heapq.heappop(frontier)
        expanded.append(entry)
        node = tree.node(entry.node_id)
        if node.children:
            children = tree.children_of(node)
            for child, score in zip(children, _scores(tree, children, x)):
                heapq.heappush(frontier, FrontierEntry.of(child.id, float(score)))
    return expanded


def predict(
    tree: CobwebTree,
    x,
    cfg: PredictConfig = PredictConfig(),
    start: Optional[int] = None,
) -> np.ndarray:
    """Label distribution from the `n_max` best-first expanded concepts.

    Args:
        tree: Trained tree (not modified).
        x: Feature vector of length ``tree.dim``.
        cfg: Expansion budget, weight sign and mode.
        start: Node to start the search from; defaults to the root.

    Returns:
        Probability vector of length ``tree.n_classes``.
    """
    if cfg.mode == "greedy-leaf":
        return predict_greedy_leaf(tree, x, cfg.smoothing)
    x = as_features(x, tree.dim)
    expanded = _expand(tree, x, cfg.n_max, tree.root_id if start is None else start)
    scores = np.array([e.log_score for e in expanded])
    sign = -1.0 if cfg.weight_sign == "negative" else 1.0
    weights = softmax(sign * scores)
    dists = np.stack([tree.node(e.node_id).labels.probabilities(cfg.smoothing) for e in expanded])
    out = weights @ dists
    return out / out.sum()


def predict_greedy_leaf(tree: CobwebTree, x, smoothing: float = 1.0) -> np.ndarray:
    """Follow the highest-collocation child down to a leaf; no counts change."""
    return tree.node(greedy_leaf_id(tree, x)).labels.probabilities(smoothing)


def greedy_leaf_id(tree: CobwebTree, x) -> int:
    """Id of the leaf :func:`predict_greedy_leaf` stops at."""
    x = as_features(x, tree.dim)
    node = tree.root
    if node.count < 1:
        raise ModelError("cannot predict with an empty tree")
    while node.children:
        children = tree.children_of(node)
        node = children[int(np.argmax(_scores(tree, children, x)))]
    return node.id


def predict_batch(tree: CobwebTree, features, cfg: PredictConfig = PredictConfig()) -> np.ndarray:
    """Row-wise :func:`predict`; returns an (n, K) matrix."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise UsageError(f"expected a 2-D feature matrix, got shape {features.shape}")
    if len(features) == 0:
        return np.zeros((0, tree.n_classes))
    return np.vstack([predict(tree, row, cfg) for row in features])


def expansion_order(tree: CobwebTree, x, n_max: int) -> Dict[int, float]:
    """Expanded node ids mapped to their collocation scores, in expansion order."""
    x = as_features(x, tree.dim)
    return {e.node_id: e.log_score for e in _expand(tree, x, n_max, tree.root_id)}
