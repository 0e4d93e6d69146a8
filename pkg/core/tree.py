"""The Cobweb/4V concept hierarchy.

A :class:`CobwebTree` grows incrementally: each instance is sorted from the
root toward a leaf, and at every branching point the learner entertains four
operations (add to the best child, create a new child, merge the two best
children, split the best child) and commits to the one with the highest
category utility. In fixed mode the merge and split operations are disabled
and the tree never grows past a (depth, branching) envelope.

Utilities are expressed through a per-concept *score* where lower is better:
the summed attribute entropy for the information-theoretic measure and the
negated expected number of correct guesses for the probability measure. The
category utility of a partition is then

    (score(parent) - sum_k P(C_k) * score(C_k)) / n

with P(C_k) = count(C_k) / count(parent).
"""

from __future__ import annotations

import hashlib
import json
import logging
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from .errors import CheckpointError, DataError, TreeStructureError, UsageError
from .stats import (
    DEFAULT_ACUITY,
    AttributeWeights,
    GaussianStats,
    Instance,
    LabelCounts,
    as_features,
    expected_correct,
    merge_stats,
    node_entropy,
    update_stats,
)

logger = logging.getLogger(__name__)

SCHEMA = "cobweb-lab/tree"
SCHEMA_VERSION = 1

UTILITIES = ("probability", "information")
MODES = ("adaptive", "fixed")

# Tie order: least structural churn first.
_PRIORITY = {"add": 0, "create": 1, "merge": 2, "split": 3}


@dataclass(frozen=True)
class TreeConfig:
    """Learner settings.

    Attributes:
        utility: "information" (entropy reduction) or "probability"
            (expected correct guesses).
        mode: "adaptive" for the four-operation learner, "fixed" for the
            ablation with merge and split disabled.
        fixed_depth: Maximum number of levels, root included (fixed mode).
        fixed_branching: Maximum children per node (fixed mode).
        acuity: Floor on every attribute's standard deviation.
        weights: Relative weight of pixels and label in every score.
        seed: Recorded for reproducibility; fitting consumes no randomness.
    """

    utility: str = "information"
    mode: str = "adaptive"
    fixed_depth: int = 4
    fixed_branching: int = 5
    acuity: float = DEFAULT_ACUITY
    weights: AttributeWeights = AttributeWeights()
    seed: int = 0

    def __post_init__(self) -> None:
        if self.utility not in UTILITIES:
            raise UsageError(f"unknown utility {self.utility!r}; expected one of {UTILITIES}")
        if self.mode not in MODES:
            raise UsageError(f"unknown tree mode {self.mode!r}; expected one of {MODES}")
        if self.fixed_depth < 1:
            raise UsageError("fixed_depth must be >= 1")
        if self.fixed_branching < 2:
            raise UsageError("fixed_branching must be >= 2")
        if self.acuity <= 0:
            raise UsageError("acuity must be > 0")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TreeConfig":
        data = dict(data)
        data["weights"] = AttributeWeights(**data.get("weights", {}))
        return cls(**data)


@dataclass(eq=False)
class ConceptNode:
    """One concept: sufficiency statistics, label counts and tree links."""

    id: int
    stats: GaussianStats
    labels: LabelCounts
    children: List[int] = field(default_factory=list)
    parent: Optional[int] = None
    _cache: Dict[str, Any] = field(default_factory=dict, repr=False)

    @property
    def count(self) -> int:
        return self.stats.count

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def absorb(self, x: np.ndarray, label: Optional[int]) -> None:
        self.stats = update_stats(self.stats, x)
        self.labels = self.labels.add(label)
        self._cache.clear()

    def variance(self, acuity: float) -> np.ndarray:
        var = self._cache.get("var")
        if var is None:
            var = self._cache["var"] = self.stats.variance(acuity)
        return var


class Concept(Protocol):
    stats: GaussianStats
    labels: LabelCounts


def concept_score(
    stats: GaussianStats,
    labels: Optional[LabelCounts],
    utility: str = "information",
    weights: AttributeWeights = AttributeWeights(),
    acuity: float = DEFAULT_ACUITY,
) -> float:
    """Per-concept score used by both utilities; lower means more predictable."""
    if utility == "information":
        return node_entropy(stats, labels, weights, acuity)
    return -expected_correct(stats, labels, weights, acuity)


def _partition_utility(
    parent_score: float, parent_count: int, members: Sequence[Tuple[int, float]]
) -> float:
    if not members:
        raise TreeStructureError("category utility of an empty partition")
    weighted = sum(count * score for count, score in members) / parent_count
    return (parent_score - weighted) / len(members)


def _category_utility(
    parent: Concept,
    partition: Sequence[Concept],
    utility: str,
    weights: AttributeWeights,
    acuity: float,
) -> float:
    if not partition:
        raise TreeStructureError("category utility of an empty partition")
    members = [
        (c.stats.count, concept_score(c.stats, c.labels, utility, weights, acuity))
        for c in partition
    ]
    parent_score = concept_score(parent.stats, parent.labels, utility, weights, acuity)
    return _partition_utility(parent_score, parent.stats.count, members)


def category_utility_prob(
    parent: Concept,
    partition: Sequence[Concept],
    acuity: float = DEFAULT_ACUITY,
    weights: AttributeWeights = AttributeWeights(),
) -> float:
    """Probability-theoretic category utility (expected correct guesses)."""
    return _category_utility(parent, partition, "probability", weights, acuity)


def category_utility_info(
    parent: Concept,
    partition: Sequence[Concept],
    acuity: float = DEFAULT_ACUITY,
    weights: AttributeWeights = AttributeWeights(),
) -> float:
    """Information-theoretic category utility (entropy reduction)."""
    return _category_utility(parent, partition, "information", weights, acuity)


@dataclass
class _Candidate:
    child: ConceptNode
    score: float
    relative: float


class CobwebTree:
    """An incrementally grown hierarchy of Gaussian concepts.

    Args:
        dim: Feature dimensionality D.
        n_classes: Number of class labels K.
        config: Learner settings.
    """

    def __init__(self, dim: int, n_classes: int, config: TreeConfig = TreeConfig()) -> None:
        self.dim = int(dim)
        self.n_classes = int(n_classes)
        self.config = config
        self.nodes: Dict[int, ConceptNode] = {}
        self.operations: Counter = Counter()
        self._next_id = 0
        self.root_id = self._new_node().id

    # -- structure -----------------------------------------------------------

    @property
    def root(self) -> ConceptNode:
        return self.nodes[self.root_id]

    def node(self, node_id: int) -> ConceptNode:
        return self.nodes[node_id]

    def children_of(self, node: ConceptNode) -> List[ConceptNode]:
        return [self.nodes[c] for c in node.children]

    def iter_nodes(self) -> Iterator[Tuple[ConceptNode, int]]:
        """Breadth-first walk yielding (node, level); the root is level 1."""
        frontier = [(self.root, 1)]
        while frontier:
            next_level: List[Tuple[ConceptNode, int]] = []
            for node, level in frontier:
                yield node, level
                next_level.extend((self.nodes[c], level + 1) for c in node.children)
            frontier = next_level

    def __len__(self) -> int:
        return len(self.nodes)

    def _new_node(
        self,
        stats: Optional[GaussianStats] = None,
        labels: Optional[LabelCounts] = None,
        parent: Optional[int] = None,
    ) -> ConceptNode:
        node = ConceptNode(
            id=self._next_id,
            stats=stats if stats is not None else GaussianStats.empty(self.dim),
            labels=labels if labels is not None else LabelCounts.empty(self.n_classes),
            parent=parent,
        )
        self._next_id += 1
        self.nodes[node.id] = node
        return node

    # -- scoring -------------------------------------------------------------

    def _score_of(self, stats: GaussianStats, labels: LabelCounts) -> float:
        cfg = self.config
        return concept_score(stats, labels, cfg.utility, cfg.weights, cfg.acuity)

    def _score(self, node: ConceptNode) -> float:
        score = node._cache.get("score")
        if score is None:
            score = node._cache["score"] = self._score_of(node.stats, node.labels)
        return score

    def _rank_children(
        self, node: ConceptNode, x: np.ndarray, label: Optional[int]
    ) -> Tuple[List[_Candidate], float]:
        candidates = []
        total = 0.0
        for child in self.children_of(node):
            score = self._score(child)
            inserted = self._score_of(update_stats(child.stats, x), child.labels.add(label))
            total += child.count * score
            relative = child.count * score - (child.count + 1) * inserted
            candidates.append(_Candidate(child, score, relative))
        candidates.sort(key=lambda c: (-c.relative, -c.child.count, c.child.id))
        return candidates, total

    def _best_operation(
        self,
        node: ConceptNode,
        x: np.ndarray,
        label: Optional[int],
        allow_create: bool = True,
        allow_restructure: bool = True,
    ) -> Tuple[str, ConceptNode, Optional[ConceptNode]]:
        ranked, total = self._rank_children(node, x, label)
        best1 = ranked[0]
        best2 = ranked[1] if len(ranked) > 1 else None
        n = len(ranked)
        count_after = node.count + 1
        parent_after = self._score_of(update_stats(node.stats, x), node.labels.add(label))

        options: List[Tuple[float, int, str]] = []
        add = (parent_after - (total - best1.relative) / count_after) / n
        options.append((add, _PRIORITY["add"], "add"))

        if allow_create:
            single = self._score_of(
                update_stats(GaussianStats.empty(self.dim), x),
                LabelCounts.empty(self.n_classes).add(label),
            )
            create = (parent_after - (total + single) / count_after) / (n + 1)
            options.append((create, _PRIORITY["create"], "create"))

        if allow_restructure and n > 2 and best2 is not None:
            c1, c2 = best1.child, best2.child
            merged = self._score_of(
                update_stats(merge_stats(c1.stats, c2.stats), x),
                c1.labels.merge(c2.labels).add(label),
            )
            rest = total - c1.count * best1.score - c2.count * best2.score
            merge = (parent_after - (rest + (c1.count + c2.count + 1) * merged) / count_after) / (
                n - 1
            )
            options.append((merge, _PRIORITY["merge"], "merge"))

        if allow_restructure and not best1.child.is_leaf:
            grandchildren = self.children_of(best1.child)
            rest = total - best1.child.count * best1.score
            rest += sum(g.count * self._score(g) for g in grandchildren)
            split = (self._score(node) - rest / node.count) / (n - 1 + len(grandchildren))
            options.append((split, _PRIORITY["split"], "split"))

        _, _, op = max(options, key=lambda o: (o[0], -o[1]))
        return op, best1.child, best2.child if best2 is not None else None

    # -- learning ------------------------------------------------------------

    def _check_instance(self, instance: Instance) -> Tuple[np.ndarray, Optional[int]]:
        x = as_features(instance.features, self.dim)
        label = instance.label
        if label is not None:
            label = int(label)
            if not 0 <= label < self.n_classes:
                raise DataError(f"label {label} outside [0, {self.n_classes})")
        return x, label

    def _is_exact_match(self, node: ConceptNode, x: np.ndarray, label: Optional[int]) -> bool:
        if not np.allclose(node.stats.m2, 0.0, rtol=0.0, atol=1e-12):
            return False
        if not np.allclose(node.stats.mean, x, rtol=0.0, atol=1e-12):
            return False
        if label is None or node.labels.total == 0:
            return True
        return bool(node.labels.counts[label] == node.labels.total)

    def _create_child(self, node: ConceptNode, x: np.ndarray, label: Optional[int]) -> ConceptNode:
        child = self._new_node(parent=node.id)
        child.absorb(x, label)
        node.children.append(child.id)
        self.operations["create"] += 1
        return child

    def _fringe_split(self, leaf: ConceptNode, x: np.ndarray, label: Optional[int]) -> ConceptNode:
        """Give a non-matching leaf a parent holding both it and the instance."""
        parent = self._new_node(stats=leaf.stats, labels=leaf.labels, parent=leaf.parent)
        if leaf.parent is None:
            self.root_id = parent.id
        else:
            siblings = self.nodes[leaf.parent].children
            siblings[siblings.index(leaf.id)] = parent.id
        leaf.parent = parent.id
        parent.children.append(leaf.id)
        parent.absorb(x, label)
        self.operations["fringe"] += 1
        return self._create_child(parent, x, label)

    def fit(self, instance: Instance) -> "CobwebTree":
        """Absorb one instance, restructuring along the way.

        Dispatches to :meth:`fit_fixed` when the tree is in fixed mode.

        Raises:
            DimensionError: If the instance has the wrong dimensionality.
        """
        if self.config.mode == "fixed":
            return self.fit_fixed(instance)
        x, label = self._check_instance(instance)
        current = self.root
        while True:
            if current.is_leaf:
                if current.count == 0 or self._is_exact_match(current, x, label):
                    current.absorb(x, label)
                else:
                    self._fringe_split(current, x, label)
                break

            op, best1, best2 = self._best_operation(current, x, label)
            if op == "add":
                current.absorb(x, label)
                self.operations["add"] += 1
                current = best1
            elif op == "create":
                current.absorb(x, label)
                self._create_child(current, x, label)
                break
            elif op == "merge":
                assert best2 is not None
                current.absorb(x, label)
                current = self.merge_children(current.id, best1.id, best2.id)
            else:
                self.split_child(current.id, best1.id)
        return self

    def fit_fixed(self, instance: Instance) -> "CobwebTree":
        """Absorb one instance without merge or split, inside the envelope.

        Raises:
            UsageError: If the tree is not in fixed mode.
            DimensionError: If the instance has the wrong dimensionality.
        """
        if self.config.mode != "fixed":
            raise UsageError("fit_fixed requires TreeConfig.mode == 'fixed'")
        x, label = self._check_instance(instance)
        depth, branching = self.config.fixed_depth, self.config.fixed_branching
        current, level = self.root, 1
        while True:
            if level >= depth:
                current.absorb(x, label)
                break
            if current.is_leaf:
                if current.count == 0 or self._is_exact_match(current, x, label):
                    current.absorb(x, label)
                else:
                    self._fringe_split(current, x, label)
                break

            op, best1, _ = self._best_operation(
                current,
                x,
                label,
                allow_create=len(current.children) < branching,
                allow_restructure=False,
            )
            current.absorb(x, label)
            if op == "create":
                self._create_child(current, x, label)
                break
            self.operations["add"] += 1
            current, level = best1, level + 1
        return self

    def fit_many(self, features: np.ndarray, labels: Optional[np.ndarray] = None) -> "CobwebTree":
        """Fit rows of `features` in order."""
        for i, row in enumerate(features):
            label = None if labels is None else int(labels[i])
            self.fit(Instance(row, label))
        return self

    # -- restructuring -------------------------------------------------------

    def merge_children(self, parent_id: int, c1: int, c2: int) -> ConceptNode:
        """Replace children `c1` and `c2` by a fresh node that adopts both.

        Raises:
            TreeStructureError: If `c1 == c2` or either is not a child.
        """
        if c1 == c2:
            raise TreeStructureError(f"cannot merge node {c1} with itself")
        parent = self.nodes[parent_id]
        if c1 not in parent.children or c2 not in parent.children:
            raise TreeStructureError(f"nodes {c1} and {c2} must both be children of {parent_id}")
        a, b = self.nodes[c1], self.nodes[c2]
        merged = self._new_node(
            stats=merge_stats(a.stats, b.stats),
            labels=a.labels.merge(b.labels),
            parent=parent_id,
        )
        position = min(parent.children.index(c1), parent.children.index(c2))
        parent.children = [c for c in parent.children if c not in (c1, c2)]
        parent.children.insert(position, merged.id)
        merged.children = [c1, c2]
        a.parent = b.parent = merged.id
        self.operations["merge"] += 1
        return merged

    def split_child(self, parent_id: int, child_id: int) -> List[int]:
        """Remove `child_id` and promote its children, in order, in its place.

        Raises:
            TreeStructureError: If the child is a leaf or not a child of the parent.
        """
        parent = self.nodes[parent_id]
        if child_id not in parent.children:
            raise TreeStructureError(f"node {child_id} is not a child of {parent_id}")
        child = self.nodes[child_id]
        if child.is_leaf:
            raise TreeStructureError(f"cannot split leaf {child_id}")
        position = parent.children.index(child_id)
        parent.children[position : position + 1] = child.children
        for grandchild in child.children:
            self.nodes[grandchild].parent = parent_id
        del self.nodes[child_id]
        self.operations["split"] += 1
        return list(child.children)

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        nodes = []
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            nodes.append(
                {
                    "id": node.id,
                    "parent": node.parent,
                    "count": node.count,
                    "mean": node.stats.mean.tolist(),
                    "m2": node.stats.m2.tolist(),
                    "labels": node.labels.counts.tolist(),
                }
            )
        return {
            "schema": SCHEMA,
            "version": SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "dim": self.dim,
            "n_classes": self.n_classes,
            "root": self.root_id,
            "next_id": self._next_id,
            "operations": dict(sorted(self.operations.items())),
            "nodes": nodes,
            "children": {str(n["id"]): self.nodes[n["id"]].children for n in nodes},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CobwebTree":
        """Rebuild a tree from :meth:`to_dict` output.

        Raises:
            CheckpointError: On a foreign schema or unsupported version.
        """
        if data.get("schema") != SCHEMA:
            raise CheckpointError(f"not a tree document (schema {data.get('schema')!r})")
        if data.get("version") != SCHEMA_VERSION:
            raise CheckpointError(
                f"tree schema version {data.get('version')} is not supported "
                f"(this build reads version {SCHEMA_VERSION})"
            )
        tree = cls(data["dim"], data["n_classes"], TreeConfig.from_dict(data["config"]))
        tree.nodes = {}
        children = data["children"]
        for entry in data["nodes"]:
            node = ConceptNode(
                id=entry["id"],
                stats=GaussianStats(
                    int(entry["count"]),
                    np.asarray(entry["mean"], dtype=np.float64),
                    np.asarray(entry["m2"], dtype=np.float64),
                ),
                labels=LabelCounts(np.asarray(entry["labels"], dtype=np.int64)),
                children=list(children[str(entry["id"])]),
                parent=entry["parent"],
            )
            tree.nodes[node.id] = node
        tree.root_id = data["root"]
        tree._next_id = data["next_id"]
        tree.operations = Counter(data.get("operations", {}))
        return tree

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def loads(cls, text: str) -> "CobwebTree":
        return cls.from_dict(json.loads(text))

    def digest(self) -> str:
        """SHA-256 of the canonical serialization."""
        return hashlib.sha256(self.dumps().encode("utf-8")).hexdigest()


def tree_statistics(tree: CobwebTree) -> Dict[str, Any]:
    """Hierarchy summary: sizes, depth/branching histograms, leaf purity."""
    depth_hist: Counter = Counter()
    branching_hist: Counter = Counter()
    leaves = 0
    pure = labelled = 0
    for node, level in tree.iter_nodes():
        depth_hist[level] += 1
        if node.is_leaf:
            leaves += 1
            pure += int(node.labels.counts.max()) if node.labels.n_classes else 0
            labelled += node.labels.total
        else:
            branching_hist[len(node.children)] += 1
    return {
        "node_count": len(tree),
        "leaf_count": leaves,
        "depth": max(depth_hist) if depth_hist else 0,
        "depth_histogram": {str(k): v for k, v in sorted(depth_hist.items())},
        "branching_histogram": {str(k): v for k, v in sorted(branching_hist.items())},
        "leaf_purity": pure / labelled if labelled else None,
        "operations": dict(sorted(tree.operations.items())),
    }
