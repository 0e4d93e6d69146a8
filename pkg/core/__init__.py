"""cobweb-lab numerical core.

Public API:
    - Sufficiency statistics: GaussianStats, update_stats, merge_stats, node_entropy
    - Concept tree: CobwebTree, TreeConfig, category_utility_info/prob
    - Prediction: predict, predict_greedy_leaf, predict_batch, PredictConfig
    - CobwebNN: CobwebNNModel, CobwebNNConfig, gumbel_softmax
    - Baseline: MLPBaseline, ReplayBuffer, train_split, mlp_baseline_train
    - Data: Dataset, LabeledArray, load_idx, load_cifar10_binary, synth_clusters

Example:
    from core import CobwebTree, TreeConfig, predict, synth_clusters

    data = synth_clusters(n_classes=2, dim=2, per_class=20, spread=0.01)
    tree = CobwebTree(data.dim, data.n_classes, TreeConfig())
    tree.fit_many(data.train.features, data.train.labels)
    print(predict(tree, data.test.features[0]))
"""

__version__ = "1.0.0"

from .baseline import MLPBaseline, MLPConfig, ReplayBuffer, mlp_baseline_train, train_split
from .cobwebnn import CobwebNNConfig, CobwebNNModel, gumbel_softmax
from .datasets import (
    Dataset,
    LabeledArray,
    load_canonical,
    load_cifar10_binary,
    load_idx,
    load_raw_stack,
    save_canonical,
    subsample,
    synth_clusters,
)
from .errors import DataError, LabError, ModelError, UsageError
from .metrics import per_class_accuracy
from .prediction import PredictConfig, predict, predict_batch, predict_greedy_leaf
from .stats import (
    AttributeWeights,
    GaussianStats,
    Instance,
    LabelCounts,
    log_likelihood,
    merge_stats,
    node_entropy,
    update_stats,
)
from .tree import CobwebTree, TreeConfig, category_utility_info, category_utility_prob, tree_statistics

__all__ = [
    "AttributeWeights",
    "CobwebNNConfig",
    "CobwebNNModel",
    "CobwebTree",
    "DataError",
    "Dataset",
    "GaussianStats",
    "Instance",
    "LabError",
    "LabelCounts",
    "LabeledArray",
    "MLPBaseline",
    "MLPConfig",
    "ModelError",
    "PredictConfig",
    "ReplayBuffer",
    "TreeConfig",
    "UsageError",
    "category_utility_info",
    "category_utility_prob",
    "gumbel_softmax",
    "load_canonical",
    "load_cifar10_binary",
    "load_idx",
    "load_raw_stack",
    "log_likelihood",
    "merge_stats",
    "mlp_baseline_train",
    "node_entropy",
    "per_class_accuracy",
    "predict",
    "predict_batch",
    "predict_greedy_leaf",
    "save_canonical",
    "subsample",
    "synth_clusters",
    "train_split",
    "tree_statistics",
    "update_stats",
    "__version__",
]
