"""CobwebNN: a complete B-ary hierarchy trained by gradient descent.

Layer ``l`` (1-based, ``l = 1..L``) holds ``B**l`` nodes; node ``j`` of layer
``l`` has parent ``j // B`` in layer ``l - 1`` (layer 0 is the implicit root).
Every node carries a prototype ``mu`` (unit-variance Gaussian over the
features), a prior logit ``b`` (softmax within its sibling group gives
``p(c|parent)``) and label logits ``lam`` (softmax gives ``p(y|c)``).

Path log-probabilities are accumulated layer by layer and normalised over the
whole layer::

    a^l_j = log p(x|j) [+ log p(y|j)] + log p(j|parent) + s^{l-1}_{parent(j)}
    s^l   = a^l - logsumexp(a^l)

Dense training minimises ``-mean_n sum_leaves P_n(c) (log p(x_n|c) + log
p(y_n|c))`` and moves every parameter. Sparse training draws a Gumbel-softmax
sample ``z`` on ``s^L`` per example, takes its argmax leaf ``c*`` and scores
``-(log p(x|c*) + log p(y|c*))``, so the sparse loss is an unbiased estimate
of the dense one. The gradient is straight-through: the hard leaf term plus
``delta * grad A(c*)``, where ``A(c*)`` is the unnormalised score of the
sampled root-to-leaf path and

    delta = z_{c*} (sum_c z_c r_c - r_{c*}) / tau,   r_c = log p(x|c) + log p(y|c)

is the soft sample's derivative restricted to the sampled leaf. Only the path
(and its sibling groups' prior logits) receive gradient. All gradients are
written out by hand.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.special import log_softmax, logsumexp, softmax
from sklearn.cluster import kmeans_plusplus

from .errors import CheckpointError, DataError, DimensionError, GradientError, ParameterError, UsageError
from .seeding import substream

logger = logging.getLogger(__name__)

SCHEMA = "cobweb-lab/cobwebnn"
SCHEMA_VERSION = 1

MODES = ("dense", "sparse")
RATE_MODES = ("fixed", "evidence")
GROUPS = ("mu", "b", "lam")


@dataclass(frozen=True)
class CobwebNNConfig:
    """Architecture and optimiser settings.

    ``rate_mode="evidence"`` replaces the fixed learning rate by a per-node
    rate ``1 / (1 + M_c)`` applied to the summed batch gradient, where
    ``M_c`` is the responsibility mass the node has accumulated so far.
    """

    depth: int = 3
    branching: int = 4
    tau: float = 1.0
    lr: float = 0.01
    batch_size: int = 64
    epochs: int = 5
    mode: str = "dense"
    rate_mode: str = "fixed"
    init_scale: float = 0.01
    seed: int = 0

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise UsageError("depth must be >= 1")
        if self.branching < 1:
            raise UsageError("branching must be >= 1")
        if self.tau <= 0:
            raise UsageError("tau must be > 0")
        if self.lr <= 0:
            raise UsageError("lr must be > 0")
        if self.batch_size < 1 or self.epochs < 1:
            raise UsageError("batch_size and epochs must be >= 1")
        if self.mode not in MODES:
            raise UsageError(f"unknown CobwebNN mode {self.mode!r}")
        if self.rate_mode not in RATE_MODES:
            raise UsageError(f"unknown rate_mode {self.rate_mode!r}")
        if self.init_scale < 0:
            raise UsageError("init_scale must be >= 0")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def gumbel_softmax(logits, tau: float, rng: np.random.Generator) -> np.ndarray:
    """Softmax of Gumbel-perturbed logits at temperature `tau` (last axis).

    The argmax of the sample is a draw from ``softmax(logits)`` regardless of
    `tau`.
    """
    if tau <= 0:
        raise UsageError("tau must be > 0")
    logits = np.asarray(logits, dtype=np.float64)
    noise = rng.gumbel(size=logits.shape)
    return softmax((logits + noise) / tau, axis=-1)


def _sq_dist(X: np.ndarray, mu: np.ndarray) -> np.ndarray:
    d = (X * X).sum(axis=1)[:, None] - 2.0 * X @ mu.T + (mu * mu).sum(axis=1)[None, :]
    return np.maximum(d, 0.0)


def _group_log_softmax(b: np.ndarray, branching: int) -> np.ndarray:
    return log_softmax(b.reshape(-1, branching), axis=1).reshape(-1)


@dataclass
class _Forward:
    """Per-layer intermediates kept for the backward pass."""

    g: List[np.ndarray]
    h: List[Optional[np.ndarray]]
    pi: List[np.ndarray]
    s: List[np.ndarray]


class CobwebNNModel:
    """Parameters and hand-derived training/inference passes."""

    def __init__(self, dim: int, n_classes: int, config: CobwebNNConfig = CobwebNNConfig()) -> None:
        self.dim = int(dim)
        self.n_classes = int(n_classes)
        self.config = config
        B, L = config.branching, config.depth
        self.layer_sizes = [B**l for l in range(1, L + 1)]
        self.mu = [np.zeros((m, self.dim)) for m in self.layer_sizes]
        self.b = [np.zeros(m) for m in self.layer_sizes]
        self.lam = [np.zeros((m, self.n_classes)) for m in self.layer_sizes]
        self.mass = [np.zeros(m) for m in self.layer_sizes]
        self.steps = 0
        self._gumbel = substream(config.seed, "gumbel")
        self._shuffle = substream(config.seed, "shuffle")

    @classmethod
    def initialise(
        cls,
        dim: int,
        n_classes: int,
        config: CobwebNNConfig = CobwebNNConfig(),
        data: Optional[np.ndarray] = None,
    ) -> "CobwebNNModel":
        """Seed the prototypes from training rows.

        Leaf prototypes are k-means++ picks from `data` (rows drawn with
        replacement when there are fewer rows than leaves); every internal
        prototype is the mean of its children. Without data all prototypes
        sit at 0.5. Gaussian noise of scale ``init_scale`` is added to the
        leaves.
        """
        model = cls(dim, n_classes, config)
        rng = substream(config.seed, "init")
        n_leaves = model.layer_sizes[-1]
        if data is None:
            leaves = np.full((n_leaves, dim), 0.5)
        else:
            data = np.asarray(data, dtype=np.float64)
            if data.ndim != 2 or data.shape[1] != dim:
                raise DimensionError(dim, data.shape[-1], what="initialisation data")
            if data.shape[0] == 0:
                raise DataError("cannot initialise prototypes from zero rows")
            if data.shape[0] >= n_leaves:
                leaves, _ = kmeans_plusplus(data, n_leaves, random_state=int(rng.integers(2**31 - 1)))
            else:
                leaves = data[rng.integers(data.shape[0], size=n_leaves)]
        model.mu[-1] = leaves + config.init_scale * rng.standard_normal((n_leaves, dim))
        for l in range(model.depth - 2, -1, -1):
            model.mu[l] = model.mu[l + 1].reshape(-1, model.branching, dim).mean(axis=1)
        return model

    @property
    def depth(self) -> int:
        return self.config.depth

    @property
    def branching(self) -> int:
        return self.config.branching

    @property
    def n_parameters(self) -> int:
        return sum(m * (self.dim + 1 + self.n_classes) for m in self.layer_sizes)

    def parent_of(self, layer: int, index: int) -> int:
        """Parent index (in layer ``layer - 1``) of node ``index`` in 1-based ``layer``."""
        return index // self.branching

    # -- validation ----------------------------------------------------------

    def check_finite(self) -> None:
        for name in GROUPS:
            for l, arr in enumerate(getattr(self, name)):
                if not np.isfinite(arr).all():
                    raise ParameterError(f"non-finite {name} parameters in layer {l + 1}")

    def _check_batch(self, X, y=None) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise DimensionError(self.dim, X.shape[-1])
        if not np.isfinite(X).all():
            raise DataError("features contain non-finite values")
        if y is None:
            return X, None
        y = np.asarray(y, dtype=np.int64).reshape(-1)
        if y.shape[0] != X.shape[0]:
            raise DataError(f"{X.shape[0]} feature rows but {y.shape[0]} labels")
        if y.size and (y.min() < 0 or y.max() >= self.n_classes):
            raise DataError(f"labels outside [0, {self.n_classes})")
        return X, y

    # -- forward -------------------------------------------------------------

    def _forward(self, X: np.ndarray, y: Optional[np.ndarray]) -> _Forward:
        const = 0.5 * self.dim * math.log(2.0 * math.pi)
        n = X.shape[0]
        g, h, pi, s = [], [], [], []
        prev = np.zeros((n, 1))
        for l in range(self.depth):
            gl = -0.5 * _sq_dist(X, self.mu[l]) - const
            pil = _group_log_softmax(self.b[l], self.branching)
            a = gl + pil[None, :] + np.repeat(prev, self.branching, axis=1)
            hl = None
            if y is not None:
                hl = log_softmax(self.lam[l], axis=1)[:, y].T
                a = a + hl
            sl = a - logsumexp(a, axis=1, keepdims=True)
            g.append(gl)
            h.append(hl)
            pi.append(pil)
            s.append(sl)
            prev = sl
        return _Forward(g, h, pi, s)

    def path_log_probs(self, X, y=None) -> List[np.ndarray]:
        """Layer-normalised path log-probabilities, one (n, B**l) array per layer.

        With labels the training scores are used, otherwise inference scores.
        """
        X, y = self._check_batch(X, y)
        self.check_finite()
        return self._forward(X, y).s

    def sample_leaves(self, log_probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Hard Gumbel-softmax selection of one leaf per row."""
        return np.argmax(gumbel_softmax(log_probs, self.config.tau, rng), axis=1)

    def leaf_paths(self, leaves: np.ndarray) -> np.ndarray:
        """(n, L) node indices from layer 1 down to each leaf."""
        leaves = np.asarray(leaves, dtype=np.int64)
        paths = np.empty((leaves.shape[0], self.depth), dtype=np.int64)
        idx = leaves.copy()
        for l in range(self.depth - 1, -1, -1):
            paths[:, l] = idx
            idx = idx // self.branching
        return paths

    # -- loss and gradients ----------------------------------------------------

    def loss(self, X, y, sample: Optional[np.ndarray] = None) -> float:
        value, _, _ = self._loss_and_gradients(X, y, sample, gradients=False)
        return value

    def loss_and_gradients(
        self, X, y, sample: Optional[np.ndarray] = None
    ) -> Tuple[float, Dict[str, List[np.ndarray]]]:
        """Mean batch loss and its analytic gradient per parameter group.

        Args:
            X: (n, D) features.
            y: (n,) labels.
            sample: Sparse mode only. Fixed (n, B**L) Gumbel-softmax sample
                over the leaves; drawn from the model's Gumbel stream when
                omitted. Its row argmax is the selected leaf.
        """
        value, grads, _ = self._loss_and_gradients(X, y, sample, gradients=True)
        assert grads is not None
        return value, grads

    def _loss_and_gradients(
        self, X, y, sample: Optional[np.ndarray], gradients: bool
    ) -> Tuple[float, Optional[Dict[str, List[np.ndarray]]], List[np.ndarray]]:
        X, y = self._check_batch(X, y)
        assert y is not None
        if X.shape[0] == 0:
            raise DataError("loss of an empty batch")
        self.check_finite()
        fwd = self._forward(X, y)
        if self.config.mode == "sparse":
            if sample is None:
                sample = gumbel_softmax(fwd.s[-1], self.config.tau, self._gumbel)
            return self._sparse(X, y, fwd, np.asarray(sample, dtype=np.float64), gradients)
        return self._dense(X, y, fwd, gradients)

    def _dense(
        self, X: np.ndarray, y: np.ndarray, fwd: _Forward, gradients: bool
    ) -> Tuple[float, Optional[Dict[str, List[np.ndarray]]], List[np.ndarray]]:
        n = X.shape[0]
        leaf_h = fwd.h[-1]
        assert leaf_h is not None
        r = fwd.g[-1] + leaf_h
        P = np.exp(fwd.s[-1])
        value = float(-(P * r).sum() / n)
        mass = [np.exp(s).sum(axis=0) for s in fwd.s]
        if not gradients:
            return value, None, mass

        onehot = np.eye(self.n_classes)[y]
        grads: Dict[str, List[np.ndarray]] = {k: [None] * self.depth for k in GROUPS}  # type: ignore[list-item]
        ds = -P * r
        for l in range(self.depth - 1, -1, -1):
            p = np.exp(fwd.s[l])
            ga = ds - p * ds.sum(axis=1, keepdims=True)
            gr = ga - P if l == self.depth - 1 else ga
            col = gr.sum(axis=0)
            grads["mu"][l] = (gr.T @ X - col[:, None] * self.mu[l]) / n
            grads["lam"][l] = (gr.T @ onehot - col[:, None] * softmax(self.lam[l], axis=1)) / n
            eb = ga.sum(axis=0) / n
            q = np.exp(fwd.pi[l])
            group = eb.reshape(-1, self.branching).sum(axis=1)
            grads["b"][l] = eb - q * np.repeat(group, self.branching)
            ds = ga.reshape(n, -1, self.branching).sum(axis=2)
        return value, grads, mass

    def _sparse(
        self, X: np.ndarray, y: np.ndarray, fwd: _Forward, sample: np.ndarray, gradients: bool
    ) -> Tuple[float, Optional[Dict[str, List[np.ndarray]]], List[np.ndarray]]:
        n = X.shape[0]
        n_leaves = self.layer_sizes[-1]
        if sample.shape != (n, n_leaves):
            raise UsageError(f"sample must have shape {(n, n_leaves)}, got {sample.shape}")
        rows = np.arange(n)
        leaves = np.argmax(sample, axis=1)
        path = self.leaf_paths(leaves)
        leaf_h = fwd.h[-1]
        assert leaf_h is not None
        r = fwd.g[-1] + leaf_h
        value = float(-r[rows, leaves].sum() / n)
        mass = [np.bincount(path[:, l], minlength=m).astype(np.float64) for l, m in enumerate(self.layer_sizes)]
        if not gradients:
            return value, None, mass

        picked = sample[rows, leaves]
        delta = picked * ((sample * r).sum(axis=1) - r[rows, leaves]) / self.config.tau
        onehot = np.eye(self.n_classes)[y]
        grads: Dict[str, List[np.ndarray]] = {k: [] for k in GROUPS}
        for l in range(self.depth):
            j = path[:, l]
            size = self.layer_sizes[l]
            # weight on the path score, plus the hard leaf term at the last layer
            w = delta - 1.0 if l == self.depth - 1 else delta
            gmu = np.zeros((size, self.dim))
            np.add.at(gmu, j, w[:, None] * (X - self.mu[l][j]))
            glam = np.zeros((size, self.n_classes))
            np.add.at(glam, j, w[:, None] * (onehot - softmax(self.lam[l][j], axis=1)))
            gb = np.bincount(j, weights=delta, minlength=size)
            group = np.bincount(j // self.branching, weights=delta, minlength=size // self.branching)
            gb = gb - np.exp(fwd.pi[l]) * np.repeat(group, self.branching)
            grads["mu"].append(gmu / n)
            grads["lam"].append(glam / n)
            grads["b"].append(gb / n)
        return value, grads, mass

    # -- update --------------------------------------------------------------

    def sgd_step(
        self, X, y, lr: Optional[float] = None, sample: Optional[np.ndarray] = None
    ) -> float:
        """One gradient step on a batch; returns the pre-step loss.

        Raises:
            GradientError: If any gradient entry is non-finite. The step is
                rejected and the model left unchanged.
        """
        lr = self.config.lr if lr is None else lr
        if lr <= 0:
            raise UsageError("learning rate must be > 0")
        X, y = self._check_batch(X, y)
        value, grads, mass = self._loss_and_gradients(X, y, sample, gradients=True)
        assert grads is not None
        for name in GROUPS:
            for l, grad in enumerate(grads[name]):
                bad = ~np.isfinite(grad)
                if bad.any():
                    raise GradientError(
                        f"non-finite {name} gradient in layer {l + 1} "
                        f"({int(bad.sum())} of {grad.size} entries); step rejected"
                    )
        n = X.shape[0]
        for l in range(self.depth):
            if self.config.rate_mode == "evidence":
                self.mass[l] = self.mass[l] + mass[l]
                rate = n / (1.0 + self.mass[l])
                self.mu[l] = self.mu[l] - rate[:, None] * grads["mu"][l]
                self.lam[l] = self.lam[l] - rate[:, None] * grads["lam"][l]
                self.b[l] = self.b[l] - rate * grads["b"][l]
            else:
                self.mu[l] = self.mu[l] - lr * grads["mu"][l]
                self.lam[l] = self.lam[l] - lr * grads["lam"][l]
                self.b[l] = self.b[l] - lr * grads["b"][l]
        self.steps += 1
        return value

    def fit(self, X, y, epochs: Optional[int] = None, rng: Optional[np.random.Generator] = None) -> List[float]:
        """Shuffled minibatch SGD over (X, y); returns per-step losses."""
        X, y = self._check_batch(X, y)
        assert y is not None
        epochs = self.config.epochs if epochs is None else epochs
        rng = rng if rng is not None else self._shuffle
        losses: List[float] = []
        bs = self.config.batch_size
        for _ in range(epochs):
            order = rng.permutation(X.shape[0])
            for start in range(0, len(order), bs):
                idx = order[start : start + bs]
                losses.append(self.sgd_step(X[idx], y[idx]))
        logger.debug("CobwebNN fit: %d steps, final loss %.4f", len(losses), losses[-1] if losses else float("nan"))
        return losses

    # -- inference -----------------------------------------------------------

    def forward_infer(
        self,
        X,
        rng: Optional[np.random.Generator] = None,
        mode: Optional[str] = None,
    ) -> np.ndarray:
        """Label distributions from feature-only path probabilities.

        Dense mode mixes every leaf's label softmax by its path probability;
        sparse mode returns the label softmax of one Gumbel-sampled leaf.
        Returns (n, K), or (K,) for a single vector.
        """
        single = np.asarray(X).ndim == 1
        X, _ = self._check_batch(X)
        self.check_finite()
        mode = mode or self.config.mode
        if X.shape[0] == 0:
            return np.zeros((0, self.n_classes))
        s_leaf = self._forward(X, None).s[-1]
        labels = softmax(self.lam[-1], axis=1)
        if mode == "sparse":
            leaves = self.sample_leaves(s_leaf, rng if rng is not None else self._gumbel)
            out = labels[leaves]
        else:
            out = np.exp(s_leaf) @ labels
        return out[0] if single else out

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        tensors: Dict[str, Any] = {}
        for name in GROUPS + ("mass",):
            for l, arr in enumerate(getattr(self, name)):
                tensors[f"{name}.{l + 1}"] = {"shape": list(arr.shape), "data": arr.reshape(-1).tolist()}
        return {
            "schema": SCHEMA,
            "version": SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "dim": self.dim,
            "n_classes": self.n_classes,
            "steps": self.steps,
            "tensors": tensors,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CobwebNNModel":
        if data.get("schema") != SCHEMA:
            raise CheckpointError(f"not a CobwebNN document (schema {data.get('schema')!r})")
        if data.get("version") != SCHEMA_VERSION:
            raise CheckpointError(
                f"CobwebNN schema version {data.get('version')} is not supported "
                f"(this build reads version {SCHEMA_VERSION})"
            )
        model = cls(data["dim"], data["n_classes"], CobwebNNConfig(**data["config"]))
        model.steps = int(data.get("steps", 0))
        for key, tensor in data["tensors"].items():
            name, layer = key.split(".")
            arr = np.asarray(tensor["data"], dtype=np.float64).reshape(tensor["shape"])
            getattr(model, name)[int(layer) - 1] = arr
        model.check_finite()
        return model

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def loads(cls, text: str) -> "CobwebNNModel":
        return cls.from_dict(json.loads(text))
