"""Small deterministic classifiers trained on the lattice losses.

Per minibatch: predict, derive posterior targets at the current snapshot,
apply the analytic logit gradient, update. Targets are recomputed every
step from the live parameters and treated as constants in the gradient.
Evaluation optionally maximizes accuracy over label permutations for
settings where only a relabeling-invariant classifier is learnable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .automaton import build_trellis
from .datagen import WeakDataset
from .errors import InfeasibleSupervision, InvalidParams, ShapeMismatch
from .forward_backward import posteriors
from .losses import _MULTICLASS, _loss_terms
from .supervision import compile_spec, one_vs_rest


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_groups: int = 32
    learning_rate: float = 0.05
    optimizer: str = "adam"  # sgd | momentum | adam
    momentum: float = 0.9
    seed: int = 0
    u_weight: float = 1.0
    s_weight: float = 1.0
    eval_every: int = 1
    matching: str = "none"  # none | permute
    arch: str = "linear"  # linear | mlp
    hidden: int = 32

    def check(self):
        if self.epochs < 0:
            raise InvalidParams("epochs must be >= 0")
        if self.batch_groups < 1 or self.learning_rate <= 0:
            raise InvalidParams("batch size and learning rate must be positive")
        if self.optimizer not in ("sgd", "momentum", "adam"):
            raise InvalidParams(f"unknown optimizer {self.optimizer!r}")
        if self.matching not in ("none", "permute"):
            raise InvalidParams(f"unknown matching {self.matching!r}")


@dataclass
class Model:
    arch: str  # linear | mlp
    output_mode: str  # softmax | sigmoid
    dim: int
    num_classes: int
    params: list[np.ndarray] = field(default_factory=list)

    def copy(self) -> "Model":
        return Model(
            self.arch,
            self.output_mode,
            self.dim,
            self.num_classes,
            [p.copy() for p in self.params],
        )


def init_model(arch: str, dim: int, num_classes: int, seed: int,
               hidden: int = 32, output_mode: str = "softmax") -> Model:
    """Seeded uniform init scaled by 1/sqrt(fan-in)."""
    if arch not in ("linear", "mlp"):
        raise InvalidParams(f"unknown architecture {arch!r}")
    if output_mode not in ("softmax", "sigmoid"):
        raise InvalidParams(f"unknown output mode {output_mode!r}")
    rng = np.random.default_rng(seed)

    def layer(n_in, n_out):
        bound = 1.0 / np.sqrt(n_in)
        return [
            rng.uniform(-bound, bound, size=(n_in, n_out)),
            np.zeros(n_out),
        ]

    if arch == "linear":
        params = layer(dim, num_classes)
    else:
        params = layer(dim, hidden) + layer(hidden, num_classes)
    return Model(arch, output_mode, dim, num_classes, params)


def _logits(model: Model, features: np.ndarray):
    if model.arch == "linear":
        return features @ model.params[0] + model.params[1], None
    hidden = np.tanh(features @ model.params[0] + model.params[1])
    return hidden @ model.params[2] + model.params[3], hidden


def predict(model: Model, features) -> np.ndarray:
    """Per-instance class probabilities (rows) or per-class sigmoids."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.dim:
        raise ShapeMismatch(f"features shape {features.shape}, model dim {model.dim}")
    logits, _ = _logits(model, features)
    if model.output_mode == "softmax":
        z = logits - logits.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)
    return 1.0 / (1.0 + np.exp(-logits))


def _param_grads(model: Model, features, hidden, grad_logits):
    if model.arch == "linear":
        return [features.T @ grad_logits, grad_logits.sum(axis=0)]
    g_hidden = (grad_logits @ model.params[2].T) * (1.0 - hidden**2)
    return [
        features.T @ g_hidden,
        g_hidden.sum(axis=0),
        hidden.T @ grad_logits,
        grad_logits.sum(axis=0),
    ]


class _Optimizer:
    def __init__(self, config: TrainConfig, params):
        self.kind = config.optimizer
        self.lr = config.learning_rate
        self.mu = config.momentum
        self.steps = 0
        self.vel = [np.zeros_like(p) for p in params]
        self.sq = [np.zeros_like(p) for p in params]

    def step(self, params, grads):
        self.steps += 1
        for i, (p, g) in enumerate(zip(params, grads)):
            if self.kind == "sgd":
                p -= self.lr * g
            elif self.kind == "momentum":
                self.vel[i] = self.mu * self.vel[i] + g
                p -= self.lr * self.vel[i]
            else:  # adam
                b1, b2, eps = 0.9, 0.999, 1e-8
                self.vel[i] = b1 * self.vel[i] + (1 - b1) * g
                self.sq[i] = b2 * self.sq[i] + (1 - b2) * g * g
                v_hat = self.vel[i] / (1 - b1**self.steps)
                s_hat = self.sq[i] / (1 - b2**self.steps)
                p -= self.lr * v_hat / (np.sqrt(s_hat) + eps)


class _GroupWork:
    """Cached per-group machinery: trellis (or one per class for OVR)."""

    def __init__(self, group, num_classes, output_mode):
        self.spec = group.spec
        self.length = group.spec.length
        if isinstance(group.spec, _MULTICLASS):
            if output_mode != "sigmoid":
                raise InvalidParams(
                    f"{group.spec.kind} needs the sigmoid (one-vs-rest) output mode"
                )
            self.trellises = [
                build_trellis(compile_spec(one_vs_rest(group.spec, k), 2), self.length)
                for k in range(num_classes)
            ]
        else:
            self.trellises = None
            self.trellis = build_trellis(
                compile_spec(group.spec, num_classes), self.length
            )

    def targets_and_losses(self, probs, log_probs):
        """Returns (targets, l_u, l_s) for this group's probability rows."""
        if self.trellises is None:
            out = posteriors(self.trellis, log_probs)
            losses = _loss_terms(out.targets, probs, out.log_z)
            return out.targets, losses.l_u, losses.l_s
        targets = np.empty_like(probs)
        l_u = 0.0
        l_s = 0.0
        for k, trellis in enumerate(self.trellises):
            col = np.stack([1.0 - probs[:, k], probs[:, k]], axis=1)
            with np.errstate(divide="ignore"):
                out = posteriors(trellis, np.log(col))
            losses = _loss_terms(out.targets, col, out.log_z)
            targets[:, k] = out.targets[:, 1]
            l_u += losses.l_u
            l_s += losses.l_s
        return targets, l_u, l_s


def train(dataset: WeakDataset, config: TrainConfig, model: Model | None = None,
          test_features=None, test_labels=None):
    """Minibatch training on the two-term lattice loss.

    Returns (model, log) where log holds one record per epoch with the
    per-group mean of each loss term and, when a labeled test set is
    given, the accuracy under the configured matching.
    """
    config.check()
    if not dataset.groups:
        raise InvalidParams("dataset is empty")
    n_multi = sum(isinstance(g.spec, _MULTICLASS) for g in dataset.groups)
    if 0 < n_multi < len(dataset.groups):
        raise InvalidParams(
            "multi-class aggregate groups cannot be mixed with other kinds "
            "(they train in one-vs-rest sigmoid mode)"
        )
    output_mode = "sigmoid" if n_multi else "softmax"
    if model is None:
        model = init_model(
            config.arch, dataset.feature_dim, dataset.num_classes, config.seed,
            hidden=config.hidden, output_mode=output_mode,
        )

    works = [
        _GroupWork(group, dataset.num_classes, model.output_mode)
        for group in dataset.groups
    ]

    rng = np.random.default_rng(config.seed)
    opt = _Optimizer(config, model.params)
    scale = config.u_weight + config.s_weight
    log = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(dataset.groups))
        sum_l_u = 0.0
        sum_l_s = 0.0
        for start in range(0, len(order), config.batch_groups):
            batch = order[start : start + config.batch_groups]
            feats = np.concatenate([dataset.groups[i].instances for i in batch])
            probs = predict(model, feats)
            with np.errstate(divide="ignore"):
                log_probs = np.log(probs)
            grad = np.empty_like(probs)
            row = 0
            for i in batch:
                work = works[i]
                rows = slice(row, row + work.length)
                try:
                    targets, l_u, l_s = work.targets_and_losses(
                        probs[rows], log_probs[rows]
                    )
                except InfeasibleSupervision as exc:
                    raise InfeasibleSupervision(f"group {i}: {exc.message}") from exc
                grad[rows] = scale * (probs[rows] - targets)
                sum_l_u += l_u
                sum_l_s += l_s
                row += work.length
            grad /= len(feats)
            _, hidden = _logits(model, feats)
            opt.step(model.params, _param_grads(model, feats, hidden, grad))
        record = {
            "epoch": epoch,
            "l_u": sum_l_u / len(dataset.groups),
            "l_s": sum_l_s / len(dataset.groups),
        }
        if test_features is not None and (
            epoch % config.eval_every == 0 or epoch == config.epochs - 1
        ):
            record["test_accuracy"] = evaluate(
                model, test_features, test_labels, config.matching
            )
        log.append(record)
    return model, log


def evaluate(model: Model, features, labels, matching: str = "none") -> float:
    """Accuracy, optionally maximized over output-label permutations."""
    labels = np.asarray(labels, dtype=np.int64)
    probs = predict(model, features)
    if probs.shape[0] != len(labels):
        raise ShapeMismatch(f"{probs.shape[0]} predictions for {len(labels)} labels")
    preds = probs.argmax(axis=1)
    if matching == "none":
        return float((preds == labels).mean())
    if matching != "permute":
        raise InvalidParams(f"unknown matching {matching!r}")
    if model.num_classes > 8:
        raise InvalidParams("permutation matching supported up to 8 classes")
    best = 0.0
    for perm in itertools.permutations(range(model.num_classes)):
        table = np.asarray(perm)
        best = max(best, float((table[preds] == labels).mean()))
    return best
