"""Synthetic Gaussian tasks and their conversion to weak supervision.

Starts from a fully labeled Gaussian mixture and rewrites it into any of
the supported weak-annotation settings: candidate sets, presence flags,
label counts, ordered/similarity/confidence pairs, per-instance teacher
confidences, and prior-annotated unlabeled pools. Teacher scores come from
the analytic posterior of the generating mixture, optionally perturbed by
seeded noise. Everything is deterministic given (seed, params).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .automaton import accepts
from .errors import InvalidParams
from .supervision import (
    ClassPrior,
    FullLabels,
    LabelProportion,
    MultiInstance,
    PairwiseComparison,
    PairwiseSimilarity,
    PartialLabel,
    PositiveConfidence,
    SupervisionSpec,
    WeightedPair,
    compile_spec,
)

SETTINGS = (
    "partial",
    "complementary",
    "multi_instance",
    "label_proportion",
    "pcomp",
    "psim",
    "simconf",
    "confdiff",
    "pos_conf",
    "pos_unlabeled",
    "unlabeled_unlabeled",
    "sd_unlabeled",
)

# Settings where only a label-permuted classifier is identifiable.
PERMUTE_SETTINGS = ("psim", "sd_unlabeled", "unlabeled_unlabeled")


@dataclass(frozen=True)
class Group:
    instances: np.ndarray  # (L, D)
    spec: SupervisionSpec


@dataclass
class WeakDataset:
    groups: list[Group]
    num_classes: int
    feature_dim: int
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.groups)

    @property
    def total_instances(self) -> int:
        return sum(g.instances.shape[0] for g in self.groups)


def default_means(num_classes: int, dim: int = 2) -> np.ndarray:
    """Class means with pairwise-adjacent distance 4 (K=2 gives (-2,0)/(+2,0))."""
    if num_classes < 2 or dim < 2:
        raise InvalidParams("need num_classes >= 2 and dim >= 2")
    if num_classes == 2:
        means = np.array([[-2.0, 0.0], [2.0, 0.0]])
    else:
        radius = 2.0 / np.sin(np.pi / num_classes)
        angles = 2.0 * np.pi * np.arange(num_classes) / num_classes
        means = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    out = np.zeros((num_classes, dim))
    out[:, :2] = means
    return out


def gen_gaussians(n_per_class: int, means, stddev: float, seed: int):
    """Isotropic Gaussian blobs; returns (features, labels) in class blocks."""
    means = np.asarray(means, dtype=np.float64)
    if means.ndim != 2 or len(np.unique(means, axis=0)) != means.shape[0]:
        raise InvalidParams("class means must be distinct")
    if stddev <= 0:
        raise InvalidParams(f"stddev must be positive, got {stddev}")
    if n_per_class < 0:
        raise InvalidParams("n_per_class must be >= 0")
    num_classes, dim = means.shape
    rng = np.random.default_rng(seed)
    features = np.zeros((num_classes * n_per_class, dim))
    labels = np.zeros(num_classes * n_per_class, dtype=np.int64)
    for k in range(num_classes):
        block = slice(k * n_per_class, (k + 1) * n_per_class)
        features[block] = means[k] + stddev * rng.standard_normal((n_per_class, dim))
        labels[block] = k
    return features, labels


def bayes_posterior(features, means, stddev: float) -> np.ndarray:
    """Class posterior of the generating mixture under equal priors."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    means = np.asarray(means, dtype=np.float64)
    d2 = ((features[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
    logit = -d2 / (2.0 * stddev**2)
    logit -= logit.max(axis=1, keepdims=True)
    p = np.exp(logit)
    return p / p.sum(axis=1, keepdims=True)


def _noisy(values: np.ndarray, noise: float, rng, lo: float, hi: float) -> np.ndarray:
    if noise == 0.0:
        return np.clip(values, lo, hi)
    return np.clip(values + rng.normal(0.0, noise, size=values.shape), lo, hi)


def _bag_sizes(rng, count: int, mean: float, std: float) -> np.ndarray:
    if count < 1:
        raise InvalidParams("need at least one group")
    if mean < 1 or std < 0:
        raise InvalidParams(f"bad bag size distribution N({mean}, {std})")
    sizes = np.rint(rng.normal(mean, std, size=count))
    return np.maximum(sizes, 1).astype(np.int64)


def _check_prior(prior) -> float:
    prior = float(prior)
    if not 0.0 < prior < 1.0:
        raise InvalidParams("prior must lie in (0,1)")
    return prior


def _chunks(indices, size):
    for start in range(0, len(indices), size):
        yield indices[start : start + size]


class _Builder:
    """Accumulates groups and remembers hidden labels for the faithfulness check."""

    def __init__(self, features, labels, num_classes):
        self.features = features
        self.labels = labels
        self.num_classes = num_classes
        self.by_class = [np.flatnonzero(labels == k) for k in range(num_classes)]
        for k, pool in enumerate(self.by_class):
            if len(pool) == 0:
                raise InvalidParams(f"class {k} has no instances")
        self.groups: list[Group] = []
        self.hidden: list[np.ndarray] = []

    def draw(self, rng, cls: int, count: int) -> np.ndarray:
        pool = self.by_class[cls]
        return pool[rng.integers(0, len(pool), size=count)]

    def add(self, indices: np.ndarray, spec: SupervisionSpec):
        self.groups.append(Group(self.features[indices].copy(), spec))
        self.hidden.append(self.labels[indices].copy())


def _mixed_pair_kind(rng, prior: float) -> tuple[int, int]:
    """True labels of one pair drawn from the prior-squared pair distribution."""
    u = rng.random()
    if u < prior**2:
        return 1, 1
    if u < prior**2 + (1.0 - prior) ** 2:
        return 0, 0
    return (1, 0) if rng.random() < 0.5 else (0, 1)


def _prior_group(builder, rng, prior: float, size: int) -> np.ndarray:
    """Unlabeled group whose composition realizes the rounded expected count."""
    positives = int(round(prior * size))
    idx = np.concatenate(
        [builder.draw(rng, 1, positives), builder.draw(rng, 0, size - positives)]
    )
    return idx[rng.permutation(size)]


def weaken(features, labels, setting: str, params: dict, seed: int,
           num_classes: int | None = None, check: bool = True) -> WeakDataset:
    """Rewrite labeled instances into one weak-supervision setting.

    ``params`` supplies the setting's knobs; teacher-based settings
    additionally need ``means`` and ``stddev`` of the generating mixture.
    Every emitted group is checked to accept its hidden true labels.
    """
    if setting not in SETTINGS:
        raise InvalidParams(f"unknown setting {setting!r}; choose from {SETTINGS}")
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if num_classes is None:
        num_classes = int(labels.max()) + 1
    if setting not in ("partial", "complementary") and num_classes != 2:
        raise InvalidParams(f"{setting} is a binary setting; got {num_classes} classes")
    rng = np.random.default_rng(seed)
    b = _Builder(features, labels, num_classes)

    def teacher_scores(idx) -> np.ndarray:
        try:
            means = np.asarray(params["means"], dtype=np.float64)
            stddev = float(params["stddev"])
        except KeyError as exc:
            raise InvalidParams(f"{setting} needs generator {exc} for the teacher")
        return bayes_posterior(features[idx], means, stddev)[:, 1]

    noise = float(params.get("teacher_noise", 0.0))
    if noise < 0:
        raise InvalidParams("teacher_noise must be >= 0")

    if setting in ("partial", "complementary"):
        group_size = int(params.get("group_size", 25))
        order = rng.permutation(len(labels))
        if setting == "partial":
            ratio = float(params.get("ratio", 0.5))
            if not 0.0 <= ratio <= 1.0:
                raise InvalidParams(f"partial ratio {ratio} outside [0, 1]")
        for chunk in _chunks(order, group_size):
            sets = []
            for y in labels[chunk]:
                if setting == "partial":
                    extra = [
                        k
                        for k in range(num_classes)
                        if k != y and rng.random() < ratio
                    ]
                else:
                    banned = rng.integers(0, num_classes - 1)
                    banned += banned >= y
                    extra = [k for k in range(num_classes) if k not in (y, banned)]
                sets.append(tuple(sorted([int(y)] + extra)))
            b.add(chunk, PartialLabel(tuple(sets)))

    elif setting in ("multi_instance", "label_proportion"):
        bags = int(params.get("bags", 500))
        sizes = _bag_sizes(
            rng, bags, float(params.get("size_mean", 10)), float(params.get("size_std", 2))
        )
        # Positive bags carry a minority of positives, as when the positive
        # class is one of many; presence flags are vacuous otherwise.
        bag_prior = _check_prior(params.get("bag_prior", 0.2))
        for i, size in enumerate(sizes):
            if setting == "multi_instance":
                if i % 2 == 1:  # balanced positive/negative bags
                    b.add(b.draw(rng, 0, size), MultiInstance(False, int(size)))
                    continue
                while True:
                    flags = rng.random(size) < bag_prior
                    if flags.any():
                        break
                idx = np.where(
                    flags, b.draw(rng, 1, size), b.draw(rng, 0, size)
                )
                b.add(idx, MultiInstance(True, int(size)))
            else:
                idx = rng.integers(0, len(labels), size=size)
                count = int((labels[idx] == 1).sum())
                b.add(idx, LabelProportion(count, int(size)))

    elif setting in ("pcomp", "psim", "simconf"):
        pairs = int(params.get("pairs", 2000))
        prior = _check_prior(params.get("prior", 0.5))
        for _ in range(pairs):
            y1, y2 = _mixed_pair_kind(rng, prior)
            if setting == "pcomp" and (y1, y2) == (0, 1):
                y1, y2 = 1, 0  # orient mixed pairs positive-first
            idx = np.array([b.draw(rng, y1, 1)[0], b.draw(rng, y2, 1)[0]])
            if setting == "pcomp":
                b.add(idx, PairwiseComparison())
            elif setting == "psim":
                b.add(idx, PairwiseSimilarity(similar=bool(y1 == y2)))
            else:
                q = teacher_scores(idx)
                conf = _noisy(
                    np.array([q[0] * q[1] + (1 - q[0]) * (1 - q[1])]), noise, rng, 0.0, 1.0
                )[0]
                b.add(idx, PairwiseSimilarity(similar=True, confidence=float(conf)))

    elif setting == "confdiff":
        pairs = int(params.get("pairs", 2000))
        prior = _check_prior(params.get("prior", 0.5))
        for _ in range(pairs):
            y1 = int(rng.random() < prior)
            y2 = int(rng.random() < prior)
            idx = np.array([b.draw(rng, y1, 1)[0], b.draw(rng, y2, 1)[0]])
            q = teacher_scores(idx)
            diff = _noisy(np.array([q[1] - q[0]]), noise, rng, -1.0, 1.0)[0]
            b.add(
                idx,
                WeightedPair((0.5, (1 + diff) / 2, (1 - diff) / 2, 0.5)),
            )

    elif setting == "pos_conf":
        instances = int(params.get("instances", 2000))
        group_size = int(params.get("group_size", 10))
        idx_all = rng.integers(0, len(labels), size=instances)
        for chunk in _chunks(idx_all, group_size):
            conf = _noisy(teacher_scores(chunk), noise, rng, 0.0, 1.0)
            b.add(chunk, PositiveConfidence(tuple(float(c) for c in conf)))

    elif setting == "pos_unlabeled":
        labeled = int(params.get("labeled", 200))
        unlabeled = int(params.get("unlabeled", 4000))
        prior = _check_prior(params.get("prior", 0.5))
        group_size = int(params.get("group_size", 20))
        for chunk in _chunks(np.arange(labeled), group_size):
            idx = b.draw(rng, 1, len(chunk))
            b.add(idx, FullLabels((1,) * len(chunk)))
        for chunk in _chunks(np.arange(unlabeled), group_size):
            idx = _prior_group(b, rng, prior, len(chunk))
            b.add(idx, ClassPrior(prior, len(chunk)))

    elif setting == "unlabeled_unlabeled":
        instances = int(params.get("instances", 2000))
        prior = _check_prior(params.get("prior", 0.7))
        group_size = int(params.get("group_size", 10))
        for pool_prior in (prior, 1.0 - prior):
            for chunk in _chunks(np.arange(instances), group_size):
                idx = _prior_group(b, rng, pool_prior, len(chunk))
                b.add(idx, ClassPrior(pool_prior, len(chunk)))

    elif setting == "sd_unlabeled":
        pairs = int(params.get("pairs", 1000))
        unlabeled = int(params.get("unlabeled", 1000))
        prior = _check_prior(params.get("prior", 0.5))
        group_size = int(params.get("group_size", 20))
        for _ in range(pairs):
            y1, y2 = _mixed_pair_kind(rng, prior)
            idx = np.array([b.draw(rng, y1, 1)[0], b.draw(rng, y2, 1)[0]])
            b.add(idx, PairwiseSimilarity(similar=bool(y1 == y2)))
        for chunk in _chunks(np.arange(unlabeled), group_size):
            idx = _prior_group(b, rng, prior, len(chunk))
            b.add(idx, ClassPrior(prior, len(chunk)))

    if check:
        for i, (group, hidden) in enumerate(zip(b.groups, b.hidden)):
            nfa = compile_spec(group.spec, num_classes)
            if accepts(nfa, hidden) is None:
                raise AssertionError(
                    f"group {i}: hidden labels {hidden.tolist()} rejected by its "
                    f"own {group.spec.kind} annotation"
                )

    metadata = {
        "setting": setting,
        "seed": int(seed),
        "params": {
            k: (float(v) if isinstance(v, (float, np.floating)) else int(v))
            for k, v in params.items()
            if k not in ("means",) and np.isscalar(v)
        },
        "matching": "permute" if setting in PERMUTE_SETTINGS else "none",
    }
    return WeakDataset(
        groups=b.groups,
        num_classes=num_classes,
        feature_dim=features.shape[1],
        metadata=metadata,
    )


def labeled_dataset(features, labels, metadata=None) -> WeakDataset:
    """Wrap labeled instances as single-instance fully supervised groups."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    groups = [
        Group(features[i : i + 1].copy(), FullLabels((int(labels[i]),)))
        for i in range(len(labels))
    ]
    num_classes = int(labels.max()) + 1 if len(labels) else 2
    return WeakDataset(
        groups=groups,
        num_classes=num_classes,
        feature_dim=features.shape[1],
        metadata=dict(metadata or {}),
    )
