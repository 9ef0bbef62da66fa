"""On-disk formats: dataset JSON, probability-table CSV, metrics JSON.

Floating-point values are serialized with Python's shortest round-trip
representation, so save/load is lossless bit for bit.
"""

from __future__ import annotations

import json

import numpy as np

from .datagen import Group, WeakDataset
from .errors import InvalidParams, ShapeMismatch
from .supervision import FullLabels, from_dict, to_dict

DATASET_VERSION = 1


def save_dataset(dataset: WeakDataset, path) -> None:
    doc = {
        "version": DATASET_VERSION,
        "setting": dataset.metadata.get("setting", ""),
        "num_classes": dataset.num_classes,
        "feature_dim": dataset.feature_dim,
        "groups": [
            {
                "instances": [[float(v) for v in row] for row in g.instances],
                "spec": to_dict(g.spec),
            }
            for g in dataset.groups
        ],
        "metadata": dataset.metadata,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_dataset(path) -> WeakDataset:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("version") != DATASET_VERSION:
        raise InvalidParams(f"unsupported dataset version {doc.get('version')!r}")
    feature_dim = int(doc["feature_dim"])
    groups = []
    for rec in doc["groups"]:
        instances = np.asarray(rec["instances"], dtype=np.float64)
        instances = instances.reshape(-1, feature_dim)
        spec = from_dict(rec["spec"])
        if instances.shape[0] != spec.length:
            raise ShapeMismatch(
                f"group has {instances.shape[0]} instances, annotation covers "
                f"{spec.length}"
            )
        groups.append(Group(instances, spec))
    return WeakDataset(
        groups=groups,
        num_classes=int(doc["num_classes"]),
        feature_dim=feature_dim,
        metadata=dict(doc.get("metadata", {})),
    )


def flatten_instances(dataset: WeakDataset) -> np.ndarray:
    """All instances stacked in group order (the probs-file row order)."""
    if not dataset.groups:
        return np.zeros((0, dataset.feature_dim))
    return np.concatenate([g.instances for g in dataset.groups])


def dataset_labels(dataset: WeakDataset) -> np.ndarray:
    """Labels of a fully supervised dataset (every group FullLabels)."""
    labels = []
    for i, g in enumerate(dataset.groups):
        if not isinstance(g.spec, FullLabels):
            raise InvalidParams(f"group {i} is {g.spec.kind}, not fully labeled")
        labels.extend(g.spec.labels)
    return np.asarray(labels, dtype=np.int64)


def save_probs(probs, path) -> None:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2:
        raise ShapeMismatch(f"probability table must be 2-D, got {probs.shape}")
    with open(path, "w") as fh:
        fh.write(f"# rows={probs.shape[0]} cols={probs.shape[1]}\n")
        for row in probs:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_probs(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip()
        rows = []
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(v) for v in line.split(",")])
    try:
        fields = dict(part.split("=") for part in header.lstrip("# ").split())
        expect = (int(fields["rows"]), int(fields["cols"]))
    except (ValueError, KeyError) as exc:
        raise InvalidParams(f"malformed probability-table header {header!r}") from exc
    probs = np.asarray(rows, dtype=np.float64)
    if probs.shape != expect:
        raise ShapeMismatch(f"header promises {expect}, file holds {probs.shape}")
    if np.any(probs < 0.0) or np.any(probs > 1.0):
        raise InvalidParams("probability entries must lie in [0, 1]")
    if not np.allclose(probs.sum(axis=1), 1.0, atol=1e-6):
        raise InvalidParams("probability rows must sum to 1")
    return probs


def save_metrics(metrics: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(metrics, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_metrics(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
