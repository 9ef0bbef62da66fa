"""Weak-supervision annotations and their compilation to weighted automata.

Each annotation describes what is known about the labels of one group of L
instances. ``compile_spec`` turns an annotation into an automaton whose
accepted length-L language is exactly the set of labelings consistent with
it; soft annotations (confidences, pair weights) become transition weights.
Aggregate and pairwise kinds are binary-only; multi-class aggregate
annotations are reduced class by class with ``one_vs_rest``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .automaton import Nfa, Transition
from .errors import InvalidSpec, UnsupportedCardinality


class SupervisionSpec:
    """Base class of the annotation variants (tagged union)."""

    kind: str = ""

    @property
    def length(self) -> int:
        raise NotImplementedError

    def check(self, num_classes: int | None = None) -> None:
        """Raise InvalidSpec when an invariant is violated."""


@dataclass(frozen=True)
class PartialLabel(SupervisionSpec):
    """Per-instance candidate label sets; the true label lies in each set."""

    candidates: tuple[tuple[int, ...], ...]
    kind = "partial_label"

    def __post_init__(self):
        object.__setattr__(
            self,
            "candidates",
            tuple(tuple(sorted(set(int(v) for v in s))) for s in self.candidates),
        )

    @property
    def length(self):
        return len(self.candidates)

    def check(self, num_classes=None):
        if not self.candidates:
            raise InvalidSpec("partial labels need at least one position")
        for j, s in enumerate(self.candidates):
            if not s:
                raise InvalidSpec(f"empty candidate set at position {j}")
            if min(s) < 0:
                raise InvalidSpec(f"negative label in candidate set at position {j}")
            if num_classes is not None and max(s) >= num_classes:
                raise InvalidSpec(
                    f"candidate {max(s)} at position {j} outside [0, {num_classes})"
                )


@dataclass(frozen=True)
class MultiInstance(SupervisionSpec):
    """Presence flag: at least one positive in the group (or none at all)."""

    present: bool
    group_length: int
    kind = "multi_instance"

    @property
    def length(self):
        return self.group_length

    def check(self, num_classes=None):
        if self.group_length < 1:
            raise InvalidSpec("group length must be >= 1")


@dataclass(frozen=True)
class LabelProportion(SupervisionSpec):
    """Exact count of positive labels in the group."""

    positives: int
    group_length: int
    kind = "label_proportion"

    @property
    def length(self):
        return self.group_length

    def check(self, num_classes=None):
        if self.group_length < 1:
            raise InvalidSpec("group length must be >= 1")
        if not 0 <= self.positives <= self.group_length:
            raise InvalidSpec(
                f"count {self.positives} outside [0, {self.group_length}]"
            )


@dataclass(frozen=True)
class PairwiseComparison(SupervisionSpec):
    """First instance at least as positive as the second (L = 2)."""

    kind = "pairwise_comparison"

    @property
    def length(self):
        return 2


@dataclass(frozen=True)
class PairwiseSimilarity(SupervisionSpec):
    """Pair labeled similar or dissimilar, optionally with confidence c.

    Labelings consistent with the stated relation carry weight c, the
    others 1 - c; absent confidence means a hard constraint (c = 1).
    """

    similar: bool
    confidence: float | None = None
    kind = "pairwise_similarity"

    @property
    def length(self):
        return 2

    def check(self, num_classes=None):
        c = self.confidence
        if c is not None and not 0.0 <= c <= 1.0:
            raise InvalidSpec(f"confidence {c} outside [0, 1]")


@dataclass(frozen=True)
class WeightedPair(SupervisionSpec):
    """Explicit weights over the four pair labelings (00, 01, 10, 11)."""

    weights: tuple[float, float, float, float]
    kind = "weighted_pair"

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    @property
    def length(self):
        return 2

    def check(self, num_classes=None):
        if len(self.weights) != 4:
            raise InvalidSpec("exactly four pair weights required")
        if any(w < 0.0 or w > 1.0 or math.isnan(w) for w in self.weights):
            raise InvalidSpec(f"pair weights {self.weights} outside [0, 1]")
        if all(w == 0.0 for w in self.weights):
            raise InvalidSpec("pair weights are all zero")


@dataclass(frozen=True)
class PositiveConfidence(SupervisionSpec):
    """Per-instance probability of being positive, from a teacher."""

    confidences: tuple[float, ...]
    kind = "positive_confidence"

    def __post_init__(self):
        object.__setattr__(
            self, "confidences", tuple(float(c) for c in self.confidences)
        )

    @property
    def length(self):
        return len(self.confidences)

    def check(self, num_classes=None):
        if not self.confidences:
            raise InvalidSpec("at least one confidence required")
        if any(c < 0.0 or c > 1.0 or math.isnan(c) for c in self.confidences):
            raise InvalidSpec("confidences must lie in [0, 1]")


@dataclass(frozen=True)
class ClassPrior(SupervisionSpec):
    """Unlabeled group of n instances with known positive-class prior."""

    prior: float
    group_length: int
    kind = "class_prior"

    @property
    def length(self):
        return self.group_length

    @property
    def expected_positives(self) -> int:
        # round-half-to-even keeps ties deterministic
        return int(round(self.prior * self.group_length))

    def check(self, num_classes=None):
        if not 0.0 < self.prior < 1.0:
            raise InvalidSpec(f"prior {self.prior} must lie in (0, 1)")
        if self.group_length < 1:
            raise InvalidSpec("group length must be >= 1")


@dataclass(frozen=True)
class FullLabels(SupervisionSpec):
    """Exact label sequence (fully supervised group)."""

    labels: tuple[int, ...]
    kind = "full_labels"

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(int(v) for v in self.labels))

    @property
    def length(self):
        return len(self.labels)

    def check(self, num_classes=None):
        if not self.labels:
            raise InvalidSpec("at least one label required")
        if min(self.labels) < 0:
            raise InvalidSpec("negative label")
        if num_classes is not None and max(self.labels) >= num_classes:
            raise InvalidSpec(f"label {max(self.labels)} outside [0, {num_classes})")


@dataclass(frozen=True)
class Unconstrained(SupervisionSpec):
    """No information about the group's labels."""

    group_length: int
    kind = "unconstrained"

    @property
    def length(self):
        return self.group_length

    def check(self, num_classes=None):
        if self.group_length < 1:
            raise InvalidSpec("group length must be >= 1")


@dataclass(frozen=True)
class MultiClassMultiInstance(SupervisionSpec):
    """Per-class presence flags over a multi-class group (one-vs-rest input)."""

    flags: tuple[bool, ...]
    group_length: int
    kind = "multiclass_multi_instance"

    @property
    def length(self):
        return self.group_length

    def check(self, num_classes=None):
        if self.group_length < 1:
            raise InvalidSpec("group length must be >= 1")
        if num_classes is not None and len(self.flags) != num_classes:
            raise InvalidSpec(f"{len(self.flags)} flags for {num_classes} classes")
        if not any(self.flags):
            raise InvalidSpec("at least one class must be present")


@dataclass(frozen=True)
class MultiClassLabelProportion(SupervisionSpec):
    """Per-class label counts over a multi-class group (one-vs-rest input)."""

    counts: tuple[int, ...]
    group_length: int
    kind = "multiclass_label_proportion"

    @property
    def length(self):
        return self.group_length

    def check(self, num_classes=None):
        if self.group_length < 1:
            raise InvalidSpec("group length must be >= 1")
        if num_classes is not None and len(self.counts) != num_classes:
            raise InvalidSpec(f"{len(self.counts)} counts for {num_classes} classes")
        if any(c < 0 for c in self.counts):
            raise InvalidSpec("negative class count")
        if sum(self.counts) != self.group_length:
            raise InvalidSpec(
                f"class counts sum to {sum(self.counts)}, group length is "
                f"{self.group_length}"
            )


_BINARY_ONLY = (
    MultiInstance,
    LabelProportion,
    PairwiseComparison,
    PairwiseSimilarity,
    WeightedPair,
    PositiveConfidence,
    ClassPrior,
)

_MULTICLASS_AGGREGATE = (MultiClassMultiInstance, MultiClassLabelProportion)


def _chain(candidate_sets, num_symbols) -> Nfa:
    length = len(candidate_sets)
    transitions = [
        Transition(j, y, j + 1)
        for j, symbols in enumerate(candidate_sets)
        for y in symbols
    ]
    return Nfa(
        num_states=length + 1,
        num_symbols=num_symbols,
        initial=0,
        accepting=frozenset({length}),
        transitions=tuple(transitions),
    )


def _count_automaton(positives: int, num_symbols: int = 2) -> Nfa:
    transitions = []
    for q in range(positives + 1):
        transitions.append(Transition(q, 0, q))
        if q < positives:
            transitions.append(Transition(q, 1, q + 1))
    return Nfa(
        num_states=positives + 1,
        num_symbols=num_symbols,
        initial=0,
        accepting=frozenset({positives}),
        transitions=tuple(transitions),
    )


def _pair_automaton(weights) -> Nfa:
    """Four-path union automaton; zero-weight paths are dropped entirely."""
    transitions = []
    mid = {}
    next_state = 1
    for idx, (y1, y2) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
        w = weights[idx]
        if w == 0.0:
            continue
        mid[(y1, y2)] = next_state
        next_state += 1
    accept = next_state
    for (y1, y2), state in mid.items():
        w = weights[(y1 << 1) | y2]
        transitions.append(Transition(0, y1, state, math.log(w)))
        transitions.append(Transition(state, y2, accept))
    return Nfa(
        num_states=accept + 1,
        num_symbols=2,
        initial=0,
        accepting=frozenset({accept}),
        transitions=tuple(transitions),
    )


def compile_spec(spec: SupervisionSpec, num_symbols: int) -> Nfa:
    """Build the automaton whose length-L language matches the annotation."""
    if num_symbols < 2:
        raise InvalidSpec(f"need at least 2 classes, got {num_symbols}")
    if isinstance(spec, _MULTICLASS_AGGREGATE):
        raise InvalidSpec(
            f"{spec.kind} compiles per class; reduce with one_vs_rest first"
        )
    if isinstance(spec, _BINARY_ONLY) and num_symbols != 2:
        raise UnsupportedCardinality(
            f"{spec.kind} is binary-only, got {num_symbols} classes"
        )
    spec.check(num_symbols)

    if isinstance(spec, PartialLabel):
        return _chain(spec.candidates, num_symbols)
    if isinstance(spec, FullLabels):
        return _chain([(y,) for y in spec.labels], num_symbols)
    if isinstance(spec, Unconstrained):
        loops = tuple(Transition(0, y, 0) for y in range(num_symbols))
        return Nfa(1, num_symbols, 0, frozenset({0}), loops)
    if isinstance(spec, MultiInstance):
        if not spec.present:
            return Nfa(1, 2, 0, frozenset({0}), (Transition(0, 0, 0),))
        return Nfa(
            2,
            2,
            0,
            frozenset({1}),
            (
                Transition(0, 0, 0),
                Transition(0, 1, 1),
                Transition(1, 0, 1),
                Transition(1, 1, 1),
            ),
        )
    if isinstance(spec, LabelProportion):
        return _count_automaton(spec.positives)
    if isinstance(spec, ClassPrior):
        return _count_automaton(spec.expected_positives)
    if isinstance(spec, PairwiseComparison):
        return Nfa(
            3,
            2,
            0,
            frozenset({2}),
            (
                Transition(0, 0, 2),
                Transition(0, 1, 1),
                Transition(1, 0, 2),
                Transition(1, 1, 2),
                Transition(2, 0, 2),
            ),
        )
    if isinstance(spec, PairwiseSimilarity):
        c = 1.0 if spec.confidence is None else spec.confidence
        same, diff = (c, 1.0 - c) if spec.similar else (1.0 - c, c)
        return _pair_automaton((same, diff, diff, same))
    if isinstance(spec, WeightedPair):
        return _pair_automaton(spec.weights)
    if isinstance(spec, PositiveConfidence):
        conf = np.asarray(spec.confidences, dtype=np.float64)
        with np.errstate(divide="ignore"):
            table = np.stack([np.log(1.0 - conf), np.log(conf)], axis=1)
        return Nfa(
            1,
            2,
            0,
            frozenset({0}),
            (Transition(0, 0, 0), Transition(0, 1, 0)),
            position_weights=table,
        )
    raise InvalidSpec(f"unknown supervision kind {type(spec).__name__}")


def one_vs_rest(spec: SupervisionSpec, cls: int) -> SupervisionSpec:
    """Project a multi-class aggregate annotation onto one binary problem."""
    if isinstance(spec, MultiClassMultiInstance):
        spec.check(len(spec.flags))
        if not 0 <= cls < len(spec.flags):
            raise InvalidSpec(f"class {cls} outside [0, {len(spec.flags)})")
        return MultiInstance(bool(spec.flags[cls]), spec.group_length)
    if isinstance(spec, MultiClassLabelProportion):
        spec.check(len(spec.counts))
        if not 0 <= cls < len(spec.counts):
            raise InvalidSpec(f"class {cls} outside [0, {len(spec.counts)})")
        return LabelProportion(int(spec.counts[cls]), spec.group_length)
    raise InvalidSpec(f"{spec.kind} has no multi-class form")


def to_dict(spec: SupervisionSpec) -> dict:
    """Plain-data mirror of an annotation (the on-disk/bindings schema)."""
    if isinstance(spec, PartialLabel):
        return {"kind": spec.kind, "candidates": [list(s) for s in spec.candidates]}
    if isinstance(spec, MultiInstance):
        return {"kind": spec.kind, "present": spec.present, "length": spec.group_length}
    if isinstance(spec, LabelProportion):
        return {
            "kind": spec.kind,
            "positives": spec.positives,
            "length": spec.group_length,
        }
    if isinstance(spec, PairwiseComparison):
        return {"kind": spec.kind}
    if isinstance(spec, PairwiseSimilarity):
        out = {"kind": spec.kind, "similar": spec.similar}
        if spec.confidence is not None:
            out["confidence"] = spec.confidence
        return out
    if isinstance(spec, WeightedPair):
        return {"kind": spec.kind, "weights": list(spec.weights)}
    if isinstance(spec, PositiveConfidence):
        return {"kind": spec.kind, "confidences": list(spec.confidences)}
    if isinstance(spec, ClassPrior):
        return {"kind": spec.kind, "prior": spec.prior, "length": spec.group_length}
    if isinstance(spec, FullLabels):
        return {"kind": spec.kind, "labels": list(spec.labels)}
    if isinstance(spec, Unconstrained):
        return {"kind": spec.kind, "length": spec.group_length}
    if isinstance(spec, MultiClassMultiInstance):
        return {
            "kind": spec.kind,
            "flags": [bool(f) for f in spec.flags],
            "length": spec.group_length,
        }
    if isinstance(spec, MultiClassLabelProportion):
        return {
            "kind": spec.kind,
            "counts": list(spec.counts),
            "length": spec.group_length,
        }
    raise InvalidSpec(f"unknown supervision kind {type(spec).__name__}")


def from_dict(data: dict) -> SupervisionSpec:
    """Inverse of ``to_dict``; raises InvalidSpec on malformed input."""
    try:
        kind = data["kind"]
        if kind == "partial_label":
            return PartialLabel(tuple(tuple(s) for s in data["candidates"]))
        if kind == "multi_instance":
            return MultiInstance(bool(data["present"]), int(data["length"]))
        if kind == "label_proportion":
            return LabelProportion(int(data["positives"]), int(data["length"]))
        if kind == "pairwise_comparison":
            return PairwiseComparison()
        if kind == "pairwise_similarity":
            conf = data.get("confidence")
            return PairwiseSimilarity(
                bool(data["similar"]), None if conf is None else float(conf)
            )
        if kind == "weighted_pair":
            return WeightedPair(tuple(data["weights"]))
        if kind == "positive_confidence":
            return PositiveConfidence(tuple(data["confidences"]))
        if kind == "class_prior":
            return ClassPrior(float(data["prior"]), int(data["length"]))
        if kind == "full_labels":
            return FullLabels(tuple(data["labels"]))
        if kind == "unconstrained":
            return Unconstrained(int(data["length"]))
        if kind == "multiclass_multi_instance":
            return MultiClassMultiInstance(
                tuple(bool(f) for f in data["flags"]), int(data["length"])
            )
        if kind == "multiclass_label_proportion":
            return MultiClassLabelProportion(
                tuple(int(c) for c in data["counts"]), int(data["length"])
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSpec(f"malformed annotation record: {exc}") from exc
    raise InvalidSpec(f"unknown supervision kind {data.get('kind')!r}")
