"""Finite discrete measures, joint measures and stochastic kernels.

Everything downstream (spectra, bounds, expansions) consumes these types.
All values are immutable after construction and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

KIND_TOL = 1e-12

Label = Hashable


class MeasureError(ValueError):
    """Invalid measure, kernel or label structure."""


def _check_weights(w: np.ndarray) -> None:
    if w.ndim == 0 or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise MeasureError("weights must be finite and non-negative")


def _infer_kind(total: float) -> str:
    if abs(total - 1.0) <= KIND_TOL:
        return "probability"
    if total <= 1.0 + KIND_TOL:
        return "subnormalized"
    return "generic"


@dataclass(frozen=True)
class DiscreteMeasure:
    """Non-negative weighted atoms over a finite label set.

    ``kind`` is one of ``probability`` (total mass 1), ``subnormalized``
    (total mass <= 1) or ``generic`` (e.g. the counting measure).
    Zero-weight atoms are kept in storage; ``support()`` drops them.
    """

    labels: tuple[Label, ...]
    weights: np.ndarray
    kind: str = "generic"

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != w.shape[0]:
            raise MeasureError("label/weight length mismatch")
        if len(set(self.labels)) != len(self.labels):
            raise MeasureError("duplicate labels in measure")
        _check_weights(w)
        total = float(w.sum())
        if self.kind == "probability" and abs(total - 1.0) > KIND_TOL:
            raise MeasureError(f"probability measure has mass {total!r}")
        if self.kind == "subnormalized" and total > 1.0 + KIND_TOL:
            raise MeasureError(f"subnormalized measure has mass {total!r}")
        if self.kind not in ("probability", "subnormalized", "generic"):
            raise MeasureError(f"unknown kind {self.kind!r}")
        w.setflags(write=False)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Label, float]], kind: str | None = None) -> "DiscreteMeasure":
        labels, weights = zip(*pairs)
        w = np.asarray(weights, dtype=float)
        if kind is None:
            kind = _infer_kind(float(w.sum()))
        return cls(tuple(labels), w, kind)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def weight(self, label: Label) -> float:
        return float(self.weights[self.labels.index(label)])

    def support(self) -> tuple[Label, ...]:
        return tuple(l for l, w in zip(self.labels, self.weights) if w > 0)

    def as_dict(self) -> dict[Label, float]:
        return dict(zip(self.labels, map(float, self.weights)))

    def scaled(self, c: float) -> "DiscreteMeasure":
        if c < 0:
            raise MeasureError("scale factor must be non-negative")
        w = self.weights * c
        return DiscreteMeasure(self.labels, w, _infer_kind(float(w.sum())))


@dataclass(frozen=True)
class JointMeasure:
    """Non-negative weight matrix over row labels x column labels."""

    row_labels: tuple[Label, ...]
    col_labels: tuple[Label, ...]
    weights: np.ndarray
    kind: str = "generic"

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "row_labels", tuple(self.row_labels))
        object.__setattr__(self, "col_labels", tuple(self.col_labels))
        if w.shape != (len(self.row_labels), len(self.col_labels)):
            raise MeasureError("weight matrix shape mismatch")
        if len(set(self.row_labels)) != len(self.row_labels) or len(set(self.col_labels)) != len(self.col_labels):
            raise MeasureError("duplicate labels in joint measure")
        _check_weights(w)
        total = float(w.sum())
        if self.kind == "probability" and abs(total - 1.0) > KIND_TOL:
            raise MeasureError(f"probability joint has mass {total!r}")
        if self.kind == "subnormalized" and total > 1.0 + KIND_TOL:
            raise MeasureError(f"subnormalized joint has mass {total!r}")
        w.setflags(write=False)

    @classmethod
    def from_matrix(cls, rows: Sequence[Label], cols: Sequence[Label], weights, kind: str | None = None) -> "JointMeasure":
        w = np.asarray(weights, dtype=float)
        if kind is None:
            kind = _infer_kind(float(w.sum()))
        return cls(tuple(rows), tuple(cols), w, kind)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def flattened(self) -> DiscreteMeasure:
        """The same measure over the product label set (row, col)."""
        labels = tuple((r, c) for r in self.row_labels for c in self.col_labels)
        return DiscreteMeasure(labels, self.weights.reshape(-1), self.kind)


@dataclass(frozen=True)
class ConditionalKernel:
    """Stochastic matrix: each row is a probability vector over outputs."""

    input_labels: tuple[Label, ...]
    output_labels: tuple[Label, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "input_labels", tuple(self.input_labels))
        object.__setattr__(self, "output_labels", tuple(self.output_labels))
        if m.shape != (len(self.input_labels), len(self.output_labels)):
            raise MeasureError("kernel matrix shape mismatch")
        _check_weights(m)
        rows = m.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > KIND_TOL):
            raise MeasureError("kernel rows must sum to 1")
        m.setflags(write=False)

    def prob(self, out: Label, inp: Label) -> float:
        return float(self.matrix[self.input_labels.index(inp), self.output_labels.index(out)])


def marginal(j: JointMeasure, axis: int) -> DiscreteMeasure:
    """Marginal of a joint measure; axis 0 keeps rows, axis 1 keeps columns."""
    if axis == 0:
        w = j.weights.sum(axis=1)
        labels = j.row_labels
    elif axis == 1:
        w = j.weights.sum(axis=0)
        labels = j.col_labels
    else:
        raise MeasureError("axis must be 0 or 1")
    return DiscreteMeasure(labels, w, _infer_kind(float(w.sum())))


def compose(k: ConditionalKernel, p: DiscreteMeasure) -> JointMeasure:
    """Joint measure with entry (a, b) = k(b|a) * p(a)."""
    if k.input_labels != p.labels:
        raise MeasureError("kernel input labels do not match measure atoms")
    w = p.weights[:, None] * k.matrix
    return JointMeasure(p.labels, k.output_labels, w, _infer_kind(float(w.sum())))


def counting_measure(labels: Sequence[Label]) -> DiscreteMeasure:
    """Weight 1 on every atom."""
    labels = tuple(labels)
    if not labels:
        raise MeasureError("counting measure needs a nonempty label set")
    return DiscreteMeasure(labels, np.ones(len(labels)), "generic")


def uniform(labels: Sequence[Label]) -> DiscreteMeasure:
    labels = tuple(labels)
    if not labels:
        raise MeasureError("uniform distribution needs a nonempty label set")
    return DiscreteMeasure(labels, np.full(len(labels), 1.0 / len(labels)), "probability")


def product_reference(r: DiscreteMeasure, rows: Sequence[Label]) -> JointMeasure:
    """Lift a column-marginal reference to the joint alphabet: (a, b) -> r(b).

    Used for reference pairs of the form (P_AB, R_B).
    """
    rows = tuple(rows)
    w = np.tile(r.weights, (len(rows), 1))
    return JointMeasure(rows, r.labels, w, _infer_kind(float(w.sum())))
