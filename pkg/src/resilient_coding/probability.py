"""Finite distributions, channels and the entropy quantities built on them.

All logarithms are base 2. Joint layouts are row-major over the declared
axis order, and every module relies on that convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

SUM_TOL = 1e-9
SUPPORT_TOL = 1e-12


class InvalidDistribution(ValueError):
    """A probability vector or channel row that is not on the simplex."""


def _validate_simplex(probs: np.ndarray, what: str, axis=None) -> None:
    lo = probs.min()
    if not np.isfinite(probs.sum()):
        raise InvalidDistribution(f"{what}: non-finite entry")
    if lo < 0:
        raise InvalidDistribution(f"{what}: negative entry {lo:g}")
    dev = np.abs(np.atleast_1d(probs.sum(axis=axis)) - 1.0)
    if dev.max() > SUM_TOL:
        bad = np.atleast_1d(probs.sum(axis=axis))[int(dev.argmax())]
        raise InvalidDistribution(f"{what}: sums to {bad!r}, expected 1")


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dist:
    """Distribution over symbols ``0..alphabet_size-1``."""

    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen(self.probs)
        if probs.ndim != 1 or probs.size == 0:
            raise InvalidDistribution("Dist needs a non-empty 1-d probability vector")
        _validate_simplex(probs, "Dist")
        object.__setattr__(self, "probs", probs)

    @property
    def alphabet_size(self) -> int:
        return self.probs.size

    def support(self, tol: float = SUPPORT_TOL) -> np.ndarray:
        return np.flatnonzero(self.probs > tol)

    @classmethod
    def uniform(cls, size: int) -> "Dist":
        return cls(np.full(size, 1.0 / size))

    @classmethod
    def point(cls, size: int, symbol: int) -> "Dist":
        p = np.zeros(size)
        p[symbol] = 1.0
        return cls(p)

    def __eq__(self, other):
        return isinstance(other, Dist) and np.array_equal(self.probs, other.probs)

    def __repr__(self):
        return f"Dist({np.array2string(self.probs, precision=6)})"


@dataclass(frozen=True, eq=False)
class JointDist:
    """Joint distribution stored as an array whose shape is the axis sizes."""

    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen(self.probs)
        if probs.ndim == 0 or probs.size == 0:
            raise InvalidDistribution("JointDist needs at least one non-empty axis")
        _validate_simplex(probs, "JointDist")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_flat(cls, flat, axis_sizes: Sequence[int]) -> "JointDist":
        return cls(np.asarray(flat, dtype=float).reshape(tuple(axis_sizes)))

    @property
    def axis_sizes(self) -> tuple[int, ...]:
        return self.probs.shape

    @property
    def flat(self) -> np.ndarray:
        return self.probs.ravel()

    def marginal(self, axis: int) -> Dist:
        others = tuple(i for i in range(self.probs.ndim) if i != axis)
        return Dist(self.probs.sum(axis=others))

    def flatten(self) -> Dist:
        """Treat the product alphabet as a single alphabet (row-major)."""
        return Dist(self.flat)


@dataclass(frozen=True, eq=False)
class Channel:
    """Transition matrix, row ``i`` is the output law given input ``i``.

    ``input_axes`` records how the input alphabet factorises; a plain channel
    has a single axis.
    """

    matrix: np.ndarray
    input_axes: tuple[int, ...] | None = None

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.size == 0:
            raise InvalidDistribution("Channel matrix must be a non-empty 2-d array")
        _validate_simplex(m, "Channel row", axis=1)
        axes = (m.shape[0],) if self.input_axes is None else tuple(int(a) for a in self.input_axes)
        if int(np.prod(axes)) != m.shape[0]:
            raise ValueError(f"input axes {axes} do not factor {m.shape[0]} rows")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "input_axes", axes)

    @property
    def input_size(self) -> int:
        return self.matrix.shape[0]

    @property
    def output_size(self) -> int:
        return self.matrix.shape[1]

    def row(self, i: int) -> Dist:
        return Dist(self.matrix[i])


def entropy(d: Dist) -> float:
    p = d.probs[d.probs > 0]
    h = float(-(p * np.log2(p)).sum())
    return min(max(h, 0.0), float(np.log2(d.alphabet_size)))


def _h(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def conditional_entropy(joint: JointDist) -> float:
    """H(A | Y) for a two-axis joint laid out as (A, Y)."""
    if len(joint.axis_sizes) != 2:
        raise ValueError(f"conditional_entropy needs a two-axis joint, got {joint.axis_sizes}")
    pay = joint.probs
    h = _h(pay.ravel()) - _h(pay.sum(axis=0))
    return min(max(h, 0.0), _h(pay.sum(axis=1)))


def product(dists: Sequence[Dist]) -> JointDist:
    if not dists:
        raise ValueError("product needs at least one factor")
    out = dists[0].probs
    for d in dists[1:]:
        out = np.multiply.outer(out, d.probs)
    return JointDist(out)


def mixture(dists: Sequence[Dist], weights: Dist) -> Dist:
    if len(dists) != weights.alphabet_size:
        raise ValueError(f"{len(dists)} components but {weights.alphabet_size} weights")
    sizes = {d.alphabet_size for d in dists}
    if len(sizes) != 1:
        raise ValueError(f"alphabet mismatch in mixture: sizes {sorted(sizes)}")
    stacked = np.stack([d.probs for d in dists])
    return Dist(weights.probs @ stacked)


def fix_component(ch: Channel, k: int, x_k: int) -> Channel:
    """Channel over the remaining components with component ``k`` held at ``x_k``.

    Rows of the result are row-major over the remaining axes in ascending
    component order.
    """
    axes = ch.input_axes
    if not 0 <= k < len(axes):
        raise IndexError(f"component {k} out of range for {len(axes)} components")
    if not 0 <= x_k < axes[k]:
        raise IndexError(f"symbol {x_k} out of range for component {k} of size {axes[k]}")
    block = ch.matrix.reshape(axes + (ch.output_size,))
    sub = np.take(block, x_k, axis=k)
    rest = axes[:k] + axes[k + 1:]
    return Channel(sub.reshape(-1, ch.output_size), input_axes=rest or (1,))


def joint_from_channel(p: Dist, ch: Channel) -> JointDist:
    if p.alphabet_size != ch.input_size:
        raise ValueError(f"input law has {p.alphabet_size} symbols, channel expects {ch.input_size}")
    return JointDist(p.probs[:, None] * ch.matrix)


def side_entropy(p_minus_k: Dist, ch_fixed: Channel) -> float:
    """H(x_{-k} | y) when x_{-k} ~ p_minus_k and y is drawn through ch_fixed."""
    return conditional_entropy(joint_from_channel(p_minus_k, ch_fixed))
