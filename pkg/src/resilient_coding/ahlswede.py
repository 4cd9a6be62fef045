"""Rate-region bounds for an arbitrarily varying correlated pair over a finite
state set, plus the entropy-positiveness check those bounds require.

Each bound is the supremum over state mixtures of a concave entropy
functional of the mixed joint law. It is maximised by conditional-gradient
(Frank-Wolfe) ascent on the simplex of mixing weights; the Frank-Wolfe gap
is an upper bound on the distance to the optimum and is reported with it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .probability import JointDist, conditional_entropy, entropy

OBJECTIVES = ("x_given_y", "y_given_x", "xy")
POSITIVITY_TOL = 1e-12
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class StateFamily:
    joints: tuple[JointDist, ...]

    def __post_init__(self):
        joints = tuple(self.joints)
        if not joints:
            raise ValueError("a state family needs at least one state")
        shapes = {j.axis_sizes for j in joints}
        if len(shapes) != 1 or len(next(iter(shapes))) != 2:
            raise ValueError(f"states must share one two-axis shape, got {sorted(shapes)}")
        object.__setattr__(self, "joints", joints)

    @classmethod
    def from_arrays(cls, arrays) -> "StateFamily":
        return cls(tuple(JointDist(np.asarray(a, dtype=float)) for a in arrays))

    @property
    def state_count(self) -> int:
        return len(self.joints)

    def stacked(self) -> np.ndarray:
        return np.stack([j.probs for j in self.joints])

    def mix(self, weights) -> JointDist:
        q = np.tensordot(np.asarray(weights, dtype=float), self.stacked(), axes=1)
        return JointDist(q / q.sum())


def _h(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def _objective_value(q: np.ndarray, which: str) -> float:
    hxy = _h(q.ravel())
    if which == "xy":
        return hxy
    if which == "x_given_y":
        return hxy - _h(q.sum(axis=0))
    return hxy - _h(q.sum(axis=1))


def _objective_grad_q(q: np.ndarray, which: str) -> np.ndarray:
    """Derivative of the objective with respect to the cells of the mixed joint."""
    lq = np.log2(np.maximum(q, 1e-300))
    g = -lq - 1.0 / _LN2
    if which == "x_given_y":
        g = g + np.log2(np.maximum(q.sum(axis=0), 1e-300))[None, :] + 1.0 / _LN2
    elif which == "y_given_x":
        g = g + np.log2(np.maximum(q.sum(axis=1), 1e-300))[:, None] + 1.0 / _LN2
    return g


class MixtureObjective:
    """One of H(x|y), H(y|x), H(x,y) as a function of the mixing weights."""

    def __init__(self, family: StateFamily, which: str):
        if which not in OBJECTIVES:
            raise ValueError(f"unknown objective {which!r}; choose from {OBJECTIVES}")
        self.J = family.stacked()
        self.which = which

    def _q(self, w) -> np.ndarray:
        return np.tensordot(w, self.J, axes=1)

    def value(self, w) -> float:
        return _objective_value(self._q(np.asarray(w, dtype=float)), self.which)

    def grad(self, w) -> np.ndarray:
        g = _objective_grad_q(self._q(np.asarray(w, dtype=float)), self.which)
        return np.tensordot(self.J, g, axes=([1, 2], [0, 1]))


@dataclass(frozen=True)
class AscentResult:
    value: float
    weights: np.ndarray
    gap: float
    iterations: int


def _line_search(obj: MixtureObjective, w: np.ndarray, d: np.ndarray, gamma_max: float,
                 steps: int = 50) -> float:
    # the objective is concave along d, so its slope is non-increasing
    if obj.grad(w + gamma_max * d) @ d >= 0:
        return gamma_max
    lo, hi = 0.0, gamma_max
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if obj.grad(w + mid * d) @ d > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def frank_wolfe(obj: MixtureObjective, w0, max_iter: int = 10_000,
                gap_tol: float = 1e-9) -> AscentResult:
    """Maximise a concave function of the mixing weights over the simplex.

    Uses away steps: when moving weight off the worst active vertex is more
    promising than moving toward the best vertex, the step is taken away
    from it. The returned ``gap`` is the usual Frank-Wolfe duality gap.
    """
    w = np.asarray(w0, dtype=float).copy()
    gap = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        g = obj.grad(w)
        toward = int(np.argmax(g))
        gap = float(g[toward] - g @ w)
        if gap <= gap_tol:
            break
        active = np.flatnonzero(w > 0)
        away = int(active[np.argmin(g[active])])
        away_gain = float(g @ w - g[away])
        if gap >= away_gain or w[away] >= 1.0:
            d = -w.copy()
            d[toward] += 1.0
            gamma_max = 1.0
        else:
            d = w.copy()
            d[away] -= 1.0
            gamma_max = w[away] / (1.0 - w[away])
        w = w + _line_search(obj, w, d, gamma_max) * d
        w = np.clip(w, 0.0, None)
        w[w < 1e-15] = 0.0
        w /= w.sum()
    return AscentResult(obj.value(w), w, max(gap, 0.0), it)


def _simplex_grid(S: int, step: float):
    m = int(round(1.0 / step))
    for head in itertools.product(range(m + 1), repeat=S - 1):
        if sum(head) <= m:
            yield np.array(list(head) + [m - sum(head)], dtype=float) / m


def maximize_mixture(family: StateFamily, which: str, restarts: int = 16,
                     max_iter: int = 10_000, seed: int = 0,
                     grid_step: float = 0.05) -> AscentResult:
    obj = MixtureObjective(family, which)
    S = family.state_count
    if S == 1:
        w = np.ones(1)
        return AscentResult(obj.value(w), w, 0.0, 0)
    rng = np.random.default_rng(seed)
    starts = [np.full(S, 1.0 / S)] + [rng.dirichlet(np.ones(S)) for _ in range(restarts - 1)]
    if S <= 3:
        grid_best = max(_simplex_grid(S, grid_step), key=obj.value)
        starts.append(grid_best)
    best = None
    for w0 in starts:
        res = frank_wolfe(obj, w0, max_iter=max_iter)
        if best is None or res.value > best.value:
            best = res
    return best


@dataclass(frozen=True)
class AhlswedeBounds:
    sup_H_x_given_y: float
    sup_H_y_given_x: float
    sup_H_xy: float
    optimizers: dict
    gaps: dict


def ahlswede_bounds(family: StateFamily, restarts: int = 16, max_iter: int = 10_000,
                    seed: int = 0) -> AhlswedeBounds:
    results = {w: maximize_mixture(family, w, restarts, max_iter, seed) for w in OBJECTIVES}
    return AhlswedeBounds(
        results["x_given_y"].value,
        results["y_given_x"].value,
        results["xy"].value,
        {k: r.weights for k, r in results.items()},
        {k: r.gap for k, r in results.items()},
    )


def objective_via_mixture(family: StateFamily, which: str, weights) -> float:
    """Reference evaluation through the generic probability routines."""
    q = family.mix(weights)
    if which == "xy":
        return entropy(q.flatten())
    if which == "x_given_y":
        return conditional_entropy(q)
    return conditional_entropy(JointDist(q.probs.T))


def check_entropy_positiveness(family: StateFamily, tol: float = POSITIVITY_TOL
                               ) -> tuple[list[bool], bool]:
    flags = []
    for j in family.joints:
        hx_y = conditional_entropy(j)
        hy_x = conditional_entropy(JointDist(j.probs.T))
        flags.append(hx_y > tol and hy_x > tol)
    return flags, all(flags)
