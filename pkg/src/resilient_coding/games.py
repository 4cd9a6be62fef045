"""Two-player strategic-form games observed through a noisy signal, and the
utility region reachable when the action stream must fit a capacity C0."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .probability import Channel, Dist, product
from .rate import SourceModel, resilient_rate


@dataclass(frozen=True, eq=False)
class Game:
    """``utilities[a1, a2]`` is the payoff vector (u1, u2) of the joint action."""

    name: str
    actions: tuple[tuple[str, ...], ...]
    utilities: np.ndarray

    def __post_init__(self):
        u = np.array(self.utilities, dtype=float)
        sizes = tuple(len(a) for a in self.actions)
        if len(sizes) != 2:
            raise ValueError("only two-player games are supported")
        if u.shape != sizes + (2,):
            raise ValueError(f"utility table has shape {u.shape}, expected {sizes + (2,)}")
        u.setflags(write=False)
        object.__setattr__(self, "actions", tuple(tuple(a) for a in self.actions))
        object.__setattr__(self, "utilities", u)

    @property
    def action_sizes(self) -> tuple[int, int]:
        return tuple(len(a) for a in self.actions)

    def payoff(self, a1: str, a2: str) -> tuple[float, float]:
        i, j = self.actions[0].index(a1), self.actions[1].index(a2)
        return tuple(float(v) for v in self.utilities[i, j])


_BUILTIN = {
    "prisoners_dilemma": [[(3, 3), (0, 4)], [(4, 0), (1, 1)]],
    "battle_of_sexes": [[(0, 0), (2, 1)], [(1, 2), (0, 0)]],
}
ALIASES = {"pd": "prisoners_dilemma", "bos": "battle_of_sexes"}


def builtin_game(name: str) -> Game:
    key = ALIASES.get(name, name)
    if key not in _BUILTIN:
        raise KeyError(f"unknown game {name!r}; choose from {sorted(_BUILTIN) + sorted(ALIASES)}")
    return Game(key, (("T", "B"), ("L", "R")), np.array(_BUILTIN[key], dtype=float))


def observation_channel(epsilon: float, size: int = 4, input_axes=(2, 2)) -> Channel:
    """Noisy signal of the joint action.

    The correct signal has probability 1 - (size-1)/size * epsilon and each
    other signal epsilon/size; with four signals that is 1 - 3eps/4 and eps/4.
    Signal i corresponds to joint action i in row-major order.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    m = np.full((size, size), epsilon / size)
    np.fill_diagonal(m, 1.0 - (size - 1) / size * epsilon)
    return Channel(m, input_axes)


def expected_utility(game: Game, strategies) -> np.ndarray:
    if len(strategies) != 2:
        raise ValueError("need one mixed strategy per player")
    for s, n in zip(strategies, game.action_sizes):
        if s.alphabet_size != n:
            raise ValueError(f"strategy over {s.alphabet_size} actions, player has {n}")
    joint = product(list(strategies)).probs
    return np.einsum("ij,ijk->k", joint, game.utilities)


@dataclass(frozen=True)
class RegionPoint:
    p: float
    q: float
    u1: float
    u2: float
    rate_star: float
    achievable: bool


def grid_values(step: float) -> list[float]:
    if not 0.0 < step <= 1.0:
        raise ValueError(f"grid step must lie in (0, 1], got {step}")
    m = int(round(1.0 / step))
    if abs(m * step - 1.0) > 1e-9:
        raise ValueError(f"grid step {step} does not divide [0, 1] evenly")
    return [round(i / m, 12) for i in range(m + 1)]


def region_point(game: Game, p: float, q: float, ch: Channel, capacity: float,
                 support_tol: float = 1e-12) -> RegionPoint:
    """p = P(first action of player 1), q = P(first action of player 2)."""
    s1, s2 = Dist([p, 1.0 - p]), Dist([q, 1.0 - q])
    model = SourceModel((s1, s2), game.actions)
    r = resilient_rate(model, ch, support_tol).rate_star
    u1, u2 = expected_utility(game, (s1, s2))
    return RegionPoint(p, q, float(u1), float(u2), r, r < capacity)


def sweep_region(game: Game, capacity: float, epsilon: float, grid_step: float = 0.01,
                 support_tol: float = 1e-12) -> list[RegionPoint]:
    if game.action_sizes != (2, 2):
        raise ValueError("the region sweep parameterises 2x2 games only")
    ch = observation_channel(epsilon)
    vals = grid_values(grid_step)
    return [region_point(game, p, q, ch, capacity, support_tol) for p in vals for q in vals]


REGION_HEADER = ["p", "q", "u1", "u2", "rate_star", "achievable"]


def region_to_csv(points) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REGION_HEADER)
    for pt in points:
        w.writerow([repr(pt.p), repr(pt.q), repr(pt.u1), repr(pt.u2),
                    f"{pt.rate_star:.6f}", int(pt.achievable)])
    return buf.getvalue()


def region_from_csv(text: str) -> list[RegionPoint]:
    rows = csv.DictReader(io.StringIO(text))
    if rows.fieldnames != REGION_HEADER:
        raise ValueError(f"unexpected region header {rows.fieldnames}")
    return [RegionPoint(float(r["p"]), float(r["q"]), float(r["u1"]), float(r["u2"]),
                        float(r["rate_star"]), r["achievable"] == "1") for r in rows]
