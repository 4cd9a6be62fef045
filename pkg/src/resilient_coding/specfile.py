"""YAML model and state-family files.

A model file::

    name: prisoners_dilemma
    components:
      - name: player1
        symbols: [T, B]
        probs: [0.5, 0.5]
      - ...
    channel:
      kind: observation          # generated noisy-signal channel, uses epsilon
      # kind: matrix
      # signals: [s1, s2]
      # rows: [[...], ...]       # one row per joint symbol, row-major
    game:                        # optional, two components only
      utilities: [[[3, 3], [0, 4]], [[4, 0], [1, 1]]]
    defaults:                    # optional
      epsilon: 0.5
      capacity: 1.7

A state-family file lists joint laws over (x, y)::

    states:
      - [[0.4, 0.1], [0.1, 0.4]]
      - [[0.25, 0.25], [0.0, 0.5]]
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .ahlswede import StateFamily
from .games import Game, observation_channel
from .probability import Channel, Dist, InvalidDistribution, JointDist
from .rate import SourceModel

BUNDLED_SPECS = {
    "pd": "prisoners_dilemma.yaml",
    "prisoners_dilemma": "prisoners_dilemma.yaml",
    "bos": "battle_of_sexes.yaml",
    "battle_of_sexes": "battle_of_sexes.yaml",
}
BUNDLED_FAMILIES = {"two_state": "two_state_family.yaml"}
DEFAULT_EPSILON = 0.5
DEFAULT_CAPACITY = 1.7


class SpecError(Exception):
    """Malformed file: bad syntax or a missing or mistyped field."""

    def __init__(self, message: str, line: int | None = None, source: str = ""):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else (f"{source}: " if source else "")
        super().__init__(where + message)


class ModelError(Exception):
    """Well-formed file whose numbers do not describe a valid model."""


class _LineDict(dict):
    line: int = 0
    key_lines: dict


class _LineList(list):
    line: int = 0


class _Loader(yaml.SafeLoader):
    pass


def _mapping(loader, node):
    d = _LineDict(loader.construct_mapping(node, deep=True))
    d.line = node.start_mark.line + 1
    d.key_lines = {loader.construct_object(k, deep=True): k.start_mark.line + 1 for k, _ in node.value}
    return d


def _sequence(loader, node):
    s = _LineList(loader.construct_sequence(node, deep=True))
    s.line = node.start_mark.line + 1
    return s


_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _mapping)
_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_SEQUENCE_TAG, _sequence)


def _parse(text: str, source: str):
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.MarkedYAMLError as e:
        line = e.problem_mark.line + 1 if e.problem_mark else None
        raise SpecError(str(e.problem or e), line, source) from None
    except yaml.YAMLError as e:
        raise SpecError(str(e), None, source) from None
    if not isinstance(doc, dict):
        raise SpecError("top level must be a mapping", 1, source)
    return doc


def _line_of(node, key=None) -> int | None:
    if key is not None and isinstance(node, _LineDict):
        return node.key_lines.get(key, node.line)
    return getattr(node, "line", None)


def _require(node: dict, key: str, kind, source: str, what: str):
    if key not in node:
        raise SpecError(f"{what}: missing '{key}'", _line_of(node), source)
    value = node[key]
    if not isinstance(value, kind):
        raise SpecError(f"{what}: '{key}' must be {getattr(kind, '__name__', kind)}",
                        _line_of(node, key), source)
    return value


def _numbers(value, source, line, what) -> list[float]:
    if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                              for v in value):
        raise SpecError(f"{what} must be a list of numbers", line, source)
    return [float(v) for v in value]


@dataclass
class ModelSpec:
    name: str
    model: SourceModel
    channel_kind: str
    component_names: tuple[str, ...]
    matrix: np.ndarray | None = None
    signals: tuple[str, ...] | None = None
    game: Game | None = None
    defaults: dict = field(default_factory=dict)

    def epsilon(self, override: float | None = None) -> float:
        if override is not None:
            return override
        return float(self.defaults.get("epsilon", DEFAULT_EPSILON))

    def capacity(self, override: float | None = None) -> float:
        if override is not None:
            return override
        return float(self.defaults.get("capacity", DEFAULT_CAPACITY))

    def channel(self, epsilon: float | None = None) -> Channel:
        if self.channel_kind == "observation":
            size = int(np.prod(self.model.alphabets))
            return observation_channel(self.epsilon(epsilon), size, self.model.alphabets)
        if epsilon is not None:
            raise ValueError("epsilon only applies to generated observation channels")
        return Channel(self.matrix, self.model.alphabets)


def parse_spec(text: str, source: str = "<spec>") -> ModelSpec:
    doc = _parse(text, source)
    name = str(doc.get("name", Path(source).stem))
    comps = _require(doc, "components", list, source, "model")
    if not comps:
        raise SpecError("model: 'components' is empty", _line_of(doc, "components"), source)
    dists, labels, names = [], [], []
    for i, c in enumerate(comps, 1):
        what = f"component {i}"
        if not isinstance(c, dict):
            raise SpecError(f"{what} must be a mapping", _line_of(comps), source)
        symbols = _require(c, "symbols", list, source, what)
        probs = _numbers(_require(c, "probs", list, source, what), source, _line_of(c, "probs"),
                         f"{what} probs")
        if len(symbols) != len(probs):
            raise ModelError(f"{source}:{_line_of(c, 'probs')}: {what} has {len(symbols)} symbols "
                             f"but {len(probs)} probabilities")
        try:
            dists.append(Dist(probs))
        except InvalidDistribution as e:
            raise ModelError(f"{source}:{_line_of(c, 'probs')}: {what}: {e}") from None
        labels.append(tuple(str(s) for s in symbols))
        names.append(str(c.get("name", f"component{i}")))
    model = SourceModel(tuple(dists), tuple(labels))

    ch = _require(doc, "channel", dict, source, "model")
    kind = _require(ch, "kind", str, source, "channel")
    matrix = signals = None
    if kind == "matrix":
        rows = _require(ch, "rows", list, source, "channel")
        mat = [_numbers(r, source, _line_of(r) or _line_of(ch, "rows"), "channel row") for r in rows]
        widths = {len(r) for r in mat}
        size = int(np.prod(model.alphabets))
        if len(mat) != size or len(widths) != 1:
            raise ModelError(f"{source}:{_line_of(ch, 'rows')}: channel needs {size} rows of equal "
                             f"length (one per joint symbol), got {len(mat)} rows")
        matrix = np.array(mat)
        try:
            Channel(matrix, model.alphabets)
        except (InvalidDistribution, ValueError) as e:
            raise ModelError(f"{source}:{_line_of(ch, 'rows')}: {e}") from None
        sig = ch.get("signals")
        signals = tuple(str(s) for s in sig) if sig else tuple(f"y{i}" for i in range(matrix.shape[1]))
        if len(signals) != matrix.shape[1]:
            raise ModelError(f"{source}:{_line_of(ch, 'signals')}: {len(signals)} signal labels "
                             f"for {matrix.shape[1]} columns")
    elif kind != "observation":
        raise SpecError(f"channel kind must be 'observation' or 'matrix', got {kind!r}",
                        _line_of(ch, "kind"), source)

    game = None
    if "game" in doc:
        g = doc["game"]
        if not isinstance(g, dict):
            raise SpecError("game must be a mapping", _line_of(doc, "game"), source)
        util = _require(g, "utilities", list, source, "game")
        try:
            game = Game(name, tuple(labels), np.array(util, dtype=float))
        except (ValueError, TypeError) as e:
            raise ModelError(f"{source}:{_line_of(g, 'utilities')}: {e}") from None

    defaults = doc.get("defaults", {}) or {}
    if not isinstance(defaults, dict):
        raise SpecError("defaults must be a mapping", _line_of(doc, "defaults"), source)
    for key, value in defaults.items():
        if key not in ("epsilon", "capacity") or not isinstance(value, (int, float)):
            raise SpecError(f"defaults: unknown or non-numeric entry {key!r}",
                            _line_of(defaults, key), source)
    return ModelSpec(name, model, kind, tuple(names), matrix, signals, game, dict(defaults))


def parse_family(text: str, source: str = "<family>") -> StateFamily:
    doc = _parse(text, source)
    states = _require(doc, "states", list, source, "family")
    if not states:
        raise SpecError("family: 'states' is empty", _line_of(doc, "states"), source)
    arrays = []
    for i, s in enumerate(states, 1):
        line = _line_of(s) or _line_of(doc, "states")
        if not isinstance(s, list) or not s:
            raise SpecError(f"state {i} must be a matrix", line, source)
        arrays.append([_numbers(r, source, _line_of(r) or line, f"state {i} row") for r in s])
    try:
        return StateFamily(tuple(JointDist(np.array(a, dtype=float)) for a in arrays))
    except (InvalidDistribution, ValueError) as e:
        raise ModelError(f"{source}: {e}") from None


def _read(name: str, bundled: dict[str, str]) -> tuple[str, str]:
    path = Path(name)
    if path.exists():
        return path.read_text(), str(path)
    if name in bundled:
        res = resources.files("resilient_coding") / "data" / bundled[name]
        return res.read_text(), f"<bundled:{bundled[name]}>"
    raise SpecError(f"no such file {name!r} (bundled names: {', '.join(sorted(bundled))})")


def load_spec(name: str) -> ModelSpec:
    text, source = _read(name, BUNDLED_SPECS)
    return parse_spec(text, source)


def load_family(name: str) -> StateFamily:
    text, source = _read(name, BUNDLED_FAMILIES)
    return parse_family(text, source)
