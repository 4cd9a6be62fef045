"""Optimal resilient rate for a product source against single-component deviations.

For every component k the rate term is

    max over x_k of H(x_{-k} | y_{x_k})  +  log2 chi_k

and the resilient rate is the largest term over the components.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graphs import Coloring, DeviationGraph, build_deviation_graph, chromatic_number
from .probability import SUPPORT_TOL, Channel, Dist, fix_component, product, side_entropy


@dataclass(frozen=True)
class SourceModel:
    """K independent components with nominal laws P_k.

    ``labels`` are display names for the symbols of each component; they
    default to the symbol indices.
    """

    nominal: tuple[Dist, ...]
    labels: tuple[tuple[str, ...], ...] | None = None

    def __post_init__(self):
        nominal = tuple(self.nominal)
        if not nominal:
            raise ValueError("a source model needs at least one component")
        object.__setattr__(self, "nominal", nominal)
        if self.labels is None:
            labels = tuple(tuple(str(i) for i in range(d.alphabet_size)) for d in nominal)
        else:
            labels = tuple(tuple(str(s) for s in ls) for ls in self.labels)
        if len(labels) != len(nominal) or any(len(l) != d.alphabet_size for l, d in zip(labels, nominal)):
            raise ValueError("symbol labels do not match the component alphabets")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_probs(cls, probs: Sequence[Sequence[float]], labels=None) -> "SourceModel":
        return cls(tuple(Dist(p) for p in probs), labels)

    @property
    def K(self) -> int:
        return len(self.nominal)

    @property
    def alphabets(self) -> tuple[int, ...]:
        return tuple(d.alphabet_size for d in self.nominal)

    def others(self, k: int) -> Dist:
        """P_{-k} as a flat law over the remaining components (row-major)."""
        rest = [d for j, d in enumerate(self.nominal) if j != k]
        if not rest:
            return Dist(np.ones(1))
        return product(rest).flatten()

    def joint(self) -> Dist:
        return product(list(self.nominal)).flatten()

    def symbol_index(self, k: int, label: str) -> int:
        try:
            return self.labels[k].index(str(label))
        except ValueError:
            raise KeyError(f"component {k + 1} has no symbol {label!r}; "
                           f"choices are {list(self.labels[k])}") from None


@dataclass(frozen=True)
class ComponentRate:
    k: int
    worst_symbol: int
    side_entropy_bits: float
    log_chi_bits: float
    component_rate: float


@dataclass(frozen=True)
class RateReport:
    per_component: tuple[ComponentRate, ...]
    rate_star: float
    argmax_component: int
    graphs: tuple[DeviationGraph, ...] = field(default=(), compare=False, repr=False)
    colorings: tuple[Coloring, ...] = field(default=(), compare=False, repr=False)

    def to_dict(self, labels=None) -> dict:
        rows = []
        for c in self.per_component:
            sym = labels[c.k][c.worst_symbol] if labels is not None else c.worst_symbol
            rows.append({
                "k": c.k,
                "worst_symbol": sym,
                "side_entropy_bits": round(c.side_entropy_bits, 6),
                "log_chi_bits": round(c.log_chi_bits, 6),
                "component_rate": round(c.component_rate, 6),
            })
        return {
            "per_component": rows,
            "rate_star": round(self.rate_star, 6),
            "argmax_component": self.argmax_component,
        }

    def to_json(self, labels=None) -> str:
        return json.dumps(self.to_dict(labels), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict, labels=None) -> "RateReport":
        rows = []
        for r in d["per_component"]:
            sym = r["worst_symbol"]
            if labels is not None:
                sym = labels[r["k"]].index(str(sym))
            rows.append(ComponentRate(int(r["k"]), int(sym), float(r["side_entropy_bits"]),
                                      float(r["log_chi_bits"]), float(r["component_rate"])))
        return cls(tuple(rows), float(d["rate_star"]), int(d["argmax_component"]))


TIE_TOL = 1e-12


def _first_max(values) -> int:
    values = np.asarray(values, dtype=float)
    return int(np.flatnonzero(values >= values.max() - TIE_TOL)[0])


def component_side_entropies(model: SourceModel, ch: Channel, k: int) -> np.ndarray:
    """H(x_{-k} | y_{x_k}) for every symbol x_k of the full alphabet."""
    p_rest = model.others(k)
    return np.array([side_entropy(p_rest, fix_component(ch, k, a))
                     for a in range(model.alphabets[k])])


def resilient_rate(model: SourceModel, ch: Channel, support_tol: float = SUPPORT_TOL) -> RateReport:
    if tuple(ch.input_axes) != model.alphabets:
        if ch.input_size != int(np.prod(model.alphabets)):
            raise ValueError(f"channel has {ch.input_size} inputs, model has "
                             f"{int(np.prod(model.alphabets))} joint symbols")
        ch = Channel(ch.matrix, model.alphabets)
    rows, graphs, colorings = [], [], []
    for k in range(model.K):
        g = build_deviation_graph(model, ch, k, support_tol)
        chi, witness = chromatic_number(g)
        h = component_side_entropies(model, ch, k)
        # the adversary may pin x_k to any symbol, supported or not
        worst = _first_max(h)
        log_chi = math.log2(chi)
        rows.append(ComponentRate(k, worst, float(h[worst]), log_chi, float(h[worst]) + log_chi))
        graphs.append(g)
        colorings.append(witness)
    rates = [r.component_rate for r in rows]
    best = _first_max(rates)
    return RateReport(tuple(rows), rates[best], best, tuple(graphs), tuple(colorings))
