"""Block coding scheme robust to one deviating component, at desk scale.

The encoder

1. picks the component k whose empirical law is furthest (total variation)
   from its nominal law,
2. sends the colors of x_k^n under a minimum coloring of the deviation graph,
3. for every symbol a of component k, describes the x_{-k} values seen at the
   positions where x_k = a: a random-bin index sized to H(x_{-k}|y_a) plus a
   slack when the symbol is frequent, the raw values when it is rare.

The decoder recovers x_k^n from colors and side information, then searches
each bin exhaustively. Binning uses a seeded hash shared by both ends, so no
codebook is stored. Exhaustive search limits blocks to roughly n <= 20 for
binary alphabets.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graphs import DeviationGraph, build_deviation_graph, chromatic_number
from .probability import SUPPORT_TOL, Channel, Dist, fix_component
from .rate import SourceModel, component_side_entropies, resilient_rate

DECISIONS = ("ml", "unique")
_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


@dataclass(frozen=True)
class SimConfig:
    """Knobs of the scheme and of the Monte Carlo run.

    ``None`` fields resolve to defaults that depend on n or on the chosen
    component: eta = n^(-1/3), bin slack = 2 eta, rare threshold =
    ceil(n / (2 |X_k|)).
    """

    n: int
    trials: int = 200
    seed: int = 42
    rate_margin_bits: float | None = None
    typicality_eta: float | None = None
    rare_threshold: int | None = None
    color_budget: int | None = None
    decision: str = "ml"
    support_tol: float = SUPPORT_TOL
    max_candidates: int = 1 << 22

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("block length n must be at least 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.typicality_eta is not None and self.typicality_eta <= 0:
            raise ValueError("typicality_eta must be positive")
        if self.rare_threshold is not None and self.rare_threshold < 1:
            raise ValueError("rare_threshold must be a positive integer")
        if self.color_budget is not None and self.color_budget < 1:
            raise ValueError("color_budget must be a positive integer")
        if self.decision not in DECISIONS:
            raise ValueError(f"decision must be one of {DECISIONS}")

    @property
    def eta(self) -> float:
        return self.typicality_eta if self.typicality_eta is not None else self.n ** (-1.0 / 3.0)

    @property
    def slack(self) -> float:
        return self.rate_margin_bits if self.rate_margin_bits is not None else 2.0 * self.eta

    def rare_threshold_for(self, alphabet_size: int) -> int:
        if self.rare_threshold is not None:
            return self.rare_threshold
        return max(1, math.ceil(self.n / (2 * alphabet_size)))


@dataclass(frozen=True)
class Adversary:
    """At most one component deviates: held constant, or drawn from per-stage laws."""

    kind: str = "none"
    component: int | None = None
    symbol: int | None = None
    stages: tuple[Dist, ...] | None = None

    @classmethod
    def none(cls) -> "Adversary":
        return cls()

    @classmethod
    def constant(cls, component: int, symbol: int) -> "Adversary":
        return cls("constant", component, symbol)

    @classmethod
    def per_stage(cls, component: int, stages: Sequence[Dist]) -> "Adversary":
        return cls("stages", component, None, tuple(stages))

    def __post_init__(self):
        if self.kind not in ("none", "constant", "stages"):
            raise ValueError(f"unknown adversary kind {self.kind!r}")
        if self.kind != "none" and self.component is None:
            raise ValueError("a deviating adversary must name its component")

    def label(self, model: SourceModel) -> str:
        if self.kind == "none":
            return "none"
        j = self.component
        if self.kind == "constant":
            return f"constant:{j + 1}:{model.labels[j][self.symbol]}"
        return f"stages:{j + 1}"


def constant_adversaries(model: SourceModel) -> list[Adversary]:
    return [Adversary.constant(j, a) for j in range(model.K) for a in range(model.alphabets[j])]


def parse_adversary(text: str, model: SourceModel, n: int | None = None) -> list[Adversary]:
    """``none``, ``all``, ``constant:J:SYM`` or ``iid:J:p1,p2,...`` (J is 1-based)."""
    text = text.strip()
    if text == "none":
        return [Adversary.none()]
    if text == "all":
        return [Adversary.none()] + constant_adversaries(model)
    parts = text.split(":")
    if len(parts) != 3 or parts[0] not in ("constant", "iid"):
        raise ValueError(f"cannot parse adversary {text!r}")
    try:
        j = int(parts[1]) - 1
    except ValueError:
        raise ValueError(f"adversary component must be an integer, got {parts[1]!r}") from None
    if not 0 <= j < model.K:
        raise ValueError(f"adversary component {j + 1} outside 1..{model.K}")
    if parts[0] == "constant":
        return [Adversary.constant(j, model.symbol_index(j, parts[2]))]
    if n is None:
        raise ValueError("an iid adversary needs the block length")
    q = Dist([float(v) for v in parts[2].split(",")])
    if q.alphabet_size != model.alphabets[j]:
        raise ValueError(f"iid law has {q.alphabet_size} entries, component {j + 1} has {model.alphabets[j]}")
    return [Adversary.per_stage(j, [q] * n)]


@dataclass(frozen=True)
class ClassPayload:
    """Description of the x_{-k} values at the positions where x_k = symbol."""

    symbol: int
    count: int
    mode: str  # "bin", "raw" or "empty"
    bits: int
    bin_index: int | None = None
    raw: tuple[int, ...] | None = None


@dataclass(frozen=True)
class Message:
    k: int
    colors: tuple[int, ...]
    header_bits: int
    color_bits: int
    payloads: tuple[ClassPayload, ...]

    @property
    def bit_length(self) -> int:
        return self.header_bits + len(self.colors) * self.color_bits + sum(p.bits for p in self.payloads)

    def payload_for(self, symbol: int) -> ClassPayload | None:
        for p in self.payloads:
            if p.symbol == symbol:
                return p
        return None


@dataclass(frozen=True)
class DecodeResult:
    x: np.ndarray | None
    reason: str = ""
    contested: int = 0

    @property
    def ok(self) -> bool:
        return self.x is not None


def _splitmix64(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z + np.uint64(0x9E3779B97F4A7C15)) & _MASK64
        z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _MASK64
        z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _MASK64
        return z ^ (z >> np.uint64(31))


def _bin_key(seed: int, k: int, symbol: int, count: int) -> np.uint64:
    z = np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    for part in (k, symbol, count):
        z = _splitmix64(z ^ np.uint64(part))
    return z[0]


def bin_of(indices: np.ndarray, key: np.uint64, bits: int) -> np.ndarray:
    """Bin of each candidate sequence, given its mixed-radix integer index."""
    h = _splitmix64(np.asarray(indices, dtype=np.uint64) ^ key)
    if bits >= 64:
        return h
    return h >> np.uint64(64 - bits) if bits > 0 else np.zeros_like(h)


def _seq_index(seq: np.ndarray, base: int) -> int:
    idx = 0
    for v in seq[::-1]:
        idx = idx * base + int(v)
    return idx


def _digits(indices: np.ndarray, base: int, length: int) -> np.ndarray:
    out = np.empty((indices.size, length), dtype=np.int64)
    rem = indices.astype(np.int64)
    for t in range(length):
        out[:, t] = rem % base
        rem //= base
    return out


def type_noise_floor(cells: int, count: int) -> float:
    """Upper bound on the expected TV distance between an empirical type of
    ``count`` samples over ``cells`` cells and its law."""
    return 0.5 * math.sqrt(max(cells - 1, 0) / count)


@dataclass
class _ComponentCode:
    graph: DeviationGraph
    chi: int
    colors: np.ndarray
    side_entropy: np.ndarray
    p_rest: np.ndarray
    rest_channels: list[np.ndarray]
    compatible: np.ndarray


class ResilientCode:
    """Encoder and decoder sharing the colorings, entropies and bin keys."""

    def __init__(self, model: SourceModel, ch: Channel, cfg: SimConfig):
        if ch.input_size != int(np.prod(model.alphabets)):
            raise ValueError(f"channel has {ch.input_size} inputs, model has "
                             f"{int(np.prod(model.alphabets))} joint symbols")
        ch = Channel(ch.matrix, model.alphabets)
        self.model, self.ch, self.cfg = model, ch, cfg
        tol = cfg.support_tol
        self.components: list[_ComponentCode] = []
        for k in range(model.K):
            g = build_deviation_graph(model, ch, k, tol)
            chi, witness = chromatic_number(g)
            p_rest = model.others(k).probs
            rows = [fix_component(ch, k, a).matrix for a in range(model.alphabets[k])]
            supported = p_rest > tol
            compatible = np.array([(r[supported] > tol).any(axis=0) for r in rows])
            self.components.append(_ComponentCode(
                g, chi, np.array(witness.colors), component_side_entropies(model, ch, k),
                p_rest, rows, compatible))

    # shared bookkeeping ---------------------------------------------------

    def _rest_size(self, k: int) -> int:
        return int(np.prod([s for j, s in enumerate(self.model.alphabets) if j != k]))

    def _color_map(self, k: int) -> tuple[np.ndarray, int]:
        comp = self.components[k]
        budget = self.cfg.color_budget
        if budget is None or budget >= comp.chi:
            return comp.colors, comp.chi
        return comp.colors % budget, budget

    def _rest_indices(self, x: np.ndarray, k: int) -> np.ndarray:
        rest = [j for j in range(self.model.K) if j != k]
        if not rest:
            return np.zeros(len(x), dtype=np.int64)
        dims = [self.model.alphabets[j] for j in rest]
        return np.ravel_multi_index(tuple(x[:, j] for j in rest), dims)

    def _class_plan(self, k: int, symbol: int, count: int) -> tuple[str, int]:
        base = self._rest_size(k)
        if base == 1:
            return "empty", 0
        if count >= self.cfg.rare_threshold_for(self.model.alphabets[k]):
            h = self.components[k].side_entropy[symbol]
            return "bin", math.ceil(count * (h + self.cfg.slack) - 1e-9)
        return "raw", count * math.ceil(math.log2(base))

    def select_component(self, x: np.ndarray) -> int:
        n = len(x)
        tv = []
        for j, d in enumerate(self.model.nominal):
            emp = np.bincount(x[:, j], minlength=d.alphabet_size) / n
            tv.append(0.5 * np.abs(emp - d.probs).sum())
        tv = np.array(tv)
        return int(np.flatnonzero(tv >= tv.max() - 1e-12)[0])

    # encoder --------------------------------------------------------------

    def encode(self, x: np.ndarray) -> Message:
        x = np.asarray(x, dtype=np.int64)
        if x.ndim != 2 or x.shape[1] != self.model.K:
            raise ValueError(f"expected an (n, {self.model.K}) symbol array, got shape {x.shape}")
        for j, s in enumerate(self.model.alphabets):
            if x[:, j].min() < 0 or x[:, j].max() >= s:
                raise ValueError(f"component {j + 1} symbol outside 0..{s - 1}")
        k = self.select_component(x)
        cmap, used = self._color_map(k)
        colors = tuple(int(c) for c in cmap[x[:, k]])
        rest = self._rest_indices(x, k)
        base = self._rest_size(k)
        payloads = []
        for a in range(self.model.alphabets[k]):
            pos = np.flatnonzero(x[:, k] == a)
            if pos.size == 0:
                continue
            mode, bits = self._class_plan(k, a, pos.size)
            if mode == "bin":
                if base ** pos.size > self.cfg.max_candidates:
                    raise ValueError(f"bin search over {base}^{pos.size} candidates exceeds "
                                     f"max_candidates={self.cfg.max_candidates}; shorten the block")
                key = _bin_key(self.cfg.seed, k, a, pos.size)
                b = int(bin_of(np.array([_seq_index(rest[pos], base)]), key, bits)[0])
                payloads.append(ClassPayload(a, int(pos.size), mode, bits, bin_index=b))
            elif mode == "raw":
                payloads.append(ClassPayload(a, int(pos.size), mode, bits,
                                             raw=tuple(int(v) for v in rest[pos])))
            else:
                payloads.append(ClassPayload(a, int(pos.size), mode, 0))
        header = math.ceil(math.log2(self.model.K)) if self.model.K > 1 else 0
        color_bits = math.ceil(math.log2(used)) if used > 1 else 0
        return Message(k, colors, header, color_bits, tuple(payloads))

    # decoder --------------------------------------------------------------

    def _decode_component(self, m: Message, y: np.ndarray) -> tuple[np.ndarray | None, str]:
        comp = self.components[m.k]
        cmap, _ = self._color_map(m.k)
        xk = np.empty(len(y), dtype=np.int64)
        for t, (c, s) in enumerate(zip(m.colors, y)):
            cands = np.flatnonzero((cmap == c) & comp.compatible[:, s])
            if cands.size != 1:
                return None, f"stage {t}: {cands.size} symbols match color {c} and signal {s}"
            xk[t] = cands[0]
        return xk, ""

    def _search_bin(self, k: int, symbol: int, payload: ClassPayload,
                    y_sub: np.ndarray) -> tuple[np.ndarray | None, str, bool]:
        comp = self.components[k]
        base = self._rest_size(k)
        count = y_sub.size
        total = base ** count
        if total > self.cfg.max_candidates:
            return None, f"bin search over {total} candidates exceeds max_candidates", False
        key = _bin_key(self.cfg.seed, k, symbol, count)
        idx = np.arange(total, dtype=np.uint64)
        members = idx[bin_of(idx, key, payload.bits) == np.uint64(payload.bin_index)]
        seqs = _digits(members, base, count)
        rows = comp.rest_channels[symbol]
        ref = comp.p_rest[:, None] * rows
        n_sig = rows.shape[1]
        flat = seqs * n_sig + y_sub[None, :]
        emp = np.zeros((len(seqs), base * n_sig))
        np.add.at(emp, (np.repeat(np.arange(len(seqs)), count), flat.ravel()), 1.0)
        tv = 0.5 * np.abs(emp / count - ref.ravel()[None, :]).sum(axis=1)
        threshold = self.cfg.eta + type_noise_floor(base * n_sig, count)
        typical = np.flatnonzero(tv <= threshold + 1e-12)
        if typical.size == 0:
            return None, f"class {symbol}: no jointly typical sequence in bin", False
        contested = typical.size > 1
        if self.cfg.decision == "unique":
            if contested:
                return None, f"class {symbol}: {typical.size} typical sequences in bin", True
            return seqs[typical[0]], "", False
        with np.errstate(divide="ignore"):
            logp = np.log(ref)
        ll = logp[seqs[typical], y_sub[None, :]].sum(axis=1)
        top = np.flatnonzero(ll >= ll.max() - 1e-9)
        if top.size != 1 or not np.isfinite(ll[top[0]]):
            return None, f"class {symbol}: {top.size} equally likely typical sequences", contested
        return seqs[typical[top[0]]], "", contested

    def decode(self, m: Message, y: np.ndarray) -> DecodeResult:
        y = np.asarray(y, dtype=np.int64)
        if len(y) != len(m.colors):
            return DecodeResult(None, "signal length differs from color stream")
        k = m.k
        xk, why = self._decode_component(m, y)
        if xk is None:
            return DecodeResult(None, why)
        rest = np.zeros(len(y), dtype=np.int64)
        contested = 0
        for a in range(self.model.alphabets[k]):
            pos = np.flatnonzero(xk == a)
            if pos.size == 0:
                continue
            mode, bits = self._class_plan(k, a, pos.size)
            p = m.payload_for(a)
            if p is None or p.mode != mode or p.count != pos.size:
                return DecodeResult(None, f"class {a}: payload does not match decoded counts")
            if mode == "raw":
                rest[pos] = p.raw
            elif mode == "bin":
                seq, why, was_contested = self._search_bin(k, a, p, y[pos])
                contested += was_contested
                if seq is None:
                    return DecodeResult(None, why, contested)
                rest[pos] = seq
        others = [j for j in range(self.model.K) if j != k]
        x = np.empty((len(y), self.model.K), dtype=np.int64)
        x[:, k] = xk
        if others:
            dims = [self.model.alphabets[j] for j in others]
            for j, col in zip(others, np.unravel_index(rest, dims)):
                x[:, j] = col
        return DecodeResult(x, "", contested)


def encode(x_seq, model: SourceModel, ch: Channel, cfg: SimConfig) -> Message:
    return ResilientCode(model, ch, cfg).encode(x_seq)


def decode(m: Message, y_seq, model: SourceModel, ch: Channel, cfg: SimConfig) -> DecodeResult:
    return ResilientCode(model, ch, cfg).decode(m, y_seq)


# Monte Carlo ---------------------------------------------------------------


@dataclass(frozen=True)
class SimResult:
    adversary: str
    trials: int
    errors: int
    avg_rate_bits_per_symbol: float
    contested: int = 0
    transcript: dict | None = field(default=None, compare=False, repr=False)

    @property
    def empirical_error(self) -> float:
        return self.errors / self.trials


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def draw_sources(model: SourceModel, n: int, adversary: Adversary,
                 rng: np.random.Generator) -> np.ndarray:
    x = np.empty((n, model.K), dtype=np.int64)
    for j, d in enumerate(model.nominal):
        if adversary.kind != "none" and adversary.component == j:
            if adversary.kind == "constant":
                x[:, j] = adversary.symbol
            else:
                if len(adversary.stages) != n:
                    raise ValueError(f"adversary gives {len(adversary.stages)} stage laws for n={n}")
                cdf = np.cumsum(np.stack([q.probs for q in adversary.stages]), axis=1)
                x[:, j] = np.minimum((rng.random(n)[:, None] >= cdf).sum(axis=1), d.alphabet_size - 1)
        else:
            cdf = np.cumsum(d.probs)
            x[:, j] = np.minimum(np.searchsorted(cdf, rng.random(n), side="right"), d.alphabet_size - 1)
    return x


def draw_signals(ch: Channel, joint_idx: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(ch.matrix[joint_idx], axis=1)
    y = (rng.random(len(joint_idx))[:, None] >= cdf).sum(axis=1)
    return np.minimum(y, ch.output_size - 1)


def simulate(model: SourceModel, ch: Channel, cfg: SimConfig,
             adversary: Adversary | None = None, transcript: bool = False,
             code: ResilientCode | None = None) -> SimResult:
    adversary = adversary or Adversary.none()
    code = code or ResilientCode(model, ch, cfg)
    errors, bits, contested = 0, 0, 0
    record = None
    for i in range(cfg.trials):
        rng = trial_rng(cfg.seed, i)
        x = draw_sources(model, cfg.n, adversary, rng)
        y = draw_signals(code.ch, np.ravel_multi_index(x.T, model.alphabets), rng)
        msg = code.encode(x)
        out = code.decode(msg, y)
        failed = not out.ok or not np.array_equal(out.x, x)
        errors += failed
        bits += msg.bit_length
        contested += out.contested
        if transcript and i == 0:
            record = {
                "x": x.tolist(), "y": y.tolist(), "k": msg.k, "colors": list(msg.colors),
                "payloads": [vars(p) | {"raw": list(p.raw) if p.raw else None} for p in msg.payloads],
                "bit_length": msg.bit_length,
                "decoded": out.x.tolist() if out.ok else None,
                "failed": bool(failed), "reason": out.reason,
            }
    return SimResult(adversary.label(model), cfg.trials, errors, bits / (cfg.trials * cfg.n),
                     contested, record)


def simulate_suite(model: SourceModel, ch: Channel, cfg: SimConfig,
                   adversaries: Sequence[Adversary] | None = None) -> list[SimResult]:
    """Run each adversary; the default set is no deviation plus every constant one."""
    if adversaries is None:
        adversaries = [Adversary.none()] + constant_adversaries(model)
    code = ResilientCode(model, ch, cfg)
    return [simulate(model, ch, cfg, a, code=code) for a in adversaries]


def worst_case(results: Sequence[SimResult]) -> SimResult:
    return max(results, key=lambda r: r.empirical_error)


SIM_HEADER = ["adversary", "trials", "errors", "empirical_error", "avg_rate"]


def sim_to_csv(results: Sequence[SimResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SIM_HEADER)
    for r in results:
        w.writerow([r.adversary, r.trials, r.errors, f"{r.empirical_error:.6f}",
                    f"{r.avg_rate_bits_per_symbol:.6f}"])
    return buf.getvalue()


def sim_from_csv(text: str) -> list[SimResult]:
    rows = csv.DictReader(io.StringIO(text))
    if rows.fieldnames != SIM_HEADER:
        raise ValueError(f"unexpected simulation header {rows.fieldnames}")
    return [SimResult(r["adversary"], int(r["trials"]), int(r["errors"]), float(r["avg_rate"]))
            for r in rows]


def rate_bound(model: SourceModel, ch: Channel, cfg: SimConfig, k: int | None = None) -> float:
    """Upper bound on the measured rate: R* + 3 eta + (log K + nbar |X_k| log |X_-k|) / n,
    maximised over the component the encoder may pick unless ``k`` is given."""
    r = resilient_rate(model, ch, cfg.support_tol).rate_star
    ks = range(model.K) if k is None else [k]
    best = 0.0
    for j in ks:
        size = model.alphabets[j]
        rest = int(np.prod([s for i, s in enumerate(model.alphabets) if i != j]))
        over = (math.ceil(math.log2(model.K)) + cfg.rare_threshold_for(size) * size * math.log2(rest)) / cfg.n
        best = max(best, over)
    return r + 3 * cfg.eta + best
