"""Command-line entry point: ``resilient-coding {rate,graph,region,simulate,ahlswede}``.

Components are numbered from 1 on the command line. Exit codes: 0 success,
2 parse or flag error, 3 model or dimension error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import ahlswede as ah
from .coding import SimConfig, parse_adversary, sim_to_csv, simulate
from .games import ALIASES, builtin_game, region_to_csv, sweep_region
from .graphs import chromatic_number, build_deviation_graph, to_edge_list
from .probability import InvalidDistribution
from .rate import resilient_rate
from .specfile import BUNDLED_SPECS, ModelError, SpecError, load_family, load_spec

EXIT_OK, EXIT_USAGE, EXIT_MODEL = 0, 2, 3


class UsageError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _channel(spec, epsilon):
    if epsilon is not None and not 0.0 <= epsilon <= 1.0:
        raise UsageError(f"--epsilon must lie in [0, 1], got {epsilon}")
    try:
        return spec.channel(epsilon)
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_rate(args) -> int:
    spec = load_spec(args.spec)
    ch = _channel(spec, args.epsilon)
    report = resilient_rate(spec.model, ch, args.support_tol)
    labels = spec.model.labels
    print(f"{'component':<10}{'worst_symbol':<14}{'side_entropy_bits':>18}{'log_chi_bits':>14}"
          f"{'component_rate':>16}")
    for c in report.per_component:
        print(f"{c.k + 1:<10}{labels[c.k][c.worst_symbol]:<14}{c.side_entropy_bits:>18.6f}"
              f"{c.log_chi_bits:>14.6f}{c.component_rate:>16.6f}")
    print(f"rate_star {report.rate_star:.6f}")
    print(f"argmax_component {report.argmax_component + 1}")
    if args.out:
        Path(args.out).write_text(report.to_json(labels))
    return EXIT_OK


def cmd_graph(args) -> int:
    spec = load_spec(args.spec)
    ch = _channel(spec, args.epsilon)
    model = spec.model
    ks = range(model.K) if args.component is None else [args.component - 1]
    chunks = []
    for k in ks:
        if not 0 <= k < model.K:
            raise UsageError(f"--component must lie in 1..{model.K}")
        g = build_deviation_graph(model, ch, k, args.support_tol)
        chi, witness = chromatic_number(g)
        coloring = " ".join(f"{model.labels[k][v]}={c}" for v, c in enumerate(witness.colors))
        chunks.append(f"# component {k + 1} ({spec.component_names[k]})\n"
                      f"{to_edge_list(g, model.labels[k])}"
                      f"# chromatic_number {chi}\n# coloring {coloring}\n")
    _emit("".join(chunks), args.out)
    return EXIT_OK


def cmd_region(args) -> int:
    name = ALIASES.get(args.game, args.game)
    if name in ("prisoners_dilemma", "battle_of_sexes"):
        game = builtin_game(name)
        defaults = load_spec(name)
    else:
        defaults = load_spec(args.game)
        if defaults.game is None:
            raise UsageError(f"{args.game} has no game section")
        game = defaults.game
    eps = defaults.epsilon(args.epsilon)
    cap = defaults.capacity(args.capacity)
    if not 0.0 <= eps <= 1.0:
        raise UsageError(f"--epsilon must lie in [0, 1], got {eps}")
    try:
        points = sweep_region(game, cap, eps, args.grid, args.support_tol)
    except ValueError as e:
        raise UsageError(str(e)) from None
    _emit(region_to_csv(points), args.out)
    hits = sum(p.achievable for p in points)
    print(f"achievable {hits} / {len(points)} (capacity {cap}, epsilon {eps}, grid {args.grid})",
          file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = load_spec(args.spec)
    ch = _channel(spec, args.epsilon)
    try:
        cfg = SimConfig(n=args.n, trials=args.trials, seed=args.seed, rate_margin_bits=args.margin,
                        typicality_eta=args.eta, rare_threshold=args.rare_threshold,
                        color_budget=args.color_budget, decision=args.decision,
                        support_tol=args.support_tol)
        advs = []
        for text in args.adversary or ["all"]:
            advs.extend(parse_adversary(text, spec.model, args.n))
    except (ValueError, KeyError) as e:
        raise UsageError(str(e).strip("'\"")) from None
    results = []
    for i, a in enumerate(advs):
        results.append(simulate(spec.model, ch, cfg, a, transcript=bool(args.transcript) and i == 0))
    _emit(sim_to_csv(results), args.out)
    if args.transcript:
        Path(args.transcript).write_text(json.dumps(results[0].transcript) + "\n")
    return EXIT_OK


def cmd_ahlswede(args) -> int:
    fam = load_family(args.family)
    b = ah.ahlswede_bounds(fam, seed=args.seed)
    flags, ok = ah.check_entropy_positiveness(fam)
    lines = [
        f"sup_H_x_given_y {b.sup_H_x_given_y:.6f}",
        f"sup_H_y_given_x {b.sup_H_y_given_x:.6f}",
        f"sup_H_xy {b.sup_H_xy:.6f}",
        "entropy_positiveness " + " ".join(str(int(f)) for f in flags),
        f"entropy_positiveness_all {int(ok)}",
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="resilient-coding", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def shared(p, spec=True):
        if spec:
            p.add_argument("spec", help=f"model file, or one of: {', '.join(sorted(BUNDLED_SPECS))}")
        p.add_argument("--epsilon", type=float, default=None, help="observation channel noise in [0, 1]")
        p.add_argument("--support-tol", type=float, default=1e-12)
        p.add_argument("--out", default=None, help="write the main output here instead of stdout")

    p = sub.add_parser("rate", help="per-component rate terms and the resilient rate")
    shared(p)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("graph", help="deviation graph edge list, chromatic number, coloring")
    shared(p)
    p.add_argument("--component", type=int, default=None, help="1-based component (default: all)")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("region", help="achievable utility region under a capacity constraint")
    shared(p, spec=False)
    p.add_argument("--game", default="pd", help="pd, bos, or a model file with a game section")
    p.add_argument("--capacity", type=float, default=None)
    p.add_argument("--grid", type=float, default=0.01)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("simulate", help="Monte Carlo block error of the coloring/binning scheme")
    shared(p)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--margin", type=float, default=None, help="bin slack in bits per symbol")
    p.add_argument("--eta", type=float, default=None, help="typicality threshold")
    p.add_argument("--rare-threshold", type=int, default=None)
    p.add_argument("--color-budget", type=int, default=None)
    p.add_argument("--decision", choices=["ml", "unique"], default="ml")
    p.add_argument("--adversary", action="append",
                   help="none | all | constant:J:SYM | iid:J:p1,p2,... (repeatable; default all)")
    p.add_argument("--transcript", default=None, help="dump the first trial of the first adversary")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ahlswede", help="finite-state rate-region bounds and positiveness check")
    p.add_argument("family", help="state family file, or the bundled name two_state")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ahlswede)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, UsageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelError, InvalidDistribution) as e:
        print(f"model error: {e}", file=sys.stderr)
        return EXIT_MODEL
    except ValueError as e:
        print(f"model error: {e}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
