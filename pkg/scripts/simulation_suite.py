"""Block error of the coloring/binning scheme across block lengths, bin slack
and decision rules, against no deviation and every constant deviation.

    python3 scripts/simulation_suite.py --ns 8 12 16 --margins 0.25 0.5 1.0 --trials 200
"""

import argparse
import csv
import sys

from resilient_coding.coding import SimConfig, rate_bound, simulate_suite, worst_case
from resilient_coding.specfile import load_spec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--spec", default="pd")
    ap.add_argument("--epsilon", type=float, default=0.5)
    ap.add_argument("--ns", nargs="+", type=int, default=[8, 12, 16])
    ap.add_argument("--margins", nargs="+", type=float, default=[0.25, 0.5, 1.0])
    ap.add_argument("--decisions", nargs="+", default=["ml", "unique"])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    spec = load_spec(args.spec)
    ch = spec.channel(args.epsilon)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "margin", "decision", "adversary", "errors", "empirical_error", "avg_rate",
                "rate_bound", "contested"])
    for n in args.ns:
        for margin in args.margins:
            for decision in args.decisions:
                cfg = SimConfig(n=n, trials=args.trials, seed=args.seed, rate_margin_bits=margin,
                                decision=decision)
                results = simulate_suite(spec.model, ch, cfg)
                bound = rate_bound(spec.model, ch, cfg)
                worst = worst_case(results)
                for r, label in [(r, r.adversary) for r in results] + [(worst, f"worst:{worst.adversary}")]:
                    w.writerow([n, margin, decision, label, r.errors, f"{r.empirical_error:.4f}",
                                f"{r.avg_rate_bits_per_symbol:.4f}", f"{bound:.4f}", r.contested])


if __name__ == "__main__":
    main()
