"""Final size and productivity across duration thresholds on a synthetic office.

    python scripts/tradeoff_curves.py --seed 42 --out-dir results/
"""
import argparse
from pathlib import Path

from contagion.contact_log import SyntheticLogConfig, generate_synthetic
from contagion.epidemic import DiseaseParams, SeedingProtocol
from contagion.tradeoff import SweepConfig, run_sweep, tradeoff_csv


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=42, help="generator seed")
    parser.add_argument("--master-seed", type=int, default=0)
    parser.add_argument("--reps", type=int, default=1)
    parser.add_argument("--out-dir", type=Path, default=None)
    args = parser.parse_args()

    log = generate_synthetic(SyntheticLogConfig(master_seed=args.seed))
    protocol = SeedingProtocol.first_days(log, 5, args.reps)
    for mode in ("short", "long"):
        points = run_sweep(log, SweepConfig(mode, params=DiseaseParams(), protocol=protocol,
                                            master_seed=args.master_seed))
        base = points[0].mean_final_size if mode == "short" else points[-1].mean_final_size
        print(f"\nremove {mode} interactions (baseline-like size {base:.2f})")
        print(f"{'threshold':>9} {'final size':>10} {'se':>6} {'change':>7} {'productivity':>12} {'events':>7}")
        for p in points:
            mult = "-" if p.productivity_multiplier is None else f"{p.productivity_multiplier:.3f}"
            print(f"{p.threshold:9g} {p.mean_final_size:10.2f} {p.std_error:6.2f} "
                  f"{p.mean_final_size / base - 1:+7.0%} {mult:>12} {p.n_events_retained:7d}")
        if args.out_dir:
            args.out_dir.mkdir(parents=True, exist_ok=True)
            (args.out_dir / f"remove_{mode}.csv").write_text(tradeoff_csv(points))


if __name__ == "__main__":
    main()
