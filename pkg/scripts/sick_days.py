"""Staying home versus coming in: final size and absence by isolation lag."""
import argparse

from contagion.contact_log import Channel, SyntheticLogConfig, generate_synthetic
from contagion.epidemic import DiseaseParams, SeedingProtocol
from contagion.interventions import IsolateWhenInfectious
from contagion.tradeoff import evaluate_isolation


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--lags", default="0,1,2,3,5,100")
    args = parser.parse_args()

    log = generate_synthetic(SyntheticLogConfig(master_seed=args.seed)).project(Channel.INTERACTION)
    protocol = SeedingProtocol.first_days(log)
    print(f"{'lag':>4} {'final size':>10} {'absent p-days':>13} {'absence':>8} {'productivity':>12}")
    for lag in (int(x) for x in args.lags.split(",")):
        pt = evaluate_isolation(log, DiseaseParams(), IsolateWhenInfectious(lag), protocol)
        print(f"{lag:4d} {pt.estimate.mean:10.2f} {pt.mean_person_days_absent:13.2f} "
              f"{pt.mean_absence_fraction:8.2%} {pt.effective_productivity:12.4f}")


if __name__ == "__main__":
    main()
