"""Command-line entry point: generate, simulate, sweep, constraint, compare.

Every JSON output embeds a run manifest (subcommand, resolved configuration,
git blob hash of the input log, tool version, master seed). Output paths and
the worker count are left out of it because they do not affect results.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .contact_log import Channel, ContactLogError, SyntheticLogConfig, generate_synthetic, read_log, write_log
from .epidemic import DiseaseParams, FinalSizeEstimate, SeedingProtocol, run_protocol
from .interventions import IsolateWhenInfectious, run_isolation_protocol
from .network_metrics import ProductivityModel, aggregate, constraint_report
from .tradeoff import SweepConfig, baseline_constraint, compare_channels, run_sweep, tradeoff_csv

WORKERS_ENV = "CONTAGION_WORKERS"


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be a non-negative integer, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("must be a 64-bit unsigned integer")
    return value


def _channel(text: str) -> Channel:
    try:
        return Channel.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _threshold_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated minutes, got {text!r}") from None


def _add_disease_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--log", required=True, type=Path, help="contact-log CSV")
    p.add_argument("--beta", type=_nonneg_float, default=0.007, help="transmission rate per minute")
    p.add_argument("--gamma", type=_nonneg_float, default=1.0 / 3.0, help="recovery rate per working day")
    p.add_argument("--model", choices=("hazard", "linear"), default="hazard",
                   help="duration-to-probability map")
    p.add_argument("--seed-days", type=_positive_int, default=5,
                   help="seed on each of the first N days (capped at the log length)")
    p.add_argument("--reps", type=_positive_int, default=1, help="repetitions per (person, day)")
    p.add_argument("--master-seed", type=_seed, default=0)
    p.add_argument("--workers", type=_positive_int, default=None,
                   help=f"threads (default: ${WORKERS_ENV} or 1); never changes results")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contagion", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic contact log")
    g.add_argument("--people", type=_positive_int, default=36)
    g.add_argument("--days", type=_positive_int, default=20)
    g.add_argument("--day-length", type=_positive_float, default=480.0, help="minutes per working day")
    g.add_argument("--mean-events", type=_nonneg_float, default=20.0, help="events per person per day")
    g.add_argument("--duration-median", type=_positive_float, default=2.0)
    g.add_argument("--duration-shape", type=_nonneg_float, default=1.0)
    g.add_argument("--affinity", type=_positive_float, default=0.5, help="Dirichlet concentration of partner choice")
    g.add_argument("--proximity-inflation", type=float, default=3.0)
    g.add_argument("--seed", type=_seed, default=0)
    g.add_argument("--out", required=True, type=Path)

    s = sub.add_parser("simulate", help="estimate the mean final size")
    _add_disease_flags(s)
    s.add_argument("--channel", type=_channel, default=Channel.INTERACTION)
    s.add_argument("--isolate-lag", type=_nonneg_int, default=None,
                   help="stay home from this many days after infection")
    s.add_argument("--out", type=Path, default=None, help="JSON report (default: stdout)")

    w = sub.add_parser("sweep", help="tradeoff curve over duration thresholds")
    _add_disease_flags(w)
    w.add_argument("--mode", required=True, choices=("short", "long"))
    w.add_argument("--thresholds", type=_threshold_list, default=None,
                   help="comma-separated ascending minutes")
    w.add_argument("--channel", type=_channel, default=Channel.INTERACTION)
    w.add_argument("--percent-per-sd", type=float, default=0.10)
    w.add_argument("--out-prefix", required=True, type=Path)

    c = sub.add_parser("constraint", help="Burt's constraint per person")
    c.add_argument("--log", required=True, type=Path)
    c.add_argument("--channel", type=_channel, default=Channel.INTERACTION)
    c.add_argument("--out", type=Path, default=None)

    m = sub.add_parser("compare", help="interaction vs proximity epidemics")
    _add_disease_flags(m)
    m.add_argument("--out", type=Path, default=None)
    return parser


def _workers(args) -> int:
    if args.workers is not None:
        return args.workers
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return _positive_int(env)
        except (ValueError, argparse.ArgumentTypeError):
            raise UsageError(f"{WORKERS_ENV} must be a positive integer, got {env!r}") from None
    return 1


def _disease(args) -> DiseaseParams:
    return DiseaseParams(beta_per_minute=args.beta, gamma_per_day=args.gamma, model=args.model)


def _disease_config(args, log) -> dict:
    return {
        "beta_per_minute": args.beta,
        "gamma_per_day": args.gamma,
        "model": args.model,
        "seed_days": list(range(min(args.seed_days, log.n_days))),
        "repetitions_per_combination": args.reps,
    }


def _manifest(command: str, config: dict, log=None, master_seed=None) -> dict:
    return {
        "subcommand": command,
        "config": config,
        "log_sha1": None if log is None else log.content_hash(),
        "version": __version__,
        "master_seed": master_seed,
    }


def _dumps(payload: dict) -> str:
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def _emit(payload: dict, out: Path | None) -> None:
    text = _dumps(payload)
    if out is None:
        sys.stdout.write(text)
    else:
        _write_text(out, text)


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _estimate_dict(est: FinalSizeEstimate) -> dict:
    return {"mean": est.mean, "std_error": est.std_error, "n_runs": est.n_runs, "per_run": list(est.per_run)}


def cmd_generate(args) -> None:
    cfg = SyntheticLogConfig(
        n_people=args.people,
        n_days=args.days,
        day_length=args.day_length,
        mean_events_per_person_day=args.mean_events,
        duration_median=args.duration_median,
        duration_shape=args.duration_shape,
        pair_affinity_concentration=args.affinity,
        proximity_inflation=args.proximity_inflation,
        master_seed=args.seed,
    )
    log = generate_synthetic(cfg)
    write_log(log, args.out)
    print(
        f"wrote {args.out}: {log.n_people} people, {log.n_days} days, "
        f"{log.count(Channel.INTERACTION)} interaction events, {log.count(Channel.PROXIMITY)} proximity events"
    )


def cmd_simulate(args) -> None:
    log = read_log(args.log)
    params = _disease(args)
    protocol = SeedingProtocol.first_days(log, args.seed_days, args.reps)
    sim_log = log.project(args.channel)
    config = {**_disease_config(args, log), "channel": args.channel.name.lower(), "isolate_lag": args.isolate_lag}
    payload = {"manifest": _manifest("simulate", config, log, args.master_seed)}
    if args.isolate_lag is None:
        outcomes = run_protocol(sim_log, params, protocol, args.master_seed, _workers(args))
        payload["estimate"] = _estimate_dict(FinalSizeEstimate.from_sizes([o.final_size for o in outcomes]))
    else:
        runs = run_isolation_protocol(sim_log, params, IsolateWhenInfectious(args.isolate_lag), protocol,
                                      args.master_seed, _workers(args))
        payload["estimate"] = _estimate_dict(FinalSizeEstimate.from_sizes([o.final_size for o, _ in runs]))
        days = [r.person_days_absent for _, r in runs]
        payload["absence"] = {
            "mean_person_days_absent": sum(days) / len(days),
            "mean_absence_fraction": sum(r.absence_fraction for _, r in runs) / len(runs),
            "per_run_person_days": days,
        }
    _emit(payload, args.out)


def cmd_sweep(args) -> None:
    log = read_log(args.log)
    protocol = SeedingProtocol.first_days(log, args.seed_days, args.reps)
    try:
        config = SweepConfig(
            mode=args.mode,
            thresholds=args.thresholds,
            params=_disease(args),
            protocol=protocol,
            master_seed=args.master_seed,
            channel=args.channel,
            productivity=ProductivityModel(args.percent_per_sd),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    points = run_sweep(log, config, _workers(args))
    baseline = baseline_constraint(log)
    resolved = {
        **_disease_config(args, log),
        "mode": args.mode,
        "thresholds": list(config.thresholds),
        "channel": args.channel.name.lower(),
        "percent_per_sd": args.percent_per_sd,
    }
    payload = {
        "manifest": _manifest("sweep", resolved, log, args.master_seed),
        "baseline_constraint": {
            "mean": baseline.mean,
            "sd": baseline.sd,
            "n_isolates": baseline.n_isolates,
            "sd_source": "in-sample, unfiltered interaction network",
        },
        "points": [p.to_dict() for p in points],
    }
    prefix = str(args.out_prefix)
    _write_text(Path(prefix + ".csv"), tradeoff_csv(points))
    _write_text(Path(prefix + ".json"), _dumps(payload))


def cmd_constraint(args) -> None:
    log = read_log(args.log)
    report = constraint_report(aggregate(log, args.channel))
    payload = {
        "manifest": _manifest("constraint", {"channel": args.channel.name.lower()}, log),
        "constraint": report.to_dict(),
    }
    _emit(payload, args.out)


def cmd_compare(args) -> None:
    log = read_log(args.log)
    protocol = SeedingProtocol.first_days(log, args.seed_days, args.reps)
    cmp = compare_channels(log, _disease(args), protocol, args.master_seed, _workers(args))
    payload = {
        "manifest": _manifest("compare", _disease_config(args, log), log, args.master_seed),
        "comparison": cmp.to_dict(),
    }
    _emit(payload, args.out)


COMMANDS = {
    "generate": cmd_generate,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "constraint": cmd_constraint,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except ValueError as exc:
        # config validation (ContactLogError is also a ValueError)
        if isinstance(exc, ContactLogError):
            print(f"contagion: error: {exc}", file=sys.stderr)
            return 1
        parser.error(str(exc))
    except OSError as exc:
        print(f"contagion: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
