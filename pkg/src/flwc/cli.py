"""Command line entry point: ``flwc [--config cfg.json] [--seeds 100] ...``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .coordinator import Scheme
from .fuzzy import FuzzyError, system_from_files
from .metrics import (
    STATION_COLUMNS,
    SUMMARY_COLUMNS,
    ComparisonReport,
    compare_schemes,
    render_text,
    station_rows,
    summary_rows,
    sweep,
    to_csv,
)
from .scenario import ConfigError, ScenarioConfig, fleet_to_csv, read_fleet_csv, sample_fleet

log = logging.getLogger("flwc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunSpec:
    config: ScenarioConfig
    config_path: Optional[Path] = None
    scheme: str = "both"
    seed: Optional[int] = 0
    seed_count: Optional[int] = None
    out: Path = Path("results")
    rules: Optional[Path] = None
    membership: Optional[Path] = None
    fleet: Optional[Path] = None
    events: bool = False
    workers: int = 1

    @property
    def seeds(self) -> List[int]:
        if self.seed_count is not None:
            return list(range(self.seed_count))
        return [self.seed]

    @property
    def schemes(self) -> List[Scheme]:
        if self.scheme == "both":
            return [Scheme.FLWC, Scheme.FCFS]
        return [Scheme(self.scheme)]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="flwc",
        description="Simulate fuzzy-weight vs first-come-first-serve charging station allocation.",
    )
    p.add_argument("--config", type=Path, help="JSON scenario configuration")
    p.add_argument("--scheme", choices=["flwc", "fcfs", "both"], default="both")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--seed", type=int, help="single fleet seed (default 0)")
    group.add_argument("--seeds", type=int, metavar="N", help="sweep seeds 0..N-1")
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    p.add_argument("--rules", type=Path, help="rule base file")
    p.add_argument("--membership", type=Path, help="membership parameter file")
    p.add_argument("--fleet", type=Path, help="replay a fleet CSV instead of sampling")
    p.add_argument("--events", action="store_true", help="write per-slot event logs")
    p.add_argument("--workers", type=int, default=1, help="processes for seed sweeps")
    return p


def parse_and_validate(argv: Optional[Sequence[str]] = None) -> RunSpec:
    """Parse ``argv``; raises :class:`UsageError` with a message naming the bad key."""
    args = build_parser().parse_args(argv)

    if args.seeds is not None and args.seeds < 1:
        raise UsageError("--seeds: sweep must contain at least one seed")
    if args.seed is not None and args.seed < 0:
        raise UsageError("--seed: must be >= 0")
    if args.workers < 1:
        raise UsageError("--workers: must be >= 1")
    if args.fleet is not None and args.seeds is not None:
        raise UsageError("--fleet: a replayed fleet cannot be combined with --seeds")
    for key in ("config", "rules", "membership", "fleet"):
        path = getattr(args, key)
        if path is not None and not (path.is_file() and os.access(path, os.R_OK)):
            raise UsageError(f"--{key}: cannot read {path}")

    try:
        cfg = ScenarioConfig.from_file(args.config) if args.config else ScenarioConfig()
    except ConfigError as exc:
        raise UsageError(f"config key {exc}") from None
    seed = None if args.seeds is not None else (args.seed if args.seed is not None else cfg.seed)
    return RunSpec(
        config=cfg,
        config_path=args.config,
        scheme=args.scheme,
        seed=seed,
        seed_count=args.seeds,
        out=args.out,
        rules=args.rules,
        membership=args.membership,
        fleet=args.fleet,
        events=args.events,
        workers=args.workers,
    )


def _write_atomic(files: Dict[str, str], out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=out)
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.chmod(tmp, 0o644)
            staged.append((tmp, out / name))
        for tmp, final in staged:
            os.replace(tmp, final)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise


def render_outputs(spec: RunSpec) -> Dict[str, str]:
    """All output files, name -> contents, computed in memory."""
    cfg = spec.config
    fis = system_from_files(spec.rules, spec.membership)
    files: Dict[str, str] = {}
    if spec.fleet is not None:
        fleet = read_fleet_csv(spec.fleet)
        report = ComparisonReport([compare_schemes(fleet, cfg, fis, spec.seed, spec.events)])
    else:
        report = sweep(cfg, spec.seeds, fis, workers=spec.workers, record_events=spec.events)
        if len(spec.seeds) == 1:
            files["fleet.csv"] = fleet_to_csv(sample_fleet(cfg, spec.seeds[0]))

    schemes = spec.schemes
    aggregate = len(report.runs) > 1
    files["summary.csv"] = to_csv(SUMMARY_COLUMNS, summary_rows(report, schemes, aggregate))
    files["stations.csv"] = to_csv(STATION_COLUMNS, station_rows(report, schemes))
    files["report.txt"] = render_text(report, schemes)
    if spec.events:
        for run in report.runs:
            for scheme in schemes:
                res = run.flwc if scheme is Scheme.FLWC else run.fcfs
                files[f"events_{scheme}_seed{run.seed}.csv"] = res.events_csv()
    return files


def execute(spec: RunSpec) -> int:
    try:
        files = render_outputs(spec)
        _write_atomic(files, spec.out)
    except (FuzzyError, ValueError) as exc:
        print(f"flwc: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"flwc: I/O error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(files["report.txt"])
    log.info("wrote %d files to %s", len(files), spec.out)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    try:
        spec = parse_and_validate(argv)
    except UsageError as exc:
        build_parser().print_usage(sys.stderr)
        print(f"flwc: error: {exc}", file=sys.stderr)
        return 2
    return execute(spec)


if __name__ == "__main__":
    sys.exit(main())
