"""Utilization metrics and paired FLWC/FCFS comparison reports."""

from __future__ import annotations

import csv
import io
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from .coordinator import Scheme, SimulationResult, run_simulation
from .fuzzy import FuzzySystem
from .scenario import ScenarioConfig, sample_fleet

SUMMARY_COLUMNS = ("scheme", "seed", "served", "unserved", "avg_utilization")
STATION_COLUMNS = ("scheme", "seed", "station", "served", "busy_slots", "utilization")


def station_utilization(station, n_slots: int) -> float:
    """Busy slots over horizon slots.

    Summing served count times mean service time per charger is just its total
    busy time, so this is the same quantity. Services cut short by departure
    or closing still count as busy.
    """
    if n_slots <= 0:
        raise ValueError("n_slots must be > 0")
    return station.busy_slots_total / n_slots


def average_utilization(stations: Sequence, n_slots: int) -> float:
    if not stations:
        raise ValueError("average utilization of an empty station list")
    return sum(station_utilization(s, n_slots) for s in stations) / len(stations)


@dataclass
class SeedComparison:
    seed: Optional[int]
    flwc: SimulationResult
    fcfs: SimulationResult

    @property
    def served_delta(self) -> int:
        return self.flwc.served - self.fcfs.served

    @property
    def utilization_delta(self) -> float:
        return self.flwc.avg_utilization - self.fcfs.avg_utilization


@dataclass
class MetricStats:
    count: int
    mean: float
    sd: float

    @classmethod
    def of(cls, values: Sequence[float]) -> "MetricStats":
        values = list(values)
        sd = statistics.stdev(values) if len(values) > 1 else 0.0
        return cls(len(values), statistics.fmean(values), sd)


@dataclass
class ComparisonReport:
    runs: List[SeedComparison]

    @property
    def seeds(self) -> List[Optional[int]]:
        return [r.seed for r in self.runs]

    def results(self, scheme) -> List[SimulationResult]:
        scheme = Scheme(scheme)
        return [r.flwc if scheme is Scheme.FLWC else r.fcfs for r in self.runs]

    def stats(self) -> Dict[str, MetricStats]:
        out = {}
        for scheme in (Scheme.FLWC, Scheme.FCFS):
            res = self.results(scheme)
            out[f"{scheme}.served"] = MetricStats.of([r.served for r in res])
            out[f"{scheme}.unserved"] = MetricStats.of([r.unserved for r in res])
            out[f"{scheme}.avg_utilization"] = MetricStats.of([r.avg_utilization for r in res])
        out["delta.served"] = MetricStats.of([r.served_delta for r in self.runs])
        out["delta.avg_utilization"] = MetricStats.of([r.utilization_delta for r in self.runs])
        return out

    @property
    def mean_served_delta(self) -> float:
        return statistics.fmean(r.served_delta for r in self.runs)

    @property
    def mean_utilization_delta(self) -> float:
        return statistics.fmean(r.utilization_delta for r in self.runs)

    @property
    def win_fraction(self) -> float:
        """Fraction of seeds where FLWC serves strictly more EVs."""
        return sum(r.served_delta > 0 for r in self.runs) / len(self.runs)

    def check_consistency(self) -> None:
        for r in self.runs:
            assert r.served_delta == r.flwc.served - r.fcfs.served
            assert r.utilization_delta == r.flwc.avg_utilization - r.fcfs.avg_utilization


def compare_schemes(fleet, cfg: ScenarioConfig, fis: Optional[FuzzySystem] = None,
                    seed: Optional[int] = None, record_events: bool = False) -> SeedComparison:
    """Run both schemes on the identical fleet."""
    fis = fis or FuzzySystem.default()
    fleet = list(fleet)
    return SeedComparison(
        seed=seed,
        flwc=run_simulation(fleet, cfg, Scheme.FLWC, fis, record_events),
        fcfs=run_simulation(fleet, cfg, Scheme.FCFS, fis, record_events),
    )


def _seed_job(args):
    cfg, fis, seed, record_events = args
    return compare_schemes(sample_fleet(cfg, seed), cfg, fis, seed, record_events)


def sweep(cfg: ScenarioConfig, seeds: Sequence[int], fis: Optional[FuzzySystem] = None,
          workers: int = 1, record_events: bool = False) -> ComparisonReport:
    """Paired comparison over ``seeds``; one fleet per seed shared by both schemes.

    ``workers > 1`` fans out to processes; results come back in seed order.
    """
    fis = fis or FuzzySystem.default()
    jobs = [(cfg, fis, s, record_events) for s in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_seed_job, jobs))
    else:
        runs = [_seed_job(j) for j in jobs]
    return ComparisonReport(runs)


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def summary_rows(report: ComparisonReport, schemes=(Scheme.FLWC, Scheme.FCFS), aggregate: bool = False):
    rows = []
    for run in report.runs:
        for scheme in schemes:
            res = run.flwc if Scheme(scheme) is Scheme.FLWC else run.fcfs
            rows.append([str(scheme), run.seed, res.served, res.unserved, _fmt(res.avg_utilization)])
    if aggregate:
        stats = report.stats()
        for scheme in schemes:
            for label, fn in (("mean", lambda m: m.mean), ("sd", lambda m: m.sd)):
                rows.append([
                    str(scheme), label,
                    _fmt(fn(stats[f"{scheme}.served"])),
                    _fmt(fn(stats[f"{scheme}.unserved"])),
                    _fmt(fn(stats[f"{scheme}.avg_utilization"])),
                ])
    return rows


def station_rows(report: ComparisonReport, schemes=(Scheme.FLWC, Scheme.FCFS)):
    rows = []
    for run in report.runs:
        for scheme in schemes:
            res = run.flwc if Scheme(scheme) is Scheme.FLWC else run.fcfs
            for s in res.per_station:
                rows.append([str(scheme), run.seed, s.station, s.served, s.busy_slots, _fmt(s.utilization)])
    return rows


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def render_text(report: ComparisonReport, schemes=(Scheme.FLWC, Scheme.FCFS)) -> str:
    schemes = [Scheme(s) for s in schemes]
    lines = []
    for run in report.runs:
        lines.append(f"seed {run.seed}")
        for scheme in schemes:
            res = run.flwc if scheme is Scheme.FLWC else run.fcfs
            util = " ".join(f"{s.utilization:.3f}" for s in res.per_station)
            lines.append(
                f"  {scheme.value.upper():4s} served {res.served:3d}  unserved {res.unserved:3d}  "
                f"avg utilization {res.avg_utilization:.3f}  stations [{util}]"
            )
        if len(schemes) == 2:
            lines.append(f"  delta served {run.served_delta:+d}  "
                         f"delta avg utilization {run.utilization_delta:+.3f}")
    if len(report.runs) > 1:
        stats = report.stats()
        lines.append(f"aggregate over {len(report.runs)} seeds (mean +/- sd)")
        for key, m in stats.items():
            if len(schemes) < 2 and not key.startswith(schemes[0].value):
                continue
            lines.append(f"  {key:24s} {m.mean:9.3f} +/- {m.sd:.3f}")
        if len(schemes) == 2:
            lines.append(f"  FLWC serves more in {report.win_fraction:.0%} of seeds")
    return "\n".join(lines) + "\n"
