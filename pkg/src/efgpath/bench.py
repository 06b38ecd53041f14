"""Seeded benchmark sweeps over the generated game families."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .gamegen import GenSpec, generate
from .homotopy import VARIANTS, HomotopyConfig
from .sequence_form import build_sequence_form
from .tracer import CONVERGED, TracerParams, trace

log = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 5000
DEFAULT_MAX_WALL_TIME = 600.0

CSV_COLUMNS = ("type", "n", "L", "A", "dim", "variant", "instances",
               "iter_max", "iter_min", "iter_med", "time_max", "time_min", "time_med", "failure_rate")


@dataclass(frozen=True)
class BenchRow:
    game_type: int
    n: int
    L: int
    A: int

    @property
    def label(self) -> str:
        return f"type{self.game_type}({self.n},{self.L},{self.A})"


@dataclass(frozen=True)
class BenchConfig:
    rows: tuple[BenchRow, ...]
    instances: int = 20
    variants: tuple[str, ...] = VARIANTS
    master_seed: int = 0
    max_steps: int = DEFAULT_MAX_STEPS
    max_wall_time: float = DEFAULT_MAX_WALL_TIME
    kappa0: float = 3.0
    alpha_bound: float = 0.01
    gamma0: str = "random"
    t_end: float = 1e-4
    workers: int | None = None
    """Process count; None uses the CPU count, 1 runs inline."""

    def __post_init__(self):
        if self.instances < 1:
            raise ValueError("instances must be >= 1")
        if self.max_steps < 1 or self.max_wall_time <= 0:
            raise ValueError("caps must be positive")
        if not self.rows:
            raise ValueError("no benchmark rows")
        for v in self.variants:
            if v not in VARIANTS:
                raise ValueError(f"unknown variant {v!r}")

    def tracer_params(self) -> TracerParams:
        return TracerParams(t_end=self.t_end, max_steps=self.max_steps,
                            max_wall_time=self.max_wall_time, record_gamma=False)

    @classmethod
    def from_dict(cls, doc: dict) -> "BenchConfig":
        doc = dict(doc)
        rows = []
        for r in doc.pop("rows"):
            if isinstance(r, dict):
                rows.append(BenchRow(int(r["type"]), int(r["n"]), int(r["L"]), int(r["A"])))
            else:
                rows.append(BenchRow(*map(int, r)))
        if "variants" in doc:
            doc["variants"] = tuple(doc["variants"])
        return cls(rows=tuple(rows), **doc)


def load_bench_config(path) -> BenchConfig:
    with open(path, encoding="utf-8") as fh:
        return BenchConfig.from_dict(json.load(fh))


def instance_seed(master_seed: int, row_index: int, instance: int) -> int:
    """Independent 32-bit seed per (row, instance), shared by every variant."""
    return int(np.random.SeedSequence([master_seed, row_index, instance]).generate_state(1)[0])


@dataclass(frozen=True)
class InstanceRecord:
    row: int
    variant: str
    instance: int
    seed: int
    dim: int
    status: str
    steps: int
    corrector_iters: int
    wall_time: float
    final_t: float
    gap: float

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


@dataclass(frozen=True)
class _Job:
    row_index: int
    row: BenchRow
    variant: str
    instance: int
    seed: int
    cfg: BenchConfig


def _run_job(job: _Job) -> InstanceRecord:
    r = job.row
    game = generate(GenSpec(r.game_type, r.n, r.L, r.A, seed=job.seed))
    sf = build_sequence_form(game)
    hcfg = HomotopyConfig(variant=job.variant, kappa0=job.cfg.kappa0, alpha_bound=job.cfg.alpha_bound,
                          seed=job.seed, gamma0=job.cfg.gamma0)
    try:
        res = trace(hcfg, sf, job.cfg.tracer_params())
    except Exception as exc:  # recorded, never fatal to the sweep
        log.warning("%s %s seed %d crashed: %s", r.label, job.variant, job.seed, exc)
        return InstanceRecord(job.row_index, job.variant, job.instance, job.seed, sf.unknown_dimension,
                              "numerical_failure", 0, 0, float("nan"), float("nan"), float("nan"))
    return InstanceRecord(
        row=job.row_index, variant=job.variant, instance=job.instance, seed=job.seed,
        dim=sf.unknown_dimension, status=res.status, steps=res.steps,
        corrector_iters=sum(p.corrector_iters for p in res.trace),
        wall_time=res.wall_time, final_t=res.final_t, gap=res.gap.max_gap,
    )


@dataclass(frozen=True)
class Summary:
    row: BenchRow
    dim: int
    variant: str
    instances: int
    failures: int
    iter_max: float
    iter_min: float
    iter_med: float
    time_max: float
    time_min: float
    time_med: float

    @property
    def failure_rate(self) -> float:
        return self.failures / self.instances


def summarize(row: BenchRow, variant: str, records: list[InstanceRecord]) -> Summary:
    """Extremes and medians over converged runs; failure rate over all."""
    ok = [r for r in records if r.converged]
    it = np.array([r.steps for r in ok], dtype=float)
    tm = np.array([r.wall_time for r in ok], dtype=float)

    def stats(a):
        return (float(a.max()), float(a.min()), float(np.median(a))) if a.size else (np.nan,) * 3

    return Summary(row, records[0].dim, variant, len(records), len(records) - len(ok), *stats(it), *stats(tm))


@dataclass
class BenchReport:
    config: BenchConfig
    records: list[InstanceRecord]
    summaries: list[Summary] = field(default_factory=list)

    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        return {
            "config": cfg,
            "summaries": [{**asdict(s), "row": asdict(s.row), "failure_rate": s.failure_rate} for s in self.summaries],
            "records": [asdict(r) for r in self.records],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, default=float)

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for s in self.summaries:
            r = s.row
            w.writerow([r.game_type, r.n, r.L, r.A, s.dim, s.variant, s.instances,
                        s.iter_max, s.iter_min, s.iter_med,
                        round(s.time_max, 4), round(s.time_min, 4), round(s.time_med, 4),
                        s.failure_rate])
        return out.getvalue()


def run_bench(cfg: BenchConfig) -> BenchReport:
    jobs = [
        _Job(ri, row, v, k, instance_seed(cfg.master_seed, ri, k), cfg)
        for ri, row in enumerate(cfg.rows)
        for v in cfg.variants
        for k in range(cfg.instances)
    ]
    workers = cfg.workers if cfg.workers is not None else (os.cpu_count() or 1)
    if workers <= 1 or len(jobs) == 1:
        records = [_run_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_job, jobs))
    # order never depends on completion timing
    records.sort(key=lambda r: (r.row, cfg.variants.index(r.variant), r.instance))
    report = BenchReport(cfg, records)
    for ri, row in enumerate(cfg.rows):
        for v in cfg.variants:
            report.summaries.append(summarize(row, v, [r for r in records if r.row == ri and r.variant == v]))
    return report
