"""Monte Carlo driver: success-rate estimation over the augmentation
constant C, threshold bisection, and report emission.

Each trial builds a seeded dense host, augments it with a binomial random
graph at p = C/n, and runs either the constructive pipeline, the exact
search, or the pipeline with an exact fallback (small n only).  All
randomness is derived from (master seed, trial index), never from C, so
the random parts are monotone-coupled across the C grid and a full batch
replays byte-identically (timing fields aside).

Reports: ``records.jsonl`` (one record per trial), ``summary.csv`` (fixed
nine columns per C value), ``curve.dat`` (plain "C rate" pairs) and a
rendered ``curve.png`` with score-interval error bars.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from statistics import NormalDist
from typing import Iterable, Sequence

from .absorption import PipelineParams, assemble
from .augment import graph_fingerprint, sample_gnp, subseed, union
from .constructions import dense_host
from .graphs import Graph
from .search import ABSENT, FOUND, SearchBudget, find_power_ham_cycle

EXACT_LIMIT = 12
MODES = ("pipeline", "exact", "pipeline-then-exact")


def pipeline_preset(
    k: int, n: int, alpha: float, C: float, seed: int = 0, **overrides
) -> PipelineParams:
    """Desk-scale parameter preset for the pipeline.

    Sizes the absorber family, the absorbing-path cap, a reservoir that is
    a whole number of connector loads, and a tile order that covers the
    expected pool in one or two tiles.  For k >= 1 the reservoir degree
    fraction is relaxed below the asymptotic k/(k+1)+eps/2, which no
    uniform desk-scale sample can meet.
    """
    eps = alpha - k / (k + 1)
    if eps <= 0:
        raise ValueError("alpha must exceed k/(k+1)")
    inner = (k + 1) * 2 ** (k + 1)
    if k == 0:
        fm = max(4, min(8, n // 12))
        reservoir = 2 * max(3, round(0.1 * n))
        degree_frac = None  # the asymptotic fraction is feasible here
    elif k == 1:
        fm = max(3, min(5, n // 20))
        reservoir = inner * max(2, round(0.2 * n / inner))
        degree_frac = 0.35
    else:
        fm = 2
        reservoir = inner * 2
        degree_frac = 0.47
    reservoir = max(1, min(reservoir, n // 2))
    path_cap = (2 * k + 2) * fm + inner * (fm - 1)
    while fm > 2 and n - reservoir - path_cap < 2 * (k + 1):
        fm -= 1
        path_cap = (2 * k + 2) * fm + inner * (fm - 1)
    pool_est = n - reservoir - path_cap
    m = max(1, min(16, (pool_est - 1) // (k + 2))) if pool_est > 1 else 1
    params = dict(
        k=k,
        eps=eps,
        gamma=math.sqrt(reservoir / n) if n else 0.5,
        C=C,
        beta=0.01,
        m=m,
        seed=seed,
        budget_nodes=150_000,
        reservoir_size=reservoir,
        reservoir_degree_frac=degree_frac,
        prune="greedy",
        family_target=3 * fm,
        family_min=1 if k == 2 else 2,
        family_max=fm,
        path_cap=path_cap,
        used_cap_frac=1.0,
        absorb_cap=fm,
        leftover_cap=fm,
    )
    params.update(overrides)
    return PipelineParams(**params)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a host family, a mode, and a trial budget.

    ``C`` is the augmentation constant for single-point runs; grid
    operations substitute values from ``c_grid`` via dataclasses.replace.
    """

    k: int
    n: int
    alpha: float
    trials: int
    mode: str = "pipeline"
    seed: int = 0
    C: float | None = None
    c_grid: tuple[float, ...] | None = None
    confidence: float = 0.95
    budget_nodes: int = 2_000_000

    def __post_init__(self) -> None:
        if self.alpha <= self.k / (self.k + 1) or self.alpha >= 1:
            raise ValueError("alpha must lie in (k/(k+1), 1)")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "exact" and self.n > EXACT_LIMIT:
            raise ValueError(f"exact mode requires n <= {EXACT_LIMIT}")
        if self.confidence <= 0 or self.confidence >= 1:
            raise ValueError("confidence must lie in (0,1)")
        if self.c_grid is not None:
            object.__setattr__(self, "c_grid", tuple(float(c) for c in self.c_grid))

    def config_hash(self) -> str:
        payload = json.dumps(dataclasses.asdict(self), sort_keys=True)
        return hashlib.blake2b(payload.encode(), digest_size=8).hexdigest()


@dataclass
class RunRecord:
    """Outcome of a single trial; everything except ``timing`` replays
    byte-identically for a fixed (config, trial index)."""

    config_hash: str
    c: float
    trial: int
    sub_seed: int
    host_id: str
    outcome: str  # success | absent | unknown | stage_failure:<stage>
    source: str  # pipeline | exact | none
    retries: dict
    timing: dict
    certificate: tuple[int, ...] | None = None
    certificate_path: str | None = None

    @property
    def success(self) -> bool:
        return self.outcome == "success"

    def to_json(self, *, with_timing: bool = True) -> str:
        data = dataclasses.asdict(self)
        data["certificate"] = (
            list(self.certificate) if self.certificate is not None else None
        )
        if not with_timing:
            data.pop("timing")
        return json.dumps(data, sort_keys=True)


def host_graph(cfg: ExperimentConfig, trial: int) -> Graph:
    return dense_host(cfg.n, cfg.alpha, subseed(cfg.seed, "host", trial))


def run_trial(cfg: ExperimentConfig, trial: int) -> RunRecord:
    """Run one seeded trial of the configured mode at C = cfg.C."""
    if cfg.C is None:
        raise ValueError("cfg.C must be set for run_trial")
    c_value = float(cfg.C)
    t0 = time.perf_counter()
    G = host_graph(cfg, trial)
    p = min(1.0, c_value / cfg.n) if cfg.n else 0.0
    rnd = sample_gnp(cfg.n, p, subseed(cfg.seed, "gnp", trial))
    H = union(G, rnd)
    build_ms = (time.perf_counter() - t0) * 1000

    outcome = "unknown"
    source = "none"
    retries: dict = {}
    certificate = None
    t1 = time.perf_counter()

    def run_exact() -> None:
        nonlocal outcome, source, certificate
        result = find_power_ham_cycle(
            H.graph, cfg.k + 1, SearchBudget(node_cap=cfg.budget_nodes)
        )
        source = "exact"
        if result.status == FOUND:
            outcome = "success"
            certificate = result.certificate.order
        elif result.status == ABSENT:
            outcome = "absent"
        else:
            outcome = "unknown"

    if cfg.mode == "exact":
        run_exact()
    else:
        params = pipeline_preset(
            cfg.k, cfg.n, cfg.alpha, c_value, seed=subseed(cfg.seed, "pipe", trial)
        )
        result = assemble(H, params)
        retries = result.stage_retries
        source = "pipeline"
        if result.success:
            outcome = "success"
            certificate = result.certificate.order
        else:
            outcome = f"stage_failure:{result.stage}"
            if cfg.mode == "pipeline-then-exact" and cfg.n <= EXACT_LIMIT:
                run_exact()
    solve_ms = (time.perf_counter() - t1) * 1000

    return RunRecord(
        config_hash=cfg.config_hash(),
        c=c_value,
        trial=trial,
        sub_seed=subseed(cfg.seed, "gnp", trial),
        host_id=graph_fingerprint(G),
        outcome=outcome,
        source=source,
        retries=retries,
        timing={"build_ms": round(build_ms, 3), "solve_ms": round(solve_ms, 3)},
        certificate=certificate,
    )


def wilson_interval(successes: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Two-sided score interval; valid near 0 and 1 unlike the normal one."""
    if n == 0:
        return (0.0, 1.0)
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    phat = successes / n
    denom = 1 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class SuccessEstimate:
    c: float
    trials: int
    successes: int
    failures: int
    unknowns: int
    rate: float  # successes / decided trials
    ci: tuple[float, float]
    rate_pessimistic: float  # successes / trials
    rate_optimistic: float  # (successes + unknowns) / trials
    records: tuple[RunRecord, ...] = field(repr=False, default=())

    @property
    def decided(self) -> int:
        return self.trials - self.unknowns


def _worker(args: tuple[ExperimentConfig, int]) -> RunRecord:
    cfg, trial = args
    return run_trial(cfg, trial)


def run_batch(cfg: ExperimentConfig, C: float | None = None) -> list[RunRecord]:
    """All trials at one C value; parallel when HPL_THREADS > 1, merged by
    trial index either way."""
    target = dataclasses.replace(cfg, C=float(C if C is not None else cfg.C))
    threads = int(os.environ.get("HPL_THREADS", "1") or "1")
    jobs = [(target, i) for i in range(target.trials)]
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_worker, jobs))
    else:
        records = [_worker(job) for job in jobs]
    records.sort(key=lambda r: r.trial)
    return records


def estimate_success(cfg: ExperimentConfig, C: float | None = None) -> SuccessEstimate:
    """Success fraction at one C value with a score confidence interval;
    unknown outcomes are reported separately, never silently counted."""
    records = run_batch(cfg, C)
    successes = sum(1 for r in records if r.success)
    unknowns = sum(1 for r in records if r.outcome == "unknown")
    trials = len(records)
    decided = trials - unknowns
    failures = decided - successes
    rate = successes / decided if decided else 0.0
    ci = wilson_interval(successes, decided, cfg.confidence)
    return SuccessEstimate(
        c=float(C if C is not None else cfg.C),
        trials=trials,
        successes=successes,
        failures=failures,
        unknowns=unknowns,
        rate=rate,
        ci=ci,
        rate_pessimistic=successes / trials if trials else 0.0,
        rate_optimistic=(successes + unknowns) / trials if trials else 0.0,
        records=tuple(records),
    )


@dataclass(frozen=True)
class ThresholdResult:
    c_lo: float
    c_hi: float
    rate_lo: float
    rate_hi: float
    target: float
    evaluations: tuple[SuccessEstimate, ...]

    @property
    def width(self) -> float:
        return self.c_hi - self.c_lo


def threshold_bisect(
    cfg: ExperimentConfig,
    target: float,
    c_lo: float | None = None,
    c_hi: float | None = None,
    tol: float = 1.0,
    max_evals: int = 12,
) -> ThresholdResult:
    """Bisect the (assumed monotone) success curve for the smallest C with
    rate >= target.  The initial bracket must straddle the target."""
    if c_lo is None or c_hi is None:
        if not cfg.c_grid:
            raise ValueError("need an explicit bracket or cfg.c_grid")
        c_lo = min(cfg.c_grid) if c_lo is None else c_lo
        c_hi = max(cfg.c_grid) if c_hi is None else c_hi
    if c_lo > c_hi:
        raise ValueError("bracket endpoints out of order")

    cache: dict[float, SuccessEstimate] = {}

    def rate_at(c: float) -> SuccessEstimate:
        if c not in cache:
            cache[c] = estimate_success(cfg, c)
        return cache[c]

    lo_est = rate_at(c_lo)
    hi_est = rate_at(c_hi)
    if c_lo == c_hi:
        return ThresholdResult(c_lo, c_hi, lo_est.rate, hi_est.rate, target, tuple(cache.values()))
    if not (lo_est.rate < target <= hi_est.rate):
        raise ValueError(
            f"bracket invalid: rate({c_lo})={lo_est.rate:.3f}, "
            f"rate({c_hi})={hi_est.rate:.3f} do not straddle target {target}"
        )
    evals = 2
    while c_hi - c_lo > tol and evals < max_evals:
        mid = (c_lo + c_hi) / 2
        est = rate_at(mid)
        evals += 1
        if est.rate >= target:
            c_hi = mid
        else:
            c_lo = mid
    return ThresholdResult(
        c_lo,
        c_hi,
        rate_at(c_lo).rate,
        rate_at(c_hi).rate,
        target,
        tuple(sorted(cache.values(), key=lambda e: e.c)),
    )


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

SUMMARY_COLUMNS = (
    "c",
    "trials",
    "successes",
    "unknowns",
    "rate",
    "ci_lo",
    "ci_hi",
    "mean_build_ms",
    "mean_solve_ms",
)


def summarize(records: Iterable[RunRecord], confidence: float = 0.95) -> list[dict]:
    """One summary row per C value, in the fixed nine-column layout."""
    by_c: dict[float, list[RunRecord]] = {}
    for r in records:
        by_c.setdefault(r.c, []).append(r)
    rows = []
    for c in sorted(by_c):
        recs = by_c[c]
        successes = sum(1 for r in recs if r.success)
        unknowns = sum(1 for r in recs if r.outcome == "unknown")
        decided = len(recs) - unknowns
        rate = successes / decided if decided else 0.0
        ci = wilson_interval(successes, decided, confidence)
        rows.append(
            {
                "c": c,
                "trials": len(recs),
                "successes": successes,
                "unknowns": unknowns,
                "rate": round(rate, 6),
                "ci_lo": round(ci[0], 6),
                "ci_hi": round(ci[1], 6),
                "mean_build_ms": round(
                    sum(r.timing.get("build_ms", 0.0) for r in recs) / len(recs), 3
                ),
                "mean_solve_ms": round(
                    sum(r.timing.get("solve_ms", 0.0) for r in recs) / len(recs), 3
                ),
            }
        )
    return rows


def write_summary_csv(rows: Sequence[dict], path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def read_summary_csv(path) -> list[dict]:
    with open(path, "r", newline="", encoding="ascii") as fh:
        return [dict(row) for row in csv.DictReader(fh)]


def emit_report(
    records: Sequence[RunRecord],
    outdir,
    *,
    confidence: float = 0.95,
    figure: bool = True,
) -> dict:
    """Persist a batch: records.jsonl, summary.csv, curve.dat, and (by
    default) a rendered curve.png; successful certificates go to certs/.

    Returns the paths written.
    """
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    certs_dir = out / "certs"

    for rec in records:
        if rec.success and rec.certificate is not None:
            certs_dir.mkdir(exist_ok=True)
            name = f"cert_c{rec.c:g}_t{rec.trial}.txt"
            with open(certs_dir / name, "w", encoding="ascii") as fh:
                for v in rec.certificate:
                    fh.write(f"{v}\n")
            rec.certificate_path = str(Path("certs") / name)

    records_path = out / "records.jsonl"
    with open(records_path, "w", encoding="ascii") as fh:
        for rec in records:
            fh.write(rec.to_json())
            fh.write("\n")

    rows = summarize(records, confidence)
    summary_path = out / "summary.csv"
    write_summary_csv(rows, summary_path)

    curve_path = out / "curve.dat"
    with open(curve_path, "w", encoding="ascii") as fh:
        for row in rows:
            fh.write(f"{row['c']:g} {row['rate']:.6f}\n")

    paths = {
        "records": str(records_path),
        "summary": str(summary_path),
        "curve": str(curve_path),
    }
    if figure:
        paths["figure"] = str(_render_curve(rows, out / "curve.png"))
    return paths


def _render_curve(rows: Sequence[dict], path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if rows:
        cs = [row["c"] for row in rows]
        rates = [row["rate"] for row in rows]
        lo = [row["rate"] - row["ci_lo"] for row in rows]
        hi = [row["ci_hi"] - row["rate"] for row in rows]
        ax.errorbar(cs, rates, yerr=[lo, hi], fmt="o-", capsize=3)
    ax.set_xlabel("augmentation constant C  (p = C/n)")
    ax.set_ylabel("success rate")
    ax.set_ylim(-0.05, 1.05)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


# ---------------------------------------------------------------------------
# Flat key=value config files
# ---------------------------------------------------------------------------

_INT_KEYS = {"k", "n", "trials", "seed", "budget_nodes"}
_FLOAT_KEYS = {"alpha", "confidence", "c"}


def parse_config_text(text: str) -> ExperimentConfig:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key in _INT_KEYS:
            values[key] = int(val)
        elif key in _FLOAT_KEYS:
            values[key if key != "c" else "C"] = float(val)
        elif key == "c_grid":
            values["c_grid"] = tuple(float(x) for x in val.split(",") if x.strip())
        elif key == "mode":
            values["mode"] = val
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    missing = {"k", "n", "alpha", "trials"} - values.keys()
    if missing:
        raise ValueError(f"missing required keys: {sorted(missing)}")
    if "C" not in values and "c_grid" not in values:
        raise ValueError("config needs c= or c_grid=")
    return ExperimentConfig(**values)


def parse_config_file(path) -> ExperimentConfig:
    with open(path, "r", encoding="ascii") as fh:
        return parse_config_text(fh.read())
