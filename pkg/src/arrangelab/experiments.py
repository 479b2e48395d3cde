"""Seeded, parallel experiment harness with CSV/JSON persistence and a CLI.

Reproducibility contract: trial i draws from the stream seeded with
mix_seed(master_seed, i), flagged attempts retry on mix_seed(trial_seed,
attempt), and rows are gathered in trial order -- so outputs are
byte-identical for a fixed config no matter the thread count.  CSV floats
are rendered with 17 significant digits and LF line endings; wall time and
environment live in a sidecar JSON next to the data file, never in it.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import ConvergenceFailure, DegeneratePair, DegeneratePencil, InvalidInput, Timeout
from .geometry import CapObstacle, cap_volume_fraction, coverage_count, good_cone_fraction
from .graphs import (
    build_obstacle_graph,
    connected_components,
    isolated_count,
    quadric_intersection_graph,
    region_counts,
)
from .linalg import SymMatrix, definite_batch
from .pencil import BORDERLINE, CONSISTENT, INCONSISTENT, calabi_check
from .sampling import (
    RngState,
    binary_form,
    mix_seed,
    sample_goe,
    sample_goe_batch,
    sample_kostlan,
    sample_sphere_batch,
    sample_sphere_point,
)
from .varieties import (
    ZeroCount,
    arrangement_zeros_detail,
    conic_intersection_count,
    ekss_leading_term,
)

EXPERIMENTS = (
    "ekss-rp1",
    "conics",
    "obstacle-graph",
    "quadrics-graph",
    "pd-volume",
    "good-cone",
    "coverage",
    "calabi-audit",
    "region-counts",
)

_MAX_RETRIES = 10
_COVERAGE_MAX_DRAWS = 100_000
_GOE_CHUNK = 200_000
PD_DECAY_REFERENCE = -math.log(3.0) / 4.0


@dataclass
class ExperimentConfig:
    """Resolved experiment configuration (JSON config file mirrors the names)."""

    experiment: str
    seed: int = 0
    trials: int = None
    s: int = None
    s_sweep: list = None
    n: int = None
    N: int = None
    m: int = None
    m_max: int = None
    degrees: list = None
    rho: float = None
    eps: float = None
    samples: int = None
    out: str = None
    format: str = "csv"
    threads: int = 1

    @staticmethod
    def from_dict(data):
        known = {f.name for f in fields(ExperimentConfig)}
        unknown = set(data) - known
        if unknown:
            raise InvalidInput(f"unknown config keys: {sorted(unknown)}")
        return ExperimentConfig(**data)

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidInput(f"unknown experiment {self.experiment!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise InvalidInput("seed must be a nonnegative integer")
        if self.format not in ("csv", "json"):
            raise InvalidInput("format must be csv or json")
        if self.threads is None or self.threads < 1:
            raise InvalidInput("threads must be >= 1")
        for name in ("trials", "s", "n", "N", "m", "m_max", "samples"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise InvalidInput(f"{name} must be positive")
        if self.rho is not None and not 0.0 < self.rho < 0.5 * math.pi:
            raise InvalidInput("rho must lie in (0, pi/2)")
        if self.eps is not None and self.eps < 0.0:
            raise InvalidInput("eps must be >= 0")
        if self.s_sweep is not None:
            if not self.s_sweep or any(int(v) < 1 for v in self.s_sweep):
                raise InvalidInput("s_sweep must be a list of positive sizes")
        need = _REQUIRED[self.experiment]
        missing = [k for k in need if getattr(self, k) is None]
        if missing:
            raise InvalidInput(
                f"{self.experiment} requires config keys {missing}"
            )
        return self


_REQUIRED = {
    "ekss-rp1": ("trials", "degrees"),
    "conics": ("trials",),
    "obstacle-graph": ("trials", "N", "rho"),
    "quadrics-graph": ("trials",),
    "pd-volume": ("samples",),
    "good-cone": ("trials", "N", "rho", "samples"),
    "coverage": ("trials", "N", "rho", "eps", "samples"),
    "calabi-audit": ("trials",),
    "region-counts": ("trials", "N", "rho", "eps", "s"),
}


@dataclass
class SummaryRecord:
    """Headline estimate of one experiment run."""

    estimate: float
    stderr: float
    ci95_lo: float
    ci95_hi: float
    trials: int
    flagged_count: int
    wall_time: float


@dataclass
class ExperimentResult:
    experiment: str
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)
    record: SummaryRecord = None


def summarize(values, flagged_count, wall_time):
    arr = np.asarray(values, dtype=float)
    n = arr.size
    mean = float(arr.mean()) if n else float("nan")
    sd = float(arr.std(ddof=1)) if n > 1 else 0.0
    stderr = sd / math.sqrt(n) if n else float("nan")
    return SummaryRecord(
        estimate=mean,
        stderr=stderr,
        ci95_lo=mean - 1.96 * stderr if n else float("nan"),
        ci95_hi=mean + 1.96 * stderr if n else float("nan"),
        trials=int(n),
        flagged_count=int(flagged_count),
        wall_time=float(wall_time),
    )


# ---------------------------------------------------------------------------
# trial runner


def _run_trials(cfg, count, worker):
    """Run `worker(index, rng) -> (row, retry, events)` over all trial indices.

    Flagged attempts (retry=True) rerun on a derived fresh seed, at most
    _MAX_RETRIES times, then the trial is excluded.  Rows come back in trial
    order regardless of thread count.
    """

    def run_one(index):
        base = mix_seed(cfg.seed, index)
        events = 0
        row = None
        for attempt in range(_MAX_RETRIES + 1):
            rng = RngState(base if attempt == 0 else mix_seed(base, attempt))
            row, retry, ev = worker(index, rng)
            events += ev
            if not retry:
                return row, events, False
            events += 1
        return None, events, True

    threads = cfg.threads or 1
    if threads == 1:
        outcomes = [run_one(i) for i in range(count)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run_one, range(count)))
    rows = [row for row, _, dropped in outcomes if not dropped and row is not None]
    flagged = sum(ev for _, ev, _ in outcomes)
    excluded = sum(1 for _, _, dropped in outcomes if dropped)
    return rows, flagged, excluded


# ---------------------------------------------------------------------------
# individual experiments


def run_ekss_rp1(cfg):
    """Zero/arrangement counting on RP^1 for Kostlan forms of cfg.degrees.

    Rows carry both the distinct zero count of the union and the arc count
    b0 = max(zeros, 1).  The headline estimate is the zero-count mean (the
    leading-term comparand); with no forms at all there are no zeros to
    count and the headline is the constant arc count 1.
    """
    degrees = [int(d) for d in cfg.degrees]
    reference = ekss_leading_term(degrees, 1) if degrees else 1.0
    start = time.perf_counter()

    def worker(index, rng):
        forms = [binary_form(sample_kostlan(rng, 1, d)) for d in degrees]
        zeros, flagged = arrangement_zeros_detail(forms)
        if flagged:
            return None, True, 0
        return {"trial": index, "zeros": zeros, "b0": max(zeros, 1)}, False, 0

    rows, flagged, excluded = _run_trials(cfg, cfg.trials, worker)
    key = "zeros" if degrees else "b0"
    record = summarize(
        [r[key] for r in rows], flagged, time.perf_counter() - start
    )
    summary = {
        "reference": reference,
        "abs_error": abs(record.estimate - reference),
        "mean_b0": float(np.mean([r["b0"] for r in rows])) if rows else float("nan"),
        "excluded_trials": excluded,
    }
    return ExperimentResult(
        "ekss-rp1", ["trial", "zeros", "b0"], rows, summary, record
    )


def run_conics(cfg):
    """Real intersection counts of random conic (GOE 3x3) pairs; target 2."""
    start = time.perf_counter()

    def worker(index, rng):
        q1 = sample_goe(rng, 3)
        q2 = sample_goe(rng, 3)
        try:
            zc = conic_intersection_count(q1, q2)
        except DegeneratePencil:
            return None, True, 0
        if zc.degenerate_flag:
            return None, True, 0
        return {"trial": index, "count": zc.count}, False, 0

    rows, flagged, excluded = _run_trials(cfg, cfg.trials, worker)
    counts = [r["count"] for r in rows]
    record = summarize(counts, flagged, time.perf_counter() - start)
    hist = {}
    for c in counts:
        hist[c] = hist.get(c, 0) + 1
    summary = {
        "reference": ekss_leading_term([2, 2], 2),
        "histogram": {str(k): hist[k] for k in sorted(hist)},
        "odd_counts": sum(1 for c in counts if c % 2),
        "flagged_fraction": record.flagged_count / max(cfg.trials, 1),
        "excluded_trials": excluded,
    }
    return ExperimentResult("conics", ["trial", "count"], rows, summary, record)


def _cap_for(cfg):
    center = np.zeros(cfg.N + 1)
    center[-1] = 1.0
    return CapObstacle(center, cfg.rho)


def run_obstacle_graph(cfg):
    """b0/s of cap-obstacle random graphs over an s sweep."""
    obstacle = _cap_for(cfg)
    fraction = cap_volume_fraction(obstacle)
    sweep = [int(v) for v in (cfg.s_sweep or ([cfg.s] if cfg.s else [250, 1000, 4000]))]
    start = time.perf_counter()
    all_rows = []
    flagged_total = 0
    excluded_total = 0
    per_s = {}
    # matched-seed sweep: trial i reuses one stream at every s, so the s=250
    # point set is a prefix of the s=4000 one and the gap sequence is coupled
    for s in sweep:

        def worker(index, rng, s=s):
            points = sample_sphere_batch(rng, cfg.N, s)
            try:
                graph = build_obstacle_graph(obstacle, points)
            except DegeneratePair:
                return None, True, 0
            b0 = connected_components(graph)
            iso = isolated_count(graph)
            _, _, s_p = region_counts(points, obstacle, 0.0)
            row = {
                "s": s,
                "trial": index,
                "b0": b0,
                "isolated": iso,
                "s_p": s_p,
                "b0_over_s": b0 / s,
                "isolated_minus_sp_over_s": (iso - s_p) / s,
                "volume_fraction": fraction,
            }
            return row, False, 0

        rows, flagged, excluded = _run_trials(cfg, cfg.trials, worker)
        all_rows.extend(rows)
        flagged_total += flagged
        excluded_total += excluded
        per_s[s] = {
            "mean_b0_over_s": float(np.mean([r["b0_over_s"] for r in rows])),
            "mean_isolated_minus_sp_over_s": float(
                np.mean([r["isolated_minus_sp_over_s"] for r in rows])
            ),
            "mean_sp_over_s": float(np.mean([r["s_p"] / r["s"] for r in rows])),
        }
    record = summarize(
        [r["b0_over_s"] for r in all_rows if r["s"] == sweep[-1]],
        flagged_total,
        time.perf_counter() - start,
    )
    summary = {
        "volume_fraction": fraction,
        "per_s": {str(k): v for k, v in per_s.items()},
        "gap_to_fraction": {
            str(s): abs(v["mean_b0_over_s"] - fraction) for s, v in per_s.items()
        },
        "excluded_trials": excluded_total,
    }
    columns = [
        "s",
        "trial",
        "b0",
        "isolated",
        "s_p",
        "b0_over_s",
        "isolated_minus_sp_over_s",
        "volume_fraction",
    ]
    return ExperimentResult("obstacle-graph", columns, all_rows, summary, record)


def run_quadrics_graph(cfg):
    """b0(union of quadrics)/s over an s sweep, via pencil edges on GOE input."""
    m = cfg.m or 3
    if m < 3:
        raise InvalidInput("quadrics-graph needs m >= 3")
    sweep = [int(v) for v in (cfg.s_sweep or ([cfg.s] if cfg.s else [100, 400, 1600]))]
    start = time.perf_counter()
    all_rows = []
    flagged_total = 0
    per_s = {}
    # matched-seed sweep, same coupling as the cap-obstacle runner
    for s in sweep:

        def worker(index, rng, s=s):
            packed = sample_goe_batch(rng, m, s)
            mats = [SymMatrix(m, packed[i]) for i in range(s)]
            graph = quadric_intersection_graph(mats)
            b0_graph = connected_components(graph)
            definite = graph.meta["definite_count"]
            borderline = graph.meta["borderline_count"]
            b0_gamma = b0_graph - definite
            row = {
                "s": s,
                "trial": index,
                "b0_graph": b0_graph,
                "definite_count": definite,
                "b0_gamma": b0_gamma,
                "b0_gamma_over_s": b0_gamma / s,
                "borderline_count": borderline,
            }
            return row, False, borderline

        rows, flagged, _ = _run_trials(cfg, cfg.trials, worker)
        all_rows.extend(rows)
        flagged_total += flagged
        per_s[s] = float(np.mean([r["b0_gamma_over_s"] for r in rows]))
    record = summarize(
        [r["b0_gamma_over_s"] for r in all_rows if r["s"] == sweep[-1]],
        flagged_total,
        time.perf_counter() - start,
    )
    means = [per_s[s] for s in sweep]
    summary = {
        "per_s": {str(s): per_s[s] for s in sweep},
        "strictly_decreasing": all(a > b for a, b in zip(means, means[1:])),
        "last_over_first": means[-1] / means[0] if means[0] else float("nan"),
    }
    columns = [
        "s",
        "trial",
        "b0_graph",
        "definite_count",
        "b0_gamma",
        "b0_gamma_over_s",
        "borderline_count",
    ]
    return ExperimentResult("quadrics-graph", columns, all_rows, summary, record)


def run_pd_volume(cfg):
    """P(GOE definite) and P(GOE positive definite) for m = 2..m_max.

    Definiteness ("empty zero set", used for graph membership) counts both
    signs; positivity is one sign, and P(definite) = 2 P(PD) in expectation.
    The (1/n^2) log P(definite) column tracks the exponential decay rate.
    """
    m_max = cfg.m_max or 5
    if m_max < 2:
        raise InvalidInput("pd-volume needs m_max >= 2")
    start = time.perf_counter()
    rows = []
    for m in range(2, m_max + 1):
        rng = RngState(mix_seed(cfg.seed, m))
        pd_hits = 0
        nd_hits = 0
        remaining = cfg.samples
        while remaining > 0:
            chunk = min(remaining, _GOE_CHUNK)
            packed = sample_goe_batch(rng, m, chunk)
            is_pd, is_nd = definite_batch(packed, m)
            pd_hits += int(is_pd.sum())
            nd_hits += int(is_nd.sum())
            remaining -= chunk
        p_pd = pd_hits / cfg.samples
        p_def = (pd_hits + nd_hits) / cfg.samples
        n = m - 1
        rows.append(
            {
                "m": m,
                "n": n,
                "samples": cfg.samples,
                "p_pd": p_pd,
                "stderr_pd": math.sqrt(p_pd * (1.0 - p_pd) / cfg.samples),
                "p_definite": p_def,
                "stderr_definite": math.sqrt(p_def * (1.0 - p_def) / cfg.samples),
                "log_p_definite_over_n2": (
                    math.log(p_def) / (n * n) if p_def > 0.0 else float("-inf")
                ),
                "reference_rate": PD_DECAY_REFERENCE,
            }
        )
    p_defs = [r["p_definite"] for r in rows]
    record = summarize([rows[-1]["p_definite"]], 0, time.perf_counter() - start)
    summary = {
        "p_definite_by_m": {str(r["m"]): r["p_definite"] for r in rows},
        "strictly_decreasing": all(a > b for a, b in zip(p_defs, p_defs[1:])),
        "reference_rate": PD_DECAY_REFERENCE,
    }
    columns = [
        "m",
        "n",
        "samples",
        "p_pd",
        "stderr_pd",
        "p_definite",
        "stderr_definite",
        "log_p_definite_over_n2",
        "reference_rate",
    ]
    return ExperimentResult("pd-volume", columns, rows, summary, record)


def run_good_cone(cfg):
    """Good-cone volume fraction for random outside points of a cap."""
    obstacle = _cap_for(cfg)
    start = time.perf_counter()

    def worker(index, rng):
        while True:
            p = sample_sphere_point(rng, cfg.N)
            if not obstacle.contains(p):
                break
        frac, se = good_cone_fraction(obstacle, p, cfg.samples, rng)
        return {"trial": index, "fraction": frac, "stderr": se}, False, 0

    rows, flagged, excluded = _run_trials(cfg, cfg.trials, worker)
    record = summarize(
        [r["fraction"] for r in rows], flagged, time.perf_counter() - start
    )
    summary = {
        "volume_fraction": cap_volume_fraction(obstacle),
        "excluded_trials": excluded,
    }
    return ExperimentResult(
        "good-cone", ["trial", "fraction", "stderr"], rows, summary, record
    )


def run_coverage(cfg):
    """Draws needed until good cones cover a test grid outside the dilation."""
    obstacle = _cap_for(cfg)
    start = time.perf_counter()

    def worker(index, rng):
        try:
            draws = coverage_count(
                obstacle, cfg.eps, cfg.samples, _COVERAGE_MAX_DRAWS, rng
            )
            return {"trial": index, "draws": draws, "timed_out": 0}, False, 0
        except Timeout as exc:
            row = {"trial": index, "draws": exc.draws, "timed_out": 1}
            return row, False, 1

    rows, flagged, excluded = _run_trials(cfg, cfg.trials, worker)
    completed = [r["draws"] for r in rows if not r["timed_out"]]
    record = summarize(completed, flagged, time.perf_counter() - start)
    summary = {
        "timed_out": sum(r["timed_out"] for r in rows),
        "max_draws": _COVERAGE_MAX_DRAWS,
        "test_grid_size": cfg.samples,
        "excluded_trials": excluded,
    }
    return ExperimentResult(
        "coverage", ["trial", "draws", "timed_out"], rows, summary, record
    )


def run_region_counts(cfg):
    """Region counts (s_e, s_a, s_p) with a Hoeffding concentration audit.

    The audit checks the frequency of |s_p - E s_p| > t over the runs
    against exp(-2 t^2 / s) at t = sqrt(s log(6/0.01) / 2).
    """
    obstacle = _cap_for(cfg)
    fraction = cap_volume_fraction(obstacle)
    start = time.perf_counter()

    def worker(index, rng):
        points = sample_sphere_batch(rng, cfg.N, cfg.s)
        s_e, s_a, s_p = region_counts(points, obstacle, cfg.eps)
        return {"trial": index, "s_e": s_e, "s_a": s_a, "s_p": s_p}, False, 0

    rows, flagged, excluded = _run_trials(cfg, cfg.trials, worker)
    s_ps = np.array([r["s_p"] for r in rows], dtype=float)
    expected = cfg.s * fraction
    t = math.sqrt(cfg.s * math.log(6.0 / 0.01) / 2.0)
    bound = math.exp(-2.0 * t * t / cfg.s)
    freq = float(np.mean(np.abs(s_ps - expected) > t)) if rows else float("nan")
    record = summarize(s_ps / cfg.s, flagged, time.perf_counter() - start)
    summary = {
        "volume_fraction": fraction,
        "expected_s_p": expected,
        "hoeffding_t": t,
        "hoeffding_bound": bound,
        "deviation_frequency": freq,
        "audit_pass": bool(freq <= bound),
        "excluded_trials": excluded,
    }
    return ExperimentResult(
        "region-counts", ["trial", "s_e", "s_a", "s_p"], rows, summary, record
    )


def run_calabi_audit(cfg):
    """Cross-validate pencil verdicts against the common-zero oracle."""
    m = cfg.m or 3
    if m < 3:
        raise InvalidInput("calabi-audit needs m >= 3")
    start = time.perf_counter()

    def worker(index, rng):
        q1 = sample_goe(rng, m)
        q2 = sample_goe(rng, m)
        status = calabi_check(q1, q2)
        events = 1 if status == BORDERLINE else 0
        return {"trial": index, "m": m, "status": status}, False, events

    rows, flagged, excluded = _run_trials(cfg, cfg.trials, worker)
    statuses = [r["status"] for r in rows]
    n_consistent = statuses.count(CONSISTENT)
    n_inconsistent = statuses.count(INCONSISTENT)
    n_borderline = statuses.count(BORDERLINE)
    checked = n_consistent + n_inconsistent
    record = summarize(
        [1.0 if s == CONSISTENT else 0.0 for s in statuses if s != BORDERLINE],
        flagged,
        time.perf_counter() - start,
    )
    summary = {
        "consistent": n_consistent,
        "inconsistent": n_inconsistent,
        "borderline": n_borderline,
        "checked": checked,
        "excluded_trials": excluded,
    }
    return ExperimentResult(
        "calabi-audit", ["trial", "m", "status"], rows, summary, record
    )


_RUNNERS = {
    "ekss-rp1": run_ekss_rp1,
    "conics": run_conics,
    "obstacle-graph": run_obstacle_graph,
    "quadrics-graph": run_quadrics_graph,
    "pd-volume": run_pd_volume,
    "good-cone": run_good_cone,
    "coverage": run_coverage,
    "calabi-audit": run_calabi_audit,
    "region-counts": run_region_counts,
}


def run_experiment(cfg):
    cfg.validate()
    return _RUNNERS[cfg.experiment](cfg)


# ---------------------------------------------------------------------------
# persistence


def format_value(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path, columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(row[c]) for c in columns))
    data = ("\n".join(lines) + "\n").encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(data)


def write_json_rows(path, rows):
    clean = [
        {k: (float(v) if isinstance(v, np.floating) else int(v) if isinstance(v, np.integer) else v) for k, v in row.items()}
        for row in rows
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(clean, fh, indent=2)
        fh.write("\n")


def write_outputs(cfg, result):
    """Write the data file plus a sidecar with config, environment, wall time."""
    if cfg.format == "csv":
        write_csv(cfg.out, result.columns, result.rows)
    else:
        write_json_rows(cfg.out, result.rows)
    try:
        from importlib.metadata import version

        pkg_version = version("arrangelab")
    except Exception:
        pkg_version = "unknown"
    sidecar = {
        "config": asdict(cfg),
        "package_version": pkg_version,
        "numpy_version": np.__version__,
        "rows": len(result.rows),
        "summary": _summary_payload(result),
    }
    with open(cfg.out + ".meta.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(sidecar, fh, indent=2, default=str)
        fh.write("\n")


def _summary_payload(result):
    payload = dict(result.summary)
    if result.record is not None:
        payload["record"] = asdict(result.record)
    return payload


# ---------------------------------------------------------------------------
# CLI


def _parse_int_list(text):
    return [int(v) for v in text.split(",") if v.strip() != ""]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="arrangelab",
        description="Monte Carlo experiments on random arrangements and obstacle graphs",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", help="JSON config file; flags override it")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--trials", type=int)
        sp.add_argument("--s", type=int)
        sp.add_argument("--s-sweep", dest="s_sweep", type=_parse_int_list)
        sp.add_argument("--n", type=int)
        sp.add_argument("--N", dest="N", type=int)
        sp.add_argument("--m", type=int)
        sp.add_argument("--m-max", dest="m_max", type=int)
        sp.add_argument("--degrees", type=_parse_int_list)
        sp.add_argument("--rho", type=float)
        sp.add_argument("--eps", type=float)
        sp.add_argument("--samples", type=int)
        sp.add_argument("--out")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--threads", type=int)
    return parser


def _config_from_args(args):
    data = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise InvalidInput("config file must hold a JSON object")
        data.update(loaded)
    if data.get("experiment") not in (None, args.experiment):
        raise InvalidInput(
            f"config names experiment {data['experiment']!r} but the "
            f"command line says {args.experiment!r}"
        )
    data["experiment"] = args.experiment
    for key in (
        "seed",
        "trials",
        "s",
        "s_sweep",
        "n",
        "N",
        "m",
        "m_max",
        "degrees",
        "rho",
        "eps",
        "samples",
        "out",
        "format",
        "threads",
    ):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    cfg = ExperimentConfig.from_dict(data)
    cfg.validate()
    return cfg


def _print_summary(cfg, result):
    record = result.record
    print(f"experiment: {cfg.experiment} (seed {cfg.seed})")
    if record is not None and record.trials:
        print(
            f"estimate: {record.estimate:.6g} +- {record.stderr:.3g} "
            f"(95% CI [{record.ci95_lo:.6g}, {record.ci95_hi:.6g}], "
            f"{record.trials} rows)"
        )
        print(
            f"flagged events: {record.flagged_count}; "
            f"wall time: {record.wall_time:.2f} s"
        )
    for key, value in result.summary.items():
        print(f"{key}: {value}")
    if cfg.out:
        print(f"wrote {cfg.out} and {cfg.out}.meta.json")


def cli_main(argv=None):
    """Parse, validate, run, persist.  Exit 0 ok, 2 config error, 3 numerical."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        cfg = _config_from_args(args)
    except (InvalidInput, OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        result = run_experiment(cfg)
        if cfg.out:
            write_outputs(cfg, result)
    except (InvalidInput,) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceFailure, FloatingPointError, Timeout) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    _print_summary(cfg, result)
    return 0


def main():
    raise SystemExit(cli_main(sys.argv[1:]))
