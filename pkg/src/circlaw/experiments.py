"""Named experiments binding the library into reproducible runs.

The registry is closed: each experiment takes one flat configuration, runs
its trials on derived generator streams (master_seed, trial_index), persists
newline-delimited records plus CSV exports, and renders quick-look figures
alongside the data.  Re-running a configuration with the same seed
reproduces every statistic.

Feasibility note: the union-set row model needs n + s odd and the fixed-sum
model needs n + s even.  Experiments that draw union rows accept any
requested n and bump it by one when the parity is wrong, recording both the
requested and the effective size; silent rounding elsewhere is rejected.
"""

from __future__ import annotations

import json
import math
import os
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import distance, gaps, logdet, report, singular, smallball, spectral
from .records import ResultStore, TrialRecord, jsonable
from .rng import trial_rng
from .sampler import (FIXED_SUM, IID, MODELS, UNION_S, sample_row,
                      union_feasible)

DEFAULT_OUT_ENV = "CIRCLAW_OUT"


class UsageError(ValueError):
    """Invalid configuration for the requested experiment."""


@dataclass
class ExperimentConfig:
    """One flat bag of parameters; every CLI flag mirrors one field."""

    experiment: str
    n: int | None = None
    s: int = 0
    trials: int | None = None
    seed: int = 0
    model: str | None = None
    z: complex = 0j
    beta: str | None = None
    a_exponents: tuple[float, ...] = ()
    t_ladder: tuple[float, ...] = (3.0, 4.0, 5.0)
    m_split: int | None = None
    n0: int | None = None
    k: int | None = None
    grid: int = 101
    samples: int = 10 ** 4
    v: str | None = None
    delta: str | None = None
    gap_file: str | None = None
    out: str | None = None
    workers: int = 1
    figures: bool = True

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config fields: {sorted(unknown)}")
        if "z" in data and isinstance(data["z"], str):
            data = dict(data)
            data["z"] = complex(data["z"].replace(" ", ""))
        for name in ("a_exponents", "t_ladder"):
            if name in data and data[name] is not None:
                data = dict(data)
                data[name] = tuple(float(x) for x in data[name])
        return cls(**data)

    def out_dir(self) -> Path:
        root = self.out or os.environ.get(DEFAULT_OUT_ENV) or "circlaw-results"
        return Path(root)


def parse_points(text: str) -> list:
    """'1,2,3' for reals; '1,0;0,1' for planar points (';' separates)."""
    text = text.strip()
    if ";" in text:
        return [tuple(Fraction(c) for c in part.split(","))
                for part in text.split(";") if part.strip()]
    return [Fraction(c) for c in text.split(",") if c.strip()]


def effective_union_n(n: int, s: int) -> int:
    """Smallest size >= n at which union-set rows with parameter s exist."""
    return n if union_feasible(n, s) else n + 1


def _run_trials(trials: int, seed: int, worker, workers: int = 1):
    """worker(index, rng) -> dict; results ordered by trial index."""
    indices = range(trials)
    if workers <= 1:
        return [worker(i, trial_rng(seed, i)) for i in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {i: pool.submit(worker, i, trial_rng(seed, i)) for i in indices}
        return [futures[i].result() for i in indices]


# ---------------------------------------------------------------------------
# individual experiments


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise UsageError(msg)


def run_sample(cfg: ExperimentConfig, out_dir: Path):
    n = cfg.n or 100
    model = cfg.model or FIXED_SUM
    trials = cfg.trials or 10
    _require(model in MODELS, f"model must be one of {MODELS}")
    s = cfg.s
    if model == UNION_S:
        n = effective_union_n(n, s)

    def worker(i, rng):
        vec = sample_row(n, s, model, rng)
        if model == FIXED_SUM:
            ok = vec.sum == s
        elif model == UNION_S:
            ok = vec.sum in (s - 1, s + 1)
        else:
            ok = (vec.sum + n) % 2 == 0
        return {"stats": {"sum": vec.sum, "n": n},
                "flags": {"sum_in_law": bool(ok)}}

    results = _run_trials(trials, cfg.seed, worker, cfg.workers)
    records = [TrialRecord("sample", i, cfg.seed,
                           params={"n": n, "s": s, "model": model},
                           **res) for i, res in enumerate(results)]
    sums = [r.stats["sum"] for r in records]
    summary = {"trials": trials, "mean_sum": statistics.fmean(sums),
               "all_in_law": all(r.passed() for r in records)}
    return records, summary


def run_esd(cfg: ExperimentConfig, out_dir: Path):
    n = cfg.n or 1000
    s = cfg.s
    trials = cfg.trials or 1
    model = cfg.model or FIXED_SUM
    _require(model == FIXED_SUM,
             "the esd experiment draws fixed row-sum matrices")

    def worker(i, rng):
        M = np.stack([sample_row(n, s, FIXED_SUM, rng).entries
                      for _ in range(n)]).astype(float)
        esd = spectral.esd_from_reduction(M, s)
        ks = spectral.ks_distance_to_circular(esd, grid=cfg.grid)
        return {"points": esd.points, "outlier": esd.excluded_outlier, "ks": ks}

    results = _run_trials(trials, cfg.seed, worker, cfg.workers)
    records = []
    for i, res in enumerate(results):
        pts = res["points"]
        csv_path = out_dir / f"esd_eigenvalues_draw{i}.csv"
        all_pts = np.concatenate([pts, [res["outlier"]]])
        spectral.write_eigenvalue_csv(csv_path, all_pts)
        if cfg.figures:
            report.esd_scatter(pts, out_dir / f"esd_scatter_draw{i}.png",
                               outlier=res["outlier"],
                               title=f"reduced spectrum, n={n}, s={s}")
        records.append(TrialRecord(
            "esd", i, cfg.seed,
            params={"n": n, "s": s, "grid": cfg.grid, "model": model},
            stats={"ks_distance": res["ks"],
                   "points": [[z.real, z.imag] for z in pts],
                   "outlier": [res["outlier"].real, res["outlier"].imag],
                   "outlier_in_csv": True,
                   "csv": str(csv_path)},
            flags={"ks_finite": math.isfinite(res["ks"])}))
    summary = {"trials": trials,
               "ks_distances": [r.stats["ks_distance"] for r in records]}
    return records, summary


def run_reduce(cfg: ExperimentConfig, out_dir: Path):
    n = cfg.n or 12
    s = cfg.s
    trials = cfg.trials or 100

    def worker(i, rng):
        M = np.stack([sample_row(n, s, FIXED_SUM, rng).entries
                      for _ in range(n)]).astype(float)
        err, refined = spectral.reduction_match_error(M)
        return {"stats": {"pairing_error": err, "extended_precision": refined},
                "flags": {"match": err <= 1e-6}}

    results = _run_trials(trials, cfg.seed, worker, cfg.workers)
    records = [TrialRecord("reduce", i, cfg.seed, params={"n": n, "s": s},
                           **res) for i, res in enumerate(results)]
    summary = {"trials": trials,
               "max_error": max(r.stats["pairing_error"] for r in records),
               "all_match": all(r.passed() for r in records)}
    return records, summary


def run_logdet_compare(cfg: ExperimentConfig, out_dir: Path):
    requested = cfg.n or 50
    s = cfg.s
    n = effective_union_n(requested, s)
    trials = cfg.trials or 200
    z = cfg.z

    def worker(i, rng):
        draw = logdet.replacement_statistic(n, s, None, z, rng)
        return {"stats": {"statistic": draw.statistic,
                          "logdet_fixed": draw.logdet_fixed,
                          "logdet_iid": draw.logdet_iid,
                          "singular": draw.singular},
                "flags": {}}

    results = _run_trials(trials, cfg.seed, worker, cfg.workers)
    records = [TrialRecord("logdet-compare", i, cfg.seed,
                           params={"n": n, "requested_n": requested, "s": s,
                                   "z": z, "m_split": cfg.m_split},
                           **res) for i, res in enumerate(results)]
    stats = [r.stats["statistic"] for r in records
             if not r.stats["singular"]]
    excluded = sum(r.stats["singular"] for r in records)
    summary = {"trials": trials, "excluded_singular": excluded,
               "median_abs_statistic":
                   statistics.median(abs(x) for x in stats) if stats else None}
    if cfg.figures and stats:
        report.statistic_histogram(
            stats, out_dir / f"logdet_compare_n{n}.png",
            title=f"ensemble comparison statistic, n={n}, z={z}",
            xlabel="(1/n) log-determinant difference")
    return records, summary


def run_singvals(cfg: ExperimentConfig, out_dir: Path):
    requested = cfg.n or 50
    s = cfg.s
    model = cfg.model or UNION_S
    n = effective_union_n(requested, s) if model == UNION_S else requested
    trials = cfg.trials or 200
    ladder = cfg.a_exponents or (0.5, 1.0, 2.0, 4.0)
    rng = trial_rng(cfg.seed, 0)
    rep = singular.least_singular_tail(n, s, None, ladder, trials, rng,
                                       model=model)
    rec = TrialRecord(
        "singvals", 0, cfg.seed,
        params={"n": n, "requested_n": requested, "s": s, "model": model,
                "trials": trials},
        stats={"a_ladder": list(rep.a_ladder),
               "hits": list(rep.hits),
               "frequencies": list(rep.frequencies),
               "excluded": rep.excluded,
               "sigma_min": list(rep.sigma_min)},
        flags={"monotone_in_A": all(
            rep.hits[j] >= rep.hits[j + 1] for j in range(len(rep.hits) - 1))})
    if cfg.figures:
        report.singular_tail_curve(rep.a_ladder, rep.frequencies,
                                   out_dir / f"singvals_tail_n{n}.png", n)
    summary = {"a_ladder": list(rep.a_ladder),
               "frequencies": list(rep.frequencies),
               "excluded": rep.excluded}
    return [rec], summary


def run_smallball(cfg: ExperimentConfig, out_dir: Path):
    _require(cfg.v is not None, "smallball needs --v with the multiset")
    _require(cfg.beta is not None, "smallball needs --beta")
    v = parse_points(cfg.v)
    beta = Fraction(cfg.beta)
    model = cfg.model or IID
    s = cfg.s
    if model == "relation":
        rel = smallball.rho_relation_check(v, beta, s)
        rec = TrialRecord(
            "smallball", 0, cfg.seed,
            params={"v": cfg.v, "beta": cfg.beta, "s": s, "model": model},
            stats={"rho": rel.rho, "rho_float": float(rel.rho),
                   "rho_star_minus": rel.rho_star_minus,
                   "rho_star_plus": rel.rho_star_plus,
                   "ratio": rel.ratio, "constant": rel.constant},
            flags={"conditioning_holds": rel.conditioning_ok})
        return [rec], {"rho": float(rel.rho), "ratio": rel.ratio,
                       "conditioning_holds": rel.conditioning_ok}
    if model == IID:
        value, center = smallball.rho_iid(smallball.SmallBallQuery.iid(v, beta, s))
    elif model == FIXED_SUM:
        value, center = smallball.rho_star(
            smallball.SmallBallQuery.fixed_sum(v, beta, s))
    else:
        raise UsageError("smallball model must be iid, fixed, or relation")
    rec = TrialRecord(
        "smallball", 0, cfg.seed,
        params={"v": cfg.v, "beta": cfg.beta, "s": s, "model": model},
        stats={"rho": value, "rho_float": float(value),
               "center": jsonable(center)},
        flags={})
    return [rec], {"rho": float(value)}


def run_gap(cfg: ExperimentConfig, out_dir: Path):
    _require(cfg.gap_file is not None, "gap needs --gap-file")
    spec = json.loads(Path(cfg.gap_file).read_text())
    if "radii" in spec:
        gap = gaps.Gap.symmetric(spec["generators"], spec["radii"])
    else:
        gap = gaps.Gap.build(spec["generators"], spec["lower"], spec["upper"],
                             base=spec.get("base"))
    enum = gaps.gap_enumerate(gap)
    stats = {"volume": gap.volume, "size": enum.size, "proper": enum.proper,
             "symmetric": gap.is_symmetric, "rank": gap.rank}
    flags = {}
    if cfg.v is not None and cfg.delta is not None:
        v = parse_points(cfg.v)
        delta = Fraction(cfg.delta)
        close = gaps.gap_closeness(v, gap, delta, enumerated=enum)
        stats.update({"close_count": close.close_count,
                      "all_close": close.all_close})
        if close.all_close and gap.is_symmetric and enum.proper:
            ph = gaps.gap_pigeonhole_bound(v, gap, delta, s=cfg.s)
            stats.update({"pigeonhole_bound": ph.bound,
                          "dilate_size": ph.dilate_size, "rho": ph.rho})
            if ph.verified is not None:
                flags["pigeonhole_holds"] = ph.verified
    rec = TrialRecord("gap", 0, cfg.seed,
                      params={"gap_file": cfg.gap_file, "v": cfg.v,
                              "delta": cfg.delta, "s": cfg.s},
                      stats=stats, flags=flags)
    return [rec], {k: jsonable(v_) for k, v_ in stats.items()}


def run_talagrand(cfg: ExperimentConfig, out_dir: Path):
    n = cfg.n or 100
    s = cfg.s
    model = cfg.model or IID
    if model == UNION_S:
        n = effective_union_n(n, s)
    k = cfg.k if cfg.k is not None else n // 2
    rng = trial_rng(cfg.seed, 0)
    table = distance.talagrand_tail_experiment(
        n, k, s, None, cfg.t_ladder, cfg.samples, model, rng)
    records = []
    freqs = [r.frequency for r in table.rows]
    for j, row in enumerate(table.rows):
        flags = {"monotone": j == 0 or freqs[j] <= freqs[j - 1]}
        if row.asserted is not None:
            flags["within_iid_bound"] = row.asserted
        records.append(TrialRecord(
            "talagrand", j, cfg.seed,
            params={"n": n, "k": table.k, "s": s, "model": model,
                    "samples": cfg.samples},
            stats={"t": row.t, "frequency": row.frequency,
                   "iid_bound": row.iid_bound,
                   "median_bound": row.median_bound,
                   "center": table.center,
                   "fitted_constant": table.fitted_constant},
            flags=flags))
    if cfg.figures:
        report.tail_curves(
            [r.t for r in table.rows], freqs,
            {"exp(-t^2/4)": [r.iid_bound for r in table.rows],
             "4 exp(-t^2/16)": [r.median_bound for r in table.rows]},
            out_dir / f"talagrand_tails_n{n}_k{table.k}_{model}.png",
            title=f"distance tails, n={n}, k={table.k}, model={model}")
    summary = {"frequencies": freqs, "center": table.center,
               "fitted_constant": table.fitted_constant,
               "all_bounds_hold": table.all_asserted_hold}
    return records, summary


def run_identity_suite(cfg: ExperimentConfig, out_dir: Path):
    n = cfg.n or 10
    trials = cfg.trials or 100
    s_fixed = 0 if n % 2 == 0 else 1
    z = cfg.z or (1 + 0.5j)

    def worker(i, rng):
        stats: dict = {}
        flags: dict = {}
        # spectrum reduction on a fixed row-sum draw
        M = np.stack([sample_row(n, s_fixed, FIXED_SUM, rng).entries
                      for _ in range(n)]).astype(float)
        err, _ = spectral.reduction_match_error(M)
        stats["reduction_error"] = err
        flags["reduction"] = err <= 1e-6
        # base-times-height against an LU determinant
        A = np.where(rng.integers(0, 2, size=(n, n)) == 1, 1.0, -1.0) \
            - z * math.sqrt(n) * np.eye(n)
        decomp = logdet.logdet_via_distances(list(A))
        if decomp.degenerate:
            flags["base_times_height"] = False
            stats["logdet_rel_error"] = math.inf
        else:
            ref = spectral.logabsdet_lu(A)
            rel = abs(decomp.total - ref) / max(abs(ref), 1.0)
            stats["logdet_rel_error"] = rel
            flags["base_times_height"] = rel <= 1e-6
        # interlacing
        B = np.where(rng.integers(0, 2, size=(n, n)) == 1, 1.0, -1.0)
        k = int(rng.integers(1, min(5, n - 1) + 1))
        inter = singular.interlacing_check(B, k)
        stats["interlacing_k"] = k
        flags["interlacing"] = inter.ok
        # negative second moment on a full-rank wide draw
        for _ in range(20):
            C = np.where(rng.integers(0, 2, size=(max(2, n - 2), n + 3)) == 1,
                         1.0, -1.0)
            try:
                nsm = singular.negative_second_moment_check(C)
                break
            except ValueError:
                continue
        else:
            raise RuntimeError("could not draw a full-rank wide matrix")
        stats["nsm_gap"] = nsm.relative_gap
        flags["negative_second_moment"] = nsm.relative_gap <= 1e-6
        # cofactor identity at exact-integer scale
        nc = min(n, 7)
        for _ in range(50):
            Xc = rng.integers(0, 2, size=(nc, nc)) * 2 - 1
            if singular.det_int(Xc) != 0:
                break
        else:
            raise RuntimeError("could not draw a nonsingular sign matrix")
        a = rng.standard_normal(nc)
        a /= np.linalg.norm(a)
        resid = singular.cofactor_identity_check(Xc, a)
        stats["cofactor_residual"] = resid
        flags["cofactor"] = resid <= 1e-8
        return {"stats": stats, "flags": flags}

    results = _run_trials(trials, cfg.seed, worker, cfg.workers)
    records = [TrialRecord("identity-suite", i, cfg.seed,
                           params={"n": n, "s": s_fixed, "z": z},
                           **res) for i, res in enumerate(results)]
    names = ["reduction", "base_times_height", "interlacing",
             "negative_second_moment", "cofactor"]
    summary = {name: sum(r.flags[name] for r in records) for name in names}
    summary["trials"] = trials
    summary["all_pass"] = all(r.passed() for r in records)
    return records, summary


EXPERIMENTS = {
    "sample": run_sample,
    "esd": run_esd,
    "reduce": run_reduce,
    "logdet-compare": run_logdet_compare,
    "singvals": run_singvals,
    "smallball": run_smallball,
    "gap": run_gap,
    "talagrand": run_talagrand,
    "identity-suite": run_identity_suite,
}


@dataclass
class RunResult:
    records: list[TrialRecord]
    summary: dict
    store_path: Path
    ok: bool


def run(cfg: ExperimentConfig) -> RunResult:
    """Execute a named experiment: trials, persistence, summary."""
    if cfg.experiment not in EXPERIMENTS:
        raise UsageError(
            f"unknown experiment {cfg.experiment!r}; "
            f"choose from {sorted(EXPERIMENTS)}")
    out_dir = cfg.out_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    records, summary = EXPERIMENTS[cfg.experiment](cfg, out_dir)
    store = ResultStore(out_dir / "records.ndjson")
    store.extend(records)
    ok = all(r.passed() for r in records)
    return RunResult(records=records, summary=summary,
                     store_path=store.path, ok=ok)


def summarize(records: list[TrialRecord]) -> dict:
    """Recomputable roll-up of a record list: per-experiment trial counts,
    pass counts, and the mean of every scalar statistic."""
    out: dict = {}
    for rec in records:
        slot = out.setdefault(rec.experiment, {"trials": 0, "passed": 0,
                                               "scalar_means": {}})
        slot["trials"] += 1
        slot["passed"] += rec.passed()
        for key, val in rec.stats.items():
            if isinstance(val, (int, float)) and not isinstance(val, bool) \
                    and math.isfinite(float(val)):
                slot["scalar_means"].setdefault(key, []).append(float(val))
    for slot in out.values():
        slot["scalar_means"] = {
            k: statistics.fmean(v) for k, v in slot["scalar_means"].items()}
    return out


def export_figure1(records: list[TrialRecord] | None, out_dir: Path,
                   prefix: str = "figure1") -> list[Path]:
    """Eigenvalue CSVs from persisted esd records, one file per draw.

    Each file carries the reduced spectrum plus the outlier row (flagged in
    the record metadata).  With no esd records present, a single header-only
    file documents the empty export.
    """
    if records is None:
        raise UsageError("no records supplied; run the esd experiment first")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    esd_records = [r for r in records if r.experiment == "esd"]
    if not esd_records:
        paths.append(spectral.write_eigenvalue_csv(
            out_dir / f"{prefix}_empty.csv", np.array([], dtype=complex)))
        return paths
    for rec in esd_records:
        pts = [complex(re, im) for re, im in rec.stats["points"]]
        outlier = rec.stats.get("outlier")
        if outlier is not None:
            pts.append(complex(outlier[0], outlier[1]))
        paths.append(spectral.write_eigenvalue_csv(
            out_dir / f"{prefix}_draw{rec.trial_index}.csv",
            np.array(pts)))
    return paths
