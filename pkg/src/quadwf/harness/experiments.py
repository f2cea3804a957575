"""Batch experiments: initializer closeness, phase transition, image recovery,
spectral-vs-random initialization and the SVD-vs-power-method benchmark.

Every trial is seeded from ``(base_seed, q, m/n, trial)`` alone, so trials
can run in any order or in parallel and still give the same records.
"""
import csv
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from importlib import resources
from pathlib import Path

import numpy as np

from ..ensemble import EnsembleSpec, build_ensemble, sample_gaussian_spectral_statistics
from ..flow import SolverConfig, wf_run
from ..linalg import aligned_distance, relative_distance
from ..spectral import build_S, estimate_norm4, init_from_spectral_matrix, leading_right_vector
from .ppm import load_ppm, save_ppm

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
TIMING_COLUMNS = ("wall_time_ms", "mean_wall_time_ms")


@dataclass
class TrialRecord:
    schema_version: int
    kind: str
    q: float
    m_over_n: float
    n: int
    m: int
    trial_index: int
    seed: int
    init_method: str
    init_rel_distance: float
    final_rel_distance: float
    iters: int
    termination: str
    success: bool
    wall_time_ms: float


@dataclass
class ImageRecord:
    schema_version: int
    kind: str
    channel: str
    m_over_n: float
    n: int
    m: int
    seed: int
    init_rel_distance: float
    final_rel_distance: float
    init_rel_error: float
    final_rel_error: float
    iters: int
    termination: str
    success: bool
    wall_time_ms: float


def _milli(v):
    return int(round(float(v) * 1000))


def trial_seed(base_seed, q, m_over_n, trial):
    """64-bit seed for one trial, independent of execution order."""
    ss = np.random.SeedSequence([int(base_seed), _milli(m_over_n), _milli(q + 1.0), int(trial)])
    return int(ss.generate_state(1, np.uint64)[0])


def trial_streams(seed):
    """``(signal_rng, ensemble_base_seed, aux_rng)`` derived from a trial seed."""
    sig, ens, aux = np.random.SeedSequence(seed).spawn(3)
    return (np.random.default_rng(sig), int(ens.generate_state(1, np.uint64)[0]),
            np.random.default_rng(aux))


def random_signal(n, rng):
    """Standard complex Gaussian vector (``E|x_i|^2 = 1``)."""
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)


def _solver_config(cfg):
    return SolverConfig(**cfg.solver)


def _m_for(n, ratio):
    return max(1, int(round(ratio * n)))


def _map(fn, tasks, n_jobs):
    if n_jobs == 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, tasks))


def _cells(cfg):
    for q in cfg.q_values:
        for ratio in cfg.m_over_n_grid:
            for t in range(cfg.trials):
                yield (cfg, float(q), float(ratio), t)


# -- trial bodies (module level so they pickle) --------------------------

def _init_closeness_trial(task):
    cfg, q, ratio, t = task
    seed = trial_seed(cfg.base_seed, q, ratio, t)
    sig_rng, ens_seed, _ = trial_streams(seed)
    x = random_signal(cfg.n, sig_rng)
    m = _m_for(cfg.n, ratio)
    ens = build_ensemble(EnsembleSpec(cfg.n, m, q, ens_seed), x)
    start = time.perf_counter()
    S = build_S(ens)
    z0 = init_from_spectral_matrix(S, norm4=estimate_norm4(ens), power_iters=cfg.power_iters).z0
    elapsed = 1000.0 * (time.perf_counter() - start)
    d = relative_distance(z0, x)
    return TrialRecord(SCHEMA_VERSION, cfg.kind, q, ratio, cfg.n, m, t, seed, "spectral",
                       d, d, 0, "none", d < cfg.success_tol, elapsed)


def _recovery_trial(task, init_method="spectral"):
    cfg, q, ratio, t = task
    seed = trial_seed(cfg.base_seed, q, ratio, t)
    sig_rng, ens_seed, aux_rng = trial_streams(seed)
    x = random_signal(cfg.n, sig_rng)
    m = _m_for(cfg.n, ratio)
    ens = build_ensemble(EnsembleSpec(cfg.n, m, q, ens_seed), x)
    start = time.perf_counter()
    norm4 = estimate_norm4(ens)
    if init_method == "spectral":
        z0 = init_from_spectral_matrix(build_S(ens), norm4=norm4, power_iters=cfg.power_iters).z0
    else:
        z0 = random_signal(cfg.n, aux_rng)
        z0 *= norm4**0.25 / np.linalg.norm(z0)
    res = wf_run(z0, ens, _solver_config(cfg))
    elapsed = 1000.0 * (time.perf_counter() - start)
    final = relative_distance(res.z_final, x)
    return TrialRecord(SCHEMA_VERSION, cfg.kind, q, ratio, cfg.n, m, t, seed, init_method,
                       relative_distance(z0, x), final, res.iters, res.termination,
                       final < cfg.success_tol, elapsed)


def _random_recovery_trial(task):
    return _recovery_trial(task, init_method="random")


# -- experiments ---------------------------------------------------------

def run_init_closeness(cfg):
    """Relative distance of the spectral initializer for every (q, m/n) cell."""
    return _map(_init_closeness_trial, list(_cells(cfg)), cfg.n_jobs)


def run_phase_transition(cfg):
    """WF success (final relative distance < success_tol) for every (q, m/n) cell."""
    return _map(_recovery_trial, list(_cells(cfg)), cfg.n_jobs)


def run_init_comparison(cfg):
    """Paired spectral vs random initialization; both arms share each trial's data."""
    tasks = list(_cells(cfg))
    spectral = _map(_recovery_trial, tasks, cfg.n_jobs)
    random_ = _map(_random_recovery_trial, tasks, cfg.n_jobs)
    return [rec for pair in zip(spectral, random_) for rec in pair]


def run_bench_init(cfg):
    """Time full SVD against power iteration for the leading singular vector.

    Only the singular-vector extraction and scaling are timed. For ``q = 0``
    the spectral matrix is drawn through its sufficient statistics, since the
    explicit ensemble at ``n = 2000, m = 4n`` would need ~0.5 TB.
    """
    records = []
    for q in cfg.q_values:
        for n in cfg.n_grid:
            for ratio in cfg.m_over_n_grid:
                m = _m_for(n, ratio)
                for t in range(cfg.trials):
                    seed = trial_seed(cfg.base_seed, q, ratio, 1_000_000 * n + t)
                    sig_rng, ens_seed, aux_rng = trial_streams(seed)
                    x = random_signal(n, sig_rng)
                    if q == 0.0:
                        S, norm4 = sample_gaussian_spectral_statistics(x, m, aux_rng)
                    else:
                        ens = build_ensemble(EnsembleSpec(n, m, q, ens_seed), x)
                        S, norm4 = build_S(ens), estimate_norm4(ens)
                        del ens
                    for method in ("svd", "power"):
                        start = time.perf_counter()
                        v0, iters = leading_right_vector(S, method, cfg.power_iters)
                        z0 = norm4**0.25 * v0
                        elapsed = 1000.0 * (time.perf_counter() - start)
                        d = relative_distance(z0, x)
                        records.append(TrialRecord(
                            SCHEMA_VERSION, cfg.kind, float(q), float(ratio), n, m, t, seed,
                            method, d, d, iters if method == "power" else 0, "none",
                            d < cfg.success_tol, elapsed))
                        logger.info("bench n=%d trial=%d %s %.1f ms dist=%.4f",
                                    n, t, method, elapsed, d)
    return records


def bundled_image_path():
    return str(resources.files("quadwf") / "data" / "logo_22x15.ppm")


def run_image_recovery(image_path, cfg, image_out_dir=None):
    """Recover each color channel separately from Gaussian (q = 0) measurements.

    Returns per-channel records plus an ``all`` row aggregating the image.
    Recovered magnitudes are written as ``<stem>_m<ratio>.ppm`` next to the
    CSV (or in ``image_out_dir``).
    """
    image_path = image_path or cfg.image_path or bundled_image_path()
    channels, width, height = load_ppm(image_path)
    n = width * height
    solver = _solver_config(cfg)
    out_dir = Path(image_out_dir or Path(cfg.output_path).parent)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(cfg.output_path).stem
    records = []
    for ratio in cfg.m_over_n_grid:
        m = _m_for(n, ratio)
        init_mags, final_mags = np.empty_like(channels), np.empty_like(channels)
        sq = {"init": 0.0, "final": 0.0}
        for c, name in enumerate("RGB"):
            x = channels[c].astype(np.complex128)
            seed = trial_seed(cfg.base_seed, 0.0, ratio, c)
            _, ens_seed, _ = trial_streams(seed)
            ens = build_ensemble(EnsembleSpec(n, m, 0.0, ens_seed), x)
            start = time.perf_counter()
            z0 = init_from_spectral_matrix(build_S(ens), norm4=estimate_norm4(ens),
                                           power_iters=cfg.power_iters).z0
            res = wf_run(z0, ens, solver)
            elapsed = 1000.0 * (time.perf_counter() - start)
            del ens
            xr = channels[c]
            xn = np.linalg.norm(xr)
            init_mags[c], final_mags[c] = np.abs(z0), np.abs(res.z_final)
            d0, d1 = aligned_distance(z0, x).distance, aligned_distance(res.z_final, x).distance
            sq["init"] += d0**2
            sq["final"] += d1**2
            final_rel = d1 / xn
            records.append(ImageRecord(
                SCHEMA_VERSION, cfg.kind, name, float(ratio), n, m, seed, d0 / xn, final_rel,
                float(np.linalg.norm(init_mags[c] - xr) / xn),
                float(np.linalg.norm(final_mags[c] - xr) / xn),
                res.iters, res.termination, final_rel < cfg.success_tol, elapsed))
            logger.info("image m/n=%g channel %s: %d iters, rel dist %.3e",
                        ratio, name, res.iters, final_rel)
        total = np.linalg.norm(channels)
        final_all = float(np.sqrt(sq["final"]) / total)
        records.append(ImageRecord(
            SCHEMA_VERSION, cfg.kind, "all", float(ratio), n, m, 0,
            float(np.sqrt(sq["init"]) / total), final_all,
            float(np.linalg.norm(init_mags - channels) / total),
            float(np.linalg.norm(final_mags - channels) / total),
            sum(r.iters for r in records[-3:]), "none", final_all < cfg.success_tol,
            sum(r.wall_time_ms for r in records[-3:])))
        save_ppm(out_dir / f"{stem}_m{ratio:g}.ppm", final_mags, width, height)
        save_ppm(out_dir / f"{stem}_m{ratio:g}_init.ppm", init_mags, width, height)
    return records


# -- output --------------------------------------------------------------

def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(records, path):
    if not records:
        raise ValueError("no records to write")
    cols = [f.name for f in fields(records[0])]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for rec in records:
            row = asdict(rec)
            w.writerow(_fmt(row[c]) for c in cols)
    return path


def summarize(records):
    """Per-cell means keyed by (kind, q, m/n, n, init_method)."""
    groups = {}
    for r in records:
        key = (r.kind, r.q, r.m_over_n, r.n, r.init_method)
        groups.setdefault(key, []).append(r)
    rows = []
    for (kind, q, ratio, n, method), recs in groups.items():
        rows.append({
            "schema_version": SCHEMA_VERSION, "kind": kind, "q": q, "m_over_n": ratio, "n": n,
            "init_method": method, "trials": len(recs),
            "mean_init_rel_distance": float(np.mean([r.init_rel_distance for r in recs])),
            "mean_final_rel_distance": float(np.mean([r.final_rel_distance for r in recs])),
            "success_rate": float(np.mean([r.success for r in recs])),
            "mean_wall_time_ms": float(np.mean([r.wall_time_ms for r in recs])),
        })
    return rows


def write_summary_csv(rows, path):
    cols = list(rows[0])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            w.writerow(_fmt(row[c]) for c in cols)
    return Path(path)


def summary_path(path):
    path = Path(path)
    return path.with_name(path.stem + "_summary" + path.suffix)


def read_csv(path, drop_timing=False):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if drop_timing:
        for row in rows:
            for c in TIMING_COLUMNS:
                row.pop(c, None)
    return rows


def transition_midpoint(ratios, rates):
    """Smallest m/n at which the success rate reaches 0.5 (linear interpolation)."""
    pts = sorted(zip(ratios, rates))
    prev = None
    for r, s in pts:
        if s >= 0.5:
            if prev is None or prev[1] >= 0.5:
                return float(r)
            (r0, s0) = prev
            return float(r0 + (0.5 - s0) * (r - r0) / (s - s0))
        prev = (r, s)
    return None


RUNNERS = {
    "init_closeness": run_init_closeness,
    "phase_transition": run_phase_transition,
    "init_comparison": run_init_comparison,
    "bench_init": run_bench_init,
}


def run_experiment(cfg, image_path=None):
    """Run ``cfg``, write its CSV and summary CSV, and return the records."""
    out = Path(cfg.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    if not os.access(out.parent, os.W_OK) or (out.exists() and not os.access(out, os.W_OK)):
        raise PermissionError(f"cannot write to {out}")
    if cfg.kind == "image_recovery":
        records = run_image_recovery(image_path, cfg)
    else:
        records = RUNNERS[cfg.kind](cfg)
    write_csv(records, out)
    if cfg.kind != "image_recovery":
        write_summary_csv(summarize(records), summary_path(out))
    return records
