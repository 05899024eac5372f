"""Run experiments over seeded path ensembles, optionally across processes.

Path ``i`` always draws its fBm from the stream ``(seed, i)`` and results are
merged in index order, so outputs do not depend on the number of workers.
BLAS threads are pinned to one per process for the same reason.
"""

from __future__ import annotations

import datetime as _dt
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .. import __version__
from ..bounds import (BoundKind, BoundParams, b0_alpha, calibrate_constant, eval_bound,
                      eval_log_bound, scaling_experiment)
from ..fbm import covariance_rh, get_sampler, path_rng
from ..fraccalc import rs_integral_forpart, rs_integral_sums
from ..grid import SampledPath, TimeGrid, holder_norm, sup_norm
from ..malliavin import (density_lattice, fd_gradient_check, gamma_spectrum, kde_density,
                         malliavin_field, malliavin_matrix, sup_moments)
from ..volterra import solve_linear_z, solve_svie
from .config import ExperimentConfig, ExperimentKind
from .io import RunManifest, write_results

_BOUND_KIND = {
    ExperimentKind.BOUND_BOUNDED_SIGMA: BoundKind.BOUNDED_SIGMA,
    ExperimentKind.BOUND_GENERAL: BoundKind.GENERAL,
    ExperimentKind.BOUND_LINEAR_SYSTEM: BoundKind.LINEAR_SYSTEM,
}
EPS_LADDER = (1e-2, 1e-3, 1e-4)


def _driver(cfg: ExperimentConfig, index: int, m: int) -> SampledPath:
    return get_sampler(cfg.T, cfg.n, cfg.hurst).sample(path_rng(cfg.seed, index), m)


def _x0(cfg, d):
    return np.broadcast_to(np.asarray(cfg.x0, dtype=float), (d,)).copy()


# ---- per-path work -------------------------------------------------------

def _path_fbm(cfg, i, coeffs):
    W = _driver(cfg, i, 1)
    v = W.values[:, 0]
    return {"index": i, "w_T": v[-1], "sup_abs": np.abs(v).max()}, v


def _path_integral(cfg, i, coeffs):
    W = _driver(cfg, i, 1)
    closed = 0.5 * W.values[-1, 0] ** 2
    fp = float(rs_integral_forpart(W, W, alpha=cfg.alpha)[0])
    rs = float(rs_integral_sums(W, W)[0])
    return {"index": i, "closed_form": closed, "forpart": fp, "sums": rs,
            "gap_forpart": abs(fp - closed), "gap_sums": abs(rs - closed)}, None


def _path_bound(cfg, i, coeffs):
    W = _driver(cfg, i, coeffs.m)
    x0 = _x0(cfg, coeffs.d)
    x = solve_svie(coeffs, x0, W)
    row = {"index": i, "x0_norm": float(np.linalg.norm(x0)),
           "g_norm": holder_norm(W, 1.0 - cfg.alpha)}
    if cfg.kind is ExperimentKind.BOUND_LINEAR_SYSTEM:
        ones = SampledPath(W.grid, np.ones((W.grid.n + 1, coeffs.d)))
        lin = coeffs.with_linear_system(ones)
        z = solve_linear_z(lin, x, W)
        row["measured"] = sup_norm(z)
    else:
        row["measured"] = sup_norm(x)
    return row, None


def _path_gradient(cfg, i, coeffs):
    W = _driver(cfg, i, coeffs.m)
    h = SampledPath(W.grid, np.repeat(W.grid.nodes[:, None], coeffs.m, axis=1))
    rep = fd_gradient_check(coeffs, _x0(cfg, coeffs.d), W, h, EPS_LADDER)
    row = {"index": i}
    for e, gap in zip(rep.eps, rep.gaps):
        row[f"gap_{e:g}"] = gap
    row.update(slope=rep.slope, exact=rep.exact, passed=rep.passed)
    return row, None


def _path_density(cfg, i, coeffs):
    W = _driver(cfg, i, coeffs.m)
    x = solve_svie(coeffs, _x0(cfg, coeffs.d), W)
    D = malliavin_field(coeffs, x, W)
    lam, det = gamma_spectrum(malliavin_matrix(D, W.grid.n, cfg.hurst))
    row = {"index": i}
    for k in range(coeffs.d):
        row[f"x_T_{k}"] = x.values[-1, k]
    row.update(sup_norm=sup_norm(x), min_eig=lam, det=det)
    return row, x.values[-1].copy()


def _path_scaling(cfg, i, coeffs):
    W = _driver(cfg, i, coeffs.m)
    res = scaling_experiment(coeffs, _x0(cfg, coeffs.d), W, cfg.lambdas)
    row = {"index": i, "poly_slope": res.poly_slope, "loglog_slope": res.loglog_slope,
           "poly_rss": res.poly_rss, "exp_rss": res.exp_rss,
           "prefers_exponential": res.prefers_exponential, "truncated": res.truncated}
    return row, list(zip(res.lambdas.tolist(), res.sup_norms.tolist()))


_PATH_FN = {
    ExperimentKind.FBM: _path_fbm,
    ExperimentKind.INTEGRAL: _path_integral,
    ExperimentKind.GRADIENT: _path_gradient,
    ExperimentKind.DENSITY: _path_density,
    ExperimentKind.SCALING: _path_scaling,
    ExperimentKind.BOUND_BOUNDED_SIGMA: _path_bound,
    ExperimentKind.BOUND_GENERAL: _path_bound,
    ExperimentKind.BOUND_LINEAR_SYSTEM: _path_bound,
}


def run_chunk(cfg: ExperimentConfig, lo: int, hi: int):
    """Per-path results for indices ``lo..hi-1``, in order."""
    coeffs = cfg.coefficients()
    fn = _PATH_FN[cfg.kind]
    with threadpool_limits(1):
        return [fn(cfg, i, coeffs) for i in range(lo, hi)]


def _chunks(N, workers):
    size = max(1, math.ceil(N / (4 * workers)))
    return [(lo, min(N, lo + size)) for lo in range(0, N, size)]


def collect(cfg: ExperimentConfig, workers: int = 1):
    """Run every path; returns ``(results, error)`` where ``results`` holds the
    in-order prefix that completed before any failure."""
    chunks = _chunks(cfg.paths, workers)
    results, error = [], None
    if workers <= 1:
        for lo, hi in chunks:
            try:
                results.extend(run_chunk(cfg, lo, hi))
            except Exception as exc:  # flushed as a partial run
                error = f"paths {lo}..{hi - 1}: {type(exc).__name__}: {exc}"
                break
        return results, error
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_chunk, cfg, lo, hi) for lo, hi in chunks]
        for (lo, hi), fut in zip(chunks, futures):
            try:
                results.extend(fut.result())
            except Exception as exc:
                error = f"paths {lo}..{hi - 1}: {type(exc).__name__}: {exc}"
                for f in futures:
                    f.cancel()
                break
    return results, error


# ---- ensemble summaries --------------------------------------------------

def _summarise_fbm(cfg, results):
    paths = np.array([p for _, p in results])[:, 1:]
    N = paths.shape[0]
    t = TimeGrid(cfg.T, cfg.n).nodes[1:]
    exact = covariance_rh(t[:, None], t[None, :], cfg.hurst)
    # first and second moments of the products x_i x_j without forming them
    emp = paths.T @ paths / N
    err = np.abs(emp - exact)
    if N > 1:
        sq = paths ** 2
        var = np.maximum(sq.T @ sq / N - emp ** 2, 0.0) * N / (N - 1)
        stderr = np.sqrt(var / N)
    else:
        stderr = np.full_like(emp, np.nan)
    worst_se = float(np.nanmax(stderr)) if N > 1 else float("nan")
    table = [{"t_index": a + 1, "s_index": b + 1, "empirical": emp[a, b], "exact": exact[a, b],
              "stderr": stderr[a, b]} for a in range(len(t)) for b in range(a + 1)]
    summary = {"max_abs_error": float(err.max()), "max_stderr": worst_se,
               "error_in_stderr_units": float(err.max() / worst_se) if N > 1 else None,
               "passed": bool(N > 1 and err.max() <= 4.0 * worst_se)}
    return [r for r, _ in results], summary, {
        "covariance": (["t_index", "s_index", "empirical", "exact", "stderr"], table)}


def _summarise_integral(cfg, results):
    rows = [r for r, _ in results]
    fp = np.array([r["gap_forpart"] for r in rows])
    rs = np.array([r["gap_sums"] for r in rows])
    return rows, {"median_gap_forpart": float(np.median(fp)), "max_gap_forpart": float(fp.max()),
                  "median_gap_sums": float(np.median(rs)), "max_gap_sums": float(rs.max())}, {}


def _summarise_bound(cfg, results, coeffs):
    rows = [dict(r) for r, _ in results]
    kind = _BOUND_KIND[cfg.kind]
    grid = TimeGrid(cfg.T, cfg.n)
    B0 = b0_alpha(coeffs.b0, cfg.alpha, cfg.T, grid)
    consts = coeffs.constants
    fixed = BoundParams.from_coefficients(coeffs, cfg.T, cfg.alpha, C=1.0, B0=B0)
    if kind is BoundKind.LINEAR_SYSTEM:
        fixed = replace(fixed, w_sup=1.0)
    ensemble = [(r["measured"], r["g_norm"], r["x0_norm"]) for r in rows]
    C = calibrate_constant(kind, fixed, ensemble)
    params = replace(fixed, C=C)
    for r in rows:
        r["rhs"] = eval_bound(kind, params, r["x0_norm"], r["g_norm"])
        r["log_rhs"] = eval_log_bound(kind, params, r["x0_norm"], r["g_norm"])
        r["ratio"] = r["measured"] / r["rhs"]
    summary = {"bound": kind.value, "calibrated_C": C, "B0_alpha": B0,
               "max_ratio": max(r["ratio"] for r in rows),
               "constants": {"K": consts.K, "L": consts.L, "L0": consts.L0,
                             "sigma_sup": consts.sigma_sup, "h_sup": consts.h_sup,
                             "f_sup": consts.f_sup}}
    return rows, summary, {}


def _summarise_gradient(cfg, results):
    rows = [r for r, _ in results]
    slopes = [r["slope"] for r in rows if not r["exact"]]
    return rows, {"passed_paths": sum(bool(r["passed"]) for r in rows), "paths": len(rows),
                  "exact_paths": sum(bool(r["exact"]) for r in rows),
                  "min_slope": min(slopes) if slopes else None,
                  "max_slope": max(slopes) if slopes else None}, {}


def _summarise_density(cfg, results, coeffs):
    rows = [r for r, _ in results]
    xs = np.array([p for _, p in results])
    sups = np.array([r["sup_norm"] for r in rows])
    summary = {"positive_min_eig": int(sum(r["min_eig"] > 0 for r in rows)), "paths": len(rows),
               "moments": sup_moments(sups)}
    tables = {}
    if len(rows) >= 100 and np.all(xs.std(axis=0) > 0):
        num = cfg.density_points if coeffs.d == 1 else min(cfg.density_points, 61)
        pts, vol = density_lattice(xs, num=num)
        est = kde_density(xs, pts, cell_volume=vol)
        summary["density_mass"] = est.mass()
        summary["bandwidth"] = est.bandwidth.tolist()
        cols = [f"x_{k}" for k in range(coeffs.d)] + ["density"]
        trows = [dict(zip(cols, (*p, v))) for p, v in zip(est.points, est.values)]
        tables["density"] = (cols, trows)
    else:
        summary["density_mass"] = None
    return rows, summary, tables


def _summarise_scaling(cfg, results):
    rows = [r for r, _ in results]
    table = [{"index": r["index"], "lambda": la, "sup_norm": s}
             for (r, pts) in results for la, s in pts]
    return rows, {"median_poly_slope": float(np.median([r["poly_slope"] for r in rows])),
                  "median_loglog_slope": float(np.median([r["loglog_slope"] for r in rows])),
                  "prefers_exponential": int(sum(r["prefers_exponential"] for r in rows)),
                  "truncated": int(sum(r["truncated"] for r in rows)), "paths": len(rows)}, {
        "scaling": (["index", "lambda", "sup_norm"], table)}


def summarise(cfg: ExperimentConfig, results):
    coeffs = cfg.coefficients()
    if not results:
        return [], {}, {}
    if cfg.kind is ExperimentKind.FBM:
        return _summarise_fbm(cfg, results)
    if cfg.kind is ExperimentKind.INTEGRAL:
        return _summarise_integral(cfg, results)
    if cfg.kind.is_bound:
        return _summarise_bound(cfg, results, coeffs)
    if cfg.kind is ExperimentKind.GRADIENT:
        return _summarise_gradient(cfg, results)
    if cfg.kind is ExperimentKind.DENSITY:
        return _summarise_density(cfg, results, coeffs)
    return _summarise_scaling(cfg, results)


def columns_for(cfg: ExperimentConfig) -> list[str]:
    """CSV header for the per-path table (known even when no rows exist)."""
    k = cfg.kind
    if k is ExperimentKind.FBM:
        return ["index", "w_T", "sup_abs"]
    if k is ExperimentKind.INTEGRAL:
        return ["index", "closed_form", "forpart", "sums", "gap_forpart", "gap_sums"]
    if k.is_bound:
        return ["index", "x0_norm", "g_norm", "measured", "rhs", "log_rhs", "ratio"]
    if k is ExperimentKind.GRADIENT:
        return ["index"] + [f"gap_{e:g}" for e in EPS_LADDER] + ["slope", "exact", "passed"]
    if k is ExperimentKind.DENSITY:
        return ["index"] + [f"x_T_{j}" for j in range(cfg.d)] + ["sup_norm", "min_eig", "det"]
    return ["index", "poly_slope", "loglog_slope", "poly_rss", "exp_rss",
            "prefers_exponential", "truncated"]


def run_experiment(cfg: ExperimentConfig, out_dir=None, workers: int = 1) -> RunManifest:
    """Execute ``cfg`` and write its outputs; returns the manifest.

    On a worker failure the completed prefix of paths is still written and
    the manifest is marked incomplete.
    """
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    results, error = collect(cfg, workers)
    rows, summary, tables = summarise(cfg, results)
    summary = {"experiment": cfg.kind.value, "paths_requested": cfg.paths,
               "paths_completed": len(results), **summary}
    manifest = RunManifest(config_hash=cfg.config_hash(), code_version=__version__,
                           timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
                           complete=error is None, error=error)
    return write_results(columns_for(cfg), rows, summary, manifest, out, tables)
