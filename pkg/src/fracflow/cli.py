"""Command-line scenario runner: ``fracflow <mode> --config <path> [--out <dir>]``.

Every mode writes one or more CSV files plus a sibling ``.manifest`` per CSV.
Exit codes: 0 success, 2 configuration error, 3 solver error, 4 I/O error.
"""

import argparse
import json
import math
import os
import platform
import sys

import numpy as np
import scipy

from . import __version__, analytic, numeric, profiles
from ._backend import BACKEND
from .config import MODES, keys_help, load_config
from .errors import ConfigError, FracflowError, InvalidOrder, InvalidParams
from .specfun import ml_values

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4


def fmt(x):
    """12 significant digits, '.' decimal point, no negative zero."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x == 0.0:
        return "0"
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".12g")


def write_csv(path, header, rows):
    width = len(header)
    lines = [",".join(header)]
    for row in rows:
        if len(row) != width:
            raise ValueError(f"row of width {len(row)} under a {width}-column header")
        lines.append(",".join(fmt(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_manifest(path, cfg, csv_name, achieved):
    entries = {
        "output": csv_name,
        "mode": cfg.mode,
        "config_sha256": cfg.digest(),
        "fracflow_version": __version__,
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
        "python_version": platform.python_version(),
        "backend": BACKEND,
        "tol": fmt(cfg.tol),
    }
    for k, v in achieved.items():
        entries[k] = v if isinstance(v, str) else fmt(v)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(f"{k}={v}\n" for k, v in entries.items())


def emit(out_dir, cfg, name, header, rows, achieved=None):
    os.makedirs(out_dir, exist_ok=True)
    write_csv(os.path.join(out_dir, name), header, rows)
    stem = os.path.splitext(name)[0]
    write_manifest(os.path.join(out_dir, stem + ".manifest"), cfg, name, achieved or {})
    return os.path.join(out_dir, name)


def _field_rows(t, y, u):
    header = ["t"] + [fmt(v) for v in y]
    rows = [[ti] + list(ui) for ti, ui in zip(t, u)]
    return header, rows


def _grid(t_max, n):
    return np.arange(n + 1) * (t_max / n)


def _profile(cfg):
    return profiles.parse_profile(cfg.profile, cfg.h, cfg.base_dir)


def _bounded_problem(cfg):
    return analytic.BoundedProblem(cfg.alpha, cfg.mu0, cfg.h, _profile(cfg), cfg.n_modes)


def _solver_options(cfg, n_cells=None, dt=None):
    return numeric.SolverOptions(t_max=cfg.t_max, n_cells=n_cells or cfg.n_cells,
                                 dt=dt if dt is not None else cfg.dt,
                                 dt_safety=cfg.dt_safety, max_steps=cfg.max_steps,
                                 record_stride=cfg.record_stride,
                                 growth_bound=cfg.growth_bound)


# ---- modes ------------------------------------------------------------------

def run_ml_curve(cfg, out):
    n = max(1, round(cfg.t_max / cfg.dt_out))
    t = np.arange(n + 1) * cfg.dt_out
    cols, summary, worst = [], [], 0.0
    for g in cfg.gammas:
        vals, errs = ml_values(g, 1.0, -(t ** g), cfg.tol)
        cols.append(vals)
        worst = max(worst, float(np.max(errs)))
        zc = analytic.first_zero_crossing(t, vals)
        n_ext = analytic.local_extrema(t, vals)[0].size
        summary.append(f"gamma={fmt(g)} first_zero_crossing={fmt(zc) or 'none'}"
                       f" extrema={n_ext}")
    header = ["t"] + [f"E_{fmt(g)}" for g in cfg.gammas]
    rows = np.column_stack([t] + cols).tolist()
    emit(out, cfg, "ml_curve.csv", header, rows, {"est_abs_error": worst})
    return summary


def run_bounded(cfg, out):
    prob = _bounded_problem(cfg)
    y = _grid(cfg.h, cfg.n_y)
    t = _grid(cfg.t_max, cfg.n_t)
    res, _ = analytic.solve_bounded(prob, y, t, cfg.tol, mode_tol=cfg.mode_tol,
                                    paper_literal_sqrt_mu0=cfg.paper_literal_sqrt_mu0)
    header, rows = _field_rows(t, y, res.u)
    emit(out, cfg, "field.csv", header, rows,
         {"est_abs_error": res.est_abs_error, "tail_estimate": res.info["tail_estimate"],
          "n_modes": cfg.n_modes, "profile": prob.profile.describe()})
    return [f"max_abs_u_final={fmt(np.max(np.abs(res.u[-1])))}"]


def run_unbounded(cfg, out):
    prob = analytic.UnboundedProblem(cfg.alpha, cfg.mu0, _profile(cfg))
    y = cfg.y_min + (cfg.y_max - cfg.y_min) * np.arange(cfg.n_y + 1) / cfg.n_y
    t = _grid(cfg.t_max, cfg.n_t)
    res = analytic.solve_unbounded(prob, y, t, cfg.tol)
    header, rows = _field_rows(t, y, res.u)
    emit(out, cfg, "field.csv", header, rows,
         {"est_abs_error": res.est_abs_error, "panels": res.info["panels"],
          "profile": prob.profile.describe()})
    return [f"max_abs_u_final={fmt(np.max(np.abs(res.u[-1])))}"]


def run_plug(cfg, out):
    prob = analytic.plug_flow_problem(cfg.alpha, cfg.mu0, cfg.h, cfg.U0, cfg.n_modes)
    y = _grid(cfg.h, cfg.n_y)
    t = _grid(cfg.t_max, cfg.n_t)
    flag = cfg.paper_literal_sqrt_mu0
    res, _ = analytic.plug_flow(prob, y, t, cfg.tol, mode_tol=cfg.mode_tol,
                                paper_literal_sqrt_mu0=flag)
    zc = analytic.centerline_zero_crossing(prob, cfg.crossing_t_max, cfg.tol,
                                           paper_literal_sqrt_mu0=flag)
    header, rows = _field_rows(t, y, res.u)
    zc_text = fmt(zc) if zc is not None else "none"
    emit(out, cfg, "field.csv", header, rows,
         {"est_abs_error": res.est_abs_error, "tail_estimate": res.info["tail_estimate"],
          "n_modes": cfg.n_modes, "first_centerline_zero_crossing": zc_text})
    return [f"first_centerline_zero_crossing={zc_text}"]


def run_converge(cfg, out):
    prob = _bounded_problem(cfg)
    opts = _solver_options(cfg)
    rep = numeric.convergence_study(prob, cfg.ladder, opts, t_min=cfg.t_min, tol=cfg.tol,
                                    paper_literal_sqrt_mu0=cfg.paper_literal_sqrt_mu0)
    emit(out, cfg, "convergence_space.csv", ["n_cells", "dy", "max_error", "order"],
         rep.rows(), {"n_steps_base": rep.info["n_steps_base"], "t_min": cfg.t_min})
    time_rows = [[rep.dt[k], rep.time_differences[k]] for k in range(2)]
    emit(out, cfg, "convergence_time.csv", ["dt", "max_successive_difference"], time_rows,
         {"time_order": rep.time_order, "n_cells": cfg.ladder[-1]})
    orders = ",".join(fmt(round(o, 3)) for o in rep.space_orders)
    return [f"space_orders={orders}", f"time_order={fmt(round(rep.time_order, 3))}"]


def run_residual(cfg, out):
    prob = _bounded_problem(cfg)
    if cfg.residual_source == "numeric":
        hist = numeric.solve(prob, _solver_options(cfg))
        info = {"steps": hist.diagnostics["steps"], "dt": hist.diagnostics["dt"]}
    else:
        y = _grid(cfg.h, cfg.n_cells)
        t = _grid(cfg.t_max, cfg.residual_n_t)
        res, _ = analytic.solve_bounded(prob, y, t, cfg.tol, mode_tol=math.inf)
        hist = numeric.FieldHistory.from_samples(cfg.h, cfg.t_max / cfg.residual_n_t, res.u)
        info = {"dt": cfg.t_max / cfg.residual_n_t}
    rep = numeric.residual_check(hist, cfg.alpha, cfg.mu0)
    rows = np.column_stack([rep.times, rep.max_norm, rep.l2_norm]).tolist()
    worst = rep.window(cfg.t_min)
    info.update({"source": cfg.residual_source, "t_min": cfg.t_min,
                 "max_residual": float(np.max(worst)) if worst.size else math.nan})
    emit(out, cfg, "residual.csv", ["t", "max_norm", "l2_norm"], rows, info)
    return [f"max_residual={fmt(info['max_residual'])}"]


def _self_compare(cfg, prob):
    """The series against a second, independent evaluation of itself."""
    grid = numeric.SpatialGrid(cfg.h, cfg.n_cells)
    n, dt = numeric._steps(prob, grid, _solver_options(cfg))
    t = np.arange(n + 1) * dt
    kw = {"mode_tol": math.inf, "paper_literal_sqrt_mu0": cfg.paper_literal_sqrt_mu0}
    a, _ = analytic.solve_bounded(prob, grid.nodes, t, cfg.tol, **kw)
    b, _ = analytic.solve_bounded(prob, grid.nodes, t, cfg.tol, **kw)
    hist = numeric.FieldHistory.from_samples(cfg.h, dt, a.u)
    hist.diagnostics.update({"steps": n, "dt": dt, "dy": grid.dy})
    diff = a.u - b.u
    max_err = np.max(np.abs(diff), axis=1)
    l2_err = np.sqrt(grid.dy * np.sum(diff * diff, axis=1))
    return hist, max_err, l2_err, float(np.max(max_err[t >= cfg.t_min]))


def run_compare(cfg, out):
    prob = _bounded_problem(cfg)
    flag = cfg.paper_literal_sqrt_mu0
    if cfg.compare_with == "analytic":
        hist, max_err, l2_err, worst = _self_compare(cfg, prob)
    else:
        hist, _, max_err, l2_err, worst = numeric.compare_with_analytic(
            prob, _solver_options(cfg), t_min=cfg.t_min, tol=cfg.tol,
            paper_literal_sqrt_mu0=flag)
    rows = np.column_stack([hist.times, max_err, l2_err]).tolist()
    emit(out, cfg, "compare.csv", ["t", "max_abs_error", "l2_error"], rows,
         {"steps": hist.diagnostics["steps"], "dt": hist.diagnostics["dt"],
          "dy": hist.diagnostics["dy"], "max_error": worst, "t_min": cfg.t_min})
    lines = [f"max_error={fmt(worst)}"]
    if cfg.ladder:
        table, prev = [], None
        for n_cells in cfg.ladder:
            h, _, _, _, w = numeric.compare_with_analytic(
                prob, _solver_options(cfg, n_cells=n_cells), t_min=cfg.t_min, tol=cfg.tol,
                paper_literal_sqrt_mu0=flag)
            order = math.log2(prev / w) if prev and w > 0 else math.nan
            table.append([n_cells, h.diagnostics["dy"], h.diagnostics["dt"], w, order])
            prev = w
        emit(out, cfg, "compare_ladder.csv", ["n_cells", "dy", "dt", "max_error", "order"],
             table, {"t_min": cfg.t_min})
        lines.append("ladder_errors=" + ",".join(fmt(r[3]) for r in table))
    return lines


RUNNERS = {
    "ml-curve": run_ml_curve,
    "bounded": run_bounded,
    "unbounded": run_unbounded,
    "plug": run_plug,
    "converge": run_converge,
    "residual": run_residual,
    "compare": run_compare,
}


def run(cfg, out_dir=None):
    """Run one scenario; returns the summary lines. Raises on failure."""
    out = out_dir or cfg.output_dir
    if not os.path.isabs(out) and cfg.base_dir and out_dir is None:
        out = os.path.join(cfg.base_dir, out)
    return RUNNERS[cfg.mode](cfg, out)


def build_parser():
    p = argparse.ArgumentParser(
        prog="fracflow",
        description="Fractional-memory viscous flow scenarios: analytic series, "
                    "Wright-kernel convolution and explicit time marching.",
        epilog=keys_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", required=True, help="key=value scenario file")
    p.add_argument("--out", default=None, help="output directory (overrides output_dir)")
    return p


def _fail(kind, code, message):
    line = json.dumps({"status": "error", "kind": kind, "exit_code": code,
                       "message": str(message)}, sort_keys=True)
    print(line, file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.mode)
        lines = run(cfg, args.out)
    except (ConfigError, InvalidParams, InvalidOrder) as exc:
        return _fail(type(exc).__name__, EXIT_CONFIG, exc)
    except FracflowError as exc:
        return _fail(type(exc).__name__, EXIT_SOLVER, exc)
    except OSError as exc:
        return _fail("IoError", EXIT_IO, exc)
    for line in lines:
        print(line)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
