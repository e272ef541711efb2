"""Command-line front end.

Reads a config file, runs the requested experiment, and writes a CSV, a JSON
summary, and (for the grid/curve commands) a PNG figure into the output
directory.  Exit codes: 0 ok, 1 config/validation error, 2 runtime failure,
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import plots, scan, systems
from .config import ParseError, RunConfig, ValidationError, parse_config
from .core import digit_accuracy, wba
from .odeint import IntegratorConfig
from .scan import ScanSpec, _fmt, run_scan, write_scan_csv, write_summary_json
from .weights import normalize

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_IO = 3

WORKERS_ENV = "WBAFLOW_WORKERS"


def _integrator_config(cfg: RunConfig):
    return IntegratorConfig(abs_tol=cfg.abs_tol, rel_tol=cfg.rel_tol,
                            initial_step=cfg.initial_step,
                            max_step=cfg.max_step)


def _build_system(cfg: RunConfig, **overrides):
    params = dict(cfg.params)
    params.update(overrides)
    if cfg.modes is not None:
        params["modes"] = cfg.modes
    return systems.make_system(cfg.system, params)


def _weight(cfg: RunConfig):
    return normalize(cfg.weight, cfg.width)


def _scan_spec(cfg: RunConfig, workers):
    params = dict(cfg.params)
    if cfg.modes is not None:
        params["modes"] = cfg.modes
    x0 = cfg.x0
    if x0 is None:
        dim = len(systems.make_system(cfg.system, params).coords)
        x0 = tuple(0.0 for _ in range(dim))
    return ScanSpec(system=cfg.system, params=params, x0=tuple(x0),
                    axis=cfg.axis, lo=cfg.lo, hi=cfg.hi, count=cfg.count,
                    T=cfg.T, observable=cfg.observable,
                    weight_kind=cfg.weight, weight_width=cfg.width,
                    threshold=cfg.threshold, cfg=_integrator_config(cfg),
                    workers=workers)


def _write_rows_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _summary_json(path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_wba(cfg, out, workers, quiet):
    system = _build_system(cfg)
    x0 = systems.initial_state(system, cfg.x0)
    result = wba(system, x0, system.observable(cfg.observable), _weight(cfg),
                 cfg.T, _integrator_config(cfg))
    _write_rows_csv(os.path.join(out, "wba.csv"),
                    "T,average,observable,weight,width",
                    [[_fmt(result.T), _fmt(result.average), result.observable,
                      cfg.weight, _fmt(cfg.width)]])
    _summary_json(os.path.join(out, "summary.json"),
                  {"command": "wba", "average": result.average, "T": cfg.T})
    if not quiet:
        print(f"wba: average = {result.average:.15g} (T = {cfg.T:g})")
    return EXIT_OK


def _cmd_dig(cfg, out, workers, quiet):
    system = _build_system(cfg)
    x0 = systems.initial_state(system, cfg.x0)
    acc = digit_accuracy(system, x0, system.observable(cfg.observable),
                         _weight(cfg), cfg.T, _integrator_config(cfg),
                         threshold=cfg.threshold)
    _write_rows_csv(os.path.join(out, "dig.csv"),
                    "T,wba_first,wba_second,absdig,reldig,maxdig,label",
                    [[_fmt(cfg.T), _fmt(acc.wba_first), _fmt(acc.wba_second),
                      _fmt(acc.absdig), _fmt(acc.reldig), _fmt(acc.maxdig),
                      acc.label]])
    _summary_json(os.path.join(out, "summary.json"),
                  {"command": "dig", "maxdig": acc.maxdig, "label": acc.label,
                   "T": cfg.T, "threshold": cfg.threshold})
    if not quiet:
        print(f"dig: maxdig = {acc.maxdig:.3f} label = {acc.label}")
    return EXIT_OK


def _cmd_scan(cfg, out, workers, quiet, rotation_only=False):
    spec = _scan_spec(cfg, workers)
    name = "rotation" if rotation_only else "scan"
    stream = os.path.join(out, f"{name}.partial.jsonl")
    result = run_scan(spec, stream_path=stream, resume=True,
                      rotation_only=rotation_only)
    os.remove(stream)
    if rotation_only:
        rows = [[str(r.index), _fmt(r.grid_value), _fmt(r.wba), r.status]
                for r in result.records]
        _write_rows_csv(os.path.join(out, "rotation.csv"),
                        "index,grid_value,rho,status", rows)
        profile = [(r.grid_value, r.wba) for r in result.records]
        plots.save_figure(plots.rotation_figure(profile, spec.axis, spec.system),
                          os.path.join(out, "rotation.png"))
        _summary_json(os.path.join(out, "summary.json"),
                      {"command": "rotation", **result.summary()})
        if not quiet:
            print(f"rotation: {len(result.records)} points on {spec.axis}")
        return EXIT_OK
    write_scan_csv(result, os.path.join(out, "scan.csv"), timing=cfg.timing)
    write_summary_json(result, os.path.join(out, "summary.json"),
                       extra={"command": "scan"})
    plots.save_figure(plots.scan_figure(result), os.path.join(out, "scan.png"))
    if not quiet:
        print(f"scan: chaotic fraction = {result.chaotic_fraction:.3f} "
              f"({result.chaotic_count}/{len(result.records)})")
    failures = result.failed_count
    return EXIT_RUNTIME if failures else EXIT_OK


def _cmd_poincare(cfg, out, workers, quiet):
    icfg = _integrator_config(cfg)
    system = _build_system(cfg)
    orbits = []
    if cfg.axis is not None and cfg.lo is not None:
        kind, key = scan._resolve_axis(_scan_spec(cfg, workers))
        if kind != "coord":
            raise ValueError("poincare grid axis must be a coordinate")
        for value in np.linspace(cfg.lo, cfg.hi, cfg.count):
            x0 = systems.initial_state(system, cfg.x0)
            x0[key] = value
            orbits.append(x0)
    else:
        orbits.append(systems.initial_state(system, cfg.x0))
    rows = []
    sections = []
    for orbit_id, x0 in enumerate(orbits):
        points = systems.poincare_section(system, x0, cfg.crossings, icfg)
        sections.append((orbit_id, points))
        for k, state in enumerate(points, start=1):
            rows.append([str(orbit_id), str(k)]
                        + [_fmt(v) for v in state])
    header = "orbit_id,crossing," + ",".join(system.coords)
    _write_rows_csv(os.path.join(out, "poincare.csv"), header, rows)
    plots.save_figure(plots.poincare_figure(sections, system),
                      os.path.join(out, "poincare.png"))
    _summary_json(os.path.join(out, "summary.json"),
                  {"command": "poincare", "orbits": len(orbits),
                   "crossings": cfg.crossings})
    if not quiet:
        print(f"poincare: {len(orbits)} orbit(s), {cfg.crossings} crossings")
    return EXIT_OK


def _cmd_fraction(cfg, out, workers, quiet):
    values = np.linspace(cfg.lo, cfg.hi, cfg.count)
    params = {**cfg.params, "epsilon": 0.0}
    if cfg.modes is not None:
        params["modes"] = cfg.modes
    inner_spec = ScanSpec(
        system=cfg.system, params=params,
        x0=cfg.x0 if cfg.x0 is not None else (0.0, 0.0, 0.0),
        axis=cfg.inner_axis or "psi",
        lo=cfg.inner_lo if cfg.inner_lo is not None else 0.0,
        hi=cfg.inner_hi if cfg.inner_hi is not None else 0.5,
        count=cfg.inner_count if cfg.inner_count is not None else 501,
        T=cfg.T, observable=cfg.observable, weight_kind=cfg.weight,
        weight_width=cfg.width, threshold=cfg.threshold,
        cfg=_integrator_config(cfg), workers=workers)
    curve = scan.chaotic_fraction_curve(inner_spec, cfg.axis, values,
                                        stream_dir=out)
    rows = [[_fmt(p.parameter), _fmt(p.fraction), str(p.chaotic), str(p.total)]
            for p in curve]
    _write_rows_csv(os.path.join(out, "fraction.csv"),
                    f"{cfg.axis},fraction,chaotic,total", rows)
    plots.save_figure(plots.fraction_figure(curve, cfg.axis),
                      os.path.join(out, "fraction.png"))
    _summary_json(os.path.join(out, "summary.json"),
                  {"command": "fraction",
                   "points": [[p.parameter, p.fraction] for p in curve]})
    if not quiet:
        last = curve[-1]
        print(f"fraction: {last.fraction:.3f} at {cfg.axis} = {last.parameter:g}")
    return EXIT_OK


def _cmd_widths(cfg, out, workers, quiet):
    system = _build_system(cfg)
    x0 = systems.initial_state(system, cfg.x0)
    sweep = scan.width_sweep(system, x0, system.observable(cfg.observable),
                             cfg.widths, cfg.T, _integrator_config(cfg),
                             threshold=cfg.threshold)
    rows = [[_fmt(w), _fmt(acc.absdig), _fmt(acc.reldig), _fmt(acc.maxdig),
             acc.label] for w, acc in sweep]
    _write_rows_csv(os.path.join(out, "widths.csv"),
                    "width,absdig,reldig,maxdig,label", rows)
    plots.save_figure(plots.widths_figure(sweep, cfg.T),
                      os.path.join(out, "widths.png"))
    _summary_json(os.path.join(out, "summary.json"),
                  {"command": "widths",
                   "points": [[w, acc.maxdig] for w, acc in sweep]})
    if not quiet:
        best = max(sweep, key=lambda wa: wa[1].maxdig)
        print(f"widths: best maxdig {best[1].maxdig:.3f} at w = {best[0]:g}")
    return EXIT_OK


def _cmd_eps_critical(cfg, out, workers, quiet):
    icfg = _integrator_config(cfg)
    n = int(round((cfg.eps_hi - cfg.eps_lo) / cfg.eps_step)) + 1
    grid = [cfg.eps_lo + i * cfg.eps_step for i in range(n)]
    x0 = systems.initial_state(_build_system(cfg, epsilon=0.0), cfg.x0) \
        if cfg.x0 is not None else np.array([0.27, 0.375, 0.0])
    modes = cfg.modes if cfg.modes is not None else systems.DEFAULT_FAREY_MODES
    result = systems.critical_epsilon_crossing(
        grid, x0=x0, t_max=cfg.t_max, psi_target=cfg.psi_target, cfg=icfg,
        modes=modes)
    rows = [[_fmt(p.epsilon), _fmt(p.max_psi), str(int(p.crossed)),
             _fmt(p.crossing_time)] for p in result.points]
    _write_rows_csv(os.path.join(out, "eps_critical.csv"),
                    "epsilon,max_psi,crossed,crossing_time", rows)
    plots.save_figure(plots.eps_critical_figure(result.points, cfg.psi_target),
                      os.path.join(out, "eps_critical.png"))
    _summary_json(os.path.join(out, "summary.json"),
                  {"command": "eps-critical", "eps_cr": result.epsilon,
                   "crossing_time": result.crossing_time})
    if not quiet:
        print(f"eps-critical: {result.epsilon:.3f} "
              f"(crossing at t = {result.crossing_time:.0f})")
    return EXIT_OK


_DISPATCH = {
    "wba": _cmd_wba,
    "dig": _cmd_dig,
    "scan": _cmd_scan,
    "rotation": lambda cfg, out, workers, quiet: _cmd_scan(
        cfg, out, workers, quiet, rotation_only=True),
    "poincare": _cmd_poincare,
    "fraction": _cmd_fraction,
    "widths": _cmd_widths,
    "eps-critical": _cmd_eps_critical,
}


def dispatch(cfg, out_dir, workers, quiet=False, strict=False):
    """Run a validated config; artifacts land in out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    status = _DISPATCH[cfg.command](cfg, out_dir, workers, quiet)
    if status != EXIT_OK and not strict:
        return EXIT_OK
    return status


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="wbaflow",
        description="Weighted Birkhoff averaging for flows: chaos detection "
                    "and rotation numbers.")
    parser.add_argument("--config", required=True, help="config file path")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--workers", type=int, default=None,
                        help=f"worker processes (default ${WORKERS_ENV} or 1)")
    parser.add_argument("--strict", action="store_true",
                        help="nonzero exit if any grid point fails")
    parser.add_argument("--threshold", type=float, default=None,
                        help="override the chaos threshold")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        cfg = parse_config(text)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        for message in exc.errors:
            print(f"error: {message}", file=sys.stderr)
        return EXIT_CONFIG

    if args.threshold is not None:
        if args.threshold <= 0:
            print("error: threshold must be positive", file=sys.stderr)
            return EXIT_CONFIG
        cfg.threshold = args.threshold

    workers = args.workers
    if workers is None:
        workers = cfg.workers
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        workers = int(env) if env else 1
    if workers < 1:
        print("error: workers must be at least 1", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = args.out or cfg.out or "wbaflow_out"

    try:
        return dispatch(cfg, out_dir, workers, quiet=args.quiet,
                        strict=args.strict)
    except OSError as exc:
        print(f"error: I/O failure under {out_dir}: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
