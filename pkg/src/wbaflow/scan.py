"""Batch experiment runner: grids of initial conditions or parameters.

Every grid point is an independent digit-accuracy (or plain average)
evaluation; points are dispatched to a worker pool but results are assembled
in grid order, so output files are identical for any worker count.  Per-point
integration failures are recorded in the point's status field and never abort
a scan.  Results stream to a sidecar .jsonl file as points finish, and an
interrupted scan can be resumed from it.
"""

from __future__ import annotations

import json
import math
import multiprocessing
import os
import time
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from . import core, systems
from .core import DEFAULT_THRESHOLD, LABEL_CHAOTIC, LABEL_REGULAR
from .odeint import IntegratorConfig
from .weights import DEFAULT_WIDTH, normalize

LABEL_FAILED = "failed"

SCAN_CSV_HEADER = "index,grid_value,wba,absdig,reldig,maxdig,label,status,seconds"


def _fmt(x):
    """17-significant-digit decimal rendering; round-trips float64."""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return "%.17g" % x


@dataclass(frozen=True)
class ScanSpec:
    system: str
    params: dict
    x0: tuple
    axis: str
    lo: float
    hi: float
    count: int
    T: float = 1000.0
    observable: str | None = None
    weight_kind: str = "bump"
    weight_width: float = DEFAULT_WIDTH
    threshold: float = DEFAULT_THRESHOLD
    cfg: IntegratorConfig = dc_field(default_factory=IntegratorConfig)
    workers: int = 1

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("grid needs at least 2 points")
        if not self.lo < self.hi:
            raise ValueError("grid range must have lo < hi")
        if self.threshold <= 0.0:
            raise ValueError("threshold must be positive")
        if self.T <= 0.0:
            raise ValueError("T must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        # fail early on unknown axis / bad parameters
        _resolve_axis(self)

    def grid(self):
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class PointRecord:
    index: int
    grid_value: float
    wba: float
    absdig: float
    reldig: float
    maxdig: float
    label: str
    status: str
    seconds: float


@dataclass(frozen=True)
class ScanResult:
    spec: ScanSpec
    records: tuple

    @property
    def chaotic_count(self):
        return sum(1 for r in self.records if r.label == LABEL_CHAOTIC)

    @property
    def regular_count(self):
        return sum(1 for r in self.records if r.label == LABEL_REGULAR)

    @property
    def failed_count(self):
        return sum(1 for r in self.records if r.status != "ok")

    @property
    def chaotic_fraction(self):
        return self.chaotic_count / len(self.records)

    @property
    def total_seconds(self):
        return sum(r.seconds for r in self.records)

    def relabel(self, threshold):
        """Re-derive labels from stored maxdig values; no re-integration."""
        records = []
        for r in self.records:
            if r.status != "ok":
                records.append(r)
                continue
            label = LABEL_CHAOTIC if r.maxdig < threshold else LABEL_REGULAR
            records.append(replace(r, label=label))
        return ScanResult(spec=replace(self.spec, threshold=threshold),
                          records=tuple(records))

    def summary(self):
        spec = self.spec
        return {
            "system": spec.system,
            "params": dict(spec.params),
            "axis": spec.axis,
            "grid": [spec.lo, spec.hi, spec.count],
            "T": spec.T,
            "observable": spec.observable,
            "weight": [spec.weight_kind, spec.weight_width],
            "threshold": spec.threshold,
            "abs_tol": spec.cfg.abs_tol,
            "rel_tol": spec.cfg.rel_tol,
            "points": len(self.records),
            "chaotic": self.chaotic_count,
            "regular": self.regular_count,
            "failed": self.failed_count,
            "chaotic_fraction": self.chaotic_fraction,
            "total_seconds": self.total_seconds,
        }


def _resolve_axis(spec):
    """Classify the grid axis: ('coord', index) or ('param', name)."""
    system = systems.make_system(spec.system, spec.params)
    coords = system.coords
    axis = spec.axis
    stripped = axis.rstrip("0")
    if axis in coords:
        return "coord", coords.index(axis)
    if stripped in coords:
        return "coord", coords.index(stripped)
    if axis in system.param_names:
        return "param", axis
    raise ValueError(
        f"axis {axis!r} is neither a coordinate {coords} nor a parameter "
        f"{system.param_names} of {spec.system}")


def _point_inputs(spec, value):
    kind, key = _resolve_axis(spec)
    if kind == "param":
        system = systems.make_system(spec.system, {**spec.params, key: value})
        x0 = systems.initial_state(system, spec.x0)
    else:
        system = systems.make_system(spec.system, spec.params)
        x0 = systems.initial_state(system, spec.x0)
        x0[key] = value
    observable = system.observable(spec.observable)
    weight = normalize(spec.weight_kind, spec.weight_width)
    return system, x0, observable, weight


def _eval_point(spec, index, value, rotation_only=False):
    began = time.perf_counter()
    try:
        system, x0, observable, weight = _point_inputs(spec, value)
        if rotation_only:
            avg = core.wba(system, x0, observable, weight, spec.T, spec.cfg).average
            return PointRecord(index=index, grid_value=value, wba=avg,
                               absdig=math.nan, reldig=math.nan,
                               maxdig=math.nan, label=LABEL_REGULAR,
                               status="ok",
                               seconds=time.perf_counter() - began)
        acc = core.digit_accuracy(system, x0, observable, weight, spec.T,
                                  spec.cfg, threshold=spec.threshold)
        return PointRecord(index=index, grid_value=value, wba=acc.wba_first,
                           absdig=acc.absdig, reldig=acc.reldig,
                           maxdig=acc.maxdig, label=acc.label, status="ok",
                           seconds=time.perf_counter() - began)
    except Exception as exc:  # recorded, never aborts the scan
        return PointRecord(index=index, grid_value=value, wba=math.nan,
                           absdig=math.nan, reldig=math.nan, maxdig=math.nan,
                           label=LABEL_FAILED,
                           status=f"error:{type(exc).__name__}",
                           seconds=time.perf_counter() - began)


def _pool_task(args):
    spec, index, value, rotation_only = args
    return _eval_point(spec, index, value, rotation_only)


def _record_to_json(r):
    return json.dumps({
        "index": r.index, "grid_value": r.grid_value, "wba": r.wba,
        "absdig": r.absdig, "reldig": r.reldig, "maxdig": r.maxdig,
        "label": r.label, "status": r.status, "seconds": r.seconds,
    })


def _record_from_json(line):
    d = json.loads(line)
    return PointRecord(index=d["index"], grid_value=d["grid_value"],
                       wba=d["wba"], absdig=d["absdig"], reldig=d["reldig"],
                       maxdig=d["maxdig"], label=d["label"],
                       status=d["status"], seconds=d["seconds"])


def _load_partial(stream_path):
    done = {}
    if stream_path and os.path.exists(stream_path):
        with open(stream_path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    r = _record_from_json(line)
                    done[r.index] = r
    return done


def run_scan(spec, stream_path=None, resume=False, rotation_only=False):
    """Evaluate every grid point; returns records in grid order.

    With stream_path set, finished points are appended to a .jsonl file as
    they complete; resume=True skips points already present there.
    """
    values = spec.grid()
    done = _load_partial(stream_path) if resume else {}
    todo = [(spec, i, float(v), rotation_only)
            for i, v in enumerate(values) if i not in done]

    stream = open(stream_path, "a") if stream_path else None
    try:
        if spec.workers > 1 and len(todo) > 1:
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(processes=spec.workers) as pool:
                for record in pool.imap_unordered(_pool_task, todo, chunksize=4):
                    done[record.index] = record
                    if stream:
                        stream.write(_record_to_json(record) + "\n")
                        stream.flush()
        else:
            for args in todo:
                record = _pool_task(args)
                done[record.index] = record
                if stream:
                    stream.write(_record_to_json(record) + "\n")
                    stream.flush()
    finally:
        if stream:
            stream.close()

    records = tuple(done[i] for i in range(len(values)))
    return ScanResult(spec=spec, records=records)


def write_scan_csv(result, path, timing=False):
    """One row per grid point.  The seconds column is written as 0 unless
    timing is requested, so reruns produce byte-identical files."""
    with open(path, "w") as fh:
        fh.write(SCAN_CSV_HEADER + "\n")
        for r in result.records:
            seconds = _fmt(r.seconds) if timing else "0"
            fh.write(",".join([str(r.index), _fmt(r.grid_value), _fmt(r.wba),
                               _fmt(r.absdig), _fmt(r.reldig), _fmt(r.maxdig),
                               r.label, r.status, seconds]) + "\n")


def write_summary_json(result, path, extra=None):
    data = result.summary()
    if extra:
        data.update(extra)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class FractionPoint:
    parameter: float
    fraction: float
    chaotic: int
    total: int


def chaotic_fraction_curve(inner_spec, parameter, values, stream_dir=None):
    """Chaotic fraction of the inner IC grid at each parameter value.

    The inner grid specification is fixed; only the named system parameter
    varies.  Emits points in the given parameter order.
    """
    out = []
    for v in values:
        spec = replace(inner_spec, params={**inner_spec.params, parameter: float(v)})
        stream = None
        if stream_dir:
            stream = os.path.join(stream_dir, f"fraction_{parameter}_{v:.6g}.jsonl")
        result = run_scan(spec, stream_path=stream, resume=stream is not None)
        if stream:
            os.remove(stream)
        out.append(FractionPoint(parameter=float(v),
                                 fraction=result.chaotic_fraction,
                                 chaotic=result.chaotic_count,
                                 total=len(result.records)))
    return out


def dig_vs_T_curve(system, x0, observable, weight, T_list, cfg,
                   threshold=DEFAULT_THRESHOLD):
    """Digit accuracy at each averaging time, fresh from x0 every time."""
    T_list = [float(T) for T in T_list]
    if any(b < a for a, b in zip(T_list, T_list[1:])):
        raise ValueError("T_list must be ascending")
    return [(T, core.digit_accuracy(system, x0, observable, weight, T, cfg,
                                    threshold=threshold))
            for T in T_list]


def width_sweep(system, x0, observable, widths, T, cfg,
                threshold=DEFAULT_THRESHOLD):
    """Digit accuracy with a bump weight of each width."""
    out = []
    for w in widths:
        weight = normalize("bump", float(w))
        acc = core.digit_accuracy(system, x0, observable, weight, T, cfg,
                                  threshold=threshold)
        out.append((float(w), acc))
    return out


def rotation_profile(spec, stream_path=None, resume=False):
    """Rotation number at each grid point (single segment per point)."""
    result = run_scan(spec, stream_path=stream_path, resume=resume,
                      rotation_only=True)
    return [(r.grid_value, r.wba) for r in result.records]


def read_scan_records(path):
    """Point records back from a scan CSV (seconds column as written)."""
    records = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != SCAN_CSV_HEADER:
            raise ValueError(f"unexpected scan CSV header: {header!r}")
        for line in fh:
            f = line.strip().split(",")
            records.append(PointRecord(
                index=int(f[0]), grid_value=float(f[1]), wba=float(f[2]),
                absdig=float(f[3]), reldig=float(f[4]), maxdig=float(f[5]),
                label=f[6], status=f[7], seconds=float(f[8])))
    return tuple(records)


def relabel_csv(in_path, out_path, threshold):
    """Re-derive labels of a stored scan from its maxdig column.

    Pure postprocessing: no re-integration; failed rows pass through.
    """
    records = []
    for r in read_scan_records(in_path):
        if r.status == "ok":
            label = LABEL_CHAOTIC if r.maxdig < threshold else LABEL_REGULAR
            r = replace(r, label=label)
        records.append(r)
    with open(out_path, "w") as fh:
        fh.write(SCAN_CSV_HEADER + "\n")
        for r in records:
            fh.write(",".join([str(r.index), _fmt(r.grid_value), _fmt(r.wba),
                               _fmt(r.absdig), _fmt(r.reldig), _fmt(r.maxdig),
                               r.label, r.status, _fmt(r.seconds)
                               if r.seconds else "0"]) + "\n")
    return records
