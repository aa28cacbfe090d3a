"""Anisotropy sweeps: per-point records, derivative estimates, transition detection and output.

Files written by :func:`emit` (``.csv`` or ``.json``):

``sweep``
    One row per grid point. Columns: ``delta, e0``, then for every separation
    ``r`` in the sweep ``txx_r, tzz_r, concurrence_r, bell_r, region_r,
    residual_r``, then ``d_bell_left, d_bell_left_noise, d_bell_right,
    d_bell_right_noise, d_conc_left, d_conc_left_noise, d_conc_right,
    d_conc_right_noise, flags, error``.
``trajectory``
    ``r, delta, txx, tzz, marker`` for every grid point and separation, plus
    rows for the marker anisotropies -1, -0.999, 0 and 1 (when in range).
``boundaries``
    ``curve, index, txx, tzz`` for the region diagram.
``derivatives``
    ``delta`` followed by the eight derivative columns of ``sweep``.

CSV files carry a header row and floats with 17 significant digits; JSON
files hold the same fields by name.
"""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bethe, correlations, ed
from .errors import DomainError, XXZError
from .measures import bell_measure_symmetric, concurrence_symmetric, maximize_chsh
from .pair_state import Region, classify_region, region_boundaries, symmetric_state

__all__ = [
    "SweepConfig",
    "PairValues",
    "SweepRecord",
    "Candidate",
    "TransitionReport",
    "evaluate_point",
    "run_sweep",
    "marker_records",
    "one_sided_derivative",
    "divergence_profile",
    "detect_transitions",
    "headline_checks",
    "emit",
    "load_records",
]

BOUNDARIES = (-1.0, 1.0)
MARKERS = {-1.0: "circle", -0.999: "square", 0.0: "triangle", 1.0: "diamond"}
# nearest-neighbour correlators are accurate to about this many quadrature tolerances
EVAL_NOISE_FACTOR = 100.0
MIN_SIDE_POINTS = 50
JUMP_THRESHOLD = 0.1
SNAP = 1e-12

DERIV_FIELDS = (
    "d_bell_left",
    "d_bell_left_noise",
    "d_bell_right",
    "d_bell_right_noise",
    "d_conc_left",
    "d_conc_left_noise",
    "d_conc_right",
    "d_conc_right_noise",
)


@dataclass(frozen=True)
class SweepConfig:
    delta_min: float = -1.5
    delta_max: float = 3.0
    steps: int = 451
    neighbors: tuple[int, ...] = (1, 2, 3)
    output_format: str = "csv"
    ed: ed.EDConfig = field(default_factory=ed.EDConfig)
    quad: bethe.QuadratureConfig = field(default_factory=bethe.QuadratureConfig)
    derivative_step: float = 1e-3
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not self.delta_min < self.delta_max:
            raise DomainError("delta_min must be below delta_max")
        if self.steps < 2:
            raise DomainError("steps must be >= 2")
        nb = tuple(sorted(set(int(r) for r in self.neighbors)))
        if not nb or not set(nb) <= {1, 2, 3}:
            raise DomainError(f"neighbors must be a non-empty subset of {{1, 2, 3}}, got {self.neighbors}")
        object.__setattr__(self, "neighbors", nb)
        if self.output_format not in ("csv", "json"):
            raise DomainError(f"output_format must be 'csv' or 'json', got {self.output_format!r}")
        if not self.derivative_step > 0:
            raise DomainError("derivative_step must be positive")

    def grid(self) -> np.ndarray:
        """Uniform grid including both endpoints; values within 1e-12 of -1, 0 or 1 are snapped."""
        g = np.linspace(self.delta_min, self.delta_max, self.steps)
        for b in (-1.0, 0.0, 1.0):
            g[np.abs(g - b) < SNAP] = b
        return g


@dataclass
class PairValues:
    r: int
    txx: float
    tzz: float
    concurrence: float
    bell: float
    region: Region
    residual: float = 0.0
    bell_numeric: float | None = None


@dataclass
class SweepRecord:
    delta: float
    e0: float = math.nan
    pairs: list[PairValues] = field(default_factory=list)
    d_bell_left: float = math.nan
    d_bell_left_noise: float = math.nan
    d_bell_right: float = math.nan
    d_bell_right_noise: float = math.nan
    d_conc_left: float = math.nan
    d_conc_left_noise: float = math.nan
    d_conc_right: float = math.nan
    d_conc_right_noise: float = math.nan
    flags: list[str] = field(default_factory=list)
    error: str | None = None
    marker: str | None = None

    def pair(self, r: int) -> PairValues:
        for p in self.pairs:
            if p.r == r:
                return p
        raise KeyError(f"no separation {r} in record at delta={self.delta}")


def _pair_values(corr) -> PairValues:
    return PairValues(
        r=corr.r,
        txx=corr.txx,
        tzz=corr.tzz,
        concurrence=concurrence_symmetric(corr),
        bell=bell_measure_symmetric(corr),
        region=classify_region(corr.txx, corr.tzz),
        residual=corr.residual,
    )


def _nn_measures(delta, quad, side=None):
    corr = correlations.nn_correlations(delta, quad, side=side)
    return bell_measure_symmetric(corr), concurrence_symmetric(corr)


def one_sided_derivative(f, x: float, h: float, side: str, eval_noise: float = 0.0):
    """Three-point one-sided derivative of ``f`` at ``x`` and a noise estimate.

    ``f(delta, side)`` must return a tuple of values; derivatives of all
    components are returned together. The step shrinks so that no stencil
    point crosses a branch boundary. ``noise`` is the change between steps
    ``h`` and ``h/2`` plus the propagated evaluation noise ``4 eval_noise / h``.

    Returns
    -------
    (values, noises) : tuple of numpy arrays
    """
    sgn = 1.0 if side == "right" else -1.0
    for b in BOUNDARIES:
        if sgn * (b - x) > 0.0 and 2.0 * h > sgn * (b - x):
            h = sgn * (b - x) / 3.0
    f0 = np.asarray(f(x, side), dtype=float)

    def stencil(s):
        f1 = np.asarray(f(x + sgn * s, None), dtype=float)
        f2 = np.asarray(f(x + 2.0 * sgn * s, None), dtype=float)
        return sgn * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * s)

    d_full = stencil(h)
    d_half = stencil(h / 2.0)
    noise = np.abs(d_full - d_half) + 4.0 * eval_noise / h
    return d_full, noise


def _derivatives(rec: SweepRecord, cfg: SweepConfig) -> None:
    quad = cfg.quad
    eval_noise = EVAL_NOISE_FACTOR * quad.abs_tol

    def f(d, side):
        return _nn_measures(d, quad, side)

    for side in ("left", "right"):
        try:
            val, noise = one_sided_derivative(f, rec.delta, cfg.derivative_step, side, eval_noise)
        except XXZError:
            rec.flags.append(f"d_{side}_unresolved")
            if rec.delta in BOUNDARIES:
                rec.flags.append(f"d_{side}_diverges")
            continue
        setattr(rec, f"d_bell_{side}", float(val[0]))
        setattr(rec, f"d_bell_{side}_noise", float(noise[0]))
        setattr(rec, f"d_conc_{side}", float(val[1]))
        setattr(rec, f"d_conc_{side}_noise", float(noise[1]))


def evaluate_point(delta: float, cfg: SweepConfig, derivatives: bool = True,
                   numeric_bell: bool = False) -> SweepRecord:
    """All configured quantities at one anisotropy; errors are recorded, not raised."""
    rec = SweepRecord(delta=float(delta))
    try:
        rec.e0 = bethe.ground_energy_at(delta, cfg.quad)
        far = [r for r in cfg.neighbors if r > 1]
        results = ed.diagonalize(delta, cfg.ed) if far else None
        for r in cfg.neighbors:
            if r == 1:
                corr = correlations.nn_correlations(delta, cfg.quad)
            else:
                corr = correlations.far_correlations(
                    delta, r, cfg.ed, on_residual="flag", results=results
                )
                if corr.low_confidence:
                    rec.flags.append(f"low_confidence_r{r}")
                if corr.clamped:
                    rec.flags.append(f"clamped_r{r}")
            pv = _pair_values(corr)
            if numeric_bell:
                pv.bell_numeric, _ = maximize_chsh(symmetric_state(corr), seed=cfg.seed)
            rec.pairs.append(pv)
        if derivatives and 1 in cfg.neighbors:
            _derivatives(rec, cfg)
    except XXZError as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
    return rec


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


class _PointTask:
    def __init__(self, cfg, derivatives=True, numeric_bell=False):
        self.cfg, self.derivatives, self.numeric_bell = cfg, derivatives, numeric_bell

    def __call__(self, delta):
        return evaluate_point(delta, self.cfg, self.derivatives, self.numeric_bell)


def run_sweep(cfg: SweepConfig) -> list[SweepRecord]:
    """Evaluate every grid point; records come back ordered by delta."""
    records = _map(_PointTask(cfg), [float(d) for d in cfg.grid()], cfg.workers)
    return sorted(records, key=lambda rec: rec.delta)


def marker_records(cfg: SweepConfig) -> list[SweepRecord]:
    """Records at the trajectory marker anisotropies inside the sweep range.

    These also carry the numerically optimized CHSH value as a cross-check.
    """
    deltas = [d for d in MARKERS if cfg.delta_min <= d <= cfg.delta_max]
    records = _map(_PointTask(cfg, derivatives=False, numeric_bell=True), deltas, cfg.workers)
    for rec in records:
        rec.marker = MARKERS[rec.delta]
    return records


def divergence_profile(cfg: SweepConfig, boundary: float = -1.0,
                       offsets=(1e-1, 1e-2, 1e-3)) -> list[tuple[float, float, float]]:
    """``(offset, |dC1|, |dB1|)`` just right of ``boundary`` at each offset.

    Right-sided estimates with a step no larger than a tenth of the offset.
    """
    out = []
    for off in offsets:
        x = boundary + off
        h = min(cfg.derivative_step, off / 10.0)
        val, _ = one_sided_derivative(lambda d, s: _nn_measures(d, cfg.quad, s), x, h, "right")
        out.append((off, abs(float(val[1])), abs(float(val[0]))))
    return out


@dataclass
class Candidate:
    kind: str  # "first_order" or "kt"
    delta: float
    detail: dict = field(default_factory=dict)


@dataclass
class TransitionReport:
    first_order: list[Candidate] = field(default_factory=list)
    kt: list[Candidate] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.first_order and not self.kt


def _finite(*xs):
    return all(x is not None and math.isfinite(x) for x in xs)


def detect_transitions(records: list[SweepRecord]) -> TransitionReport:
    """Locate first-order and Kosterlitz-Thouless signatures in r=1 data.

    A boundary value lying strictly inside the sweep range needs at least 50
    grid points on each side; a sweep that does not reach a boundary simply
    cannot report a transition there.
    """
    recs = sorted((r for r in records if r.error is None), key=lambda r: r.delta)
    if len(recs) < 2:
        raise DomainError("need at least two successful records")
    deltas = np.array([r.delta for r in recs])
    for b in BOUNDARIES:
        if deltas[0] < b < deltas[-1]:
            below, above = int(np.sum(deltas < b)), int(np.sum(deltas > b))
            if below < MIN_SIDE_POINTS or above < MIN_SIDE_POINTS:
                raise DomainError(
                    f"insufficient grid coverage around delta={b}: {below} points below, {above} above"
                )
    report = TransitionReport()
    tzz = [r.pair(1).tzz for r in recs]
    for i in range(len(recs) - 1):
        jump = abs(tzz[i + 1]) - abs(tzz[i])
        if abs(jump) <= JUMP_THRESHOLD:
            continue
        right = recs[i + 1 : i + 4]
        conc = [abs(r.d_conc_right) for r in right]
        bell = [abs(r.d_bell_right) for r in right]
        growing = (
            len(right) == 3
            and _finite(*conc, *bell)
            and conc[0] > conc[1] > conc[2]
            and bell[0] > bell[1] > bell[2]
        )
        if growing:
            report.first_order.append(
                Candidate("first_order", recs[i].delta,
                          {"interval": (recs[i].delta, recs[i + 1].delta), "tzz_jump": jump,
                           "d_conc_right": conc, "d_bell_right": bell})
            )
    for r in recs:
        if not _finite(r.d_bell_left, r.d_bell_right, r.d_conc_left, r.d_conc_right):
            continue
        bell_gap = abs(r.d_bell_left - r.d_bell_right)
        bell_noise = r.d_bell_left_noise + r.d_bell_right_noise
        conc_gap = abs(r.d_conc_left - r.d_conc_right)
        conc_noise = r.d_conc_left_noise + r.d_conc_right_noise
        if bell_gap > 10.0 * bell_noise and conc_gap <= conc_noise:
            report.kt.append(
                Candidate("kt", r.delta, {"bell_gap": bell_gap, "bell_noise": bell_noise,
                                          "conc_gap": conc_gap, "conc_noise": conc_noise})
            )
    return report


def headline_checks(records: list[SweepRecord], report: TransitionReport | None = None):
    """Pass/fail list ``(name, passed, detail)`` for the main physical claims.

    A claim about a boundary is only checked when the sweep reaches across it.
    """
    recs = sorted((r for r in records if r.error is None), key=lambda r: r.delta)
    if not recs:
        return []
    step = recs[1].delta - recs[0].delta if len(recs) > 1 else math.inf
    lo, hi = recs[0].delta, recs[-1].delta
    checks = []
    max_bell = max(p.bell for r in recs for p in r.pairs)
    checks.append(("no_bell_violation", max_bell <= 2.0, f"max bell {max_bell:.6f}"))
    try:
        c1 = [(r.delta, r.pair(1).concurrence) for r in recs]
    except KeyError:
        return checks
    if lo <= -1.0 < hi:
        outside = [c for d, c in c1 if d <= -1.0]
        inside = [c for d, c in c1 if d > -1.0]
        ok = all(c == 0.0 for c in outside) and all(c > 0.0 for c in inside)
        checks.append(("entanglement_appears_after_first_order", ok,
                       f"max C1 for delta<=-1: {max(outside):.3g}, min C1 for delta>-1: {min(inside):.3g}"))
    if report is None and (lo < -1.0 < hi or lo < 1.0 < hi):
        report = detect_transitions(recs)
    if lo < 1.0 < hi:
        d_best = max(c1, key=lambda t: t[1])[0]
        checks.append(("concurrence_max_at_kt", abs(d_best - 1.0) <= step + 1e-12,
                       f"argmax C1 at {d_best:.6g}"))
        kt = [c.delta for c in report.kt]
        checks.append(("kt_at_one", any(abs(d - 1.0) <= step + 1e-12 for d in kt), f"candidates {kt}"))
    if lo < -1.0 < hi:
        fo = [c.delta for c in report.first_order]
        checks.append(("first_order_at_minus_one", any(abs(d + 1.0) <= step + 1e-12 for d in fo),
                       f"candidates {fo}"))
    return checks


# ---------------------------------------------------------------- output


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, Region):
        return v.value
    return str(v)


def _json_num(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _record_to_dict(rec: SweepRecord) -> dict:
    d = asdict(rec)
    for p in d["pairs"]:
        p["region"] = p["region"].value
    for k in ("e0",) + DERIV_FIELDS:
        d[k] = _json_num(d[k])
    return d


def _record_from_dict(d: dict) -> SweepRecord:
    d = dict(d)
    d["pairs"] = [PairValues(**{**p, "region": Region(p["region"])}) for p in d["pairs"]]
    for k in ("e0",) + DERIV_FIELDS:
        if d[k] is None:
            d[k] = math.nan
    return SweepRecord(**d)


def _sweep_rows(records, neighbors):
    header = ["delta", "e0"]
    for r in neighbors:
        header += [f"txx_{r}", f"tzz_{r}", f"concurrence_{r}", f"bell_{r}", f"region_{r}", f"residual_{r}"]
    header += list(DERIV_FIELDS) + ["flags", "error"]
    rows = []
    for rec in records:
        row = [rec.delta, rec.e0]
        for r in neighbors:
            try:
                p = rec.pair(r)
                row += [p.txx, p.tzz, p.concurrence, p.bell, p.region, p.residual]
            except KeyError:
                row += [None] * 6
        row += [getattr(rec, k) for k in DERIV_FIELDS]
        row += [";".join(rec.flags), rec.error]
        rows.append(row)
    return header, rows


def _trajectory_rows(records, markers):
    header = ["r", "delta", "txx", "tzz", "marker"]
    rows = []
    for rec in list(records) + list(markers or []):
        for p in rec.pairs:
            rows.append([p.r, rec.delta, p.txx, p.tzz, rec.marker])
    rows.sort(key=lambda row: (row[0], row[1], row[4] or ""))
    return header, rows


def _boundary_rows(boundaries):
    header = ["curve", "index", "txx", "tzz"]
    rows = []
    for name, pts in boundaries.items():
        for i, (x, z) in enumerate(pts):
            rows.append([name, i, float(x), float(z)])
    return header, rows


def _derivative_rows(records):
    header = ["delta"] + list(DERIV_FIELDS)
    return header, [[rec.delta] + [getattr(rec, k) for k in DERIV_FIELDS] for rec in records]


def _write(path, header, rows, fmt, payload=None):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            if fmt == "csv":
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                for row in rows:
                    w.writerow([_fmt(v) for v in row])
            else:
                if payload is None:
                    payload = [
                        {k: _json_num(v.value if isinstance(v, Region) else v) for k, v in zip(header, row)}
                        for row in rows
                    ]
                json.dump(payload, fh, indent=1, sort_keys=False, allow_nan=False)
                fh.write("\n")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}", str(path)) from exc
    return path


def emit(records, boundaries=None, fmt: str = "csv", out_dir=".", markers=None) -> list[str]:
    """Write sweep, trajectory, boundary and derivative files; returns their paths."""
    if not records:
        raise DomainError("nothing to emit")
    if fmt not in ("csv", "json"):
        raise DomainError(f"unknown format {fmt!r}")
    if boundaries is None:
        boundaries = region_boundaries()
    os.makedirs(out_dir, exist_ok=True)
    neighbors = sorted({p.r for rec in records for p in rec.pairs})
    paths = []
    h, rows = _sweep_rows(records, neighbors)
    payload = [_record_to_dict(rec) for rec in records] if fmt == "json" else None
    paths.append(_write(os.path.join(out_dir, f"sweep.{fmt}"), h, rows, fmt, payload))
    h, rows = _trajectory_rows(records, markers)
    paths.append(_write(os.path.join(out_dir, f"trajectory.{fmt}"), h, rows, fmt))
    h, rows = _boundary_rows(boundaries)
    paths.append(_write(os.path.join(out_dir, f"boundaries.{fmt}"), h, rows, fmt))
    h, rows = _derivative_rows(records)
    paths.append(_write(os.path.join(out_dir, f"derivatives.{fmt}"), h, rows, fmt))
    return paths


def load_records(path) -> list[SweepRecord]:
    """Read the records back from a JSON sweep file written by :func:`emit`."""
    with open(path, encoding="utf-8") as fh:
        return [_record_from_dict(d) for d in json.load(fh)]
