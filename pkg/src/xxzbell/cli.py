"""Command-line driver: ``xxzbell [options]``.

Runs a sweep, writes the data files, prints the transition report and the
headline checks. Exit status: 0 on success, 2 when some grid points failed,
1 on a fatal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import bethe, ed
from .errors import XXZError
from .pair_state import region_boundaries
from .sweep import (
    SweepConfig,
    detect_transitions,
    divergence_profile,
    emit,
    headline_checks,
    marker_records,
    run_sweep,
)

log = logging.getLogger("xxzbell")


def _int_list(text):
    return tuple(int(x) for x in text.replace(",", " ").split())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="xxzbell",
        description="Sweep the XXZ anisotropy and tabulate concurrence and CHSH-Bell values of spin pairs.",
    )
    p.add_argument("--delta-min", type=float, default=-1.5)
    p.add_argument("--delta-max", type=float, default=3.0)
    p.add_argument("--steps", type=int, default=451)
    p.add_argument("--neighbors", type=_int_list, default=(1, 2, 3),
                   help="separations to include, e.g. '1,2,3'")
    p.add_argument("--format", dest="output_format", choices=("csv", "json"), default="csv")
    p.add_argument("--out-dir", default="xxzbell-out")
    p.add_argument("--ed-sizes", type=_int_list, default=(8, 10, 12, 14, 16),
                   help="even ring sizes for the finite-size extrapolation")
    p.add_argument("--quad-tol", type=float, default=1e-10)
    p.add_argument("--derivative-step", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = SweepConfig(
            delta_min=args.delta_min,
            delta_max=args.delta_max,
            steps=args.steps,
            neighbors=args.neighbors,
            output_format=args.output_format,
            ed=ed.EDConfig(sizes=args.ed_sizes),
            quad=bethe.QuadratureConfig(abs_tol=args.quad_tol),
            derivative_step=args.derivative_step,
            seed=args.seed,
            workers=args.workers,
        )
        log.info("sweeping %d points on [%g, %g]", cfg.steps, cfg.delta_min, cfg.delta_max)
        records = run_sweep(cfg)
        markers = marker_records(cfg)
        paths = emit(records, region_boundaries(), cfg.output_format, args.out_dir, markers)

        failed = [r for r in records if r.error is not None]
        for r in failed:
            log.warning("delta=%r failed: %s", r.delta, r.error)

        summary = {"failed_points": len(failed), "transitions": None, "checks": [], "divergence": None}
        if 1 in cfg.neighbors:
            try:
                report = detect_transitions(records)
                summary["transitions"] = {
                    "first_order": [c.delta for c in report.first_order],
                    "kt": [c.delta for c in report.kt],
                }
                print(f"first-order candidates: {summary['transitions']['first_order']}")
                print(f"KT candidates:          {summary['transitions']['kt']}")
                for name, ok, detail in headline_checks(records, report):
                    summary["checks"].append({"name": name, "passed": ok, "detail": detail})
                    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
            except XXZError as exc:
                print(f"transition detection skipped: {exc}")
            if cfg.delta_min < -1.0 < cfg.delta_max:
                try:
                    prof = divergence_profile(cfg)
                    summary["divergence"] = [
                        {"offset": o, "abs_d_conc": c, "abs_d_bell": b} for o, c, b in prof
                    ]
                    grows = all(prof[i][1] < prof[i + 1][1] and prof[i][2] < prof[i + 1][2]
                                for i in range(len(prof) - 1))
                    print(f"{'PASS' if grows else 'FAIL'}  derivative_growth_at_minus_one: "
                          + ", ".join(f"{o:g}: |dC|={c:.4g} |dB|={b:.4g}" for o, c, b in prof))
                except XXZError as exc:
                    print(f"divergence profile skipped: {exc}")
        report_path = os.path.join(args.out_dir, "report.json")
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=1)
            fh.write("\n")
        for path in paths + [report_path]:
            print(f"wrote {path}")
        return 2 if failed else 0
    except (XXZError, OSError, ValueError) as exc:
        print(f"xxzbell: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
