"""Command line front end: ``run``, ``audit-kernels`` and ``constants``.

Worker count comes from ``--threads`` or ``NONLOCAL_LAB_THREADS``; results
do not depend on it.
"""
from __future__ import annotations

import argparse
import io
import json
import os
import sys

from .config import ConfigError, config_to_dict, parse_audit_config, parse_config
from .convergence import ConvergenceReport, run_sweep
from .mollifiers import audit_family, ball_volume, k_constant, sphere_area

CSV_COLUMNS = ("gap", "value", "scaled_value", "excluded_pair_fraction", "correction_added")


def _g(x) -> str:
    return "none" if x is None else format(float(x), ".17g")


def report_to_dict(report: ConvergenceReport) -> dict:
    v = report.verdict
    return {
        "config": config_to_dict(report.config),
        "grid": list(report.grid),
        "gaps": list(report.gaps),
        "values": [fv.as_dict() for fv in report.values],
        "scaled": list(report.scaled),
        "limit": {"value": report.limit.value, "uncertainty": report.limit.uncertainty,
                  "model": report.limit.model},
        "reference": report.reference,
        "reference_note": report.reference_note,
        "verdict": None if v is None else {"passed": v.passed, "rel_error": v.rel_error,
                                           "tolerance": v.tolerance},
        "under_resolved": list(report.under_resolved),
        "backend": report.backend,
    }


def emit_report(report: ConvergenceReport, fmt: str = "csv") -> str:
    """CSV (data rows plus a ``#`` comment block) or JSON text for ``report``.

    JSON floats use the shortest repr, which parses back to the same double.
    """
    if fmt == "json":
        return json.dumps(report_to_dict(report), indent=2, allow_nan=False) + "\n"
    if fmt != "csv":
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    out = io.StringIO()
    out.write(",".join(CSV_COLUMNS) + "\n")
    for gap, fv, sc in zip(report.gaps, report.values, report.scaled):
        row = (gap, fv.value, sc, fv.excluded_pair_fraction, fv.correction_added)
        out.write(",".join(_g(x) for x in row) + "\n")
    v = report.verdict
    verdict = "none" if v is None else ("pass" if v.passed else "fail")
    out.write(f"# limit: {_g(report.limit.value)}\n")
    out.write(f"# uncertainty: {_g(report.limit.uncertainty)}\n")
    out.write(f"# model: {report.limit.model}\n")
    out.write(f"# reference: {_g(report.reference)}\n")
    out.write(f"# reference_note: {report.reference_note}\n")
    out.write(f"# verdict: {verdict}\n")
    if v is not None:
        out.write(f"# rel_error: {_g(v.rel_error)}\n")
        out.write(f"# tolerance: {_g(v.tolerance)}\n")
    out.write(f"# under_resolved: {' '.join(str(k) for k in report.under_resolved) or 'none'}\n")
    return out.getvalue()


def constants_table(max_n: int) -> str:
    lines = ["n,sphere_area,ball_volume_n_minus_1,K_1n,K_2n,H_K1_minus_2B"]
    for n in range(1, max_n + 1):
        H = sphere_area(n)
        B = ball_volume(n - 1)
        k1 = k_constant(1.0, n)
        k2 = k_constant(2.0, n)
        lines.append(",".join([str(n)] + [_g(x) for x in (H, B, k1, k2, H * k1 - 2.0 * B)]))
    return "\n".join(lines) + "\n"


def _write(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _cmd_run(args) -> int:
    config = parse_config(_read(args.config), base_dir=os.path.dirname(os.path.abspath(args.config)))
    report = run_sweep(config, threads=args.threads)
    if args.verbose:
        for g, sc in zip(report.grid, report.scaled):
            print(f"grid {g:g}: scaled {sc:.10g}", file=sys.stderr)
        print(f"limit {report.limit.value:.10g} +- {report.limit.uncertainty:.3g}, "
              f"reference {report.reference}", file=sys.stderr)
    _write(emit_report(report, args.format), args.out)
    return 0 if report.passed else 1


def _cmd_audit(args) -> int:
    cfg = parse_audit_config(_read(args.config))
    reports = [audit_family(f.build(), cfg.sigma_grid, cfg.delta_grid, n=f.n) for f in cfg.families]
    doc = {"reports": [r.as_dict() for r in reports]}
    _write(json.dumps(doc, indent=2) + "\n", args.out)
    if args.verbose:
        for r in reports:
            failed = [a.name for a in r.axioms if not a.passed]
            print(f"{r.family}: {'pass' if r.passed else 'fail ' + ','.join(failed)}", file=sys.stderr)
    return 0 if all(r.passed for r in reports) else 1


def _cmd_constants(args) -> int:
    if args.max_n < 1:
        raise ConfigError("--max-n must be >= 1")
    _write(constants_table(args.max_n), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nonlocal-lab",
                                 description="Nonlocal functionals on manifolds and their local limits.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a convergence sweep")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--threads", type=int, default=None)
    run.set_defaults(func=_cmd_run)

    audit = sub.add_parser("audit-kernels", help="check mollifier families against the axioms")
    audit.add_argument("--config", required=True)
    audit.add_argument("--out", default=None)
    audit.set_defaults(func=_cmd_audit)

    const = sub.add_parser("constants", help="print the dimensional constants")
    const.add_argument("--max-n", type=int, default=5)
    const.add_argument("--out", default=None)
    const.set_defaults(func=_cmd_constants)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for key in ("config", "out"):
        if getattr(args, key, None) == "":
            print(f"error: --{key} must be nonempty", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
