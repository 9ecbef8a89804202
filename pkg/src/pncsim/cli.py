"""``pncsim`` command line interface.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import subprocess
import sys
import time
from pathlib import Path

from . import analysis, validate
from .config import ConfigError, RunConfig, load_config
from .core import DomainError, OutOfRange, snr_db_to_sigma2
from .modem import THROUGHPUT_KEY, throughput_symbols_per_slot
from .sim import BerEstimate, sweep

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

ANALYZE_COLUMNS = ["snr_db", "p_e0", "p_e1", "p_relay_symbol", "p_relay_bit", "p_r", "p_overall"]
SIMULATE_COLUMNS = ["scheme", "snr_db", "trials", "bit_errors", "ber", "ci_low", "ci_high",
                    "censored_flag", "analytic_ber"]
SCHEMA_VERSION = 1


def fmt(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True,
                             text=True, timeout=5, cwd=Path(__file__).parent)
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def _emit(text: str, out: str | None, meta: dict | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")
    if meta is not None:
        meta = {"schema_version": SCHEMA_VERSION, "git_describe": _git_describe(), **meta}
        path.with_name(path.name + ".json").write_text(
            json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")


def analyze_rows(rc: RunConfig):
    rows = []
    for snr in rc.snr_grid:
        cfg = rc.scheme.with_sigma2(snr_db_to_sigma2(snr, rc.scheme.eb2**2))
        rep = analysis.end_to_end_ber(cfg, rc.term_tables, rc.quadrature_order)
        rows.append([float(snr), rep.p_e0_symbol, rep.p_e1_symbol, rep.p_relay_symbol,
                     rep.p_relay_bit, rep.p_r2, rep.p_overall])
    return rows


def exact_variance_rows(rc: RunConfig):
    """Cross-term-aware analytic values, reported in the sidecar only."""
    rows = []
    for snr in rc.snr_grid:
        cfg = rc.scheme.with_sigma2(snr_db_to_sigma2(snr, rc.scheme.eb2**2))
        p_bit, p_overall = analysis.end_to_end_ber_exact_variance(cfg)
        rows.append({"snr_db": float(snr), "p_relay_bit": p_bit, "p_overall": p_overall})
    return rows


def cmd_analyze(rc: RunConfig, out: str | None) -> int:
    start = time.perf_counter()
    text = render_csv(ANALYZE_COLUMNS, analyze_rows(rc))
    meta = {"command": "analyze", "config": rc.snapshot()}
    if rc.sigma_n2_report == "exact":
        meta["exact_variance"] = exact_variance_rows(rc)
    meta["runtime_s"] = time.perf_counter() - start
    _emit(text, out, meta)
    return EXIT_OK


def _run_sweep(rc: RunConfig):
    return sweep(rc.scheme, rc.schemes, rc.snr_grid, rc.stopping, rc.seed,
                 mode=rc.term_tables, order=rc.quadrature_order,
                 block_frames=rc.block_frames, energy=rc.baseline_energy)


def _sweep_meta(rc: RunConfig, result, command: str) -> dict:
    meta = {"command": command, "config": rc.snapshot(), **result.metadata}
    meta["relay_ber"] = [
        {"scheme": e.scheme, "snr_db": e.snr_db, "relay_ber": e.relay_ber,
         "errors_1to2": e.errors_1to2, "errors_2to1": e.errors_2to1,
         "stop_reason": e.stop_reason}
        for e in result.estimates
    ]
    if rc.sigma_n2_report == "exact" and "three_slot" in rc.schemes:
        meta["exact_variance"] = exact_variance_rows(rc)
    return meta


def simulate_rows(result):
    return [[e.scheme, e.snr_db, e.trials, e.bit_errors, e.ber, e.ci_low, e.ci_high,
             e.censored, analytic] for e, analytic in result.rows()]


def cmd_simulate(rc: RunConfig, out: str | None) -> int:
    result = _run_sweep(rc)
    _emit(render_csv(SIMULATE_COLUMNS, simulate_rows(result)), out,
          _sweep_meta(rc, result, "simulate"))
    return EXIT_OK


def overlap_verdict(a: BerEstimate, b: BerEstimate) -> str:
    if a.censored or b.censored:
        return "censored"
    return "same" if a.ci_low <= b.ci_high and b.ci_low <= a.ci_high else "different"


def compare_tables(rc: RunConfig, result):
    ref = rc.schemes[0]
    others = rc.schemes[1:]
    by_key = {(e.scheme, e.snr_db): e for e in result.estimates}
    header = ["snr_db"]
    for s in rc.schemes:
        header += [f"{s}_{c}" for c in ("trials", "bit_errors", "ber", "ci_low", "ci_high",
                                        "censored_flag", "analytic_ber")]
    header += [f"overlap_{s}" for s in others] + ["verdict"]
    rows, same_counts = [], {s: 0 for s in others}
    for snr in rc.snr_grid:
        snr = float(snr)
        row = [snr]
        for s in rc.schemes:
            e = by_key[(s, snr)]
            row += [e.trials, e.bit_errors, e.ber, e.ci_low, e.ci_high, e.censored,
                    result.analytic[(s, snr)]]
        verdicts = [overlap_verdict(by_key[(ref, snr)], by_key[(s, snr)]) for s in others]
        for s, v in zip(others, verdicts):
            same_counts[s] += v == "same"
        overall = "same" if all(v == "same" for v in verdicts) else (
            "censored" if "censored" in verdicts and "different" not in verdicts else "different")
        rows.append(row + verdicts + [overall])

    ref_tp = throughput_symbols_per_slot(THROUGHPUT_KEY[ref])
    summary_header = ["scheme", "throughput_symbols_per_slot", "throughput_ratio",
                      "same_points", "total_points"]
    summary = []
    for s in rc.schemes:
        tp = throughput_symbols_per_slot(THROUGHPUT_KEY[s])
        summary.append([s, float(tp), float(ref_tp / tp),
                        len(rc.snr_grid) if s == ref else same_counts[s], len(rc.snr_grid)])
    return (header, rows), (summary_header, summary)


def cmd_compare(rc: RunConfig, out: str | None) -> int:
    if len(rc.schemes) < 2:
        raise ConfigError("compare needs at least two schemes")
    result = _run_sweep(rc)
    (header, rows), (sheader, srows) = compare_tables(rc, result)
    summary_text = render_csv(sheader, srows)
    _emit(render_csv(header, rows), out, _sweep_meta(rc, result, "compare"))
    if out is not None:
        p = Path(out)
        p.with_name(p.stem + ".summary.csv").write_text(summary_text, encoding="utf-8",
                                                        newline="")
    else:
        sys.stdout.write("\n")
    sys.stdout.write(summary_text)
    return EXIT_OK


def cmd_validate(quick: bool = False, tables=None, stream=None) -> int:
    stream = stream or sys.stdout
    results = validate.run_all(quick=quick, tables=tables)
    for r in results:
        print(r.line(), file=stream)
    ok = all(r.passed for r in results)
    print(f"{'ALL PASS' if ok else 'FAILURES'}: {sum(r.passed for r in results)}/{len(results)}",
          file=stream)
    return EXIT_OK if ok else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pncsim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (("analyze", "analytical BER curve"),
                           ("simulate", "Monte Carlo BER sweep"),
                           ("compare", "three-slot scheme vs resolvable baselines")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default=None, help="CSV path (default: config 'output' or stdout)")
    vp = sub.add_parser("validate", help="run the oracle checks")
    vp.add_argument("--quick", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args.quick)
        rc = load_config(args.config)
        out = args.out or rc.output
        handler = {"analyze": cmd_analyze, "simulate": cmd_simulate, "compare": cmd_compare}
        return handler[args.command](rc, out)
    except ConfigError as exc:
        print(f"pncsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OutOfRange, DomainError) as exc:
        print(f"pncsim: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
