"""Monte Carlo vs analytic end-to-end BER for the three-slot scheme.

Compares the simulated curve against three analytic curves: the printed
term tables with the quarter rule, the re-derived tables, and the
exact-variance relay average.  Raise ``--min-errors`` to shrink the
intervals until the systematic gaps show.

    python3 scripts/fig7_consistency.py --min-errors 2000 --out results/fig7.csv
"""

import argparse
import csv
import sys
from pathlib import Path

from pncsim import analysis
from pncsim.config import load_config
from pncsim.core import snr_db_to_sigma2
from pncsim.sim import Stopping, run_point

ROOT = Path(__file__).resolve().parent.parent


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=ROOT / "configs" / "fig7.cfg")
    ap.add_argument("--min-errors", type=int, default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--out", default=None)
    args = ap.parse_args(argv)

    rc = load_config(args.config)
    stop = Stopping(args.min_errors or rc.stopping.min_errors, rc.stopping.max_trials)
    seed = rc.seed if args.seed is None else args.seed
    header = ["snr_db", "trials", "bit_errors", "ber", "ci_low", "ci_high", "relay_ber",
              "printed", "corrected", "exact_variance", "printed_relay_bit", "exact_relay_bit"]
    rows = []
    for idx, snr in enumerate(rc.snr_grid):
        est = run_point(rc.scheme, "three_slot", snr, stop, seed, idx,
                        block_frames=rc.block_frames)
        cfg = rc.scheme.with_sigma2(snr_db_to_sigma2(snr, rc.scheme.eb2**2))
        printed = analysis.end_to_end_ber(cfg, "printed")
        corrected = analysis.end_to_end_ber(cfg, "corrected")
        exact_bit, exact = analysis.end_to_end_ber_exact_variance(cfg)
        rows.append([snr, est.trials, est.bit_errors, est.ber, est.ci_low, est.ci_high,
                     est.relay_ber, printed.p_overall, corrected.p_overall, exact,
                     printed.p_relay_bit, exact_bit])
        print(f"{snr:5.1f} dB  MC {est.ber:.4e}  printed {printed.p_overall / est.ber:6.3f}x  "
              f"corrected {corrected.p_overall / est.ber:6.3f}x  "
              f"exact {exact / est.ber:6.3f}x  relay MC/printed "
              f"{est.relay_ber / printed.p_relay_bit:5.2f}", file=sys.stderr)

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    w.writerows([[f"{v:.10g}" if isinstance(v, float) else v for v in r] for r in rows])
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
