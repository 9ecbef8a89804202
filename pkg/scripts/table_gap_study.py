"""Analytic-only study of the term tables and the residual-noise cross term.

For each SNR prints the relay bit error from the printed tables with the
quarter rule, from the re-derived tables, and from the exact-variance
average, followed by the structured discrepancy between the printed and
re-derived symbol tables.
"""

import argparse

import numpy as np

from pncsim import analysis
from pncsim.core import SchemeConfig, snr_db_to_sigma2


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--snr", type=float, nargs="*", default=list(np.arange(0, 36, 5.0)))
    args = ap.parse_args(argv)

    base = SchemeConfig()
    print(f"{'snr_db':>6} {'printed':>12} {'corrected':>12} {'exact':>12} "
          f"{'exact/printed':>14} {'exact/corr':>11}")
    for snr in args.snr:
        cfg = base.with_sigma2(snr_db_to_sigma2(snr, base.eb2**2))
        p = analysis.relay_error_probabilities(cfg, "printed").p_relay_bit
        c = analysis.relay_error_probabilities(cfg, "corrected").p_relay_bit
        e = analysis.relay_bit_error_numeric(cfg)
        print(f"{snr:6.1f} {p:12.5e} {c:12.5e} {e:12.5e} {e / p:14.3f} {e / c:11.4f}")

    print()
    for printed, corrected in zip(analysis.term_tables(base, "printed"),
                                  analysis.term_tables(base, "corrected")):
        d = analysis.term_table_discrepancy(printed, corrected)
        print(d["table"])
        for t in d["surplus_printed_terms"]:
            print(f"  surplus  #{t['index']}: sign {t['sign']:+d}  A^2={t['a_squared']:g}  "
                  f"phi={t['phi']:.6f}")
        for t in d["missing_terms"]:
            print(f"  missing      sign {t['sign']:+d}  A^2={t['a_squared']:g}  "
                  f"phi={t['phi']:.6f}")


if __name__ == "__main__":
    main()
