"""Three-slot scheme vs the resolvable baselines under both energy normalisations.

Writes one compare CSV (plus summary) per normalisation into ``--outdir``.

    python3 scripts/fig6_compare.py --outdir results
"""

import argparse
from dataclasses import replace
from pathlib import Path

from pncsim import cli
from pncsim.config import load_config

ROOT = Path(__file__).resolve().parent.parent


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=ROOT / "configs" / "fig6.cfg")
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args(argv)

    base = load_config(args.config)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for energy in ("amplitude", "per_bit"):
        rc = replace(base, baseline_energy=energy)
        print(f"== baseline_energy = {energy}")
        cli.cmd_compare(rc, str(outdir / f"fig6_{energy}.csv"))


if __name__ == "__main__":
    main()
