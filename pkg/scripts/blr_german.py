"""Bayesian logistic regression on the German credit data: MMHMC against HMC."""

import argparse
from pathlib import Path

from mmhmc.config import load_config
from mmhmc.experiment import run_experiment

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/german")
    ap.add_argument("--chains", type=int, default=None, help="override run.n_chains")
    args = ap.parse_args()
    reports = {}
    for kind in ("hmc", "mmhmc"):
        cfg = load_config(CONFIGS / f"german_{kind}.cfg")
        if args.chains:
            cfg.run.n_chains = args.chains
        reports[kind] = run_experiment(cfg, f"{args.out}/{kind}")
    hmc, mm = reports["hmc"], reports["mmhmc"]
    print(f"{'':<8}{'AR':>8}{'min ESS':>10}{'min ESS/T':>12}{'max MCSE':>11}")
    for name, r in reports.items():
        print(f"{name:<8}{r.acceptance:>8.3f}{r.ess.min():>10.1f}{r.ess_per_time.min():>12.1f}{r.mcse.max():>11.4f}")
    print(f"EF (min ESS/T, MMHMC over HMC): {mm.ess_per_time.min() / hmc.ess_per_time.min():.2f}")


if __name__ == "__main__":
    main()
