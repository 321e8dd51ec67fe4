"""Print optimal splitting coefficients for every objective and family."""

import argparse

from mmhmc.design import minimize_design_metric


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--hbar", type=float, default=2.0, help="step-size bound for the rho objective")
    args = ap.parse_args()
    rows = [("E", fam, "modified") for fam in ("two_stage", "three_stage", "four_stage")]
    rows += [("EG", fam, "modified") for fam in ("two_stage", "three_stage", "four_stage")]
    rows += [("rho_max", "two_stage", "modified"), ("rho_max", "two_stage", "true")]
    print(f"{'objective':<10}{'family':<13}{'target':<10}{'value':>13}  params")
    for objective, family, target in rows:
        r = minimize_design_metric(objective, family, hbar=args.hbar, target=target)
        params = " ".join(f"{v:.6f}" for v in r.params)
        print(f"{objective:<10}{family:<13}{target:<10}{r.value:>13.5e}  {params}")


if __name__ == "__main__":
    main()
