"""Command line entry point: ``sample``, ``diagnose`` and ``design``."""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .config import load_config, set_value, validate
from .design import minimize_design_metric
from .errors import ConfigError, ContractError, IngestionError, MMHMCError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

# command line flag -> configuration key
_OVERRIDES = {
    "seed": "run.seed", "sampler": "sampler.kind", "h": "sampler.h", "L": "sampler.L",
    "phi": "sampler.phi", "integrator": "sampler.integrator", "shadow_order": "sampler.shadow_order",
    "shadow_mode": "sampler.shadow_mode", "flip": "sampler.flip", "out": "out",
}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mmhmc", description="Shadow-Hamiltonian Monte Carlo toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="run chains described by a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--sampler", choices=["rwmh", "mala", "hmc", "ghmc", "mmhmc"])
    s.add_argument("--h", type=float)
    s.add_argument("--L", type=int)
    s.add_argument("--phi", type=float)
    s.add_argument("--integrator")
    s.add_argument("--shadow-order", type=int, choices=[4, 6])
    s.add_argument("--shadow-mode", choices=["analytic", "numeric"])
    s.add_argument("--flip", choices=["automatic", "reduced"])
    s.add_argument("--out")

    d = sub.add_parser("diagnose", help="summarise chain CSV files")
    d.add_argument("--chains", required=True, help="glob of chain files")
    d.add_argument("--baseline", help="glob of baseline chain files for the efficiency factor")

    g = sub.add_parser("design", help="optimise splitting coefficients")
    g.add_argument("--objective", required=True, choices=["E", "EG", "rho"])
    g.add_argument("--family", required=True, choices=["2", "3", "4"])
    g.add_argument("--target", default="modified", choices=["modified", "true"],
                   help="Hamiltonian bounded by the rho objective")
    g.add_argument("--hbar", type=float, default=2.0)
    return ap


def _sample(args) -> int:
    from .experiment import run_experiment

    cfg = load_config(args.config)
    for flag, key in _OVERRIDES.items():
        value = getattr(args, flag)
        if value is not None:
            set_value(cfg, key, str(value))
    validate(cfg)
    report = run_experiment(cfg)
    print(report.text(), end="")
    print(f"output written to {cfg.out}")
    return EXIT_OK


def _diagnose(args) -> int:
    from .experiment import diagnose

    report = diagnose(args.chains, args.baseline)
    print(report.to_csv(), end="")
    print(report.text(), end="")
    return EXIT_OK


def _design(args) -> int:
    objective = "rho_max" if args.objective == "rho" else args.objective
    res = minimize_design_metric(objective, args.family, hbar=args.hbar, target=args.target)
    print(f"family     {res.family}")
    print(f"objective  {args.objective}")
    print("params     " + " ".join(f"{v:.7g}" for v in res.params))
    print(f"value      {res.value:.6e}")
    print("c          " + " ".join(f"{v:.6e}" for v in res.coefficients.c))
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    handler = {"sample": _sample, "diagnose": _diagnose, "design": _design}[args.command]
    try:
        return handler(args)
    except (ConfigError, IngestionError, ContractError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MMHMCError, FloatingPointError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
