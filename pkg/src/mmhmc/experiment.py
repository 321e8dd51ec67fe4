"""Builds models and samplers from a configuration, runs chains, writes files."""

from __future__ import annotations

import csv
import glob
import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .config import ExperimentConfig, emit_config
from .data import ingest_blr_dataset, load_german, read_sv_csv
from .diagnostics import Report, summarize
from .errors import ConfigError, MMHMCError
from .models import (BananaTarget, BLRTarget, GaussianTarget, banana_simulate, generate_wishart_target,
                     sv_simulate)
from .samplers import SamplerConfig, run_chain, run_sv_gibbs
from .shadow import ShadowOrder


class ExperimentError(MMHMCError):
    """A chain failed; ``written`` lists the chain files completed before it."""

    def __init__(self, message, written=None):
        super().__init__(message)
        self.written = list(written or [])


@dataclass
class ChainRecord:
    """A chain as read back from disk, in the shape ``summarize`` expects."""

    samples: np.ndarray
    log_weights: np.ndarray
    accepted: np.ndarray
    wall_time: float
    acceptance_rate: float
    momentum_acceptance_rate: float
    weighted: bool
    kind: str = ""


def build_model(cfg: ExperimentConfig):
    """Model (or SV observations) described by ``cfg.model``."""
    m = cfg.model
    rng = np.random.default_rng(m.data_seed)
    if m.name == "gaussian":
        if m.wishart:
            return generate_wishart_target(m.dim, rng)
        return GaussianTarget(variances=np.ones(m.dim))
    if m.name == "banana":
        return BananaTarget(banana_simulate(m.n_obs, 1.0, 2.0, rng))
    if m.name == "blr":
        if m.data.endswith(".data"):
            d = load_german(m.data)
        else:
            d = ingest_blr_dataset(m.data, m.label_column)
        return BLRTarget(d.X, d.y, m.alpha)
    if m.data:
        return read_sv_csv(m.data)
    return sv_simulate(m.n_obs, m.beta, m.sigma, m.phi, rng)[0]


def sampler_config(cfg: ExperimentConfig, theta_block: bool = False) -> SamplerConfig:
    s = cfg.sampler
    return SamplerConfig(
        h=s.theta_h if theta_block else s.h,
        L=s.theta_L if theta_block else s.L,
        phi=s.phi, h_policy=s.h_policy, L_policy=s.L_policy, phi_policy=s.phi_policy,
        flip_mode=s.flip, shadow=ShadowOrder(s.shadow_order, s.shadow_mode), scheme=cfg.scheme(),
        pmmc=s.pmmc, rw_scale=s.rw_scale,
    )


def _chain_rows(iters, log_w, accepted, samples, weighted):
    w = np.exp(log_w) if weighted else np.ones(len(iters))
    for i, wi, a, th in zip(iters, w, accepted, samples):
        yield [str(int(i)), f"{wi:.17g}", str(int(a))] + [f"{v:.17g}" for v in th]


def write_chain_csv(path, iters, log_w, accepted, samples, weighted: bool) -> None:
    samples = np.asarray(samples)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "weight", "accepted"] + [f"theta_{d + 1}" for d in range(samples.shape[1])])
        w.writerows(_chain_rows(iters, log_w, accepted, samples, weighted))


def read_chain(path) -> ChainRecord:
    """Load ``chain_XX.csv`` and its ``chain_XX.json`` sidecar when present."""
    path = Path(path)
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    with np.errstate(divide="ignore"):
        log_w = np.log(arr[:, 1])
    meta = {}
    side = path.with_suffix(".json")
    if side.exists():
        meta = json.loads(side.read_text(encoding="utf-8"))
    weighted = bool(meta.get("weighted", not np.all(arr[:, 1] == 1.0)))
    return ChainRecord(
        samples=arr[:, 3:], log_weights=log_w, accepted=arr[:, 2].astype(bool),
        wall_time=float(meta.get("wall_time", 1.0)),
        acceptance_rate=float(meta.get("acceptance_rate", arr[:, 2].mean())),
        momentum_acceptance_rate=float(meta.get("momentum_acceptance_rate", float("nan"))),
        weighted=weighted, kind=str(meta.get("kind", "")),
    )


def read_chains(pattern: str) -> List[ChainRecord]:
    paths = sorted(p for p in glob.glob(pattern) if p.endswith(".csv"))
    if not paths:
        raise ConfigError(f"no chain files match {pattern!r}", key="chains")
    return [read_chain(p) for p in paths]


def _run_one(cfg: ExperimentConfig, model, seed: int):
    rng = np.random.default_rng(seed)
    r = cfg.run
    kind = cfg.sampler.kind
    if cfg.model.name == "sv":
        ch = run_sv_gibbs(model, kind, sampler_config(cfg, True), sampler_config(cfg), r.n_samples,
                          r.burn_in, r.thin, rng)
        m = ch.params.shape[0]
        iters = r.burn_in + r.thin * np.arange(m) + 1
        meta = {"acceptance_rate": float(np.mean(ch.acceptance)), "theta_acceptance": ch.acceptance[0],
                "latent_acceptance": ch.acceptance[1], "momentum_acceptance_rate": float("nan")}
        return iters, ch.log_weights, np.ones(m, dtype=bool), ch.params, ch.wall_time, meta
    ch = run_chain(model, kind, sampler_config(cfg), r.n_samples, r.burn_in, r.thin, rng)
    meta = {"acceptance_rate": ch.acceptance_rate, "momentum_acceptance_rate": ch.momentum_acceptance_rate,
            "flips": ch.n_flips}
    return ch.iterations, ch.log_weights, ch.accepted, ch.samples, ch.wall_time, meta


def run_experiment(cfg: ExperimentConfig, out: Optional[str] = None) -> Report:
    """Run ``cfg.run.n_chains`` chains with seeds ``seed, seed + 1, ...``.

    Writes ``chain_XX.csv`` (+ ``.json`` metadata), ``report.csv``,
    ``summary.txt`` and ``config.resolved`` into the output directory.

    Raises:
        ExperimentError: if a chain fails; earlier chain files are kept.
    """
    outdir = Path(out or cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.resolved").write_text(emit_config(cfg), encoding="utf-8")
    model = build_model(cfg)
    weighted = cfg.sampler.kind == "mmhmc"
    written = []
    records = []
    for c in range(cfg.run.n_chains):
        seed = cfg.run.seed + c
        try:
            iters, lw, acc, samples, wall, meta = _run_one(cfg, model, seed)
        except (MMHMCError, FloatingPointError, np.linalg.LinAlgError) as exc:
            raise ExperimentError(f"chain {c} (seed {seed}) failed: {exc}", written) from exc
        path = outdir / f"chain_{c:02d}.csv"
        write_chain_csv(path, iters, lw, acc, samples, weighted)
        meta.update({"chain": c, "seed": seed, "kind": cfg.sampler.kind, "weighted": weighted,
                     "wall_time": wall, "n_retained": int(len(iters))})
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, default=float), encoding="utf-8")
        written.append(str(path))
        records.append(ChainRecord(np.asarray(samples), np.asarray(lw), np.asarray(acc), wall,
                                   meta["acceptance_rate"], meta["momentum_acceptance_rate"], weighted,
                                   cfg.sampler.kind))
    names = ["beta", "sigma", "phi"] if cfg.model.name == "sv" else None
    report = summarize(records, names=names)
    write_report(report, outdir)
    return report


def write_report(report: Report, outdir) -> None:
    outdir = Path(outdir)
    (outdir / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    (outdir / "summary.txt").write_text(report.text(), encoding="utf-8")


def diagnose(pattern: str, baseline: Optional[str] = None) -> Report:
    """Summarise chain files matching ``pattern``, optionally against a baseline set."""
    chains = read_chains(pattern)
    base: Optional[Sequence] = read_chains(baseline) if baseline else None
    return summarize(chains, baseline=base)
