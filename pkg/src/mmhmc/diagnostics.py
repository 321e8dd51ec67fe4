"""Estimators and efficiency metrics for weighted, autocorrelated chains."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .errors import ContractError, DegenerateWeightsError


def _normalised_weights(log_weights: Optional[np.ndarray], n: int) -> np.ndarray:
    if log_weights is None:
        return np.ones(n)
    lw = np.asarray(log_weights, dtype=float)
    if lw.shape != (n,):
        raise ContractError(f"expected {n} log-weights, got shape {lw.shape}")
    if not np.any(np.isfinite(lw)):
        raise DegenerateWeightsError("no finite log-weight")
    w = np.exp(lw - np.max(lw[np.isfinite(lw)]))
    w[~np.isfinite(w)] = 0.0
    return w


def _apply(samples: np.ndarray, f: Optional[Callable]) -> np.ndarray:
    samples = np.asarray(samples, dtype=float)
    if f is None:
        return samples
    return np.asarray([f(s) for s in samples], dtype=float)


def reweighted_estimate(samples, log_weights=None, f: Optional[Callable] = None):
    """Self-normalised importance estimate ``sum f(theta_n) w_n / sum w_n``.

    ``samples`` may be a vector or an ``(N, D)`` matrix; the estimate then has
    one entry per column. Weights are passed as logs and rescaled by their
    maximum before exponentiation.

    Raises:
        DegenerateWeightsError: if every weight underflows to zero.
    """
    vals = _apply(samples, f)
    n = vals.shape[0]
    if n < 1:
        raise ContractError("need at least one sample")
    w = _normalised_weights(log_weights, n)
    s = w.sum()
    if not s > 0:
        raise DegenerateWeightsError("all weights are zero")
    return np.tensordot(w, vals, axes=(0, 0)) / s


def _autocorr(x: np.ndarray) -> np.ndarray:
    n = x.size
    xc = x - x.mean()
    size = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(xc, size)
    acov = np.fft.irfft(spec * np.conj(spec), size)[:n]
    return acov / acov[0]


def ess_autocorr(series) -> float:
    """Autocorrelation effective sample size ``N / (1 + 2 sum rho_k)``.

    The sum is truncated with Geyer's initial positive sequence: consecutive
    pairs ``rho_{2m} + rho_{2m+1}`` are added while they stay positive. The
    result is capped at ``N``; a constant series returns ``N``.
    """
    x = np.asarray(series, dtype=float).ravel()
    n = x.size
    if n < 10:
        raise ContractError("need at least 10 draws for an autocorrelation ESS")
    if not np.all(np.isfinite(x)):
        raise ContractError("series contains non-finite values")
    if np.ptp(x) == 0.0:
        return float(n)
    rho = _autocorr(x)
    npairs = n // 2
    pairs = rho[: 2 * npairs : 2] + rho[1 : 2 * npairs : 2]
    neg = np.flatnonzero(pairs <= 0.0)
    m = neg[0] if neg.size else npairs
    tau = -1.0 + 2.0 * pairs[:m].sum()
    if tau <= 0:
        return float(n)
    return float(min(n, n / tau))


def ess_weighted(weights) -> float:
    """Importance-sampling effective sample size ``(sum w)^2 / sum w^2``."""
    w = np.asarray(weights, dtype=float).ravel()
    if w.size < 1:
        raise ContractError("need at least one weight")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ContractError("weights must be finite and nonnegative")
    s2 = float(w @ w)
    if s2 == 0.0:
        raise DegenerateWeightsError("all weights are zero")
    w = w / np.sqrt(s2)
    return float(w.sum() ** 2)


def weighted_variance(values, weights) -> float:
    """Unbiased weighted variance ``sum w / ((sum w)^2 - sum w^2) * sum w (f - I)^2``."""
    f = np.asarray(values, dtype=float).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    if f.shape != w.shape:
        raise ContractError("values and weights differ in length")
    if f.size >= 2 and np.ptp(f) == 0.0:
        return 0.0
    if not np.any(w > 0):
        raise DegenerateWeightsError("all weights are zero")
    w = w / w.max()
    sw, sw2 = w.sum(), float(w @ w)
    denom = sw * sw - sw2
    if not denom > 1e-12 * sw * sw:
        raise DegenerateWeightsError("weights support a single effective sample")
    est = float(w @ f) / sw
    return float(sw / denom * (w @ (f - est) ** 2))


@dataclass
class JointESS:
    """Result of the combined autocorrelation and importance-sampling metric."""

    estimate: float
    M: float
    ESS: float
    MCSE: float
    stride: int


def joint_ess_mcse(values, log_weights=None) -> JointESS:
    """ESS and MCSE of a weighted, correlated series.

    ``M`` is the autocorrelation ESS of the whole series. The series is then
    thinned to ``floor(M)`` draws at indices ``floor(k N / M)`` (first draw
    kept, spacing ``N / M``; this is stride ``N / M`` exactly when that is an
    integer), and the importance ESS and weighted variance of that subset give
    ``MCSE = sqrt(var_w / ESS)``. The estimate itself uses every draw.
    ``stride`` reports ``ceil(N / M)``, the largest gap in the subset.
    """
    f = np.asarray(values, dtype=float).ravel()
    n = f.size
    w = _normalised_weights(log_weights, n)
    M = ess_autocorr(f)
    stride = int(np.ceil(n / M - 1e-9))
    m = max(2, int(np.floor(M + 1e-9)))
    idx = np.unique(np.floor(np.arange(m) * (n / M) + 1e-9).astype(int))
    idx = idx[idx < n]
    wt, ft = w[idx], f[idx]
    ess = ess_weighted(wt)
    var = weighted_variance(ft, wt)
    est = float(w @ f / w.sum())
    return JointESS(est, M, ess, float(np.sqrt(var / ess)), stride)


# --- reports -----------------------------------------------------------------


@dataclass
class Report:
    """Per-variate efficiency summary averaged over a set of chains."""

    estimates: np.ndarray
    ess: np.ndarray
    mcse: np.ndarray
    time: float
    acceptance: float
    momentum_acceptance: float
    total_distance: float
    efficiency_factor: Optional[float] = None
    names: List[str] = field(default_factory=list)

    @property
    def ess_per_time(self) -> np.ndarray:
        return self.ess / self.time

    @property
    def mcse_time(self) -> np.ndarray:
        return self.mcse * self.time

    def ess_stats(self) -> Dict[str, float]:
        return {"min": float(self.ess.min()), "median": float(np.median(self.ess)), "max": float(self.ess.max())}

    def mcse_stats(self) -> Dict[str, float]:
        return {"min": float(self.mcse.min()), "median": float(np.median(self.mcse)), "max": float(self.mcse.max())}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["variate", "estimate", "ESS", "MCSE", "ESS/T", "MCSE*T"])
        names = self.names or [f"theta_{i + 1}" for i in range(self.ess.size)]
        for i, name in enumerate(names):
            w.writerow([name, f"{self.estimates[i]:.10g}", f"{self.ess[i]:.6g}", f"{self.mcse[i]:.6g}",
                        f"{self.ess_per_time[i]:.6g}", f"{self.mcse_time[i]:.6g}"])
        return buf.getvalue()

    def text(self) -> str:
        e, m = self.ess_stats(), self.mcse_stats()
        lines = [
            f"variates          {self.ess.size}",
            f"time (s)          {self.time:.4g}",
            f"acceptance        {self.acceptance:.4f}",
            f"momentum accept.  {self.momentum_acceptance:.4f}",
            f"ESS min/med/max   {e['min']:.4g} / {e['median']:.4g} / {e['max']:.4g}",
            f"MCSE min/med/max  {m['min']:.4g} / {m['median']:.4g} / {m['max']:.4g}",
            f"min ESS/T         {self.ess_per_time.min():.4g}",
            f"total distance    {self.total_distance:.4g}",
        ]
        if self.efficiency_factor is not None:
            lines.append(f"EF vs baseline    {self.efficiency_factor:.4g}")
        return "\n".join(lines) + "\n"


def _chain_metrics(chain, f: Optional[Callable]):
    vals = _apply(chain.samples, f)
    if vals.ndim == 1:
        vals = vals[:, None]
    lw = chain.log_weights if getattr(chain, "weighted", True) else None
    res = [joint_ess_mcse(vals[:, d], lw) for d in range(vals.shape[1])]
    return (np.array([r.estimate for r in res]), np.array([r.ESS for r in res]),
            np.array([r.MCSE for r in res]))


def summarize(chains: Sequence, f: Optional[Callable] = None, baseline: Optional[Sequence] = None,
              names: Optional[List[str]] = None) -> Report:
    """Average per-variate ESS and MCSE over ``chains``.

    Each chain needs ``samples``, ``log_weights``, ``wall_time``,
    ``acceptance_rate`` and ``momentum_acceptance_rate``. With ``baseline``,
    the efficiency factor is the ratio of minimum ESS per second to the
    baseline's.
    """
    if not chains:
        raise ContractError("need at least one chain")
    per = [_chain_metrics(c, f) for c in chains]
    est = np.mean([p[0] for p in per], axis=0)
    ess = np.mean([p[1] for p in per], axis=0)
    mcse = np.mean([p[2] for p in per], axis=0)
    t = float(np.mean([c.wall_time for c in chains]))
    ar = float(np.mean([c.acceptance_rate for c in chains]))
    mar = [c.momentum_acceptance_rate for c in chains]
    mar = float(np.mean(mar)) if all(np.isfinite(mar)) else float("nan")
    rep = Report(est, ess, mcse, t, ar, mar, float(np.abs(est).sum()), None, list(names or []))
    if baseline is not None:
        base = baseline if baseline is not chains else None
        ref = rep if base is None else summarize(base, f)
        rep.efficiency_factor = float(rep.ess_per_time.min() / ref.ess_per_time.min())
    return rep
