"""Seeded simulation of X = B * G and its deviation matrix X X^T - E X X^T.

Reproducibility contract: sample i draws from an independent Philox stream
obtained by jumping the keyed generator i times, so results do not depend on
scheduling and are identical for identical (seed, samples, method) on one
build.  Aggregation over samples is a fixed-order compensated sum.  Normal
variates come from numpy's ziggurat implementation; bit-equality across
numpy versions or other libraries is out of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import BoundConfig, chz_bound, free_probability_bound, lower_bound_opnorm, main_upper_bound
from .profile import VarianceProfile

DENSE_EIGEN_LIMIT = 2000  # above this, prefer power iteration


class EigenConvergenceError(RuntimeError):
    def __init__(self, sample_index: int, detail: str):
        super().__init__(f"eigensolver failed on sample {sample_index}: {detail}")
        self.sample_index = sample_index


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.  dense_eigen is appropriate up to about
    d = DENSE_EIGEN_LIMIT; prefer power_iteration beyond that."""

    seed: int = 0
    samples: int = 200
    p_list: tuple[int, ...] = ()
    norm_method: str = "dense_eigen"  # or "power_iteration"
    tolerance: float = 1e-10

    def __post_init__(self):
        if self.samples < 2:
            raise ValueError("samples must be >= 2 for a standard error")
        if self.norm_method not in ("dense_eigen", "power_iteration"):
            raise ValueError(f"unknown norm_method {self.norm_method!r}")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "samples": self.samples,
            "p_list": list(self.p_list),
            "norm_method": self.norm_method,
            "tolerance": self.tolerance,
        }


@dataclass(frozen=True)
class MomentEstimate:
    target: str  # "opnorm" | "schatten_trace(p)" | "diag_opnorm"
    mean: float
    stderr: float
    samples: int
    seed: int
    mean_root: float | None = None  # mean**(1/p) for Schatten targets

    def to_dict(self) -> dict:
        out = {
            "target": self.target,
            "mean": self.mean,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
        }
        if self.mean_root is not None:
            out["mean_root"] = self.mean_root
        return out


def sample_stream(seed: int, index: int) -> np.random.Generator:
    """Independent per-sample stream: Philox keyed by seed, jumped index times."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)).jumped(index))


def sample_deviation(B: VarianceProfile, rng: np.random.Generator) -> np.ndarray:
    """One draw of X X^T - E X X^T with X_ij = b_ij g_ij.

    E X X^T = diag(sum_j b_ij^2).  The output is assembled from one computed
    triangle, so it is exactly symmetric.
    """
    arr = B.as_array()
    g = rng.standard_normal(size=arr.shape)
    X = arr * g
    C = X @ X.T
    upper = np.triu(C, 1)
    M = upper + upper.T + np.diag(np.diagonal(C) - (arr * arr).sum(axis=1))
    return M


def _abs_opnorm(M: np.ndarray, method: str, tol: float, rng: np.random.Generator, index: int) -> float:
    if method == "dense_eigen":
        try:
            vals = np.linalg.eigvalsh(M)
        except np.linalg.LinAlgError as exc:
            raise EigenConvergenceError(index, str(exc)) from exc
        return float(max(abs(vals[0]), abs(vals[-1])))
    # power iteration on M^2: converges to the largest |eigenvalue|
    d = M.shape[0]
    v = rng.standard_normal(d)
    norm = np.linalg.norm(v)
    if norm == 0:
        v = np.ones(d)
        norm = math.sqrt(d)
    v /= norm
    est = 0.0
    for _ in range(10000):
        w = M @ (M @ v)
        wnorm = np.linalg.norm(w)
        if wnorm == 0:
            return 0.0
        v = w / wnorm
        new_est = math.sqrt(float(v @ (M @ (M @ v))))
        if abs(new_est - est) <= tol * max(1.0, new_est):
            return new_est
        est = new_est
    raise EigenConvergenceError(index, f"power iteration did not reach tol {tol}")


def _mean_stderr(values: list[float]) -> tuple[float, float]:
    s = len(values)
    mean = math.fsum(values) / s
    var = math.fsum((x - mean) ** 2 for x in values) / (s - 1)
    return mean, math.sqrt(var) / math.sqrt(s)


def estimate_opnorm_deviation(B: VarianceProfile, cfg: SimConfig) -> MomentEstimate:
    """Mean and standard error of ||X X^T - E X X^T|| over cfg.samples draws."""
    values = []
    for i in range(cfg.samples):
        rng = sample_stream(cfg.seed, i)
        M = sample_deviation(B, rng)
        values.append(_abs_opnorm(M, cfg.norm_method, cfg.tolerance, rng, i))
    mean, stderr = _mean_stderr(values)
    return MomentEstimate(target="opnorm", mean=mean, stderr=stderr, samples=cfg.samples, seed=cfg.seed)


def estimate_schatten_trace(B: VarianceProfile, p: int, cfg: SimConfig) -> MomentEstimate:
    """Mean of Tr(M^p) over samples, M the deviation matrix, via eigenvalues.

    Also reports mean**(1/p).  For even p the trace is nonnegative.
    """
    if not isinstance(p, int) or p < 2 or p % 2:
        raise ValueError(f"p must be an even integer >= 2, got {p!r}")
    values = []
    for i in range(cfg.samples):
        rng = sample_stream(cfg.seed, i)
        M = sample_deviation(B, rng)
        vals = np.linalg.eigvalsh(M)
        values.append(float(np.sum(vals**p)))
    mean, stderr = _mean_stderr(values)
    root = mean ** (1.0 / p) if mean >= 0 else None
    return MomentEstimate(
        target=f"schatten_trace({p})", mean=mean, stderr=stderr,
        samples=cfg.samples, seed=cfg.seed, mean_root=root,
    )


def estimate_diag_opnorm(B: VarianceProfile, cfg: SimConfig) -> MomentEstimate:
    """Mean of ||Diag(X X^T) - E X X^T|| = max_i |sum_j b_ij^2 (g_ij^2 - 1)|."""
    arr2 = B.as_array() ** 2
    values = []
    for i in range(cfg.samples):
        rng = sample_stream(cfg.seed, i)
        g = rng.standard_normal(size=arr2.shape)
        dev = (arr2 * (g * g - 1.0)).sum(axis=1)
        values.append(float(np.abs(dev).max()))
    mean, stderr = _mean_stderr(values)
    return MomentEstimate(target="diag_opnorm", mean=mean, stderr=stderr, samples=cfg.samples, seed=cfg.seed)


def tightness_report(B: VarianceProfile, cfg: SimConfig, bcfg: BoundConfig | None = None) -> dict:
    """Empirical deviation norm next to the lower bound and the three upper
    bounds, with the sandwich ratios.  Ratios are None when a denominator
    vanishes (all-zero profile)."""
    bcfg = bcfg or BoundConfig()
    est = estimate_opnorm_deviation(B, cfg)
    lower = lower_bound_opnorm(B)
    upper = main_upper_bound(B, bcfg)
    chz = chz_bound(B, bcfg)
    free = free_probability_bound(B, bcfg)
    emp_over_lower = est.mean / lower.total if lower.total > 0 else None
    upper_over_emp = upper.total / est.mean if est.mean > 0 else None
    return {
        "estimate": est.to_dict(),
        "bounds": {
            "lower_bound_opnorm": lower.to_dict(),
            "main_upper_bound": upper.to_dict(),
            "chz_bound": chz.to_dict(),
            "free_probability_bound": free.to_dict(),
        },
        "ratios": {
            "empirical_over_lower": emp_over_lower,
            "upper_over_empirical": upper_over_emp,
        },
    }
