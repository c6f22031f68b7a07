"""Closed-form deviation bounds for ||X X^T - E X X^T|| with X_ij = b_ij g_ij.

Each evaluator returns a BoundReport with the bound split into a leading term
and labelled error terms.  Universal constants that the underlying results
leave unspecified are taken from BoundConfig (default 1) and echoed back in
every report.  Term labels are stable identifiers:

    "leading"        first summand(s) of the bound
    "sqrt_log"       coefficient of sqrt(log(n ^ d))
    "log"            coefficient of log(n ^ d)
    "sqrt_p"         coefficient of sqrt(p)
    "p"              linear-in-p term with plain constants
    "schatten_tail"  the p * b_p^2 tail
    "log34", "log32" the log^{3/4}(nd) and log^{3/2}(nd) terms

All evaluators are total on valid profiles; an all-zero profile yields a zero
total plus a warning.  Division conventions: sigma_inf/sigma_C is 0 when
sigma_C = 0, and the branch selectors use the beta zero conventions of the
params module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .params import compute_params, compute_schatten_params
from .profile import VarianceProfile

CASE_LE = "beta_le_1"
CASE_GT = "beta_gt_1"
CASE_NA = "not_applicable"


@dataclass(frozen=True)
class BoundConfig:
    """Evaluation constants: epsilon in (0, 1/2], stand-ins for C and C',
    and whether log(n ^ d) is evaluated literally or floored at 1."""

    epsilon: float = 0.5
    C_universal: float = 1.0
    C_prime: float = 1.0
    log_floor: str = "literal"  # or "floored"

    def __post_init__(self):
        if not (0 < self.epsilon <= 0.5):
            raise ValueError(f"epsilon must be in (0, 1/2], got {self.epsilon}")
        if self.C_universal <= 0 or self.C_prime <= 0:
            raise ValueError("universal constants must be positive")
        if self.log_floor not in ("literal", "floored"):
            raise ValueError(f"log_floor must be 'literal' or 'floored', got {self.log_floor!r}")

    def c_eps(self) -> float:
        """C(eps) = C * (1 + eps) / sqrt(log(1 + eps))."""
        return self.C_universal * (1 + self.epsilon) / math.sqrt(math.log1p(self.epsilon))

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "C_universal": self.C_universal,
            "C_prime": self.C_prime,
            "log_floor": self.log_floor,
        }


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    case_taken: str
    leading_term: float
    error_terms: tuple[tuple[str, float], ...]
    total: float
    constants_used: BoundConfig
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "bound_name": self.bound_name,
            "case_taken": self.case_taken,
            "leading_term": self.leading_term,
            "error_terms": [[label, value] for label, value in self.error_terms],
            "total": self.total,
            "constants_used": self.constants_used.to_dict(),
            "warnings": list(self.warnings),
        }


def _report(name, case, leading, errors, cfg, warnings=()) -> BoundReport:
    errors = tuple((label, value) for label, value in errors)
    total = leading + sum(value for _, value in errors)
    return BoundReport(
        bound_name=name,
        case_taken=case,
        leading_term=leading,
        error_terms=errors,
        total=total,
        constants_used=cfg,
        warnings=tuple(warnings),
    )


def _log_term(B: VarianceProfile, cfg: BoundConfig) -> float:
    L = math.log(min(B.n, B.d))
    if cfg.log_floor == "floored":
        L = max(L, 1.0)
    return L


def _zero_warning(B: VarianceProfile) -> list[str]:
    return ["all-zero profile: bound degenerates to 0"] if B.is_zero else []


def _select_case(beta: float, force_case: str | None) -> str:
    if force_case is not None:
        if force_case not in (CASE_LE, CASE_GT):
            raise ValueError(f"force_case must be {CASE_LE!r} or {CASE_GT!r}")
        return force_case
    return CASE_LE if beta <= 1 else CASE_GT


def main_upper_bound(
    B: VarianceProfile, cfg: BoundConfig | None = None, *, force_case: str | None = None
) -> BoundReport:
    """Two-branch operator-norm upper bound driven by beta_inf.

    beta_inf <= 1:
        (1+eps) { 2 sigma_inf + sigma_C^2
                  + C(eps) sigma_* (sigma_C + sigma_inf/sigma_C) sqrt(log(n^d))
                  + C(eps)^2 sigma_*^2 log(n^d) }
    beta_inf > 1: the sigma_inf terms are replaced by
        2 sigma_tilde sigma_C / sigma_*   and   (sigma_C sigma_* + sigma_bar).
    """
    cfg = cfg or BoundConfig()
    P = compute_params(B)
    case = _select_case(P.beta_inf, force_case)
    one_eps = 1 + cfg.epsilon
    ce = cfg.c_eps()
    L = _log_term(B, cfg)
    if case == CASE_LE:
        ratio = P.sigma_inf / P.sigma_C if P.sigma_C > 0 else 0.0
        leading = one_eps * (2 * P.sigma_inf + P.sigma_C**2)
        sqrt_log = one_eps * ce * P.sigma_star * (P.sigma_C + ratio) * math.sqrt(L)
    else:
        lead_main = 2 * P.sigma_tilde_inf * P.sigma_C / P.sigma_star if P.sigma_star > 0 else 0.0
        leading = one_eps * (lead_main + P.sigma_C**2)
        sqrt_log = one_eps * ce * (P.sigma_C * P.sigma_star + P.sigma_bar_inf) * math.sqrt(L)
    log_term = one_eps * ce**2 * P.sigma_star**2 * L
    return _report(
        "main_upper_bound", case, leading,
        [("sqrt_log", sqrt_log), ("log", log_term)], cfg, _zero_warning(B),
    )


def schatten_upper_bound(
    B: VarianceProfile, p: int, cfg: BoundConfig | None = None, *, force_case: str | None = None
) -> BoundReport:
    """Two-branch Schatten-p moment bound driven by beta_p.

    beta_p <= 1:
        d^{1/p} { 2 sigma_p + sigma_C^2
                  + C sqrt(p) (sigma_C sigma_* + sigma_p sigma_*/sigma_C)
                  + C' p b_p^2 }
    beta_p > 1: the sigma_p terms are replaced by 2 sigma_bar_p sigma_C/sigma_*
    and sigma_bar_p.  The sigma_p entering either branch is the full l-sum
    variant; the sharper sigma_p_prime (l != i) is available from the params
    module for users who want the tighter leading term.
    """
    cfg = cfg or BoundConfig()
    P = compute_params(B)
    Q = compute_schatten_params(B, p)
    case = _select_case(Q.beta_p, force_case)
    scale = B.d ** (1.0 / p)
    if case == CASE_LE:
        leading = scale * (2 * Q.sigma_p + P.sigma_C**2)
        ratio = Q.sigma_p * P.sigma_star / P.sigma_C if P.sigma_C > 0 else 0.0
        sqrt_p = scale * cfg.C_universal * math.sqrt(p) * (P.sigma_C * P.sigma_star + ratio)
    else:
        lead_main = 2 * Q.sigma_bar_p * P.sigma_C / P.sigma_star if P.sigma_star > 0 else 0.0
        leading = scale * (lead_main + P.sigma_C**2)
        sqrt_p = scale * cfg.C_universal * math.sqrt(p) * (P.sigma_C * P.sigma_star + Q.sigma_bar_p)
    tail = scale * cfg.C_prime * p * Q.b_p**2
    return _report(
        "schatten_upper_bound", case, leading,
        [("sqrt_p", sqrt_p), ("schatten_tail", tail)], cfg, _zero_warning(B),
    )


def diagonal_bound(B: VarianceProfile, p: int, cfg: BoundConfig | None = None) -> BoundReport:
    """C (sqrt(p) sigma_bar_p + p b_p^2), the two-sided order of the diagonal part."""
    cfg = cfg or BoundConfig()
    Q = compute_schatten_params(B, p)
    leading = cfg.C_universal * math.sqrt(p) * Q.sigma_bar_p
    tail = cfg.C_universal * p * Q.b_p**2
    warnings = ["two-sided order estimate; both directions hold up to unspecified constants"]
    warnings += _zero_warning(B)
    return _report("diagonal_bound", CASE_NA, leading, [("schatten_tail", tail)], cfg, warnings)


def standard_gaussian_bound(
    d: int, n: int, p: float, off_diagonal: bool = False, cfg: BoundConfig | None = None
) -> BoundReport:
    """Moment bound for the all-ones profile (i.i.d. standard Gaussian matrix).

    full:          2 sqrt(dn) + d + 4 sqrt(p)(sqrt(d)+sqrt(n)) + 2p
    off_diagonal:  2 sqrt(dn) + d + C sqrt(p)(sqrt(d)+sqrt(n)) + C'p
    """
    cfg = cfg or BoundConfig()
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    leading = 2 * math.sqrt(d * n) + d
    c1, c2 = (cfg.C_universal, cfg.C_prime) if off_diagonal else (4.0, 2.0)
    sqrt_p = c1 * math.sqrt(p) * (math.sqrt(d) + math.sqrt(n))
    lin = c2 * p
    name = "standard_gaussian_offdiag_bound" if off_diagonal else "standard_gaussian_bound"
    return _report(name, CASE_NA, leading, [("sqrt_p", sqrt_p), ("p", lin)], cfg)


def chz_bound(B: VarianceProfile, cfg: BoundConfig | None = None) -> BoundReport:
    """Comparator with leading term 2 sigma_R sigma_C + sigma_C^2."""
    cfg = cfg or BoundConfig()
    P = compute_params(B)
    one_eps = 1 + cfg.epsilon
    ce = cfg.c_eps()
    L = _log_term(B, cfg)
    leading = one_eps * (2 * P.sigma_R * P.sigma_C + P.sigma_C**2)
    sqrt_log = one_eps * ce * (P.sigma_C * P.sigma_star + P.sigma_R * P.sigma_star) * math.sqrt(L)
    log_term = one_eps * ce**2 * P.sigma_star**2 * L
    return _report(
        "chz_bound", CASE_NA, leading,
        [("sqrt_log", sqrt_log), ("log", log_term)], cfg, _zero_warning(B),
    )


def free_probability_bound(B: VarianceProfile, cfg: BoundConfig | None = None) -> BoundReport:
    """Comparator 2 sigma_inf + sigma_C^2 plus log^{3/4}(nd) and log^{3/2}(nd) terms."""
    cfg = cfg or BoundConfig()
    P = compute_params(B)
    L = math.log(B.n * B.d)
    if cfg.log_floor == "floored":
        L = max(L, 1.0)
    leading = 2 * P.sigma_inf + P.sigma_C**2
    mix = math.sqrt(P.sigma_star) * (P.sigma_C**1.5 + P.sigma_R**1.5)
    log34 = cfg.C_universal * mix * L**0.75
    log32 = cfg.C_universal * (P.sigma_star * P.sigma_C + P.sigma_star * P.sigma_R) * L**1.5
    return _report(
        "free_probability_bound", CASE_NA, leading,
        [("log34", log34), ("log32", log32)], cfg, _zero_warning(B),
    )


def lower_bound_schatten(B: VarianceProfile, p: int) -> BoundReport:
    """sigma_p + sigma_C^2 + sqrt(p) sigma_bar_p + p b_p^2, a lower bound up to
    an unspecified universal constant."""
    cfg = BoundConfig()
    P = compute_params(B)
    Q = compute_schatten_params(B, p)
    leading = Q.sigma_p + P.sigma_C**2
    warnings = ["lower bound holds up to an unspecified universal constant"]
    warnings += _zero_warning(B)
    return _report(
        "lower_bound_schatten", CASE_NA, leading,
        [("sqrt_p", math.sqrt(p) * Q.sigma_bar_p), ("schatten_tail", p * Q.b_p**2)],
        cfg, warnings,
    )


def lower_bound_opnorm(B: VarianceProfile) -> BoundReport:
    """sigma_inf + sigma_C^2, a lower bound up to an unspecified constant."""
    cfg = BoundConfig()
    P = compute_params(B)
    warnings = ["lower bound holds up to an unspecified universal constant"]
    warnings += _zero_warning(B)
    return _report(
        "lower_bound_opnorm", CASE_NA, P.sigma_inf + P.sigma_C**2, [], cfg, warnings,
    )


def kl_comparator(B: VarianceProfile, n: int | None = None) -> BoundReport:
    """Effective-rank benchmark ||Sigma|| * max(sqrt(n rk), rk) with
    Sigma = sum_j E X_j X_j^T (diagonal here) and rk = tr(Sigma)/||Sigma||.

    The source states the rate as a pair "(sqrt(n rk), rk)"; it is read as a
    maximum.  For profiles whose columns are not identically distributed this
    is a heuristic comparison point, not a proved bound.
    """
    cfg = BoundConfig()
    if n is None:
        n = B.n
    P = compute_params(B)
    rk = P.eff_rank
    total = P.sigma_R**2 * max(math.sqrt(n * rk), rk)
    warnings = [
        "pair (sqrt(n rk), rk) interpreted as a maximum",
        "heuristic comparator for non-iid profiles",
    ]
    warnings += _zero_warning(B)
    return _report("kl_comparator", CASE_NA, total, [], cfg, warnings)


ALL_PROFILE_BOUNDS = {
    "main_upper_bound": main_upper_bound,
    "chz_bound": chz_bound,
    "free_probability_bound": free_probability_bound,
    "lower_bound_opnorm": lambda B, cfg=None: lower_bound_opnorm(B),
    "kl_comparator": lambda B, cfg=None: kl_comparator(B),
}
