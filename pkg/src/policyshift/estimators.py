"""Reward estimators for the target domain and the entire population.

Every estimator is reduced to one per-sample linear decomposition: with
coefficients (a_i, b_i) and policy values pi_i in [0, 1], the estimate is
mean_i[pi_i * a_i + b_i]. The decomposition makes the policy-learning
objective linear in the (smoothed) policy and lets one code path serve the
direct, inverse-probability-weighted and efficient estimators of both
estimands:

  estimand "r"  average outcome under the policy in the target domain
  estimand "v"  average outcome under the policy over both domains
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import CombinedDataset
from .nuisance import NuisanceSet, NuisanceValues

Z_95 = 1.959964  # two-sided 95% normal quantile

KINDS = ("direct", "ipw", "se")
ESTIMANDS = ("r", "v")


@dataclass(frozen=True)
class RewardCoefficients:
    """Per-sample decomposition estimate = mean(pi * a + b).

    ``center_weight`` carries the per-row weight multiplying the estimate in
    the influence decomposition (the estimand's mean-one identification
    weight), used to produce exactly mean-zero influence values.
    """

    a: np.ndarray
    b: np.ndarray
    center_weight: np.ndarray
    kind: str
    estimand: str

    @property
    def n(self) -> int:
        return len(self.a)


@dataclass(frozen=True)
class RewardEstimate:
    value: float
    std_error: float
    ci_low: float
    ci_high: float
    kind: str
    estimand: str
    influence_values: np.ndarray | None = None


def _eval_values(dataset: CombinedDataset, nuisances: NuisanceSet) -> NuisanceValues:
    return nuisances.values(dataset.covariates, np.arange(dataset.n))


def _source_arrays(dataset: CombinedDataset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Group indicator plus treatment/outcome with zeros on target rows."""
    g = dataset.group.astype(float)
    a = np.where(dataset.source_mask, dataset.treatment, 0.0)
    y = np.where(dataset.source_mask, dataset.outcome, 0.0)
    return g, a, y


def coefficients_direct_r(dataset: CombinedDataset, nuisances: NuisanceSet) -> RewardCoefficients:
    """Outcome-regression estimator of the target-domain reward.

    Target rows contribute the fitted surfaces scaled by 1/(1-q); source rows
    contribute nothing.
    """
    v = _eval_values(dataset, nuisances)
    q = dataset.source_fraction
    tgt = dataset.target_mask
    a = np.where(tgt, (v.mu1 - v.mu0) / (1.0 - q), 0.0)
    b = np.where(tgt, v.mu0 / (1.0 - q), 0.0)
    return RewardCoefficients(a=a, b=b, center_weight=_center_r(dataset), kind="direct", estimand="r")


def coefficients_ipw_r(dataset: CombinedDataset, nuisances: NuisanceSet) -> RewardCoefficients:
    """Weighting estimator of the target reward using both scores.

    Each source row is weighted by the odds of belonging to the target domain
    times the inverse probability of its observed arm; target rows contribute
    nothing.
    """
    v = _eval_values(dataset, nuisances)
    q = dataset.source_fraction
    g, arm, y = _source_arrays(dataset)
    w = (1.0 - v.s) / v.s
    on = g * arm * y * w / (v.e1 * (1.0 - q))
    off = g * (1.0 - arm) * y * w / ((1.0 - v.e1) * (1.0 - q))
    return RewardCoefficients(a=on - off, b=off, center_weight=_center_r(dataset), kind="ipw", estimand="r")


def coefficients_se_r(dataset: CombinedDataset, nuisances: NuisanceSet) -> RewardCoefficients:
    """Efficient (doubly robust) estimator of the target reward.

    Combines the regression terms on target rows with weighted outcome
    residuals on source rows; reduces exactly to the direct estimator when all
    residuals vanish and to the weighting estimator when both surfaces are 0.
    """
    v = _eval_values(dataset, nuisances)
    q = dataset.source_fraction
    g, arm, y = _source_arrays(dataset)
    tgt = dataset.target_mask
    w = (1.0 - v.s) / v.s
    on = g * arm * (y - v.mu1) * w / (v.e1 * (1.0 - q))
    off = g * (1.0 - arm) * (y - v.mu0) * w / ((1.0 - v.e1) * (1.0 - q))
    a = np.where(tgt, (v.mu1 - v.mu0) / (1.0 - q), on - off)
    b = np.where(tgt, v.mu0 / (1.0 - q), off)
    return RewardCoefficients(a=a, b=b, center_weight=_center_r(dataset), kind="se", estimand="r")


def coefficients_se_v(dataset: CombinedDataset, nuisances: NuisanceSet) -> RewardCoefficients:
    """Efficient estimator of the reward over the entire population.

    Every row contributes the regression terms; source rows add residual
    corrections weighted by 1/s(x).
    """
    v = _eval_values(dataset, nuisances)
    g, arm, y = _source_arrays(dataset)
    on = g * arm * (y - v.mu1) / (v.e1 * v.s)
    off = g * (1.0 - arm) * (y - v.mu0) / ((1.0 - v.e1) * v.s)
    a = (v.mu1 - v.mu0) + on - off
    b = v.mu0 + off
    return RewardCoefficients(a=a, b=b, center_weight=np.ones(dataset.n), kind="se", estimand="v")


def _center_r(dataset: CombinedDataset) -> np.ndarray:
    q = dataset.source_fraction
    return dataset.target_mask.astype(float) / (1.0 - q)


_BUILDERS = {
    ("direct", "r"): coefficients_direct_r,
    ("ipw", "r"): coefficients_ipw_r,
    ("se", "r"): coefficients_se_r,
    ("se", "v"): coefficients_se_v,
}


def reward_coefficients(
    dataset: CombinedDataset, nuisances: NuisanceSet, kind: str, estimand: str = "r"
) -> RewardCoefficients:
    try:
        builder = _BUILDERS[(kind, estimand)]
    except KeyError:
        raise ValueError(f"no estimator for kind={kind!r}, estimand={estimand!r}") from None
    return builder(dataset, nuisances)


def estimate(coeffs: RewardCoefficients, policy_values: np.ndarray) -> RewardEstimate:
    """Evaluate the decomposition at given policy values in [0, 1].

    The influence values subtract the estimate through the estimand's
    identification weight, which makes their mean exactly zero; the standard
    error is their sample standard deviation divided by sqrt(n).
    """
    pi = np.asarray(policy_values, dtype=float)
    if pi.shape != coeffs.a.shape:
        raise ValueError(f"policy values have shape {pi.shape}, expected {coeffs.a.shape}")
    contributions = pi * coeffs.a + coeffs.b
    value = float(contributions.mean())
    influence = contributions - value * coeffs.center_weight
    n = coeffs.n
    std_error = float(influence.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan")
    return RewardEstimate(
        value=value,
        std_error=std_error,
        ci_low=value - Z_95 * std_error,
        ci_high=value + Z_95 * std_error,
        kind=coeffs.kind,
        estimand=coeffs.estimand,
        influence_values=influence if coeffs.kind == "se" else None,
    )


def bias_diagnostic(
    dataset: CombinedDataset,
    true_nuisances: NuisanceSet,
    fitted_nuisances: NuisanceSet,
    policy_values: np.ndarray,
    signed: bool = False,
) -> float:
    """Finite-sample bias of the efficient target-reward estimator.

    Requires the true nuisance functions, so it is a simulation-only
    diagnostic. For each arm the summand multiplies the outcome-model error by
    a score-model error factor, hence it vanishes whenever either side is
    correct. Returns the absolute value unless ``signed``.
    """
    pi = np.asarray(policy_values, dtype=float)
    rows = np.arange(dataset.n)
    t = true_nuisances.values(dataset.covariates, rows)
    f = fitted_nuisances.values(dataset.covariates, rows)
    q = dataset.source_fraction
    e0_t, e0_f = 1.0 - t.e1, 1.0 - f.e1
    term1 = pi * (t.mu1 - f.mu1) / (1.0 - q) * (t.s * t.e1 * (1.0 - f.s) - f.s * f.e1 * (1.0 - t.s)) / (f.e1 * f.s)
    term0 = (1.0 - pi) * (t.mu0 - f.mu0) / (1.0 - q) * (t.s * e0_t * (1.0 - f.s) - f.s * e0_f * (1.0 - t.s)) / (e0_f * f.s)
    total = float(np.mean(term1 + term0))
    return total if signed else abs(total)


@dataclass(frozen=True)
class BoundReport:
    """High-probability generalization bound pieces for a learned policy."""

    eta: float
    policy_class_size: int
    bound_term: float
    bias_diagnostic: float | None = None


def generalization_bound(
    dataset: CombinedDataset,
    nuisances: NuisanceSet,
    eta: float,
    policy_class_size: int,
    bias: float | None = None,
) -> BoundReport:
    """Finite-class deviation bound for the efficient reward estimate.

    Evaluates sqrt(log(2|Pi|/eta) / (2 n^2) * sum_i r_i^2) where r_i collects
    the weighted outcome residual of source row i; target rows carry no
    outcome and contribute zero.
    """
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    if policy_class_size < 1:
        raise ValueError("policy_class_size must be >= 1")
    v = _eval_values(dataset, nuisances)
    q = dataset.source_fraction
    src = dataset.source_mask
    arm = dataset.treatment[src]
    resid = dataset.outcome[src] - np.where(arm == 1, v.mu1[src], v.mu0[src])
    e_arm = np.where(arm == 1, v.e1[src], 1.0 - v.e1[src])
    s = v.s[src]
    n = dataset.n
    total = np.sum(resid**2 * (1.0 - s) ** 2 / ((1.0 - q) ** 2 * e_arm**2 * s**2))
    term = float(np.sqrt(np.log(2.0 * policy_class_size / eta) / (2.0 * n * n) * total))
    return BoundReport(eta=eta, policy_class_size=policy_class_size, bound_term=term, bias_diagnostic=bias)
