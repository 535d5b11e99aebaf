"""Nuisance models: outcome regressions, propensity score and sampling score.

All four models are served through a `NuisanceSet`, which clips predicted
probabilities away from 0 and 1 so that downstream inverse weights stay
bounded. The reference fitters are ridge least squares (outcomes) and
ridge-penalized logistic regression via iteratively reweighted least squares
(both scores); the intercept is never penalized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .data import CombinedDataset
from .features import FeatureMap, sigmoid

DEFAULT_CLIP = 0.01
DEFAULT_OUTCOME_RIDGE = 1e-4
DEFAULT_LOGISTIC_RIDGE = 1e-2
IRLS_MAX_ITER = 100
IRLS_TOL = 1e-8
_DIVERGED_COEF = 1e4


class FitError(ValueError):
    """A nuisance model could not be fitted from the data provided."""


def _penalty_matrix(k: int, ridge: float) -> np.ndarray:
    D = np.eye(k) * ridge
    D[0, 0] = 0.0  # intercept unpenalized
    return D


def _solve_spd(A: np.ndarray, rhs: np.ndarray, context: str) -> np.ndarray:
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        raise FitError(f"{context}: singular normal equations; use a positive ridge") from None
    z = np.linalg.solve(L, rhs)
    return np.linalg.solve(L.T, z)


@dataclass(frozen=True)
class RidgeModel:
    """Linear predictor over a feature map; callable on covariates."""

    beta: np.ndarray
    fmap: FeatureMap

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.fmap.expand(x) @ self.beta


@dataclass(frozen=True)
class LogisticModel:
    """Probability predictor sigmoid(features @ beta); callable on covariates."""

    beta: np.ndarray
    fmap: FeatureMap

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return sigmoid(self.fmap.expand(x) @ self.beta)


def fit_ridge(features: np.ndarray, y: np.ndarray, fmap: FeatureMap, ridge: float) -> RidgeModel:
    """Exact solution of the ridge normal equations (intercept unpenalized)."""
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    Phi = fmap.expand(features)
    n, k = Phi.shape
    if n < k:
        raise FitError(f"need at least {k} rows to fit {k} coefficients, got {n}")
    A = Phi.T @ Phi + _penalty_matrix(k, ridge)
    beta = _solve_spd(A, Phi.T @ np.asarray(y, dtype=float), "ridge regression")
    return RidgeModel(beta=beta, fmap=fmap)


def fit_outcome(dataset: CombinedDataset, arm: int, fmap: FeatureMap, ridge: float = DEFAULT_OUTCOME_RIDGE) -> RidgeModel:
    """Regress the outcome on covariates over source rows with the given arm."""
    if arm not in (0, 1):
        raise ValueError("arm must be 0 or 1")
    rows = dataset.source_mask & (dataset.treatment == arm)
    n_rows = int(rows.sum())
    if n_rows < fmap.p_out:
        raise FitError(f"outcome model for arm {arm}: {n_rows} source rows, need at least {fmap.p_out}")
    return fit_ridge(dataset.covariates[rows], dataset.outcome[rows], fmap, ridge)


def _penalized_loglik(Phi: np.ndarray, y: np.ndarray, beta: np.ndarray, ridge: float) -> float:
    eta = Phi @ beta
    # log-likelihood written to avoid overflow: y*eta - log(1+exp(eta))
    ll = float(np.sum(y * eta - np.logaddexp(0.0, eta)))
    return ll - 0.5 * ridge * float(np.sum(beta[1:] ** 2))


def fit_logistic(
    features: np.ndarray,
    labels: np.ndarray,
    fmap: FeatureMap,
    ridge: float = DEFAULT_LOGISTIC_RIDGE,
    max_iter: int = IRLS_MAX_ITER,
    tol: float = IRLS_TOL,
    trace: list | None = None,
) -> LogisticModel:
    """Maximize the ridge-penalized Bernoulli log-likelihood by IRLS.

    Newton steps are halved whenever the penalized log-likelihood would
    decrease, so the objective is non-decreasing across iterations. Stops when
    the largest absolute coefficient update falls below ``tol``. If ``trace``
    is a list, the objective after every iteration is appended to it.
    """
    y = np.asarray(labels, dtype=float)
    if set(np.unique(y)) - {0.0, 1.0}:
        raise ValueError("labels must be 0/1")
    if y.min() == y.max():
        raise FitError("labels contain a single class; cannot fit a logistic model")
    Phi = fmap.expand(features)
    k = Phi.shape[1]
    D = _penalty_matrix(k, ridge)
    beta = np.zeros(k)
    obj = _penalized_loglik(Phi, y, beta, ridge)
    if trace is not None:
        trace.append(obj)
    for _ in range(max_iter):
        p = sigmoid(Phi @ beta)
        w = p * (1.0 - p)
        grad = Phi.T @ (y - p) - D @ beta
        H = (Phi * w[:, None]).T @ Phi + D
        step = _solve_spd(H, grad, "logistic regression")
        scale = 1.0
        while True:
            candidate = beta + scale * step
            new_obj = _penalized_loglik(Phi, y, candidate, ridge)
            if new_obj >= obj - 1e-12 or scale < 1e-8:
                break
            scale *= 0.5
        delta = float(np.max(np.abs(scale * step)))
        beta = beta + scale * step
        obj = new_obj
        if trace is not None:
            trace.append(obj)
        if ridge == 0 and float(np.max(np.abs(beta))) > _DIVERGED_COEF:
            raise FitError("logistic coefficients diverged (separated data); use a positive ridge")
        if delta < tol:
            break
    return LogisticModel(beta=beta, fmap=fmap)


def fit_propensity(
    dataset: CombinedDataset,
    fmap: FeatureMap,
    ridge: float = DEFAULT_LOGISTIC_RIDGE,
    max_iter: int = IRLS_MAX_ITER,
    tol: float = IRLS_TOL,
) -> LogisticModel:
    """Probability of treatment given covariates, fitted on source rows only."""
    src = dataset.source_mask
    return fit_logistic(dataset.covariates[src], dataset.treatment[src], fmap, ridge, max_iter, tol)


def fit_sampling_score(
    dataset: CombinedDataset,
    fmap: FeatureMap,
    ridge: float = DEFAULT_LOGISTIC_RIDGE,
    max_iter: int = IRLS_MAX_ITER,
    tol: float = IRLS_TOL,
) -> LogisticModel:
    """Probability of belonging to the source domain, fitted on all rows."""
    return fit_logistic(dataset.covariates, dataset.group.astype(float), fmap, ridge, max_iter, tol)


Predictor = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class NuisanceValues:
    mu0: np.ndarray
    mu1: np.ndarray
    e1: np.ndarray
    s: np.ndarray


@dataclass(frozen=True)
class NuisanceSet:
    """The four fitted (or known) nuisance functions plus clipping.

    With cross-fitting, ``fold_sets[k]`` holds the models trained without fold
    ``k`` and ``fold_assignment`` maps training rows to folds; predictions at a
    training row then come from the complementary models.
    """

    mu0: Predictor
    mu1: Predictor
    e1: Predictor
    s: Predictor
    clip: float = DEFAULT_CLIP
    fold_assignment: np.ndarray | None = None
    fold_sets: tuple["NuisanceSet", ...] = field(default=())

    def __post_init__(self) -> None:
        if not 0.0 < self.clip < 0.5:
            raise ValueError("clip must lie in (0, 0.5)")

    def _clip(self, p: np.ndarray) -> np.ndarray:
        return np.clip(p, self.clip, 1.0 - self.clip)

    def values(self, x: np.ndarray, row_indices: np.ndarray | None = None) -> NuisanceValues:
        """Evaluate all four functions at covariate rows ``x``.

        ``row_indices`` identifies training rows when cross-fitting is active,
        routing each row to the models fitted without its fold. Probabilities
        are clipped into [clip, 1-clip]; regressions are returned as is.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.fold_sets and row_indices is not None:
            row_indices = np.asarray(row_indices)
            out = {name: np.empty(x.shape[0]) for name in ("mu0", "mu1", "e1", "s")}
            folds = self.fold_assignment[row_indices]
            for k, sub in enumerate(self.fold_sets):
                mask = folds == k
                if not mask.any():
                    continue
                vals = sub.values(x[mask])
                for name in out:
                    out[name][mask] = getattr(vals, name)
            return NuisanceValues(**out)
        return NuisanceValues(
            mu0=np.asarray(self.mu0(x), dtype=float),
            mu1=np.asarray(self.mu1(x), dtype=float),
            e1=self._clip(np.asarray(self.e1(x), dtype=float)),
            s=self._clip(np.asarray(self.s(x), dtype=float)),
        )

    def coefficients(self) -> dict[str, list[float] | None]:
        """Fitted coefficient vectors where available (for report provenance)."""
        out: dict[str, list[float] | None] = {}
        for name in ("mu0", "mu1", "e1", "s"):
            beta = getattr(getattr(self, name), "beta", None)
            out[name] = None if beta is None else [float(b) for b in beta]
        return out


def predict_clipped(nuisances: NuisanceSet, x: np.ndarray, row_index: int | None = None) -> tuple[float, float, float, float]:
    """Evaluate (mu0, mu1, e1, s) at one covariate vector, probabilities clipped."""
    rows = None if row_index is None else np.array([row_index])
    v = nuisances.values(np.atleast_2d(x), rows)
    return float(v.mu0[0]), float(v.mu1[0]), float(v.e1[0]), float(v.s[0])


@dataclass(frozen=True)
class NuisanceConfig:
    """Reference configuration: which feature map and ridge per model."""

    outcome_map: str = "raw"
    propensity_map: str = "raw"
    sampling_map: str = "quadratic"
    outcome_ridge: float = DEFAULT_OUTCOME_RIDGE
    logistic_ridge: float = DEFAULT_LOGISTIC_RIDGE
    clip: float = DEFAULT_CLIP
    folds: int = 1
    max_iter: int = IRLS_MAX_ITER
    tol: float = IRLS_TOL


def crossfit_folds(dataset: CombinedDataset, folds: int) -> np.ndarray:
    """Deterministic stratified fold assignment.

    Rows are dealt round-robin within each stratum (source-treated,
    source-control, target), so every fold sees both arms and both domains.
    """
    assignment = np.zeros(dataset.n, dtype=int)
    strata = [
        dataset.source_mask & (dataset.treatment == 1),
        dataset.source_mask & (dataset.treatment != 1),
        dataset.target_mask,
    ]
    for stratum in strata:
        idx = np.flatnonzero(stratum)
        assignment[idx] = np.arange(len(idx)) % folds
    return assignment


def _subset(dataset: CombinedDataset, keep: np.ndarray) -> CombinedDataset:
    return CombinedDataset(
        covariates=dataset.covariates[keep],
        group=dataset.group[keep],
        treatment=dataset.treatment[keep],
        outcome=dataset.outcome[keep],
        covariate_names=dataset.covariate_names,
    )


def fit_nuisances(dataset: CombinedDataset, config: NuisanceConfig | None = None) -> NuisanceSet:
    """Fit all four nuisance models under one configuration.

    With ``config.folds > 1`` the models are cross-fitted: each fold's rows are
    predicted by models trained on the remaining folds.
    """
    config = config or NuisanceConfig()
    p = dataset.p
    omap = FeatureMap(config.outcome_map, p)
    pmap = FeatureMap(config.propensity_map, p)
    smap = FeatureMap(config.sampling_map, p)

    def _fit_single(ds: CombinedDataset) -> NuisanceSet:
        return NuisanceSet(
            mu0=fit_outcome(ds, 0, omap, config.outcome_ridge),
            mu1=fit_outcome(ds, 1, omap, config.outcome_ridge),
            e1=fit_propensity(ds, pmap, config.logistic_ridge, config.max_iter, config.tol),
            s=fit_sampling_score(ds, smap, config.logistic_ridge, config.max_iter, config.tol),
            clip=config.clip,
        )

    if config.folds <= 1:
        return _fit_single(dataset)

    assignment = crossfit_folds(dataset, config.folds)
    fold_sets = tuple(_fit_single(_subset(dataset, assignment != k)) for k in range(config.folds))
    full = _fit_single(dataset)
    return NuisanceSet(
        mu0=full.mu0,
        mu1=full.mu1,
        e1=full.e1,
        s=full.s,
        clip=config.clip,
        fold_assignment=assignment,
        fold_sets=fold_sets,
    )
