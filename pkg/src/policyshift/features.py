"""Deterministic feature expansions shared by nuisance models and policies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEATURE_KINDS = ("intercept", "raw", "quadratic")


@dataclass(frozen=True)
class FeatureMap:
    """Maps a covariate vector to a model feature vector (intercept first).

    kind:
        "intercept"  constant term only
        "raw"        intercept + linear terms
        "quadratic"  intercept + linear + squares + pairwise products
    """

    kind: str
    p_in: int

    def __post_init__(self) -> None:
        if self.kind not in FEATURE_KINDS:
            raise ValueError(f"unknown feature map kind {self.kind!r}; expected one of {FEATURE_KINDS}")
        if self.p_in < 1:
            raise ValueError("p_in must be >= 1")

    @property
    def p_out(self) -> int:
        if self.kind == "intercept":
            return 1
        if self.kind == "raw":
            return self.p_in + 1
        p = self.p_in
        return 1 + 2 * p + p * (p - 1) // 2

    def expand(self, x: np.ndarray) -> np.ndarray:
        """Expand covariates (n, p_in) or (p_in,) into features (n, p_out)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        n, p = x.shape
        if p != self.p_in:
            raise ValueError(f"expected {self.p_in} covariates, got {p}")
        if self.kind == "intercept":
            return np.ones((n, 1))
        if self.kind == "raw":
            return np.hstack([np.ones((n, 1)), x])
        cols = [np.ones((n, 1)), x, x**2]
        cols += [(x[:, i] * x[:, j])[:, None] for i in range(p) for j in range(i + 1, p)]
        return np.hstack(cols)


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out
