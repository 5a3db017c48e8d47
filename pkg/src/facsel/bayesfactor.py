"""Bayes factors of inclusion patterns against the null model.

Under conventional priors the Bayes factor of any model against the null is
a function of three readily available statistics: the SSE ratio
q = SSE_model / SSE_null, the sure-block rank kappa0 = k0, and the rank
kappa1 = r of the model's design matrix [X0 | X_sel | Z_sel].  Using the
rank -- rather than the column count -- is what extends the formula to the
rank-deficient indicator codings factors produce: for a full-rank model the
two coincide, and for a rank-deficient one the result is exactly the Bayes
factor obtained from a proper Gaussian prior built on a generalized inverse
(see :mod:`facsel.validation` for the numerical verification of that claim).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .design import DesignAssembly, ModelGamma, matrix_rank_sse, model_design
from .errors import DegenerateDataError
from .numerics import (HyperGPrior, bayes_factor_quadrature,
                       bayes_factor_robust_closed)

#: SSE ratios below this are indistinguishable from a perfect fit at double
#: precision; we refuse to report an astronomically large Bayes factor that
#: would be all rounding noise.
Q_FLOOR = 1e-13


@dataclass(frozen=True)
class BayesFactorValue:
    """log Bayes factor against the null, with its inputs kept for audit."""

    log_bf: float
    q: float
    kappa0: int
    kappa1: int
    rank_deficient: bool
    alias_of_null: bool = False

    @property
    def bf(self) -> float:
        return math.exp(self.log_bf)


class BayesFactorEngine:
    """Computes and caches Bayes factors for one (response, sure-block) pair.

    The cache is keyed on (q, kappa0, kappa1) after rounding q to 13
    significant digits; models whose selected columns span the same space
    (e.g. the ell-1 level subsets of a saturated factor pattern) then share
    one evaluation and get bitwise-identical results.  Cache insertion is a
    single dict write, so concurrent readers are safe under the GIL; in a
    worker-pool setting each worker may simply hold its own engine.
    """

    def __init__(self, y: np.ndarray, X0: np.ndarray,
                 prior: HyperGPrior | None = None):
        self.prior = prior if prior is not None else HyperGPrior.robust()
        self.y = y
        self.X0 = X0
        self.n = y.shape[0]
        r0, sse0 = matrix_rank_sse(X0, y)
        if r0 != X0.shape[1]:
            raise DegenerateDataError(
                f"sure-variable block has rank {r0} < {X0.shape[1]} columns"
            )
        yy = float(y @ y)
        if sse0 <= 0.0 or (yy > 0.0 and sse0 / yy < 1e-24):
            raise DegenerateDataError(
                "the sure variables fit the response exactly (SSE_0 = 0)"
            )
        self.k0 = X0.shape[1]
        self.sse0 = sse0
        self._cache: dict[tuple[float, int, int], float] = {}

    @classmethod
    def for_assembly(cls, assembly: DesignAssembly,
                     prior: HyperGPrior | None = None) -> "BayesFactorEngine":
        return cls(assembly.y, assembly.X0, prior)

    def log_bf_core(self, q: float, kappa1: int) -> float:
        """log of the Bayes-factor core at (q, k0, kappa1), memoized."""
        key = (q, self.k0, kappa1)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if self.prior.family == "robust":
            val = bayes_factor_robust_closed(q, self.k0, kappa1, self.n).logm
        else:
            val = bayes_factor_quadrature(q, self.k0, kappa1, self.n, self.prior).logm
        self._cache[key] = val
        return val

    def for_columns(self, cols: np.ndarray | None) -> BayesFactorValue:
        """Bayes factor of the model [X0 | cols] against [X0].

        ``cols`` is the n x w block of selected candidate columns (None or
        zero-width for the null model).
        """
        if cols is None or cols.shape[1] == 0:
            return BayesFactorValue(log_bf=0.0, q=1.0, kappa0=self.k0,
                                    kappa1=self.k0, rank_deficient=False)
        width = self.k0 + cols.shape[1]
        r, sse = matrix_rank_sse(np.hstack([self.X0, cols]), self.y)
        q = min(sse / self.sse0, 1.0)  # nested LS guarantees q <= 1 analytically
        if q < Q_FLOOR:
            raise DegenerateDataError(
                f"model fits the response to rounding noise (SSE ratio {q:.3e}); "
                f"Bayes factors are not meaningful at double precision"
            )
        q = float(f"{q:.13e}")  # canonical 13-significant-digit key
        if r == self.k0:
            # Added columns lie in the span of X0: observationally identical
            # to the null, so B = 1 by convention; flagged for the report.
            return BayesFactorValue(log_bf=0.0, q=q, kappa0=self.k0, kappa1=self.k0,
                                    rank_deficient=True, alias_of_null=True)
        return BayesFactorValue(
            log_bf=self.log_bf_core(q, r),
            q=q, kappa0=self.k0, kappa1=r,
            rank_deficient=(r < width),
        )

    def for_gamma(self, assembly: DesignAssembly, gamma: ModelGamma) -> BayesFactorValue:
        if gamma.is_null():
            return BayesFactorValue(log_bf=0.0, q=1.0, kappa0=self.k0,
                                    kappa1=self.k0, rank_deficient=False)
        M = model_design(assembly, gamma)
        return self.for_columns(M[:, self.k0:])

    @property
    def cache_size(self) -> int:
        return len(self._cache)


def bayes_factor(assembly: DesignAssembly, gamma: ModelGamma,
                 prior: HyperGPrior | None = None) -> BayesFactorValue:
    """One-shot Bayes factor of the model ``gamma`` selects vs. the null."""
    return BayesFactorEngine.for_assembly(assembly, prior).for_gamma(assembly, gamma)


def bf_invariance_report(assembly: DesignAssembly, factor: int | str,
                         prior: HyperGPrior | None = None
                         ) -> list[tuple[str, float]]:
    """Saturated-model log Bayes factor under every coding of one factor.

    Entries: the full indicator (rank-deficient) coding, then one baseline
    coding per level of the designated factor (that level's column dropped,
    its effect absorbed by the intercept).  All entries agree because the
    SSE and the design rank are coding-invariant; disagreement would signal
    a rank or least-squares bug.
    """
    r = assembly.schema.factor_index(factor) if isinstance(factor, str) else factor
    if not 0 <= r < assembly.p:
        raise ValueError(f"factor index {r} out of range")
    engine = BayesFactorEngine.for_assembly(assembly, prior)
    sl = assembly.level_slice(r)
    spec = assembly.schema.factors[r]

    def saturated_with(zblock: np.ndarray) -> float:
        cols = [assembly.X, assembly.Z[:, :sl.start], zblock, assembly.Z[:, sl.stop:]]
        return engine.for_columns(np.hstack([c for c in cols if c.shape[1]])).log_bf

    out = [("full-indicator", saturated_with(assembly.Z[:, sl]))]
    for j, label in enumerate(spec.levels):
        keep = [sl.start + i for i in range(len(spec.levels)) if i != j]
        out.append((f"baseline={label}", saturated_with(assembly.Z[:, keep])))
    return out
