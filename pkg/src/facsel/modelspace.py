"""Prior probabilities over the inclusion-pattern space.

Three schemes over the 2^(k+L) patterns (k candidate variables, L factor
level columns in total):

* ``constant`` -- every pattern gets 1 / 2^(k+L).
* ``scott-berger`` -- uniform over pattern sizes, then uniform within a
  size, treating all k+L columns alike: [ (K+1) C(K, s) ]^{-1} with
  K = k+L and s the number of active columns.  Corrects multiplicity over
  columns but ignores the grouping of levels into factors.
* ``hierarchical`` (recommended, the default) -- two stages.  Which
  predictors are active (variables and factors as units, a factor being
  active when at least one of its levels is) gets
  [ (k+p+1) C(k+p, m1+m2) ]^{-1}; conditionally, the active-level pattern
  of each active factor h gets [ ell_h C(ell_h, c_h) ]^{-1} where c_h >= 1
  is its number of active levels.  Under this prior every variable and
  every factor has marginal activation probability exactly 1/2, however
  many levels the factors carry.

All probabilities are computed and stored in log scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .design import DesignAssembly, ModelGamma
from .errors import CapacityError, NumericError

PRIOR_KINDS = ("constant", "scott-berger", "hierarchical")

#: Exhaustive enumeration is refused beyond this many inclusion bits.
ENUMERATION_CAP = 25


@lru_cache(maxsize=None)
def _log_comb_row(n: int) -> tuple[float, ...]:
    return tuple(math.log(math.comb(n, s)) for s in range(n + 1))


@dataclass(frozen=True)
class ModelPriorScheme:
    """One prior scheme bound to fixed dimensions (k variables, and the
    level counts of the p factors)."""

    kind: str
    k: int
    ells: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in PRIOR_KINDS:
            raise ValueError(f"unknown prior scheme {self.kind!r}; "
                             f"choose from {PRIOR_KINDS}")
        if self.k < 0 or any(ell < 1 for ell in self.ells):
            raise ValueError("dimensions must be nonnegative (levels >= 1)")

    @classmethod
    def for_assembly(cls, kind: str, assembly: DesignAssembly) -> "ModelPriorScheme":
        return cls(kind=kind, k=assembly.k, ells=assembly.ells)

    @property
    def p(self) -> int:
        return len(self.ells)

    @property
    def L(self) -> int:
        return sum(self.ells)

    @property
    def K(self) -> int:
        return self.k + self.L

    def _check_gamma(self, gamma: ModelGamma) -> None:
        if len(gamma.variable_bits) != self.k or len(gamma.level_bits) != self.L:
            raise ValueError(
                f"gamma dimensions ({len(gamma.variable_bits)}, {len(gamma.level_bits)}) "
                f"do not match scheme ({self.k}, {self.L})"
            )

    def log_prior(self, gamma: ModelGamma) -> float:
        self._check_gamma(gamma)
        if self.kind == "constant":
            return log_prior_constant(gamma, self.k, self.ells)
        if self.kind == "scott-berger":
            return log_prior_scott_berger_flat(gamma, self.k, self.ells)
        return log_prior_hierarchical(gamma, self.k, self.ells)

    def prior(self, gamma: ModelGamma) -> float:
        return math.exp(self.log_prior(gamma))


def log_prior_constant(gamma: ModelGamma, k: int, ells: Sequence[int]) -> float:
    return -(k + sum(ells)) * math.log(2.0)


def log_prior_scott_berger_flat(gamma: ModelGamma, k: int, ells: Sequence[int]) -> float:
    K = k + sum(ells)
    return -math.log(K + 1.0) - _log_comb_row(K)[gamma.size]


def log_prior_hierarchical(gamma: ModelGamma, k: int, ells: Sequence[int]) -> float:
    counts = gamma.level_counts(ells)
    m1 = sum(gamma.variable_bits)
    m2 = sum(1 for c in counts if c >= 1)
    kp = k + len(ells)
    logp = -math.log(kp + 1.0) - _log_comb_row(kp)[m1 + m2]
    for ell, c in zip(ells, counts):
        if c >= 1:
            logp -= math.log(ell) + _log_comb_row(ell)[c]
    return logp


# ----------------------------------------------------------------------
# exhaustive audit
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class PriorMassAudit:
    """Exhaustive-enumeration summary of one scheme's prior mass."""

    scheme: ModelPriorScheme
    model_count: int
    total_mass: float
    size_mass: tuple[float, ...]            # indexed by number of active columns
    variable_marginals: tuple[float, ...]   # P(variable j active)
    factor_marginals: tuple[float, ...]     # P(factor r has >= 1 active level)
    level_marginals: tuple[float, ...]      # P(level column active), factor blocks in order


def prior_mass_audit(scheme: ModelPriorScheme, tol: float = 1e-12) -> PriorMassAudit:
    """Enumerate every pattern, sum its prior, and verify the invariants.

    Checks total mass = 1 and, where the scheme promises it, marginal
    activation probability 1/2 (columns for constant/scott-berger schemes;
    variables and whole factors for the hierarchical scheme).  Violations
    raise :class:`NumericError` -- they would mean the formulas are wrong.
    """
    k, L, K = scheme.k, scheme.L, scheme.K
    if K > ENUMERATION_CAP:
        raise CapacityError(
            f"k+L={K} inclusion bits exceed the exhaustive bound {ENUMERATION_CAP}"
        )
    priors = []
    col_marg = np.zeros(K)
    size_mass = np.zeros(K + 1)
    factor_marg = np.zeros(scheme.p)
    for m in range(1 << K):
        gamma = ModelGamma.from_index(m, k, L)
        pr = math.exp(scheme.log_prior(gamma))
        priors.append(pr)
        size_mass[gamma.size] += pr
        bits = gamma.variable_bits + gamma.level_bits
        for j in range(K):
            if bits[j]:
                col_marg[j] += pr
        for r, c in enumerate(gamma.level_counts(scheme.ells)):
            if c >= 1:
                factor_marg[r] += pr
    total = math.fsum(priors)

    if abs(total - 1.0) > tol:
        raise NumericError(f"prior mass sums to {total!r}, not 1 (scheme {scheme.kind})")
    if scheme.kind in ("constant", "scott-berger"):
        off = np.abs(col_marg - 0.5).max() if K else 0.0
        if off > tol:
            raise NumericError(
                f"column marginals deviate from 1/2 by {off:g} (scheme {scheme.kind})"
            )
    else:
        devs = [abs(v - 0.5) for v in col_marg[:k]]
        devs += [abs(v - 0.5) for v in factor_marg]
        if devs and max(devs) > tol:
            raise NumericError(
                f"predictor marginals deviate from 1/2 by {max(devs):g} (hierarchical)"
            )
    return PriorMassAudit(
        scheme=scheme,
        model_count=1 << K,
        total_mass=total,
        size_mass=tuple(size_mass),
        variable_marginals=tuple(col_marg[:k]),
        factor_marginals=tuple(factor_marg),
        level_marginals=tuple(col_marg[k:]),
    )
