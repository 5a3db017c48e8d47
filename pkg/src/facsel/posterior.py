"""Exhaustive posterior over the inclusion-pattern space.

Every pattern gamma gets log B_gamma + log P(M_gamma); a single fixed-order
log-sum-exp normalizes them (deterministic enumeration order: pattern m
activates column j iff bit j of m is set, variables first, then level
columns).  The report carries per-model posteriors plus the three inclusion
summaries:

* variable inclusion -- sum of posteriors of models containing the variable;
* factor inclusion  -- sum over models where the factor has >= 1 active level;
* level inclusion   -- sum over models containing that level column (raw
  sums; not renormalized by the factor's inclusion).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bayesfactor import BayesFactorEngine, BayesFactorValue
from .design import DesignAssembly, ModelGamma
from .errors import CapacityError
from .modelspace import ENUMERATION_CAP, ModelPriorScheme
from .numerics import HyperGPrior


@dataclass(frozen=True)
class ModelResult:
    gamma: ModelGamma
    log_prior: float
    bf: BayesFactorValue
    log_post_unnorm: float
    log_post: float

    @property
    def log_bf(self) -> float:
        return self.bf.log_bf

    @property
    def post(self) -> float:
        return math.exp(self.log_post)


@dataclass(frozen=True)
class TopModel:
    rank: int
    result: ModelResult
    alias_group: int | None   # models sharing one (q, kappa0, kappa1) evaluation
    alias_group_size: int


@dataclass(frozen=True)
class PosteriorReport:
    variable_names: tuple[str, ...]
    factor_names: tuple[str, ...]
    level_labels: tuple[tuple[str, ...], ...]
    ells: tuple[int, ...]
    n: int
    k0: int
    scheme_kind: str
    hyper_label: str
    models: tuple[ModelResult, ...]
    log_normalizer: float
    null_posterior: float
    variable_inclusion: tuple[float, ...]
    factor_inclusion: tuple[float, ...]
    level_inclusion: tuple[tuple[float, ...], ...]
    top_models: tuple[TopModel, ...]

    @property
    def k(self) -> int:
        return len(self.variable_names)

    @property
    def p(self) -> int:
        return len(self.factor_names)

    @property
    def model_count(self) -> int:
        return len(self.models)


# ----------------------------------------------------------------------
# enumeration core (shared by the standard and the baseline-recoded paths)
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class _Problem:
    """One enumeration instance: response, sure block, candidate columns."""
    y: np.ndarray
    X0: np.ndarray
    var_cols: np.ndarray            # n x k
    level_cols: np.ndarray          # n x L', factor blocks in order
    ells: tuple[int, ...]
    variable_names: tuple[str, ...]
    factor_names: tuple[str, ...]
    level_labels: tuple[tuple[str, ...], ...]


def _problem_from_assembly(assembly: DesignAssembly) -> _Problem:
    schema = assembly.schema
    return _Problem(
        y=assembly.y, X0=assembly.X0,
        var_cols=assembly.X, level_cols=assembly.Z,
        ells=schema.ells,
        variable_names=schema.variables,
        factor_names=tuple(f.name for f in schema.factors),
        level_labels=tuple(f.levels for f in schema.factors),
    )


def _enumerate(problem: _Problem, scheme_kind: str,
               hyper_prior: HyperGPrior | None, top_n: int) -> PosteriorReport:
    k = problem.var_cols.shape[1]
    L = problem.level_cols.shape[1]
    K = k + L
    if K > ENUMERATION_CAP:
        raise CapacityError(
            f"k+L={K} inclusion bits mean 2^{K} models; the exhaustive bound is "
            f"{ENUMERATION_CAP}. Reduce the candidate set (stochastic search is "
            f"out of scope)."
        )
    scheme = ModelPriorScheme(kind=scheme_kind, k=k, ells=problem.ells)
    engine = BayesFactorEngine(problem.y, problem.X0, hyper_prior)
    all_cols = np.hstack([problem.var_cols, problem.level_cols])

    gammas: list[ModelGamma] = []
    bfs: list[BayesFactorValue] = []
    log_priors = np.empty(1 << K)
    log_unnorm = np.empty(1 << K)
    for m in range(1 << K):
        gamma = ModelGamma.from_index(m, k, L)
        sel = [j for j in range(K) if (m >> j) & 1]
        bf = engine.for_columns(all_cols[:, sel] if sel else None)
        lp = scheme.log_prior(gamma)
        gammas.append(gamma)
        bfs.append(bf)
        log_priors[m] = lp
        log_unnorm[m] = bf.log_bf + lp

    shift = float(log_unnorm.max())
    log_norm = shift + math.log(float(np.add.reduce(np.exp(log_unnorm - shift))))
    log_post = log_unnorm - log_norm
    post = np.exp(log_post)

    models = tuple(
        ModelResult(gamma=g, log_prior=float(lp), bf=bf,
                    log_post_unnorm=float(lu), log_post=float(lo))
        for g, lp, bf, lu, lo in zip(gammas, log_priors, bfs, log_unnorm, log_post)
    )

    var_inc = np.zeros(k)
    lev_inc = np.zeros(L)
    fac_inc = np.zeros(len(problem.ells))
    for m, g in enumerate(gammas):
        w = post[m]
        for j, b in enumerate(g.variable_bits):
            if b:
                var_inc[j] += w
        for j, b in enumerate(g.level_bits):
            if b:
                lev_inc[j] += w
        for r, c in enumerate(g.level_counts(problem.ells)):
            if c >= 1:
                fac_inc[r] += w

    # alias groups: models sharing one cached (q, kappa0, kappa1) evaluation
    groups: dict[tuple[float, int, int], list[int]] = {}
    for m, bf in enumerate(bfs):
        groups.setdefault((bf.q, bf.kappa0, bf.kappa1), []).append(m)
    group_id = {key: i for i, key in enumerate(groups)}

    order = sorted(range(len(models)), key=lambda m: (-log_post[m], m))
    top = []
    for rank, m in enumerate(order[:max(top_n, 0)], start=1):
        bf = bfs[m]
        key = (bf.q, bf.kappa0, bf.kappa1)
        size = len(groups[key])
        top.append(TopModel(rank=rank, result=models[m],
                            alias_group=group_id[key] if size > 1 else None,
                            alias_group_size=size))

    lev_by_factor, off = [], 0
    for ell in problem.ells:
        lev_by_factor.append(tuple(float(v) for v in lev_inc[off:off + ell]))
        off += ell

    return PosteriorReport(
        variable_names=problem.variable_names,
        factor_names=problem.factor_names,
        level_labels=problem.level_labels,
        ells=problem.ells,
        n=problem.y.shape[0],
        k0=problem.X0.shape[1],
        scheme_kind=scheme_kind,
        hyper_label=engine.prior.label,
        models=models,
        log_normalizer=log_norm,
        null_posterior=float(post[0]),
        variable_inclusion=tuple(float(v) for v in var_inc),
        factor_inclusion=tuple(float(v) for v in fac_inc),
        level_inclusion=tuple(lev_by_factor),
        top_models=tuple(top),
    )


def enumerate_posterior(assembly: DesignAssembly,
                        prior_scheme: str | ModelPriorScheme = "hierarchical",
                        hyper_prior: HyperGPrior | None = None,
                        top_n: int = 10) -> PosteriorReport:
    """Score every model and assemble the posterior report."""
    kind = prior_scheme.kind if isinstance(prior_scheme, ModelPriorScheme) else prior_scheme
    return _enumerate(_problem_from_assembly(assembly), kind, hyper_prior, top_n)


def factor_inclusion(report: PosteriorReport, r: int) -> float:
    """P(factor r has at least one active level | y)."""
    if not 0 <= r < report.p:
        raise IndexError(f"factor index {r} out of range [0, {report.p})")
    return report.factor_inclusion[r]


def variable_inclusion(report: PosteriorReport, j: int) -> float:
    if not 0 <= j < report.k:
        raise IndexError(f"variable index {j} out of range [0, {report.k})")
    return report.variable_inclusion[j]


def level_inclusion(report: PosteriorReport, r: int, j: int) -> float:
    """P(level j of factor r active | y) -- a raw sum over models."""
    if not 0 <= r < report.p:
        raise IndexError(f"factor index {r} out of range [0, {report.p})")
    if not 0 <= j < report.ells[r]:
        raise IndexError(f"level index {j} out of range [0, {report.ells[r]})")
    return report.level_inclusion[r][j]


def baseline_sensitivity_demo(assembly: DesignAssembly, factor: int | str,
                              baseline_level: int | str,
                              prior_scheme: str = "hierarchical",
                              hyper_prior: HyperGPrior | None = None) -> float:
    """P(factor active | y) when the factor is recoded against a baseline.

    The designated factor's baseline column is dropped, its effect silently
    absorbed by the intercept, and the reduced space (the remaining ell-1
    columns treated as the factor's level set) is enumerated.  This is the
    pathology demonstration: the returned probability depends on which level
    is the baseline, whereas the full-indicator path needs no such choice.
    """
    r = assembly.schema.factor_index(factor) if isinstance(factor, str) else factor
    if not 0 <= r < assembly.p:
        raise ValueError(f"factor index {r} out of range")
    spec = assembly.schema.factors[r]
    if len(spec.levels) < 3:
        raise ValueError(
            f"baseline demo needs a factor with >= 3 levels; {spec.name!r} has "
            f"{len(spec.levels)}"
        )
    if isinstance(baseline_level, str):
        if baseline_level not in spec.levels:
            raise ValueError(f"{baseline_level!r} is not a level of {spec.name!r}")
        b = spec.levels.index(baseline_level)
    else:
        b = baseline_level
        if not 0 <= b < len(spec.levels):
            raise ValueError(f"baseline level index {b} out of range")

    sl = assembly.level_slice(r)
    keep_local = [i for i in range(len(spec.levels)) if i != b]
    new_block = assembly.Z[:, [sl.start + i for i in keep_local]]
    level_cols = np.hstack([assembly.Z[:, :sl.start], new_block, assembly.Z[:, sl.stop:]])
    ells = list(assembly.ells)
    ells[r] = ells[r] - 1
    labels = list(assembly.schema.factors[i].levels for i in range(assembly.p))
    labels[r] = tuple(spec.levels[i] for i in keep_local)

    problem = _Problem(
        y=assembly.y, X0=assembly.X0,
        var_cols=assembly.X, level_cols=level_cols,
        ells=tuple(ells),
        variable_names=assembly.schema.variables,
        factor_names=tuple(f.name for f in assembly.schema.factors),
        level_labels=tuple(labels),
    )
    report = _enumerate(problem, prior_scheme, hyper_prior, top_n=0)
    return report.factor_inclusion[r]
