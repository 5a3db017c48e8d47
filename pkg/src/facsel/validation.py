"""Numerical oracles for the linear-algebra facts the method rests on.

Four check families, all runnable through ``facsel validate``:

* generalized inverse -- for V = (I - P0) X from a rank-deficient design and
  any admissible nullspace completion T, the matrix S = (V'V + T)^{-1} must
  satisfy V'V S V'V = V'V;
* explicit-prior marginal -- the Bayes factor computed by brute-force
  marginalization under the proper prior N(a | 0, g sigma^2 S) (sure
  coefficients flat, sigma with density 1/sigma, g numerically integrated)
  must equal the rank-corrected closed form, for every admissible T;
* rank identity -- rank((I - P0) X) = rank([X0 | X]) - k0;
* testability -- a linear hypothesis L eta = 0 on a design Z is testable iff
  every row of L lies in the row space of Z; the all-levels-zero hypothesis
  on an indicator coding is the canonical non-testable example.

The explicit-prior oracle is deliberately independent of the SSE-ratio
shortcut: it works with n x n covariance determinants and quadratic forms,
marginalizing the sure coefficients and sigma analytically so only the
one-dimensional g integral is numeric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .design import DesignAssembly, ModelGamma, matrix_rank_sse, model_design
from .errors import ConstructionError
from .numerics import HyperGPrior, _log_quad, bayes_factor_quadrature, \
    bayes_factor_robust_closed

T_VARIANTS = ("null_projector", "scaled_null_projector", "random_psd_in_nullspace")

_EIG_EPS = 2.0 ** -52


def _split_spectrum(VtV: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors of V'V split into (range, nullspace) blocks."""
    vals, vecs = np.linalg.eigh(VtV)
    tol = max(vals.max(), 0.0) * VtV.shape[0] * _EIG_EPS
    keep = vals > tol
    return vecs[:, keep], vecs[:, ~keep]


def build_nullspace_psd(V: np.ndarray, variant: str = "null_projector", *,
                        c: float = 1.0, seed: int | None = None) -> np.ndarray:
    """A symmetric PSD matrix T of rank ell - r supported on null(V'V).

    Variants: the orthogonal projector Q2 Q2' onto the nullspace, a positive
    multiple c Q2 Q2', or Q2 M Q2' with M a seeded random SPD matrix.  Any of
    them makes V'V + T invertible while leaving the range of V'V untouched.
    """
    if variant not in T_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {T_VARIANTS}")
    VtV = V.T @ V
    _, Q2 = _split_spectrum(VtV)
    d = Q2.shape[1]
    if d == 0:
        raise ConstructionError("V has full column rank: no nullspace to complete")
    if variant == "null_projector":
        return Q2 @ Q2.T
    if variant == "scaled_null_projector":
        if not c > 0.0:
            raise ValueError(f"scale c must be positive, got {c}")
        return c * (Q2 @ Q2.T)
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((d, d))
    M = A @ A.T + 0.5 * np.eye(d)
    return Q2 @ M @ Q2.T


@dataclass(frozen=True)
class GICheck:
    residual: float
    passed: bool
    tolerance: float


@dataclass(frozen=True)
class GIConstruction:
    """The full generalized-inverse bundle for one rank-deficient V.

    Q1 spans the range of V'V (r columns, positive eigenvalues D), Q2 its
    nullspace; T is the PSD completion supported on the nullspace and
    S = (V'V + T)^{-1} the resulting proper prior scale matrix.
    """

    V: np.ndarray
    Q1: np.ndarray
    Q2: np.ndarray
    D: np.ndarray
    T: np.ndarray
    S: np.ndarray

    @classmethod
    def build(cls, V: np.ndarray, variant: str = "null_projector", *,
              c: float = 1.0, seed: int | None = None) -> "GIConstruction":
        VtV = V.T @ V
        vals, vecs = np.linalg.eigh(VtV)
        tol = max(vals.max(), 0.0) * VtV.shape[0] * _EIG_EPS
        keep = vals > tol
        T = build_nullspace_psd(V, variant, c=c, seed=seed)
        S = np.linalg.inv(VtV + T)
        return cls(V=V, Q1=vecs[:, keep], Q2=vecs[:, ~keep], D=vals[keep],
                   T=T, S=0.5 * (S + S.T))

    @property
    def rank(self) -> int:
        return self.Q1.shape[1]

    def check(self, tol: float = 1e-8) -> GICheck:
        """Verify S is an SPD generalized inverse of V'V and the column
        spaces of V'V and T are essentially disjoint."""
        ell = self.T.shape[0]
        if np.linalg.matrix_rank(self.T) != ell - self.rank:
            raise ConstructionError("T does not have rank ell - r")
        if np.linalg.norm(self.Q1.T @ self.T @ self.Q1) > tol * max(
                np.linalg.norm(self.T), 1.0):
            raise ConstructionError("T leaks into the range of V'V")
        if np.linalg.eigvalsh(self.S).min() <= 0.0:
            raise ConstructionError("S is not positive definite")
        return check_generalized_inverse(self.V, self.T, tol=tol)


def check_generalized_inverse(V: np.ndarray, T: np.ndarray,
                              tol: float = 1e-8) -> GICheck:
    """Relative residual of V'V S V'V = V'V with S = (V'V + T)^{-1}."""
    VtV = V.T @ V
    A = VtV + T
    vals = np.linalg.eigvalsh(A)
    if vals.min() <= max(vals.max(), 0.0) * A.shape[0] * _EIG_EPS:
        raise ConstructionError(
            "V'V + T is singular; T does not complete the nullspace of V'V"
        )
    S = np.linalg.inv(A)
    S = 0.5 * (S + S.T)
    resid = np.linalg.norm(VtV @ S @ VtV - VtV) / np.linalg.norm(VtV)
    return GICheck(residual=float(resid), passed=bool(resid <= tol), tolerance=tol)


def explicit_prior_log_bf(y: np.ndarray, X0: np.ndarray, Xsel: np.ndarray,
                          T: np.ndarray, prior: HyperGPrior | None = None,
                          epsrel: float = 1e-11) -> float:
    """log Bayes factor by direct marginalization under the explicit prior.

    For fixed g the coefficient prior N(a | 0, g sigma^2 S) convolves with
    the likelihood to N(y | X0 alpha, sigma^2 Sigma_g), Sigma_g =
    I + g Xsel S Xsel'; flat alpha and 1/sigma then give

        m(y|g)/m0(y) = |Sigma_g|^{-1/2}
                       (|X0' Sigma_g^{-1} X0| / |X0' X0|)^{-1/2}
                       (R(g) / SSE_0)^{-(n-k0)/2}

    with R(g) the generalized residual sum of squares.  One symmetric
    eigendecomposition of Xsel S Xsel' makes each g evaluation O(n k0^2),
    and the remaining g integral runs through the same log-scale adaptive
    quadrature as everything else (substitution u = g/(1+g)).
    """
    prior = prior if prior is not None else HyperGPrior.robust()
    n, k0 = X0.shape
    V = Xsel - X0 @ np.linalg.lstsq(X0, Xsel, rcond=None)[0]
    A = V.T @ V + T
    vals = np.linalg.eigvalsh(A)
    if vals.min() <= max(vals.max(), 0.0) * A.shape[0] * _EIG_EPS:
        raise ConstructionError("V'V + T is singular; prior covariance undefined")
    S = np.linalg.inv(A)
    S = 0.5 * (S + S.T)

    W = Xsel @ S @ Xsel.T
    w, E = np.linalg.eigh(0.5 * (W + W.T))
    w = np.clip(w, 0.0, None)
    yt = E.T @ y
    X0t = E.T @ X0

    _, sse0 = matrix_rank_sse(X0, y)
    _, logdet_X0tX0 = np.linalg.slogdet(X0.T @ X0)
    kappa1, _ = matrix_rank_sse(np.hstack([X0, Xsel]), y)

    def log_ratio(g: float) -> float:
        d = 1.0 / (1.0 + g * w)
        logdet_sigma = float(np.log1p(g * w).sum())
        A0 = X0t.T @ (d[:, None] * X0t)
        _, logdet_A0 = np.linalg.slogdet(A0)
        b = X0t.T @ (d * yt)
        R = float(yt @ (d * yt) - b @ np.linalg.solve(A0, b))
        return (
            -0.5 * logdet_sigma
            - 0.5 * (logdet_A0 - logdet_X0tX0)
            - 0.5 * (n - k0) * (math.log(R) - math.log(sse0))
        )

    g_lo, g_hi = prior.support_bounds(n=n, kappa1=kappa1)
    u_lo = g_lo / (1.0 + g_lo)
    u_hi = 1.0 if math.isinf(g_hi) else g_hi / (1.0 + g_hi)

    def log_f(u: float) -> float:
        if u >= 1.0 - 1e-14:
            u = 1.0 - 1e-14
        g = u / (1.0 - u)
        return log_ratio(g) + prior.log_density(g, n=n, kappa1=kappa1) \
            - 2.0 * math.log1p(-u)

    return _log_quad(log_f, u_lo, u_hi, epsrel=epsrel)


def marginal_via_explicit_prior(assembly: DesignAssembly, gamma: ModelGamma,
                                T: np.ndarray,
                                hyper_prior: HyperGPrior | None = None) -> float:
    """Spec'd entry point: explicit-prior log Bayes factor for one model."""
    M = model_design(assembly, gamma)
    return explicit_prior_log_bf(assembly.y, assembly.X0, M[:, assembly.k0:],
                                 T, hyper_prior)


def testability_check(design: np.ndarray, hypothesis_rows: np.ndarray) -> bool:
    """True iff every row of the hypothesis lies in the design's row space."""
    L = np.atleast_2d(hypothesis_rows)
    if L.shape[1] != design.shape[1]:
        raise ValueError(
            f"hypothesis has {L.shape[1]} coefficients, design has {design.shape[1]}"
        )
    rz = np.linalg.matrix_rank(design)
    rzl = np.linalg.matrix_rank(np.vstack([design, L]))
    return bool(rzl == rz)


# ----------------------------------------------------------------------
# check suites (CI entry points; used by `facsel validate`)
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str


def _random_factor_design(rng, n_extra_sure: int, ell: int, cells: tuple[int, ...]):
    """Intercept (+ optional numeric sures), one indicator-coded factor."""
    n = sum(cells)
    labels = np.repeat(np.arange(ell), cells)
    X0 = np.hstack([np.ones((n, 1)), rng.standard_normal((n, n_extra_sure))]) \
        if n_extra_sure else np.ones((n, 1))
    Z = np.zeros((n, ell))
    Z[np.arange(n), labels] = 1.0
    effects = rng.standard_normal(ell)
    y = Z @ effects + (X0 @ rng.standard_normal(X0.shape[1])) \
        + rng.standard_normal(n)
    return y, X0, Z


def suite_generalized_inverse(seed: int = 20240801, n_designs: int = 20,
                              tol: float = 1e-8) -> list[CheckResult]:
    out = []
    for i in range(n_designs):
        rng = np.random.default_rng(seed + i)
        ell = int(rng.integers(3, 7))
        cells = tuple(int(c) for c in rng.integers(2, 8, size=ell))
        _, X0, Z = _random_factor_design(rng, int(rng.integers(0, 3)), ell, cells)
        V = Z - X0 @ np.linalg.lstsq(X0, Z, rcond=None)[0]
        for variant in T_VARIANTS:
            T = build_nullspace_psd(V, variant, c=float(rng.uniform(0.1, 10.0)),
                                    seed=seed + 1000 + i)
            chk = check_generalized_inverse(V, T, tol=tol)
            out.append(CheckResult(
                suite="gi",
                name=f"design {i} ({variant})",
                passed=chk.passed,
                detail=f"residual {chk.residual:.2e} (tol {tol:g})",
            ))
    return out


_THEOREM1_INSTANCES = (
    # (n_extra_sure, cells)
    (0, (4, 4, 4)),
    (1, (6, 5, 5)),
    (0, (5, 5, 5, 5)),
    (1, (6, 6, 6, 6)),
    (0, (4, 4)),
)


def suite_explicit_prior(seed: int = 20240815, tol_closed: float = 1e-4,
                         tol_pairwise: float = 1e-6) -> list[CheckResult]:
    """Explicit-prior marginals vs. the rank-corrected closed form."""
    out = []
    for i, (n_sure, cells) in enumerate(_THEOREM1_INSTANCES):
        rng = np.random.default_rng(seed + i)
        ell = len(cells)
        y, X0, Z = _random_factor_design(rng, n_sure, ell, cells)
        n, k0 = X0.shape
        V = Z - X0 @ np.linalg.lstsq(X0, Z, rcond=None)[0]
        r, sse = matrix_rank_sse(np.hstack([X0, Z]), y)
        _, sse0 = matrix_rank_sse(X0, y)
        q = min(sse / sse0, 1.0)
        closed = bayes_factor_robust_closed(q, k0, r, n).logm
        results = {}
        for variant in T_VARIANTS:
            T = build_nullspace_psd(V, variant, c=4.0, seed=seed + 500 + i)
            results[variant] = explicit_prior_log_bf(y, X0, Z, T)
        worst_closed = max(abs(v - closed) for v in results.values())
        vals = list(results.values())
        worst_pair = max(abs(a - b) for a in vals for b in vals)
        rel = worst_closed / max(abs(closed), 1.0)
        out.append(CheckResult(
            suite="theorem1",
            name=f"instance {i} (n={n}, ell={ell}, k0={k0}) vs closed form",
            passed=bool(rel <= tol_closed),
            detail=f"max |dlogB| {worst_closed:.2e}, rel {rel:.2e} (tol {tol_closed:g})",
        ))
        out.append(CheckResult(
            suite="theorem1",
            name=f"instance {i} T-choice agreement",
            passed=bool(worst_pair <= tol_pairwise),
            detail=f"max pairwise |dlogB| {worst_pair:.2e} (tol {tol_pairwise:g})",
        ))
    return out


def suite_rank_identity(seed: int = 20240820, n_designs: int = 50) -> list[CheckResult]:
    """rank((I-P0)X) = rank([X0|X]) - k0, including collinear columns.

    Both sides share one singular-value cutoff anchored at the scale of
    [X0|X]; a per-matrix relative cutoff would misread an all-rounding-noise
    projection (every column of X inside span(X0)) as rank one.
    """
    failures = []
    for i in range(n_designs):
        rng = np.random.default_rng(seed + i)
        n = int(rng.integers(8, 30))
        k0 = int(rng.integers(1, 4))
        k = int(rng.integers(1, 6))
        X0 = np.hstack([np.ones((n, 1)), rng.standard_normal((n, k0 - 1))])
        X = rng.standard_normal((n, k))
        if k >= 2 and rng.random() < 0.5:
            X[:, -1] = X[:, 0] * 2.0 - X0[:, 0]  # force a collinear column
        if rng.random() < 0.3:
            X[:, 0] = X0 @ rng.standard_normal(k0)  # column inside span(X0)
        joint = np.hstack([X0, X])
        s_joint = np.linalg.svd(joint, compute_uv=False)
        tol = s_joint[0] * max(joint.shape) * 1e3 * _EIG_EPS
        P0 = X0 @ np.linalg.pinv(X0)
        s_proj = np.linalg.svd((np.eye(n) - P0) @ X, compute_uv=False)
        lhs = int(np.count_nonzero(s_proj > tol))
        rhs = int(np.count_nonzero(s_joint > tol)) - k0
        if lhs != rhs:
            failures.append(f"design {i}: {lhs} != {rhs}")
    return [CheckResult(
        suite="lemma",
        name=f"rank identity on {n_designs} random designs",
        passed=not failures,
        detail="; ".join(failures) if failures else "all equal",
    )]


def suite_testability() -> list[CheckResult]:
    # intercept + 2-level factor, two observations per level
    Z = np.hstack([np.ones((4, 1)),
                   np.kron(np.eye(2), np.ones((2, 1)))])
    out = []
    non_testable = not testability_check(Z, np.array([[0., 1., 0.], [0., 0., 1.]]))
    out.append(CheckResult(
        suite="testability", name="all-level-effects-zero is not testable",
        passed=non_testable, detail="rank grows when stacking the hypothesis",
    ))
    contrast = testability_check(Z, np.array([[0., 1., -1.]]))
    out.append(CheckResult(
        suite="testability", name="level contrast a1 - a2 = 0 is testable",
        passed=contrast, detail="(0, 1, -1) lies in the row space",
    ))
    rng = np.random.default_rng(7)
    full = rng.standard_normal((10, 4))
    any_l = testability_check(full, rng.standard_normal((3, 4)))
    out.append(CheckResult(
        suite="testability", name="full-rank design: every hypothesis testable",
        passed=any_l, detail="row space is the whole coefficient space",
    ))
    return out


def suite_closed_form(tol: float = 1e-6) -> list[CheckResult]:
    """Robust closed form vs. mixing-integral quadrature on a 216-point grid."""
    prior = HyperGPrior.robust()
    worst = 0.0
    worst_at = None
    for q in np.linspace(0.01, 1.0, 12):
        for k0 in (1, 4):
            for dk in (1, 3, 8):
                for n in (20, 100, 1002):
                    k1 = k0 + dk
                    a = bayes_factor_robust_closed(float(q), k0, k1, n).logm
                    b = bayes_factor_quadrature(float(q), k0, k1, n, prior).logm
                    rel = abs(a - b) / max(abs(a), 1.0)
                    if rel > worst:
                        worst, worst_at = rel, (float(q), k0, k1, n)
    return [CheckResult(
        suite="closedform",
        name="closed form vs quadrature on 216-point grid",
        passed=bool(worst <= tol),
        detail=f"worst rel diff {worst:.2e} at {worst_at} (tol {tol:g})",
    )]


SUITES = {
    "gi": suite_generalized_inverse,
    "theorem1": suite_explicit_prior,
    "lemma": suite_rank_identity,
    "testability": suite_testability,
    "closedform": suite_closed_form,
}


def run_validation(suites: tuple[str, ...] = tuple(SUITES),
                   seed: int | None = None) -> tuple[bool, list[CheckResult]]:
    """Run the requested suites; returns (all_passed, results)."""
    results: list[CheckResult] = []
    for name in suites:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; choose from {tuple(SUITES)}")
        fn = SUITES[name]
        if seed is not None and name in ("gi", "theorem1", "lemma"):
            results.extend(fn(seed=seed))
        else:
            results.extend(fn())
    return all(r.passed for r in results), results
