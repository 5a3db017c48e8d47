"""Seeded synthetic datasets used by the test suite and the demo scripts."""

from __future__ import annotations

import csv
import math

import numpy as np

from .design import DesignAssembly, FactorSpec, PredictorSchema, assemble


def _standardize_within_cells(eps: np.ndarray, labels: np.ndarray, ell: int) -> np.ndarray:
    """Center noise within each cell and scale to within-cell SSE = n - ell.

    Pins the fit statistics of every cell-means model to their nominal
    values, so posterior summaries of the generated data are stable across
    seeds and platforms.
    """
    out = eps.copy()
    for j in range(ell):
        m = labels == j
        out[m] -= out[m].mean()
    out *= math.sqrt((len(out) - ell) / float(out @ out))
    return out


def one_shifted_level(seed: int = 7, cells: tuple[int, ...] = (7, 99, 99, 99, 98, 98),
                      shift: float = 2.0) -> tuple[PredictorSchema, dict[str, list[str]]]:
    """One factor, intercept-only sure block; only the first level's mean is
    shifted (by ``shift`` noise standard deviations).

    The first cell is kept small so the evidence sits in the regime where
    the coding of the factor visibly matters.
    """
    rng = np.random.default_rng(seed)
    ell = len(cells)
    n = sum(cells)
    labels = np.repeat(np.arange(ell), cells)
    eps = _standardize_within_cells(rng.standard_normal(n), labels, ell)
    y = shift * (labels == 0) + eps
    level_names = tuple(str(j + 1) for j in range(ell))
    schema = PredictorSchema(
        response="y",
        factors=(FactorSpec(name="group", levels=level_names),),
    )
    columns = {
        "y": [f"{v:.17g}" for v in y],
        "group": [level_names[j] for j in labels],
    }
    return schema, columns


def pure_noise(seed: int = 11, n: int = 200, k: int = 1,
               ells: tuple[int, ...] = (3,)) -> tuple[PredictorSchema, dict[str, list[str]]]:
    """Candidate variables and factors with no relation to the response."""
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(n)
    schema = PredictorSchema(
        response="y",
        variables=tuple(f"x{j + 1}" for j in range(k)),
        factors=tuple(
            FactorSpec(name=f"f{r + 1}",
                       levels=tuple(str(j + 1) for j in range(ell)))
            for r, ell in enumerate(ells)
        ),
    )
    columns = {"y": [f"{v:.17g}" for v in y]}
    for name in schema.variables:
        columns[name] = [f"{v:.17g}" for v in rng.standard_normal(n)]
    for f in schema.factors:
        ell = len(f.levels)
        labels = np.concatenate([np.arange(ell), rng.integers(0, ell, size=n - ell)])
        rng.shuffle(labels)
        columns[f.name] = [f.levels[j] for j in labels]
    return schema, columns


def two_factor_study(seed: int = 1002, n: int = 1002) -> tuple[PredictorSchema, dict[str, list[str]]]:
    """A benchmark shaped like a moderately sized observational study:
    intercept + three numeric sure variables, two candidate variables, and
    factors with 6 and 3 levels (k0=4, k=2, p=2, L=9; 2^11 models).

    One level of the six-level factor carries a strong effect, the
    three-level factor has modest effects on all levels, one variable is
    clearly active and the other weak.
    """
    rng = np.random.default_rng(seed)
    sizes_f1 = (312, 260, 180, 120, 80, 50)
    if sum(sizes_f1) != n:
        raise ValueError("factor-1 cell sizes must sum to n")
    lab1 = np.repeat(np.arange(6), sizes_f1)
    rng.shuffle(lab1)
    lab2 = rng.integers(0, 3, size=n)
    for j in range(3):  # guarantee at least one observation per level
        if not np.any(lab2 == j):
            lab2[rng.integers(0, n)] = j

    x01 = rng.normal(3.3, 0.5, n)
    x02 = rng.normal(50.0, 2.5, n)
    x03 = rng.uniform(2.0, 14.0, n)
    x1 = rng.gamma(2.0, 1.2, n)
    x2 = rng.normal(9.0, 1.0, n)

    eff1 = np.array([1.2, 0.0, 0.15, 0.0, 0.0, 0.0])   # one dominant level
    eff2 = np.array([-0.45, 0.0, 0.45])                 # modest spread
    y = (
        1.0 + 0.6 * x01 + 0.05 * x02 + 0.08 * x03
        + 0.30 * x1 + 0.045 * x2
        + eff1[lab1] + eff2[lab2]
        + rng.standard_normal(n)
    )
    schema = PredictorSchema(
        response="y",
        sure=("x01", "x02", "x03"),
        variables=("x1", "x2"),
        factors=(
            FactorSpec(name="f1", levels=tuple(str(j + 1) for j in range(6))),
            FactorSpec(name="f2", levels=("1", "2", "3")),
        ),
    )
    columns = {
        "y": [f"{v:.17g}" for v in y],
        "x01": [f"{v:.17g}" for v in x01],
        "x02": [f"{v:.17g}" for v in x02],
        "x03": [f"{v:.17g}" for v in x03],
        "x1": [f"{v:.17g}" for v in x1],
        "x2": [f"{v:.17g}" for v in x2],
        "f1": [str(j + 1) for j in lab1],
        "f2": [str(j + 1) for j in lab2],
    }
    return schema, columns


def build_assembly(schema: PredictorSchema,
                   columns: dict[str, list[str]]) -> DesignAssembly:
    return assemble(schema, columns)


def write_csv(columns: dict[str, list[str]], path, delimiter: str = ",",
              order: list[str] | None = None) -> None:
    names = order if order is not None else list(columns)
    n = len(columns[names[0]])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(names)
        for i in range(n):
            writer.writerow([columns[name][i] for name in names])
