import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from facsel.design import DesignAssembly, FactorSpec, PredictorSchema, assemble

settings.register_profile(
    "fast", max_examples=25, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("fast")


def fmt(values) -> list[str]:
    return [f"{v:.17g}" for v in values]


def make_assembly(y, sure=None, variables=None, factors=None, check_rank=True):
    """Build a DesignAssembly from arrays without touching the filesystem.

    sure/variables: dict name -> array.  factors: dict name -> (labels,
    level_order); labels is a per-row sequence of strings.
    """
    sure = sure or {}
    variables = variables or {}
    factors = factors or {}
    specs = tuple(
        FactorSpec(name=name, levels=tuple(levels))
        for name, (_, levels) in factors.items()
    )
    schema = PredictorSchema(
        response="y",
        sure=tuple(sure),
        variables=tuple(variables),
        factors=specs,
    )
    columns = {"y": fmt(y)}
    for name, arr in sure.items():
        columns[name] = fmt(arr)
    for name, arr in variables.items():
        columns[name] = fmt(arr)
    for name, (labels, _) in factors.items():
        columns[name] = [str(lab) for lab in labels]
    return assemble(schema, columns, check_rank=check_rank)


def labels_from_cells(cells) -> list[str]:
    out = []
    for j, c in enumerate(cells):
        out.extend([str(j + 1)] * c)
    return out


def one_factor_assembly(seed=0, cells=(5, 5, 5), effects=None, n_sure=0,
                        noise=1.0):
    """Intercept (+ optional numeric sures) and a single factor."""
    rng = np.random.default_rng(seed)
    ell = len(cells)
    n = sum(cells)
    labels = np.repeat(np.arange(ell), cells)
    eff = np.asarray(effects) if effects is not None else rng.standard_normal(ell)
    y = eff[labels] + noise * rng.standard_normal(n)
    sure = {}
    for j in range(n_sure):
        x = rng.standard_normal(n)
        sure[f"x0{j + 1}"] = x
        y = y + 0.5 * x
    levels = tuple(str(j + 1) for j in range(ell))
    return make_assembly(
        y, sure=sure,
        factors={"g": ([levels[j] for j in labels], levels)},
    )


@pytest.fixture(scope="session")
def shifted_assembly():
    from facsel.synthetic import build_assembly, one_shifted_level
    schema, cols = one_shifted_level()
    return build_assembly(schema, cols)


@pytest.fixture(scope="session")
def shifted_report(shifted_assembly):
    from facsel.posterior import enumerate_posterior
    return enumerate_posterior(shifted_assembly)


@pytest.fixture(scope="session")
def study_assembly():
    from facsel.synthetic import build_assembly, two_factor_study
    schema, cols = two_factor_study()
    return build_assembly(schema, cols)
