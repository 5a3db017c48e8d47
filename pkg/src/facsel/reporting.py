"""Serialization of posterior reports: canonical JSON and aligned text tables.

JSON is the canonical output (floats via ``repr``, keys sorted, so identical
inputs give byte-identical documents); the text tables are derived views
printed to 6 significant digits.
"""

from __future__ import annotations

import json

from .modelspace import PriorMassAudit
from .posterior import PosteriorReport


def _model_dict(res, ells) -> dict:
    return {
        "gamma": res.gamma.describe(ells),
        "log_prior": res.log_prior,
        "log_bf": res.bf.log_bf,
        "q": res.bf.q,
        "kappa0": res.bf.kappa0,
        "kappa1": res.bf.kappa1,
        "rank_deficient": res.bf.rank_deficient,
        "alias_of_null": res.bf.alias_of_null,
        "log_posterior": res.log_post,
        "posterior": res.post,
    }


def report_to_dict(report: PosteriorReport, include_models: bool = True) -> dict:
    doc = {
        "dims": {
            "n": report.n,
            "k0": report.k0,
            "k": report.k,
            "p": report.p,
            "L": sum(report.ells),
            "models": report.model_count,
        },
        "settings": {
            "prior_scheme": report.scheme_kind,
            "hyper_g_family": report.hyper_label,
        },
        "predictors": {
            "variables": list(report.variable_names),
            "factors": [
                {"name": name, "levels": list(labels)}
                for name, labels in zip(report.factor_names, report.level_labels)
            ],
        },
        "log_normalizer": report.log_normalizer,
        "null_posterior": report.null_posterior,
        "variable_inclusion": {
            name: v for name, v in zip(report.variable_names, report.variable_inclusion)
        },
        "factor_inclusion": {
            name: v for name, v in zip(report.factor_names, report.factor_inclusion)
        },
        "level_inclusion": {
            name: list(vals)
            for name, vals in zip(report.factor_names, report.level_inclusion)
        },
        "top_models": [
            {
                "rank": t.rank,
                "alias_group": t.alias_group,
                "alias_group_size": t.alias_group_size,
                **_model_dict(t.result, report.ells),
            }
            for t in report.top_models
        ],
    }
    if include_models:
        doc["models"] = [_model_dict(res, report.ells) for res in report.models]
    return doc


def render_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _table(rows: list[tuple], headers: tuple[str, ...]) -> str:
    cells = [tuple(str(c) for c in row) for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h)
              for i, h in enumerate(headers)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*headers), fmt.format(*("-" * w for w in widths))]
    lines += [fmt.format(*row) for row in cells]
    return "\n".join(lines)


def _g6(x: float) -> str:
    return f"{x:.6g}"


def _describe_model(res, report: PosteriorReport) -> str:
    parts = [name for name, b in zip(report.variable_names, res.gamma.variable_bits) if b]
    off = 0
    for name, labels, ell in zip(report.factor_names, report.level_labels, report.ells):
        active = [labels[j] for j in range(ell) if res.gamma.level_bits[off + j]]
        if active:
            parts.append(f"{name}{{{','.join(active)}}}")
        off += ell
    return " + ".join(parts) if parts else "(null)"


def render_text(report: PosteriorReport) -> str:
    out = []
    out.append("Posterior summary")
    out.append(f"  models enumerated : {report.model_count}")
    out.append(f"  n / k0            : {report.n} / {report.k0}")
    out.append(f"  prior scheme      : {report.scheme_kind}")
    out.append(f"  hyper-g family    : {report.hyper_label}")
    out.append(f"  P(null | y)       : {_g6(report.null_posterior)}")
    out.append("")
    out.append("Factor and variable inclusion probabilities")
    rows = [(name, "factor", _g6(v))
            for name, v in zip(report.factor_names, report.factor_inclusion)]
    rows += [(name, "variable", _g6(v))
             for name, v in zip(report.variable_names, report.variable_inclusion)]
    out.append(_table(rows, ("predictor", "type", "P(incl | y)")))
    if report.p:
        out.append("")
        out.append("Level inclusion probabilities")
        rows = []
        for name, labels, vals in zip(report.factor_names, report.level_labels,
                                      report.level_inclusion):
            for lab, v in zip(labels, vals):
                rows.append((name, lab, _g6(v)))
        out.append(_table(rows, ("factor", "level", "P(incl | y)")))
    out.append("")
    out.append("Top models")
    rows = []
    for t in report.top_models:
        alias = f"group {t.alias_group} (x{t.alias_group_size})" if t.alias_group is not None else ""
        rows.append((t.rank, _g6(t.result.post), _g6(t.result.log_bf),
                     _g6(t.result.log_prior), _describe_model(t.result, report), alias))
    out.append(_table(rows, ("rank", "posterior", "log BF", "log prior", "model", "bf-alias")))
    return "\n".join(out) + "\n"


def audit_to_dict(audit: PriorMassAudit) -> dict:
    return {
        "scheme": audit.scheme.kind,
        "models": audit.model_count,
        "total_mass": audit.total_mass,
        "size_mass": list(audit.size_mass),
        "variable_marginals": list(audit.variable_marginals),
        "factor_marginals": list(audit.factor_marginals),
        "level_marginals": list(audit.level_marginals),
    }


def render_audit_text(audit: PriorMassAudit) -> str:
    out = [
        "Prior mass audit",
        f"  scheme      : {audit.scheme.kind}",
        f"  models      : {audit.model_count}",
        f"  total mass  : {audit.total_mass!r}",
        f"  variable marginals : {[_g6(v) for v in audit.variable_marginals]}",
        f"  factor marginals   : {[_g6(v) for v in audit.factor_marginals]}",
        f"  level marginals    : {[_g6(v) for v in audit.level_marginals]}",
    ]
    return "\n".join(out) + "\n"
