"""Command-line front end.

Two subcommands:

* ``facsel select`` -- read a schema and a data file, enumerate the model
  space, and emit the posterior report (JSON by default, text tables with
  ``--format text``).
* ``facsel validate`` -- run the numerical check suites; exits nonzero if
  any check fails (intended as a CI gate).

Exit codes: 0 success, 2 configuration error, 3 data/schema error,
4 capacity exceeded, 5 validation failure.  Errors print one
machine-parsable line ``E_<CODE>: <message>`` to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .design import load_schema, ingest
from .errors import (CapacityError, DataError, DegenerateDataError,
                     DomainError, FacselError, NumericError, SchemaError)
from .modelspace import ModelPriorScheme, prior_mass_audit
from .numerics import HyperGPrior
from .posterior import baseline_sensitivity_demo, enumerate_posterior
from .reporting import (audit_to_dict, render_audit_text, render_json,
                        render_text, report_to_dict)
from .validation import SUITES, run_validation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_CAPACITY = 4
EXIT_VALIDATION = 5

_DELIMS = {"comma": ",", "tab": "\t"}


def _fail(code: str, message: str, exit_code: int) -> int:
    print(f"E_{code}: {message}", file=sys.stderr)
    return exit_code


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="facsel",
        description="Bayesian variable selection with categorical factors",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sel = sub.add_parser("select", help="run selection on a data file")
    sel.add_argument("--data", required=True, help="delimited data file (header row)")
    sel.add_argument("--schema", required=True, help="schema file (see README grammar)")
    sel.add_argument("--prior", default="hierarchical",
                     choices=["constant", "scott-berger", "hierarchical"],
                     help="model-space prior (default: hierarchical)")
    sel.add_argument("--hyper", default="robust", choices=["robust"],
                     help="hyper-g mixing family (default: robust)")
    sel.add_argument("--out", default=None, help="write the report here instead of stdout")
    sel.add_argument("--format", default="json", choices=["json", "text"],
                     help="output format (default: json)")
    sel.add_argument("--top-n", type=int, default=10,
                     help="length of the top-models list (default: 10)")
    sel.add_argument("--delimiter", default="comma", choices=["comma", "tab"],
                     help="data file delimiter (default: comma)")
    sel.add_argument("--baseline-demo", metavar="FACTOR", default=None,
                     help="also report P(factor|y) under every baseline recoding "
                          "of FACTOR (the coding-sensitivity demonstration)")
    sel.add_argument("--prior-audit", action="store_true",
                     help="also report the exhaustive prior-mass audit")

    val = sub.add_parser("validate", help="run the numerical check suites")
    val.add_argument("--suite", default="all", choices=["all", *SUITES],
                     help="which suite to run (default: all)")
    val.add_argument("--seed", type=int, default=None,
                     help="override the base seed of the randomized suites")
    return parser


def _run_select(args) -> int:
    data_path = Path(args.data)
    schema_path = Path(args.schema)
    for path, what in ((schema_path, "schema"), (data_path, "data")):
        if not path.is_file():
            return _fail("CONFIG", f"{what} file not found: {path}", EXIT_CONFIG)
    try:
        schema = load_schema(schema_path)
        _, assembly = ingest(data_path, schema, delimiter=_DELIMS[args.delimiter])
    except SchemaError as e:
        return _fail("SCHEMA", str(e), EXIT_DATA)
    except (DataError, DegenerateDataError) as e:
        return _fail("DATA", str(e), EXIT_DATA)

    hyper = HyperGPrior.robust()
    try:
        report = enumerate_posterior(assembly, prior_scheme=args.prior,
                                     hyper_prior=hyper, top_n=args.top_n)
        doc = report_to_dict(report)
        text = render_text(report)
        if args.baseline_demo is not None:
            fidx = schema.factor_index(args.baseline_demo)
            spec = schema.factors[fidx]
            demo = {
                "factor": spec.name,
                "recommended_value": report.factor_inclusion[fidx],
                "baseline_values": {
                    lab: baseline_sensitivity_demo(assembly, fidx, lab,
                                                   prior_scheme=args.prior,
                                                   hyper_prior=hyper)
                    for lab in spec.levels
                },
            }
            doc["baseline_demo"] = demo
            lines = [f"Baseline-coding sensitivity for factor {spec.name!r}",
                     f"  full-indicator P(factor | y): {demo['recommended_value']:.6g}"]
            for lab, v in demo["baseline_values"].items():
                lines.append(f"  baseline={lab}: P(factor | y) = {v:.6g}")
            text += "\n" + "\n".join(lines) + "\n"
        if args.prior_audit:
            audit = prior_mass_audit(ModelPriorScheme.for_assembly(args.prior, assembly))
            doc["prior_audit"] = audit_to_dict(audit)
            text += "\n" + render_audit_text(audit)
    except CapacityError as e:
        return _fail("CAPACITY", str(e), EXIT_CAPACITY)
    except SchemaError as e:
        return _fail("SCHEMA", str(e), EXIT_DATA)
    except (DegenerateDataError, DomainError, NumericError) as e:
        return _fail("DATA", str(e), EXIT_DATA)
    except ValueError as e:  # e.g. --baseline-demo on a two-level factor
        return _fail("CONFIG", str(e), EXIT_CONFIG)

    payload = render_json(doc) if args.format == "json" else text
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
    return EXIT_OK


def _run_validate(args) -> int:
    suites = tuple(SUITES) if args.suite == "all" else (args.suite,)
    ok, results = run_validation(suites=suites, seed=args.seed)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{r.suite:>11}] {r.name:<{width}}  {status}  {r.detail}")
    n_pass = sum(r.passed for r in results)
    print(f"summary: {n_pass}/{len(results)} checks passed")
    return EXIT_OK if ok else EXIT_VALIDATION


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "select":
            return _run_select(args)
        return _run_validate(args)
    except FacselError as e:  # anything not mapped above is a config problem
        return _fail("CONFIG", str(e), EXIT_CONFIG)


if __name__ == "__main__":
    sys.exit(main())
