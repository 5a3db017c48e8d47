#!/usr/bin/env python3
"""Generate the bundled synthetic datasets as data + schema file pairs."""

import argparse
from pathlib import Path

from facsel.design import dumps_schema
from facsel.synthetic import one_shifted_level, pure_noise, two_factor_study, write_csv

KINDS = {
    "study": two_factor_study,
    "one-level": one_shifted_level,
    "noise": pure_noise,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("kind", choices=sorted(KINDS))
    ap.add_argument("--out-dir", default=".", help="directory for the output files")
    ap.add_argument("--seed", type=int, default=None,
                    help="override the generator's default seed")
    args = ap.parse_args()

    gen = KINDS[args.kind]
    schema, cols = gen(seed=args.seed) if args.seed is not None else gen()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data_path = out / f"{args.kind}.csv"
    schema_path = out / f"{args.kind}.schema"
    write_csv(cols, data_path)
    schema_path.write_text(dumps_schema(schema), encoding="utf-8")
    print(f"wrote {data_path} ({len(cols[schema.response])} rows)")
    print(f"wrote {schema_path}")
    print(f"run:  facsel select --data {data_path} --schema {schema_path}")


if __name__ == "__main__":
    main()
