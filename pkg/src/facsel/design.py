"""Schema handling and design-matrix assembly.

A :class:`PredictorSchema` declares the role of each data column: the
response, sure variables (forced into every model; the intercept is always
added implicitly), candidate numeric variables, and factors with their level
sets.  :func:`ingest` reads a delimited text file against a schema and
produces an immutable :class:`DesignAssembly` whose blocks are

* ``X0`` -- intercept plus sure variables (n x k0),
* ``X``  -- candidate variables (n x k),
* ``Z``  -- one 0/1 indicator column per declared factor level (n x L),
  factor blocks concatenated in schema order.

Factors always use the full indicator coding, one column per level and no
baseline: the saturated design is deliberately rank-deficient, and the rank
is dealt with downstream.  Column order is fixed by declaration order so
inclusion-bit positions are stable across runs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError, SchemaError

#: Relative singular-value cutoff for rank decisions: 2^-52 (double epsilon).
RANK_EPS = 2.0 ** -52

INTERCEPT_NAME = "(intercept)"


# ----------------------------------------------------------------------
# schema
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class FactorSpec:
    name: str
    levels: tuple[str, ...]

    def __post_init__(self):
        if len(self.levels) < 2:
            raise SchemaError(
                f"factor {self.name!r} declares {len(self.levels)} level(s); need >= 2"
            )
        if len(set(self.levels)) != len(self.levels):
            raise SchemaError(f"factor {self.name!r} has duplicate level labels")
        if any(not lab for lab in self.levels):
            raise SchemaError(f"factor {self.name!r} has an empty level label")


@dataclass(frozen=True)
class PredictorSchema:
    """Column roles.  ``sure`` lists data columns only; the intercept is
    implicit and always present."""

    response: str
    sure: tuple[str, ...] = ()
    variables: tuple[str, ...] = ()
    factors: tuple[FactorSpec, ...] = ()

    def __post_init__(self):
        names = [self.response, *self.sure, *self.variables,
                 *(f.name for f in self.factors)]
        if any(not n for n in names):
            raise SchemaError("empty column name in schema")
        if len(set(names)) != len(names):
            raise SchemaError("schema column names must be distinct")

    @property
    def k0(self) -> int:
        return 1 + len(self.sure)

    @property
    def k(self) -> int:
        return len(self.variables)

    @property
    def p(self) -> int:
        return len(self.factors)

    @property
    def ells(self) -> tuple[int, ...]:
        return tuple(len(f.levels) for f in self.factors)

    @property
    def L(self) -> int:
        return sum(self.ells)

    def factor_index(self, name: str) -> int:
        for i, f in enumerate(self.factors):
            if f.name == name:
                return i
        raise SchemaError(f"unknown factor {name!r}")


def loads_schema(text: str) -> PredictorSchema:
    """Parse the schema grammar (see README: one ``key: value`` per line)."""
    response = None
    sure: tuple[str, ...] = ()
    variables: tuple[str, ...] = ()
    factors: list[FactorSpec] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise SchemaError(f"schema line {lineno}: expected 'key: value', got {raw!r}")
        key, _, value = line.partition(":")
        key = key.strip()
        items = tuple(s.strip() for s in value.split(",") if s.strip())
        if key == "response":
            if "response" in seen:
                raise SchemaError(f"schema line {lineno}: duplicate 'response'")
            if len(items) != 1:
                raise SchemaError(f"schema line {lineno}: 'response' takes one name")
            response = items[0]
            seen.add("response")
        elif key == "sure":
            if "sure" in seen:
                raise SchemaError(f"schema line {lineno}: duplicate 'sure'")
            sure = items
            seen.add("sure")
        elif key == "variables":
            if "variables" in seen:
                raise SchemaError(f"schema line {lineno}: duplicate 'variables'")
            variables = items
            seen.add("variables")
        elif key.startswith("factor ") or key.startswith("factor\t"):
            name = key[len("factor"):].strip()
            if not name:
                raise SchemaError(f"schema line {lineno}: factor needs a name")
            factors.append(FactorSpec(name=name, levels=items))
        else:
            raise SchemaError(f"schema line {lineno}: unknown key {key!r}")
    if response is None:
        raise SchemaError("schema is missing the 'response' line")
    return PredictorSchema(response=response, sure=sure, variables=variables,
                           factors=tuple(factors))


def dumps_schema(schema: PredictorSchema) -> str:
    """Serialize a schema; ``loads_schema(dumps_schema(s)) == s``."""
    lines = [f"response: {schema.response}"]
    if schema.sure:
        lines.append("sure: " + ", ".join(schema.sure))
    if schema.variables:
        lines.append("variables: " + ", ".join(schema.variables))
    for f in schema.factors:
        lines.append(f"factor {f.name}: " + ", ".join(f.levels))
    return "\n".join(lines) + "\n"


def load_schema(path) -> PredictorSchema:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_schema(fh.read())


def save_schema(schema: PredictorSchema, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_schema(schema))


# ----------------------------------------------------------------------
# inclusion vectors
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ModelGamma:
    """Binary inclusion pattern: one bit per candidate variable, one bit per
    factor level.  The all-zero pattern is the null model."""

    variable_bits: tuple[int, ...]
    level_bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.variable_bits + self.level_bits):
            raise ValueError("inclusion bits must be 0 or 1")

    @classmethod
    def null(cls, k: int, L: int) -> "ModelGamma":
        return cls((0,) * k, (0,) * L)

    @classmethod
    def full(cls, k: int, L: int) -> "ModelGamma":
        return cls((1,) * k, (1,) * L)

    @classmethod
    def from_index(cls, m: int, k: int, L: int) -> "ModelGamma":
        """Bit j of ``m`` drives column j (variables first, then levels)."""
        bits = tuple((m >> j) & 1 for j in range(k + L))
        return cls(bits[:k], bits[k:])

    @property
    def size(self) -> int:
        return sum(self.variable_bits) + sum(self.level_bits)

    def is_null(self) -> bool:
        return self.size == 0

    def level_counts(self, ells: Sequence[int]) -> tuple[int, ...]:
        """Active level count per factor (the per-factor k_gamma)."""
        if sum(ells) != len(self.level_bits):
            raise ValueError("level-count layout does not match level bits")
        counts, off = [], 0
        for ell in ells:
            counts.append(sum(self.level_bits[off:off + ell]))
            off += ell
        return tuple(counts)

    def describe(self, ells: Sequence[int]) -> str:
        """Compact bit-pattern string, factor blocks separated by '|'."""
        parts = ["".join(map(str, self.variable_bits))]
        off = 0
        for ell in ells:
            parts.append("".join(map(str, self.level_bits[off:off + ell])))
            off += ell
        return "|".join(parts)


# ----------------------------------------------------------------------
# assembly
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class DesignAssembly:
    """Immutable design blocks for one dataset.  All arrays are read-only;
    every operation on an assembly is a pure read, safe under concurrency."""

    schema: PredictorSchema
    y: np.ndarray
    X0: np.ndarray
    X: np.ndarray
    Z: np.ndarray
    cell_counts: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        n = self.y.shape[0]
        if self.y.ndim != 1:
            raise DataError("response must be one-dimensional")
        for name, arr, width in (("X0", self.X0, self.schema.k0),
                                 ("X", self.X, self.schema.k),
                                 ("Z", self.Z, self.schema.L)):
            if arr.shape != (n, width):
                raise DataError(f"{name} has shape {arr.shape}, expected {(n, width)}")
        off = 0
        for f, ell in zip(self.schema.factors, self.schema.ells):
            block = self.Z[:, off:off + ell]
            if not np.array_equal(block.sum(axis=1), np.ones(n)):
                raise DataError(
                    f"factor {f.name!r}: each row must activate exactly one level"
                )
            off += ell
        if self.cell_counts:
            for f, counts in zip(self.schema.factors, self.cell_counts):
                if any(c < 1 for c in counts):
                    raise DataError(f"factor {f.name!r} has a level with no observations")
        for arr in (self.y, self.X0, self.X, self.Z):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def k0(self) -> int:
        return self.schema.k0

    @property
    def k(self) -> int:
        return self.schema.k

    @property
    def p(self) -> int:
        return self.schema.p

    @property
    def ells(self) -> tuple[int, ...]:
        return self.schema.ells

    @property
    def L(self) -> int:
        return self.schema.L

    def level_slice(self, r: int) -> slice:
        """Columns of Z belonging to factor ``r``."""
        offs = np.cumsum((0,) + self.ells)
        return slice(int(offs[r]), int(offs[r + 1]))


def _parse_numeric(colname: str, cells: Sequence[str]) -> np.ndarray:
    out = np.empty(len(cells))
    for i, cell in enumerate(cells):
        text = cell.strip()
        if not text:
            raise DataError(f"column {colname!r}, row {i + 1}: missing value")
        try:
            v = float(text)
        except ValueError:
            raise DataError(
                f"column {colname!r}, row {i + 1}: {cell!r} is not numeric"
            ) from None
        if not math.isfinite(v):
            raise DataError(f"column {colname!r}, row {i + 1}: non-finite value {cell!r}")
        out[i] = v
    return out


def assemble(schema: PredictorSchema, columns: Mapping[str, Sequence[str]],
             check_rank: bool = True) -> DesignAssembly:
    """Validate raw columns against a schema and build the design blocks.

    ``columns`` maps column name to a sequence of cell strings (numeric cells
    are parsed here).  With ``check_rank`` the saturated design must have
    rank k0 + k + L - p, i.e. the only collinearity present is the one
    indicator codings create by construction.
    """
    needed = [schema.response, *schema.sure, *schema.variables,
              *(f.name for f in schema.factors)]
    for name in needed:
        if name not in columns:
            raise SchemaError(f"data is missing declared column {name!r}")
    n = len(columns[schema.response])
    for name in needed:
        if len(columns[name]) != n:
            raise DataError(f"column {name!r} has {len(columns[name])} rows, expected {n}")
    if n == 0:
        raise DataError("data file contains no rows")

    y = _parse_numeric(schema.response, columns[schema.response])
    X0 = np.ones((n, schema.k0))
    for j, name in enumerate(schema.sure, start=1):
        X0[:, j] = _parse_numeric(name, columns[name])
    X = np.empty((n, schema.k))
    for j, name in enumerate(schema.variables):
        X[:, j] = _parse_numeric(name, columns[name])

    Z = np.zeros((n, schema.L))
    cell_counts = []
    off = 0
    for f in schema.factors:
        index = {lab: i for i, lab in enumerate(f.levels)}
        counts = [0] * len(f.levels)
        for i, cell in enumerate(columns[f.name]):
            lab = cell.strip()
            if not lab:
                raise DataError(f"column {f.name!r}, row {i + 1}: missing value")
            j = index.get(lab)
            if j is None:
                raise SchemaError(
                    f"factor {f.name!r}, row {i + 1}: level {lab!r} is not declared"
                )
            Z[i, off + j] = 1.0
            counts[j] += 1
        for lab, c in zip(f.levels, counts):
            if c == 0:
                raise DataError(f"factor {f.name!r}: declared level {lab!r} "
                                f"has no observations")
        cell_counts.append(tuple(counts))
        off += len(f.levels)

    if n < schema.k0 + schema.k + 1:
        raise DataError(
            f"n={n} rows but k0+k+1={schema.k0 + schema.k + 1} are required"
        )
    if check_rank:
        expected = schema.k0 + schema.k + schema.L - schema.p
        full = np.hstack([X0, X, Z])
        r, _ = matrix_rank_sse(full, y)
        if r != expected:
            raise DataError(
                f"saturated design has rank {r}, expected {expected}; "
                f"predictors are collinear beyond the indicator coding"
            )
    return DesignAssembly(schema=schema, y=y, X0=X0, X=X, Z=Z,
                          cell_counts=tuple(cell_counts))


def read_columns(path, delimiter: str = ",") -> dict[str, list[str]]:
    """Read a delimited text file (header row required) into raw columns."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise DataError(f"{path}: duplicate column names in header")
        cols: dict[str, list[str]] = {h: [] for h in header}
        for rownum, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(
                    f"{path}: row {rownum} has {len(row)} cells, expected {len(header)}"
                )
            for h, cell in zip(header, row):
                cols[h].append(cell)
    return cols


def ingest(data_path, schema: PredictorSchema,
           delimiter: str = ",") -> tuple[PredictorSchema, DesignAssembly]:
    """Read a data file against a schema; returns the validated pair."""
    columns = read_columns(data_path, delimiter=delimiter)
    return schema, assemble(schema, columns)


# ----------------------------------------------------------------------
# per-model design and fit statistics
# ----------------------------------------------------------------------

def matrix_rank_sse(M: np.ndarray, y: np.ndarray) -> tuple[int, float]:
    """Rank and least-squares SSE of ``y`` on ``M`` from one SVD.

    Rank uses the cutoff sigma > RANK_EPS * max(shape) * sigma_max; the SSE
    comes from projecting onto the retained left singular vectors, so it is
    well defined (and invariant) for rank-deficient ``M``.
    """
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    tol = s[0] * max(M.shape) * RANK_EPS if s.size and s[0] > 0.0 else 0.0
    r = int(np.count_nonzero(s > tol))
    resid = y - u[:, :r] @ (u[:, :r].T @ y)
    return r, float(resid @ resid)


def model_design(assembly: DesignAssembly, gamma: ModelGamma) -> np.ndarray:
    """[X0 | X_sel | Z_sel]: sure block plus the columns gamma activates."""
    if len(gamma.variable_bits) != assembly.k or len(gamma.level_bits) != assembly.L:
        raise ValueError(
            f"gamma has dimensions ({len(gamma.variable_bits)}, {len(gamma.level_bits)}), "
            f"assembly needs ({assembly.k}, {assembly.L})"
        )
    blocks = [assembly.X0]
    vsel = [j for j, b in enumerate(gamma.variable_bits) if b]
    if vsel:
        blocks.append(assembly.X[:, vsel])
    lsel = [j for j, b in enumerate(gamma.level_bits) if b]
    if lsel:
        blocks.append(assembly.Z[:, lsel])
    return np.hstack(blocks)


def rank_and_sse(assembly: DesignAssembly, gamma: ModelGamma) -> tuple[int, float]:
    """(rank, SSE) of the model gamma selects; gamma = null gives (k0, SSE_0)."""
    return matrix_rank_sse(model_design(assembly, gamma), assembly.y)
