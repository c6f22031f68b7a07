"""Variance profile matrices: validation, ingestion, and structured generators.

A profile is the d x n nonnegative matrix B = (b_ij) of entrywise standard
deviations; every other module consumes it read-only.  Entries ingested as
integers or "p/q" ratio strings are kept as exact `fractions.Fraction` values
so the combinatorial engines can run in rational arithmetic; any decimal cell
demotes the whole matrix to binary floating point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import IO, Sequence, Union

import numpy as np

Entry = Union[Fraction, float]


class ProfileFormatError(ValueError):
    """Input does not parse as a rectangular numeric matrix."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class ProfileDomainError(ValueError):
    """Parsed matrix violates the profile domain (negative entry, empty, non-finite)."""


class ResourceLimitError(RuntimeError):
    """A configured work cap (term count, shape order) would be exceeded."""


@dataclass(frozen=True)
class VarianceProfile:
    """Immutable d x n matrix of nonnegative standard-deviation weights.

    `exact` is True when every entry is a Fraction ingested without rounding;
    in that mode the moment oracles and shape weights are computed in exact
    rational arithmetic.
    """

    entries: tuple[tuple[Entry, ...], ...]
    exact: bool

    def __post_init__(self):
        if not self.entries or not self.entries[0]:
            raise ProfileDomainError("profile must have at least one row and one column")
        width = len(self.entries[0])
        for i, row in enumerate(self.entries):
            if len(row) != width:
                raise ProfileFormatError(f"row {i + 1} has {len(row)} cells, expected {width}", line=i + 1)
            for x in row:
                if isinstance(x, float) and not math.isfinite(x):
                    raise ProfileDomainError(f"non-finite entry in row {i + 1}")
                if x < 0:
                    raise ProfileDomainError(f"negative entry {x} in row {i + 1}")

    @property
    def d(self) -> int:
        return len(self.entries)

    @property
    def n(self) -> int:
        return len(self.entries[0])

    @cached_property
    def _array(self) -> np.ndarray:
        a = np.array([[float(x) for x in row] for row in self.entries], dtype=np.float64)
        a.setflags(write=False)
        return a

    def as_array(self) -> np.ndarray:
        """Read-only float64 view of the entries."""
        return self._array

    @property
    def is_zero(self) -> bool:
        return all(x == 0 for row in self.entries for x in row)

    def integerized(self) -> tuple[list[list[int]], int]:
        """Entries as integers over a common denominator D (exact mode only).

        Returns (N, D) with b_ij = N_ij / D.  Every moment of homogeneous
        degree 2p in the entries can then be computed in pure integer
        arithmetic and divided by D**(2p) once at the end.
        """
        if not self.exact:
            raise ValueError("integerized() requires an exact profile")
        den = 1
        for row in self.entries:
            for x in row:
                den = den * x.denominator // math.gcd(den, x.denominator)
        nums = [[int(x * den) for x in row] for row in self.entries]
        return nums, den

    def scaled(self, t) -> "VarianceProfile":
        """Profile with every entry multiplied by t > 0."""
        if t < 0:
            raise ProfileDomainError("scale factor must be nonnegative")
        if self.exact and isinstance(t, (int, Fraction)):
            rows = tuple(tuple(x * Fraction(t) for x in row) for row in self.entries)
            return VarianceProfile(rows, exact=True)
        tf = float(t)
        rows = tuple(tuple(float(x) * tf for x in row) for row in self.entries)
        return VarianceProfile(rows, exact=False)

    def to_csv(self) -> str:
        lines = []
        for row in self.entries:
            lines.append(",".join(_format_cell(x) for x in row))
        return "\n".join(lines) + "\n"

    def to_json_obj(self) -> dict:
        ent = [[_json_cell(x) for x in row] for row in self.entries]
        return {"d": self.d, "n": self.n, "entries": ent}


def _format_cell(x: Entry) -> str:
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator}"
    return repr(x)


def _json_cell(x: Entry):
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return int(x.numerator)
        return f"{x.numerator}/{x.denominator}"
    return x


def _parse_cell(text: str) -> Entry:
    """One CSV/JSON-string cell: integer or p/q stays exact, decimal is a float."""
    s = text.strip()
    if not s:
        raise ValueError("empty cell")
    if "/" in s:
        num, _, den = s.partition("/")
        return Fraction(int(num), int(den))
    try:
        return Fraction(int(s))
    except ValueError:
        return float(s)  # may raise ValueError for garbage


def _finish(rows: list[list[Entry]]) -> VarianceProfile:
    exact = all(isinstance(x, Fraction) for row in rows for x in row)
    if not exact:
        rows = [[float(x) for x in row] for row in rows]
    return VarianceProfile(tuple(tuple(row) for row in rows), exact=exact)


def _load_csv(text: str) -> VarianceProfile:
    rows: list[list[Entry]] = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            if rows:
                continue  # tolerate trailing blank lines
            raise ProfileFormatError("blank line before any data", line=lineno)
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ProfileFormatError(
                f"line {lineno}: {len(cells)} cells, expected {width}", line=lineno
            )
        row = []
        for cell in cells:
            try:
                row.append(_parse_cell(cell))
            except (ValueError, ZeroDivisionError) as exc:
                raise ProfileFormatError(f"line {lineno}: bad cell {cell.strip()!r}", line=lineno) from exc
        rows.append(row)
    if not rows:
        raise ProfileDomainError("empty matrix")
    return _finish(rows)


def _reject_constant(name):
    raise ProfileFormatError(f"non-finite JSON constant {name!r}")


def _load_json(text: str) -> VarianceProfile:
    try:
        obj = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ProfileFormatError(f"invalid JSON: {exc}", line=exc.lineno) from exc
    if isinstance(obj, dict):
        try:
            d, n, ent = obj["d"], obj["n"], obj["entries"]
        except KeyError as exc:
            raise ProfileFormatError(f"missing key {exc}") from exc
        if not isinstance(ent, list) or len(ent) != d:
            raise ProfileFormatError(f"entries has {len(ent) if isinstance(ent, list) else '?'} rows, d={d}")
        if any(not isinstance(r, list) or len(r) != n for r in ent):
            raise ProfileFormatError(f"entries rows must all have n={n} cells")
    elif isinstance(obj, list):
        ent = obj
    else:
        raise ProfileFormatError("JSON top level must be an object or an array")
    if not ent:
        raise ProfileDomainError("empty matrix")
    rows: list[list[Entry]] = []
    for i, raw in enumerate(ent, start=1):
        if not isinstance(raw, list):
            raise ProfileFormatError(f"row {i} is not an array", line=i)
        row = []
        for cell in raw:
            if isinstance(cell, bool):
                raise ProfileFormatError(f"row {i}: boolean cell", line=i)
            if isinstance(cell, int):
                row.append(Fraction(cell))
            elif isinstance(cell, float):
                row.append(cell)
            elif isinstance(cell, str):
                try:
                    row.append(_parse_cell(cell))
                except (ValueError, ZeroDivisionError) as exc:
                    raise ProfileFormatError(f"row {i}: bad cell {cell!r}", line=i) from exc
            else:
                raise ProfileFormatError(f"row {i}: unsupported cell type {type(cell).__name__}", line=i)
        rows.append(row)
    if any(len(r) != len(rows[0]) for r in rows):
        raise ProfileFormatError("ragged rows")
    return _finish(rows)


def load_profile(source: Union[bytes, str, IO], format: str = "csv") -> VarianceProfile:
    """Parse a profile from CSV or JSON bytes/text.

    Integer and "p/q" cells are ingested exactly (exact=True); any decimal
    cell switches the whole matrix to float mode.  Ragged rows raise
    ProfileFormatError, negative entries ProfileDomainError.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if format == "csv":
        return _load_csv(source)
    if format == "json":
        return _load_json(source)
    raise ValueError(f"unknown format {format!r} (expected 'csv' or 'json')")


# --- structured families -------------------------------------------------

_FAMILY_KINDS = ("constant", "iid_columns", "iid_rows", "rank_one", "bounded_ratio", "explicit")


def _as_entry_vector(vec: Sequence) -> tuple[Entry, ...]:
    out = []
    for x in vec:
        if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
            x = Fraction(x)
        else:
            x = float(x)
        if x < 0:
            raise ProfileDomainError("family vectors must be nonnegative")
        out.append(x)
    return tuple(out)


@dataclass(frozen=True)
class ProfileFamily:
    """One of the structured profile classes with closed-form behaviour.

    constant       b_ij = 1
    iid_columns    b_ij = b_i          (columns are i.i.d. vectors)
    iid_rows       b_ij = b_j          (rows are i.i.d. vectors)
    rank_one       b_ij = a_i * b_j
    bounded_ratio  columns of a base profile rescaled so their Euclidean
                   norms lie within a factor K of each other
    explicit       a verbatim profile
    """

    kind: str
    a: tuple[Entry, ...] | None = None
    b: tuple[Entry, ...] | None = None
    ratio_cap: float | None = None
    base: VarianceProfile | None = None

    def __post_init__(self):
        if self.kind not in _FAMILY_KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind == "bounded_ratio" and (self.ratio_cap is None or self.ratio_cap < 1):
            raise ValueError("bounded_ratio requires K >= 1")

    @staticmethod
    def constant() -> "ProfileFamily":
        return ProfileFamily("constant")

    @staticmethod
    def iid_columns(b: Sequence) -> "ProfileFamily":
        return ProfileFamily("iid_columns", b=_as_entry_vector(b))

    @staticmethod
    def iid_rows(b: Sequence) -> "ProfileFamily":
        return ProfileFamily("iid_rows", b=_as_entry_vector(b))

    @staticmethod
    def rank_one(a: Sequence, b: Sequence) -> "ProfileFamily":
        return ProfileFamily("rank_one", a=_as_entry_vector(a), b=_as_entry_vector(b))

    @staticmethod
    def bounded_ratio(ratio_cap: float, base: VarianceProfile) -> "ProfileFamily":
        return ProfileFamily("bounded_ratio", ratio_cap=float(ratio_cap), base=base)

    @staticmethod
    def explicit(profile: VarianceProfile) -> "ProfileFamily":
        return ProfileFamily("explicit", base=profile)


def generate(family: ProfileFamily, d: int, n: int) -> VarianceProfile:
    """Materialize a d x n profile for the given family.

    Raises ValueError when the family parameters are inconsistent with (d, n).
    """
    if d < 1 or n < 1:
        raise ProfileDomainError("d and n must be positive")
    kind = family.kind
    if kind == "constant":
        one = Fraction(1)
        return VarianceProfile(tuple(tuple(one for _ in range(n)) for _ in range(d)), exact=True)
    if kind == "iid_columns":
        if family.b is None or len(family.b) != d:
            raise ValueError(f"iid_columns needs a length-{d} vector")
        return _finish([[family.b[i]] * n for i in range(d)])
    if kind == "iid_rows":
        if family.b is None or len(family.b) != n:
            raise ValueError(f"iid_rows needs a length-{n} vector")
        return _finish([list(family.b) for _ in range(d)])
    if kind == "rank_one":
        if family.a is None or len(family.a) != d or family.b is None or len(family.b) != n:
            raise ValueError(f"rank_one needs vectors of lengths {d} and {n}")
        exact = all(isinstance(x, Fraction) for x in family.a + family.b)
        if exact:
            rows = [[family.a[i] * family.b[j] for j in range(n)] for i in range(d)]
        else:
            rows = [[float(family.a[i]) * float(family.b[j]) for j in range(n)] for i in range(d)]
        return _finish(rows)
    if kind == "bounded_ratio":
        return _generate_bounded_ratio(family, d, n)
    if kind == "explicit":
        if family.base is None or family.base.d != d or family.base.n != n:
            raise ValueError("explicit family needs a base profile of matching dimensions")
        return family.base
    raise ValueError(f"unknown family kind {kind!r}")


def _generate_bounded_ratio(family: ProfileFamily, d: int, n: int) -> VarianceProfile:
    # Columns with norm below max/K are scaled up to max/K; already-compliant
    # profiles pass through unchanged (preserving exactness).
    base = family.base
    if base is None or base.d != d or base.n != n:
        raise ValueError("bounded_ratio needs a base profile of matching dimensions")
    K = family.ratio_cap
    arr = base.as_array()
    norms = np.sqrt((arr * arr).sum(axis=0))
    top = norms.max()
    if top == 0:
        return base
    target = top / K
    factors = np.ones(n)
    for j in range(n):
        if 0 < norms[j] < target:
            factors[j] = target / norms[j]
    if np.all(factors == 1.0):
        return base
    scaled = arr * factors[np.newaxis, :]
    return VarianceProfile(tuple(tuple(float(x) for x in row) for row in scaled), exact=False)
