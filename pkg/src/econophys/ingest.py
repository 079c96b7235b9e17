"""Parsing, validation, and round-trip serialization of input datasets.

Three comma-separated UTF-8 formats are understood:

* samples        -- one numeric column of money amounts, header optional;
* ccdf           -- two columns (income, cumulative fraction at or above),
                    header optional;
* country panel  -- header required; either ``code,population,quantity``
                    for a single year or ``year,code,population,quantity``
                    for a multi-year panel.

Numbers use a decimal point and no thousands separators; units are never
inferred from the data, they live in the manifest's source label.  Parse
errors carry the offending file, line, and column.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import CcdfCurve, MoneySample
from .inequality import CountryRecord

PANEL_COLUMNS = ("code", "population", "quantity")
DATASET_KINDS = ("samples", "ccdf", "country_panel")


class ParseError(ValueError):
    """Input that violates a dataset format, located by file/line/column."""

    def __init__(self, message, source="<string>", line=None, column=None):
        where = source
        if line is not None:
            where += f":{line}"
        if column is not None:
            where += f" (column {column})"
        super().__init__(f"{where}: {message}")
        self.source = source
        self.line = line
        self.column = column


@dataclass(frozen=True)
class DatasetManifest:
    kind: str
    rows: int
    source: str = "<string>"
    year: int | None = None

    def __post_init__(self):
        if self.kind not in DATASET_KINDS:
            raise ValueError(f"unknown dataset kind {self.kind!r}")
        if self.rows <= 0:
            raise ValueError("manifest row count must be positive")


def _rows(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        yield lineno, [cell.strip() for cell in line.split(",")]


def _parse_float(cell, source, lineno, column):
    try:
        value = float(cell)
    except ValueError:
        raise ParseError(f"not a number: {cell!r}", source, lineno, column) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite value: {cell!r}", source, lineno, column)
    return value


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def parse_samples(text: str, source: str = "<string>") -> MoneySample:
    """One numeric column of non-negative amounts; header row optional."""
    values = []
    for lineno, cells in _rows(text):
        if len(cells) != 1:
            raise ParseError(f"expected one column, got {len(cells)}", source, lineno)
        cell = cells[0]
        if not values and not _is_number(cell):
            continue  # header
        v = _parse_float(cell, source, lineno, 1)
        if v < 0:
            raise ParseError(f"negative value {v}", source, lineno, 1)
        values.append(v)
    if not values:
        raise ParseError("no data", source)
    return MoneySample(np.array(values), unit_label=source)


def parse_ccdf(text: str, source: str = "<string>") -> CcdfCurve:
    """Two columns (income, fraction at or above); header row optional."""
    r, c = [], []
    for lineno, cells in _rows(text):
        if len(cells) != 2:
            raise ParseError(f"expected two columns, got {len(cells)}", source, lineno)
        if not r and not all(map(_is_number, cells)):
            continue  # header
        ri = _parse_float(cells[0], source, lineno, 1)
        ci = _parse_float(cells[1], source, lineno, 2)
        if not 0.0 <= ci <= 1.0:
            raise ParseError(f"cumulative fraction {ci} outside [0, 1]", source, lineno, 2)
        if r and ri <= r[-1]:
            raise ParseError(
                f"income {ri} not above the previous row's {r[-1]}", source, lineno, 1
            )
        if c and ci > c[-1]:
            raise ParseError(
                f"cumulative fraction rises from {c[-1]} to {ci}", source, lineno, 2
            )
        r.append(ri)
        c.append(ci)
    if not r:
        raise ParseError("no data", source)
    return CcdfCurve(np.array(r), np.array(c))


def _panel_header(cells, source, lineno):
    names = [cell.lower() for cell in cells]
    if names == list(PANEL_COLUMNS):
        return False
    if names == ["year", *PANEL_COLUMNS]:
        return True
    raise ParseError(
        "panel header must be 'code,population,quantity' or "
        f"'year,code,population,quantity', got {','.join(cells)!r}",
        source,
        lineno,
    )


def parse_country_panel_years(text: str, source: str = "<string>"):
    """Parse a country panel into {year: [CountryRecord, ...]}, years sorted.

    A single-year file (no year column) is keyed by ``None``.  Rows with
    zero population are rejected and reported through a single warning;
    duplicate country codes within one year are an error.
    """
    header_seen = False
    has_year = False
    by_year: dict = {}
    rejected = []
    for lineno, cells in _rows(text):
        if not header_seen:
            has_year = _panel_header(cells, source, lineno)
            header_seen = True
            continue
        expected = 4 if has_year else 3
        if len(cells) != expected:
            raise ParseError(
                f"expected {expected} columns, got {len(cells)}", source, lineno
            )
        if has_year:
            year_cell, code, pop_cell, qty_cell = cells
            try:
                year = int(year_cell)
            except ValueError:
                raise ParseError(
                    f"not a year: {year_cell!r}", source, lineno, 1
                ) from None
        else:
            year = None
            code, pop_cell, qty_cell = cells
        column0 = 1 if has_year else 0
        population = _parse_float(pop_cell, source, lineno, column0 + 2)
        quantity = _parse_float(qty_cell, source, lineno, column0 + 3)
        if quantity < 0:
            raise ParseError(f"negative quantity {quantity}", source, lineno, column0 + 3)
        if population <= 0:
            rejected.append((lineno, code))
            continue
        records = by_year.setdefault(year, {})
        if code in records:
            raise ParseError(
                f"duplicate country code {code!r}"
                + (f" for year {year}" if year is not None else ""),
                source,
                lineno,
                column0 + 1,
            )
        records[code] = CountryRecord(code, population, quantity)
    if not header_seen:
        raise ParseError("missing panel header", source)
    if not by_year:
        raise ParseError("no data rows", source)
    if rejected:
        listing = ", ".join(f"{code} (line {lineno})" for lineno, code in rejected)
        warnings.warn(
            f"{source}: rejected {len(rejected)} zero-population rows: {listing}",
            stacklevel=2,
        )
    return {
        year: list(records.values())
        for year, records in sorted(by_year.items(), key=lambda kv: (kv[0] is not None, kv[0]))
    }


def parse_country_panel(text: str, year: int | None = None, source: str = "<string>"):
    """Country records for one year of a panel.

    For a single-year file (``code,population,quantity``) the ``year``
    argument is only a label; for a multi-year file it selects which year
    to return and is required.
    """
    by_year = parse_country_panel_years(text, source)
    if None in by_year:
        return by_year[None]
    if year is None:
        years = sorted(by_year)
        raise ParseError(
            f"multi-year panel (years {years[0]}..{years[-1]}); pick one", source
        )
    if year not in by_year:
        raise ParseError(f"year {year} not present in panel", source)
    return by_year[year]


def manifest_for(kind: str, rows: int, source: str = "<string>", year: int | None = None) -> DatasetManifest:
    return DatasetManifest(kind=kind, rows=rows, source=source, year=year)


def write_samples(sample: MoneySample) -> str:
    lines = ["income"]
    lines += [repr(v) for v in sample.values.tolist()]
    return "\n".join(lines) + "\n"


def write_ccdf(curve: CcdfCurve) -> str:
    lines = ["r,c"]
    lines += [f"{r!r},{c!r}" for r, c in zip(curve.r.tolist(), curve.c.tolist())]
    return "\n".join(lines) + "\n"


def write_country_panel(by_year) -> str:
    """Serialize {year: records} (or a plain record list) back to CSV."""
    if isinstance(by_year, dict):
        if list(by_year) == [None]:
            return write_country_panel(by_year[None])
        lines = ["year,code,population,quantity"]
        for year in sorted(by_year):
            for rec in by_year[year]:
                lines.append(f"{year},{rec.code},{rec.population!r},{rec.quantity!r}")
    else:
        lines = ["code,population,quantity"]
        for rec in by_year:
            lines.append(f"{rec.code},{rec.population!r},{rec.quantity!r}")
    return "\n".join(lines) + "\n"
