"""CSV rendering of tables and sweeps.

One header row, one record per grid point, numbers with 9 significant
digits so output is byte-identical across runs for a fixed configuration.
"""

import csv
import io
from collections.abc import Iterable, Sequence
from typing import TextIO

from app.schemas.pricing import Table1Row

TABLE1_HEADER = ("rho", "mc", "taylor2", "cheb15")


def format_value(value: float | int | str | None) -> str:
    """Render a cell; floats get 9 significant digits, None an empty cell."""
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def write_csv(
    header: Sequence[str],
    rows: Iterable[Sequence[float | int | str | None]],
    stream: TextIO,
) -> None:
    """Write header and rows to the stream with Unix line endings."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(cell) for cell in row])


def render_csv(header: Sequence[str], rows: Iterable[Sequence[float | int | str | None]]) -> str:
    buffer = io.StringIO()
    write_csv(header, rows, buffer)
    return buffer.getvalue()


def table1_records(rows: Iterable[Table1Row]) -> list[tuple[float, float | None, float, float]]:
    return [(row.rho, row.mc, row.taylor2, row.cheb15) for row in rows]
