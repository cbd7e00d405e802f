"""Strict reader for the harness CSV contract.

The file format is '#'-prefixed metadata lines followed by a fixed header
and one aggregated row per (scheme, estimator, sweep point, metric). Any
deviation from the contract is a SchemaError naming the offending column.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

EXPECTED_HEADER = (
    "scheme",
    "estimator",
    "sweep_name",
    "sweep_value",
    "metric",
    "mean",
    "std_error",
    "trials",
)

KNOWN_SCHEMES = ("fully_digital", "full_pahp", "lahp_adaptive")

_FLOAT_COLUMNS = ("sweep_value", "mean", "std_error")


class SchemaError(ValueError):
    """CSV input does not match the sweep-result contract."""


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    estimator: str
    sweep_name: str
    sweep_value: float
    metric: str
    mean: float
    std_error: float
    trials: int


def read_sweep_csv(path) -> list[SweepRow]:
    """Parse and validate one sweep CSV, returning its data rows."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    reader = csv.reader(lines)
    try:
        header = tuple(next(reader))
    except StopIteration:
        raise SchemaError(f"{path}: no header row") from None
    if header != EXPECTED_HEADER:
        for got, want in zip(header, EXPECTED_HEADER):
            if got != want:
                raise SchemaError(
                    f"{path}: header column {got!r} where {want!r} expected"
                )
        raise SchemaError(
            f"{path}: header has {len(header)} columns, expected "
            f"{len(EXPECTED_HEADER)}"
        )
    rows = []
    for lineno, record in enumerate(reader, 2):
        if len(record) != len(EXPECTED_HEADER):
            raise SchemaError(
                f"{path}:{lineno}: {len(record)} fields, expected "
                f"{len(EXPECTED_HEADER)}"
            )
        named = dict(zip(EXPECTED_HEADER, record))
        if named["scheme"] not in KNOWN_SCHEMES:
            raise SchemaError(
                f"{path}:{lineno}: unknown scheme {named['scheme']!r} "
                f"in column 'scheme'"
            )
        values = {}
        for column in _FLOAT_COLUMNS:
            try:
                values[column] = float(named[column])
            except ValueError:
                raise SchemaError(
                    f"{path}:{lineno}: cannot parse column {column!r} "
                    f"value {named[column]!r} as a number"
                ) from None
        try:
            trials = int(named["trials"])
        except ValueError:
            raise SchemaError(
                f"{path}:{lineno}: cannot parse column 'trials' "
                f"value {named['trials']!r} as an integer"
            ) from None
        rows.append(
            SweepRow(
                scheme=named["scheme"],
                estimator=named["estimator"],
                sweep_name=named["sweep_name"],
                sweep_value=values["sweep_value"],
                metric=named["metric"],
                mean=values["mean"],
                std_error=values["std_error"],
                trials=trials,
            )
        )
    return rows
