"""Shared CSV loading for the figure scripts.

These scripts are pure consumers: they read columns written by the lab's
command line and never recompute any physics.  Missing columns and empty
tables fail loudly with the offending name in the message.
"""

import csv


class ColumnError(ValueError):
    pass


def load_rows(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    if not rows:
        raise ColumnError(f"{path}: no data rows")
    return rows


def column(rows, name, path="<csv>"):
    try:
        return [float(r[name]) for r in rows]
    except (KeyError, TypeError):
        raise ColumnError(f"{path}: missing column {name!r}") from None


def eps_columns(rows, prefix, path="<csv>"):
    """Sorted (eps, values) pairs for headers like '<prefix>0.25'."""
    names = [k for k in rows[0] if k is not None and k.startswith(prefix)]
    if not names:
        raise ColumnError(f"{path}: missing columns {prefix}*")
    pairs = sorted((float(n[len(prefix):]), n) for n in names)
    return [(eps, column(rows, name, path)) for eps, name in pairs]
