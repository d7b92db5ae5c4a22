"""Deterministic CSV writing with comment headers."""

from __future__ import annotations


def format_value(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path, column_names, rows, meta=()):
    """Write rows with '#' comment header lines followed by a column header.

    ``meta`` lines (config hash, tool version, ...) go first so repeated runs
    with the same configuration produce byte-identical files.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in meta:
            fh.write(f"# {line}\n")
        fh.write(",".join(column_names) + "\n")
        for row in rows:
            fh.write(",".join(format_value(x) for x in row) + "\n")
