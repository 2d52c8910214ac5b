"""Shared CSV writing: comment header plus 12-significant-digit floats."""

from __future__ import annotations

import datetime


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_csv(path, header, rows, stamp=True):
    """Write rows with a '# generated=' comment line before the header.

    Bodies are deterministic for identical inputs; only the comment line
    varies between runs.
    """
    with open(path, "w") as fh:
        if stamp:
            now = datetime.datetime.now(datetime.timezone.utc).isoformat()
            fh.write(f"# generated={now}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
