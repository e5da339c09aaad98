"""CSV emission with one declared float policy: shortest round-trip text."""

from pathlib import Path


def format_cell(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_csv(path, header, rows):
    """Write header plus rectangular rows, newline-terminated."""
    width = len(header)
    lines = [",".join(header)]
    for row in rows:
        if len(row) != width:
            raise ValueError("rows must be rectangular")
        lines.append(",".join(format_cell(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")
