"""Number formatting shared by report writers and the CLI."""

from __future__ import annotations

from .errors import InvalidInputError


def format_number(x, precision: str = "human") -> str:
    """Format a float with 6 significant digits, or shortest-roundtrip repr.

    ``precision`` is "human" (6 significant digits) or "full" (repr, which
    round-trips exactly).
    """
    if x is None:
        return ""
    x = float(x)
    if precision == "human":
        return f"{x:.6g}"
    if precision == "full":
        return repr(x)
    raise InvalidInputError(f"precision must be 'human' or 'full', got {precision!r}")


def write_csv(path, header, rows):
    """Write rows of already-formatted strings with a header line."""
    lines = [",".join(header)]
    lines += [",".join(row) for row in rows]
    text = "\n".join(lines) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
