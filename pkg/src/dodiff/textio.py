"""Plain-text helpers for the key-value document format and CSV payloads.

Documents are INI-style sections of ``key = value`` lines.  Numeric arrays
are whitespace- or comma-separated; groups of arrays (one per polynomial
piece) are joined with ``;``.  Floats are always written with ``repr``
round-trip precision so that identical inputs produce byte-identical files.
"""

from __future__ import annotations

import configparser
import hashlib

import numpy as np

from .errors import PreconditionError


def parse_array(text: str) -> np.ndarray:
    toks = text.replace(",", " ").split()
    if not toks:
        return np.zeros(0)
    try:
        return np.array([float(t) for t in toks])
    except ValueError as exc:
        raise PreconditionError(f"cannot parse numeric array from {text!r}") from exc


def format_array(values) -> str:
    return " ".join(repr(float(v)) for v in np.atleast_1d(values))


def parse_array_groups(text: str) -> list[np.ndarray]:
    """Parse ``;``-separated arrays, e.g. piecewise polynomial coefficients."""
    return [parse_array(part) for part in text.split(";")]


def format_array_groups(groups) -> str:
    return " ; ".join(format_array(g) for g in groups)


def parse_document(text: str) -> dict[str, dict[str, str]]:
    """Parse an INI-style document into ``{section: {key: value}}``.

    Parse failures carry the offending line; unknown sections are preserved
    for the caller to validate.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise PreconditionError(f"malformed config document: {exc}") from exc
    return {name: dict(parser[name]) for name in parser.sections()}


def format_document(sections: dict[str, dict[str, str]]) -> str:
    lines = []
    for name, body in sections.items():
        lines.append(f"[{name}]")
        for key, value in body.items():
            lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)


def document_hash(text: str) -> str:
    """Stable hash of a config document, insensitive to comments and spacing."""
    sections = parse_document(text)
    canon = format_document({k: dict(sorted(v.items())) for k, v in sorted(sections.items())})
    return hashlib.sha256(canon.encode()).hexdigest()


def write_csv(path, header: list[str], rows, comments: list[str] | None = None) -> None:
    """Write rows of floats/ints/strings as CSV with optional ``#`` comments."""
    out = []
    for line in comments or []:
        out.append(f"# {line}")
    out.append(",".join(header))
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, (float, np.floating)):
                cells.append(repr(float(cell)))
            else:
                cells.append(str(cell))
        out.append(",".join(cells))
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
