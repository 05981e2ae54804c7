"""Canonical JSON/CSV emission: fixed key order, \\n line endings, repr floats.

Identical inputs serialize to identical bytes, which is what makes seeded
experiment runs byte-reproducible end to end.
"""

from __future__ import annotations

import json


def json_dumps(obj) -> str:
    """UTF-8 JSON with insertion-ordered keys and a trailing newline."""
    return json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=False) + "\n"


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json_dumps(obj))


def csv_text(header, rows) -> str:
    lines = [",".join(str(h) for h in header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(csv_text(header, rows))


def read_csv(path):
    """Inverse of write_csv: (header, rows of strings)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line for line in fh.read().split("\n") if line]
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]
