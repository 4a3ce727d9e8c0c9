"""Deterministic artifact I/O.

CSV dialect: comma separator, '.' decimal point, header row, UTF-8, LF
line endings, floats as shortest round-trip decimals, empty cell for
missing/infeasible values.  The first line of every CSV is a comment
carrying the configuration hash.
"""

from __future__ import annotations

import json
import math

from .errors import DataError, StalenessError


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def write_csv(path, header: list[str], rows, config_hash: str = "") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def read_csv(path, expected_hash: str | None = None) -> tuple[str, list[str], list[list[str]]]:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except FileNotFoundError as exc:
        raise DataError(f"missing artifact {path}") from exc
    if not lines or not lines[0].startswith("# config_hash="):
        raise DataError(f"{path} lacks a config-hash line")
    found = lines[0].split("=", 1)[1]
    if expected_hash is not None and found != expected_hash:
        raise StalenessError(f"{path} written under config {found!r}, expected {expected_hash!r}")
    header = lines[1].split(",") if len(lines) > 1 else []
    rows = [line.split(",") for line in lines[2:] if line]
    return found, header, rows


def write_json(path, doc: dict, config_hash: str = "") -> None:
    doc = dict(doc)
    doc["config_hash"] = config_hash
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_json(path, expected_hash: str | None = None) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise DataError(f"missing artifact {path}") from exc
    if expected_hash is not None and doc.get("config_hash") != expected_hash:
        raise StalenessError(f"{path} written under config {doc.get('config_hash')!r}, expected {expected_hash!r}")
    return doc
