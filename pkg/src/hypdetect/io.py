"""CSV tables with a JSON sidecar recording configuration, seed and build."""

from __future__ import annotations

import csv
import json
import subprocess
from pathlib import Path


def git_describe() -> str:
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=here, capture_output=True, text=True, timeout=10, check=True,
        )
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: "str | Path", header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_csv(path: "str | Path") -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def sidecar_path(path: "str | Path") -> Path:
    p = Path(path)
    return p.with_name(p.name + ".json")


def write_sidecar(path: "str | Path", config: dict) -> Path:
    """Write ``<path>.json`` with the run configuration and the build's git description."""
    side = sidecar_path(path)
    payload = {"config": config, "build": git_describe()}
    side.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    return side


def write_table(path: "str | Path", header: list[str], rows, config: dict) -> None:
    write_csv(path, header, rows)
    write_sidecar(path, config)
