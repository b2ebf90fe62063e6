from __future__ import annotations

import json
from pathlib import Path
from typing import Any


def ensure_dir(path: Path) -> None:
    path.mkdir(parents=True, exist_ok=True)


def dump_json(data: Any) -> str:
    """Stable text form: insertion key order, 2-space indent, trailing newline."""
    return json.dumps(data, indent=2, allow_nan=False) + "\n"


def save_json(data: Any, path: Path) -> None:
    ensure_dir(path.parent)
    path.write_text(dump_json(data))


def load_json(path: Path) -> Any:
    if not path.exists():
        raise FileNotFoundError(f"JSON file not found: {path}")
    return json.loads(path.read_text())
