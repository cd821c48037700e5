"""Run manifests: enough resolved configuration to reproduce a run exactly."""

from __future__ import annotations

import dataclasses
import datetime
import json
from pathlib import Path

import numpy as np


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_manifest(
    path,
    command: str,
    config: dict,
    master_seed: int,
    outputs,
    extra: dict | None = None,
) -> dict:
    """Write a JSON manifest; returns the dict that was written."""
    from . import __version__

    manifest = {
        "command": command,
        "config": _jsonable(config),
        "master_seed": int(master_seed),
        "artifact_version": __version__,
        "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": [str(p) for p in outputs],
    }
    if extra:
        manifest["extra"] = _jsonable(extra)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def load_manifest(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
