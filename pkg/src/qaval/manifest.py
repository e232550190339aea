"""Run manifests: a reproducibility record written alongside every output.

The manifest captures the tool version, the exact parameters, and content
digests of inputs and outputs.  It deliberately contains no timestamps:
re-running a command on identical inputs produces a byte-identical
manifest (remote scorers are the recorded exception).
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import __version__


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return f"sha256:{h.hexdigest()}"


def build_manifest(
    command: str,
    params: dict,
    inputs: dict[str, str | Path],
    outputs: dict[str, str | Path],
    deterministic: bool = True,
) -> dict:
    return {
        "tool": "qaval",
        "version": __version__,
        "command": command,
        "params": params,
        "inputs": {name: file_digest(p) for name, p in sorted(inputs.items())},
        "outputs": {name: file_digest(p) for name, p in sorted(outputs.items())},
        "deterministic": deterministic,
    }


def manifest_path_for(output_path: str | Path) -> Path:
    output_path = Path(output_path)
    return output_path.with_name(output_path.name + ".manifest.json")


def write_manifest(manifest: dict, output_path: str | Path) -> Path:
    path = manifest_path_for(output_path)
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path
