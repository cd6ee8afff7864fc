"""Reproducibility headers embedded in every output artifact."""

from __future__ import annotations

import hashlib
import json
from typing import Any

from . import __version__


def config_digest(config: dict[str, Any]) -> str:
    """Short stable digest of the configuration that produced an artifact."""
    canonical = json.dumps(config, sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def header_lines(config: dict[str, Any], comment: str = "#") -> list[str]:
    """Comment lines placed at the top of text artifacts."""
    lines = [
        f"{comment} generated-by: capeval {__version__}",
        f"{comment} config-digest: {config_digest(config)}",
    ]
    for key in sorted(config):
        lines.append(f"{comment} config: {key}={config[key]}")
    return lines


def meta_object(config: dict[str, Any]) -> dict[str, Any]:
    """`_meta` block for structured (JSON) artifacts."""
    return {
        "generated_by": f"capeval {__version__}",
        "config_digest": config_digest(config),
        "config": {k: config[k] for k in sorted(config)},
    }
