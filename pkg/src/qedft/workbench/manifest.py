"""Run manifests: config hash, code version, output file hashes.

The manifest is the one artifact that carries timestamps; every other output
is byte-reproducible from (config, seed, code version).  Written atomically.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path

__all__ = ["config_hash", "sha256_file", "write_manifest", "read_manifest", "verify_manifest"]


def config_hash(config_data: dict) -> str:
    canonical = json.dumps(config_data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    out_dir,
    config_data: dict,
    outputs,
    functional_files=(),
    extra: dict | None = None,
) -> Path:
    out_dir = Path(out_dir)
    from .. import __version__

    manifest = {
        "config_hash": config_hash(config_data),
        "code_version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "outputs": {
            str(Path(p).relative_to(out_dir)): sha256_file(p) for p in outputs
        },
        "functional_files": {str(p): sha256_file(p) for p in functional_files},
    }
    if extra:
        manifest.update(extra)
    target = out_dir / "manifest.json"
    fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=".manifest-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return target


def read_manifest(out_dir) -> dict:
    return json.loads((Path(out_dir) / "manifest.json").read_text(encoding="utf-8"))


def verify_manifest(out_dir) -> bool:
    """Every listed output exists and matches its recorded hash."""
    out_dir = Path(out_dir)
    manifest = read_manifest(out_dir)
    for rel, digest in manifest["outputs"].items():
        path = out_dir / rel
        if not path.exists() or sha256_file(path) != digest:
            return False
    return True
