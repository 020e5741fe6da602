"""Content-addressed on-disk result cache.

Entries are keyed by the SHA-256 of the canonical JSON of everything that
determines a result (command, parameters, solver configuration, tool
version).  Writes go to a temporary file in the same directory followed by
``os.replace``, so concurrent writers never expose partial files and
same-key writers simply overwrite each other with identical content.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .model import canonical_json

__all__ = ["ResultCache", "CacheHit", "record_key", "cache_from_env", "ENV_VAR"]

ENV_VAR = "SPLITGAP_CACHE"
log = logging.getLogger(__name__)


def record_key(inputs: dict) -> str:
    """Hex digest of the canonical JSON of ``inputs``."""
    return hashlib.sha256(canonical_json(inputs).encode()).hexdigest()


@dataclass
class CacheHit:
    key: str
    payload: dict
    text: str


class ResultCache:
    """Directory of ``<key[:2]>/<key>.json`` files.

    Each file holds ``{"key": ..., "sha256": ..., "payload": ...}`` where the
    inner digest covers the canonical payload text; a mismatch, a key
    mismatch, or unparsable JSON is reported as a miss with a warning.
    """

    def __init__(self, root):
        self.root = Path(root)

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def get(self, key: str) -> CacheHit | None:
        path = self._path(key)
        try:
            raw = path.read_text()
        except FileNotFoundError:
            return None
        except OSError as exc:
            log.warning("cache entry %s unreadable (%s); treating as miss", key, exc)
            return None
        try:
            entry = json.loads(raw)
            text = canonical_json(entry["payload"])
            ok = entry.get("key") == key and entry.get("sha256") == hashlib.sha256(text.encode()).hexdigest()
        except (ValueError, KeyError, TypeError):
            ok = False
        if not ok:
            log.warning("cache entry %s is corrupt; treating as miss", key)
            return None
        return CacheHit(key, entry["payload"], text)

    def put(self, key: str, payload: dict) -> str:
        """Store ``payload`` atomically; returns its canonical text."""
        text = canonical_json(payload)
        entry = canonical_json({"key": key, "sha256": hashlib.sha256(text.encode()).hexdigest(), "payload": payload})
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{key[:8]}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(entry)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        except BaseException:
            try:
                os.unlink(tmp)
            except FileNotFoundError:
                pass
            raise
        return text


def cache_from_env(explicit=None) -> ResultCache | None:
    """Cache rooted at ``explicit`` or at $SPLITGAP_CACHE; None if neither is set."""
    root = explicit or os.environ.get(ENV_VAR)
    return ResultCache(root) if root else None
