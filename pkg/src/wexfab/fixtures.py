"""On-disk store of recorded HTTP exchanges for deterministic offline runs.

Layout: a directory holding `index.json` plus body files.  The index maps
"METHOD url" keys (URL in normalized form) to the recorded status, ordered
headers, and the body file path relative to the store root.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import urlsplit, urlunsplit

DEFAULT_PORTS = {"http": "80", "https": "443"}


def normalize_url(url: str) -> str:
    """Lowercase scheme and host, drop default ports, default the path to /.

    Query strings are kept byte-for-byte (pair order matters to servers).
    """
    parts = urlsplit(url)
    scheme = parts.scheme.lower()
    host = parts.hostname.lower() if parts.hostname else ""
    port = parts.port
    netloc = host
    if port is not None and str(port) != DEFAULT_PORTS.get(scheme):
        netloc = f"{host}:{port}"
    path = parts.path or "/"
    return urlunsplit((scheme, netloc, path, parts.query, ""))


@dataclass(frozen=True)
class FixtureEntry:
    status: int
    headers: tuple[tuple[str, str], ...]
    body: bytes


class FixtureMissing(KeyError):
    pass


class FixtureStore:
    """Read-only view of a recorded exchange directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        index_path = self.root / "index.json"
        with open(index_path, encoding="utf-8") as fh:
            self._index = json.load(fh)

    def lookup(self, method: str, url: str) -> FixtureEntry:
        key = f"{method.upper()} {normalize_url(url)}"
        try:
            entry = self._index[key]
        except KeyError:
            raise FixtureMissing(key) from None
        body = b""
        if entry.get("body"):
            body = (self.root / entry["body"]).read_bytes()
        headers = tuple((k, str(v)) for k, v in entry.get("headers", {}).items())
        return FixtureEntry(status=int(entry["status"]), headers=headers, body=body)

    def __contains__(self, key: tuple[str, str]) -> bool:
        method, url = key
        return f"{method.upper()} {normalize_url(url)}" in self._index

    def keys(self) -> list[str]:
        return sorted(self._index)


def write_store(root: str | Path, entries: dict[str, dict]) -> None:
    """Write an index plus body files; used by tests and recording helpers.

    `entries` maps "METHOD url" to {status, headers, body(bytes)}; bodies are
    stored under files/NNN.bin and the URL is normalized into the index key.
    """
    root = Path(root)
    (root / "files").mkdir(parents=True, exist_ok=True)
    index = {}
    for i, (key, entry) in enumerate(entries.items()):
        method, _, url = key.partition(" ")
        body_rel = ""
        if entry.get("body"):
            body_rel = f"files/{i:03d}.bin"
            (root / body_rel).write_bytes(entry["body"])
        index[f"{method.upper()} {normalize_url(url)}"] = {
            "status": entry.get("status", 200),
            "headers": dict(entry.get("headers", {})),
            "body": body_rel,
        }
    with open(root / "index.json", "w", encoding="utf-8") as fh:
        json.dump(index, fh, indent=2, ensure_ascii=False)
        fh.write("\n")
