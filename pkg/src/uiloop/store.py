"""Content-addressed blob store, session event logs, and the judge-call cache.

On-disk layout under one root directory:

    blobs/<first2>/<hash>     raw bytes, filename = sha256 of content
    sessions/<id>.jsonl       append-only event log, one JSON event per line
    cache/<keyhash>.json      cached judge verdicts

Blob writes are idempotent, so concurrent writers of identical bytes are
harmless. Session logs carry a per-line content hash for tamper detection.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

from PIL import Image

from .errors import BlobMissingError, CorruptLogError, PreconditionError, UnknownSessionError

MEDIA_TYPES = ("png", "html", "json", "text")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class BlobRef:
    """Content-addressed handle to stored bytes."""

    hash: str
    media_type: str
    size_bytes: int

    def __post_init__(self):
        if self.media_type not in MEDIA_TYPES:
            raise PreconditionError(f"unknown media type: {self.media_type!r}")

    def to_dict(self) -> dict:
        return {"hash": self.hash, "media_type": self.media_type, "size_bytes": self.size_bytes}

    @staticmethod
    def from_dict(d: dict) -> "BlobRef":
        return BlobRef(hash=d["hash"], media_type=d["media_type"], size_bytes=d["size_bytes"])


@dataclass(frozen=True)
class ImageRef:
    """A stored screenshot plus its pixel dimensions."""

    hash: str
    size_bytes: int
    width_px: int
    height_px: int
    media_type: str = "png"

    @property
    def blob(self) -> BlobRef:
        return BlobRef(hash=self.hash, media_type=self.media_type, size_bytes=self.size_bytes)

    def to_dict(self) -> dict:
        return {
            "hash": self.hash,
            "size_bytes": self.size_bytes,
            "width_px": self.width_px,
            "height_px": self.height_px,
            "media_type": self.media_type,
        }

    @staticmethod
    def from_dict(d: dict) -> "ImageRef":
        return ImageRef(
            hash=d["hash"],
            size_bytes=d["size_bytes"],
            width_px=d["width_px"],
            height_px=d["height_px"],
            media_type=d.get("media_type", "png"),
        )


@dataclass(frozen=True)
class HtmlDocument:
    """Generated markup source plus its content hash."""

    source: str
    hash: str = ""

    def __post_init__(self):
        digest = sha256_hex(self.source.encode("utf-8"))
        if self.hash and self.hash != digest:
            raise PreconditionError("HtmlDocument hash does not match its source")
        object.__setattr__(self, "hash", digest)

    def to_dict(self) -> dict:
        return {"source": self.source, "hash": self.hash}

    @staticmethod
    def from_dict(d: dict) -> "HtmlDocument":
        return HtmlDocument(source=d["source"], hash=d.get("hash", ""))


@dataclass(frozen=True)
class CacheKey:
    """Identity of one judge call: template, ordered inputs, judge model."""

    template_id: str
    template_version: int
    input_hashes: tuple[str, ...]
    judge_model: str

    def digest(self) -> str:
        payload = json.dumps(
            {
                "template": f"{self.template_id}@{self.template_version}",
                "inputs": list(self.input_hashes),
                "judge": self.judge_model,
            },
            sort_keys=True,
        )
        return sha256_hex(payload.encode("utf-8"))


def _line_digest(event: dict) -> str:
    body = {k: v for k, v in event.items() if k != "line_sha"}
    return sha256_hex(json.dumps(body, sort_keys=True, ensure_ascii=False).encode("utf-8"))


class BlobStore:
    """Single-root persistence for blobs, session logs, and the verdict cache."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        for sub in ("blobs", "sessions", "cache"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._session_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    # -- blobs ------------------------------------------------------------

    def _blob_path(self, digest: str) -> Path:
        return self.root / "blobs" / digest[:2] / digest

    def put_blob(self, data: bytes, media_type: str) -> BlobRef:
        if not data:
            raise PreconditionError("refusing to store empty blob")
        digest = sha256_hex(data)
        path = self._blob_path(digest)
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp.%d" % threading.get_ident())
            tmp.write_bytes(data)
            os.replace(tmp, path)
        return BlobRef(hash=digest, media_type=media_type, size_bytes=len(data))

    def put_image(self, data: bytes) -> ImageRef:
        """Store PNG/JPEG bytes, recording decoded pixel dimensions."""
        try:
            with Image.open(io.BytesIO(data)) as im:
                width, height = im.size
        except Exception as exc:
            raise PreconditionError(f"not a decodable image: {exc}") from exc
        ref = self.put_blob(data, "png")
        return ImageRef(hash=ref.hash, size_bytes=ref.size_bytes, width_px=width, height_px=height)

    def put_html(self, doc: HtmlDocument) -> BlobRef:
        return self.put_blob(doc.source.encode("utf-8"), "html")

    def get_blob(self, digest: str) -> bytes:
        path = self._blob_path(digest)
        if not path.exists():
            raise BlobMissingError(f"no blob {digest}")
        return path.read_bytes()

    def has_blob(self, digest: str) -> bool:
        return self._blob_path(digest).exists()

    def sniff_media_type(self, digest: str) -> str:
        data = self.get_blob(digest)
        if data[:8] == b"\x89PNG\r\n\x1a\n":
            return "png"
        if data[:3] == b"\xff\xd8\xff":
            return "png"  # served as image either way
        head = data[:256].lstrip().lower()
        if head.startswith(b"<!doctype") or head.startswith(b"<html"):
            return "html"
        if head[:1] in (b"{", b"["):
            return "json"
        return "text"

    # -- session event logs -------------------------------------------------

    def _session_path(self, session_id: str) -> Path:
        return self.root / "sessions" / f"{session_id}.jsonl"

    def session_lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._session_locks.setdefault(session_id, threading.Lock())

    def session_exists(self, session_id: str) -> bool:
        return self._session_path(session_id).exists()

    def list_sessions(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "sessions").glob("*.jsonl"))

    def append_session_event(self, session_id: str, event: dict) -> None:
        event = dict(event)
        event["line_sha"] = _line_digest(event)
        line = json.dumps(event, sort_keys=True, ensure_ascii=False)
        with self.session_lock(session_id):
            with self._session_path(session_id).open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()

    def read_session_events(self, session_id: str) -> Iterator[dict]:
        path = self._session_path(session_id)
        if not path.exists():
            raise UnknownSessionError(f"no session {session_id}")
        with path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    event = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorruptLogError(f"{session_id}:{lineno}: not JSON: {exc}") from exc
                recorded = event.get("line_sha")
                if recorded != _line_digest(event):
                    raise CorruptLogError(f"{session_id}:{lineno}: line hash mismatch")
                yield event

    def save_session(self, session) -> None:
        """Persist any rounds of `session` not yet in its event log."""
        from .sessions import session_header_event, round_event  # circular at import time only

        existing = 0
        header_present = False
        if self.session_exists(session.id):
            for event in self.read_session_events(session.id):
                if event["kind"] == "session-created":
                    header_present = True
                elif event["kind"] == "round":
                    existing += 1
        if not header_present:
            self.append_session_event(session.id, session_header_event(session))
        for rnd in session.rounds[existing:]:
            self.append_session_event(session.id, round_event(rnd))

    def load_session(self, session_id: str):
        from .sessions import session_from_events

        events = list(self.read_session_events(session_id))
        return session_from_events(session_id, events)

    # -- judge-call cache ------------------------------------------------------

    def cache_path(self, key: CacheKey) -> Path:
        return self.root / "cache" / f"{key.digest()}.json"

    def cache_lookup(self, key: CacheKey) -> Optional[dict]:
        path = self.cache_path(key)
        if not path.exists():
            return None
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            return None  # cache is advisory; a bad entry is a miss

    def cache_put(self, key: CacheKey, verdict: dict) -> None:
        path = self.cache_path(key)
        tmp = path.with_suffix(".tmp.%d" % threading.get_ident())
        tmp.write_text(json.dumps(verdict, sort_keys=True, ensure_ascii=False), encoding="utf-8")
        os.replace(tmp, path)

    def prune_cache(self) -> int:
        removed = 0
        for p in (self.root / "cache").glob("*.json"):
            p.unlink()
            removed += 1
        return removed
