"""Flat-file persistence: one JSON document per stored file entry.

No database; the service is meant to run locally for small-scale dataset
creation. Writes are atomic (temp file + rename) and guarded by an optimistic
version counter, so a stale concurrent write raises
:class:`~llmberjack.errors.VersionConflict` instead of clobbering data.

Syntactically broken discussion uploads are kept verbatim in a quarantine
area so the normalization endpoint can repair them later; quarantined blobs
are not listed as regular files.
"""

from __future__ import annotations

import json
import os
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .errors import MalformedInput, VersionConflict

FILE_KINDS = ("discussion", "draft")


@dataclass
class FileEntry:
    file_id: str
    kind: str  # discussion | draft
    name: str
    created_at: str  # ISO-8601
    version: int = 0

    def to_dict(self) -> dict:
        return {
            "file_id": self.file_id,
            "kind": self.kind,
            "name": self.name,
            "created_at": self.created_at,
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FileEntry":
        return cls(
            file_id=data["file_id"],
            kind=data["kind"],
            name=data["name"],
            created_at=data["created_at"],
            version=int(data["version"]),
        )


class FileStore:
    def __init__(self, root: str | Path, clock: Callable[[], datetime] | None = None):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "quarantine").mkdir(exist_ok=True)
        self._clock = clock if clock is not None else (lambda: datetime.now(timezone.utc))

    def _path(self, file_id: str) -> Path:
        if not file_id or "/" in file_id or file_id.startswith("."):
            raise MalformedInput(f"bad file id {file_id!r}")
        return self.root / f"{file_id}.json"

    def _write(self, path: Path, payload: dict) -> None:
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2), "utf-8")
        os.replace(tmp, path)

    def put(self, kind: str, name: str, document: dict, file_id: str | None = None) -> FileEntry:
        if kind not in FILE_KINDS:
            raise MalformedInput(f"unknown file kind {kind!r}")
        entry = FileEntry(
            file_id=file_id if file_id is not None else uuid.uuid4().hex,
            kind=kind,
            name=name,
            created_at=self._clock().isoformat(),
            version=0,
        )
        self._write(self._path(entry.file_id), {"entry": entry.to_dict(), "document": document})
        return entry

    def get(self, file_id: str) -> tuple[FileEntry, dict] | None:
        path = self._path(file_id)
        if not path.exists():
            return None
        payload = json.loads(path.read_text("utf-8"))
        return FileEntry.from_dict(payload["entry"]), payload["document"]

    def update(
        self, file_id: str, document: dict, expected_version: int | None = None
    ) -> FileEntry:
        existing = self.get(file_id)
        if existing is None:
            raise KeyError(file_id)
        entry, _ = existing
        if expected_version is not None and expected_version != entry.version:
            raise VersionConflict(expected=entry.version, got=expected_version)
        entry.version += 1
        self._write(self._path(file_id), {"entry": entry.to_dict(), "document": document})
        return entry

    def delete(self, file_id: str) -> bool:
        path = self._path(file_id)
        if not path.exists():
            return False
        path.unlink()
        return True

    def list_entries(self, kind: str | None = None) -> list[FileEntry]:
        entries = []
        for path in sorted(self.root.glob("*.json")):
            payload = json.loads(path.read_text("utf-8"))
            entry = FileEntry.from_dict(payload["entry"])
            if kind is None or entry.kind == kind:
                entries.append(entry)
        return entries

    # --- quarantine for unparseable discussion uploads ----------------------

    def quarantine(self, raw: str) -> str:
        blob_id = uuid.uuid4().hex
        (self.root / "quarantine" / f"{blob_id}.txt").write_text(raw, "utf-8")
        return blob_id

    def quarantined(self, blob_id: str) -> str | None:
        if not blob_id or "/" in blob_id or blob_id.startswith("."):
            return None
        path = self.root / "quarantine" / f"{blob_id}.txt"
        return path.read_text("utf-8") if path.exists() else None
