"""Content-addressed store for scenarios, sweeps, fit reports, and traces.

Artifacts are immutable blobs keyed by their sha256 digest and stored
under <root>/objects/<digest[:2]>/<digest>; an index records each blob's
kind, and a separate name table maps human-assigned names to digests.
Writes go through a temp file and rename, so a crashed writer never
leaves a partial object behind.  Reads re-hash the blob and refuse to
return corrupted content.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

ARTIFACT_KINDS = ("scenario", "config", "sweep", "trace", "fit")


class RepoError(RuntimeError):
    pass


class UnknownDigestError(KeyError):
    def __init__(self, digest: str):
        super().__init__(digest)
        self.digest = digest


class IntegrityError(RepoError):
    def __init__(self, digest: str, actual: str):
        super().__init__(f"object {digest} hashes to {actual}; store is corrupt")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class ArtifactInfo:
    digest: str
    kind: str
    size: int
    names: tuple[str, ...] = ()


class Repository:
    def __init__(self, root):
        self.root = Path(root)
        (self.root / "objects").mkdir(parents=True, exist_ok=True)

    @property
    def _index_path(self) -> Path:
        return self.root / "index.json"

    @property
    def _names_path(self) -> Path:
        return self.root / "names.json"

    def _read_json(self, path: Path) -> dict:
        if not path.exists():
            return {}
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)

    def _write_json_atomic(self, path: Path, obj: dict) -> None:
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                json.dump(obj, f, sort_keys=True, indent=1)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def _object_path(self, digest: str) -> Path:
        return self.root / "objects" / digest[:2] / digest

    def put_bytes(self, data: bytes, kind: str, name: str | None = None) -> str:
        if kind not in ARTIFACT_KINDS:
            raise RepoError(f"unknown artifact kind {kind!r}")
        digest = sha256_hex(data)
        path = self._object_path(digest)
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
            try:
                with os.fdopen(fd, "wb") as f:
                    f.write(data)
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
        index = self._read_json(self._index_path)
        entry = {"kind": kind, "size": len(data)}
        if digest in index and index[digest] != entry:
            raise RepoError(f"digest {digest} already stored as {index[digest]}")
        if index.get(digest) != entry:
            index[digest] = entry
            self._write_json_atomic(self._index_path, index)
        if name:
            self.assign_name(name, digest)
        return digest

    def put_text(self, text: str, kind: str, name: str | None = None) -> str:
        return self.put_bytes(text.encode("utf-8"), kind, name)

    def get_bytes(self, digest: str) -> bytes:
        path = self._object_path(digest)
        if not path.exists():
            raise UnknownDigestError(digest)
        data = path.read_bytes()
        actual = sha256_hex(data)
        if actual != digest:
            raise IntegrityError(digest, actual)
        return data

    def get_text(self, digest: str) -> str:
        return self.get_bytes(digest).decode("utf-8")

    def info(self, digest: str) -> ArtifactInfo:
        index = self._read_json(self._index_path)
        if digest not in index:
            raise UnknownDigestError(digest)
        names = tuple(sorted(n for n, d in self._read_json(self._names_path).items()
                             if d == digest))
        e = index[digest]
        return ArtifactInfo(digest=digest, kind=e["kind"], size=e["size"], names=names)

    def assign_name(self, name: str, digest: str) -> None:
        index = self._read_json(self._index_path)
        if digest not in index:
            raise UnknownDigestError(digest)
        names = self._read_json(self._names_path)
        names[name] = digest
        self._write_json_atomic(self._names_path, names)

    def resolve(self, name_or_digest: str) -> str:
        """Accept either a full digest or an assigned name."""
        index = self._read_json(self._index_path)
        if name_or_digest in index:
            return name_or_digest
        names = self._read_json(self._names_path)
        if name_or_digest in names:
            return names[name_or_digest]
        raise UnknownDigestError(name_or_digest)

    def list(self, kind: str | None = None) -> list[ArtifactInfo]:
        index = self._read_json(self._index_path)
        names = self._read_json(self._names_path)
        by_digest: dict[str, list[str]] = {}
        for n, d in names.items():
            by_digest.setdefault(d, []).append(n)
        out = []
        for digest in sorted(index):
            e = index[digest]
            if kind is not None and e["kind"] != kind:
                continue
            out.append(ArtifactInfo(digest=digest, kind=e["kind"], size=e["size"],
                                    names=tuple(sorted(by_digest.get(digest, ())))))
        return out
