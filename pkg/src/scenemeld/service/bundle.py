"""Session bundles: a directory with a versioned manifest, a
content-addressed raster store, and the full history log.

Layout:

    <bundle>/
      manifest.json          versioned manifest (history, participants)
      rasters/<digest>.png   every raster referenced anywhere

Rasters are verified against their digest on import; any tampered file
fails with DigestMismatch, and every history entry's scene digest is
recomputed and must match the recorded value.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from .. import rasters
from ..errors import DigestMismatch, SchemaVersionMismatch
from ..scene import scene_digest, scene_from_doc
from .config import EngineConfig
from .engine import RASTER_REF_PREFIX, HistoryEntry, Participant, Session

BUNDLE_SCHEMA = "scenemeld/bundle@1"


def _collect_refs(value) -> set[str]:
    refs = set()
    if isinstance(value, str) and value.startswith(RASTER_REF_PREFIX):
        refs.add(value)
    elif isinstance(value, dict):
        for v in value.values():
            refs |= _collect_refs(v)
    elif isinstance(value, (list, tuple)):
        for v in value:
            refs |= _collect_refs(v)
    return refs


def export_session(session: Session, path: Path) -> Path:
    path = Path(path)
    raster_dir = path / "rasters"
    raster_dir.mkdir(parents=True, exist_ok=True)

    participants = []
    refs: set[str] = set()
    for p in session.participants.values():
        with p.lock:
            frozen = p.frozen
            latest = p.latest
        doc = {
            "feed_id": p.feed_id,
            "display_name": p.display_name,
            "manually_placed": p.manually_placed,
            "frozen": session.store.ref(frozen) if frozen is not None else None,
            "latest": session.store.ref(latest) if latest is not None else None,
        }
        participants.append(doc)
        refs |= _collect_refs(doc)

    history_docs = [e.to_doc() for e in session.history]
    refs |= _collect_refs(history_docs)

    for ref in sorted(refs):
        digest = ref.removeprefix(RASTER_REF_PREFIX)
        target = raster_dir / f"{digest}.png"
        if not target.exists():
            target.write_bytes(rasters.encode_png(session.store.get(ref)))

    manifest = {
        "schema": BUNDLE_SCHEMA,
        "session_id": session.session_id,
        "revision": session.revision,
        "feed_counter": session.feed_counter,
        "participants": participants,
        "history": history_docs,
    }
    (path / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return path


def _load_raster(path: Path, ref: str) -> np.ndarray:
    digest = ref.removeprefix(RASTER_REF_PREFIX)
    file = path / "rasters" / f"{digest}.png"
    if not file.exists():
        raise DigestMismatch(str(file))
    arr = rasters.decode_image(file.read_bytes())
    if rasters.raster_digest(arr) != digest:
        raise DigestMismatch(str(file))
    return arr


def import_session(path: Path, config: EngineConfig) -> Session:
    path = Path(path)
    manifest = json.loads((path / "manifest.json").read_text(encoding="utf-8"))
    if manifest.get("schema") != BUNDLE_SCHEMA:
        raise SchemaVersionMismatch(str(manifest.get("schema")), BUNDLE_SCHEMA)

    history = [HistoryEntry.from_doc(doc) for doc in manifest["history"]]
    if not history:
        raise SchemaVersionMismatch("empty history", BUNDLE_SCHEMA)

    # preload every referenced raster, verifying content digests
    store_cache: dict[str, np.ndarray] = {}

    def get(ref: str) -> np.ndarray:
        if ref not in store_cache:
            store_cache[ref] = _load_raster(path, ref)
        return store_cache[ref]

    last = history[-1]
    scene = scene_from_doc(last.scene_doc, get)

    session = Session(manifest["session_id"], config, scene)
    session.history = history
    session.feed_counter = manifest.get("feed_counter", 0)

    for entry in history:
        restored = scene_from_doc(entry.scene_doc, get)
        if scene_digest(restored) != entry.scene_digest:
            raise DigestMismatch(f"history[{entry.index}] scene digest")
        for ref in sorted(_collect_refs(entry.to_doc())):
            get(ref)

    for doc in manifest["participants"]:
        participant = Participant(
            feed_id=doc["feed_id"],
            display_name=doc["display_name"],
            manually_placed=doc.get("manually_placed", False),
        )
        if doc.get("frozen"):
            participant.frozen = get(doc["frozen"])
        if doc.get("latest"):
            participant.latest = get(doc["latest"])
        session.participants[doc["feed_id"]] = participant

    for ref, arr in store_cache.items():
        session.store.ref(arr)

    return session
