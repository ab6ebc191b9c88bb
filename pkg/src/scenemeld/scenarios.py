"""Scripted end-to-end sessions demonstrating the composition techniques.

Three scenarios run against the deterministic mock backends:

* design_brainstorming: three feeds (two people plus a task-space camera),
  direct manipulation, webcam-mode blending, then a region edit.
* remote_education: canvas mode over an uploaded room prior, restyled as a
  library; automatic layout seats students behind detected furniture; a
  second prior is restyled for the large-group discussion.
* storytime: webcam-mode blend, two canvas-mode restyles chained on top,
  then history replay to iterate on an earlier scene.

Each runner returns a summary with the session id and history digests, so
callers (tests, scripts) can assert replayability.
"""

from __future__ import annotations

from pathlib import Path

from . import fixtures, rasters
from .service.engine import Engine


def _ingest(engine: Engine, session_id: str, feed_id: str, frame) -> None:
    engine.ingest_frame(session_id, feed_id, rasters.encode_png(frame))


def _summary(engine: Engine, session_id: str) -> dict:
    session = engine.get(session_id)
    with session.lock:
        return {
            "session_id": session_id,
            "revision": session.revision,
            "history_digests": [e.scene_digest for e in session.history],
            "labels": [e.label for e in session.history],
        }


def _save_render(engine: Engine, session_id: str, out_dir, name: str):
    if out_dir is None:
        return
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    frame = engine.render(session_id)
    (out_dir / name).write_bytes(rasters.encode_png(frame))


def run_design_brainstorming(engine: Engine, out_dir=None) -> dict:
    sid = engine.create_session({"seed": 7001})
    ava = engine.join(sid, "Ava")
    ben = engine.join(sid, "Ben")
    desk = engine.join(sid, "Desk camera")

    _ingest(engine, sid, ava, fixtures.person_frame(person_color=(200, 80, 60)))
    _ingest(engine, sid, ben, fixtures.person_frame(person_color=(70, 140, 90),
                                                    bg_start=(90, 50, 50), bg_end=(220, 190, 170)))
    _ingest(engine, sid, desk, fixtures.plain_frame())

    # render the notebook camera large and central
    engine.command(sid, {"type": "Move", "feed_id": desk, "cx": 0.5, "cy": 0.62})
    engine.command(sid, {"type": "Scale", "feed_id": desk, "factor": 1.5})
    engine.command(sid, {"type": "SetPreservation", "feed_id": desk, "value": 1.0})
    engine.command(sid, {"type": "SetPreservation", "feed_id": ava, "value": 0.6})
    engine.command(sid, {"type": "SetPreservation", "feed_id": ben, "value": 0.6})

    engine.command(sid, {"type": "SetPrompts", "activity": "brainstorming", "theme": ""})
    engine.command(sid, {"type": "Generate"}, issuer="Ava", wait=True)
    _save_render(engine, sid, out_dir, "brainstorming_blended.png")

    # add a whiteboard on the empty wall, upper-left
    outline = [(0.05, 0.10), (0.30, 0.08), (0.32, 0.38), (0.06, 0.40)]
    engine.command(
        sid,
        {"type": "RegionEdit", "outline": outline, "phrase": "whiteboard", "kind": "add"},
        issuer="Ben",
        wait=True,
    )
    _save_render(engine, sid, out_dir, "brainstorming_whiteboard.png")
    return _summary(engine, sid)


def run_remote_education(engine: Engine, out_dir=None) -> dict:
    sid = engine.create_session({"seed": 7002})
    prof = engine.join(sid, "Professor")
    s1 = engine.join(sid, "Student 1")
    s2 = engine.join(sid, "Student 2")
    for feed, color in ((prof, (180, 60, 60)), (s1, (60, 160, 80)), (s2, (70, 90, 180))):
        _ingest(engine, sid, feed, fixtures.person_frame(person_color=color))

    canvas = engine.get(sid).scene.canvas
    room = fixtures.furniture_room(canvas.width_px, canvas.height_px)

    engine.command(sid, {"type": "SetMode", "mode": "canvas_img2img"})
    engine.command(sid, {"type": "UploadPrior", "image": rasters.encode_png(room)})
    engine.command(sid, {"type": "SetPrompts", "activity": "", "theme": "library"})
    engine.command(sid, {"type": "Generate"}, issuer="Professor", wait=True)
    _save_render(engine, sid, out_dir, "education_library.png")

    layout_result = engine.command(sid, {"type": "AutoLayout"}, issuer="Professor")
    # spotlight a speaking student via the scaling metaphor
    engine.command(sid, {"type": "Scale", "feed_id": s1, "factor": 1.3})
    _save_render(engine, sid, out_dir, "education_seated.png")

    conference = fixtures.conference_room(canvas.width_px, canvas.height_px)
    engine.command(sid, {"type": "UploadPrior", "image": rasters.encode_png(conference)})
    engine.command(sid, {"type": "Generate"}, issuer="Professor", wait=True)
    _save_render(engine, sid, out_dir, "education_conference.png")

    summary = _summary(engine, sid)
    summary["auto_layout"] = layout_result
    return summary


def run_storytime(engine: Engine, out_dir=None) -> dict:
    sid = engine.create_session({"seed": 7003})
    grandma = engine.join(sid, "Grandma")
    kid = engine.join(sid, "Nora")
    _ingest(engine, sid, grandma, fixtures.person_frame(person_color=(150, 90, 160)))
    _ingest(engine, sid, kid, fixtures.person_frame(person_color=(230, 170, 60),
                                                    bg_start=(60, 80, 40), bg_end=(210, 230, 180)))

    engine.command(sid, {"type": "SetPrompts", "activity": "storytelling", "theme": ""})
    engine.command(sid, {"type": "Generate"}, issuer="Grandma", wait=True)
    castle_revision = engine.get(sid).revision
    _save_render(engine, sid, out_dir, "storytime_castle.png")

    engine.command(sid, {"type": "SetMode", "mode": "canvas_img2img"})
    engine.command(sid, {"type": "SetPrompts", "activity": "", "theme": "magic castle, ballroom"})
    engine.command(sid, {"type": "Generate"}, issuer="Grandma", wait=True)
    _save_render(engine, sid, out_dir, "storytime_ballroom.png")

    engine.command(sid, {"type": "SetPrompts", "activity": "", "theme": "mushroom forest"})
    engine.command(sid, {"type": "Generate"}, issuer="Grandma", wait=True)
    _save_render(engine, sid, out_dir, "storytime_forest.png")

    # weeks later: replay the castle scene and iterate on it for the sequel
    engine.command(sid, {"type": "LoadHistory", "index": castle_revision}, issuer="Nora")
    engine.command(sid, {"type": "SetMode", "mode": "canvas_img2img"})
    engine.command(sid, {"type": "SetPrompts", "activity": "", "theme": "mushroom forest"})
    engine.command(sid, {"type": "SetSeed", "seed": 7004})
    engine.command(sid, {"type": "Generate"}, issuer="Nora", wait=True)
    _save_render(engine, sid, out_dir, "storytime_sequel.png")
    return _summary(engine, sid)


SCENARIOS = {
    "brainstorming": run_design_brainstorming,
    "education": run_remote_education,
    "storytime": run_storytime,
}
