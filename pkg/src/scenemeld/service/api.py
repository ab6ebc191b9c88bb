"""Versioned HTTP+JSON API plus the per-session WebSocket channel.

Commands POST to one endpoint and are serialized by the engine into a
single total order per session; the WebSocket stream broadcasts
{revision, changed-fields, active-job} events in that same order, so a
client's revision stream is gap-free. Fan-out never blocks command
processing: events go through per-subscriber asyncio queues fed with
call_soon_threadsafe.
"""

from __future__ import annotations

import asyncio
import io
from typing import Optional

from fastapi import Body, Depends, FastAPI, Header, HTTPException, Request, Response
from fastapi.websockets import WebSocket, WebSocketDisconnect

from .. import rasters
from ..errors import (
    BackendRejected,
    BackendUnreachable,
    CommandRejected,
    DecodeError,
    DegenerateOutline,
    DigestMismatch,
    EmptyPrompt,
    EmptyScene,
    MissingFrame,
    NoObjects,
    NothingToGenerate,
    SceneMeldError,
    SchemaVersionMismatch,
    StaleAssignment,
    UnknownFeed,
    UnknownSession,
)
from .engine import Engine

API_PREFIX = "/api/v1"

_STATUS_BY_ERROR = (
    (UnknownSession, 404),
    (UnknownFeed, 404),
    (DecodeError, 400),
    (EmptyPrompt, 422),
    (EmptyScene, 422),
    (MissingFrame, 409),
    (NothingToGenerate, 422),
    (DegenerateOutline, 422),
    (NoObjects, 422),
    (StaleAssignment, 409),
    (CommandRejected, 409),
    (SchemaVersionMismatch, 409),
    (DigestMismatch, 409),
    (BackendUnreachable, 502),
    (BackendRejected, 502),
)


def _http_status(exc: SceneMeldError) -> int:
    for kind, status in _STATUS_BY_ERROR:
        if isinstance(exc, kind):
            return status
    return 400


def create_app(engine: Engine, ui_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="scenemeld session service")
    app.state.engine = engine
    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    def check_token(x_session_token: Optional[str] = Header(default=None)):
        token = engine.config.session_token
        if token and x_session_token != token:
            raise HTTPException(status_code=401, detail="missing or invalid session token")

    guarded = [Depends(check_token)]

    @app.exception_handler(SceneMeldError)
    async def engine_error(request: Request, exc: SceneMeldError):
        from fastapi.responses import JSONResponse

        return JSONResponse(
            status_code=_http_status(exc),
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.post(f"{API_PREFIX}/sessions", dependencies=guarded)
    def create_session(overrides: dict = Body(default={})):
        session_id = engine.create_session(overrides)
        return {"session_id": session_id}

    @app.post(f"{API_PREFIX}/sessions/import", dependencies=guarded)
    def import_session(body: dict = Body(...)):
        session_id = engine.import_session(body["path"])
        return {"session_id": session_id}

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}", dependencies=guarded)
    def session_summary(session_id: str):
        return engine.session_summary(session_id)

    @app.post(f"{API_PREFIX}/sessions/{{session_id}}/join", dependencies=guarded)
    def join(session_id: str, body: dict = Body(...)):
        feed_id = engine.join(session_id, body.get("display_name", "guest"))
        return {"feed_id": feed_id}

    @app.post(
        f"{API_PREFIX}/sessions/{{session_id}}/feeds/{{feed_id}}/frames",
        dependencies=guarded,
    )
    async def ingest_frame(session_id: str, feed_id: str, request: Request):
        data = await request.body()
        return engine.ingest_frame(session_id, feed_id, data)

    @app.post(f"{API_PREFIX}/sessions/{{session_id}}/command", dependencies=guarded)
    def command(session_id: str, body: dict = Body(...)):
        wait = bool(body.pop("wait", False))
        issuer = body.pop("issuer", None)
        return engine.command(session_id, body, issuer=issuer, wait=wait)

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}/scene", dependencies=guarded)
    def scene(session_id: str):
        doc, revision = engine.scene_snapshot(session_id)
        return {"revision": revision, "scene": doc}

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}/history", dependencies=guarded)
    def history(session_id: str):
        return {"entries": engine.history_docs(session_id)}

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}/job", dependencies=guarded)
    def job(session_id: str):
        session = engine.get(session_id)
        with session.lock:
            return {
                "active": session.last_job_info if session.active_job_id else None,
                "last": session.last_job_info,
            }

    @app.get(
        f"{API_PREFIX}/sessions/{{session_id}}/rasters/{{digest}}", dependencies=guarded
    )
    def raster(session_id: str, digest: str):
        session = engine.get(session_id)
        try:
            arr = session.store.get("sha256:" + digest)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown raster")
        return Response(content=rasters.encode_png(arr), media_type="image/png")

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}/render", dependencies=guarded)
    def render(session_id: str):
        frame = engine.render(session_id)
        return Response(content=rasters.encode_png(frame), media_type="image/png")

    @app.get(
        f"{API_PREFIX}/sessions/{{session_id}}/feeds/{{feed_id}}/frame",
        dependencies=guarded,
    )
    def person_layer(session_id: str, feed_id: str):
        layer = engine.person_layer(session_id, feed_id)
        if layer is None:
            raise HTTPException(status_code=404, detail="no frame ingested yet")
        return Response(content=rasters.encode_png(layer), media_type="image/png")

    @app.get(
        f"{API_PREFIX}/sessions/{{session_id}}/objects/{{object_id}}",
        dependencies=guarded,
    )
    def object_cutout(session_id: str, object_id: str):
        cutout = engine.object_cutout(session_id, object_id)
        if cutout is None:
            raise HTTPException(status_code=404, detail="unknown foreground object")
        return Response(content=rasters.encode_png(cutout), media_type="image/png")

    @app.post(f"{API_PREFIX}/sessions/{{session_id}}/export", dependencies=guarded)
    def export(session_id: str, body: dict = Body(...)):
        path = engine.export_session(session_id, body["path"])
        return {"path": str(path)}

    @app.websocket(f"{API_PREFIX}/sessions/{{session_id}}/ws")
    async def websocket(ws: WebSocket, session_id: str):
        token = engine.config.session_token
        if token and ws.query_params.get("token") != token:
            await ws.close(code=4401)
            return
        try:
            session = engine.get(session_id)
        except UnknownSession:
            await ws.close(code=4404)
            return
        await ws.accept()
        queue: asyncio.Queue = asyncio.Queue()
        session.hub.subscribe(asyncio.get_running_loop(), queue)
        with session.lock:
            hello = {
                "type": "hello",
                "session_id": session_id,
                "revision": session.revision,
                "active_job": session.last_job_info if session.active_job_id else None,
            }
        try:
            await ws.send_json(hello)
            while True:
                message = await queue.get()
                await ws.send_json(message)
        except WebSocketDisconnect:
            pass
        finally:
            session.hub.unsubscribe(queue)

    return app
