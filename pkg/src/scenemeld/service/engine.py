"""Multi-participant session engine: feeds, commands, generation, history.

Concurrency model: one lock per session serializes all scene-mutating
commands into a single total order (each command observes and produces a
distinct revision). Scene snapshots are immutable values, so readers never
lock. Frame ingestion touches only the per-feed participant mailbox, not
the command path. Generation runs on the job runner's worker thread; its
completion callback re-enters the session lock to apply the result and
append history.

Every scene-changing command appends one immutable HistoryEntry whose
scene document references rasters by content digest; loading history never
deletes entries (a load appends a new entry referencing the loaded index).
"""

from __future__ import annotations

import asyncio
import threading
import time
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from .. import compositor, layout, rasters
from ..errors import (
    CommandRejected,
    DecodeError,
    EmptyScene,
    MissingFrame,
    UnknownFeed,
    UnknownSession,
)
from ..generation.backends import HttpBackend, MockBackend
from ..generation.jobs import (
    EditKind,
    GenerationJob,
    JobStatus,
    plan_img2img_job,
    plan_inpaint_job,
    plan_region_edit,
)
from ..generation.runner import JobRunner
from ..prompting import HttpLlm, PromptStudio, default_mock_llm
from ..scene import (
    Canvas,
    FeedPlacement,
    NormRect,
    Scene,
    SceneMode,
    empty_scene,
    scene_digest,
    scene_from_doc,
    scene_to_doc,
    validate_scene,
)
from ..segmentation import (
    AlphaChannel,
    BlurExtend,
    ChromaKey,
    ExternalSegmenter,
    ExternalService,
    MattedFrame,
    MockSegmenter,
    VisionServiceProfile,
    extract_foreground,
    matte_person,
    segment_objects,
)
from .config import EngineConfig

MIN_FRAME_SIDE = 16
DEFAULT_FEED_EXTENT = 0.3

RASTER_REF_PREFIX = "sha256:"


class RasterStore:
    """Content-addressed in-memory raster store ("sha256:<hex>" refs)."""

    def __init__(self):
        self._data: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def ref(self, arr: np.ndarray) -> str:
        digest = rasters.raster_digest(arr)
        with self._lock:
            self._data.setdefault(digest, arr)
        return RASTER_REF_PREFIX + digest

    def get(self, ref: str) -> np.ndarray:
        digest = ref.removeprefix(RASTER_REF_PREFIX)
        with self._lock:
            return self._data[digest]

    def digests(self) -> list[str]:
        with self._lock:
            return list(self._data)


@dataclass
class HistoryEntry:
    index: int
    timestamp: float
    scene_doc: dict
    scene_digest: str
    label: str = ""
    issuer: Optional[str] = None
    loaded_from: Optional[int] = None
    job_record: Optional[dict] = None
    result_digest: Optional[str] = None

    def to_doc(self) -> dict:
        return {
            "index": self.index,
            "timestamp": self.timestamp,
            "scene": self.scene_doc,
            "scene_digest": self.scene_digest,
            "label": self.label,
            "issuer": self.issuer,
            "loaded_from": self.loaded_from,
            "job": self.job_record,
            "result_digest": self.result_digest,
        }

    @staticmethod
    def from_doc(doc: dict) -> "HistoryEntry":
        return HistoryEntry(
            index=doc["index"],
            timestamp=doc["timestamp"],
            scene_doc=doc["scene"],
            scene_digest=doc["scene_digest"],
            label=doc.get("label", ""),
            issuer=doc.get("issuer"),
            loaded_from=doc.get("loaded_from"),
            job_record=doc.get("job"),
            result_digest=doc.get("result_digest"),
        )


@dataclass
class Participant:
    feed_id: str
    display_name: str
    latest: Optional[np.ndarray] = None
    frozen: Optional[np.ndarray] = None
    manually_placed: bool = False
    lock: threading.Lock = field(default_factory=threading.Lock)


class BroadcastHub:
    """Fans events out to websocket subscribers without blocking commands."""

    def __init__(self):
        self._subscribers: list[tuple[asyncio.AbstractEventLoop, asyncio.Queue]] = []
        self._lock = threading.Lock()

    def subscribe(self, loop: asyncio.AbstractEventLoop, queue: asyncio.Queue):
        with self._lock:
            self._subscribers.append((loop, queue))

    def unsubscribe(self, queue: asyncio.Queue):
        with self._lock:
            self._subscribers = [(l, q) for l, q in self._subscribers if q is not queue]

    def publish(self, message: dict):
        with self._lock:
            targets = list(self._subscribers)
        for loop, queue in targets:
            try:
                loop.call_soon_threadsafe(queue.put_nowait, message)
            except RuntimeError:
                pass  # loop closed; subscriber will be dropped on unsubscribe


class Session:
    def __init__(self, session_id: str, config: EngineConfig, scene: Scene):
        self.session_id = session_id
        self.config = config
        self.lock = threading.RLock()
        self.scene = scene
        self.store = RasterStore()
        self.history: list[HistoryEntry] = []
        self.participants: dict[str, Participant] = {}
        self.active_job_id: Optional[str] = None
        self.last_job_info: Optional[dict] = None
        self.hub = BroadcastHub()
        self.matte_cache: dict[tuple[str, str], MattedFrame] = {}
        self.feed_counter = 0

    @property
    def revision(self) -> int:
        return len(self.history) - 1


def job_info(job: GenerationJob) -> dict:
    return {"job_id": job.job_id, "status": job.status.value, "mode": job.mode.value}


class Engine:
    """Owns sessions and the shared backend/LLM/segmentation adapters."""

    def __init__(self, config: EngineConfig | None = None):
        self.config = config or EngineConfig()
        if self.config.mock_backends:
            self.backend = MockBackend()
            self.prompt_studio = PromptStudio(llm=default_mock_llm())
            self.segmenter = MockSegmenter(synthesize=self.config.synthesize_segments)
        else:
            self.backend = HttpBackend(self.config.backend)
            llm = HttpLlm(self.config.llm) if self.config.llm else None
            self.prompt_studio = PromptStudio(llm=llm)
            if self.config.matting.service_url:
                self.segmenter = ExternalSegmenter(
                    VisionServiceProfile(self.config.matting.service_url)
                )
            else:
                self.segmenter = MockSegmenter(synthesize=self.config.synthesize_segments)
        self.runners: dict[str, JobRunner] = {}
        self.sessions: dict[str, Session] = {}
        self._segment_cache: dict[str, tuple] = {}
        self._lock = threading.Lock()

    # ---- session lifecycle ----

    def create_session(self, overrides: dict | None = None) -> str:
        overrides = overrides or {}
        canvas = self.config.canvas
        if "canvas" in overrides:
            canvas = Canvas(**overrides["canvas"])
        scene = empty_scene(canvas)
        if "seed" in overrides:
            scene = replace(scene, seed=overrides["seed"])
        session_id = uuid.uuid4().hex[:12]
        session = Session(session_id, self.config, scene)
        self._append_entry(session, scene, label="create")
        with self._lock:
            self.sessions[session_id] = session
            self.runners[session_id] = JobRunner(self.backend)
        return session_id

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSession(session_id)
        return session

    def join(self, session_id: str, display_name: str) -> str:
        session = self.get(session_id)
        with session.lock:
            session.feed_counter += 1
            feed_id = f"feed-{session.feed_counter}"
            session.participants[feed_id] = Participant(feed_id, display_name)
            placement = FeedPlacement(
                feed_id=feed_id,
                rect=NormRect(0.5, 0.5, DEFAULT_FEED_EXTENT, DEFAULT_FEED_EXTENT),
                z_rank=self._next_z_rank(session.scene),
                preservation=self.config.default_preservation,
            )
            scene = session.scene.with_feed(placement)
            scene = self._retile_defaults(session, scene)
            self._commit(session, scene, label=f"join:{feed_id}", issuer=display_name,
                         changed=["feeds"])
            return feed_id

    @staticmethod
    def _next_z_rank(scene: Scene) -> int:
        return max((f.z_rank for f in scene.feeds), default=-1) + 1

    def _retile_defaults(self, session: Session, scene: Scene) -> Scene:
        """Feeds never manually placed tile left-to-right at y-center."""
        n = len(scene.feeds)
        for i, feed in enumerate(scene.feeds):
            participant = session.participants.get(feed.feed_id)
            if participant is not None and participant.manually_placed:
                continue
            cx = 0.1 + 0.8 * (i + 0.5) / n
            scene = scene.with_feed(replace(feed, rect=replace(feed.rect, cx=cx, cy=0.5)))
        return scene

    # ---- frames ----

    def ingest_frame(self, session_id: str, feed_id: str, data: bytes) -> dict:
        session = self.get(session_id)
        participant = session.participants.get(feed_id)
        if participant is None:
            raise UnknownFeed(feed_id)
        frame = rasters.decode_image(data, min_side=MIN_FRAME_SIDE)
        digest = rasters.raster_digest(frame)
        with participant.lock:
            participant.latest = frame
            first = participant.frozen is None
            if first:
                participant.frozen = frame
            frozen_digest = rasters.raster_digest(participant.frozen)
        session.hub.publish({"type": "frame", "feed_id": feed_id, "digest": digest})
        return {
            "feed_id": feed_id,
            "digest": digest,
            "frozen_digest": frozen_digest,
            "first": first,
        }

    def _matte(self, session: Session, frame: np.ndarray) -> MattedFrame:
        cfg = self.config.matting
        key = (rasters.raster_digest(frame), cfg.method)
        cached = session.matte_cache.get(key)
        if cached is not None:
            return cached
        if cfg.method == "alpha":
            if frame.ndim == 3 and frame.shape[2] == 4:
                matte = matte_person(frame, AlphaChannel(), BlurExtend())
            else:
                # no alpha channel: the whole frame is background (e.g. a
                # desk or task-space camera with no person in it)
                rgb = rasters.ensure_rgb(frame)
                matte = MattedFrame(
                    color=rgb,
                    person_alpha=np.zeros(rgb.shape[:2], dtype=np.uint8),
                    background=rgb,
                )
        elif cfg.method == "chroma":
            matte = matte_person(frame, ChromaKey(cfg.key_color, cfg.tolerance), BlurExtend())
        elif cfg.method == "external":
            matte = matte_person(
                frame, ExternalService(VisionServiceProfile(cfg.service_url)), BlurExtend()
            )
        else:
            raise ValueError(f"unknown matting method {cfg.method!r}")
        session.matte_cache[key] = matte
        return matte

    def _frames_for_generation(self, session: Session) -> dict[str, MattedFrame]:
        frames = {}
        for feed in session.scene.feeds:
            participant = session.participants.get(feed.feed_id)
            with participant.lock:
                frozen = participant.frozen
            if frozen is None:
                raise MissingFrame(feed.feed_id)
            frames[feed.feed_id] = self._matte(session, frozen)
        return frames

    def frames_for_render(self, session: Session) -> tuple[Scene, dict[str, MattedFrame]]:
        """Latest (or frozen, when not live) frames; feeds without any
        ingested frame are dropped from the returned scene snapshot."""
        scene = session.scene
        frames = {}
        kept = []
        for feed in scene.feeds:
            participant = session.participants.get(feed.feed_id)
            with participant.lock:
                frame = participant.latest if feed.live else participant.frozen
            if frame is None:
                continue
            kept.append(feed)
            frames[feed.feed_id] = self._matte(session, frame)
        return replace(scene, feeds=tuple(kept)), frames

    def render(self, session_id: str) -> np.ndarray:
        session = self.get(session_id)
        with session.lock:
            scene, frames = self.frames_for_render(session)
        return compositor.render_live(scene, frames)

    # ---- history ----

    def _append_entry(
        self,
        session: Session,
        scene: Scene,
        label: str,
        issuer: Optional[str] = None,
        loaded_from: Optional[int] = None,
        job_record: Optional[dict] = None,
        result_digest: Optional[str] = None,
    ) -> HistoryEntry:
        doc = scene_to_doc(scene, session.store.ref)
        entry = HistoryEntry(
            index=len(session.history),
            timestamp=time.time(),
            scene_doc=doc,
            scene_digest=scene_digest(scene),
            label=label,
            issuer=issuer,
            loaded_from=loaded_from,
            job_record=job_record,
            result_digest=result_digest,
        )
        session.history.append(entry)
        return entry

    def _commit(
        self,
        session: Session,
        scene: Scene,
        label: str,
        issuer: Optional[str] = None,
        changed: Optional[list[str]] = None,
        loaded_from: Optional[int] = None,
        job_record: Optional[dict] = None,
        result_digest: Optional[str] = None,
    ) -> int:
        session.scene = scene
        self._append_entry(
            session,
            scene,
            label=label,
            issuer=issuer,
            loaded_from=loaded_from,
            job_record=job_record,
            result_digest=result_digest,
        )
        self._autosave(session)
        session.hub.publish(
            {
                "type": "revision",
                "revision": session.revision,
                "changed_fields": changed or [],
                "active_job": session.last_job_info if session.active_job_id else None,
            }
        )
        return session.revision

    def _autosave(self, session: Session):
        if self.config.autosave_dir:
            from .bundle import export_session

            export_session(session, Path(self.config.autosave_dir) / session.session_id)

    def history_docs(self, session_id: str) -> list[dict]:
        session = self.get(session_id)
        with session.lock:
            return [e.to_doc() for e in session.history]

    # ---- commands ----

    def command(
        self, session_id: str, cmd: dict, issuer: Optional[str] = None, wait: bool = False
    ) -> dict:
        session = self.get(session_id)
        kind = cmd.get("type")
        handler = self._handlers().get(kind)
        if handler is None:
            raise CommandRejected(f"unknown command type {kind!r}")
        with session.lock:
            response = handler(self, session, cmd, issuer)
        if wait and response.get("job_id"):
            runner = self.runners[session_id]
            job = runner.wait(response["job_id"])
            with session.lock:
                response = dict(response)
                response["job_status"] = job.status.value
                response["revision"] = session.revision
                if job.error:
                    response["job_error"] = job.error
        return response

    @staticmethod
    def _handlers() -> dict[str, Callable]:
        return {
            "SetPrompts": Engine._cmd_set_prompts,
            "SetPromptStrength": Engine._cmd_set_prompt_strength,
            "SetPreservation": Engine._cmd_set_preservation,
            "Move": Engine._cmd_move,
            "Scale": Engine._cmd_scale,
            "SetMode": Engine._cmd_set_mode,
            "SetSeed": Engine._cmd_set_seed,
            "UploadPrior": Engine._cmd_upload_prior,
            "Generate": Engine._cmd_generate,
            "RegionEdit": Engine._cmd_region_edit,
            "AutoLayout": Engine._cmd_auto_layout,
            "Undo": Engine._cmd_undo,
            "LoadHistory": Engine._cmd_load_history,
            "FreezeToggle": Engine._cmd_freeze_toggle,
        }

    def _cmd_set_prompts(self, session: Session, cmd: dict, issuer) -> dict:
        scene = replace(
            session.scene,
            activity_prompt=str(cmd.get("activity", "")),
            theme_prompt=str(cmd.get("theme", "")),
        )
        rev = self._commit(session, scene, "set_prompts", issuer,
                           changed=["activity_prompt", "theme_prompt"])
        return {"revision": rev}

    def _cmd_set_prompt_strength(self, session: Session, cmd: dict, issuer) -> dict:
        value = float(cmd["value"])
        if not 0.0 <= value <= 1.0:
            raise CommandRejected(f"prompt strength {value} outside [0,1]")
        scene = replace(session.scene, prompt_strength=value)
        rev = self._commit(session, scene, "set_prompt_strength", issuer,
                           changed=["prompt_strength"])
        return {"revision": rev}

    def _cmd_set_preservation(self, session: Session, cmd: dict, issuer) -> dict:
        value = float(cmd["value"])
        if not 0.0 <= value <= 1.0:
            raise CommandRejected(f"preservation {value} outside [0,1]")
        feed = session.scene.feed(cmd["feed_id"])
        if feed is None:
            raise UnknownFeed(cmd["feed_id"])
        scene = session.scene.with_feed(replace(feed, preservation=value))
        rev = self._commit(session, scene, "set_preservation", issuer, changed=["feeds"])
        return {"revision": rev}

    def _cmd_move(self, session: Session, cmd: dict, issuer) -> dict:
        scene = layout.move_feed(session.scene, cmd["feed_id"], (cmd["cx"], cmd["cy"]))
        self._mark_manual(session, cmd["feed_id"])
        rev = self._commit(session, scene, "move", issuer, changed=["feeds"])
        return {"revision": rev}

    def _cmd_scale(self, session: Session, cmd: dict, issuer) -> dict:
        scene = layout.scale_feed(session.scene, cmd["feed_id"], float(cmd["factor"]))
        self._mark_manual(session, cmd["feed_id"])
        rev = self._commit(session, scene, "scale", issuer, changed=["feeds"])
        return {"revision": rev}

    def _mark_manual(self, session: Session, feed_id: str):
        participant = session.participants.get(feed_id)
        if participant is not None:
            participant.manually_placed = True

    def _cmd_set_mode(self, session: Session, cmd: dict, issuer) -> dict:
        mode = SceneMode(cmd["mode"])
        scene = replace(session.scene, mode=mode)
        rev = self._commit(session, scene, "set_mode", issuer, changed=["mode"])
        return {"revision": rev}

    def _cmd_set_seed(self, session: Session, cmd: dict, issuer) -> dict:
        seed = cmd["seed"]
        if seed != "random":
            seed = int(seed)
        scene = replace(session.scene, seed=seed)
        rev = self._commit(session, scene, "set_seed", issuer, changed=["seed"])
        return {"revision": rev}

    def _cmd_upload_prior(self, session: Session, cmd: dict, issuer) -> dict:
        image = cmd["image"]
        if isinstance(image, (bytes, bytearray)):
            image = rasters.decode_image(bytes(image))
        elif isinstance(image, str):
            import base64

            image = rasters.decode_image(base64.b64decode(image))
        canvas = session.scene.canvas
        h, w = image.shape[:2]
        letterboxed = (w, h) != (canvas.width_px, canvas.height_px)
        if letterboxed:
            image = rasters.letterbox(image, canvas.width_px, canvas.height_px)
        env = rasters.ensure_rgba(image)
        scene = replace(session.scene, environment=env, foreground=())
        label = "upload_prior"
        if letterboxed:
            label += f" (letterboxed {w}x{h} to {canvas.width_px}x{canvas.height_px})"
        rev = self._commit(session, scene, label, issuer, changed=["environment", "foreground"])
        return {"revision": rev, "letterboxed": letterboxed}

    def _check_not_busy(self, session: Session):
        if session.active_job_id is not None:
            raise CommandRejected(f"generation {session.active_job_id} is already running")

    def _cmd_generate(self, session: Session, cmd: dict, issuer) -> dict:
        self._check_not_busy(session)
        scene = session.scene
        frames = self._frames_for_generation(session)
        prompt = self.prompt_studio.expand(scene.activity_prompt, scene.theme_prompt)
        init, mask = compositor.build_generation_input(scene, frames)
        if scene.mode is SceneMode.WEBCAM_INPAINT:
            job = plan_inpaint_job(scene, (init, mask), prompt)
        else:
            job = plan_img2img_job(scene, init, prompt)
            job.denoising_strength = (
                self.config.denoise_min + self.config.denoise_span * scene.prompt_strength
            )
        job.negative_prompt = self.config.negative_prompt
        return self._submit(session, job, issuer, label="generate")

    def _cmd_region_edit(self, session: Session, cmd: dict, issuer) -> dict:
        self._check_not_busy(session)
        outline = [(float(p[0]), float(p[1])) for p in cmd["outline"]]
        kind = EditKind(cmd.get("kind", "add"))
        job = plan_region_edit(session.scene, outline, cmd.get("phrase", ""), kind)
        job.negative_prompt = self.config.negative_prompt
        return self._submit(session, job, issuer, label="region_edit")

    def _submit(self, session: Session, job: GenerationJob, issuer, label: str) -> dict:
        session.active_job_id = job.job_id
        session.last_job_info = job_info(job)
        record = self._job_record(session, job)

        def on_terminal(finished: GenerationJob):
            self._on_job_terminal(session, finished, record, issuer, label)

        runner = self.runners[session.session_id]
        runner.submit(job, on_terminal)
        session.hub.publish({"type": "job", "job": job_info(job)})
        return {"revision": session.revision, "job_id": job.job_id}

    def _job_record(self, session: Session, job: GenerationJob) -> dict:
        prompt = job.prompt
        return {
            "job_id": job.job_id,
            "mode": job.mode.value,
            "prompt": {
                "base": prompt.base,
                "objects": list(prompt.objects),
                "characteristics": list(prompt.characteristics),
                "suffix": prompt.suffix,
                "assembled": prompt.assembled,
                "fallback": prompt.fallback,
            },
            "negative_prompt": job.negative_prompt,
            "denoising_strength": job.denoising_strength,
            "cfg_scale": job.cfg_scale,
            "seed": job.seed,
            "control_units": [
                {"kind": u.kind.value, "weight": u.weight, "input": u.input}
                for u in job.control_units
            ],
            "region": (
                {
                    "phrase": job.region.phrase,
                    "bbox": {
                        "cx": job.region.bbox.cx,
                        "cy": job.region.bbox.cy,
                        "w": job.region.bbox.w,
                        "h": job.region.bbox.h,
                    },
                    "kind": job.region.kind.value,
                }
                if job.region
                else None
            ),
            "init_digest": session.store.ref(job.init_image),
            "mask_digest": session.store.ref(job.mask) if job.mask is not None else None,
        }

    def _on_job_terminal(
        self, session: Session, job: GenerationJob, record: dict, issuer, label: str
    ):
        with session.lock:
            if session.active_job_id == job.job_id:
                session.active_job_id = None
            session.last_job_info = job_info(job)
            record = dict(record)
            record["status"] = job.status.value
            if job.status is JobStatus.DONE and job.result is not None:
                scene = compositor.apply_generation_result(session.scene, job.result)
                scene = self._resegment(scene)
                self._commit(
                    session,
                    scene,
                    label=label,
                    issuer=issuer,
                    changed=["environment", "foreground"],
                    job_record=record,
                    result_digest=session.store.ref(job.result),
                )
            else:
                session.hub.publish({"type": "job", "job": job_info(job)})

    def _resegment(self, scene: Scene) -> Scene:
        if scene.environment is None:
            return scene
        env = rasters.ensure_rgb(scene.environment)
        digest = rasters.raster_digest(env)
        objects = self._segment_cache.get(digest)
        if objects is None:
            seg = segment_objects(env, self.config.allowlist, self.segmenter)
            objects = tuple(extract_foreground(env, seg))
            self._segment_cache[digest] = objects
        return replace(scene, foreground=objects)

    def _cmd_auto_layout(self, session: Session, cmd: dict, issuer) -> dict:
        assignment = layout.auto_layout(session.scene)
        scene = layout.apply_assignment(session.scene, assignment)
        for feed_id, _ in assignment.pairs:
            self._mark_manual(session, feed_id)
        rev = self._commit(session, scene, "auto_layout", issuer, changed=["feeds", "foreground"])
        return {
            "revision": rev,
            "pairs": [list(p) for p in assignment.pairs],
            "unassigned": list(assignment.unassigned),
        }

    def _cmd_undo(self, session: Session, cmd: dict, issuer) -> dict:
        last = session.history[-1]
        base = last.loaded_from if last.loaded_from is not None else last.index
        if base <= 0:
            raise CommandRejected("nothing to undo")
        return self._load_index(session, base - 1, issuer, label="undo")

    def _cmd_load_history(self, session: Session, cmd: dict, issuer) -> dict:
        index = int(cmd["index"])
        if not 0 <= index < len(session.history):
            raise CommandRejected(f"history index {index} out of range")
        return self._load_index(session, index, issuer, label=f"load_history:{index}")

    def _load_index(self, session: Session, index: int, issuer, label: str) -> dict:
        entry = session.history[index]
        scene = scene_from_doc(entry.scene_doc, session.store.get)
        rev = self._commit(
            session,
            scene,
            label,
            issuer,
            changed=["scene"],
            loaded_from=index,
        )
        return {"revision": rev, "loaded_from": index}

    def _cmd_freeze_toggle(self, session: Session, cmd: dict, issuer) -> dict:
        feed = session.scene.feed(cmd["feed_id"])
        if feed is None:
            raise UnknownFeed(cmd["feed_id"])
        scene = session.scene.with_feed(replace(feed, live=not feed.live))
        rev = self._commit(session, scene, "freeze_toggle", issuer, changed=["feeds"])
        return {"revision": rev, "live": not feed.live}

    # ---- export / import ----

    def export_session(self, session_id: str, path: str | Path) -> Path:
        from .bundle import export_session

        session = self.get(session_id)
        with session.lock:
            return export_session(session, Path(path))

    def import_session(self, path: str | Path) -> str:
        from .bundle import import_session

        session = import_session(Path(path), self.config)
        with self._lock:
            self.sessions[session.session_id] = session
            self.runners[session.session_id] = JobRunner(self.backend)
        return session.session_id

    # ---- layer sources (consumed by the operator console) ----

    def person_layer(self, session_id: str, feed_id: str) -> Optional[np.ndarray]:
        """Latest (or frozen, when not live) frame as an RGBA person layer:
        color under the matting alpha. None when no frame has arrived."""
        session = self.get(session_id)
        feed = session.scene.feed(feed_id)
        participant = session.participants.get(feed_id)
        if participant is None:
            raise UnknownFeed(feed_id)
        with participant.lock:
            frame = participant.latest if feed is None or feed.live else participant.frozen
        if frame is None:
            return None
        matte = self._matte(session, frame)
        return np.dstack([matte.color, matte.person_alpha])

    def object_cutout(self, session_id: str, object_id: str) -> Optional[np.ndarray]:
        """Foreground object as an RGBA cutout of the environment raster."""
        session = self.get(session_id)
        with session.lock:
            scene = session.scene
            for obj in scene.foreground:
                if obj.object_id == object_id:
                    rgb = rasters.ensure_rgb(scene.environment)
                    alpha = np.where(obj.mask > 0, 255, 0).astype(np.uint8)
                    return np.dstack([rgb, alpha])
        return None

    # ---- introspection ----

    def scene_snapshot(self, session_id: str) -> tuple[dict, int]:
        session = self.get(session_id)
        with session.lock:
            return scene_to_doc(session.scene, session.store.ref), session.revision

    def session_summary(self, session_id: str) -> dict:
        session = self.get(session_id)
        with session.lock:
            return {
                "session_id": session.session_id,
                "revision": session.revision,
                "participants": [
                    {"feed_id": p.feed_id, "display_name": p.display_name}
                    for p in session.participants.values()
                ],
                "active_job": session.last_job_info if session.active_job_id else None,
                "violations": validate_scene(session.scene),
            }
