"""Command-line entry point: serve, export, import, render-once."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .. import compositor, rasters
from ..scene import load_scene
from ..segmentation import AlphaChannel, BlurExtend, MattedFrame, matte_person
from .config import load_config


def _serve(args) -> int:
    import uvicorn

    from .api import create_app
    from .engine import Engine

    config = load_config(args.config)
    config = replace(config, mock_backends=args.mock_backends)
    if args.autosave:
        config = replace(config, autosave_dir=args.autosave)
    host, _, port = args.bind.partition(":")
    app = create_app(Engine(config), ui_dir=args.ui_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="info")
    return 0


def _export(args) -> int:
    import httpx

    resp = httpx.post(
        f"{args.server}/api/v1/sessions/{args.session_id}/export",
        json={"path": args.out},
        timeout=60.0,
    )
    resp.raise_for_status()
    print(resp.json()["path"])
    return 0


def _import(args) -> int:
    import httpx

    resp = httpx.post(
        f"{args.server}/api/v1/sessions/import", json={"path": args.bundle}, timeout=60.0
    )
    resp.raise_for_status()
    print(resp.json()["session_id"])
    return 0


def _render_once(args) -> int:
    """Headless render: scene file in, PNG out.

    Feed frames are read from --frames/<feed_id>.png; feeds without a
    frame are skipped.
    """
    scene = load_scene(args.scene)
    frames: dict[str, MattedFrame] = {}
    kept = []
    frame_dir = Path(args.frames) if args.frames else None
    for feed in scene.feeds:
        file = frame_dir / f"{feed.feed_id}.png" if frame_dir else None
        if file is None or not file.exists():
            continue
        frame = rasters.decode_image(file.read_bytes())
        if frame.ndim == 3 and frame.shape[2] == 4:
            frames[feed.feed_id] = matte_person(frame, AlphaChannel(), BlurExtend())
        else:
            rgb = rasters.ensure_rgb(frame)
            import numpy as np

            frames[feed.feed_id] = MattedFrame(
                color=rgb,
                person_alpha=np.zeros(rgb.shape[:2], dtype=np.uint8),
                background=rgb,
            )
        kept.append(feed)
    scene = replace(scene, feeds=tuple(kept))
    out = compositor.render_live(scene, frames)
    Path(args.out).write_bytes(rasters.encode_png(out))
    print(args.out)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="scenemeld")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the session service")
    serve.add_argument("--bind", default="127.0.0.1:8000", help="host:port")
    serve.add_argument("--config", default=None, help="YAML config file")
    serve.add_argument(
        "--mock-backends",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="use deterministic in-process generation/LLM/segmentation backends",
    )
    serve.add_argument("--autosave", default=None, help="autosave bundle directory")
    serve.add_argument("--ui-dir", default=None, help="serve the operator console from this directory at /ui")
    serve.set_defaults(func=_serve)

    export = sub.add_parser("export", help="export a session bundle via a running server")
    export.add_argument("--server", default="http://127.0.0.1:8000")
    export.add_argument("session_id")
    export.add_argument("out")
    export.set_defaults(func=_export)

    imp = sub.add_parser("import", help="import a session bundle via a running server")
    imp.add_argument("--server", default="http://127.0.0.1:8000")
    imp.add_argument("bundle")
    imp.set_defaults(func=_import)

    render = sub.add_parser("render-once", help="headless render: scene file in, PNG out")
    render.add_argument("scene")
    render.add_argument("out")
    render.add_argument("--frames", default=None, help="directory of <feed_id>.png frames")
    render.set_defaults(func=_render_once)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
