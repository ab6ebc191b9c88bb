"""Placement transforms and automatic seating behind foreground objects.

Auto-layout is order-preserving and runs left to right: unplaced feeds
sorted by center-x pair with unoccupied objects sorted by anchor-x, so
assignments never cross. An assigned feed is scaled to 0.9x its object's
bbox width (aspect preserved) and dropped so its bottom edge sits on the
object's anchor, letting the object mask occlude the feed's lower edge in
the live render.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import NoObjects, StaleAssignment, UnknownFeed
from .scene import (
    MAX_FEED_EXTENT,
    MIN_FEED_EXTENT,
    FeedPlacement,
    NormRect,
    Scene,
)

# Assigned feed width relative to the occluding object's bbox width; < 1 so
# the object silhouette stays visible on both sides.
SEAT_WIDTH_RATIO = 0.9


def _clamped_factor(rect: NormRect, factor: float) -> float:
    """Largest-magnitude move toward `factor` keeping both extents in
    [MIN_FEED_EXTENT, MAX_FEED_EXTENT]; aspect is always preserved."""
    lo = MIN_FEED_EXTENT / min(rect.w, rect.h)
    hi = MAX_FEED_EXTENT / max(rect.w, rect.h)
    return min(max(factor, lo), hi)


def move_feed(scene: Scene, feed_id: str, new_center: tuple[float, float]) -> Scene:
    feed = scene.feed(feed_id)
    if feed is None:
        raise UnknownFeed(feed_id)
    cx = min(max(new_center[0], 0.0), 1.0)
    cy = min(max(new_center[1], 0.0), 1.0)
    rect = NormRect(cx, cy, feed.rect.w, feed.rect.h)
    return scene.with_feed(replace(feed, rect=rect))


def scale_feed(scene: Scene, feed_id: str, factor: float) -> Scene:
    if factor <= 0:
        raise ValueError(f"scale factor must be positive, got {factor}")
    feed = scene.feed(feed_id)
    if feed is None:
        raise UnknownFeed(feed_id)
    rect = feed.rect.scaled_about_center(_clamped_factor(feed.rect, factor))
    return scene.with_feed(replace(feed, rect=rect))


@dataclass(frozen=True)
class LayoutAssignment:
    """Computed feed-to-object seating; surplus feeds are reported, not placed."""

    pairs: tuple[tuple[str, str], ...]  # (feed_id, object_id)
    placements: dict[str, NormRect]  # feed_id -> computed rect
    unassigned: tuple[str, ...]


def _seated_rect(feed: FeedPlacement, obj_bbox: NormRect, anchor: tuple[float, float]) -> NormRect:
    aspect = feed.rect.h / feed.rect.w
    w = SEAT_WIDTH_RATIO * obj_bbox.w
    h = w * aspect
    ax, ay = anchor
    # bottom edge on the anchor so the body drops behind the object
    return NormRect(cx=ax, cy=ay - h / 2, w=w, h=h)


def auto_layout(scene: Scene) -> LayoutAssignment:
    """Pair unplaced feeds with unoccupied objects, left to right.

    Feeds already overlapping an object's bbox are considered placed and
    left alone. More feeds than objects leaves the surplus unassigned.
    """
    if not scene.foreground:
        raise NoObjects("scene has no foreground objects to seat feeds behind")

    candidates = [
        f
        for f in scene.feeds
        if not any(f.rect.intersects(o.bbox) for o in scene.foreground)
    ]
    candidates.sort(key=lambda f: f.rect.cx)
    objects = [o for o in scene.foreground if o.occupied_by is None]
    objects.sort(key=lambda o: o.anchor[0])

    pairs = []
    placements = {}
    for feed, obj in zip(candidates, objects):
        pairs.append((feed.feed_id, obj.object_id))
        placements[feed.feed_id] = _seated_rect(feed, obj.bbox, obj.anchor)
    unassigned = tuple(f.feed_id for f in candidates[len(objects):])
    return LayoutAssignment(pairs=tuple(pairs), placements=placements, unassigned=unassigned)


def apply_assignment(scene: Scene, assignment: LayoutAssignment) -> Scene:
    """Install computed placements and mark objects occupied. Idempotent."""
    object_ids = {o.object_id for o in scene.foreground}
    feed_ids = {f.feed_id for f in scene.feeds}
    for feed_id, object_id in assignment.pairs:
        if object_id not in object_ids:
            raise StaleAssignment(f"object {object_id!r} no longer in scene")
        if feed_id not in feed_ids:
            raise StaleAssignment(f"feed {feed_id!r} no longer in scene")

    out = scene
    assigned = dict(assignment.pairs)
    for feed_id, object_id in assignment.pairs:
        feed = out.feed(feed_id)
        rect = assignment.placements[feed_id]
        rect = rect.scaled_about_center(_clamped_factor(rect, 1.0))
        out = out.with_feed(replace(feed, rect=rect))
    foreground = tuple(
        replace(o, occupied_by=next((f for f, ob in assigned.items() if ob == o.object_id), o.occupied_by))
        for o in out.foreground
    )
    return replace(out, foreground=foreground)
