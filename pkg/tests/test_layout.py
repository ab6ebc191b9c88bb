import numpy as np
import pytest

from conftest import random_fg_object, small_canvas
from scenemeld.errors import NoObjects, StaleAssignment, UnknownFeed
from scenemeld.layout import (
    SEAT_WIDTH_RATIO,
    apply_assignment,
    auto_layout,
    move_feed,
    scale_feed,
)
from scenemeld.scene import (
    FeedPlacement,
    ForegroundObject,
    NormRect,
    Scene,
    from_pixels,
    scene_digest,
)


def scene_with_feeds(*rects, canvas=None):
    canvas = canvas or small_canvas(64, 36)
    feeds = tuple(
        FeedPlacement(f"feed-{i}", rect, z_rank=i) for i, rect in enumerate(rects)
    )
    return Scene(canvas=canvas, feeds=feeds)


def add_objects(scene, *boxes):
    """boxes: (x0, y0, w, h) in pixels on the scene canvas."""
    canvas = scene.canvas
    env = np.zeros((canvas.height_px, canvas.width_px, 4), dtype=np.uint8)
    env[:, :, 3] = 255
    objects = []
    for i, (x0, y0, w, h) in enumerate(boxes):
        mask = np.zeros((canvas.height_px, canvas.width_px), dtype=np.uint8)
        mask[y0:y0 + h, x0:x0 + w] = 255
        bbox = from_pixels((x0, y0, w, h), canvas.width_px, canvas.height_px)
        anchor = (bbox.cx, bbox.cy - bbox.h / 2 + 0.33 * bbox.h)
        objects.append(ForegroundObject(f"obj-{i}", "chair", mask, bbox, anchor))
    from dataclasses import replace

    return replace(scene, environment=env, foreground=tuple(objects))


class TestDirectManipulation:
    def test_scale_up_then_down_is_identity(self):
        scene = scene_with_feeds(NormRect(0.5, 0.5, 0.31, 0.17))
        out = scale_feed(scale_feed(scene, "feed-0", 2.0), "feed-0", 0.5)
        assert out.feeds[0].rect == scene.feeds[0].rect

    def test_move_centers(self):
        scene = scene_with_feeds(NormRect(0.2, 0.2, 0.3, 0.3))
        out = move_feed(scene, "feed-0", (0.5, 0.5))
        assert (out.feeds[0].rect.cx, out.feeds[0].rect.cy) == (0.5, 0.5)
        assert (out.feeds[0].rect.w, out.feeds[0].rect.h) == (0.3, 0.3)

    def test_move_clamps_center_into_canvas(self):
        scene = scene_with_feeds(NormRect(0.5, 0.5, 0.3, 0.3))
        out = move_feed(scene, "feed-0", (1.7, -0.4))
        assert (out.feeds[0].rect.cx, out.feeds[0].rect.cy) == (1.0, 0.0)

    def test_huge_scale_clamps_at_max_with_aspect(self):
        scene = scene_with_feeds(NormRect(0.5, 0.5, 0.4, 0.3))
        out = scale_feed(scene, "feed-0", 1000.0)
        rect = out.feeds[0].rect
        assert rect.w == pytest.approx(2.0)
        assert rect.h / rect.w == pytest.approx(0.3 / 0.4)

    def test_tiny_scale_clamps_at_min(self):
        scene = scene_with_feeds(NormRect(0.5, 0.5, 0.4, 0.3))
        rect = scale_feed(scene, "feed-0", 1e-9).feeds[0].rect
        assert min(rect.w, rect.h) == pytest.approx(0.02)

    def test_unknown_feed(self):
        scene = scene_with_feeds(NormRect(0.5, 0.5, 0.3, 0.3))
        with pytest.raises(UnknownFeed):
            move_feed(scene, "nope", (0.5, 0.5))
        with pytest.raises(UnknownFeed):
            scale_feed(scene, "nope", 2.0)

    def test_scene_snapshot_not_mutated(self):
        scene = scene_with_feeds(NormRect(0.2, 0.2, 0.3, 0.3))
        move_feed(scene, "feed-0", (0.9, 0.9))
        assert scene.feeds[0].rect.cx == 0.2


class TestAutoLayout:
    def test_single_feed_single_chair_formula(self):
        scene = scene_with_feeds(NormRect(0.5, 0.2, 0.2, 0.15))
        scene = add_objects(scene, (24, 20, 16, 12))
        assignment = auto_layout(scene)
        assert assignment.pairs == (("feed-0", "obj-0"),)
        obj = scene.foreground[0]
        rect = assignment.placements["feed-0"]
        assert rect.w == pytest.approx(SEAT_WIDTH_RATIO * obj.bbox.w)
        assert rect.h / rect.w == pytest.approx(0.15 / 0.2)
        assert rect.cx == pytest.approx(obj.anchor[0])
        assert rect.cy + rect.h / 2 == pytest.approx(obj.anchor[1])

    def test_left_right_order_preserved(self):
        scene = scene_with_feeds(
            NormRect(0.2, 0.2, 0.2, 0.15), NormRect(0.8, 0.2, 0.2, 0.15)
        )
        scene = add_objects(scene, (8, 20, 12, 12), (44, 20, 12, 12))
        assignment = auto_layout(scene)
        assert assignment.pairs == (("feed-0", "obj-0"), ("feed-1", "obj-1"))

    def test_surplus_feeds_reported(self):
        scene = scene_with_feeds(
            NormRect(0.15, 0.2, 0.15, 0.1),
            NormRect(0.5, 0.2, 0.15, 0.1),
            NormRect(0.85, 0.2, 0.15, 0.1),
        )
        scene = add_objects(scene, (8, 22, 12, 10), (44, 22, 12, 10))
        assignment = auto_layout(scene)
        assert len(assignment.pairs) == 2
        assert len(assignment.unassigned) == 1

    def test_no_objects(self):
        scene = scene_with_feeds(NormRect(0.5, 0.5, 0.3, 0.3))
        with pytest.raises(NoObjects):
            auto_layout(scene)

    def test_occupied_objects_skipped(self):
        from dataclasses import replace

        scene = scene_with_feeds(NormRect(0.2, 0.2, 0.2, 0.15))
        scene = add_objects(scene, (8, 20, 12, 12), (44, 20, 12, 12))
        taken = replace(scene.foreground[0], occupied_by="someone")
        scene = replace(scene, foreground=(taken, scene.foreground[1]))
        assignment = auto_layout(scene)
        assert assignment.pairs == (("feed-0", "obj-1"),)

    def test_feeds_overlapping_objects_left_alone(self):
        # feed-0 sits on top of obj-0 already; only feed-1 is seated
        scene = scene_with_feeds(
            NormRect(0.25, 0.65, 0.3, 0.3), NormRect(0.8, 0.2, 0.2, 0.15)
        )
        scene = add_objects(scene, (8, 20, 16, 12), (44, 20, 12, 12))
        assignment = auto_layout(scene)
        assert ("feed-1", "obj-0") in assignment.pairs or ("feed-1", "obj-1") in assignment.pairs
        assert all(fid != "feed-0" for fid, _ in assignment.pairs)

    def test_order_preservation_property(self, rng):
        for _ in range(100):
            n_feeds = int(rng.integers(1, 5))
            n_objects = int(rng.integers(1, 5))
            feeds = tuple(
                FeedPlacement(
                    f"feed-{i}",
                    NormRect(float(rng.uniform(0.05, 0.95)), 0.15,
                             float(rng.uniform(0.05, 0.2)), 0.1),
                    z_rank=i,
                )
                for i in range(n_feeds)
            )
            scene = Scene(canvas=small_canvas(64, 36), feeds=feeds)
            boxes = []
            for i in range(n_objects):
                x0 = int(rng.integers(0, 50))
                y0 = int(rng.integers(20, 28))
                boxes.append((x0, y0, int(rng.integers(4, 14)), int(rng.integers(4, 8))))
            scene = add_objects(scene, *boxes)
            assignment = auto_layout(scene)
            anchors = {o.object_id: o.anchor[0] for o in scene.foreground}
            centers = {f.feed_id: f.rect.cx for f in scene.feeds}
            for (fa, oa) in assignment.pairs:
                for (fb, ob) in assignment.pairs:
                    if centers[fa] < centers[fb]:
                        assert anchors[oa] <= anchors[ob]


class TestApplyAssignment:
    def test_idempotent(self):
        scene = scene_with_feeds(NormRect(0.5, 0.2, 0.2, 0.15))
        scene = add_objects(scene, (24, 20, 16, 12))
        assignment = auto_layout(scene)
        once = apply_assignment(scene, assignment)
        twice = apply_assignment(once, assignment)
        assert scene_digest(once) == scene_digest(twice)
        assert once.foreground[0].occupied_by == "feed-0"

    def test_stale_after_objects_cleared(self):
        from dataclasses import replace

        scene = scene_with_feeds(NormRect(0.5, 0.2, 0.2, 0.15))
        scene = add_objects(scene, (24, 20, 16, 12))
        assignment = auto_layout(scene)
        cleared = replace(scene, foreground=())
        with pytest.raises(StaleAssignment):
            apply_assignment(cleared, assignment)

    def test_empty_assignment_is_noop(self):
        from scenemeld.layout import LayoutAssignment

        scene = scene_with_feeds(NormRect(0.5, 0.2, 0.2, 0.15))
        empty = LayoutAssignment(pairs=(), placements={}, unassigned=())
        assert scene_digest(apply_assignment(scene, empty)) == scene_digest(scene)

    def test_seated_feed_bottom_occluded_in_render(self, rng):
        """After assignment, the object cutout hides the feed's bottom edge."""
        from scenemeld.compositor import render_live
        from scenemeld.segmentation import MattedFrame

        scene = scene_with_feeds(NormRect(0.5, 0.2, 0.2, 0.15))
        scene = add_objects(scene, (24, 20, 16, 12))
        env = scene.environment.copy()
        env[:, :, 0] = 99  # distinctive environment color
        from dataclasses import replace

        scene = replace(scene, environment=env)
        assignment = auto_layout(scene)
        seated = apply_assignment(scene, assignment)

        person = np.full((10, 10, 3), 250, dtype=np.uint8)
        matte = MattedFrame(
            color=person,
            person_alpha=np.full((10, 10), 255, dtype=np.uint8),
            background=person,
        )
        out = render_live(seated, {"feed-0": matte})

        from scenemeld.scene import to_pixels_wh

        canvas = seated.canvas
        rect = seated.feeds[0].rect
        x, y, w, h = to_pixels_wh(rect, canvas.width_px, canvas.height_px)
        bottom_y = min(y + h - 1, canvas.height_px - 1)
        obj = seated.foreground[0]
        overlap = [
            (bottom_y, xx)
            for xx in range(max(x, 0), min(x + w, canvas.width_px))
            if obj.mask[bottom_y, xx] > 0
        ]
        assert overlap, "feed bottom row must intersect the object mask"
        for yy, xx in overlap:
            assert tuple(out[yy, xx, :3]) == (99, 0, 0)
