import socket
import threading
import time

import jsonschema
import numpy as np
import pytest

from conftest import small_canvas
from scenemeld import rasters
from scenemeld.errors import (
    BackendRejected,
    BackendUnreachable,
    DegenerateOutline,
    DimensionMismatch,
    NothingToGenerate,
)
from scenemeld.generation import (
    ADAPTER_SCHEMA,
    BackendProfile,
    ControlKind,
    ControlUnit,
    EditKind,
    GenerationJob,
    HttpBackend,
    JobMode,
    JobRunner,
    JobStatus,
    MockBackend,
    create_mock_backend_app,
    denoising_for_strength,
    job_to_payload,
    mock_generate,
    plan_img2img_job,
    plan_inpaint_job,
    plan_region_edit,
)
from scenemeld.prompting import ExpandedPrompt, PromptStudio, default_mock_llm
from scenemeld.scene import FeedPlacement, NormRect, Scene, SceneMode

PROFILE = BackendProfile()


def tiny_scene(seed=42, strength=0.5, environment=None):
    return Scene(
        canvas=small_canvas(16, 16),
        seed=seed,
        prompt_strength=strength,
        environment=environment,
        mode=SceneMode.CANVAS_IMG2IMG if environment is not None else SceneMode.WEBCAM_INPAINT,
    )


def gen_sized(scene, value=0):
    gh, gw = scene.canvas.gen_height_px, scene.canvas.gen_width_px
    return np.full((gh, gw, 3), value, dtype=np.uint8)


def some_prompt():
    return PromptStudio(llm=default_mock_llm()).expand("brainstorming session", "mushroom forest")


def low_preservation_input(scene):
    """Init + mask with small preserve islands, most pixels generating."""
    init = gen_sized(scene, 90)
    mask = np.full(init.shape[:2], 255, dtype=np.uint8)
    mask[10:20, 10:20] = 0
    mask[40:50, 70:90] = 0
    return init, mask


class TestPlanners:
    def test_inpaint_plan(self):
        scene = tiny_scene(seed=42)
        job = plan_inpaint_job(scene, low_preservation_input(scene), some_prompt())
        assert job.mode is JobMode.INPAINT
        assert job.denoising_strength == 1.0
        assert [u.kind for u in job.control_units] == [ControlKind.INPAINT_CONTROL]
        assert job.seed == 42
        assert (job.mask == 255).sum() > (job.mask == 0).sum()

    def test_inpaint_all_preserved_rejected(self):
        scene = tiny_scene()
        init = gen_sized(scene)
        mask = np.zeros(init.shape[:2], dtype=np.uint8)
        with pytest.raises(NothingToGenerate):
            plan_inpaint_job(scene, (init, mask), some_prompt())

    def test_random_seed_drawn_and_recorded(self):
        scene = tiny_scene(seed="random")
        job = plan_inpaint_job(scene, low_preservation_input(scene), some_prompt())
        assert isinstance(job.seed, int) and 0 <= job.seed < 2**63

    @pytest.mark.parametrize("strength,expected", [(0.0, 0.3), (0.5, 0.6), (1.0, 0.9)])
    def test_img2img_denoising_endpoints(self, strength, expected):
        scene = tiny_scene(strength=strength)
        job = plan_img2img_job(scene, gen_sized(scene), some_prompt())
        assert job.denoising_strength == pytest.approx(expected)

    def test_denoising_map_affine_monotone(self):
        values = [denoising_for_strength(s / 10) for s in range(11)]
        diffs = [b - a for a, b in zip(values, values[1:])]
        assert all(d == pytest.approx(diffs[0]) for d in diffs)
        assert all(d > 0 for d in diffs)

    def test_img2img_controls_and_no_mask(self):
        scene = tiny_scene()
        job = plan_img2img_job(scene, gen_sized(scene), some_prompt())
        assert {u.kind for u in job.control_units} == {ControlKind.DEPTH, ControlKind.CANNY}
        assert all(u.weight == 1.0 for u in job.control_units)
        assert job.mask is None

    def test_img2img_dimension_mismatch(self):
        scene = tiny_scene()
        with pytest.raises(DimensionMismatch):
            plan_img2img_job(scene, np.zeros((36, 64, 3), dtype=np.uint8), some_prompt())

    def test_region_edit_add(self):
        env = np.full((16, 16, 4), 120, dtype=np.uint8)
        scene = tiny_scene(environment=env)
        outline = [(0.1, 0.2), (0.5, 0.25), (0.45, 0.6), (0.12, 0.55)]
        job = plan_region_edit(scene, outline, "bookshelf", EditKind.ADD)
        assert job.mode is JobMode.REGION_EDIT
        assert job.region.phrase == "bookshelf"
        assert job.prompt.assembled == "bookshelf"
        assert job.denoising_strength == 1.0
        assert job.control_units == ()
        assert job.region.bbox.w == pytest.approx(0.4)
        assert job.region.bbox.h == pytest.approx(0.4)
        assert (job.mask == 255).any() and (job.mask == 0).any()

    def test_region_edit_remove_empty_phrase(self):
        env = np.full((16, 16, 4), 120, dtype=np.uint8)
        scene = tiny_scene(environment=env)
        outline = [(0.1, 0.1), (0.6, 0.1), (0.6, 0.6), (0.1, 0.6)]
        job = plan_region_edit(scene, outline, "warped chair", EditKind.REMOVE)
        assert job.region.phrase == ""
        assert job.prompt.assembled == ""

    def test_region_edit_two_points_degenerate(self):
        env = np.full((16, 16, 4), 120, dtype=np.uint8)
        scene = tiny_scene(environment=env)
        with pytest.raises(DegenerateOutline):
            plan_region_edit(scene, [(0.1, 0.1), (0.2, 0.2)], "x", EditKind.ADD)

    def test_region_edit_tiny_bbox_degenerate(self):
        env = np.full((16, 16, 4), 120, dtype=np.uint8)
        scene = tiny_scene(environment=env)
        outline = [(0.5, 0.5), (0.52, 0.5), (0.52, 0.52), (0.5, 0.52)]
        with pytest.raises(DegenerateOutline):
            plan_region_edit(scene, outline, "x", EditKind.ADD)

    def test_region_edit_requires_environment(self):
        scene = tiny_scene()
        with pytest.raises(DegenerateOutline):
            plan_region_edit(scene, [(0, 0), (1, 0), (1, 1)], "x", EditKind.ADD)


class TestPayload:
    def test_payload_fields_and_schema(self):
        scene = tiny_scene(seed=7)
        job = plan_inpaint_job(scene, low_preservation_input(scene), some_prompt())
        payload = job_to_payload(job, PROFILE)
        jsonschema.validate(payload, ADAPTER_SCHEMA)
        assert payload["prompt"] == job.prompt.assembled
        assert payload["negative_prompt"] == job.negative_prompt
        assert payload["seed"] == 7
        assert payload["cfg_scale"] == 7.0
        assert payload["denoising_strength"] == 1.0
        assert payload["width"] == scene.canvas.gen_width_px
        assert payload["height"] == scene.canvas.gen_height_px
        assert payload["override_settings"]["sd_model_checkpoint"] == PROFILE.model_checkpoint_inpaint
        units = payload["alwayson_scripts"]["controlnet"]["args"]
        assert [u["module"] for u in units] == ["inpaint"]

    def test_img2img_payload_uses_base_checkpoint(self):
        scene = tiny_scene()
        job = plan_img2img_job(scene, gen_sized(scene), some_prompt())
        payload = job_to_payload(job, PROFILE)
        jsonschema.validate(payload, ADAPTER_SCHEMA)
        assert payload["override_settings"]["sd_model_checkpoint"] == PROFILE.model_checkpoint_base
        assert sorted(u["module"] for u in payload["alwayson_scripts"]["controlnet"]["args"]) == [
            "canny",
            "depth",
        ]
        assert payload["mask"] is None

    def test_region_payload_carries_grounding_block(self):
        env = np.full((16, 16, 4), 120, dtype=np.uint8)
        scene = tiny_scene(environment=env)
        outline = [(0.1, 0.2), (0.5, 0.25), (0.45, 0.6), (0.12, 0.55)]
        job = plan_region_edit(scene, outline, "bookshelf", EditKind.ADD)
        payload = job_to_payload(job, PROFILE)
        jsonschema.validate(payload, ADAPTER_SCHEMA)
        block = payload["alwayson_scripts"]["region_edit"]
        assert block["phrase"] == "bookshelf"
        assert block["kind"] == "add"
        x0, y0, x1, y1 = block["bbox"]
        assert x0 == pytest.approx(0.1) and x1 == pytest.approx(0.5)
        assert y0 == pytest.approx(0.2) and y1 == pytest.approx(0.6)

    def test_randomized_jobs_validate(self, rng):
        studio = PromptStudio(llm=None)
        scene = tiny_scene()
        for i in range(25):
            prompt = studio.expand(f"activity {i}", f"theme {rng.integers(1000)}")
            mode = int(rng.integers(0, 3))
            scene_i = Scene(
                canvas=scene.canvas,
                seed=int(rng.integers(0, 2**63)),
                prompt_strength=float(rng.uniform(0, 1)),
                environment=np.full((16, 16, 4), int(rng.integers(0, 255)), dtype=np.uint8),
                mode=SceneMode.CANVAS_IMG2IMG,
            )
            if mode == 0:
                init = gen_sized(scene_i, int(rng.integers(0, 255)))
                mask = (rng.integers(0, 2, size=init.shape[:2], dtype=np.uint8)) * 255
                if not mask.any():
                    mask[0, 0] = 255
                job = plan_inpaint_job(scene_i, (init, mask), prompt)
            elif mode == 1:
                job = plan_img2img_job(scene_i, gen_sized(scene_i), prompt)
            else:
                outline = [(0.1, 0.1), (0.9, 0.1), (0.9, 0.9), (0.1, 0.9)]
                job = plan_region_edit(scene_i, outline, "plant", EditKind.ADD)
            payload = job_to_payload(job, PROFILE)
            jsonschema.validate(payload, ADAPTER_SCHEMA)


class TestMockBackend:
    def test_deterministic(self):
        scene = tiny_scene(seed=5)
        job = plan_inpaint_job(scene, low_preservation_input(scene), some_prompt())
        a = mock_generate(job)
        b = mock_generate(job)
        assert np.array_equal(a, b)

    def test_preserved_pixels_copied_verbatim(self):
        scene = tiny_scene(seed=5)
        init, mask = low_preservation_input(scene)
        job = plan_inpaint_job(scene, (init, mask), some_prompt())
        out = mock_generate(job)
        keep = mask == 0
        assert np.array_equal(out[keep], init[keep])
        assert not np.array_equal(out[~keep], init[~keep])

    def test_seed_changes_pattern_not_preserved_region(self):
        scene = tiny_scene(seed=1)
        init, mask = low_preservation_input(scene)
        job1 = plan_inpaint_job(scene, (init, mask), some_prompt())
        job2 = plan_inpaint_job(tiny_scene(seed=2), (init, mask), some_prompt())
        out1, out2 = mock_generate(job1), mock_generate(job2)
        keep = mask == 0
        assert np.array_equal(out1[keep], out2[keep])
        assert rasters.raster_digest(out1) != rasters.raster_digest(out2)
        assert not np.array_equal(out1[~keep], out2[~keep])

    def test_prompt_changes_pattern(self):
        scene = tiny_scene(seed=9)
        init, mask = low_preservation_input(scene)
        job1 = plan_inpaint_job(scene, (init, mask), ExpandedPrompt.plain("a"))
        job2 = plan_inpaint_job(scene, (init, mask), ExpandedPrompt.plain("b"))
        assert not np.array_equal(mock_generate(job1), mock_generate(job2))

    def test_structure_guidance_follows_luminance(self):
        """With depth/canny conditioning, black init regions stay black."""
        scene = tiny_scene()
        prior = gen_sized(scene, 0)
        prior[:, prior.shape[1] // 2 :] = 255
        job = plan_img2img_job(scene, prior, some_prompt())
        out = mock_generate(job)
        left = out[:, : prior.shape[1] // 2]
        right = out[:, prior.shape[1] // 2 :]
        assert (left == 0).all()
        assert right.mean() > 64

    def test_mode_chaining_inpaint_then_img2img(self):
        from scenemeld.compositor import apply_generation_result

        scene = tiny_scene(seed=11)
        inpaint = plan_inpaint_job(scene, low_preservation_input(scene), some_prompt())
        blended = mock_generate(inpaint)
        with_env = apply_generation_result(
            Scene(canvas=scene.canvas, seed=3, mode=SceneMode.CANVAS_IMG2IMG), blended
        )
        prior = rasters.resize_bilinear(
            rasters.ensure_rgb(with_env.environment),
            scene.canvas.gen_width_px,
            scene.canvas.gen_height_px,
        )
        chained = plan_img2img_job(with_env, prior, some_prompt())
        out = mock_generate(chained)
        # modulation contract: output luminance is bounded by init luminance
        luma = rasters.luminance_u8(prior).astype(np.uint16)
        assert (out.astype(np.uint16) <= np.ceil(luma * 255 / 255)[:, :, None] + 0).all()


class SlowBackend:
    def __init__(self):
        self.release = threading.Event()
        self.inner = MockBackend()

    def generate(self, job):
        assert self.release.wait(10)
        return self.inner.generate(job)


class TestRunner:
    def test_submit_poll_done(self):
        scene = tiny_scene(seed=4)
        runner = JobRunner(MockBackend())
        job = plan_inpaint_job(scene, low_preservation_input(scene), some_prompt())
        job_id = runner.submit(job)
        finished = runner.wait(job_id)
        assert finished.status is JobStatus.DONE
        status, result = runner.poll(job_id)
        assert status is JobStatus.DONE and result is not None

    def test_latest_wins(self):
        backend = SlowBackend()
        runner = JobRunner(backend)
        scene = tiny_scene(seed=4)
        job1 = plan_inpaint_job(scene, low_preservation_input(scene), some_prompt())
        job2 = plan_inpaint_job(scene, low_preservation_input(scene), some_prompt())
        id1 = runner.submit(job1)
        id2 = runner.submit(job2)
        backend.release.set()
        assert runner.wait(id1).status is JobStatus.CANCELLED
        assert runner.wait(id2).status is JobStatus.DONE
        assert runner.poll(id1)[1] is None  # cancelled result dropped
        assert runner.active_job_id is None

    def test_terminal_callback_runs_before_wait_returns(self):
        seen = []
        runner = JobRunner(MockBackend())
        scene = tiny_scene(seed=4)
        job = plan_inpaint_job(scene, low_preservation_input(scene), some_prompt())
        runner.wait(runner.submit(job, on_terminal=lambda j: seen.append(j.status)))
        assert seen == [JobStatus.DONE]

    def test_failed_backend_marks_job(self):
        class Exploding:
            def generate(self, job):
                raise RuntimeError("boom")

        runner = JobRunner(Exploding())
        scene = tiny_scene(seed=4)
        job = plan_inpaint_job(scene, low_preservation_input(scene), some_prompt())
        finished = runner.wait(runner.submit(job))
        assert finished.status is JobStatus.FAILED
        assert "boom" in finished.error


def _free_port() -> int:
    s = socket.socket()
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    return port


@pytest.fixture(scope="module")
def mock_server_url():
    import uvicorn

    app = create_mock_backend_app()
    port = _free_port()
    server = uvicorn.Server(
        uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("mock backend server did not start")
        time.sleep(0.01)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


class TestHttpBackend:
    def test_loopback_matches_in_process_mock(self, mock_server_url):
        profile = BackendProfile(base_url=mock_server_url)
        backend = HttpBackend(profile)
        scene = tiny_scene(seed=21)
        job = plan_inpaint_job(scene, low_preservation_input(scene), some_prompt())
        via_http = backend.generate(job)
        in_process = mock_generate(job)
        assert np.array_equal(via_http, in_process)

    def test_rejected_payload(self, mock_server_url):
        profile = BackendProfile(base_url=mock_server_url)
        backend = HttpBackend(profile)
        scene = tiny_scene(seed=21)
        job = plan_inpaint_job(scene, low_preservation_input(scene), some_prompt())
        job.control_units = (ControlUnit(ControlKind.INPAINT_CONTROL, weight=5.0),)
        with pytest.raises(BackendRejected):
            backend.generate(job)

    def test_unreachable_after_retries(self):
        profile = BackendProfile(
            base_url=f"http://127.0.0.1:{_free_port()}", max_retries=2, timeout_s=2.0
        )
        backend = HttpBackend(profile)
        scene = tiny_scene(seed=21)
        job = plan_inpaint_job(scene, low_preservation_input(scene), some_prompt())
        with pytest.raises(BackendUnreachable) as err:
            backend.generate(job)
        assert err.value.attempts == 3
