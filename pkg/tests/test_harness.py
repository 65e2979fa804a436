from __future__ import annotations

import json

import numpy as np
import pytest

from pipevis.demo import demo_noise_blend
from pipevis.errors import DimsMismatch, NoCanvas
from pipevis.harness import (
    CONFIG_NAME,
    OutputConfig,
    TestCase,
    compare_images,
    create_test,
    discover_tests,
    read_history,
    render_report,
    run_all,
    run_test,
)
from pipevis.network import ProcessorNetwork


# --- compare_images -----------------------------------------------------------------


def test_identical_images_pass():
    img = np.zeros((8, 8, 4), dtype=np.uint8)
    diff, passed = compare_images(img, img.copy(), 0.0, 0.0)
    assert passed and diff.diff_fraction == 0.0
    assert diff.max_channel_delta == 0.0


def test_three_pixel_example_boundary():
    ref = np.full((8, 8, 4), 100, dtype=np.uint8)
    img = ref.copy()
    for x in range(3):
        img[0, x, 0] = 120  # 20/255 change in one channel
    # direct per-pixel counting oracle
    count = 0
    for y in range(8):
        for x in range(8):
            if any(abs(int(img[y, x, c]) - int(ref[y, x, c])) / 255.0 > 0.01 for c in range(4)):
                count += 1
    assert count == 3

    diff, passed_004 = compare_images(img, ref, pixel_epsilon=0.01, fail_fraction=0.04)
    assert diff.diff_fraction == pytest.approx(3 / 64) == pytest.approx(0.046875)
    assert not passed_004
    _, passed_005 = compare_images(img, ref, pixel_epsilon=0.01, fail_fraction=0.05)
    assert passed_005


def test_epsilon_hides_small_deltas():
    ref = np.full((4, 4, 4), 100, dtype=np.uint8)
    img = ref.copy()
    img[0, 0, 0] = 102  # 2/255 ~ 0.0078
    diff, passed = compare_images(img, ref, pixel_epsilon=0.01, fail_fraction=0.0)
    assert passed and diff.diff_fraction == 0.0
    diff, passed = compare_images(img, ref, pixel_epsilon=0.0, fail_fraction=0.0)
    assert not passed and diff.diff_fraction == pytest.approx(1 / 16)


def test_mask_fraction_matches_exactly():
    rng = np.random.default_rng(3)
    ref = rng.integers(0, 256, size=(9, 7, 4), dtype=np.uint8)
    img = ref.copy()
    flips = {(1, 2), (5, 5), (8, 0), (0, 6)}
    for y, x in flips:
        img[y, x, 1] ^= 0xFF
    diff, _ = compare_images(img, ref, 0.0, 0.0)
    white = np.all(diff.mask_image[..., :3] == 255, axis=-1).sum()
    assert white / (9 * 7) == diff.diff_fraction


def test_threshold_monotonicity():
    ref = np.zeros((8, 8, 4), dtype=np.uint8)
    img = ref.copy()
    img[:2, :3, 2] = 50
    fractions = [i / 64 for i in range(0, 65, 4)]
    results = [compare_images(img, ref, 0.0, f)[1] for f in fractions]
    # once passing, stays passing as the allowance grows
    assert results == sorted(results)


def test_dims_mismatch_is_distinct():
    with pytest.raises(DimsMismatch):
        compare_images(np.zeros((8, 8, 4), np.uint8), np.zeros((4, 4, 4), np.uint8))


def test_diff_image_amplifies():
    ref = np.zeros((2, 2, 4), dtype=np.uint8)
    img = ref.copy()
    img[0, 0, 0] = 10
    diff, _ = compare_images(img, ref)
    assert diff.diff_image[0, 0, 0] == 80  # x8
    assert diff.diff_image[..., 3].min() == 255


# --- discovery -------------------------------------------------------------------------


def test_discover_orders_and_diagnoses(tmp_path, registry):
    for name in ("beta", "alpha"):
        net = demo_noise_blend(registry)
        create_test(net, tmp_path / name)
    (tmp_path / "broken").mkdir()
    (tmp_path / "broken" / "readme.txt").write_text("not a test")
    cases, diagnostics = discover_tests(tmp_path)
    assert [c.name for c in cases] == ["alpha", "beta"]
    assert len(diagnostics) == 1 and "broken" in diagnostics[0]


def test_discover_empty_root(tmp_path):
    cases, diagnostics = discover_tests(tmp_path)
    assert cases == [] and diagnostics == []


def test_discover_missing_root(tmp_path):
    cases, diagnostics = discover_tests(tmp_path / "nope")
    assert cases == [] and len(diagnostics) == 1


# --- create_test ---------------------------------------------------------------------------


def test_create_test_writes_everything(tmp_path, registry):
    net = demo_noise_blend(registry)
    case = create_test(net, tmp_path / "blend")
    assert set(case.references) == {"canvas"}
    assert (tmp_path / "blend" / "canvas.png").exists()
    assert (tmp_path / "blend" / CONFIG_NAME).exists()
    assert case.workspace_path.exists()


def test_create_test_two_canvases(tmp_path, registry):
    net = demo_noise_blend(registry)
    net.add_processor("Canvas", "canvas2")
    net.add_connection("blend", "image", "canvas2", "image")
    case = create_test(net, tmp_path / "double")
    assert set(case.references) == {"canvas", "canvas2"}


def test_create_test_requires_canvas(tmp_path, registry):
    net = ProcessorNetwork(registry=registry)
    net.add_processor("NoiseImage", "noise")
    with pytest.raises(NoCanvas):
        create_test(net, tmp_path / "x")


def test_created_test_self_passes(tmp_path, registry):
    net = demo_noise_blend(registry)
    case = create_test(net, tmp_path / "self")
    result = run_test(case, registry)
    assert result.passed, result.log
    assert all(c.diff.diff_fraction == 0.0 for c in result.outputs)


# --- run_test ---------------------------------------------------------------------------------


def test_script_step_changing_seed_fails(tmp_path, registry):
    net = demo_noise_blend(registry)
    case = create_test(net, tmp_path / "seeded")
    config = json.loads((case.directory / CONFIG_NAME).read_text())
    config["scriptSteps"] = [{"op": "set", "path": "noiseA.seed", "value": 999},
                             {"op": "evaluate"}]
    (case.directory / CONFIG_NAME).write_text(json.dumps(config))
    cases, _ = discover_tests(tmp_path)
    result = run_test(cases[0], registry)
    assert not result.passed
    assert result.outputs[0].diff.diff_fraction > 0.0

    # oracle: the two seeds really do give different canvases
    net_a = demo_noise_blend(registry)
    net_a.evaluate()
    net_b = demo_noise_blend(registry)
    net_b.set_property("noiseA.seed", 999)
    net_b.evaluate()
    from pipevis.stdlib import canvas_capture
    assert canvas_capture(net_a.processor("canvas")).color_array().tobytes() != \
        canvas_capture(net_b.processor("canvas")).color_array().tobytes()


def test_missing_class_fails_with_log(tmp_path, registry):
    net = demo_noise_blend(registry)
    case = create_test(net, tmp_path / "ghostly")
    registry.unload_module("base")
    result = run_test(case, registry)
    assert not result.passed
    assert any("UnknownProcessorClass" in line for line in result.log)


def test_run_never_raises_on_garbage(tmp_path, registry):
    bad = tmp_path / "garbage"
    bad.mkdir()
    (bad / "pipeline.workspace.json").write_text("{broken")
    (bad / "canvas.png").write_bytes(b"not a png")
    cases, _ = discover_tests(tmp_path)
    results = run_all(cases, registry)
    assert len(results) == 1 and not results[0].passed


def test_per_output_threshold_override(tmp_path, registry):
    net = demo_noise_blend(registry)
    case = create_test(net, tmp_path / "tuned")
    config = {"pixelEpsilon": 0.0, "failFraction": 0.0,
              "outputs": {"canvas": {"failFraction": 1.0}},
              "scriptSteps": [{"op": "set", "path": "noiseA.seed", "value": 5}]}
    (case.directory / CONFIG_NAME).write_text(json.dumps(config))
    cases, _ = discover_tests(tmp_path)
    result = run_test(cases[0], registry)
    assert result.passed  # full-diff allowance on that output


# --- report -----------------------------------------------------------------------------------


def make_results(tmp_path, registry) -> list:
    for i, name in enumerate(("one", "two", "three")):
        net = demo_noise_blend(registry)
        case = create_test(net, tmp_path / "suite" / name)
        if name == "two":
            config = json.loads((case.directory / CONFIG_NAME).read_text())
            config["scriptSteps"] = [{"op": "set", "path": "noiseB.seed", "value": 77}]
            (case.directory / CONFIG_NAME).write_text(json.dumps(config))
    cases, _ = discover_tests(tmp_path / "suite")
    return run_all(cases, registry)


def test_report_structure_and_history(tmp_path, registry):
    results = make_results(tmp_path, registry)
    out = tmp_path / "report"
    history = out / "history.jsonl"
    index = render_report(results, history, out)

    text = index.read_text(encoding="utf-8")
    assert "2/3 tests passed" in text
    failing_dir = out / "two"
    for suffix in ("out", "ref", "diff", "mask"):
        assert (failing_dir / f"canvas.{suffix}.png").exists()
    records = read_history(history)
    assert len(records) == 3
    assert {r["testName"] for r in records} == {"one", "three", "two"}

    # rerun appends, prior records untouched
    before = history.read_text()
    render_report(results, history, out)
    after = history.read_text()
    assert after.startswith(before)
    assert len(read_history(history)) == 6


def test_empty_report(tmp_path):
    index = render_report([], tmp_path / "history.jsonl", tmp_path)
    assert "0/0" in index.read_text()


def test_output_config_lookup():
    case = TestCase(name="x", directory=None, workspace_path=None,
                    config=OutputConfig(0.1, 0.2),
                    per_output={"c": OutputConfig(0.3, 0.4)})
    assert case.output_config("c").pixel_epsilon == 0.3
    assert case.output_config("other").fail_fraction == 0.2
