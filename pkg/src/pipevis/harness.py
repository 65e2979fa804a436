"""Pipeline regression testing: test cases, image comparison, HTML reports.

A test case is a directory holding a workspace, one reference PNG per canvas,
and an optional ``test.config.json`` with thresholds and scripted runtime
changes. References are generated once, when the test is created; reruns
compare freshly captured canvases against them with a per-channel epsilon and
a maximum differing-pixel fraction (both default 0).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from html import escape
from pathlib import Path
from typing import Optional

import numpy as np

from .datatypes import decode_png, encode_png, render_rgba8
from .errors import DimsMismatch, EvaluationFailure, NoCanvas, PipevisError, WriteFailure
from .network import ProcessorNetwork
from .stdlib import Canvas, canvas_capture
from .workspace import WORKSPACE_SUFFIX, load_workspace, save_workspace

CONFIG_NAME = "test.config.json"
DEFAULT_WORKSPACE_NAME = "pipeline" + WORKSPACE_SUFFIX
HISTORY_NAME = "history.jsonl"

DIFF_AMPLIFICATION = 8


@dataclass
class OutputConfig:
    pixel_epsilon: float = 0.0
    fail_fraction: float = 0.0


@dataclass
class TestCase:
    __test__ = False  # not a pytest class, despite the domain name

    name: str
    directory: Path
    workspace_path: Optional[Path]
    references: dict[str, Path] = field(default_factory=dict)
    config: OutputConfig = field(default_factory=OutputConfig)
    per_output: dict[str, OutputConfig] = field(default_factory=dict)
    script_steps: list[dict] = field(default_factory=list)
    load_error: Optional[str] = None

    def output_config(self, name: str) -> OutputConfig:
        return self.per_output.get(name, self.config)


@dataclass
class ImageDiff:
    diff_fraction: float
    max_channel_delta: float
    diff_image: np.ndarray   # amplified per-pixel |delta|, display aid only
    mask_image: np.ndarray   # white exactly where a pixel is above threshold


@dataclass
class OutputComparison:
    name: str
    passed: bool
    diff: Optional[ImageDiff] = None
    error: Optional[str] = None


@dataclass
class TestResult:
    __test__ = False

    name: str
    passed: bool
    outputs: list[OutputComparison] = field(default_factory=list)
    duration_ms: float = 0.0
    log: list[str] = field(default_factory=list)
    captured: dict[str, np.ndarray] = field(default_factory=dict)
    references: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def worst_diff_fraction(self) -> float:
        fractions = [c.diff.diff_fraction for c in self.outputs if c.diff is not None]
        if any(c.diff is None for c in self.outputs) or not fractions:
            return 1.0 if not self.passed else 0.0
        return max(fractions)


# --- comparison ------------------------------------------------------------------


def compare_images(img: np.ndarray, ref: np.ndarray, pixel_epsilon: float = 0.0,
                   fail_fraction: float = 0.0) -> tuple[ImageDiff, bool]:
    """Count pixels where any channel differs by more than ``pixel_epsilon``.

    Thresholds are normalized: a channel differs when |delta|/255 exceeds
    ``pixel_epsilon``. Passes when the differing-pixel fraction is at most
    ``fail_fraction``. Shape mismatch raises DimsMismatch (always a failure,
    reported distinctly).
    """
    if img.shape != ref.shape:
        raise DimsMismatch(f"image {img.shape} vs reference {ref.shape}")
    delta = np.abs(img.astype(np.int16) - ref.astype(np.int16)).astype(np.uint8)
    normalized = delta.astype(np.float64) / 255.0
    differing = (normalized > pixel_epsilon).any(axis=-1)
    total = differing.size
    diff_fraction = float(differing.sum()) / total if total else 0.0

    amplified = np.clip(delta.astype(np.int32) * DIFF_AMPLIFICATION, 0, 255).astype(np.uint8)
    amplified[..., 3] = 255
    mask = np.zeros_like(img)
    mask[differing] = (255, 255, 255, 255)
    mask[..., 3] = 255

    diff = ImageDiff(
        diff_fraction=diff_fraction,
        max_channel_delta=float(normalized.max()) if total else 0.0,
        diff_image=amplified,
        mask_image=mask,
    )
    return diff, diff_fraction <= fail_fraction


# --- discovery ----------------------------------------------------------------------


def _parse_config(case: TestCase, path: Path) -> None:
    raw = json.loads(path.read_text(encoding="utf-8"))
    case.config = OutputConfig(
        pixel_epsilon=float(raw.get("pixelEpsilon", 0.0)),
        fail_fraction=float(raw.get("failFraction", 0.0)),
    )
    for name, overrides in raw.get("outputs", {}).items():
        case.per_output[name] = OutputConfig(
            pixel_epsilon=float(overrides.get("pixelEpsilon", case.config.pixel_epsilon)),
            fail_fraction=float(overrides.get("failFraction", case.config.fail_fraction)),
        )
    steps = raw.get("scriptSteps", [])
    if not isinstance(steps, list):
        raise ValueError("scriptSteps must be a list")
    case.script_steps = steps


def discover_tests(root: str | Path) -> tuple[list[TestCase], list[str]]:
    """Each subdirectory holding a workspace file becomes a test case.

    Returns (cases in deterministic name order, diagnostics for malformed
    directories). Broken configs still yield a case; it fails at run time
    with the parse error in its log.
    """
    root = Path(root)
    cases: list[TestCase] = []
    diagnostics: list[str] = []
    if not root.is_dir():
        return cases, [f"test root {root} does not exist"]
    for entry in sorted(root.iterdir(), key=lambda p: p.name):
        if not entry.is_dir():
            continue
        workspaces = sorted(entry.glob("*" + WORKSPACE_SUFFIX))
        if not workspaces:
            diagnostics.append(f"{entry.name}: no *{WORKSPACE_SUFFIX} file, skipped")
            continue
        case = TestCase(name=entry.name, directory=entry, workspace_path=workspaces[0])
        for png in sorted(entry.glob("*.png")):
            case.references[png.stem] = png
        config_path = entry / CONFIG_NAME
        if config_path.exists():
            try:
                _parse_config(case, config_path)
            except (ValueError, json.JSONDecodeError) as exc:
                case.load_error = f"bad {CONFIG_NAME}: {exc}"
        cases.append(case)
    return cases, diagnostics


# --- creation ------------------------------------------------------------------------


def _canvases(net: ProcessorNetwork) -> list[Canvas]:
    return [net.processors[pid] for pid in sorted(net.processors)
            if isinstance(net.processors[pid], Canvas)]


def create_test(net: ProcessorNetwork, test_dir: str | Path) -> TestCase:
    """Write a new test: workspace, one reference PNG per canvas, default config."""
    canvases = _canvases(net)
    if not canvases:
        raise NoCanvas("network has no canvas to capture references from")
    try:
        net.evaluate()
    except PipevisError as exc:
        raise EvaluationFailure(str(exc)) from exc

    directory = Path(test_dir)
    directory.mkdir(parents=True, exist_ok=True)
    case = TestCase(name=directory.name, directory=directory,
                    workspace_path=directory / DEFAULT_WORKSPACE_NAME)
    save_workspace(net, case.workspace_path)
    for canvas in canvases:
        rgba = render_rgba8(canvas_capture(canvas))
        ref_path = directory / f"{canvas.identifier}.png"
        ref_path.write_bytes(encode_png(rgba))
        case.references[canvas.identifier] = ref_path
    (directory / CONFIG_NAME).write_text(
        json.dumps({"pixelEpsilon": 0.0, "failFraction": 0.0, "outputs": {}, "scriptSteps": []},
                   indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return case


# --- execution ------------------------------------------------------------------------


def run_test(case: TestCase, registry) -> TestResult:
    """Run one case; never raises, every failure lands in the result log."""
    result = TestResult(name=case.name, passed=True)
    started = time.perf_counter()

    def fail(message: str) -> None:
        result.passed = False
        result.log.append(message)

    try:
        if case.load_error:
            fail(case.load_error)
            return result
        if not case.references:
            fail("test case has no reference images")
            return result
        net = load_workspace(registry, case.workspace_path)
        for i, step in enumerate(case.script_steps):
            op = step.get("op")
            if op == "set":
                net.set_property(step["path"], step["value"])
                result.log.append(f"step {i}: set {step['path']} = {step['value']!r}")
            elif op == "evaluate":
                net.evaluate()
                result.log.append(f"step {i}: evaluate")
            else:
                raise ValueError(f"step {i}: unknown op {op!r}")
        net.evaluate()

        captured = {c.identifier: render_rgba8(canvas_capture(c)) for c in _canvases(net)}
        result.captured = captured
        for name in sorted(set(captured) | set(case.references)):
            if name not in case.references:
                result.outputs.append(OutputComparison(name, passed=False,
                                                       error="no reference image"))
                fail(f"output {name}: canvas has no reference image")
                continue
            reference = decode_png(case.references[name])
            result.references[name] = reference
            if name not in captured:
                result.outputs.append(OutputComparison(name, passed=False,
                                                       error="no canvas produced this output"))
                fail(f"output {name}: reference has no matching canvas")
                continue
            config = case.output_config(name)
            try:
                diff, passed = compare_images(captured[name], reference,
                                              config.pixel_epsilon, config.fail_fraction)
            except DimsMismatch as exc:
                result.outputs.append(OutputComparison(name, passed=False, error=str(exc)))
                fail(f"output {name}: {exc}")
                continue
            result.outputs.append(OutputComparison(name, passed=passed, diff=diff))
            if not passed:
                fail(f"output {name}: diff fraction {diff.diff_fraction:.6f} > "
                     f"allowed {config.fail_fraction:.6f}")
    except Exception as exc:  # totalized: deserialize/evaluate/config errors
        fail(f"{type(exc).__name__}: {exc}")
    finally:
        result.duration_ms = (time.perf_counter() - started) * 1000.0
    return result


def run_all(cases: list[TestCase], registry) -> list[TestResult]:
    return [run_test(case, registry) for case in cases]


# --- report ---------------------------------------------------------------------------


def append_history(history_path: Path, results: list[TestResult]) -> None:
    """Append exactly one record per result (JSON lines, append-only)."""
    timestamp = datetime.now(timezone.utc).isoformat()
    with history_path.open("a", encoding="utf-8") as fh:
        for result in results:
            fh.write(json.dumps({
                "timestamp": timestamp,
                "testName": result.name,
                "pass": result.passed,
                "worstDiffFraction": result.worst_diff_fraction,
                "durationMs": result.duration_ms,
            }, sort_keys=True) + "\n")


def read_history(history_path: Path) -> list[dict]:
    if not history_path.exists():
        return []
    records = []
    for line in history_path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(json.loads(line))
    return records


def _sparkline(records: list[dict], limit: int = 24) -> str:
    recent = records[-limit:]
    if not recent:
        return ""
    width, height = 96, 20
    step = width / max(len(recent), 1)
    dots = []
    for i, record in enumerate(recent):
        x = step * (i + 0.5)
        y = height - 3 - (height - 6) * min(1.0, float(record["worstDiffFraction"]))
        color = "#2a2" if record["pass"] else "#c33"
        dots.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="2.4" fill="{color}"/>')
    return (f'<svg width="{width}" height="{height}" xmlns="http://www.w3.org/2000/svg">'
            f'<rect width="{width}" height="{height}" fill="#f7f7f7"/>{"".join(dots)}</svg>')


_REPORT_STYLE = (
    "body{font-family:sans-serif;margin:2em auto;max-width:64em;padding:0 1em;color:#222}"
    "table{border-collapse:collapse}td,th{border:1px solid #bbb;padding:.3em .6em}"
    ".pass{color:#2a2}.fail{color:#c33}"
    ".imgrow img{image-rendering:pixelated;border:1px solid #999;margin-right:.6em;"
    "width:128px;height:auto}"
    "pre{background:#f4f4f4;padding:.6em;overflow-x:auto}"
)


def _report_page(title: str, body: str) -> str:
    return ("<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
            f"<title>{escape(title)}</title><style>{_REPORT_STYLE}</style></head>\n"
            f"<body>{body}</body></html>\n")


def _test_page(result: TestResult, case_dir: Path) -> str:
    sections = []
    for comparison in result.outputs:
        name = comparison.name
        status = "pass" if comparison.passed else "fail"
        images = []
        if name in result.captured:
            (case_dir / f"{name}.out.png").write_bytes(encode_png(result.captured[name]))
            images.append(("output", f"{name}.out.png"))
        if name in result.references:
            (case_dir / f"{name}.ref.png").write_bytes(encode_png(result.references[name]))
            images.append(("reference", f"{name}.ref.png"))
        if comparison.diff is not None:
            (case_dir / f"{name}.diff.png").write_bytes(encode_png(comparison.diff.diff_image))
            (case_dir / f"{name}.mask.png").write_bytes(encode_png(comparison.diff.mask_image))
            images.append(("difference (x8)", f"{name}.diff.png"))
            images.append(("mask", f"{name}.mask.png"))
        stats = ""
        if comparison.diff is not None:
            stats = (f"<p>diff fraction {comparison.diff.diff_fraction:.6f}, "
                     f"max channel delta {comparison.diff.max_channel_delta:.4f}</p>")
        elif comparison.error:
            stats = f"<p class=\"fail\">{escape(comparison.error)}</p>"
        figures = "".join(
            f"<figure style=\"display:inline-block\"><img src=\"{src}\" alt=\"{label}\">"
            f"<figcaption>{label}</figcaption></figure>" for label, src in images)
        sections.append(f"<h2>{escape(name)} <span class=\"{status}\">[{status}]</span></h2>"
                        f"{stats}<div class=\"imgrow\">{figures}</div>")
    log_html = f"<h2>Log</h2><pre>{escape(chr(10).join(result.log) or '(empty)')}</pre>"
    status = "pass" if result.passed else "fail"
    body = (f"<p><a href=\"../index.html\">back to summary</a></p>"
            f"<h1>{escape(result.name)} <span class=\"{status}\">[{status}]</span></h1>"
            f"<p>duration: {result.duration_ms:.1f} ms</p>"
            + "".join(sections) + log_html)
    return _report_page(f"regression: {result.name}", body)


def render_report(results: list[TestResult], history_path: str | Path,
                  out_dir: str | Path) -> Path:
    """Write the HTML report tree and append to the history file.

    Returns the path to the summary index. Per-test pages embed the output,
    reference, amplified difference, and binary mask image for every output.
    """
    out = Path(out_dir)
    history_file = Path(history_path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        history_file.parent.mkdir(parents=True, exist_ok=True)
        append_history(history_file, results)
        history = read_history(history_file)

        rows = []
        for result in results:
            case_dir = out / result.name
            case_dir.mkdir(parents=True, exist_ok=True)
            (case_dir / "index.html").write_text(_test_page(result, case_dir), encoding="utf-8")
            records = [r for r in history if r["testName"] == result.name]
            status = "pass" if result.passed else "fail"
            rows.append(
                f"<tr><td><a href=\"{result.name}/index.html\">{escape(result.name)}</a></td>"
                f"<td class=\"{status}\">{status}</td>"
                f"<td>{result.worst_diff_fraction:.6f}</td>"
                f"<td>{result.duration_ms:.1f}</td><td>{_sparkline(records)}</td></tr>")

        passed = sum(1 for r in results if r.passed)
        body = (f"<h1>Regression report</h1><p>{passed}/{len(results)} tests passed.</p>"
                "<table><tr><th>test</th><th>status</th><th>worst diff</th>"
                "<th>duration (ms)</th><th>history</th></tr>" + "".join(rows) + "</table>")
        index = out / "index.html"
        index.write_text(_report_page("Regression report", body), encoding="utf-8")
        return index
    except OSError as exc:
        raise WriteFailure(f"cannot write report to {out}: {exc}") from exc
