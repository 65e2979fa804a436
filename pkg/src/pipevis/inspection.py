"""Port inspectors: mini pipelines that preview the data at any outport.

An inspector is a workspace template with exactly one unconnected inport of
its target tag (the injection point) and at least one canvas. Inspecting a
port deep-copies the port's payload into a scratch instantiation of the
template, evaluates it, and captures every canvas; the live network is never
modified. Ports without a registered inspector fall back to a structured
info document.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .datatypes import BufferData, ImageData, MeshData, VolumeData, render_rgba8
from .errors import (
    InvalidTemplate,
    NotEvaluable,
    PipevisError,
    ProcessorFailure,
    SessionClosed,
    TypeMismatch,
)
from .network import InvalidationLevel, ProcessorNetwork
from .stdlib import Canvas, canvas_capture
from .workspace import deserialize, serialize


@dataclass
class PortInspector:
    """Preview pipeline for one port tag."""

    target_tag: str
    template_doc: dict
    event_target: Optional[str] = None
    center_event_target: bool = False

    def validate(self, registry) -> None:
        try:
            net = deserialize(registry, self.template_doc)
        except PipevisError as exc:
            raise InvalidTemplate(f"template does not deserialize: {exc}") from exc
        injections = _injection_points(net, self.target_tag)
        if len(injections) != 1:
            raise InvalidTemplate(
                f"template must have exactly one unconnected {self.target_tag!r} inport, "
                f"found {len(injections)}")
        stray = [
            f"{proc.identifier}.{port.id}"
            for proc in net.processors.values()
            for port in proc.inports.values()
            if port.connection is None and not port.optional and port.tag != self.target_tag
        ]
        if stray:
            raise InvalidTemplate(f"template has unconnected mandatory inports: {stray}")
        if not _canvases(net):
            raise InvalidTemplate("template needs at least one canvas")
        if self.event_target is not None:
            try:
                net.find_property(self.event_target)
            except PipevisError as exc:
                raise InvalidTemplate(f"event target {self.event_target!r} not found: {exc}") from exc


def _injection_points(net: ProcessorNetwork, tag: str):
    return [
        (proc, port)
        for pid in sorted(net.processors)
        for proc in [net.processors[pid]]
        for port in proc.inports.values()
        if port.connection is None and not port.optional and port.tag == tag
    ]


def _canvases(net: ProcessorNetwork) -> list[Canvas]:
    return [net.processors[pid] for pid in sorted(net.processors)
            if isinstance(net.processors[pid], Canvas)]


@dataclass
class Preview:
    """One displayable layer of a captured canvas image."""

    label: str
    image: ImageData
    layer: str

    def rgba8(self) -> np.ndarray:
        return render_rgba8(self.image, self.layer)


@dataclass
class InspectionResult:
    processor_id: str
    port_id: str
    info: dict[str, str]
    previews: list[Preview] = field(default_factory=list)


# --- debug info ----------------------------------------------------------------


def describe_volume(volume: VolumeData) -> dict[str, str]:
    lo, hi = volume.value_range
    return {
        "dims": "×".join(str(d) for d in volume.dims),
        "format": f"{volume.format.numeric_type.value}×{volume.format.components}",
        "range": f"[{lo:g},{hi:g}]",
    }


def describe_image(image: ImageData) -> dict[str, str]:
    fmt = image.color.format
    return {
        "dims": "×".join(str(d) for d in image.dims),
        "format": f"{fmt.numeric_type.value}×{fmt.components}",
        "colorLayers": str(len(image.color_layers)),
    }


def describe_mesh(mesh: MeshData) -> dict[str, str]:
    return {"vertices": str(mesh.vertex_count), "indexBuffers": str(len(mesh.index_buffers))}


def describe_buffer(buf: BufferData) -> dict[str, str]:
    return {
        "length": str(buf.length),
        "format": f"{buf.format.numeric_type.value}×{buf.format.components}",
    }


DEFAULT_DEBUG_PROVIDERS: dict[type, Any] = {
    VolumeData: describe_volume,
    ImageData: describe_image,
    MeshData: describe_mesh,
    BufferData: describe_buffer,
}


def debug_info(registry, payload: Any) -> dict[str, str]:
    """Type-registered key/value description; empty for unregistered types."""
    for cls in type(payload).__mro__:
        entry = registry.debug_providers.get(cls)
        if entry is not None:
            return dict(entry[0](payload))
    return {}


# --- inspection -----------------------------------------------------------------


def _snapshot_payload(payload: Any) -> Any:
    clone = getattr(payload, "clone", None)
    return clone("cpu") if callable(clone) else payload


def _port_snapshot(registry, net: ProcessorNetwork, proc_id: str, port_id: str) -> Any:
    proc = net.processor(proc_id)
    outport = proc.outport(port_id)
    if proc.invalidation == InvalidationLevel.VALID and outport.data is not None:
        return _snapshot_payload(outport.data)
    # Evaluate a scratch copy so the live network's state is untouched.
    # Attaching the inspector counts as connecting the port, which is what
    # makes a dangling source evaluable at all.
    scratch = deserialize(registry, serialize(net))
    scratch.processor(proc_id).outport(port_id).exported = True
    if not scratch.is_ready(scratch.processor(proc_id)):
        raise NotEvaluable(f"{proc_id} is not ready (unconnected mandatory inputs upstream)")
    try:
        scratch.evaluate()
    except ProcessorFailure as exc:
        raise NotEvaluable(f"upstream evaluation failed: {exc}") from exc
    data = scratch.processor(proc_id).outport(port_id).data
    if data is None:
        raise NotEvaluable(f"{proc_id}.{port_id} produced no data")
    return _snapshot_payload(data)


def _capture_previews(scratch: ProcessorNetwork) -> list[Preview]:
    previews: list[Preview] = []
    for canvas in _canvases(scratch):
        captured = canvas_capture(canvas)
        layer_order = [name for name, _ in captured.layers if name.startswith("color")]
        layer_order += ["picking", "depth"]
        for layer in layer_order:
            previews.append(Preview(f"{canvas.identifier}:{layer}", captured, layer))
    return previews


def _build_info(registry, proc_id: str, port_id: str, tag: str, payload: Any) -> dict[str, str]:
    info = {"port": port_id, "processor": proc_id, "tag": tag}
    info.update(debug_info(registry, payload))
    return info


class InspectionSession:
    """Kept-alive inspector instantiation that can receive forwarded events."""

    _ids = itertools.count(1)

    def __init__(self, inspector: PortInspector, scratch: ProcessorNetwork,
                 result: InspectionResult):
        self.id = f"session-{next(self._ids)}"
        self.inspector = inspector
        self.scratch = scratch
        self.result = result
        self.closed = False

    def forward_event(self, event: dict) -> InspectionResult:
        if self.closed:
            raise SessionClosed(self.id)
        if event.get("kind") != "wheel":
            raise TypeMismatch(f"unsupported event kind {event.get('kind')!r}")
        target = self.inspector.event_target
        if target is None:
            return self.result
        delta = int(event.get("delta", 0))
        prop = self.scratch.find_property(target)
        self.scratch.set_property(target, prop.value + delta)
        self.scratch.evaluate()
        self.result = InspectionResult(
            self.result.processor_id, self.result.port_id, self.result.info,
            _capture_previews(self.scratch))
        return self.result

    def close(self) -> None:
        self.closed = True


def inspect_port(registry, net: ProcessorNetwork, proc_id: str, port_id: str,
                 keep_alive: bool = False) -> "InspectionResult | InspectionSession":
    """Preview an outport through its tag's inspector template.

    Returns an InspectionResult, or an InspectionSession when ``keep_alive``
    is set (for wheel-event forwarding). Falls back to an info-only result for
    tags without a registered inspector. Never mutates the inspected network.
    """
    proc = net.processor(proc_id)
    outport = proc.outport(port_id)
    snapshot = _port_snapshot(registry, net, proc_id, port_id)
    info = _build_info(registry, proc_id, port_id, outport.tag, snapshot)

    entry = registry.port_inspectors.get(outport.tag)
    if entry is None:
        result = InspectionResult(proc_id, port_id, info)
        return InspectionSession(PortInspector(outport.tag, {}), ProcessorNetwork(), result) \
            if keep_alive else result

    inspector: PortInspector = entry[0]
    scratch = deserialize(registry, inspector.template_doc)
    inj_proc, inj_port = _injection_points(scratch, outport.tag)[0]
    inj_port.inject(snapshot)
    scratch.evaluate()
    if inspector.center_event_target and inspector.event_target is not None:
        prop = scratch.find_property(inspector.event_target)
        if prop.min is not None and prop.max is not None and prop.value_type == "int":
            scratch.set_property(inspector.event_target, (int(prop.min) + int(prop.max)) // 2)
            scratch.evaluate()
    result = InspectionResult(proc_id, port_id, info, _capture_previews(scratch))
    if keep_alive:
        return InspectionSession(inspector, scratch, result)
    return result
