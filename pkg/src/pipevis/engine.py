"""Single-owner engine: applies commands, emits sequenced events.

All state-changing operations funnel through ``apply_command`` on one logical
thread (the service's command loop). Every state change emits at least one
event with a monotonically increasing sequence number; replaying the
``networkChanged`` digests reconstructs the workspace history.
"""

from __future__ import annotations

import base64
import queue
import threading
from dataclasses import dataclass
from typing import Any, Callable, Optional

from . import docgen
from .builtins import default_module_registry
from .datatypes import encode_png
from .errors import PipevisError
from .inspection import InspectionResult, InspectionSession, inspect_port
from .modules import ModuleDescriptor, ModuleRegistry
from .network import ProcessorNetwork
from .workspace import digest, serialize, to_canonical_bytes

MODES = ("developer", "application")


class InvalidMode(PipevisError):
    pass


class CommandQueueFull(PipevisError):
    pass


@dataclass(frozen=True)
class Event:
    seq: int
    kind: str
    payload: dict

    def frame(self) -> dict:
        return {"seq": self.seq, "kind": self.kind, "payload": self.payload}


class Engine:
    def __init__(self, registry: Optional[ModuleRegistry] = None,
                 network: Optional[ProcessorNetwork] = None):
        self.registry = registry if registry is not None else default_module_registry()
        self.network = network if network is not None else ProcessorNetwork(registry=self.registry)
        self.mode = "developer"
        self.descriptor_sources: dict[str, Callable[[], ModuleDescriptor]] = {}
        self.sessions: dict[str, InspectionSession] = {}
        self.events: list[Event] = []
        self._seq = 0
        self._event_lock = threading.Lock()
        self._subscribers: list[queue.Queue] = []
        self._last_lint: Optional[list[dict]] = None
        self._docs_cache: Optional[dict[str, bytes]] = None

    # --- events ------------------------------------------------------------

    def emit(self, kind: str, payload: dict) -> Event:
        with self._event_lock:
            self._seq += 1
            event = Event(self._seq, kind, payload)
            self.events.append(event)
            for sub in self._subscribers:
                sub.put(event)
        return event

    def subscribe(self, since: int = 0) -> tuple[list[Event], queue.Queue]:
        """Atomically fetch the backlog after ``since`` and start a live feed."""
        sub: queue.Queue = queue.Queue()
        with self._event_lock:
            backlog = [e for e in self.events if e.seq > since]
            self._subscribers.append(sub)
        return backlog, sub

    def unsubscribe(self, sub: queue.Queue) -> None:
        with self._event_lock:
            if sub in self._subscribers:
                self._subscribers.remove(sub)

    # --- views ---------------------------------------------------------------

    def network_doc(self) -> dict:
        return serialize(self.network)

    def network_bytes(self) -> bytes:
        return to_canonical_bytes(self.network_doc())

    def network_digest(self) -> str:
        return digest(self.network)

    def lint_payload(self) -> list[dict]:
        return [
            {"guideline": w.guideline, "processorId": w.processor_id,
             "message": w.message, "severity": w.severity}
            for w in self.network.lint()
        ]

    def catalog_payload(self) -> list[dict]:
        entries = []
        for entry in docgen.catalog_entries(self.registry):
            entries.append({
                "classId": entry.class_id,
                "module": entry.module,
                "displayName": entry.display_name,
                "help": entry.help_md,
                "glyph": docgen.render_glyph(entry),
                "inports": [
                    {"id": pid, "tag": tag, "optional": optional, "color": docgen.tag_color(tag)}
                    for pid, tag, optional in entry.inports
                ],
                "outports": [
                    {"id": pid, "tag": tag, "color": docgen.tag_color(tag)}
                    for pid, tag in entry.outports
                ],
                "properties": entry.properties,
            })
        return entries

    def app_payload(self) -> dict:
        properties = []
        for pid in sorted(self.network.processors):
            proc = self.network.processors[pid]
            for prop_id in sorted(proc.properties):
                path = f"{pid}.{prop_id}"
                exposed = path in self.network.app_exposed
                if self.mode == "application" and not exposed:
                    continue
                prop = proc.properties[prop_id]
                properties.append({
                    "path": path,
                    "valueType": prop.value_type,
                    "value": prop.value,
                    "semantics": prop.semantics,
                    "min": prop.min,
                    "max": prop.max,
                    "options": prop.options,
                    "exposed": exposed,
                })
        return {"mode": self.mode, "properties": properties}

    def docs_bundle(self) -> dict[str, bytes]:
        if self._docs_cache is None:
            self._docs_cache, _ = docgen.build_bundle(self.registry)
        return self._docs_cache

    # --- inspection -------------------------------------------------------------

    @staticmethod
    def _result_payload(result: InspectionResult) -> dict:
        return {
            "info": result.info,
            "previews": [
                {"label": p.label, "png": base64.b64encode(encode_png(p.rgba8())).decode("ascii")}
                for p in result.previews
            ],
        }

    def inspect(self, proc_id: str, port_id: str) -> dict:
        result = inspect_port(self.registry, self.network, proc_id, port_id)
        return self._result_payload(result)

    def open_session(self, proc_id: str, port_id: str) -> dict:
        session = inspect_port(self.registry, self.network, proc_id, port_id, keep_alive=True)
        self.sessions[session.id] = session
        return {"id": session.id, **self._result_payload(session.result)}

    def session_event(self, session_id: str, event: dict) -> dict:
        session = self.sessions.get(session_id)
        if session is None:
            raise KeyError(session_id)
        return self._result_payload(session.forward_event(event))

    def close_session(self, session_id: str) -> None:
        session = self.sessions.pop(session_id, None)
        if session is not None:
            session.close()

    # --- commands ------------------------------------------------------------------

    def apply_command(self, cmd: dict) -> dict:
        if not isinstance(cmd, dict) or "type" not in cmd:
            raise ValueError("command must be an object with a 'type' field")
        handler = getattr(self, f"_cmd_{cmd['type']}", None)
        if handler is None:
            raise ValueError(f"unknown command type {cmd['type']!r}")
        return handler(cmd)

    def _arg(self, cmd: dict, key: str) -> Any:
        if key not in cmd:
            raise ValueError(f"command {cmd.get('type')} missing field {key!r}")
        return cmd[key]

    def _network_changed(self) -> dict:
        payload = {"digest": self.network_digest()}
        self.emit("networkChanged", payload)
        lint = self.lint_payload()
        if lint != self._last_lint:
            self._last_lint = lint
            self.emit("lintChanged", {"warnings": lint})
        return payload

    def _cmd_AddProcessor(self, cmd: dict) -> dict:
        proc = self.network.add_processor(self._arg(cmd, "classId"), self._arg(cmd, "identifier"))
        position = cmd.get("position")
        if position:
            proc.editor_position = (int(position[0]), int(position[1]))
        self.emit("processorInvalidated", {"id": proc.identifier, "level": proc.invalidation})
        changed = self._network_changed()
        return {"identifier": proc.identifier, **changed}

    def _cmd_RemoveProcessor(self, cmd: dict) -> dict:
        self.network.remove_processor(self._arg(cmd, "identifier"))
        return self._network_changed()

    def _cmd_Connect(self, cmd: dict) -> dict:
        self.network.add_connection(self._arg(cmd, "srcProcessor"), self._arg(cmd, "srcPort"),
                                    self._arg(cmd, "dstProcessor"), self._arg(cmd, "dstPort"))
        self.emit("processorInvalidated", {"id": cmd["dstProcessor"],
                                           "level": self.network.processor(cmd["dstProcessor"]).invalidation})
        return self._network_changed()

    def _cmd_Disconnect(self, cmd: dict) -> dict:
        self.network.remove_connection(self._arg(cmd, "srcProcessor"), self._arg(cmd, "srcPort"),
                                       self._arg(cmd, "dstProcessor"), self._arg(cmd, "dstPort"))
        return self._network_changed()

    def _cmd_SetProperty(self, cmd: dict) -> dict:
        path = self._arg(cmd, "path")
        prop = self.network.find_property(path)
        if "value" not in cmd and "semantics" not in cmd:
            raise ValueError("SetProperty needs a value and/or a semantics tag")
        if "value" in cmd:
            self.network.set_property(path, cmd["value"])
            owner = prop.owner
            if owner is not None:
                self.emit("processorInvalidated", {"id": owner.identifier, "level": owner.invalidation})
        if "semantics" in cmd:
            # display-only change: no invalidation, but the workspace serializes it
            prop.set_semantics(cmd["semantics"])
        changed = self._network_changed()
        return {"value": prop.value, "semantics": prop.semantics, **changed}

    def _cmd_AddLink(self, cmd: dict) -> dict:
        self.network.add_link(self._arg(cmd, "src"), self._arg(cmd, "dst"),
                              bidirectional=bool(cmd.get("bidirectional", False)))
        return self._network_changed()

    def _cmd_RemoveLink(self, cmd: dict) -> dict:
        self.network.remove_link(self._arg(cmd, "src"), self._arg(cmd, "dst"))
        return self._network_changed()

    def _cmd_Evaluate(self, cmd: dict) -> dict:
        report = self.network.evaluate()
        payload = {
            "processed": report.processed,
            "durationsMs": {e.identifier: e.duration_ms for e in report.entries},
        }
        self.emit("evaluationFinished", payload)
        return payload

    def _cmd_MakeComposite(self, cmd: dict) -> dict:
        from .network import make_composite
        composite = make_composite(self.network, self._arg(cmd, "identifiers"),
                                   self._arg(cmd, "identifier"), cmd.get("expose"))
        changed = self._network_changed()
        return {"identifier": composite.identifier, **changed}

    def _cmd_ExposeProperty(self, cmd: dict) -> dict:
        path = self._arg(cmd, "path")
        self.network.find_property(path)  # raises UnknownProperty
        if bool(cmd.get("exposed", True)):
            self.network.app_exposed.add(path)
        else:
            self.network.app_exposed.discard(path)
        return self._network_changed()

    def _cmd_Reload(self, cmd: dict) -> dict:
        name = self._arg(cmd, "module")
        source = self.descriptor_sources.get(name)
        descriptor = source() if source is not None else self.registry.descriptor(name)
        self.network = self.registry.reload_module(self.network, name, descriptor)
        self._docs_cache = None
        self.emit("moduleReloaded", {"name": name})
        return self._network_changed()

    def _cmd_SetMode(self, cmd: dict) -> dict:
        mode = self._arg(cmd, "mode")
        if mode not in MODES:
            raise InvalidMode(f"mode must be one of {MODES}, got {mode!r}")
        self.mode = mode
        self.emit("modeChanged", {"mode": mode})
        return {"mode": mode}

    def _cmd_SetProcessorPosition(self, cmd: dict) -> dict:
        proc = self.network.processor(self._arg(cmd, "identifier"))
        position = self._arg(cmd, "position")
        proc.editor_position = (int(position[0]), int(position[1]))
        return self._network_changed()
