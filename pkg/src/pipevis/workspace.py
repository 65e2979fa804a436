"""Workspace (de)serialization: the network as a canonical JSON document.

Canonical form: processors sorted by identifier, connections and links sorted
lexicographically, properties sorted by id, JSON emitted with sorted keys and
no insignificant whitespace. Equal networks therefore serialize to identical
bytes regardless of construction order, which golden tests and the hot-reload
digest checks rely on.

Port data and representation caches are never serialized.
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Iterator

from .errors import (
    MalformedDocument,
    PipevisError,
    UnknownProcessorClass,
    UnsupportedVersion,
)
from .network import (
    CompositeProcessor,
    InvalidationLevel,
    Processor,
    ProcessorNetwork,
)

log = logging.getLogger(__name__)

FORMAT_VERSION = 1

WORKSPACE_SUFFIX = ".workspace.json"


# --- serialization -----------------------------------------------------------


def _property_entries(proc: Processor) -> list[dict]:
    entries = []
    for prop_id in sorted(proc.properties):
        prop = proc.properties[prop_id]
        entries.append({
            "id": prop_id,
            "valueType": prop.value_type,
            "value": prop.value,
            "semantics": prop.semantics,
        })
    return entries


def _processor_entry(proc: Processor) -> dict:
    entry = {
        "classId": proc.CLASS_ID,
        "identifier": proc.identifier,
        "displayName": proc.display_name,
        "editorPosition": list(proc.editor_position),
        "properties": [] if isinstance(proc, CompositeProcessor) else _property_entries(proc),
    }
    if isinstance(proc, CompositeProcessor):
        entry["composite"] = {
            "inner": _network_body(proc.inner),
            "inports": {pid: list(target) for pid, target in sorted(proc.inport_map.items())},
            "outports": {pid: list(target) for pid, target in sorted(proc.outport_map.items())},
            "exposed": sorted(proc.exposed),
        }
    return entry


def _network_body(net: ProcessorNetwork) -> dict:
    connections = sorted(
        ((c.src_processor, c.src_port, c.dst_processor, c.dst_port) for c in net.connections))
    links = sorted((l.src, l.dst) for l in net.links)
    return {
        "processors": [_processor_entry(net.processors[pid]) for pid in sorted(net.processors)],
        "connections": [
            {"srcProcessor": s, "srcPort": sp, "dstProcessor": d, "dstPort": dp}
            for s, sp, d, dp in connections
        ],
        "links": [{"src": s, "dst": d} for s, d in links],
    }


def serialize(net: ProcessorNetwork) -> dict:
    """Capture the complete network as a workspace document."""
    doc = {"formatVersion": FORMAT_VERSION}
    doc.update(_network_body(net))
    doc["appExposed"] = sorted(net.app_exposed)
    return doc


def to_canonical_bytes(doc: dict) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False, allow_nan=False).encode("utf-8")


def digest(doc_or_net: "dict | ProcessorNetwork") -> str:
    doc = serialize(doc_or_net) if isinstance(doc_or_net, ProcessorNetwork) else doc_or_net
    return hashlib.sha256(to_canonical_bytes(doc)).hexdigest()


def save_workspace(net: ProcessorNetwork, path: str | Path) -> None:
    Path(path).write_bytes(to_canonical_bytes(serialize(net)))


# --- deserialization ------------------------------------------------------------


def document_class_ids(doc: dict) -> Iterator[str]:
    """Every classId referenced by the document, composites included."""
    for entry in doc.get("processors", []):
        if "composite" in entry:
            yield from document_class_ids(entry["composite"].get("inner", {}))
        else:
            yield entry.get("classId", "")


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise MalformedDocument(message)


def _expect_keys(entry: Any, keys: tuple[str, ...], context: str) -> None:
    _require(isinstance(entry, dict), f"{context}: expected an object")
    for key in keys:
        _require(key in entry, f"{context}: missing key {key!r}")


def _build_network(registry, body: dict, context: str) -> ProcessorNetwork:
    net = ProcessorNetwork(registry=registry)
    entries = body.get("processors", [])
    _require(isinstance(entries, list), f"{context}: processors must be a list")
    for entry in entries:
        _expect_keys(entry, ("classId", "identifier"), f"{context} processor")
        identifier = entry["identifier"]
        _require(isinstance(identifier, str) and identifier, f"{context}: bad identifier {identifier!r}")
        _require(identifier not in net.processors, f"{context}: duplicate identifier {identifier!r}")
        if "composite" in entry:
            proc = _build_composite(registry, entry, context)
            net.add_processor_instance(proc, identifier)
        else:
            proc = net.add_processor(entry["classId"], identifier)
            _apply_properties(proc, entry.get("properties", []), context)
        proc.display_name = entry.get("displayName", proc.display_name)
        position = entry.get("editorPosition", [0, 0])
        _require(isinstance(position, list) and len(position) == 2,
                 f"{context}: bad editorPosition for {identifier}")
        proc.editor_position = (int(position[0]), int(position[1]))
        proc.invalidation = InvalidationLevel.INVALID_RESOURCES

    for conn in body.get("connections", []):
        _expect_keys(conn, ("srcProcessor", "srcPort", "dstProcessor", "dstPort"), f"{context} connection")
        try:
            net.add_connection(conn["srcProcessor"], conn["srcPort"], conn["dstProcessor"], conn["dstPort"])
        except PipevisError as exc:
            raise MalformedDocument(f"{context}: connection {conn}: {exc}") from exc

    for link in body.get("links", []):
        _expect_keys(link, ("src", "dst"), f"{context} link")
        try:
            net.add_link(link["src"], link["dst"])
        except PipevisError as exc:
            raise MalformedDocument(f"{context}: link {link}: {exc}") from exc
    return net


def _apply_properties(proc: Processor, entries: Any, context: str) -> None:
    _require(isinstance(entries, list), f"{context}: properties must be a list")
    for entry in entries:
        _expect_keys(entry, ("id", "value"), f"{context} property")
        prop = proc.properties.get(entry["id"])
        if prop is None:
            log.warning("%s: processor %s has no property %r; skipping its stored value",
                        context, proc.identifier, entry["id"])
            continue
        stored_type = entry.get("valueType", prop.value_type)
        if stored_type != prop.value_type:
            log.warning("%s: property %s.%s changed type (%s -> %s); keeping the default",
                        context, proc.identifier, entry["id"], stored_type, prop.value_type)
            continue
        try:
            prop.value = prop.coerce(entry["value"])
        except PipevisError as exc:
            raise MalformedDocument(
                f"{context}: bad value for {proc.identifier}.{entry['id']}: {exc}") from exc
        semantics = entry.get("semantics")
        if semantics is not None and not prop.set_semantics(semantics):
            log.warning("%s: unknown semantics %r on %s.%s; using default",
                        context, semantics, proc.identifier, entry["id"])


def _build_composite(registry, entry: dict, context: str) -> CompositeProcessor:
    block = entry["composite"]
    _expect_keys(block, ("inner", "inports", "outports"), f"{context} composite")
    inner = _build_network(registry, block["inner"], f"{context}/composite {entry['identifier']}")
    inport_map = {pid: tuple(target) for pid, target in block["inports"].items()}
    outport_map = {pid: tuple(target) for pid, target in block["outports"].items()}
    exposed = list(block.get("exposed", []))
    try:
        return CompositeProcessor(inner, inport_map, outport_map, exposed)
    except PipevisError as exc:
        raise MalformedDocument(f"{context}: composite {entry['identifier']}: {exc}") from exc


def deserialize(registry, doc: dict) -> ProcessorNetwork:
    """Reconstruct a network; transactional, returns a fully built network.

    All processors come back InvalidResources (nothing is processed yet).
    Unknown semantics fall back to defaults with a warning; structural
    problems raise typed errors and nothing partial is returned.
    """
    _require(isinstance(doc, dict), "document must be an object")
    version = doc.get("formatVersion")
    _require(version is not None, "document missing formatVersion")
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"formatVersion {version} (supported: {FORMAT_VERSION})")

    missing = {cid for cid in document_class_ids(doc) if not registry.has_class(cid)}
    if missing:
        raise UnknownProcessorClass({cid: registry.provider_of(cid) for cid in missing})

    net = _build_network(registry, doc, "workspace")
    for path in doc.get("appExposed", []):
        try:
            net.find_property(path)
        except PipevisError as exc:
            raise MalformedDocument(f"appExposed entry {path!r} does not resolve: {exc}") from exc
        net.app_exposed.add(path)
    return net


def load_workspace(registry, path: str | Path) -> ProcessorNetwork:
    raw = Path(path).read_bytes()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"{path}: {exc}") from exc
    return deserialize(registry, doc)
