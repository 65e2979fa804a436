"""Processor/port/property model and the acyclic processor network.

A network is single-owner: every mutation and evaluation happens on one
logical thread (the command loop). Processor ``process()`` bodies are pure
functions of inport data and property values.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from .errors import (
    CycleDetected,
    DuplicateIdentifier,
    InvalidSelection,
    NetworkLocked,
    PortOccupied,
    ProcessorFailure,
    TypeMismatch,
    UnknownClass,
    UnknownPort,
    UnknownProcessor,
    UnknownProperty,
)

# Display colors per port tag; modules may register more tags.
PORT_TAG_COLORS: dict[str, str] = {
    "image": "#4A90D9",
    "volume": "#D94A4A",
    "mesh": "#D9C94A",
    "buffer": "#9A9A9A",
}

PROPERTY_TYPES = ("float", "floatVec4", "int", "bool", "string", "transferFunction")

DEFAULT_SEMANTICS = {
    "float": "default",
    "floatVec4": "sliders",
    "int": "default",
    "bool": "checkbox",
    "string": "text",
    "transferFunction": "transferFunction",
}

KNOWN_SEMANTICS = {
    "float": {"default", "sliders", "spinbox"},
    "floatVec4": {"sliders", "color", "spinbox"},
    "int": {"default", "sliders", "spinbox"},
    "bool": {"checkbox"},
    "string": {"text", "multiline", "path", "option"},
    "transferFunction": {"transferFunction"},
}


class InvalidationLevel:
    VALID = "Valid"
    INVALID_OUTPUT = "InvalidOutput"
    INVALID_RESOURCES = "InvalidResources"

    ORDER = {VALID: 0, INVALID_OUTPUT: 1, INVALID_RESOURCES: 2}

    @classmethod
    def worse(cls, a: str, b: str) -> str:
        return a if cls.ORDER[a] >= cls.ORDER[b] else b


class Inport:
    def __init__(self, owner: "Processor", port_id: str, tag: str, optional: bool = False):
        self.owner = owner
        self.id = port_id
        self.tag = tag
        self.optional = optional
        self.connection: Optional[Outport] = None
        self._injected: Any = None  # scratch-network injection override

    @property
    def data(self) -> Any:
        if self._injected is not None:
            return self._injected
        return self.connection.data if self.connection is not None else None

    def inject(self, payload: Any) -> None:
        self._injected = payload


class Outport:
    def __init__(self, owner: "Processor", port_id: str, tag: str):
        self.owner = owner
        self.id = port_id
        self.tag = tag
        self.data: Any = None
        self.connections: list[Inport] = []
        self.exported = False  # boundary outport inside a composite


def _tf_normalize(points: Iterable) -> list[list[float]]:
    normalized = []
    for point in points:
        if isinstance(point, dict):
            pos, color = point["position"], point["color"]
        else:
            pos, color = point
        if len(color) != 4:
            raise TypeMismatch("transfer function colors need 4 channels")
        pos = min(1.0, max(0.0, float(pos)))
        rgba = [min(1.0, max(0.0, float(c))) for c in color]
        normalized.append([pos, rgba])
    normalized.sort(key=lambda p: p[0])
    return normalized


class Property:
    """Tunable parameter. Bounds clamp; semantics only affects display."""

    def __init__(self, prop_id: str, value_type: str, default: Any, minimum: Any = None,
                 maximum: Any = None, semantics: Optional[str] = None,
                 invalidation_level: str = InvalidationLevel.INVALID_OUTPUT,
                 options: Optional[list[str]] = None):
        if value_type not in PROPERTY_TYPES:
            raise TypeMismatch(f"unknown property value type {value_type!r}")
        self.id = prop_id
        self.value_type = value_type
        self.min = minimum
        self.max = maximum
        self.semantics = semantics if semantics is not None else DEFAULT_SEMANTICS[value_type]
        self.invalidation_level = invalidation_level
        self.options = list(options) if options else None
        self.owner: Optional[Processor] = None
        self.default = self.coerce(default)
        self.value = self.default

    def coerce(self, value: Any) -> Any:
        """Validate the raw value's type and clamp it into bounds."""
        t = self.value_type
        if t == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeMismatch(f"{self.id}: expected float, got {type(value).__name__}")
            result = float(value)
            if self.min is not None:
                result = max(result, float(self.min))
            if self.max is not None:
                result = min(result, float(self.max))
            return result
        if t == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeMismatch(f"{self.id}: expected int, got {type(value).__name__}")
            result = int(value)
            if self.min is not None:
                result = max(result, int(self.min))
            if self.max is not None:
                result = min(result, int(self.max))
            return result
        if t == "bool":
            if not isinstance(value, bool):
                raise TypeMismatch(f"{self.id}: expected bool, got {type(value).__name__}")
            return value
        if t == "string":
            if not isinstance(value, str):
                raise TypeMismatch(f"{self.id}: expected string, got {type(value).__name__}")
            return value
        if t == "floatVec4":
            if not isinstance(value, (list, tuple)) or len(value) != 4:
                raise TypeMismatch(f"{self.id}: expected 4 floats")
            vec = []
            for component in value:
                if isinstance(component, bool) or not isinstance(component, (int, float)):
                    raise TypeMismatch(f"{self.id}: expected 4 floats")
                c = float(component)
                if self.min is not None:
                    c = max(c, float(self.min))
                if self.max is not None:
                    c = min(c, float(self.max))
                vec.append(c)
            return vec
        # transferFunction
        if not isinstance(value, (list, tuple)):
            raise TypeMismatch(f"{self.id}: expected a list of transfer function points")
        return _tf_normalize(value)

    def set_semantics(self, semantics: str) -> bool:
        """Returns False (and falls back to the default) for unknown tags."""
        if semantics in KNOWN_SEMANTICS[self.value_type]:
            self.semantics = semantics
            return True
        self.semantics = DEFAULT_SEMANTICS[self.value_type]
        return False

    def schema(self) -> dict:
        return {
            "id": self.id,
            "valueType": self.value_type,
            "default": self.default,
            "min": self.min,
            "max": self.max,
            "semantics": self.semantics,
            "options": self.options,
        }


@dataclass(frozen=True)
class PropertyLink:
    """Directed value-copy synchronization; bidirectional = two links."""

    src: str
    dst: str


class Processor:
    """Encapsulated functional unit with inports, outports, and properties.

    Subclasses declare ports/properties in ``__init__`` via the ``add_*``
    helpers and implement ``process()``; ``initialize_resources()`` runs before
    processing when the processor is InvalidResources.
    """

    CLASS_ID = "Processor"
    DISPLAY_NAME: Optional[str] = None
    HELP = ""
    PORT_DOCS: dict[str, str] = {}
    PROPERTY_DOCS: dict[str, str] = {}

    def __init__(self) -> None:
        self.identifier = ""
        self.display_name = self.DISPLAY_NAME or self.CLASS_ID
        self.inports: dict[str, Inport] = {}
        self.outports: dict[str, Outport] = {}
        self.properties: dict[str, Property] = {}
        self.invalidation = InvalidationLevel.INVALID_RESOURCES
        self.editor_position: tuple[int, int] = (0, 0)
        self.registry = None  # module registry; set when added to a network
        self.parent_composite: Optional["CompositeProcessor"] = None

    # --- declaration helpers -------------------------------------------------

    def add_inport(self, port_id: str, tag: str, optional: bool = False) -> Inport:
        if port_id in self.inports or port_id in self.outports:
            raise DuplicateIdentifier(f"port {port_id!r} already exists on {self.CLASS_ID}")
        port = Inport(self, port_id, tag, optional)
        self.inports[port_id] = port
        return port

    def add_outport(self, port_id: str, tag: str) -> Outport:
        if port_id in self.inports or port_id in self.outports:
            raise DuplicateIdentifier(f"port {port_id!r} already exists on {self.CLASS_ID}")
        port = Outport(self, port_id, tag)
        self.outports[port_id] = port
        return port

    def add_property(self, prop: Property) -> Property:
        if prop.id in self.properties:
            raise DuplicateIdentifier(f"property {prop.id!r} already exists on {self.CLASS_ID}")
        prop.owner = self
        self.properties[prop.id] = prop
        return prop

    # --- convenience ----------------------------------------------------------

    def inport(self, port_id: str) -> Inport:
        try:
            return self.inports[port_id]
        except KeyError:
            raise UnknownPort(f"{self.identifier}.{port_id}") from None

    def outport(self, port_id: str) -> Outport:
        try:
            return self.outports[port_id]
        except KeyError:
            raise UnknownPort(f"{self.identifier}.{port_id}") from None

    def prop(self, prop_id: str) -> Property:
        try:
            return self.properties[prop_id]
        except KeyError:
            raise UnknownProperty(f"{self.identifier}.{prop_id}") from None

    def value(self, prop_id: str) -> Any:
        return self.prop(prop_id).value

    def invalidate(self, level: str = InvalidationLevel.INVALID_OUTPUT) -> None:
        self.invalidation = InvalidationLevel.worse(self.invalidation, level)
        if self.parent_composite is not None:
            self.parent_composite.invalidate(level)

    # --- lifecycle -------------------------------------------------------------

    def initialize_resources(self) -> None:
        pass

    def process(self) -> None:
        raise NotImplementedError


@dataclass
class EvaluationEntry:
    identifier: str
    duration_ms: float


@dataclass
class EvaluationReport:
    entries: list[EvaluationEntry] = field(default_factory=list)

    @property
    def processed(self) -> list[str]:
        return [e.identifier for e in self.entries]


@dataclass(frozen=True)
class Connection:
    src_processor: str
    src_port: str
    dst_processor: str
    dst_port: str


@dataclass
class LintWarning:
    guideline: str
    processor_id: str
    message: str
    severity: str = "warning"


class ProcessorNetwork:
    """Acyclic graph of processors, port connections, and property links."""

    def __init__(self, registry=None):
        self.registry = registry  # ModuleRegistry providing the class factory
        self.processors: dict[str, Processor] = {}
        self.links: list[PropertyLink] = []
        self.lock_depth = 0
        self.app_exposed: set[str] = set()

    # --- locking -----------------------------------------------------------

    def lock(self) -> None:
        self.lock_depth += 1

    def unlock(self) -> None:
        if self.lock_depth == 0:
            raise NetworkLocked("unlock without matching lock")
        self.lock_depth -= 1

    # --- processors ----------------------------------------------------------

    def add_processor(self, class_id: str, identifier: str) -> Processor:
        if identifier in self.processors:
            raise DuplicateIdentifier(identifier)
        if self.registry is None:
            raise UnknownClass(class_id)
        proc = self.registry.create_processor(class_id)
        proc.identifier = identifier
        proc.registry = self.registry
        proc.invalidation = InvalidationLevel.INVALID_RESOURCES
        self.processors[identifier] = proc
        return proc

    def add_processor_instance(self, proc: Processor, identifier: str) -> Processor:
        """Insert a pre-built instance (composites, scratch injection sources)."""
        if identifier in self.processors:
            raise DuplicateIdentifier(identifier)
        proc.identifier = identifier
        proc.registry = self.registry
        self.processors[identifier] = proc
        return proc

    def remove_processor(self, identifier: str) -> None:
        proc = self.processor(identifier)
        for inport in proc.inports.values():
            if inport.connection is not None:
                self.disconnect(inport.connection, inport)
        for outport in proc.outports.values():
            for inport in list(outport.connections):
                self.disconnect(outport, inport)
        prefix = identifier + "."
        self.links = [l for l in self.links if not (l.src.startswith(prefix) or l.dst.startswith(prefix))]
        self.app_exposed = {p for p in self.app_exposed if not p.startswith(prefix)}
        del self.processors[identifier]

    def processor(self, identifier: str) -> Processor:
        try:
            return self.processors[identifier]
        except KeyError:
            raise UnknownProcessor(identifier) from None

    # --- connections -----------------------------------------------------------

    @property
    def connections(self) -> list[Connection]:
        found = []
        for proc in self.processors.values():
            for inport in proc.inports.values():
                if inport.connection is not None:
                    out = inport.connection
                    found.append(Connection(out.owner.identifier, out.id, proc.identifier, inport.id))
        return found

    def _suppliers(self, proc: Processor) -> list[Processor]:
        ups = []
        for inport in proc.inports.values():
            if inport.connection is not None:
                ups.append(inport.connection.owner)
        return ups

    def _consumers(self, proc: Processor) -> list[Processor]:
        downs = []
        for outport in proc.outports.values():
            for inport in outport.connections:
                downs.append(inport.owner)
        return downs

    def _reaches(self, start: Processor, goal: Processor) -> bool:
        seen = set()
        stack = [start]
        while stack:
            node = stack.pop()
            if node is goal:
                return True
            if node.identifier in seen:
                continue
            seen.add(node.identifier)
            stack.extend(self._consumers(node))
        return False

    def connect(self, outport: Outport, inport: Inport) -> None:
        if outport.tag != inport.tag:
            raise TypeMismatch(f"cannot connect {outport.tag!r} outport to {inport.tag!r} inport")
        if inport.connection is not None:
            raise PortOccupied(f"{inport.owner.identifier}.{inport.id} already connected")
        if outport.owner is inport.owner or self._reaches(inport.owner, outport.owner):
            raise CycleDetected(
                f"{outport.owner.identifier} -> {inport.owner.identifier} would close a cycle")
        inport.connection = outport
        outport.connections.append(inport)
        inport.owner.invalidate(InvalidationLevel.INVALID_OUTPUT)

    def add_connection(self, src_proc: str, src_port: str, dst_proc: str, dst_port: str) -> None:
        self.connect(self.processor(src_proc).outport(src_port), self.processor(dst_proc).inport(dst_port))

    def disconnect(self, outport: Outport, inport: Inport) -> None:
        if inport.connection is not outport:
            raise UnknownPort("connection does not exist")
        inport.connection = None
        outport.connections.remove(inport)
        inport.owner.invalidate(InvalidationLevel.INVALID_OUTPUT)

    def remove_connection(self, src_proc: str, src_port: str, dst_proc: str, dst_port: str) -> None:
        self.disconnect(self.processor(src_proc).outport(src_port), self.processor(dst_proc).inport(dst_port))

    # --- readiness ---------------------------------------------------------------

    def _locally_ready(self, proc: Processor) -> bool:
        for inport in proc.inports.values():
            if not inport.optional and inport.connection is None and inport._injected is None:
                return False
        if proc.outports and not any(out.connections or out.exported for out in proc.outports.values()):
            return False
        if isinstance(proc, CompositeProcessor) and not proc.inner_ready():
            return False
        return True

    def is_ready(self, proc: Processor, _memo: Optional[dict[str, bool]] = None) -> bool:
        memo = _memo if _memo is not None else {}
        if proc.identifier in memo:
            return memo[proc.identifier]
        memo[proc.identifier] = False  # cycle guard; the graph is acyclic by construction
        ready = self._locally_ready(proc) and all(self.is_ready(up, memo) for up in self._suppliers(proc))
        memo[proc.identifier] = ready
        return ready

    # --- properties -------------------------------------------------------------

    def find_property(self, path: str) -> Property:
        proc_id, _, prop_id = path.partition(".")
        if not prop_id:
            raise UnknownProperty(path)
        try:
            proc = self.processors[proc_id]
        except KeyError:
            raise UnknownProperty(path) from None
        try:
            return proc.properties[prop_id]
        except KeyError:
            raise UnknownProperty(path) from None

    def set_property(self, path: str, value: Any) -> None:
        """Set and propagate across links to a fixpoint (BFS, equality stop)."""
        first = self.find_property(path)
        first.coerce(value)  # type errors propagate nothing
        queue = deque([(path, value)])
        while queue:
            current_path, raw = queue.popleft()
            prop = self.find_property(current_path)
            coerced = prop.coerce(raw)
            if prop.value == coerced:
                continue
            prop.value = coerced
            if prop.owner is not None:
                prop.owner.invalidate(prop.invalidation_level)
            for link in sorted((l for l in self.links if l.src == current_path), key=lambda l: l.dst):
                queue.append((link.dst, coerced))

    def add_link(self, src: str, dst: str, bidirectional: bool = False) -> None:
        src_prop = self.find_property(src)
        dst_prop = self.find_property(dst)
        if src_prop.value_type != dst_prop.value_type:
            raise TypeMismatch(f"link {src} -> {dst}: {src_prop.value_type} != {dst_prop.value_type}")
        link = PropertyLink(src, dst)
        if link not in self.links:
            self.links.append(link)
        if bidirectional:
            back = PropertyLink(dst, src)
            if back not in self.links:
                self.links.append(back)

    def remove_link(self, src: str, dst: str) -> None:
        self.links = [l for l in self.links if not (l.src == src and l.dst == dst)]

    # --- evaluation ----------------------------------------------------------------

    def _topological_order(self) -> list[Processor]:
        indegree = {pid: 0 for pid in self.processors}
        for conn in self.connections:
            indegree[conn.dst_processor] += 1
        ready = sorted(pid for pid, deg in indegree.items() if deg == 0)
        order = []
        while ready:
            pid = ready.pop(0)
            proc = self.processors[pid]
            order.append(proc)
            changed = False
            for consumer in self._consumers(proc):
                indegree[consumer.identifier] -= 1
                if indegree[consumer.identifier] == 0:
                    ready.append(consumer.identifier)
                    changed = True
            if changed:
                ready.sort()
        if len(order) != len(self.processors):
            raise CycleDetected("network contains a cycle")  # unreachable by construction
        return order

    def evaluate(self) -> EvaluationReport:
        """Process invalid-but-ready processors in topological order.

        Downstream of anything processed is reprocessed; not-ready processors
        and their dependents are skipped and remain invalid. A processor
        exception stops evaluation with ProcessorFailure.
        """
        if self.lock_depth > 0:
            raise NetworkLocked("evaluate() called while the network is locked")
        report = EvaluationReport()
        processed: set[str] = set()
        blocked: set[str] = set()
        for proc in self._topological_order():
            ups = self._suppliers(proc)
            if any(up.identifier in blocked for up in ups):
                blocked.add(proc.identifier)
                continue
            needs = proc.invalidation != InvalidationLevel.VALID or any(
                up.identifier in processed for up in ups)
            if not needs:
                continue
            if not self._locally_ready(proc):
                blocked.add(proc.identifier)
                continue
            if proc.invalidation == InvalidationLevel.INVALID_RESOURCES:
                proc.initialize_resources()
            start = time.perf_counter()
            try:
                proc.process()
            except Exception as exc:
                raise ProcessorFailure(proc.identifier, str(exc)) from exc
            duration = (time.perf_counter() - start) * 1000.0
            proc.invalidation = InvalidationLevel.VALID
            processed.add(proc.identifier)
            report.entries.append(EvaluationEntry(proc.identifier, duration))
        return report

    # --- lint ------------------------------------------------------------------------

    def lint(self) -> list[LintWarning]:
        """Processor-authoring guideline checks, ordered by processor id."""
        warnings: list[LintWarning] = []
        for pid in sorted(self.processors):
            proc = self.processors[pid]
            if len(proc.inports) >= 5:
                warnings.append(LintWarning(
                    guideline="G2", processor_id=pid, severity="warning",
                    message=f"{len(proc.inports)} inports; keep processors under five inports "
                            "by splitting the algorithm into smaller units"))
            for port_id in sorted(proc.inports):
                inport = proc.inports[port_id]
                if not inport.optional and inport.connection is None:
                    warnings.append(LintWarning(
                        guideline="G1", processor_id=pid, severity="info",
                        message=f"mandatory inport {port_id!r} is unconnected; "
                                "mandatory inputs gate evaluation until supplied"))
        return warnings


# --- composites -------------------------------------------------------------------


class CompositeProcessor(Processor):
    """A sub-network behaving as one processor.

    Inports/outports are the selection's cut edges; exposed inner properties
    appear under ``{innerProcessor}__{propertyId}``. Holds everything needed
    for an exact expand.
    """

    CLASS_ID = "__composite__"

    def __init__(self, inner: ProcessorNetwork, inport_map: dict[str, tuple[str, str]],
                 outport_map: dict[str, tuple[str, str]], exposed: list[str]):
        super().__init__()
        self.inner = inner
        self.inport_map = dict(inport_map)   # composite port id -> (inner proc, inner inport)
        self.outport_map = dict(outport_map)  # composite port id -> (inner proc, inner outport)
        self.exposed = list(exposed)
        for port_id, (proc_id, inner_port) in inport_map.items():
            tag = inner.processor(proc_id).inport(inner_port).tag
            optional = inner.processor(proc_id).inport(inner_port).optional
            self.add_inport(port_id, tag, optional)
        for port_id, (proc_id, inner_port) in outport_map.items():
            boundary = inner.processor(proc_id).outport(inner_port)
            boundary.exported = True
            self.add_outport(port_id, boundary.tag)
        for path in exposed:
            prop = inner.find_property(path)
            proc_id, _, prop_id = path.partition(".")
            alias = f"{proc_id}__{prop_id}"
            prop_alias = prop  # shared object: edits hit the inner property
            self.properties[alias] = prop_alias
        for proc in inner.processors.values():
            proc.parent_composite = self

    def inner_ready(self) -> bool:
        boundary = {self.inport_map[p] for p in self.inport_map}
        for proc in self.inner.processors.values():
            for inport in proc.inports.values():
                if (proc.identifier, inport.id) in boundary:
                    continue
                if not inport.optional and inport.connection is None:
                    return False
        return True

    def process(self) -> None:
        for port_id, (proc_id, inner_port) in self.inport_map.items():
            inner_proc = self.inner.processor(proc_id)
            inner_proc.inport(inner_port).inject(self.inports[port_id].data)
            inner_proc.invalidate(InvalidationLevel.INVALID_OUTPUT)
        self.inner.evaluate()
        for port_id, (proc_id, inner_port) in self.outport_map.items():
            self.outports[port_id].data = self.inner.processor(proc_id).outport(inner_port).data


def make_composite(net: ProcessorNetwork, processor_ids: list[str],
                   identifier: str, expose: Optional[list[str]] = None) -> CompositeProcessor:
    """Replace a connected selection with one composite processor."""
    ids = list(dict.fromkeys(processor_ids))
    if not ids:
        raise InvalidSelection("empty selection")
    selection = {pid: net.processor(pid) for pid in ids}
    if identifier in net.processors and identifier not in selection:
        raise DuplicateIdentifier(identifier)

    # connectivity of the induced subgraph (undirected over connections)
    if len(ids) > 1:
        adjacency: dict[str, set[str]] = {pid: set() for pid in ids}
        for conn in net.connections:
            if conn.src_processor in selection and conn.dst_processor in selection:
                adjacency[conn.src_processor].add(conn.dst_processor)
                adjacency[conn.dst_processor].add(conn.src_processor)
        seen = {ids[0]}
        frontier = [ids[0]]
        while frontier:
            for neighbor in adjacency[frontier.pop()]:
                if neighbor not in seen:
                    seen.add(neighbor)
                    frontier.append(neighbor)
        if seen != set(ids):
            raise InvalidSelection("selection is not a connected subgraph")

    for link in net.links:
        src_in = link.src.split(".", 1)[0] in selection
        dst_in = link.dst.split(".", 1)[0] in selection
        if src_in != dst_in:
            raise InvalidSelection(f"property link {link.src} -> {link.dst} crosses the selection boundary")

    expose = expose or []
    for path in expose:
        if path.split(".", 1)[0] not in selection:
            raise InvalidSelection(f"exposed property {path} is outside the selection")
        net.find_property(path)

    internal: list[Connection] = []
    incoming: list[Connection] = []   # outside outport -> selected inport
    outgoing: list[Connection] = []   # selected outport -> outside inport
    for conn in net.connections:
        src_in = conn.src_processor in selection
        dst_in = conn.dst_processor in selection
        if src_in and dst_in:
            internal.append(conn)
        elif dst_in:
            incoming.append(conn)
        elif src_in:
            outgoing.append(conn)

    inner = ProcessorNetwork(registry=net.registry)
    inner_links = [l for l in net.links
                   if l.src.split(".", 1)[0] in selection and l.dst.split(".", 1)[0] in selection]

    # detach from the outer network
    for conn in incoming + outgoing + internal:
        net.remove_connection(conn.src_processor, conn.src_port, conn.dst_processor, conn.dst_port)
    for link in inner_links:
        net.remove_link(link.src, link.dst)
    for pid in ids:
        proc = selection[pid]
        del net.processors[pid]
        inner.add_processor_instance(proc, pid)
    for conn in internal:
        inner.add_connection(conn.src_processor, conn.src_port, conn.dst_processor, conn.dst_port)
    for link in inner_links:
        inner.add_link(link.src, link.dst)

    inport_map = {f"{c.dst_processor}__{c.dst_port}": (c.dst_processor, c.dst_port) for c in incoming}
    outport_map = {f"{c.src_processor}__{c.src_port}": (c.src_processor, c.src_port) for c in outgoing}
    composite = CompositeProcessor(inner, inport_map, outport_map, expose)
    net.add_processor_instance(composite, identifier)
    composite.invalidation = InvalidationLevel.INVALID_RESOURCES

    # app-exposed paths into the selection follow the composite alias (when the
    # property is exposed on the composite) or are dropped (no longer reachable)
    remapped = set()
    for path in net.app_exposed:
        if path.split(".", 1)[0] not in selection:
            remapped.add(path)
        elif path in expose:
            pid, _, prop_id = path.partition(".")
            remapped.add(f"{identifier}.{pid}__{prop_id}")
    net.app_exposed = remapped

    for conn in incoming:
        net.add_connection(conn.src_processor, conn.src_port, identifier, f"{conn.dst_processor}__{conn.dst_port}")
    for conn in outgoing:
        net.add_connection(identifier, f"{conn.src_processor}__{conn.src_port}", conn.dst_processor, conn.dst_port)
    return composite


def expand_composite(net: ProcessorNetwork, identifier: str) -> list[str]:
    """Exact inverse of make_composite; returns the restored identifiers."""
    proc = net.processor(identifier)
    if not isinstance(proc, CompositeProcessor):
        raise InvalidSelection(f"{identifier} is not a composite")
    inner = proc.inner
    clashes = [pid for pid in inner.processors if pid in net.processors and pid != identifier]
    if clashes:
        raise DuplicateIdentifier(f"cannot expand, identifiers in use: {clashes}")

    internal = inner.connections
    inner_links = list(inner.links)
    # external cut edges, re-targeted at the inner endpoints
    incoming = [(c.src_processor, c.src_port, *proc.inport_map[c.dst_port])
                for c in net.connections if c.dst_processor == identifier]
    outgoing = [(*proc.outport_map[c.src_port], c.dst_processor, c.dst_port)
                for c in net.connections if c.src_processor == identifier]
    alias_to_inner = {path.replace(".", "__", 1): path for path in proc.exposed}
    restored_exposed = set()
    for path in net.app_exposed:
        pid, _, prop_id = path.partition(".")
        if pid == identifier and prop_id in alias_to_inner:
            restored_exposed.add(alias_to_inner[prop_id])
        elif pid != identifier:
            restored_exposed.add(path)
    net.remove_processor(identifier)
    net.app_exposed = restored_exposed

    restored = []
    for pid, inner_proc in inner.processors.items():
        inner_proc.parent_composite = None
        for inport in inner_proc.inports.values():
            inport.connection = None
            inport._injected = None
        for outport in inner_proc.outports.values():
            outport.connections = []
            outport.exported = False
        net.add_processor_instance(inner_proc, pid)
        restored.append(pid)
    for conn in internal:
        net.add_connection(conn.src_processor, conn.src_port, conn.dst_processor, conn.dst_port)
    for link in inner_links:
        net.add_link(link.src, link.dst)
    for edge in incoming + outgoing:
        net.add_connection(*edge)
    return restored
