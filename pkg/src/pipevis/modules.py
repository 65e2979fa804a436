"""Module (plugin) descriptors, factories, version gating, hot reload, watches.

A module declares everything it contributes: processor classes, platforms,
converter factories, port inspectors, debug-info providers, and doc pages.
Loading is atomic: a failing load rolls back every registration it made.

Hot reload is a descriptor swap bracketed by a workspace round-trip: the
network is serialized, the module replaced, and the network deserialized, so
identifiers, connections, links, and property values survive while processor
instances are rebuilt fresh.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

from .datacore import Converter, PlatformRegistry
from .errors import (
    DuplicateModule,
    MissingDependency,
    ModuleNotLoaded,
    ReloadFailure,
    UnknownClass,
    UnreadablePath,
    VersionMismatch,
)
from .network import InvalidationLevel, Processor, ProcessorNetwork

log = logging.getLogger(__name__)

CORE_VERSION = (1, 0)

Version = tuple[int, int]


@dataclass(frozen=True)
class PlatformDecl:
    id: str
    shared_host: Optional[str] = None


@dataclass
class ModuleDescriptor:
    """Everything a module contributes, declaratively."""

    name: str
    version: Version = (1, 0)
    core_version: Version = CORE_VERSION
    dependencies: list[tuple[str, Version]] = field(default_factory=list)
    processors: list[type[Processor]] = field(default_factory=list)
    platforms: list[PlatformDecl] = field(default_factory=list)
    converters: list[Callable[[], Converter]] = field(default_factory=list)
    inspectors: list[Any] = field(default_factory=list)  # inspection.PortInspector
    debug_providers: dict[type, Callable[[Any], dict]] = field(default_factory=dict)
    doc_pages: list[tuple[str, str, str]] = field(default_factory=list)  # (slug, title, markdown)

    def manifest(self) -> bytes:
        """Deterministic JSON manifest (external interface for data-only modules)."""
        doc = {
            "name": self.name,
            "version": list(self.version),
            "coreVersion": list(self.core_version),
            "dependencies": [[n, list(v)] for n, v in self.dependencies],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


@dataclass
class _LoadedModule:
    descriptor: ModuleDescriptor
    class_ids: list[str]
    platform_ids: list[str]
    converters: list[Converter]
    inspector_tags: list[tuple[str, Any]]   # (tag, shadowed entry or None)
    provider_types: list[tuple[type, Any]]  # (payload type, shadowed entry or None)
    doc_slugs: list[tuple[str, Any]]        # (slug, shadowed entry or None)


@dataclass
class WatchedResource:
    path: Path
    last_digest: str
    subscribers: set[str] = field(default_factory=set)


@dataclass(frozen=True)
class ChangeEvent:
    path: str
    subscribers: tuple[str, ...]


def _digest_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class ModuleRegistry:
    """Loaded modules plus the factories and registries they populate."""

    def __init__(self, core_version: Version = CORE_VERSION):
        self.core_version = core_version
        self.platform_registry = PlatformRegistry()
        self._modules: dict[str, _LoadedModule] = {}
        self.processor_classes: dict[str, tuple[type[Processor], str]] = {}
        self.port_inspectors: dict[str, tuple[Any, str]] = {}
        self.debug_providers: dict[type, tuple[Callable[[Any], dict], str]] = {}
        self.doc_pages: dict[str, tuple[str, str, str]] = {}  # slug -> (module, title, markdown)
        self.known_providers: dict[str, str] = {}  # classId -> module name, survives unload
        self.watches: dict[str, WatchedResource] = {}

    # --- factory ---------------------------------------------------------------

    @property
    def module_names(self) -> list[str]:
        return list(self._modules)

    def descriptor(self, name: str) -> ModuleDescriptor:
        try:
            return self._modules[name].descriptor
        except KeyError:
            raise ModuleNotLoaded(name) from None

    def has_class(self, class_id: str) -> bool:
        return class_id in self.processor_classes

    def provider_of(self, class_id: str) -> Optional[str]:
        return self.known_providers.get(class_id)

    def module_of(self, class_id: str) -> Optional[str]:
        entry = self.processor_classes.get(class_id)
        return entry[1] if entry else None

    def create_processor(self, class_id: str) -> Processor:
        entry = self.processor_classes.get(class_id)
        if entry is None:
            raise UnknownClass(class_id)
        return entry[0]()

    def catalog(self) -> list[str]:
        return sorted(self.processor_classes)

    # --- load / unload ------------------------------------------------------------

    def load_module(self, desc: ModuleDescriptor) -> None:
        if desc.name in self._modules:
            raise DuplicateModule(desc.name)
        if desc.core_version[0] != self.core_version[0]:
            raise VersionMismatch(
                f"module {desc.name} was built against core {desc.core_version[0]}.x, "
                f"running core is {self.core_version[0]}.x")
        for dep_name, min_version in desc.dependencies:
            dep = self._modules.get(dep_name)
            if dep is None:
                raise MissingDependency(f"module {desc.name} requires {dep_name}")
            if tuple(dep.descriptor.version) < tuple(min_version):
                raise MissingDependency(
                    f"module {desc.name} requires {dep_name} >= {min_version}, "
                    f"loaded is {dep.descriptor.version}")

        loaded = _LoadedModule(desc, [], [], [], [], [], [])
        try:
            for decl in desc.platforms:
                self.platform_registry.register_platform(decl.id)
                loaded.platform_ids.append(decl.id)
                if decl.shared_host is not None:
                    self.platform_registry.shared_platform_constraint(decl.id, decl.shared_host)
            for factory in desc.converters:
                conv = factory()
                self.platform_registry.register_converter(conv)
                loaded.converters.append(conv)
            for cls in desc.processors:
                class_id = cls.CLASS_ID
                if class_id in self.processor_classes:
                    raise DuplicateModule(
                        f"class {class_id} already provided by module {self.processor_classes[class_id][1]}")
                self.processor_classes[class_id] = (cls, desc.name)
                loaded.class_ids.append(class_id)
            for inspector in desc.inspectors:
                inspector.validate(self)
                previous = self.port_inspectors.get(inspector.target_tag)
                if previous is not None:
                    log.warning("port inspector for tag %r from module %s replaces the one from %s",
                                inspector.target_tag, desc.name, previous[1])
                self.port_inspectors[inspector.target_tag] = (inspector, desc.name)
                loaded.inspector_tags.append((inspector.target_tag, previous))
            for payload_type, provider in desc.debug_providers.items():
                loaded.provider_types.append((payload_type, self.debug_providers.get(payload_type)))
                self.debug_providers[payload_type] = (provider, desc.name)
            for slug, title, markdown in desc.doc_pages:
                loaded.doc_slugs.append((slug, self.doc_pages.get(slug)))
                self.doc_pages[slug] = (desc.name, title, markdown)
        except Exception:
            self._rollback(loaded)
            raise

        self._modules[desc.name] = loaded
        for class_id in loaded.class_ids:
            self.known_providers[class_id] = desc.name

    def _rollback(self, loaded: _LoadedModule) -> None:
        for slug, previous in reversed(loaded.doc_slugs):
            if previous is None:
                self.doc_pages.pop(slug, None)
            else:
                self.doc_pages[slug] = previous
        for payload_type, previous in reversed(loaded.provider_types):
            if previous is None:
                self.debug_providers.pop(payload_type, None)
            else:
                self.debug_providers[payload_type] = previous
        for tag, previous in reversed(loaded.inspector_tags):
            if previous is None:
                self.port_inspectors.pop(tag, None)
            else:
                self.port_inspectors[tag] = previous
        for class_id in loaded.class_ids:
            self.processor_classes.pop(class_id, None)
        self.platform_registry.unregister_converters(loaded.converters)
        for platform_id in loaded.platform_ids:
            self.platform_registry.unregister_platform(platform_id)

    def unload_module(self, name: str) -> ModuleDescriptor:
        loaded = self._modules.get(name)
        if loaded is None:
            raise ModuleNotLoaded(name)
        for other in self._modules.values():
            if other is loaded:
                continue
            if any(dep_name == name for dep_name, _ in other.descriptor.dependencies):
                raise MissingDependency(
                    f"cannot unload {name}: module {other.descriptor.name} depends on it")
        self._rollback(loaded)
        del self._modules[name]
        return loaded.descriptor

    # --- hot reload ------------------------------------------------------------------

    def reload_module(self, net: ProcessorNetwork, name: str, new_desc: ModuleDescriptor) -> ProcessorNetwork:
        """Swap a module's implementation, carrying the network across.

        Returns the new network. Any failure rolls the registry back to the
        old module and leaves the given network untouched.
        """
        from .workspace import deserialize, document_class_ids, serialize

        if name not in self._modules:
            raise ModuleNotLoaded(name)
        doc = serialize(net)
        old_desc = self.unload_module(name)
        try:
            self.load_module(new_desc)
        except Exception:
            self.load_module(old_desc)
            raise
        missing = sorted(cid for cid in document_class_ids(doc) if not self.has_class(cid))
        if missing:
            self.unload_module(new_desc.name)
            self.load_module(old_desc)
            raise ReloadFailure(missing)
        try:
            return deserialize(self, doc)
        except Exception:
            self.unload_module(new_desc.name)
            self.load_module(old_desc)
            raise

    # --- watched resources ----------------------------------------------------------

    def watch(self, path: str | Path, processor_id: str) -> None:
        resolved = Path(path)
        try:
            digest = _digest_file(resolved)
        except OSError as exc:
            raise UnreadablePath(f"{resolved}: {exc}") from exc
        key = str(resolved)
        entry = self.watches.get(key)
        if entry is None:
            entry = WatchedResource(resolved, digest)
            self.watches[key] = entry
        entry.subscribers.add(processor_id)

    def unwatch(self, path: str | Path, processor_id: str) -> None:
        entry = self.watches.get(str(Path(path)))
        if entry is not None:
            entry.subscribers.discard(processor_id)
            if not entry.subscribers:
                del self.watches[str(Path(path))]

    def poll_watches(self, net: Optional[ProcessorNetwork] = None) -> list[ChangeEvent]:
        """Digest-compare every watched file; invalidate subscribers on change."""
        events = []
        for key in sorted(self.watches):
            entry = self.watches[key]
            try:
                digest = _digest_file(entry.path)
            except OSError:
                continue  # transiently unreadable; keep the old digest
            if digest == entry.last_digest:
                continue
            entry.last_digest = digest
            events.append(ChangeEvent(key, tuple(sorted(entry.subscribers))))
            if net is not None:
                for pid in sorted(entry.subscribers):
                    proc = net.processors.get(pid)
                    if proc is not None:
                        proc.invalidate(InvalidationLevel.INVALID_RESOURCES)
        return events
